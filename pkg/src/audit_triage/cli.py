"""Command-line entry points.

    audit-triage synth     generate a synthetic corpus + severity events
    audit-triage embed     train word embeddings from a corpus
    audit-triage train     train a classifier (blazing | dense | forest)
    audit-triage dedup     score duplicate pairs and report tiers
    audit-triage severity  cluster severity events and export the model
    audit-triage triage    run | sweep
    audit-triage serve     start the review service
    audit-triage demo      build a full service data directory
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from .corpus import load_checks, load_severity_events, save_checks, save_severity_events, split_train_test
from .dedup import TierBounds, dedup_report, find_pairs, load_pairs, save_pairs
from .metrics import evaluate_scores, report_table
from .textprep import TextPrepConfig, load_stopwords, normalize
from .vectors import EmbeddingConfig, load_embeddings, save_embeddings, train_embeddings


def _prep_from_args(args) -> TextPrepConfig:
    if getattr(args, "stopwords", None):
        return TextPrepConfig(stopwords=load_stopwords(args.stopwords))
    return TextPrepConfig()


def cmd_synth(args) -> int:
    from .synth import CorpusSpec, synthesize_corpus, synthesize_severity_events
    spec = CorpusSpec(
        n_checks=args.n_checks, fail_fraction=args.fail_fraction,
        n_duplicate_pairs=args.dup_pairs, n_paraphrase_pairs=args.para_pairs,
        vocab_themes=tuple(args.themes.split(",")) if args.themes else None,
        seed=args.seed,
    )
    records, truth = synthesize_corpus(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_checks(records, out / "checks.jsonl")
    (out / "ground_truth.json").write_text(json.dumps({
        "duplicate_pairs": truth.duplicate_pairs,
        "paraphrase_pairs": truth.paraphrase_pairs,
        "fail_cues": truth.fail_cues,
        "pass_cues": truth.pass_cues,
        "risk_flagged_ids": sorted(truth.risk_flagged_ids),
    }, indent=2), "utf-8")
    events = synthesize_severity_events(n_events=args.n_events, seed=args.seed + 1)
    save_severity_events(events, out / "severity_events.jsonl")
    print(f"wrote {len(records)} checks and {len(events)} severity events to {out}")
    return 0


def cmd_embed(args) -> int:
    prep = _prep_from_args(args)
    records = load_checks(args.data).records
    token_lists = [normalize(r.text(), prep, source_id=r.id) for r in records]
    model = train_embeddings(token_lists, EmbeddingConfig(
        dim=args.dim, window=args.window, epochs=args.epochs,
        learning_rate=args.lr, negatives=args.negatives,
        min_count=args.min_count, seed=args.seed))
    save_embeddings(model, args.out)
    print(f"trained {len(model.vocab)}x{model.dim} embeddings "
          f"(final objective {model.loss_by_epoch[-1]:.4f}) -> {args.out}")
    return 0


def cmd_train(args) -> int:
    from .classifiers import (DenseNetConfig, ForestConfig, RebalanceSpec,
                              SoftmaxTrainConfig, rebalance, save_model,
                              train_dense_net, train_random_forest,
                              train_softmax_classifier)
    prep = _prep_from_args(args)
    records = load_checks(args.data).records
    split = split_train_test(records, args.train_fraction, args.seed)
    train, test = split.train, split.test

    weights = None
    if args.ratio is not None:
        train, weights = rebalance(
            train, RebalanceSpec(target_ratio=args.ratio, upweight=args.upweight,
                                 seed=args.seed),
            labels=[r.throttle_label(args.label_mode) for r in train])

    started = time.perf_counter()
    if args.model in ("blazing", "dense"):
        if args.embeddings:
            embedding = load_embeddings(args.embeddings)
        else:
            token_lists = [normalize(r.text(), prep, source_id=r.id) for r in train]
            embedding = train_embeddings(token_lists, EmbeddingConfig(
                dim=args.dim, epochs=args.embed_epochs, seed=args.seed))
        if args.model == "blazing":
            model = train_softmax_classifier(
                train, embedding, SoftmaxTrainConfig(epochs=args.epochs, seed=args.seed),
                sample_weights=weights, label_mode=args.label_mode, prep=prep)
        else:
            model = train_dense_net(
                train, embedding, DenseNetConfig(epochs=args.epochs, seed=args.seed),
                sample_weights=weights, label_mode=args.label_mode, prep=prep)
    else:
        model = train_random_forest(
            train, ForestConfig(n_trees=args.n_trees, max_depth=args.max_depth,
                                seed=args.seed),
            sample_weights=weights, label_mode=args.label_mode)
    elapsed = time.perf_counter() - started

    save_model(model, args.out)
    scores = model.predict_proba(test)
    labels = [r.throttle_label(args.label_mode) for r in test]
    report = evaluate_scores(scores, labels, threshold=0.5, training_time=elapsed)
    print(report_table({args.model: report}))
    print(f"(fail-class F1 {report.f1_fail:.4f}; positive class = pass)")
    print(f"model -> {args.out}")
    return 0


def cmd_dedup(args) -> int:
    prep = _prep_from_args(args)
    records = load_checks(args.data).records
    bounds = TierBounds(identical_min=args.identical_min, high_min=args.high_min,
                        moderate_min=args.moderate_min)
    pairs = find_pairs(records, bounds=bounds, prep=prep)
    save_pairs(pairs, args.out)
    report = dedup_report(records, pairs=pairs)
    if args.report:
        Path(args.report).write_text(json.dumps(report.to_dict(), indent=2), "utf-8")
    print(report.table())
    print(f"{len(pairs)} pairs -> {args.out}")
    return 0


def cmd_severity(args) -> int:
    from .severity import fit_severity_model, save_severity_model
    prep = _prep_from_args(args)
    events = load_severity_events(args.events)
    embedding = load_embeddings(args.embeddings)
    k_range = None
    if args.k_range:
        lo, hi = args.k_range.split(":")
        k_range = range(int(lo), int(hi) + 1)
    model = fit_severity_model(events, embedding, k=args.k, k_range=k_range,
                               seed=args.seed, prep=prep)
    save_severity_model(model, args.out)
    if args.elbow_csv:
        with open(args.elbow_csv, "w", encoding="utf-8") as fh:
            fh.write("k,inertia\n")
            for k in sorted(model.inertia_by_k):
                fh.write(f"{k},{model.inertia_by_k[k]!r}\n")
    print(f"clustered {model.event_count()} events into k={model.k} -> {args.out}")
    return 0


def _load_triage_setup(config_path):
    from .classifiers import load_model
    from .severity import load_severity_model
    from .triage import TriageConfig
    raw = json.loads(Path(config_path).read_text("utf-8"))
    records = load_checks(raw["checks"]).records
    config = TriageConfig(
        pass_threshold=float(raw.get("pass_threshold", 0.5)),
        severity_t=float(raw.get("severity_t", 0.50)),
        label_mode=str(raw.get("label_mode", "throttled")),
    )
    classifiers_by_mode = {}
    for mode, path in raw.get("classifiers_by_mode", {}).items():
        classifiers_by_mode[mode] = load_model(path)
    if "classifier" in raw:
        model = load_model(raw["classifier"])
        classifiers_by_mode.setdefault(model.label_mode, model)
    severity_model = load_severity_model(raw["severity_model"])
    pairs = load_pairs(raw["pairs"]) if raw.get("pairs") else None
    return records, config, classifiers_by_mode, severity_model, pairs


def cmd_triage_run(args) -> int:
    from .triage import run_triage, save_decisions, summary_report
    records, config, classifiers, severity_model, pairs = _load_triage_setup(args.config)
    if config.label_mode not in classifiers:
        print(f"error: no classifier for label mode {config.label_mode!r}", file=sys.stderr)
        return 2
    decisions = run_triage(records, config, classifiers[config.label_mode],
                           severity_model, duplicate_pairs=pairs)
    save_decisions(decisions, args.out)
    summary = summary_report(decisions)
    if args.summary:
        Path(args.summary).write_text(summary.to_json(), "utf-8")
    counts = summary.reason_counts
    print(f"{summary.total} checks: {counts['throttled']} throttled, "
          f"{counts['blocked_by_severity']} blocked by severity, "
          f"{counts['predicted_fail']} predicted fail, "
          f"{counts['excluded_duplicate']} duplicate-excluded")
    print(f"combined reduction: {summary.combined_reduction_pct:.1f}%")
    return 0


def cmd_triage_sweep(args) -> int:
    from .triage import sweep_to_csv, whatif_sweep
    records, config, classifiers, severity_model, pairs = _load_triage_setup(args.config)
    t_values = [float(t) for t in args.t.split(",")]
    modes = args.labels.split(",")
    cells = whatif_sweep(records, config, classifiers, severity_model, t_values,
                         label_modes=modes, duplicate_pairs=pairs)
    sweep_to_csv(cells, args.out)
    for cell in cells:
        print(f"label={cell.label_mode} t={cell.severity_t:.2f} "
              f"trimmed={cell.trimmed_pct:.1f}% blocked={cell.blocked_pct:.1f}% "
              f"fail={cell.fail_pct:.1f}% excluded={cell.excluded_pct:.1f}%")
    print(f"sweep -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn
    from .service import create_app
    data_dir = args.data or os.environ.get("AUDIT_TRIAGE_DATA")
    if not data_dir:
        print("error: --data or AUDIT_TRIAGE_DATA is required", file=sys.stderr)
        return 2
    port = args.port or int(os.environ.get("AUDIT_TRIAGE_PORT", "8000"))
    app = create_app(data_dir=data_dir, console_dir=args.console)
    uvicorn.run(app, host=args.host, port=port, log_level="info")
    return 0


def cmd_demo(args) -> int:
    from .pipeline import build_demo_data
    info = build_demo_data(args.out, seed=args.seed, n_checks=args.n_checks)
    print(f"demo data ready in {info['out_dir']}: {info['n_checks']} checks, "
          f"{info['n_pairs']} candidate pairs, k={info['severity_k']} severity clusters, "
          f"combined reduction {info['combined_reduction_pct']:.1f}%")
    print(f"serve it with: audit-triage serve --data {info['out_dir']}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="audit-triage",
                                     description="Checklist-audit triage toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-checks", type=int, default=1200)
    p.add_argument("--fail-fraction", type=float, default=0.0625)
    p.add_argument("--dup-pairs", type=int, default=15)
    p.add_argument("--para-pairs", type=int, default=15)
    p.add_argument("--n-events", type=int, default=60)
    p.add_argument("--themes", default=None, help="comma-separated theme names")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("embed", help="train word embeddings")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dim", type=int, default=50)
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--negatives", type=int, default=5)
    p.add_argument("--min-count", type=int, default=1)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=["blazing", "dense", "forest"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--embeddings", default=None)
    p.add_argument("--ratio", type=float, default=None,
                   help="majority:minority rebalance ratio (e.g. 1.0, 1.5, 15)")
    p.add_argument("--upweight", action="store_true")
    p.add_argument("--label-mode", choices=["throttled", "ioq_only"], default="throttled")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--epochs", type=int, default=25)
    p.add_argument("--embed-epochs", type=int, default=3)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--n-trees", type=int, default=100)
    p.add_argument("--max-depth", type=int, default=16)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("dedup", help="find duplicate / similar checks")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None)
    p.add_argument("--identical-min", type=float, default=0.85)
    p.add_argument("--high-min", type=float, default=0.60)
    p.add_argument("--moderate-min", type=float, default=0.35)
    p.add_argument("--stopwords", default=None)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("severity", help="cluster severity events")
    p.add_argument("--events", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-range", default=None, help="lo:hi (inclusive)")
    p.add_argument("--elbow-csv", default=None)
    p.add_argument("--stopwords", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_severity)

    p = sub.add_parser("triage", help="run triage or threshold sweeps")
    tsub = p.add_subparsers(dest="triage_command", required=True)
    pr = tsub.add_parser("run", help="emit one decision per check")
    pr.add_argument("--config", required=True)
    pr.add_argument("--out", required=True)
    pr.add_argument("--summary", default=None)
    pr.set_defaults(func=cmd_triage_run)
    ps = tsub.add_parser("sweep", help="trimmed%% by threshold and label mode")
    ps.add_argument("--config", required=True)
    ps.add_argument("--t", required=True, help="comma-separated thresholds")
    ps.add_argument("--labels", default="throttled,ioq_only")
    ps.add_argument("--out", required=True)
    ps.set_defaults(func=cmd_triage_sweep)

    p = sub.add_parser("serve", help="start the review service")
    p.add_argument("--data", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--console", default=None, help="built console assets to mount at /console")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("demo", help="build a ready-to-serve data directory")
    p.add_argument("--out", required=True)
    p.add_argument("--n-checks", type=int, default=1200)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
