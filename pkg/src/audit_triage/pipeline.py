"""End-to-end artifact builder: corpus -> models -> scores -> service data dir.

Produces everything the review service and console need in one call, with
light hyperparameters sized for desk-scale runs.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

from .classifiers import (RebalanceSpec, SoftmaxTrainConfig, rebalance, save_model,
                          train_softmax_classifier)
from .corpus import save_checks, save_severity_events, split_train_test
from .dedup import TierBounds, dedup_report, find_pairs, save_pairs
from .service.artifacts import (CheckScores, CHECKS_FILE, CONFIG_FILE, PAIRS_FILE,
                                SCORES_FILE, save_scores)
from .severity import fit_severity_model, save_severity_model, severity_score
from .synth import CorpusSpec, synthesize_corpus, synthesize_severity_events
from .textprep import TextPrepConfig, normalize
from .triage import LABEL_MODES, TriageConfig, run_triage, save_decisions, summary_report
from .vectors import EmbeddingConfig, save_embeddings, train_embeddings

log = logging.getLogger(__name__)


def build_demo_data(out_dir, seed: int = 0, n_checks: int = 1200,
                    fail_fraction: float = 0.0625, n_duplicate_pairs: int = 15,
                    n_paraphrase_pairs: int = 15, n_events: int = 60,
                    embedding_dim: int = 32, embedding_epochs: int = 10,
                    embedding_lr: float = 0.2,
                    severity_k: int | None = None) -> dict:
    """Build a complete service data directory from a synthetic corpus."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    prep = TextPrepConfig()

    spec = CorpusSpec(n_checks=n_checks, fail_fraction=fail_fraction,
                      n_duplicate_pairs=n_duplicate_pairs,
                      n_paraphrase_pairs=n_paraphrase_pairs, seed=seed)
    records, truth = synthesize_corpus(spec)
    save_checks(records, out / CHECKS_FILE)
    (out / "ground_truth.json").write_text(json.dumps({
        "duplicate_pairs": truth.duplicate_pairs,
        "paraphrase_pairs": truth.paraphrase_pairs,
        "fail_cues": truth.fail_cues,
        "pass_cues": truth.pass_cues,
        "risk_flagged_ids": sorted(truth.risk_flagged_ids),
    }, indent=2), "utf-8")

    events = synthesize_severity_events(n_events=n_events, seed=seed + 1)
    save_severity_events(events, out / "severity_events.jsonl")

    split = split_train_test(records, 0.8, seed=seed)
    token_lists = [normalize(r.text(), prep, source_id=r.id) for r in split.train]
    embedding = train_embeddings(token_lists, EmbeddingConfig(
        dim=embedding_dim, epochs=embedding_epochs, learning_rate=embedding_lr, seed=seed))
    save_embeddings(embedding, out / "embeddings.txt")

    classifiers = {}
    for mode in LABEL_MODES:
        balanced, weights = rebalance(
            split.train, RebalanceSpec(target_ratio=1.0, upweight=False, seed=seed),
            labels=[r.throttle_label(mode) for r in split.train])
        model = train_softmax_classifier(
            balanced, embedding, SoftmaxTrainConfig(epochs=25, seed=seed),
            sample_weights=weights, label_mode=mode, prep=prep)
        classifiers[mode] = model
        save_model(model, out / f"classifier_{mode}.json")

    sev_model = fit_severity_model(events, embedding, k=severity_k,
                                   k_range=range(1, 9), seed=seed, restarts=3, prep=prep)
    save_severity_model(sev_model, out / "severity_model.json")
    with open(out / "elbow.csv", "w", encoding="utf-8") as fh:
        fh.write("k,inertia\n")
        for k in sorted(sev_model.inertia_by_k):
            fh.write(f"{k},{sev_model.inertia_by_k[k]!r}\n")

    pairs = find_pairs(records, bounds=TierBounds(), prep=prep)
    save_pairs(pairs, out / PAIRS_FILE)
    report = dedup_report(records, pairs=pairs)
    (out / "dedup_report.json").write_text(json.dumps(report.to_dict(), indent=2), "utf-8")

    scores: dict[str, CheckScores] = {}
    probs_by_mode = {mode: classifiers[mode].predict_proba(records) for mode in LABEL_MODES}
    for i, record in enumerate(records):
        scores[record.id] = CheckScores(
            p_pass={mode: float(probs_by_mode[mode][i]) for mode in LABEL_MODES},
            severity=severity_score(record, sev_model).score,
        )
    save_scores(scores, out / SCORES_FILE)

    config = TriageConfig()
    (out / CONFIG_FILE).write_text(json.dumps({
        "pass_threshold": config.pass_threshold,
        "severity_t": config.severity_t,
        "label_mode": config.label_mode,
    }, indent=2), "utf-8")

    decisions = run_triage(records, config, classifiers[config.label_mode], sev_model,
                           duplicate_pairs=pairs)
    save_decisions(decisions, out / "decisions.jsonl")
    summary = summary_report(decisions, dedup=report)
    (out / "summary.json").write_text(summary.to_json(), "utf-8")

    log.info("demo data written to %s (%d checks, %d pairs, k=%d clusters)",
             out, len(records), len(pairs), sev_model.k)
    return {
        "out_dir": str(out),
        "n_checks": len(records),
        "n_pairs": len(pairs),
        "severity_k": sev_model.k,
        "combined_reduction_pct": summary.combined_reduction_pct,
    }
