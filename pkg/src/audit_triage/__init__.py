"""Checklist-audit triage: duplicate detection, pass prediction, severity
gating, priority assignment, and a review service for human adjudication."""

__version__ = "0.1.0"

from .corpus import (CheckRecord, DatasetSplit, LoadResult, SeverityEvent,
                     load_checks, save_checks, split_train_test)
from .dedup import (BlockKey, DuplicatePair, Tier, TierBounds, block_key,
                    classify_tier, dedup_report, find_pairs, pair_candidates,
                    score_pair)
from .metrics import (ConfusionMatrix, EvalReport, accuracy, confusion,
                      evaluate_scores, f1, f1_fail, roc_auc, sensitivity,
                      specificity)
from .severity import (SeverityModel, SeverityScore, elbow_select, fit_severity_model,
                       kmeans, severity_gate, severity_score)
from .synth import CorpusSpec, GroundTruth, synthesize_corpus, synthesize_severity_events
from .textprep import (TextPrepConfig, TokenList, Vocabulary, build_vocabulary,
                       fold_typos, normalize, stem)
from .triage import (Priority, PriorityBounds, Reason, TriageConfig, TriageDecision,
                     assign_priority, run_triage, summary_report, triage_check,
                     whatif_sweep)
from .vectors import (EmbeddingConfig, EmbeddingModel, SparseVector, cosine_similarity,
                      count_vectorize, doc_vector, load_embeddings, save_embeddings,
                      train_embeddings)
