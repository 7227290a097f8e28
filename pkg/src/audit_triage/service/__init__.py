"""HTTP facade and persistence for the reviewer console."""

from .app import ReviewService, create_app
from .artifacts import (CheckScores, DataBundle, load_bundle, load_scores,
                        load_snapshot, save_scores, write_snapshot)
from .state import DecisionLog, LogEntry, ReviewState, Thresholds, fresh_state, replay

__all__ = [
    "CheckScores", "DataBundle", "DecisionLog", "LogEntry", "ReviewService",
    "ReviewState", "Thresholds", "create_app", "fresh_state", "load_bundle",
    "load_scores", "load_snapshot", "replay", "save_scores", "write_snapshot",
]
