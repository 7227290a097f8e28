"""Deterministic text normalization for checklist sentences.

The pipeline is: lowercase, strip punctuation, drop digit-only tokens,
drop stop words, stem, drop stems that collide with stop words, cap the
token count. Stemming uses classic suffix-stripping rules iterated to a
fixed point, so ``stem`` is idempotent by construction. Typo folding and
vocabulary construction are corpus-level passes over many token lists.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

_VOWELS = frozenset("aeiou")
_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")
_HAS_LETTER = re.compile(r"[a-z]")
_EDIT_ALPHABET = "abcdefghijklmnopqrstuvwxyz0123456789"


@lru_cache(maxsize=1)
def default_stopwords() -> frozenset[str]:
    """Stop-word list shipped with the package, one token per line."""
    text = resources.files("audit_triage.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_stopwords(path) -> frozenset[str]:
    """Read an override stop-word file (one token per line, UTF-8)."""
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


@dataclass(frozen=True)
class TextPrepConfig:
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    max_tokens: int = 20
    typo_min_freq: int = 5


@dataclass
class TokenList:
    """Normalized tokens for one source document."""

    tokens: list[str]
    source_id: str = ""

    def __iter__(self):
        return iter(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


# ---------------------------------------------------------------------------
# Stemming
# ---------------------------------------------------------------------------

def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return True if i == 0 else not _is_consonant(word, i - 1)
    return True


def _measure(stem: str) -> int:
    # number of vowel->consonant transitions in the [C](VC)^m[V] form
    m = 0
    prev_vowel = False
    for i in range(len(stem)):
        if _is_consonant(stem, i):
            if prev_vowel:
                m += 1
            prev_vowel = False
        else:
            prev_vowel = True
    return m


def _contains_vowel(stem: str) -> bool:
    return any(not _is_consonant(stem, i) for i in range(len(stem)))


def _ends_double_consonant(word: str) -> bool:
    return (
        len(word) >= 2
        and word[-1] == word[-2]
        and _is_consonant(word, len(word) - 1)
    )


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


_STEP2 = [
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
]

_STEP3 = [
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
]

_STEP4 = [
    "ement", "ance", "ence", "able", "ible", "ment", "ent", "ion", "ism",
    "ate", "iti", "ous", "ive", "ize", "al", "er", "ic", "ou",
]


def _replace_longest(word: str, rules, min_measure: int) -> str:
    best = None
    for suffix, repl in rules:
        if word.endswith(suffix) and (best is None or len(suffix) > len(best[0])):
            best = (suffix, repl)
    if best is None:
        return word
    stem = word[: len(word) - len(best[0])]
    if _measure(stem) > min_measure:
        return stem + best[1]
    return word


def _stem_once(word: str) -> str:
    if len(word) <= 2:
        return word

    # step 1a: plurals
    if word.endswith("sses"):
        word = word[:-2]
    elif word.endswith("ies"):
        word = word[:-2]
    elif word.endswith("ss"):
        pass
    elif word.endswith("s"):
        word = word[:-1]

    # step 1b: -ed / -ing
    if word.endswith("eed"):
        if _measure(word[:-3]) > 0:
            word = word[:-1]
    else:
        stripped = None
        if word.endswith("ed") and _contains_vowel(word[:-2]):
            stripped = word[:-2]
        elif word.endswith("ing") and _contains_vowel(word[:-3]):
            stripped = word[:-3]
        if stripped is not None:
            word = stripped
            if word.endswith(("at", "bl", "iz")):
                word += "e"
            elif _ends_double_consonant(word) and word[-1] not in "lsz":
                word = word[:-1]
            elif _measure(word) == 1 and _ends_cvc(word):
                word += "e"

    # step 1c: terminal y
    if word.endswith("y") and _contains_vowel(word[:-1]):
        word = word[:-1] + "i"

    word = _replace_longest(word, _STEP2, 0)
    word = _replace_longest(word, _STEP3, 0)

    # step 4: strip residual suffixes from long stems
    for suffix in _STEP4:
        if word.endswith(suffix):
            stem = word[: len(word) - len(suffix)]
            if suffix == "ion" and not stem.endswith(("s", "t")):
                continue
            if _measure(stem) > 1:
                word = stem
            break

    # step 5a: terminal e
    if word.endswith("e"):
        stem = word[:-1]
        m = _measure(stem)
        if m > 1 or (m == 1 and not _ends_cvc(stem)):
            word = stem

    # step 5b: terminal double l
    if _measure(word) > 1 and _ends_double_consonant(word) and word.endswith("l"):
        word = word[:-1]

    return word


def stem(word: str) -> str:
    """Suffix-stripping stem of a lowercase word, iterated to a fixed point."""
    current = word
    for _ in range(len(word) + 1):
        nxt = _stem_once(current)
        if nxt == current:
            return current
        current = nxt
    return current


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def tokenize(text: str) -> list[str]:
    """Lowercase and split on punctuation; keep tokens containing a letter."""
    parts = _TOKEN_SPLIT.split(text.lower())
    return [p for p in parts if p and _HAS_LETTER.search(p)]


def normalize(text: str, config: TextPrepConfig | None = None, source_id: str = "") -> TokenList:
    """Normalize raw text into a capped list of stemmed tokens.

    A stem that collides with a stop word is dropped as well, which keeps
    normalization idempotent: re-normalizing the joined output is a no-op.
    """
    cfg = config or TextPrepConfig()
    out: list[str] = []
    for token in tokenize(text):
        if token in cfg.stopwords:
            continue
        stemmed = stem(token)
        if not stemmed or stemmed in cfg.stopwords:
            continue
        out.append(stemmed)
        if len(out) == cfg.max_tokens:
            break
    return TokenList(out, source_id=source_id)


# ---------------------------------------------------------------------------
# Corpus-level passes
# ---------------------------------------------------------------------------

def token_frequencies(token_lists) -> Counter:
    freq: Counter = Counter()
    for tl in token_lists:
        freq.update(tl.tokens)
    return freq


def _distance1_edits(token: str):
    for i in range(len(token)):
        yield token[:i] + token[i + 1:]
    for i in range(len(token)):
        for ch in _EDIT_ALPHABET:
            if ch != token[i]:
                yield token[:i] + ch + token[i + 1:]
    for i in range(len(token) + 1):
        for ch in _EDIT_ALPHABET:
            yield token[:i] + ch + token[i:]


def fold_typos(token_lists: list[TokenList], typo_min_freq: int) -> list[TokenList]:
    """Replace rare tokens by a frequent token one edit away.

    A token with corpus frequency below ``typo_min_freq`` is rewritten to
    the most frequent token at edit distance 1 (ties broken by frequency,
    then lexicographically). Tokens at or above the threshold, and rare
    tokens with no frequent neighbour, pass through unchanged.
    """
    freq = token_frequencies(token_lists)
    frequent = {t for t, f in freq.items() if f >= typo_min_freq}
    mapping: dict[str, str] = {}
    for token, count in freq.items():
        if count >= typo_min_freq:
            continue
        candidates = {edit for edit in _distance1_edits(token) if edit in frequent}
        if not candidates:
            continue
        mapping[token] = min(candidates, key=lambda t: (-freq[t], t))
    return [
        TokenList([mapping.get(t, t) for t in tl.tokens], source_id=tl.source_id)
        for tl in token_lists
    ]


@dataclass
class Vocabulary:
    """Dense token index ordered by descending corpus frequency."""

    index: dict[str, int]
    frequency: dict[str, int]
    min_count: int

    def __len__(self) -> int:
        return len(self.index)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def tokens(self) -> list[str]:
        """Tokens in index order."""
        return sorted(self.index, key=self.index.__getitem__)

    def to_jsonl(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for token in self.tokens():
                row = {"token": token, "index": self.index[token],
                       "frequency": self.frequency[token]}
                fh.write(json.dumps(row) + "\n")


def build_vocabulary(token_lists, min_count: int = 1) -> Vocabulary:
    """Index tokens with frequency >= min_count, most frequent first."""
    freq = token_frequencies(token_lists)
    if not freq:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    kept = sorted((t for t, f in freq.items() if f >= min_count),
                  key=lambda t: (-freq[t], t))
    if not kept:
        raise ValueError(
            f"min_count={min_count} leaves an empty vocabulary "
            f"(max frequency is {max(freq.values())})"
        )
    return Vocabulary(
        index={t: i for i, t in enumerate(kept)},
        frequency={t: freq[t] for t in kept},
        min_count=min_count,
    )
