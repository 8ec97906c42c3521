"""Positional inverted index, exact-phrase search and top-r precision metrics."""

from __future__ import annotations

import json
from collections import Counter
from fractions import Fraction
from pathlib import Path
from typing import Collection, Iterable, Sequence

from .text import normalize

DEFAULT_R = (1, 5, 10, 15)

Phrase = tuple[str, ...]
RankedResults = list[tuple[str, int]]


class RetrievalError(ValueError):
    pass


class PhraseIndex:
    """token -> {doc_id: sorted positions}; documents kept in doc_id order."""

    def __init__(self, postings: dict[str, dict[str, list[int]]] | None = None, doc_ids: Iterable[str] = ()):
        self.postings: dict[str, dict[str, list[int]]] = postings or {}
        self.doc_ids: list[str] = sorted(doc_ids)
        self._cache: dict[Phrase, Counter] = {}

    @property
    def doc_count(self) -> int:
        return len(self.doc_ids)

    def posting_list(self, token: str) -> list[tuple[str, list[int]]]:
        return list(self.postings.get(token, {}).items())

    def phrase_counts(self, phrase: Sequence[str]) -> Counter:
        """Occurrences of the exact token sequence per document (overlaps counted)."""
        phrase = tuple(phrase)
        cached = self._cache.get(phrase)
        if cached is not None:
            return cached
        counts: Counter = Counter()
        if phrase and all(t in self.postings for t in phrase):
            first = self.postings[phrase[0]]
            rest = [self.postings[t] for t in phrase[1:]]
            for doc_id, positions in first.items():
                if any(doc_id not in p for p in rest):
                    continue
                later = [set(p[doc_id]) for p in rest]
                n = sum(1 for pos in positions if all(pos + k + 1 in s for k, s in enumerate(later)))
                if n:
                    counts[doc_id] = n
        self._cache[phrase] = counts
        return counts

    def to_json(self, **meta) -> dict:
        return {**meta, "doc_ids": self.doc_ids, "postings": {t: self.postings[t] for t in sorted(self.postings)}}

    @classmethod
    def from_json(cls, data: dict) -> "PhraseIndex":
        return cls({t: dict(p) for t, p in data["postings"].items()}, data["doc_ids"])

    def save(self, path: str | Path, **meta) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(self.to_json(**meta), f, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
            f.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "PhraseIndex":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def build_index(corpus) -> PhraseIndex:
    """Index every document's extracted text with the linker's tokenizer."""
    docs = corpus.documents if hasattr(corpus, "documents") else corpus
    postings: dict[str, dict[str, list[int]]] = {}
    for doc_id in sorted(docs):
        doc = docs[doc_id]
        text = doc if isinstance(doc, str) else doc.extracted_text
        for pos, token in enumerate(normalize(text)):
            postings.setdefault(token, {}).setdefault(doc_id, []).append(pos)
    return PhraseIndex(postings, docs.keys())


def rank(scores: Counter, r: int) -> RankedResults:
    ordered = sorted(((d, s) for d, s in scores.items() if s > 0), key=lambda x: (-x[1], x[0]))
    return ordered[:r]


def search(index: PhraseIndex, phrases: Iterable[Sequence[str]], r: int) -> RankedResults:
    """Top-r documents scored by summed exact-phrase occurrence counts."""
    if r < 1:
        raise RetrievalError("r must be a positive integer")
    unique = {tuple(p) for p in phrases if len(p)}
    if not unique:
        raise RetrievalError("no query terms")
    scores: Counter = Counter()
    for phrase in sorted(unique):
        scores.update(index.phrase_counts(phrase))
    return rank(scores, r)


def precision_fraction(results: RankedResults, r: int, expected: Collection[str]) -> Fraction:
    if r < 1:
        raise RetrievalError("r must be a positive integer")
    hits = sum(1 for doc_id, _ in results[:r] if doc_id in expected)
    return Fraction(hits, r)


def precision(results: RankedResults, r: int, expected: Collection[str]) -> float:
    """|top-r ∩ expected| / r; the denominator stays r for short result lists."""
    return float(precision_fraction(results, r, expected))


def per_r_fractions(index: PhraseIndex, phrases: Iterable[Sequence[str]], expected: Collection[str], rs: Sequence[int] = DEFAULT_R) -> dict[int, Fraction]:
    phrases = [tuple(p) for p in phrases]
    if not any(phrases):
        return {r: Fraction(0) for r in rs}
    results = search(index, phrases, max(rs))
    return {r: precision_fraction(results, r, expected) for r in rs}


def quality_fraction(index: PhraseIndex, phrases: Iterable[Sequence[str]], expected: Collection[str], rs: Sequence[int] = DEFAULT_R) -> Fraction:
    per_r = per_r_fractions(index, phrases, expected, rs)
    return sum(per_r.values(), Fraction(0)) / len(rs)


def quality(index: PhraseIndex, phrases: Iterable[Sequence[str]], expected: Collection[str], rs: Sequence[int] = DEFAULT_R) -> float:
    """Mean top-r precision over ``rs`` for the given title phrases.

    An empty phrase collection scores 0 rather than raising, since an
    unexpanded query may link to no article at all.
    """
    return float(quality_fraction(index, phrases, expected, rs))


def per_r_precision(index: PhraseIndex, phrases: Iterable[Sequence[str]], expected: Collection[str], rs: Sequence[int] = DEFAULT_R) -> dict[int, float]:
    return {r: float(v) for r, v in per_r_fractions(index, phrases, expected, rs).items()}
