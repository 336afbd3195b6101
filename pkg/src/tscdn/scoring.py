"""Text normalization and the TF-IEF vector-space model.

Events play the role of documents: term weight is the in-event frequency
times log2(total events / events containing the term). Query/event
correlation is the cosine between their sparse weight vectors.
"""
from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources as importlib_resources
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Corpus, EventId
from .linkpath import nfc

ZWNJ = "‌"

# word characters plus ZWNJ so Persian clitic suffixes stay attached
_TOKEN_RE = re.compile(rf"[\w{ZWNJ}]+", re.UNICODE)


class EmptyCorpusError(Exception):
    """No events — inverse event frequency is undefined."""


def tokenize(text: str) -> list[str]:
    """NFC-normalize, case-fold, split on word boundaries. Punctuation and
    emoji drop out; digit runs are kept as tokens."""
    folded = nfc(text).casefold()
    out = []
    for raw in _TOKEN_RE.findall(folded):
        token = raw.strip(ZWNJ + "_")
        if token:
            out.append(token)
    return out


@dataclass
class Stemmer:
    """Ordered suffix→replacement table; the first matching rule is applied
    once. An empty table is the identity stemmer."""
    rules: list[tuple[str, str]] = field(default_factory=list)

    def stem(self, token: str) -> str:
        for suffix, replacement in self.rules:
            if token.endswith(suffix):
                stemmed = token[: len(token) - len(suffix)] + replacement
                if stemmed:
                    return stemmed
        return token


IDENTITY_STEMMER = Stemmer()


def normalize_token(token: str, stopword_set: set[str], stemmer: Stemmer) -> str | None:
    """Stopwords drop (None); everything else is stemmed and NFC-normalized."""
    if token in stopword_set:
        return None
    return nfc(stemmer.stem(token)) or None


def _read_resource(name: str) -> str:
    return importlib_resources.files("tscdn.resources").joinpath(name).read_text(encoding="utf-8")


def load_stopwords(path: Path | None = None) -> set[str]:
    text = Path(path).read_text(encoding="utf-8") if path else _read_resource("stopwords.txt")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(nfc(line))
    return words


def load_stemmer(path: Path | None = None) -> Stemmer:
    text = Path(path).read_text(encoding="utf-8") if path else _read_resource("stemmer.rules")
    rules = []
    for line in text.splitlines():
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        suffix, _, replacement = line.partition("\t")
        if suffix:
            rules.append((nfc(suffix), nfc(replacement.strip())))
    return Stemmer(rules)


@dataclass
class TextPipeline:
    """tokenize → stopword filter → stem, shared by indexing and queries."""
    stopwords: set[str] = field(default_factory=set)
    stemmer: Stemmer = field(default_factory=Stemmer)

    @classmethod
    def default(cls, *, stopwords_path: Path | None = None,
                stemmer_path: Path | None = None,
                use_stemmer: bool = False) -> "TextPipeline":
        # identity stemmer by default; the shipped suffix table is opt-in
        stemmer = load_stemmer(stemmer_path) if (use_stemmer or stemmer_path) else Stemmer()
        return cls(load_stopwords(stopwords_path), stemmer)

    def terms(self, text: str) -> list[str]:
        out = []
        for token in tokenize(text):
            term = normalize_token(token, self.stopwords, self.stemmer)
            if term is not None:
                out.append(term)
        return out

    def indexed_terms(self, text: str) -> list[tuple[int, str]]:
        """(surface token index, normalized term) for surviving tokens."""
        out = []
        for position, token in enumerate(tokenize(text)):
            term = normalize_token(token, self.stopwords, self.stemmer)
            if term is not None:
                out.append((position, term))
        return out


# -- corpus-level statistics ------------------------------------------------

@dataclass
class CorpusTermStats:
    """|E|, per-term event frequencies, and per-event term counts, built over
    the latest version of each event."""
    total_events: int
    ef: dict[str, int]
    event_terms: dict[EventId, Counter]
    event_totals: dict[EventId, int]

    def terms_of(self, event: EventId) -> Counter:
        return self.event_terms.get(event, Counter())


def build_corpus_stats(corpus: Corpus, pipeline: TextPipeline) -> CorpusTermStats:
    ef: Counter = Counter()
    event_terms: dict[EventId, Counter] = {}
    event_totals: dict[EventId, int] = {}
    for event in corpus.sorted_events():
        terms = pipeline.terms(corpus.latest(event).text)
        counts = Counter(terms)
        event_terms[event] = counts
        event_totals[event] = len(terms)
        for term in counts:
            ef[term] += 1
    return CorpusTermStats(corpus.event_count, dict(ef), event_terms, event_totals)


# -- TF / IEF ----------------------------------------------------------------

def tf(term: str, event_text_tokens: list[str]) -> float:
    """count(term)/len(tokens); 0 for an absent term or an empty token list."""
    if not event_text_tokens:
        return 0.0
    return event_text_tokens.count(term) / len(event_text_tokens)


def ief(term: str, stats: CorpusTermStats) -> float:
    """log2(|E|/ef); a term never seen gets the rarer-than-rarest sentinel
    log2(2|E|) so queries with novel terms stay total."""
    if stats.total_events == 0:
        raise EmptyCorpusError("cannot weight terms over an empty corpus")
    count = stats.ef.get(term, 0)
    if count == 0:
        return math.log2(2 * stats.total_events)
    return math.log2(stats.total_events / count)


def tf_ief(term: str, event: EventId, stats: CorpusTermStats) -> float:
    total = stats.event_totals.get(event, 0)
    if total == 0:
        return 0.0
    return (stats.terms_of(event).get(term, 0) / total) * ief(term, stats)


def tf_ief_counts(term: str, counts: Mapping[str, int], total: int,
                  stats: CorpusTermStats) -> float:
    """Per-version score: version-local tf with corpus-level ief."""
    if total == 0:
        return 0.0
    return (counts.get(term, 0) / total) * ief(term, stats)


# -- vectors -------------------------------------------------------------------

@dataclass
class TermVector:
    weights: dict[str, float]
    norm: float

    @classmethod
    def from_weights(cls, weights: Mapping[str, float]) -> "TermVector":
        kept = {t: float(w) for t, w in weights.items() if w != 0.0}
        return cls(kept, math.sqrt(sum(w * w for w in kept.values())))

    def __bool__(self) -> bool:
        return bool(self.weights)


def build_event_vector(event: EventId, stats: CorpusTermStats) -> TermVector:
    counts = stats.terms_of(event)
    total = stats.event_totals.get(event, 0)
    if total == 0:
        return TermVector.from_weights({})
    return TermVector.from_weights(
        {term: (count / total) * ief(term, stats) for term, count in counts.items()})


def build_query_vector(terms: list[str], stats: CorpusTermStats) -> TermVector:
    """The query is weighted like a tiny event: tf over its own terms × ief."""
    if not terms:
        return TermVector.from_weights({})
    counts = Counter(terms)
    total = len(terms)
    return TermVector.from_weights(
        {term: (count / total) * ief(term, stats) for term, count in counts.items()})


def cosine(q: TermVector, e: TermVector) -> float:
    if q.norm == 0.0 or e.norm == 0.0:
        return 0.0
    # iterate the first argument: deterministic summation order keeps exact
    # ties bitwise-stable across equivalent vectors
    dot = sum(w * e.weights.get(t, 0.0) for t, w in q.weights.items())
    return dot / (q.norm * e.norm)


# -- category adaptation ---------------------------------------------------------

@dataclass
class CategoryVector:
    name: str
    vector: TermVector
    seeds: list[str] = field(default_factory=list)


def load_category_seeds(path: Path | None = None) -> dict[str, list[str]]:
    text = Path(path).read_text(encoding="utf-8") if path else _read_resource("categories.json")
    doc = json.loads(text)
    return {nfc(name): [nfc(s) for s in seeds] for name, seeds in doc.items()}


def build_categories(seeds: Mapping[str, Iterable[str]], stats: CorpusTermStats,
                     pipeline: TextPipeline) -> list[CategoryVector]:
    """Seed keyword lists become vectors with the same tf×ief construction as
    events, so an event made of exactly one category's seeds is colinear with it."""
    out = []
    for name, seed_list in seeds.items():
        terms: list[str] = []
        for seed in seed_list:
            terms.extend(pipeline.terms(seed))
        out.append(CategoryVector(name, build_query_vector(terms, stats), list(seed_list)))
    return out


def adapt_categories(event_vector: TermVector,
                     categories: list[CategoryVector]) -> dict[str, float]:
    return {c.name: cosine(c.vector, event_vector) for c in categories}
