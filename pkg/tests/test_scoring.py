from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tscdn.corpus import Corpus, EventId
from tscdn.scoring import (CategoryVector, EmptyCorpusError, Stemmer, TermVector,
                           TextPipeline, adapt_categories, build_categories,
                           build_corpus_stats, build_event_vector,
                           build_query_vector, cosine, ief, load_stemmer,
                           load_stopwords, normalize_token, tf, tf_ief, tokenize)

from conftest import make_event, synth_corpus, ts
from oracles import ScoreOracle

PLAIN = TextPipeline()   # no stopwords, identity stemmer


def corpus_of(texts: list[str]) -> Corpus:
    corpus = Corpus()
    for i, text in enumerate(texts):
        make_event(corpus, "c", str(i), [(ts(hour=1 + i), text)])
    return corpus


# -- tokenize -------------------------------------------------------------------

def test_tokenize_persian_whitespace():
    assert tokenize("واکسن کرونا") == ["واکسن", "کرونا"]


def test_tokenize_folds_and_splits_punctuation():
    assert tokenize("COVID-19, vaccine!") == ["covid", "19", "vaccine"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_strips_emoji_keeps_digits():
    assert tokenize("🔥 fire 2020 🔥") == ["fire", "2020"]


def test_tokenize_keeps_zwnj_joined_words():
    assert tokenize("کتاب‌ها هستند") == ["کتاب‌ها", "هستند"]


# -- normalize_token ----------------------------------------------------------------

def test_stopword_dropped():
    stopwords = load_stopwords()
    assert "و" in stopwords
    assert normalize_token("و", stopwords, Stemmer()) is None


def test_identity_stemmer_passthrough():
    assert normalize_token("vaccines", set(), Stemmer()) == "vaccines"


def test_shipped_suffix_stemmer():
    stemmer = load_stemmer()
    # by the rule table: the "<ZWNJ>ها" suffix strips, leaving the stem
    assert stemmer.stem("کتاب‌ها") == "کتاب"
    assert normalize_token("کتاب‌ها", set(), stemmer) == "کتاب"
    # a bare "ها" inside a word is untouched (no ZWNJ, no rule)
    assert stemmer.stem("تنها") == "تنها"


# -- tf ------------------------------------------------------------------------------

def test_tf_examples():
    assert tf("a", ["a", "a", "b"]) == pytest.approx(2 / 3)
    assert tf("z", ["a", "a", "b"]) == 0.0
    assert tf("a", []) == 0.0


def test_tf_distribution_sums_to_one():
    tokens = tokenize("x y y z z z")
    total = sum(tf(t, tokens) for t in set(tokens))
    assert total == pytest.approx(1.0)


# -- ief -----------------------------------------------------------------------------

def four_event_stats():
    corpus = corpus_of(["x y", "y", "y", "y"])
    return build_corpus_stats(corpus, PLAIN)


def test_ief_values():
    stats = four_event_stats()
    assert ief("x", stats) == pytest.approx(2.0)          # log2(4/1)
    assert ief("y", stats) == pytest.approx(0.0)          # log2(4/4)
    assert ief("unseen", stats) == pytest.approx(3.0)     # sentinel log2(8)


def test_ief_empty_corpus_error():
    stats = build_corpus_stats(Corpus(), PLAIN)
    with pytest.raises(EmptyCorpusError):
        ief("x", stats)


def test_ief_nonnegative_and_zero_iff_everywhere():
    corpus = synth_corpus(seed=5, n_events=20, vocab_size=8, multi_version_rate=0)
    stats = build_corpus_stats(corpus, PLAIN)
    for term, count in stats.ef.items():
        value = ief(term, stats)
        assert value >= 0.0
        assert (value == 0.0) == (count == stats.total_events)


# -- tf_ief ----------------------------------------------------------------------------

def test_tf_ief_product():
    corpus = corpus_of(["a a b", "b", "b", "b"])
    stats = build_corpus_stats(corpus, PLAIN)
    event = EventId("c", "0")
    assert tf_ief("a", event, stats) == pytest.approx((2 / 3) * 2.0)   # 4/3
    assert tf_ief("missing", event, stats) == 0.0


def test_tf_ief_matches_bruteforce_oracle():
    corpus = synth_corpus(seed=11, n_events=20, vocab_size=15, multi_version_rate=0)
    stats = build_corpus_stats(corpus, PLAIN)
    oracle = ScoreOracle(corpus)
    for event in corpus.events:
        for term in set(oracle.tokens[event]) | {"neverseen"}:
            assert tf_ief(term, event, stats) == pytest.approx(
                oracle.tf_ief(term, event), abs=1e-9)


# -- event vectors -----------------------------------------------------------------------

def test_single_unique_term_vector():
    corpus = corpus_of(["unique common", "common", "common", "common"])
    stats = build_corpus_stats(corpus, PLAIN)
    vector = build_event_vector(EventId("c", "0"), stats)
    assert set(vector.weights) == {"unique"}               # common has ief 0
    assert vector.weights["unique"] == pytest.approx(0.5 * 2.0)


def test_empty_text_vector():
    corpus = corpus_of(["", "w"])
    stats = build_corpus_stats(corpus, PLAIN)
    vector = build_event_vector(EventId("c", "0"), stats)
    assert vector.weights == {} and vector.norm == 0.0


def test_five_event_fixture_hand_table():
    corpus = corpus_of([
        "flood flood rain",        # e0
        "flood city",              # e1
        "earthquake city city",    # e2
        "rain",                    # e3
        "vaccine news",            # e4
    ])
    stats = build_corpus_stats(corpus, PLAIN)
    l25 = math.log2(5 / 2)   # ef 2 of 5 events
    l5 = math.log2(5)        # ef 1 of 5 events
    expected = {
        "0": {"flood": (2 / 3) * l25, "rain": (1 / 3) * l25},
        "1": {"flood": (1 / 2) * l25, "city": (1 / 2) * l25},
        "2": {"earthquake": (1 / 3) * l5, "city": (2 / 3) * l25},
        "3": {"rain": 1.0 * l25},
        "4": {"vaccine": (1 / 2) * l5, "news": (1 / 2) * l5},
    }
    for local_id, weights in expected.items():
        vector = build_event_vector(EventId("c", local_id), stats)
        assert set(vector.weights) == set(weights)
        for term, weight in weights.items():
            assert vector.weights[term] == pytest.approx(weight, abs=1e-9)


# -- cosine ---------------------------------------------------------------------------------

def vec(**weights) -> TermVector:
    return TermVector.from_weights(weights)


def test_cosine_identical():
    assert cosine(vec(a=1.0, b=2.0), vec(a=1.0, b=2.0)) == pytest.approx(1.0)


def test_cosine_disjoint():
    assert cosine(vec(a=1.0), vec(b=1.0)) == 0.0


def test_cosine_half_overlap():
    assert cosine(vec(a=1.0, b=1.0), vec(a=1.0)) == pytest.approx(1 / math.sqrt(2))


def test_cosine_zero_vector_defined():
    assert cosine(vec(), vec(a=1.0)) == 0.0


# weights live in the TF-IEF range (tf in (0,1], ief in [0, log2(2|E|)]);
# denormal magnitudes whose square underflows are not reachable
sparse_vectors = st.dictionaries(
    st.sampled_from([f"t{i}" for i in range(8)]),
    st.one_of(st.just(0.0), st.floats(min_value=1e-6, max_value=10.0, allow_nan=False)),
    max_size=6,
)


@settings(max_examples=200, deadline=None)
@given(sparse_vectors, sparse_vectors)
def test_cosine_symmetry_and_range(wa, wb):
    a, b = TermVector.from_weights(wa), TermVector.from_weights(wb)
    ab, ba = cosine(a, b), cosine(b, a)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert -1e-9 <= ab <= 1.0 + 1e-9
    if a.weights:
        assert cosine(a, a) == pytest.approx(1.0)


def test_query_scaling_argsort_invariance():
    corpus = synth_corpus(seed=3, n_events=30, vocab_size=10, multi_version_rate=0)
    stats = build_corpus_stats(corpus, PLAIN)
    qvec = build_query_vector(["w1", "w2", "w3"], stats)
    scaled = TermVector.from_weights({t: 7.5 * w for t, w in qvec.weights.items()})
    events = list(corpus.events)
    # keys quantized to 1e-9: exact ties may move by an ulp under scaling
    base = sorted(events,
                  key=lambda e: (-round(cosine(qvec, build_event_vector(e, stats)), 9), e))
    after = sorted(events,
                   key=lambda e: (-round(cosine(scaled, build_event_vector(e, stats)), 9), e))
    assert base == after


# -- category adaptation -------------------------------------------------------------------

def test_colinear_category_similarity_one():
    corpus = corpus_of(["flood", "other thing", "third topic"])
    stats = build_corpus_stats(corpus, PLAIN)
    categories = build_categories({"A": ["flood"], "B": ["third"]}, stats, PLAIN)
    vector = build_event_vector(EventId("c", "0"), stats)
    adaptation = adapt_categories(vector, categories)
    assert adaptation["A"] == pytest.approx(1.0)
    assert adaptation["B"] == 0.0


def test_empty_event_all_zero():
    corpus = corpus_of(["", "w"])
    stats = build_corpus_stats(corpus, PLAIN)
    categories = build_categories({"A": ["w"]}, stats, PLAIN)
    vector = build_event_vector(EventId("c", "0"), stats)
    assert all(v == 0.0 for v in adapt_categories(vector, categories).values())


def test_category_table_hand_computed():
    corpus = corpus_of([
        "flood flood rain",
        "flood city",
        "earthquake city city",
        "rain",
        "vaccine news",
    ])
    stats = build_corpus_stats(corpus, PLAIN)
    categories = build_categories(
        {"Flood": ["flood"], "City": ["city"], "Vaccine": ["vaccine"]}, stats, PLAIN)
    # hand table: cos(category with single seed s, event e) =
    #   w_e(s) / |e| since the category vector is one-dimensional
    vector_e1 = build_event_vector(EventId("c", "1"), stats)   # flood city, equal weights
    adaptation = adapt_categories(vector_e1, categories)
    assert adaptation["Flood"] == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert adaptation["City"] == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert adaptation["Vaccine"] == 0.0

    vector_e2 = build_event_vector(EventId("c", "2"), stats)   # earthquake city city
    l25, l5 = math.log2(5 / 2), math.log2(5)
    norm = math.sqrt((l5 / 3) ** 2 + (2 * l25 / 3) ** 2)
    assert adapt_categories(vector_e2, categories)["City"] == pytest.approx(
        (2 * l25 / 3) / norm, abs=1e-9)


def test_shipped_category_seeds_load():
    from tscdn.scoring import load_category_seeds
    seeds = load_category_seeds()
    assert len(seeds) == 9
    assert "Coronavirus (COVID-19)" in seeds
    assert all(seed_list for seed_list in seeds.values())


# -- oracle equivalence across random corpora -------------------------------------------------

def test_oracle_equivalence_small_corpora():
    for seed in range(5):
        corpus = synth_corpus(seed=seed, n_events=25, vocab_size=12,
                              multi_version_rate=0)
        stats = build_corpus_stats(corpus, PLAIN)
        oracle = ScoreOracle(corpus)
        for event in corpus.events:
            vector = build_event_vector(event, stats)
            expected = oracle.event_vector(event)
            expected = {t: w for t, w in expected.items() if w != 0.0}
            assert set(vector.weights) == set(expected)
            for term, weight in expected.items():
                assert vector.weights[term] == pytest.approx(weight, abs=1e-9)
