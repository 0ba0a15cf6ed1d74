"""Shared fixture builders for corpus and model tests."""

from __future__ import annotations

from egmkit.keyatm import KeywordSpec
from egmkit.textprep import TokenizedCorpus, Vocabulary


def make_vocab(n_words: int) -> Vocabulary:
    words = [f"w{i}" for i in range(n_words)]
    return Vocabulary(
        words=words,
        index={w: i for i, w in enumerate(words)},
        df=[1] * n_words,
    )


def make_corpus(sequences, n_words: int, doc_ids=None) -> TokenizedCorpus:
    ids = list(doc_ids) if doc_ids is not None else [f"d{j}" for j in range(len(sequences))]
    return TokenizedCorpus(
        doc_ids=ids,
        sequences=[[int(w) for w in seq] for seq in sequences],
        vocabulary=make_vocab(n_words),
        excluded_ids=[],
    )


def make_spec(keyword_sets, n_words: int, labels=None) -> KeywordSpec:
    names = list(labels) if labels is not None else [f"t{k}" for k in range(len(keyword_sets))]
    return KeywordSpec(
        topic_labels=tuple(names),
        keyword_indices=tuple(frozenset(s) for s in keyword_sets),
        n_words=n_words,
    )
