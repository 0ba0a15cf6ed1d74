"""Tokenization, vocabulary construction, and keyword validation.

Two tokenizer profiles are used throughout the package:

* the modeling profile (default): stopwords removed, tokens shorter than
  two characters dropped; this is what feeds the topic model;
* the matching profile (``MATCH_OPTIONS``): no stopword or length
  filtering; this is what boolean query evaluation runs on, so phrases
  containing stopwords or single-letter words still match.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Iterable, Mapping, Sequence

from .errors import EmptyVocabularyError, NoKeywordsForTopicError

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _load_default_stopwords() -> frozenset[str]:
    text = resources.files("egmkit.data").joinpath("stopwords_en.txt").read_text("utf-8")
    return parse_stopword_list(text)


def parse_stopword_list(text: str) -> frozenset[str]:
    """Stopword file format: one word per line, '#' comments allowed."""
    words = set()
    for line in text.splitlines():
        word = line.split("#", 1)[0].strip().lower()
        if word:
            words.add(word)
    return frozenset(words)


DEFAULT_STOPWORDS = _load_default_stopwords()


@dataclass(frozen=True)
class TokenizeOptions:
    """``stopwords=None`` disables stopword filtering. ``stemmer`` is any
    callable mapping a token to its stem (stemming is off by default and no
    stemmer is bundled)."""
    stopwords: frozenset[str] | None = DEFAULT_STOPWORDS
    min_len: int = 2
    stemmer: Callable[[str], str] | None = None


MODEL_OPTIONS = TokenizeOptions()
# Matching profile: no filtering at all, used for query evaluation.
MATCH_OPTIONS = TokenizeOptions(stopwords=None, min_len=1)


def tokenize(text: str, options: TokenizeOptions | None = None) -> list[str]:
    """Lowercase and split on any non-letter/digit run, then filter."""
    opts = options or MODEL_OPTIONS
    tokens = [t.lower() for t in _TOKEN_RE.findall(text)]
    if opts.min_len > 1:
        tokens = [t for t in tokens if len(t) >= opts.min_len]
    if opts.stopwords:
        tokens = [t for t in tokens if t not in opts.stopwords]
    if opts.stemmer is not None:
        tokens = [opts.stemmer(t) for t in tokens]
    return tokens


@dataclass
class Vocabulary:
    """Dense word <-> index mapping with per-word document frequencies."""
    words: list[str]
    index: dict[str, int]
    df: list[int]

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def to_dict(self) -> dict:
        return {"words": self.words, "df": self.df}

    @classmethod
    def from_dict(cls, d: dict) -> "Vocabulary":
        words = list(d["words"])
        return cls(words=words, index={w: i for i, w in enumerate(words)}, df=list(d["df"]))


def build_vocabulary(
    docs: Sequence[Sequence[str]],
    min_df: int = 2,
    max_df_ratio: float = 0.95,
    forced_words: Iterable[str] = (),
) -> Vocabulary:
    """Retain words with df >= min_df and df/D <= max_df_ratio.

    ``forced_words`` (the user's keywords) are kept whenever they occur at
    all, regardless of both thresholds. Order is deterministic: descending
    document frequency, ties broken lexicographically.
    """
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    if not (0.0 <= max_df_ratio <= 1.0):
        raise ValueError("max_df_ratio must be within [0, 1]")

    n_docs = len(docs)
    df: dict[str, int] = {}
    for doc in docs:
        for w in set(doc):
            df[w] = df.get(w, 0) + 1

    forced = {w for w in forced_words if df.get(w, 0) >= 1}
    kept = [
        w for w, n in df.items()
        if w in forced or (n >= min_df and (n_docs == 0 or n / n_docs <= max_df_ratio))
    ]
    if not kept:
        raise EmptyVocabularyError("no words survive the document-frequency thresholds")

    kept.sort(key=lambda w: (-df[w], w))
    return Vocabulary(words=kept, index={w: i for i, w in enumerate(kept)}, df=[df[w] for w in kept])


@dataclass
class TokenizedCorpus:
    """Per-document word-index sequences, linked back to document ids.

    Documents left with zero in-vocabulary tokens are excluded from
    ``sequences`` and listed in ``excluded_ids``.
    """
    doc_ids: list[str]
    sequences: list[list[int]]
    vocabulary: Vocabulary
    excluded_ids: list[str] = field(default_factory=list)

    @property
    def n_docs(self) -> int:
        return len(self.sequences)

    @property
    def n_tokens(self) -> int:
        return sum(len(s) for s in self.sequences)


def vectorize(docs: Sequence[tuple[str, Sequence[str]]], vocab: Vocabulary) -> TokenizedCorpus:
    """Map token sequences to index sequences, dropping out-of-vocabulary
    tokens but preserving order."""
    doc_ids: list[str] = []
    sequences: list[list[int]] = []
    excluded: list[str] = []
    for doc_id, tokens in docs:
        seq = [vocab.index[t] for t in tokens if t in vocab.index]
        if seq:
            doc_ids.append(doc_id)
            sequences.append(seq)
        else:
            excluded.append(doc_id)
    return TokenizedCorpus(doc_ids=doc_ids, sequences=sequences, vocabulary=vocab,
                           excluded_ids=excluded)


@dataclass
class TopicKeywordReport:
    topic: str
    present: list[str]
    absent: list[str]
    rejected_multiword: list[str]


@dataclass
class KeywordReport:
    topics: list[TopicKeywordReport]
    warnings: list[str]

    def resolved(self) -> dict[str, list[str]]:
        """Vocabulary words usable per topic, in declaration order."""
        return {t.topic: list(t.present) for t in self.topics}


def validate_keywords(
    keyword_lists: Mapping[str, Sequence[str]],
    vocab: Vocabulary,
    options: TokenizeOptions | None = None,
) -> KeywordReport:
    """Check each topic's keywords against the vocabulary.

    Keywords are normalized with the modeling tokenizer; a keyword that
    normalizes to more than one token is rejected (keywords are single
    tokens; express multiword concepts as their component words). The same
    keyword appearing under several topics is legal and only warned about.
    Raises NoKeywordsForTopicError when a topic resolves zero keywords.
    """
    opts = options or MODEL_OPTIONS
    topics: list[TopicKeywordReport] = []
    seen: dict[str, str] = {}
    warnings: list[str] = []

    for topic, raw_keywords in keyword_lists.items():
        present: list[str] = []
        absent: list[str] = []
        rejected: list[str] = []
        for raw in raw_keywords:
            tokens = tokenize(raw, opts)
            if len(tokens) > 1:
                rejected.append(raw)
                continue
            if not tokens:
                absent.append(raw)
                continue
            word = tokens[0]
            if word in vocab:
                if word in present:
                    continue
                present.append(word)
                if word in seen and seen[word] != topic:
                    warnings.append(
                        f"keyword '{word}' is shared by topics '{seen[word]}' and '{topic}'"
                    )
                else:
                    seen[word] = topic
            else:
                absent.append(raw)
        if not present:
            raise NoKeywordsForTopicError(
                f"topic '{topic}' has no keywords resolvable in the vocabulary"
            )
        topics.append(TopicKeywordReport(topic=topic, present=present, absent=absent,
                                         rejected_multiword=rejected))

    return KeywordReport(topics=topics, warnings=warnings)


def modeling_text(title: str, abstract: str) -> str:
    """Documents are modeled on title + abstract."""
    return f"{title}\n{abstract}".strip()
