"""Scikit-learn style estimators wrapping the text pipeline and the
keyword-assisted topic model.

``CorpusVectorizer`` turns raw study records (or plain strings) into an
index-sequence corpus; ``KeywordTopicModel`` fits the collapsed Gibbs
sampler over such a corpus. Both follow the fit/transform/get_params
protocol, so they compose with sklearn pipelines and grid searches.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .keyatm import FitConfig, HyperParams, KeywordSpec, estimate_phi, estimate_theta, fit, pi_hat
from .records import StudyRecord
from .textprep import (
    TokenizedCorpus,
    TokenizeOptions,
    build_vocabulary,
    modeling_text,
    tokenize,
    validate_keywords,
    vectorize,
)


def check_fitted(estimator, attribute: str) -> None:
    if not hasattr(estimator, attribute):
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet; call fit first")


def as_documents(X) -> list[tuple[str, str]]:
    """Accept study records, (id, text) pairs, or bare strings, and return
    (doc_id, text) pairs. Bare strings get positional ids."""
    docs: list[tuple[str, str]] = []
    for i, item in enumerate(X):
        if isinstance(item, StudyRecord):
            docs.append((item.id, modeling_text(item.title, item.abstract)))
        elif isinstance(item, str):
            docs.append((f"d{i}", item))
        elif isinstance(item, tuple) and len(item) == 2:
            doc_id, text = item
            docs.append((str(doc_id), str(text)))
        else:
            raise TypeError(
                "X must contain StudyRecord objects, strings, or (id, text) pairs")
    return docs


def check_corpus(X) -> TokenizedCorpus:
    if not isinstance(X, TokenizedCorpus):
        raise TypeError("X must be a TokenizedCorpus (use CorpusVectorizer)")
    return X


class CorpusVectorizer(TransformerMixin, BaseEstimator):
    """Learns a document-frequency filtered vocabulary and maps documents
    to word-index sequences.

    Parameters mirror the underlying vocabulary builder: words must appear
    in at least ``min_df`` documents and at most ``max_df_ratio`` of them;
    ``forced_words`` (keywords) survive both thresholds whenever they occur
    at all. ``options`` selects the tokenizer profile.
    """

    def __init__(self, min_df: int = 2, max_df_ratio: float = 0.95,
                 forced_words: Sequence[str] = (),
                 options: Optional[TokenizeOptions] = None):
        self.min_df = min_df
        self.max_df_ratio = max_df_ratio
        self.forced_words = forced_words
        self.options = options

    def fit(self, X, y=None):
        docs = as_documents(X)
        tokens = [tokenize(text, self.options) for _, text in docs]
        self.vocabulary_ = build_vocabulary(
            tokens, min_df=self.min_df, max_df_ratio=self.max_df_ratio,
            forced_words=self.forced_words)
        return self

    def transform(self, X) -> TokenizedCorpus:
        check_fitted(self, "vocabulary_")
        docs = as_documents(X)
        return vectorize(
            [(doc_id, tokenize(text, self.options)) for doc_id, text in docs],
            self.vocabulary_)

    def get_feature_names_out(self, input_features=None) -> np.ndarray:
        check_fitted(self, "vocabulary_")
        return np.asarray(self.vocabulary_.words, dtype=object)


class KeywordTopicModel(BaseEstimator):
    """Keyword-assisted topic model with a sklearn estimator surface.

    ``fit`` runs the collapsed Gibbs sampler on a TokenizedCorpus;
    ``transform`` returns document-topic proportions (held-out documents
    are folded in by resampling their tokens against the frozen fitted
    counts); ``predict`` returns each document's dominant topic index.
    """

    def __init__(self, keywords: Optional[dict] = None, extra_background: int = 1,
                 sweeps: int = 1500, burn_in: int = 500, seed: int = 0,
                 chains: int = 1, alpha=None, beta: float = 0.01,
                 beta_key: float = 0.1, gamma1: float = 1.0, gamma2: float = 1.0,
                 transform_sweeps: int = 50):
        self.keywords = keywords
        self.extra_background = extra_background
        self.sweeps = sweeps
        self.burn_in = burn_in
        self.seed = seed
        self.chains = chains
        self.alpha = alpha
        self.beta = beta
        self.beta_key = beta_key
        self.gamma1 = gamma1
        self.gamma2 = gamma2
        self.transform_sweeps = transform_sweeps

    def _hyper(self, n_topics: int) -> HyperParams:
        return HyperParams.defaults(
            n_topics, alpha=self.alpha, beta=self.beta, beta_key=self.beta_key,
            gamma1=self.gamma1, gamma2=self.gamma2)

    def fit(self, X, y=None):
        corpus = check_corpus(X)
        if not self.keywords:
            raise ValueError("keywords must map at least one topic to a word list")
        report = validate_keywords(self.keywords, corpus.vocabulary)
        spec = KeywordSpec.from_words(report.resolved(), corpus.vocabulary,
                                      extra_background=self.extra_background)
        config = FitConfig(sweeps=self.sweeps, burn_in=self.burn_in,
                           seed=self.seed, chains=self.chains)
        result = fit(corpus, spec, hyper=self._hyper(spec.n_topics), config=config)
        self.result_ = result
        self.spec_ = spec
        self.vocabulary_ = corpus.vocabulary
        self.doc_ids_ = list(corpus.doc_ids)
        self.topic_labels_ = list(spec.topic_labels)
        self.theta_ = estimate_theta(result.state, result.hyper)
        self.phi_ = estimate_phi(result.state, result.hyper)
        self.pi_ = pi_hat(result.state, result.hyper)
        self.keyword_report_ = report
        return self

    def _fold_in(self, sequences: list[list[int]]) -> np.ndarray:
        """Estimate theta for unseen documents against frozen counts.

        Each document is resampled independently: global word/switch counts
        stay fixed, only the document's own topic counts move, so fitted
        documents are untouched and results are order-independent.
        """
        state = self.result_.state
        hyper = self.result_.hyper
        alpha = hyper.alpha_array()
        n_topics = len(alpha)
        n_words = state.n_kw_reg.shape[1]

        # Frozen per-slot emission terms, shape (K, 2): slot 0 regular,
        # slot 1 keyword. Zero marks an unavailable slot.
        reg_denom = state.n_k_s0 + n_words * hyper.beta
        switch_total = state.n_k_s0 + state.n_k_s1 + hyper.gamma1 + hyper.gamma2
        has_keys = state.key_size > 0
        key_denom = np.maximum(state.key_size, 1) * hyper.beta_key + state.n_k_s1

        theta = np.zeros((len(sequences), n_topics))
        rng = np.random.default_rng(self.seed)
        for d, seq in enumerate(sequences):
            if not seq:
                theta[d] = alpha / alpha.sum()
                continue
            emit = np.zeros((len(seq), n_topics, 2))
            for i, w in enumerate(seq):
                reg = (state.n_kw_reg[:, w] + hyper.beta) / reg_denom
                reg = np.where(
                    has_keys,
                    reg * (state.n_k_s0 + hyper.gamma2) / switch_total,
                    reg)
                key = np.where(
                    has_keys & state.is_key[:, w],
                    (state.n_kw_key[:, w] + hyper.beta_key) / key_denom
                    * (state.n_k_s1 + hyper.gamma1) / switch_total,
                    0.0)
                emit[i, :, 0] = reg
                emit[i, :, 1] = key
            n_dk = np.zeros(n_topics)
            z = np.full(len(seq), -1, dtype=np.int64)
            for _ in range(self.transform_sweeps):
                for i in range(len(seq)):
                    if z[i] >= 0:
                        n_dk[z[i]] -= 1
                    weights = ((n_dk + alpha)[:, None] * emit[i]).ravel()
                    total = weights.sum()
                    target = rng.random() * total
                    slot = int(np.searchsorted(np.cumsum(weights), target))
                    slot = min(slot, weights.size - 1)
                    z[i] = slot // 2
                    n_dk[z[i]] += 1
            theta[d] = (n_dk + alpha) / (len(seq) + alpha.sum())
        return theta

    def transform(self, X) -> np.ndarray:
        check_fitted(self, "result_")
        corpus = check_corpus(X)
        if corpus.vocabulary.words != self.vocabulary_.words:
            raise ValueError("X was vectorized with a different vocabulary")
        if corpus.doc_ids == self.doc_ids_ \
                and corpus.sequences == [list(s) for s in _sequences(self.result_.state)]:
            return self.theta_.copy()
        return self._fold_in(corpus.sequences)

    def fit_transform(self, X, y=None) -> np.ndarray:
        self.fit(X, y)
        return self.theta_.copy()

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.transform(X), axis=1)

    def score(self, X=None, y=None) -> float:
        """Joint log score of the retained chain's final state."""
        check_fitted(self, "result_")
        return self.result_.final_score


def _sequences(state) -> list[list[int]]:
    """Recover per-document word sequences from a flattened model state."""
    out = []
    for d in range(len(state.doc_offsets) - 1):
        lo, hi = state.doc_offsets[d], state.doc_offsets[d + 1]
        out.append(state.word_of[lo:hi].tolist())
    return out
