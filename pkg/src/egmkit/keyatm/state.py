"""Sampler state: token assignments plus the count tables they imply.

Layout: tokens are flattened in (document, position) order. ``z`` holds
the topic assignment and ``s`` the keyword-switch flag per token; the
count tables are derived bookkeeping that every operation must keep
consistent (``audit_state`` checks them all).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyCorpusError, InvariantViolation
from ..textprep import TokenizedCorpus
from .types import HyperParams, KeywordSpec


@dataclass
class ModelState:
    doc_of: np.ndarray      # int32 (N,) document index per token
    word_of: np.ndarray     # int32 (N,) word index per token
    doc_offsets: np.ndarray  # int64 (D+1,) token span per document
    z: np.ndarray           # int32 (N,) topic assignment
    s: np.ndarray           # int8  (N,) keyword switch
    n_dk: np.ndarray        # int64 (D, K)
    n_kw_reg: np.ndarray    # int64 (K, V) regular-route word counts (s=0)
    n_kw_key: np.ndarray    # int64 (K, V) keyword-route word counts (s=1)
    n_k_s0: np.ndarray      # int64 (K,)
    n_k_s1: np.ndarray      # int64 (K,)
    spec: KeywordSpec
    is_key: np.ndarray      # bool (K, V) keyword membership
    key_size: np.ndarray    # int64 (K,)
    seed: int
    sweep: int = 0
    _sweep_seeds: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.uint32),
                                     repr=False)

    @property
    def n_docs(self) -> int:
        return self.n_dk.shape[0]

    @property
    def n_topics(self) -> int:
        return self.n_dk.shape[1]

    @property
    def n_words(self) -> int:
        return self.n_kw_reg.shape[1]

    @property
    def n_tokens(self) -> int:
        return self.z.shape[0]

    def token_index(self, d: int, i: int) -> int:
        """Flat index of token i of document d."""
        start, end = self.doc_offsets[d], self.doc_offsets[d + 1]
        if not (0 <= i < end - start):
            raise IndexError(f"document {d} has no token {i}")
        return int(start + i)

    def doc_length(self, d: int) -> int:
        return int(self.doc_offsets[d + 1] - self.doc_offsets[d])

    def sweep_seed(self, sweep: int) -> int:
        """Deterministic per-sweep RNG seed derived from the state seed.

        SeedSequence output is prefix-stable, so extending the cache never
        changes already-issued seeds.
        """
        if sweep >= self._sweep_seeds.shape[0]:
            n = max(1024, 2 * (sweep + 1))
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(1,))
            self._sweep_seeds = ss.generate_state(n, dtype=np.uint32)
        return int(self._sweep_seeds[sweep])

    def copy(self) -> "ModelState":
        return ModelState(
            doc_of=self.doc_of, word_of=self.word_of, doc_offsets=self.doc_offsets,
            z=self.z.copy(), s=self.s.copy(),
            n_dk=self.n_dk.copy(), n_kw_reg=self.n_kw_reg.copy(),
            n_kw_key=self.n_kw_key.copy(),
            n_k_s0=self.n_k_s0.copy(), n_k_s1=self.n_k_s1.copy(),
            spec=self.spec, is_key=self.is_key, key_size=self.key_size,
            seed=self.seed, sweep=self.sweep,
        )


def _recount(state: ModelState) -> None:
    """Rebuild all count tables from (z, s)."""
    D, K, V = state.n_docs, state.n_topics, state.n_words
    state.n_dk[:] = 0
    state.n_kw_reg[:] = 0
    state.n_kw_key[:] = 0
    np.add.at(state.n_dk, (state.doc_of, state.z), 1)
    reg = state.s == 0
    np.add.at(state.n_kw_reg, (state.z[reg], state.word_of[reg]), 1)
    key = ~reg
    np.add.at(state.n_kw_key, (state.z[key], state.word_of[key]), 1)
    state.n_k_s0[:] = state.n_kw_reg.sum(axis=1)
    state.n_k_s1[:] = state.n_kw_key.sum(axis=1)


def init_state(
    corpus: TokenizedCorpus,
    spec: KeywordSpec,
    hyper: HyperParams | None = None,
    seed: int = 0,
) -> ModelState:
    """Random initialization: topics uniform; where the token's word is a
    keyword of its topic, the switch starts at 1 with probability one half.
    Deterministic given the seed."""
    if corpus.n_docs == 0 or corpus.n_tokens == 0:
        raise EmptyCorpusError("corpus has no tokens")
    if spec.n_words != len(corpus.vocabulary):
        raise ValueError("keyword spec was built against a different vocabulary")
    if hyper is not None and len(hyper.alpha) != spec.n_topics:
        raise ValueError("hyperparameter alpha length must equal the topic count")

    lengths = [len(seq) for seq in corpus.sequences]
    doc_offsets = np.zeros(len(lengths) + 1, dtype=np.int64)
    np.cumsum(lengths, out=doc_offsets[1:])
    n_tokens = int(doc_offsets[-1])

    doc_of = np.repeat(np.arange(len(lengths), dtype=np.int32), lengths)
    word_of = np.fromiter((w for seq in corpus.sequences for w in seq),
                          dtype=np.int32, count=n_tokens)

    K, V = spec.n_topics, spec.n_words
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(0,)))
    z = rng.integers(0, K, size=n_tokens, dtype=np.int32)
    is_key = spec.keyword_mask()
    eligible = is_key[z, word_of]
    s = np.where(eligible & (rng.random(n_tokens) < 0.5), 1, 0).astype(np.int8)

    state = ModelState(
        doc_of=doc_of, word_of=word_of, doc_offsets=doc_offsets,
        z=z, s=s,
        n_dk=np.zeros((len(lengths), K), dtype=np.int64),
        n_kw_reg=np.zeros((K, V), dtype=np.int64),
        n_kw_key=np.zeros((K, V), dtype=np.int64),
        n_k_s0=np.zeros(K, dtype=np.int64),
        n_k_s1=np.zeros(K, dtype=np.int64),
        spec=spec, is_key=is_key, key_size=spec.keyword_sizes(),
        seed=seed,
    )
    _recount(state)
    return state


def audit_state(state: ModelState) -> None:
    """Raise InvariantViolation unless every bookkeeping invariant holds."""
    problems: list[str] = []

    lengths = np.diff(state.doc_offsets)
    if not np.array_equal(state.n_dk.sum(axis=1), lengths):
        problems.append("sum_k n_dk != document length for some document")

    if not np.array_equal(state.n_kw_reg.sum(axis=1), state.n_k_s0):
        problems.append("sum_w n_kw_reg != n_k_s0 for some topic")
    if not np.array_equal(state.n_kw_key.sum(axis=1), state.n_k_s1):
        problems.append("sum_w n_kw_key != n_k_s1 for some topic")

    if np.any(state.n_kw_key[~state.is_key] > 0):
        problems.append("keyword-route count on a word outside the topic's keyword set")
    no_key = state.key_size == 0
    if np.any(state.n_k_s1[no_key] != 0):
        problems.append("switch=1 mass on a topic without keywords")

    expected = state.copy()
    _recount(expected)
    for name in ("n_dk", "n_kw_reg", "n_kw_key", "n_k_s0", "n_k_s1"):
        if not np.array_equal(getattr(state, name), getattr(expected, name)):
            problems.append(f"{name} inconsistent with token assignments")

    if np.any((state.s == 1) & ~state.is_key[state.z, state.word_of]):
        problems.append("switch=1 on a token whose word is not a keyword of its topic")

    if problems:
        raise InvariantViolation("; ".join(problems))


def detach_token(state: ModelState, flat: int) -> tuple[int, int, int, int]:
    """Remove token ``flat`` from the count tables; returns (d, w, z, s)."""
    d, w = int(state.doc_of[flat]), int(state.word_of[flat])
    k, sw = int(state.z[flat]), int(state.s[flat])
    state.n_dk[d, k] -= 1
    if sw == 0:
        state.n_kw_reg[k, w] -= 1
        state.n_k_s0[k] -= 1
    else:
        state.n_kw_key[k, w] -= 1
        state.n_k_s1[k] -= 1
    return d, w, k, sw


def attach_token(state: ModelState, flat: int, k: int, sw: int) -> None:
    """Insert token ``flat`` into the count tables with assignment (k, sw)."""
    d, w = int(state.doc_of[flat]), int(state.word_of[flat])
    state.z[flat] = k
    state.s[flat] = sw
    state.n_dk[d, k] += 1
    if sw == 0:
        state.n_kw_reg[k, w] += 1
        state.n_k_s0[k] += 1
    else:
        state.n_kw_key[k, w] += 1
        state.n_k_s1[k] += 1
