"""Reference math for the collapsed sampler.

``token_conditional`` is the exact per-token conditional over (topic,
switch) pairs; ``joint_log_score`` is the collapsed joint log probability
of a full assignment. The two are linked: the ratio of any two conditional
weights equals the exponentiated difference of the joint scores of the
corresponding full assignments. The compiled sweep kernel is validated
against both.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betaln, gammaln

from .state import ModelState
from .types import HyperParams


def token_conditional(state: ModelState, hyper: HyperParams, d: int, i: int) -> np.ndarray:
    """Unnormalized weights, shape (K, 2): column 0 is the regular route,
    column 1 the keyword route. Counts must already exclude token (d, i).

    Topics without keywords put all their weight on the regular route and
    carry no switch factor, which makes them exactly plain collapsed-LDA
    topics.
    """
    flat = state.token_index(d, i)
    w = int(state.word_of[flat])
    K, V = state.n_topics, state.n_words
    alpha = hyper.alpha_array()

    n_dk = state.n_dk[d].astype(np.float64)
    doc_factor = n_dk + alpha

    reg_word = (state.n_kw_reg[:, w] + hyper.beta) / (state.n_k_s0 + V * hyper.beta)

    weights = np.zeros((K, 2), dtype=np.float64)
    has_keys = state.key_size > 0
    switch_total = state.n_k_s0 + state.n_k_s1 + hyper.gamma1 + hyper.gamma2

    # Regular route; keyword topics additionally pay the switch probability.
    weights[:, 0] = doc_factor * reg_word
    weights[has_keys, 0] *= (state.n_k_s0[has_keys] + hyper.gamma2) / switch_total[has_keys]

    # Keyword route: only on keyword topics whose set contains this word.
    eligible = has_keys & state.is_key[:, w]
    if np.any(eligible):
        key_word = (state.n_kw_key[eligible, w] + hyper.beta_key) / (
            state.n_k_s1[eligible] + state.key_size[eligible] * hyper.beta_key
        )
        switch = (state.n_k_s1[eligible] + hyper.gamma1) / switch_total[eligible]
        weights[eligible, 1] = doc_factor[eligible] * key_word * switch

    return weights


def joint_log_score(state: ModelState, hyper: HyperParams) -> float:
    """Collapsed joint log probability of the current (z, s) assignment.

    Document, regular-word, keyword-word, and switch blocks each integrate
    their Dirichlet (or Beta) parameter out in closed form. Empty corpus
    scores zero.
    """
    if state.n_tokens == 0:
        return 0.0
    K, V = state.n_topics, state.n_words
    alpha = hyper.alpha_array()
    alpha_sum = alpha.sum()
    lengths = np.diff(state.doc_offsets).astype(np.float64)

    doc_block = (
        state.n_docs * gammaln(alpha_sum)
        - gammaln(lengths + alpha_sum).sum()
        + gammaln(state.n_dk + alpha).sum()
        - state.n_docs * gammaln(alpha).sum()
    )

    reg_block = (
        K * gammaln(V * hyper.beta)
        - gammaln(state.n_k_s0 + V * hyper.beta).sum()
        + gammaln(state.n_kw_reg + hyper.beta).sum()
        - K * V * gammaln(hyper.beta)
    )

    has_keys = state.key_size > 0
    key_block = 0.0
    switch_block = 0.0
    if np.any(has_keys):
        sizes = state.key_size[has_keys].astype(np.float64)
        key_block = (
            gammaln(sizes * hyper.beta_key).sum()
            - gammaln(state.n_k_s1[has_keys] + sizes * hyper.beta_key).sum()
        )
        for k in np.flatnonzero(has_keys):
            cols = state.is_key[k]
            key_block += gammaln(state.n_kw_key[k, cols] + hyper.beta_key).sum()
            key_block -= cols.sum() * gammaln(hyper.beta_key)
        switch_block = (
            betaln(state.n_k_s1[has_keys] + hyper.gamma1,
                   state.n_k_s0[has_keys] + hyper.gamma2).sum()
            - has_keys.sum() * betaln(hyper.gamma1, hyper.gamma2)
        )

    return float(doc_block + reg_block + key_block + switch_block)
