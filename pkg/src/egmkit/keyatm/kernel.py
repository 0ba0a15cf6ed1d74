"""Compiled Gibbs sweep.

One call resamples every token once, in storage order, mutating the count
arrays in place. The weight arithmetic follows ``inference.token_conditional``
operation for operation so the compiled path can be checked against the
pure-Python reference bit for bit: numba's ``np.random.seed`` plus
``np.random.random`` reproduces the ``np.random.RandomState`` stream for the
same seed.

Slot layout: slot 2k is topic k on the regular route, slot 2k+1 is topic k
on the keyword route. One uniform draw is consumed per token.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit
def sweep_tokens(seed, doc_of, word_of, z, s, n_dk, n_kw_reg, n_kw_key,
                 n_k_s0, n_k_s1, is_key, key_size, alpha, beta, beta_key,
                 gamma1, gamma2):
    np.random.seed(seed)
    n_tokens = doc_of.shape[0]
    n_topics = n_dk.shape[1]
    n_words = n_kw_reg.shape[1]
    weights = np.empty(2 * n_topics, dtype=np.float64)

    for flat in range(n_tokens):
        d = doc_of[flat]
        w = word_of[flat]
        k_old = z[flat]
        if s[flat] == 0:
            n_kw_reg[k_old, w] -= 1
            n_k_s0[k_old] -= 1
        else:
            n_kw_key[k_old, w] -= 1
            n_k_s1[k_old] -= 1
        n_dk[d, k_old] -= 1

        total = 0.0
        for k in range(n_topics):
            doc_factor = n_dk[d, k] + alpha[k]
            reg = (n_kw_reg[k, w] + beta) / (n_k_s0[k] + n_words * beta)
            w_reg = doc_factor * reg
            w_key = 0.0
            if key_size[k] > 0:
                denom = n_k_s0[k] + n_k_s1[k] + gamma1 + gamma2
                w_reg = w_reg * ((n_k_s0[k] + gamma2) / denom)
                if is_key[k, w]:
                    key_word = (n_kw_key[k, w] + beta_key) / (
                        n_k_s1[k] + key_size[k] * beta_key
                    )
                    switch = (n_k_s1[k] + gamma1) / denom
                    w_key = doc_factor * key_word * switch
            weights[2 * k] = w_reg
            weights[2 * k + 1] = w_key
            total += w_reg
            total += w_key

        target = np.random.random() * total
        chosen = -1
        cum = 0.0
        for slot in range(2 * n_topics):
            cum += weights[slot]
            if target < cum:
                chosen = slot
                break
        if chosen < 0:
            # Rounding pushed the target past the final cumulative value;
            # fall back to the last slot that holds any mass.
            for slot in range(2 * n_topics - 1, -1, -1):
                if weights[slot] > 0.0:
                    chosen = slot
                    break

        k_new = chosen // 2
        s_new = chosen - 2 * k_new
        z[flat] = k_new
        s[flat] = s_new
        n_dk[d, k_new] += 1
        if s_new == 0:
            n_kw_reg[k_new, w] += 1
            n_k_s0[k_new] += 1
        else:
            n_kw_key[k_new, w] += 1
            n_k_s1[k_new] += 1
