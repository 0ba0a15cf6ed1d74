"""Point estimates and the exported model document.

Estimates are computed from the retained final state only, never averaged
across sweeps, so equal seeds give equal outputs.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

from ..textprep import Vocabulary
from .sampler import FitResult
from .state import ModelState
from .types import HyperParams

WordSource = Union[Vocabulary, Sequence[str]]


def _word_list(vocabulary: WordSource) -> list[str]:
    if isinstance(vocabulary, Vocabulary):
        return list(vocabulary.words)
    return list(vocabulary)


def estimate_theta(state: ModelState, hyper: HyperParams) -> np.ndarray:
    """Document-topic rows: theta_dk = (n_dk + alpha_k) / (N_d + sum(alpha)).

    A zero-length document falls back to the normalized prior.
    """
    alpha = hyper.alpha_array()
    lengths = np.diff(state.doc_offsets).astype(np.float64)
    return (state.n_dk + alpha) / (lengths + alpha.sum())[:, None]


def pi_hat(state: ModelState, hyper: HyperParams) -> np.ndarray:
    """Posterior mean keyword-route share per topic.

    Topics without keywords have no keyword route, so their share is 0
    rather than the prior mean.
    """
    values = (state.n_k_s1 + hyper.gamma1) / (
        state.n_k_s0 + state.n_k_s1 + hyper.gamma1 + hyper.gamma2
    )
    return np.where(state.key_size > 0, values, 0.0)


def estimate_phi(state: ModelState, hyper: HyperParams) -> np.ndarray:
    """Blended topic-word rows.

    Keyword topics mix the keyword-route distribution (supported on the
    keyword set) with the regular-route distribution, weighted by pi_hat.
    Topics without keywords return the regular-route distribution alone.
    Every row sums to 1.
    """
    V = state.n_words
    phi_reg = (state.n_kw_reg + hyper.beta) / (
        state.n_k_s0 + V * hyper.beta
    )[:, None]
    pi = pi_hat(state, hyper)
    sizes = np.maximum(state.key_size, 1).astype(np.float64)
    phi_key = (state.n_kw_key + hyper.beta_key) / (
        state.n_k_s1 + sizes * hyper.beta_key
    )[:, None]
    phi_key = np.where(state.is_key, phi_key, 0.0)
    return pi[:, None] * phi_key + (1.0 - pi)[:, None] * phi_reg


def top_words(
    state: ModelState,
    hyper: HyperParams,
    vocabulary: WordSource,
    k: int,
    n: int = 10,
) -> list[tuple[str, float]]:
    """The n most probable words of topic k under the blended distribution,
    descending; probability ties break alphabetically."""
    if not 0 <= k < state.n_topics:
        raise IndexError(f"topic index {k} out of range for {state.n_topics} topics")
    if n <= 0:
        return []
    words = _word_list(vocabulary)
    row = estimate_phi(state, hyper)[k]
    order = sorted(range(len(words)), key=lambda w: (-row[w], words[w]))
    return [(words[w], float(row[w])) for w in order[:n]]


def build_model_export(
    result: FitResult,
    vocabulary: WordSource,
    doc_ids: Sequence[str],
    top_n: int = 10,
) -> dict:
    """Assemble the fit into one JSON-ready document: keyword spec,
    hyperparameters, seed and sweep count, theta matrix, blended phi rows,
    pi values, and top words per topic."""
    state = result.state
    hyper = result.hyper
    if len(doc_ids) != state.n_docs:
        raise ValueError(
            f"{len(doc_ids)} doc ids for {state.n_docs} modeled documents"
        )
    words = _word_list(vocabulary)
    theta = estimate_theta(state, hyper)
    phi = estimate_phi(state, hyper)
    pi = pi_hat(state, hyper)
    return {
        "spec": state.spec.to_dict(),
        "hyper": hyper.to_dict(),
        "config": {
            "sweeps": result.config.sweeps,
            "burn_in": result.config.burn_in,
            "seed": result.config.seed,
            "chains": result.config.chains,
        },
        "seed": state.seed,
        "sweeps": state.sweep,
        "doc_ids": list(doc_ids),
        "words": words,
        "theta": theta.tolist(),
        "phi": phi.tolist(),
        "pi": pi.tolist(),
        "top_words": [
            [
                {"word": w, "probability": p}
                for w, p in top_words(state, hyper, words, k, top_n)
            ]
            for k in range(state.n_topics)
        ],
        "diagnostics": {
            "initial_score": result.initial_score,
            "final_score": result.final_score,
            "score_trace": list(result.score_trace),
            "chain_final_scores": list(result.chain_final_scores),
            "chain_kept": result.chain_kept,
        },
    }
