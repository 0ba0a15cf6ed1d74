"""Keyword-assisted topic model: collapsed Gibbs sampler with a per-token
switch between keyword and regular word distributions."""

from .estimates import (
    build_model_export,
    estimate_phi,
    estimate_theta,
    pi_hat,
    top_words,
)
from .inference import joint_log_score, token_conditional
from .sampler import FitResult, fit, gibbs_sweep
from .state import ModelState, audit_state, init_state
from .types import FitConfig, HyperParams, KeywordSpec

__all__ = [
    "FitConfig",
    "FitResult",
    "HyperParams",
    "KeywordSpec",
    "ModelState",
    "audit_state",
    "build_model_export",
    "estimate_phi",
    "estimate_theta",
    "fit",
    "gibbs_sweep",
    "init_state",
    "joint_log_score",
    "pi_hat",
    "token_conditional",
    "top_words",
]
