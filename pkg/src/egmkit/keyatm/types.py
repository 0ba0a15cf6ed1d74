"""Configuration types for the keyword-assisted topic model."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..textprep import Vocabulary


@dataclass(frozen=True)
class KeywordSpec:
    """Ordered topics with per-topic keyword word-index sets.

    Keyword topics come first (in declaration order), followed by
    background topics with empty keyword sets. Background topics fall back
    to plain LDA behaviour: no switch variable and no keyword distribution.
    """
    topic_labels: tuple[str, ...]
    keyword_indices: tuple[frozenset[int], ...]
    n_words: int

    def __post_init__(self):
        if len(self.topic_labels) != len(self.keyword_indices):
            raise ValueError("one keyword set per topic required")
        if len(set(self.topic_labels)) != len(self.topic_labels):
            raise ValueError("topic labels must be unique")
        if not self.topic_labels:
            raise ValueError("at least one topic required")
        for label, indices in zip(self.topic_labels, self.keyword_indices):
            for w in indices:
                if not (0 <= w < self.n_words):
                    raise ValueError(f"topic '{label}': keyword index {w} outside vocabulary")

    @property
    def n_topics(self) -> int:
        return len(self.topic_labels)

    @property
    def n_keyword_topics(self) -> int:
        return sum(1 for k in self.keyword_indices if k)

    def keyword_mask(self) -> np.ndarray:
        """Boolean (K, V) indicator of topic keyword membership."""
        mask = np.zeros((self.n_topics, self.n_words), dtype=np.bool_)
        for k, indices in enumerate(self.keyword_indices):
            for w in indices:
                mask[k, w] = True
        return mask

    def keyword_sizes(self) -> np.ndarray:
        return np.array([len(k) for k in self.keyword_indices], dtype=np.int64)

    @classmethod
    def from_words(
        cls,
        keyword_lists: dict[str, list[str]],
        vocab: Vocabulary,
        extra_background: int = 1,
    ) -> "KeywordSpec":
        """Build a spec from per-topic keyword words, appending
        ``extra_background`` keyword-free topics."""
        labels: list[str] = []
        indices: list[frozenset[int]] = []
        for label, words in keyword_lists.items():
            resolved = frozenset(vocab.index[w] for w in words if w in vocab.index)
            if not resolved:
                raise ValueError(f"topic '{label}' has no keywords in the vocabulary")
            labels.append(label)
            indices.append(resolved)
        for i in range(extra_background):
            labels.append(f"_background_{i + 1}")
            indices.append(frozenset())
        return cls(topic_labels=tuple(labels), keyword_indices=tuple(indices),
                   n_words=len(vocab))

    def to_dict(self) -> dict:
        return {
            "topic_labels": list(self.topic_labels),
            "keyword_indices": [sorted(k) for k in self.keyword_indices],
            "n_words": self.n_words,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "KeywordSpec":
        return cls(
            topic_labels=tuple(d["topic_labels"]),
            keyword_indices=tuple(frozenset(k) for k in d["keyword_indices"]),
            n_words=d["n_words"],
        )


@dataclass(frozen=True)
class HyperParams:
    """Dirichlet/Beta hyperparameters. ``alpha`` is per topic; ``beta``
    smooths the regular word distributions, ``beta_key`` the keyword ones;
    ``(gamma1, gamma2)`` is the Beta prior on each topic's keyword-use
    probability."""
    alpha: tuple[float, ...]
    beta: float = 0.01
    beta_key: float = 0.1
    gamma1: float = 1.0
    gamma2: float = 1.0

    def __post_init__(self):
        if not self.alpha or any(a <= 0 for a in self.alpha):
            raise ValueError("alpha values must be strictly positive")
        for name in ("beta", "beta_key", "gamma1", "gamma2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def defaults(cls, n_topics: int, **overrides) -> "HyperParams":
        alpha = overrides.pop("alpha", None)
        if alpha is None:
            alpha = tuple([50.0 / n_topics] * n_topics)
        elif isinstance(alpha, (int, float)):
            alpha = tuple([float(alpha)] * n_topics)
        else:
            alpha = tuple(float(a) for a in alpha)
        if len(alpha) != n_topics:
            raise ValueError(f"alpha must have {n_topics} entries")
        return cls(alpha=alpha, **overrides)

    def alpha_array(self) -> np.ndarray:
        return np.asarray(self.alpha, dtype=np.float64)

    def to_dict(self) -> dict:
        return {"alpha": list(self.alpha), "beta": self.beta, "beta_key": self.beta_key,
                "gamma1": self.gamma1, "gamma2": self.gamma2}

    @classmethod
    def from_dict(cls, d: dict) -> "HyperParams":
        return cls(alpha=tuple(d["alpha"]), beta=d["beta"], beta_key=d["beta_key"],
                   gamma1=d["gamma1"], gamma2=d["gamma2"])


@dataclass(frozen=True)
class FitConfig:
    sweeps: int = 1500
    burn_in: int = 500
    seed: int = 0
    chains: int = 1

    def __post_init__(self):
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.sweeps <= self.burn_in:
            raise ValueError("sweeps must exceed burn_in")
        if self.chains < 1:
            raise ValueError("chains must be >= 1")

    def to_dict(self) -> dict:
        return {"sweeps": self.sweeps, "burn_in": self.burn_in,
                "seed": self.seed, "chains": self.chains}
