"""Laplace and exponential mechanisms, sensitivity, and utility measures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

LAPLACE = "laplace"
EXPONENTIAL = "exponential"
INDEPENDENT = "independent"
COUPLED = "coupled"


def as_generator(seed: Union[int, np.random.Generator, None]) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SensitiveRecord:
    """A numeric vector or a categorical item over a finite candidate set."""

    value: Any
    candidates: Optional[Tuple[Any, ...]] = None

    def __post_init__(self):
        if self.candidates is None:
            arr = np.asarray(self.value, dtype=float)
            if not np.all(np.isfinite(arr)):
                raise ValueError("numeric record must be finite")
        elif self.value not in self.candidates:
            raise ValueError(f"{self.value!r} not among the candidates")

    @property
    def is_numeric(self) -> bool:
        return self.candidates is None

    def vector(self) -> np.ndarray:
        if not self.is_numeric:
            raise TypeError("categorical record has no vector form")
        return np.atleast_1d(np.asarray(self.value, dtype=float))


@dataclass(frozen=True)
class SanitizedRelease:
    """One sanitized payload addressed to one community."""

    community_id: int
    epsilon: float
    payload: Any
    mechanism: str
    noise_source: str = INDEPENDENT
    releaser: Optional[int] = None


def laplace_release(value, sensitivity: float, epsilon: float,
                    rng=None, community_id: int = 0,
                    noise_source: str = INDEPENDENT) -> SanitizedRelease:
    """Perturb each coordinate with independent Laplace(sensitivity/epsilon)
    noise. Deterministic under a fixed seed."""
    if sensitivity <= 0:
        raise ValueError("sensitivity must be positive")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    rng = as_generator(rng)
    vec = np.atleast_1d(np.asarray(value, dtype=float))
    noisy = vec + rng.laplace(0.0, sensitivity / epsilon, size=vec.shape)
    return SanitizedRelease(community_id=community_id, epsilon=epsilon,
                            payload=noisy, mechanism=LAPLACE,
                            noise_source=noise_source)


def exponential_weights(candidates: Sequence[Any],
                        utility: Callable[[Any, Any], float],
                        sensitivity: float, epsilon: float,
                        data: Any = None) -> np.ndarray:
    """Normalized selection probabilities proportional to
    exp(epsilon * utility / (2 * sensitivity))."""
    if not len(candidates):
        raise ValueError("empty candidate set")
    if sensitivity <= 0:
        raise ValueError("sensitivity must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    scores = np.array([utility(data, o) for o in candidates], dtype=float)
    logits = epsilon * scores / (2.0 * sensitivity)
    logits -= logits.max()
    weights = np.exp(logits)
    return weights / weights.sum()


def exponential_release(candidates: Sequence[Any],
                        utility: Callable[[Any, Any], float],
                        sensitivity: float, epsilon: float,
                        rng=None, data: Any = None,
                        community_id: int = 0) -> SanitizedRelease:
    """Sample one candidate with probability proportional to the
    exponential-mechanism weight of its utility score."""
    rng = as_generator(rng)
    probs = exponential_weights(candidates, utility, sensitivity, epsilon, data=data)
    idx = int(rng.choice(len(candidates), p=probs))
    return SanitizedRelease(community_id=community_id, epsilon=epsilon,
                            payload=candidates[idx], mechanism=EXPONENTIAL)


def global_sensitivity(query: Callable[[Any], Any],
                       datasets: Sequence[Any],
                       adjacent: Callable[[Any, Any], bool],
                       norm: str = "l1") -> float:
    """Maximum query change over all adjacent dataset pairs in a finite,
    enumerable domain."""
    if not len(datasets):
        raise ValueError("empty dataset domain")
    if norm == "l1":
        order = 1
    elif norm == "l2":
        order = 2
    else:
        raise ValueError(f"unknown norm {norm!r}")
    worst = 0.0
    for i, d1 in enumerate(datasets):
        f1 = np.atleast_1d(np.asarray(query(d1), dtype=float))
        for d2 in datasets[i + 1:]:
            if not adjacent(d1, d2):
                continue
            f2 = np.atleast_1d(np.asarray(query(d2), dtype=float))
            worst = max(worst, float(np.linalg.norm(f1 - f2, ord=order)))
    return worst


def replace_one_adjacent(d1: Sequence, d2: Sequence) -> bool:
    """Same length, differing in exactly one position."""
    if len(d1) != len(d2):
        return False
    return sum(a != b for a, b in zip(d1, d2)) == 1


def add_remove_adjacent(d1: Sequence, d2: Sequence) -> bool:
    """Multisets differing by the presence of exactly one record."""
    small, large = sorted((list(d1), list(d2)), key=len)
    if len(large) - len(small) != 1:
        return False
    large = large.copy()
    for item in small:
        if item in large:
            large.remove(item)
        else:
            return False
    return len(large) == 1


def rmse(pairs: Iterable[Tuple[Any, Any]]) -> float:
    """Root of the summed squared L2 errors over (released, true) pairs."""
    total = 0.0
    count = 0
    for released, true in pairs:
        y = np.atleast_1d(np.asarray(released, dtype=float))
        d = np.atleast_1d(np.asarray(true, dtype=float))
        if y.shape != d.shape:
            raise ValueError(f"dimension mismatch: {y.shape} vs {d.shape}")
        total += float(np.sum((y - d) ** 2))
        count += 1
    if count == 0:
        raise ValueError("empty release list")
    return float(np.sqrt(total))


def laplace_mse_bound(dimension: int, epsilon: float) -> float:
    """Expected squared L2 error of an n-tuple Laplace release at unit
    sensitivity: 2n / epsilon^2."""
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return 2.0 * dimension / epsilon**2
