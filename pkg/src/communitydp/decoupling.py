"""Correlated noise ladders: a Markov family of Laplace samples over
privacy levels.

The ladder is sampled top-down from the largest (least noisy) level.
For scalar noise the exact conditional is a mixture: keep the previous
sample with probability (eps_lo/eps_hi)^2, otherwise add a fresh
Laplace(1/eps_lo) increment. This is the unique conditional preserving
the Laplace marginal, which the characteristic-function identity
eps^2/(eps^2 + t^2) pins down (checked in the test suite).

For vector noise the first-order transfer kernel is applied as a
composition of small ratio steps: each step keeps the sample or, with
probability (n+1)|tau|, adds an isotropic jump whose radial law is the
normalized Bessel-K kernel. The jump is drawn via its Gaussian
scale-mixture representation sqrt(Exp(1)) * N(0, 2/eps^2 I), whose
characteristic function eps^2/(eps^2 + |t|^2) matches the kernel's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from .mechanisms import COUPLED, SanitizedRelease, LAPLACE, as_generator

DEFAULT_MAX_STEP_RATIO = 0.01


def _validate_levels(levels: Sequence[float]) -> Tuple[float, ...]:
    levels = tuple(float(e) for e in levels)
    if not levels:
        raise ValueError("need at least one privacy level")
    if any(e <= 0 for e in levels):
        raise ValueError("privacy levels must be positive")
    if any(b < a for a, b in zip(levels, levels[1:])):
        raise ValueError("privacy levels must be sorted ascending")
    return levels


def _sample_top(epsilon: float, dimension: int, size: int,
                rng: np.random.Generator) -> np.ndarray:
    """Fresh draw from the density proportional to exp(-epsilon * |v|_2)."""
    if dimension == 1:
        return rng.laplace(0.0, 1.0 / epsilon, size=(size, 1))
    radius = rng.gamma(shape=dimension, scale=1.0 / epsilon, size=size)
    direction = rng.standard_normal((size, dimension))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return radius[:, None] * direction


def _scalar_step_down(v_hi: np.ndarray, eps_hi: float, eps_lo: float,
                      rng: np.random.Generator) -> np.ndarray:
    keep_prob = (eps_lo / eps_hi) ** 2
    keep = rng.random(size=v_hi.shape[0]) < keep_prob
    fresh = rng.laplace(0.0, 1.0 / eps_lo, size=v_hi.shape)
    return np.where(keep[:, None], v_hi, v_hi + fresh)


def _vector_step_down(v_hi: np.ndarray, eps_hi: float, eps_lo: float,
                      rng: np.random.Generator, max_step_ratio: float) -> np.ndarray:
    """Compose first-order kernel steps with per-step |tau| bounded."""
    size, dimension = v_hi.shape
    n_steps = max(1, math.ceil(math.log(eps_lo / eps_hi) / math.log(1.0 - max_step_ratio)))
    ratio = (eps_lo / eps_hi) ** (1.0 / n_steps)
    v = v_hi
    eps = eps_hi
    for _ in range(n_steps):
        eps_next = eps * ratio
        jump_prob = (dimension + 1) * (1.0 - ratio)
        jump = rng.random(size=size) < jump_prob
        mix = rng.exponential(1.0, size=size)
        gauss = rng.standard_normal((size, dimension))
        delta = np.sqrt(2.0 * mix)[:, None] / eps_next * gauss
        v = np.where(jump[:, None], v + delta, v)
        eps = eps_next
    return v


def ladder_arrays(levels: Sequence[float], dimension: int, size: int,
                  rng=None, max_step_ratio: float = DEFAULT_MAX_STEP_RATIO,
                  ) -> Dict[float, np.ndarray]:
    """Sample `size` independent ladders at once.

    Returns one (size, dimension) array per distinct level; rows are
    coupled across levels within a ladder and independent across rows.
    """
    levels = _validate_levels(levels)
    if dimension < 1:
        raise ValueError("dimension must be at least 1")
    rng = as_generator(rng)
    unique = sorted(set(levels))
    out: Dict[float, np.ndarray] = {}
    v = _sample_top(unique[-1], dimension, size, rng)
    out[unique[-1]] = v
    for eps_hi, eps_lo in zip(reversed(unique), reversed(unique[:-1])):
        if dimension == 1:
            v = _scalar_step_down(v, eps_hi, eps_lo, rng)
        else:
            v = _vector_step_down(v, eps_hi, eps_lo, rng, max_step_ratio)
        out[eps_lo] = v
    return out


@dataclass(frozen=True)
class NoiseLadder:
    """One coupled family of noise samples indexed by privacy level."""

    levels: Tuple[float, ...]
    samples: Dict[float, np.ndarray]
    dimension: int

    def sample(self, epsilon: float) -> np.ndarray:
        return self.samples[float(epsilon)]


def build_ladder(levels: Sequence[float], dimension: int = 1, seed=None,
                 max_step_ratio: float = DEFAULT_MAX_STEP_RATIO) -> NoiseLadder:
    """Sample one noise ladder over the given ascending privacy levels.

    Duplicate levels are allowed and share the identical sample (the
    transfer kernel degenerates to the Dirac term at ratio 1).
    """
    levels = _validate_levels(levels)
    arrays = ladder_arrays(levels, dimension, size=1, rng=seed,
                           max_step_ratio=max_step_ratio)
    samples = {eps: arr[0] for eps, arr in arrays.items()}
    return NoiseLadder(levels=levels, samples=samples, dimension=dimension)


def coupled_release(value, epsilons_by_community: Dict[int, float],
                    seed=None, sensitivity: float = 1.0,
                    releaser: Union[int, None] = None) -> List[SanitizedRelease]:
    """Release one record to several communities off a single ladder.

    Communities sharing a privacy level receive the identical payload, so
    linking releases reveals nothing beyond the least-noisy one.
    """
    if not epsilons_by_community:
        raise ValueError("need at least one community")
    if sensitivity <= 0:
        raise ValueError("sensitivity must be positive")
    vec = np.atleast_1d(np.asarray(value, dtype=float))
    levels = sorted(set(epsilons_by_community.values()))
    ladder = build_ladder(levels, dimension=vec.size, seed=seed)
    releases = []
    for cid in sorted(epsilons_by_community):
        eps = epsilons_by_community[cid]
        payload = vec + sensitivity * ladder.sample(eps)
        releases.append(SanitizedRelease(
            community_id=cid, epsilon=eps, payload=payload,
            mechanism=LAPLACE, noise_source=COUPLED, releaser=releaser))
    return releases
