"""Density-to-privacy-level mapping, budget bookkeeping, and tradeoff tuning.

The mapping is a sigmoid in the inverse density: sparse communities get a
small epsilon (strong protection), dense communities approach the
amplitude omega. The sign of the exponent as printed in some sources is
decreasing in density, contradicting the trust rationale; the increasing
form is the default and ``paper_literal_sign=True`` selects the printed
one.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from .community import CommunityPartition

BUDGET_AT_MOST = "sum<=B"
BUDGET_AT_LEAST = "sum>=B"


@dataclass(frozen=True)
class MappingParams:
    """Sigmoid parameters: amplitude, steepness, and symmetric-line location."""

    omega: float = 1.0
    theta: float = 1.0
    alpha: float = 1.0
    floor: Optional[float] = None  # default omega / 1000
    paper_literal_sign: bool = False

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        if self.floor is not None and not 0 < self.floor < self.omega:
            raise ValueError("floor must lie in (0, omega)")

    @property
    def epsilon_floor(self) -> float:
        return self.floor if self.floor is not None else self.omega / 1000.0


def map_density_to_epsilon(d_c, params: MappingParams):
    """Map community density in [0, 1] to a positive privacy level.

    Vectorized over array input. Zero density maps to the configured
    floor, and the floor also clamps results that would otherwise
    underflow to zero for very small densities.
    """
    d = np.asarray(d_c, dtype=float)
    if np.any((d < 0.0) | (d > 1.0)):
        raise ValueError("density must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        ratio = np.where(d > 0.0, params.theta / np.where(d > 0.0, d, 1.0), np.inf)
    if params.paper_literal_sign:
        eps = params.omega * expit(ratio + params.alpha)
    else:
        eps = params.omega * expit(params.alpha - ratio)
    eps = np.maximum(eps, params.epsilon_floor)
    if np.ndim(d_c) == 0:
        return float(eps)
    return eps


def privacy_ratio_bound(epsilon: float) -> float:
    """Largest admissible probability ratio between adjacent datasets."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return float(np.exp(epsilon))


@dataclass(frozen=True)
class PrivacyAssignment:
    """Per-community privacy levels plus the network budget."""

    per_community_epsilon: Dict[int, float]
    budget: float

    def __post_init__(self):
        for cid, eps in self.per_community_epsilon.items():
            if eps <= 0:
                raise ValueError(f"community {cid} has non-positive epsilon")

    @property
    def total_epsilon(self) -> float:
        return float(sum(self.per_community_epsilon.values()))


def assign_epsilons(partition: CommunityPartition, params: MappingParams,
                    budget: float) -> PrivacyAssignment:
    """Map every community density in the partition through the sigmoid."""
    eps = {c.id: map_density_to_epsilon(c.density, params)
           for c in partition.communities}
    return PrivacyAssignment(per_community_epsilon=eps, budget=budget)


@dataclass(frozen=True)
class TradeoffReport:
    total_epsilon: float
    budget: float
    budget_direction: str
    budget_ok: bool
    observed_rmse: float
    min_rmse: float
    utility_ok: bool

    @property
    def ok(self) -> bool:
        return self.budget_ok and self.utility_ok


def check_tradeoff(assignment: PrivacyAssignment, min_rmse: float,
                   observed_rmse: float,
                   budget_direction: str = BUDGET_AT_MOST) -> TradeoffReport:
    """Evaluate the budget and utility constraints.

    The budget constraint direction is configurable: "sum<=B" is the
    standard composition reading (default), "sum>=B" the literal printed
    one. The utility constraint is the literal observed >= min form.
    Equality passes either direction.
    """
    if budget_direction not in (BUDGET_AT_MOST, BUDGET_AT_LEAST):
        raise ValueError(f"unknown budget direction {budget_direction!r}")
    total = assignment.total_epsilon
    if budget_direction == BUDGET_AT_MOST:
        budget_ok = total <= assignment.budget
    else:
        budget_ok = total >= assignment.budget
    return TradeoffReport(
        total_epsilon=total,
        budget=assignment.budget,
        budget_direction=budget_direction,
        budget_ok=budget_ok,
        observed_rmse=observed_rmse,
        min_rmse=min_rmse,
        utility_ok=observed_rmse >= min_rmse,
    )


@dataclass(frozen=True)
class ParamGrid:
    omegas: Tuple[float, ...]
    thetas: Tuple[float, ...]
    alphas: Tuple[float, ...]

    def __post_init__(self):
        if not (self.omegas and self.thetas and self.alphas):
            raise ValueError("grid axes must be non-empty")

    def points(self):
        for omega, theta, alpha in itertools.product(
                sorted(self.omegas), sorted(self.thetas), sorted(self.alphas)):
            yield MappingParams(omega=omega, theta=theta, alpha=alpha)


@dataclass(frozen=True)
class TuningResult:
    params: Optional[MappingParams]
    total_epsilon: float
    feasible: bool


def tune_mapping(partition: CommunityPartition, budget: float, grid: ParamGrid,
                 budget_direction: str = BUDGET_AT_MOST) -> TuningResult:
    """Grid-search mapping parameters maximizing total epsilon under the
    budget constraint. Deterministic: grid points are scanned in sorted
    order and the first maximizer wins. An empty feasible set is reported,
    not raised."""
    densities = np.array([c.density for c in partition.communities])
    best: Optional[MappingParams] = None
    best_total = -np.inf
    for params in grid.points():
        total = float(np.sum(np.atleast_1d(map_density_to_epsilon(densities, params))))
        if budget_direction == BUDGET_AT_MOST:
            feasible = total <= budget
        elif budget_direction == BUDGET_AT_LEAST:
            feasible = total >= budget
        else:
            raise ValueError(f"unknown budget direction {budget_direction!r}")
        if feasible and total > best_total:
            best, best_total = params, total
    if best is None:
        return TuningResult(params=None, total_epsilon=0.0, feasible=False)
    return TuningResult(params=best, total_epsilon=best_total, feasible=True)
