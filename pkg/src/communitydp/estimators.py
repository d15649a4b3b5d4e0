"""Scikit-learn style wrappers around the core algorithms.

``LinkCommunityDetector`` clusters edges (samples are edges, in the
spirit of precomputed-affinity clusterers) and ``DensityEpsilonMapper``
transforms density columns into privacy levels, so both compose with
pipelines, ``clone`` and ``get_params``/``set_params``.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .community import MIN_DENSITY, detect_communities
from .graph import HealthGraph, canonical_edge
from .mapping import MappingParams, map_density_to_epsilon


def _as_graph(X) -> HealthGraph:
    if isinstance(X, HealthGraph):
        return X
    edges = np.asarray(X)
    if edges.ndim != 2 or edges.shape[1] != 2:
        raise ValueError("X must be a HealthGraph or an (n_edges, 2) array")
    return HealthGraph.from_edges([(int(a), int(b)) for a, b in edges])


class LinkCommunityDetector(BaseEstimator):
    """Edge-pair link community clustering.

    Parameters
    ----------
    threshold : float or None
        Dendrogram cut height; None selects the partition-density-optimal
        cut.
    policy : str
        Node assignment policy for overlapped nodes ("min-density" or
        "max-density").

    Attributes
    ----------
    labels_ : ndarray of shape (n_edges,)
        Community id per input edge.
    node_labels_ : dict
        Community id per node under the assignment policy.
    partition_ : CommunityPartition
    dendrogram_ : Dendrogram
    """

    def __init__(self, threshold: Optional[float] = None, policy: str = MIN_DENSITY):
        self.threshold = threshold
        self.policy = policy

    def fit(self, X, y=None):
        graph = _as_graph(X)
        self.dendrogram_, self.partition_ = detect_communities(
            graph, threshold=self.threshold, policy=self.policy)
        by_edge = {}
        for c in self.partition_.communities:
            for e in c.edges:
                by_edge[e] = c.id
        if isinstance(X, HealthGraph):
            ordered = graph.sorted_edges()
        else:
            ordered = [canonical_edge(int(a), int(b)) for a, b in np.asarray(X)]
        self.labels_ = np.array([by_edge[e] for e in ordered])
        self.node_labels_ = dict(self.partition_.node_assignment)
        return self

    def fit_predict(self, X, y=None):
        return self.fit(X).labels_

    def _check_fitted(self):
        if not hasattr(self, "partition_"):
            raise NotFittedError("call fit first")

    @property
    def network_density_(self) -> float:
        self._check_fitted()
        return self.partition_.network_density


class DensityEpsilonMapper(BaseEstimator, TransformerMixin):
    """Transform community densities into personalized privacy levels.

    Stateless: fit only validates parameters. transform accepts a 1-D
    array or a single density column.
    """

    def __init__(self, omega: float = 1.0, theta: float = 1.0,
                 alpha: float = 1.0, floor: Optional[float] = None,
                 paper_literal_sign: bool = False):
        self.omega = omega
        self.theta = theta
        self.alpha = alpha
        self.floor = floor
        self.paper_literal_sign = paper_literal_sign

    def _params(self) -> MappingParams:
        return MappingParams(omega=self.omega, theta=self.theta,
                             alpha=self.alpha, floor=self.floor,
                             paper_literal_sign=self.paper_literal_sign)

    def fit(self, X, y=None):
        self.params_ = self._params()
        return self

    def transform(self, X):
        # Stateless: usable without a prior fit, like sklearn's Normalizer.
        params = getattr(self, "params_", None) or self._params()
        densities = np.asarray(X, dtype=float)
        shape = densities.shape
        if densities.ndim == 2 and densities.shape[1] == 1:
            densities = densities[:, 0]
        elif densities.ndim > 1:
            raise ValueError("expected a 1-D density array or single column")
        eps = np.atleast_1d(map_density_to_epsilon(densities, params))
        return eps.reshape(shape)
