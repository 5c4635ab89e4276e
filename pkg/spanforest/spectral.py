# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Normalized spectral clustering.

>>> import numpy as np
>>> A = np.ones((3, 3)) - np.eye(3)
>>> np.allclose(np.linalg.eigvalsh(normalized_laplacian(A)), [0.0, 1.5, 1.5])
True
"""

import dataclasses
import warnings

import numpy as np
from scipy.linalg import LinAlgError, eigh
from sklearn.cluster import KMeans

from . import config as defaults
from .core import Partition
from .errors import DataError, DimensionError, FactorizationError, ParameterError

#: Lower bound on shifted log weights before exponentiation.
MIN_LOG_WEIGHT = -700.0


class SimilarityMatrix(object):
    """Non-negative symmetric weight matrix with a zero diagonal."""

    def __init__(self, values):
        """Initialize and validate the weights."""
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimensionError("similarity matrix must be square")
        if values.shape[0] == 0:
            raise DataError("similarity matrix is empty")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise ParameterError("similarities must be finite and non-negative")
        if np.any(np.diag(values) != 0):
            raise ParameterError("similarity matrix must have a zero diagonal")
        tolerance = 1e-12 * max(1.0, float(values.max()))
        if not np.allclose(values, values.T, rtol=0, atol=tolerance):
            raise ParameterError("similarity matrix must be symmetric")
        values.setflags(write=False)
        self.values = values

    @property
    def m(self):
        """Number of nodes."""
        return self.values.shape[0]

    @property
    def degrees(self):
        """Row sums."""
        return self.values.sum(axis=1)


def _weights(A):
    return A.values if isinstance(A, SimilarityMatrix) else SimilarityMatrix(A).values


@dataclasses.dataclass(frozen=True, eq=False)
class EigenBasis(object):
    """Orthonormal eigenvectors (columns) with their eigenvalues."""

    vectors: np.ndarray
    values: np.ndarray

    @property
    def k(self):
        """Number of eigenvectors."""
        return self.vectors.shape[1]


def similarity_from_S(S, hub=True):
    """Return the edge weights ``exp(S)`` as a :class:`SimilarityMatrix`.

    Logs are shifted by their maximum and clipped at
    :data:`MIN_LOG_WEIGHT`, so every pair keeps a positive weight.

    :param S: :class:`~spanforest.core.LogSimilarity`.
    :param hub: Keep the hub row and column; otherwise only data nodes.
    """
    logs = S.values if hub else S.values[1:, 1:]
    off = ~np.eye(logs.shape[0], dtype=bool)
    shifted = np.where(
        off, np.maximum(logs - logs[off].max(), MIN_LOG_WEIGHT), MIN_LOG_WEIGHT
    )
    weights = np.exp(shifted)
    np.fill_diagonal(weights, 0.0)
    return SimilarityMatrix(weights)


def laplacian(A):
    """Return the graph Laplacian ``D - A``."""
    weights = _weights(A)
    return np.diag(weights.sum(axis=1)) - weights


def normalized_laplacian(A):
    """Return ``I - D^(-1/2) A D^(-1/2)``.

    :raises DataError: If a node has zero degree.
    """
    weights = _weights(A)
    degrees = weights.sum(axis=1)
    if np.any(degrees <= 0):
        raise DataError(
            "node {0} has zero degree".format(int(np.flatnonzero(degrees <= 0)[0]))
        )
    scale = 1.0 / np.sqrt(degrees)
    N = np.eye(weights.shape[0]) - scale[:, np.newaxis] * weights * scale
    return 0.5 * (N + N.T)


def _fix_signs(vectors):
    # Largest-magnitude entry of every column positive, first index on ties.
    pivots = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[pivots, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _eigh(matrix, K, top):
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError("matrix must be square")
    m = matrix.shape[0]
    if not 1 <= K <= m:
        raise ParameterError("K must lie in 1..{0}, got {1}".format(m, K))
    index = [m - K, m - 1] if top else [0, K - 1]
    try:
        values, vectors = eigh(0.5 * (matrix + matrix.T), subset_by_index=index)
    except (LinAlgError, ValueError) as exc:
        raise FactorizationError("eigendecomposition failed: {0}".format(exc))
    if top:
        values, vectors = values[::-1], vectors[:, ::-1]
    return EigenBasis(vectors=_fix_signs(vectors), values=values)


def bottom_eigenvectors(N, K):
    """Return the ``K`` eigenvectors of smallest eigenvalue, ascending."""
    return _eigh(N, K, top=False)


def top_eigenvectors(M, K):
    """Return the ``K`` eigenvectors of largest eigenvalue, descending."""
    return _eigh(M, K, top=True)


def kmeans(
    rows,
    K,
    rng,
    restarts=defaults.KMEANS_RESTARTS,
    max_iter=defaults.KMEANS_MAX_ITER,
    tol=defaults.KMEANS_TOL,
):
    """Cluster ``rows`` with the best of ``restarts`` K-means++ runs.

    :param rows: ``m x d`` points.
    :param K: Number of clusters.
    :param rng: :class:`numpy.random.Generator` seeding the restarts.
    :return: :class:`~spanforest.core.Partition`.
    """
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, np.newaxis]
    if rows.size == 0:
        raise DataError("cannot cluster an empty set of points")
    if not 1 <= K <= rows.shape[0]:
        raise ParameterError("K must lie in 1..{0}, got {1}".format(rows.shape[0], K))
    model = KMeans(
        n_clusters=K,
        init="k-means++",
        n_init=restarts,
        max_iter=max_iter,
        tol=tol,
        random_state=int(rng.integers(2**31 - 1)),
    )
    partition = Partition(model.fit_predict(rows))
    if partition.k < K:
        warnings.warn(
            "K-means found {0} distinct clusters out of {1}".format(partition.k, K),
            UserWarning,
        )
    return partition


def kmeans_cost(rows, partition):
    """Return the within-cluster sum of squared distances to the means."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[:, np.newaxis]
    cost = 0.0
    for members in partition.clusters():
        block = rows[members]
        cost += float(np.sum((block - block.mean(axis=0)) ** 2))
    return cost


def normalized_cut_loss(partition, A):
    """Return the normalized cut of ``partition`` on the weights ``A``.

    Each cluster contributes the weight leaving it divided by its total
    degree.
    """
    weights = _weights(A)
    if partition.n != weights.shape[0]:
        raise DimensionError("partition and similarity matrix sizes differ")
    degrees = weights.sum(axis=1)
    loss = 0.0
    for label, members in enumerate(partition.clusters(), start=1):
        volume = degrees[members].sum()
        if volume <= 0:
            raise ParameterError("cluster {0} has zero total degree".format(label))
        inside = partition.labels == label
        loss += weights[np.ix_(inside, ~inside)].sum() / volume
    return float(loss)


def spectral_cluster(A, K, rng, **kmeans_options):
    """Split the nodes of ``A`` into ``K`` groups by normalized spectral clustering.

    The bottom ``K`` eigenvectors of the normalized Laplacian are
    row-normalized to unit length and grouped by :func:`kmeans`.

    :param kmeans_options: Forwarded to :func:`kmeans`.
    """
    weights = _weights(A)
    m = weights.shape[0]
    if not 1 <= K <= m:
        raise ParameterError("K must lie in 1..{0}, got {1}".format(m, K))
    if K == 1:
        return Partition(np.zeros(m, dtype=int))
    basis = bottom_eigenvectors(normalized_laplacian(weights), K)
    norms = np.linalg.norm(basis.vectors, axis=1, keepdims=True)
    embedded = basis.vectors / np.where(norms > 0, norms, 1.0)
    return kmeans(embedded, K, rng, **kmeans_options)
