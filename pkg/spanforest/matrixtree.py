# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Matrix-tree analytics of the random augmented tree.

For edge weights ``A = exp(S)`` the total weight of all spanning trees is
``det(L + J / p**2)`` where ``L`` is the Laplacian, ``J`` the all-ones matrix
and ``p = n + 1``. With ``Omega`` the inverse of that matrix, the probability
that edge ``(i, j)`` belongs to the random tree is
``(Omega[i, i] + Omega[j, j] - 2 * Omega[i, j]) * A[i, j]``.

>>> import numpy as np
>>> from spanforest.core import LogSimilarity
>>> S = LogSimilarity(np.zeros((4, 4)))
>>> round(float(np.exp(count_weighted_trees_log(S))), 6)
16.0
>>> np.round(edge_marginals(S).M[0], 6).tolist()
[0.0, 0.5, 0.5, 0.5]
"""

import itertools
import logging
from concurrent.futures import ProcessPoolExecutor

import networkx as nx
import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, orthogonal_procrustes
from scipy.special import logsumexp

from . import config as defaults
from .core import HUB, AugmentedTree, ModelState
from .datagen import gen_gaussian_components
from .densities import build_S
from .errors import DimensionError, FactorizationError, ParameterError
from .mcmc import ChainConfig, run_chain
from .posterior import posterior_mean_scales
from .randkit import make_generator
from .spectral import kmeans, normalized_laplacian, similarity_from_S, top_eigenvectors

logger = logging.getLogger(__name__)

#: Component means of the eigenvector convergence data.
EIGENCHECK_MEANS = ((0.0, 0.0), (2.0, 2.0), (4.0, 4.0))


class EdgeMarginals(object):
    """Probabilities that each edge belongs to the random augmented tree."""

    def __init__(self, M):
        """Initialize from a symmetric probability matrix."""
        M = np.clip(0.5 * (M + M.T), 0.0, 1.0)
        np.fill_diagonal(M, 0.0)
        M.setflags(write=False)
        self.M = M
        self.n = M.shape[0] - 1

    def expected_edges(self):
        """Return the expected number of tree edges, which equals ``n``."""
        return float(np.triu(self.M, 1).sum())

    def data_block(self):
        """Return the marginals among data nodes only."""
        return self.M[1:, 1:]


def _shifted_laplacian(S):
    weights, shift = S.shifted_weights()
    size = S.n + 1
    shifted = np.diag(weights.sum(axis=1)) - weights + 1.0 / size**2
    shifted = 0.5 * (shifted + shifted.T)
    try:
        factor = cho_factor(shifted, lower=True)
    except LinAlgError as exc:
        raise FactorizationError(
            "shifted Laplacian is not positive definite: {0}".format(exc)
        )
    if not np.all(np.isfinite(factor[0])):
        raise FactorizationError("shifted Laplacian factorization is not finite")
    return weights, shift, factor


def count_weighted_trees_log(S):
    """Return the log of the summed weight of all spanning trees of ``exp(S)``."""
    _, shift, (chol, _) = _shifted_laplacian(S)
    logdet = 2.0 * np.sum(np.log(np.diag(chol)))
    return float(logdet + S.n * shift)


def edge_marginals(S):
    """Return the closed-form edge inclusion probabilities of the random tree."""
    weights, _, factor = _shifted_laplacian(S)
    omega = cho_solve(factor, np.eye(S.n + 1))
    diag = np.diag(omega)
    resistance = diag[:, np.newaxis] + diag[np.newaxis, :] - 2.0 * omega
    return EdgeMarginals(resistance * weights)


def _tree_from_prufer(sequence, size):
    shape = nx.from_prufer_sequence(list(sequence))
    parent = np.zeros(size, dtype=np.int64)
    for child, pred in nx.bfs_predecessors(shape, HUB):
        parent[child] = pred
    return AugmentedTree._trusted(parent)


def enumerate_trees(S, max_nodes=defaults.MAX_ENUMERATION_NODES):
    """Return every spanning tree over ``0..n`` with its log weight.

    Trees are listed in Prufer-sequence order, ``(n + 1) ** (n - 1)`` of them.

    :param max_nodes: Largest accepted node count, hub included.
    :return: List of ``(AugmentedTree, log_weight)`` pairs.
    """
    size = S.n + 1
    if size > max_nodes:
        raise ParameterError(
            "enumeration over {0} nodes exceeds the limit of {1}".format(
                size, max_nodes
            )
        )
    nodes = np.arange(1, size)
    trees = []
    if size == 2:
        sequences = [()]
    else:
        sequences = itertools.product(range(size), repeat=size - 2)
    for sequence in sequences:
        tree = _tree_from_prufer(sequence, size)
        trees.append((tree, float(np.sum(S.values[nodes, tree.parent[1:]]))))
    return trees


def enumeration_marginals(S, max_nodes=defaults.MAX_ENUMERATION_NODES):
    """Return edge inclusion probabilities by summing over all trees."""
    trees = enumerate_trees(S, max_nodes=max_nodes)
    log_weights = np.array([weight for _, weight in trees])
    probs = np.exp(log_weights - logsumexp(log_weights))
    M = np.zeros((S.n + 1, S.n + 1))
    nodes = np.arange(1, S.n + 1)
    for (tree, _), prob in zip(trees, probs):
        M[nodes, tree.parent[1:]] += prob
    return EdgeMarginals(M + M.T)


def marginal_cluster(S, K, rng, **kmeans_options):
    """Cluster data nodes by the leading eigenvectors of their edge marginals.

    The rows of the top ``K`` eigenvectors of the data block of ``M`` are
    normalized to unit length and grouped by K-means.
    """
    block = edge_marginals(S).data_block()
    basis = top_eigenvectors(block, K)
    norms = np.linalg.norm(basis.vectors, axis=1, keepdims=True)
    embedded = basis.vectors / np.where(norms > 0, norms, 1.0)
    return kmeans(embedded, K, rng, **kmeans_options)


def procrustes_distance(U, V):
    """Return the smallest Frobenius distance between ``U`` and ``V @ R``.

    ``R`` ranges over orthogonal matrices; for orthonormal ``K``-column
    bases the result is ``sqrt(2K - 2 * sum of singular values of V.T @ U)``.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.ndim != 2 or U.shape != V.shape:
        raise DimensionError(
            "bases must share their shape, got {0} and {1}".format(U.shape, V.shape)
        )
    _, scale = orthogonal_procrustes(V, U)
    squared = np.sum(U**2) + np.sum(V**2) - 2.0 * scale
    return float(np.sqrt(max(squared, 0.0)))


def eigencheck_bases(S, K):
    """Return the top ``K`` eigenbases of ``M`` and of ``-N`` for ``S``."""
    M = edge_marginals(S).M
    N = normalized_laplacian(similarity_from_S(S))
    return top_eigenvectors(M, K), top_eigenvectors(-N, K)


def eigencheck_replicate(
    n,
    rng,
    K=defaults.EIGENCHECK_K,
    iterations=defaults.EIGENCHECK_ITERATIONS,
    lambda_=defaults.LAMBDA,
    alpha_sigma=defaults.ALPHA_SIGMA,
):
    """Run one replicate of the eigenvector convergence experiment.

    Draws ``n`` points from a three-component Gaussian mixture, fits the
    model, builds ``S`` at the posterior-mean scales and compares the leading
    eigenvectors of the edge marginals with those of the negated normalized
    Laplacian.

    :return: Procrustes distance between the two bases.
    """
    data, _ = gen_gaussian_components(n, EIGENCHECK_MEANS, rng)
    cfg = ChainConfig(
        iterations=iterations,
        seed=int(rng.integers(2**63)),
        lambda_=lambda_,
        alpha_sigma=alpha_sigma,
    )
    samples = run_chain(data, cfg, rng=rng)
    sigma_tilde, gamma2 = posterior_mean_scales(samples)
    state = ModelState(
        sigma_tilde=sigma_tilde,
        gamma2=gamma2,
        mu=data.mean,
        u_gamma=np.ones(data.n),
        lambda_=lambda_,
        alpha_sigma=alpha_sigma,
    )
    U, V = eigencheck_bases(build_S(data, state), min(K, data.n + 1))
    return procrustes_distance(U.vectors, V.vectors)


def _run_replicate(task):
    n, replicate, seed, options = task
    distance = eigencheck_replicate(n, make_generator(seed), **options)
    return {"n": n, "replicate": replicate, "distance": distance}


def eigencheck_experiment(n_grid, replicates, rng, threads=1, **options):
    """Run the eigenvector convergence experiment over a grid of sample sizes.

    Every replicate gets its own seed drawn from ``rng`` up front, so the
    table does not depend on ``threads``.

    :param n_grid: Sample sizes.
    :param replicates: Replicates per sample size.
    :param threads: Worker processes; ``1`` runs in-process.
    :param options: Forwarded to :func:`eigencheck_replicate`.
    :return: List of ``{"n", "replicate", "distance"}`` rows.
    """
    n_grid = [int(n) for n in n_grid]
    if not n_grid or replicates < 1:
        raise ParameterError("need a non-empty grid and at least one replicate")
    if min(n_grid) < 2:
        raise ParameterError("every sample size must be at least 2")
    seeds = rng.integers(2**63, size=(len(n_grid), replicates))
    tasks = [
        (n, column + 1, int(seeds[row, column]), options)
        for row, n in enumerate(n_grid)
        for column in range(replicates)
    ]
    logger.info("Eigenvector check: %d sizes x %d replicates", len(n_grid), replicates)
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(_run_replicate, tasks))
    return [_run_replicate(task) for task in tasks]
