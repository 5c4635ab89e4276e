# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Log densities, the log-similarity matrix and the tree priors.

Leaves follow an isotropic Gaussian kernel around their tree neighbour and
roots a multivariate Cauchy around ``mu``. The posterior over trees given the
continuous parameters is proportional to the product of ``exp(S[i, j])`` over
the tree's edges, with the hub row of ``S`` carrying the root density and the
geometric prior weight ``log(lambda)``.
"""

import dataclasses

import numpy as np
from scipy import stats
from scipy.linalg import LinAlgError, cholesky, solve_triangular
from scipy.spatial.distance import pdist, squareform
from scipy.special import gammaln

from .core import HUB, LogSimilarity, partition_from_tree
from .errors import DimensionError, FactorizationError, ParameterError

LOG_2PI = np.log(2 * np.pi)
LOG_PI = np.log(np.pi)


def _positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ParameterError(
            "{0} must be positive and finite, got {1}".format(name, value)
        )
    return value


def _finite_vectors(*vectors):
    arrays = [np.atleast_1d(np.asarray(v, dtype=float)) for v in vectors]
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise ParameterError("inputs must be finite")
    if len({a.shape for a in arrays}) != 1:
        raise DimensionError("vectors must have the same length")
    return arrays


def log_leaf(yi, yj, sigma_ij):
    """Return the Gaussian leaf log density of ``yi`` given its neighbour ``yj``.

    :param yi: ``p``-vector.
    :param yj: ``p``-vector.
    :param sigma_ij: Variance ``sigma_tilde_i * sigma_tilde_j``.
    """
    sigma_ij = _positive("sigma_ij", sigma_ij)
    yi, yj = _finite_vectors(yi, yj)
    p = yi.size
    sq_dist = np.sum((yi - yj) ** 2)
    return float(-0.5 * p * (LOG_2PI + np.log(sigma_ij)) - sq_dist / (2 * sigma_ij))


def log_root(yi, mu, gamma2):
    """Return the multivariate Cauchy root log density of ``yi``.

    :param yi: ``p``-vector.
    :param mu: Location ``p``-vector.
    :param gamma2: Squared Cauchy scale.
    """
    gamma2 = _positive("gamma2", gamma2)
    yi, mu = _finite_vectors(yi, mu)
    return float(_log_root_sq(np.sum((yi - mu) ** 2), yi.size, gamma2))


def _log_root_sq(sq_dist, p, gamma2):
    half = 0.5 * (1 + p)
    return (
        gammaln(half)
        - 0.5 * p * np.log(gamma2)
        - half * LOG_PI
        - half * np.log1p(sq_dist / gamma2)
    )


def build_S(data, state):
    """Return the log-similarity matrix of ``data`` under ``state``.

    :param data: :class:`~spanforest.core.Dataset`.
    :param state: :class:`~spanforest.core.ModelState`.
    """
    if state.sigma_tilde.size != data.n:
        raise DimensionError(
            "state has {0} scales for {1} observations".format(
                state.sigma_tilde.size, data.n
            )
        )
    if state.mu.size != data.p:
        raise DimensionError(
            "mu has dimension {0}, data {1}".format(state.mu.size, data.p)
        )
    p = data.p
    sigma = np.outer(state.sigma_tilde, state.sigma_tilde)
    leaf = -0.5 * p * (LOG_2PI + np.log(sigma)) - data.sq_dists / (2 * sigma)
    root_sq = np.sum((data.values - state.mu) ** 2, axis=1)
    root = _log_root_sq(root_sq, p, state.gamma2) + np.log(state.lambda_)

    S = np.zeros((data.n + 1, data.n + 1))
    S[1:, 1:] = leaf
    S[HUB, 1:] = root
    S[1:, HUB] = root
    np.fill_diagonal(S, 0.0)
    return LogSimilarity(S)


def log_posterior_tree(tree, S):
    """Return the sum of ``S`` over the undirected edges of ``tree``."""
    if tree.n != S.n:
        raise DimensionError(
            "tree has {0} data nodes but S has {1}".format(tree.n, S.n)
        )
    nodes = np.arange(1, tree.n + 1)
    return float(np.sum(S.values[nodes, tree.parent[1:]]))


def crp_forest_log_prior(tree, alpha):
    """Return the log probability of ``tree`` under the CRP forest prior.

    Each cluster of size ``n_k`` contributes a Chinese restaurant weight
    ``alpha * Gamma(n_k)`` spread uniformly over its ``n_k ** (n_k - 1)``
    rooted labelled trees.

    :param tree: :class:`~spanforest.core.AugmentedTree`.
    :param alpha: Concentration parameter.
    """
    alpha = _positive("alpha", alpha)
    sizes = partition_from_tree(tree).sizes.astype(float)
    return float(
        sizes.size * np.log(alpha)
        + gammaln(alpha)
        - gammaln(alpha + tree.n)
        + np.sum(gammaln(sizes) - (sizes - 1) * np.log(sizes))
    )


def geometric_tree_log_prior(tree, lambda_):
    """Return ``K * log(lambda_)``, the unnormalized geometric tree prior."""
    return tree.k * np.log(_positive("lambda", lambda_))


def log_prior_sigma_tilde(sigma_tilde, data, alpha_sigma):
    """Return the Gamma hyper-prior log density of the local scales.

    Scale ``i`` has shape ``alpha_sigma`` and rate ``1 / mu_sigma_i``.
    """
    return float(
        np.sum(stats.gamma.logpdf(sigma_tilde, a=alpha_sigma, scale=data.mu_sigma))
    )


def log_prior_gamma2(gamma2, data):
    """Return the Inverse-Gamma(2, sigma2_hat) log density of ``gamma2``."""
    return float(stats.invgamma.logpdf(gamma2, a=2.0, scale=data.sigma2_hat))


def log_joint(tree, data, state, S=None):
    """Return the log posterior of ``(tree, state)`` up to a constant.

    :param S: Log-similarity matrix of ``state``; rebuilt when omitted. Pass
        the covariate-adjusted matrix to score a covariate-dependent fit.
    """
    if S is None:
        S = build_S(data, state)
    return (
        log_posterior_tree(tree, S)
        + log_prior_sigma_tilde(state.sigma_tilde, data, state.alpha_sigma)
        + log_prior_gamma2(state.gamma2, data)
    )


@dataclasses.dataclass(frozen=True, eq=False)
class CovariatePriorConfig(object):
    """Covariates entering the tree prior through a Gaussian similarity.

    ``X`` is centred. Both the leaf and the root covariance equal
    ``eta * Sn``; larger ``eta`` weakens the covariates' influence.
    """

    X: np.ndarray
    eta: float
    Sn: np.ndarray

    @classmethod
    def from_covariates(cls, X, eta=1.0):
        """Centre ``X`` and compute its regularized empirical covariance.

        :param X: ``n x m`` covariate matrix (1-D means ``m = 1``).
        :param eta: Covariance inflation factor.
        """
        X = np.array(X, dtype=float)
        if X.ndim == 1:
            X = X[:, np.newaxis]
        if X.ndim != 2 or X.shape[0] < 2:
            raise DimensionError("covariates must form an n x m matrix with n >= 2")
        if not np.all(np.isfinite(X)):
            raise ParameterError("covariates must be finite")
        eta = _positive("eta", eta)
        X = X - X.mean(axis=0)
        Sn = np.atleast_2d(np.cov(X, rowvar=False))
        ridge = 1e-8 * np.mean(np.diag(Sn))
        if ridge <= 0:
            raise FactorizationError(
                "covariates are constant; Sn cannot be regularized"
            )
        Sn = Sn + ridge * np.eye(Sn.shape[0])
        X.setflags(write=False)
        Sn.setflags(write=False)
        return cls(X=X, eta=eta, Sn=Sn)

    @property
    def n(self):
        """Number of rows."""
        return self.X.shape[0]

    @property
    def sigma1(self):
        """Covariate covariance ``eta * Sn``."""
        return self.eta * self.Sn

    def with_eta(self, eta):
        """Return the same covariates under another ``eta``."""
        return dataclasses.replace(self, eta=_positive("eta", eta))


def covariate_log_adjustments(cfg):
    """Return ``(F0, R0)``, the covariate log terms added to ``S``.

    ``F0[i, j]`` is ``log f0(x_i; x_j)`` for ``i != j`` (zero diagonal) and
    ``R0[i]`` is ``log r0(x_i)``.
    """
    double = 2.0 * cfg.sigma1
    m = double.shape[0]
    try:
        chol = cholesky(2.0 * double, lower=True)
    except LinAlgError as exc:
        raise FactorizationError("covariate covariance is singular: {0}".format(exc))
    sign, logdet = np.linalg.slogdet(double)
    if sign <= 0:
        raise FactorizationError("covariate covariance is not positive definite")
    norm = -0.5 * (m * LOG_2PI + logdet)
    white = solve_triangular(chol, cfg.X.T, lower=True).T
    F0 = norm - squareform(pdist(white, "sqeuclidean"))
    np.fill_diagonal(F0, 0.0)
    R0 = norm - np.sum(white**2, axis=1)
    return F0, R0


def covariate_adjust_S(S, cfg):
    """Return ``S`` with the covariate similarity folded into every edge."""
    if cfg.n != S.n:
        raise DimensionError(
            "covariates have {0} rows but S has {1} data nodes".format(cfg.n, S.n)
        )
    F0, R0 = covariate_log_adjustments(cfg)
    adjusted = np.array(S.values)
    adjusted[1:, 1:] += F0
    adjusted[HUB, 1:] += R0
    adjusted[1:, HUB] += R0
    np.fill_diagonal(adjusted, 0.0)
    return LogSimilarity(adjusted)
