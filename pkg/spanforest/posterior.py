# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Summaries of the retained MCMC samples.

The point estimate clusters the posterior co-assignment matrix, read as a
similarity matrix, by normalized spectral clustering with the modal number of
clusters.
"""

import dataclasses
from collections import Counter

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import ModelState, Partition, partition_from_tree
from .densities import build_S, covariate_adjust_S
from .errors import DataError, DimensionError, ParameterError
from .spectral import similarity_from_S, spectral_cluster

#: Floor applied to off-diagonal co-assignment probabilities before clustering.
PSM_FLOOR = 1e-10


def _require_samples(samples):
    samples = list(samples)
    if not samples:
        raise DataError("no samples to summarize")
    return samples


def coassignment(samples):
    """Return the fraction of samples placing each pair of points together."""
    samples = _require_samples(samples)
    n = samples[0].tree.n
    psm = np.zeros((n, n))
    for sample in samples:
        if sample.tree.n != n:
            raise DimensionError("samples disagree on the number of points")
        labels = partition_from_tree(sample.tree).labels
        psm += labels[:, np.newaxis] == labels[np.newaxis, :]
    return psm / len(samples)


def k_histogram(samples):
    """Return ``{K: count}`` over the samples, ordered by ``K``."""
    counts = Counter(sample.k for sample in _require_samples(samples))
    return dict(sorted(counts.items()))


def k_mode(samples):
    """Return the most frequent number of clusters, the smaller one on ties."""
    histogram = k_histogram(samples)
    best = max(histogram.values())
    return min(k for k, count in histogram.items() if count == best)


def point_estimate(psm, k_hat, rng, **kmeans_options):
    """Cluster points by spectral clustering of the co-assignment matrix.

    The diagonal is zeroed and other entries are floored at
    :data:`PSM_FLOOR` so no point is left without similarity.
    """
    psm = np.array(psm, dtype=float)
    if psm.ndim != 2 or psm.shape[0] != psm.shape[1]:
        raise DimensionError("co-assignment matrix must be square")
    if not 1 <= k_hat <= psm.shape[0]:
        raise ParameterError("k_hat must lie in 1..{0}".format(psm.shape[0]))
    if np.any(psm < -1e-12) or np.any(psm > 1 + 1e-12):
        raise ParameterError("co-assignment probabilities must lie in [0, 1]")
    similarity = np.maximum(0.5 * (psm + psm.T), PSM_FLOOR)
    np.fill_diagonal(similarity, 0.0)
    return spectral_cluster(similarity, k_hat, rng, **kmeans_options)


def hungarian_accuracy(estimate, truth):
    """Return the fraction of points correctly labelled after optimal matching.

    Estimated clusters are matched one-to-one to true clusters so as to
    maximize agreement; extra clusters on either side stay unmatched.
    """
    estimate = estimate if isinstance(estimate, Partition) else Partition(estimate)
    truth = truth if isinstance(truth, Partition) else Partition(truth)
    if estimate.n != truth.n:
        raise DimensionError(
            "partitions cover {0} and {1} points".format(estimate.n, truth.n)
        )
    size = max(estimate.k, truth.k)
    table = np.zeros((size, size))
    np.add.at(table, (estimate.labels - 1, truth.labels - 1), 1)
    rows, cols = linear_sum_assignment(table, maximize=True)
    return float(table[rows, cols].sum() / truth.n)


@dataclasses.dataclass(frozen=True, eq=False)
class PosteriorSummary(object):
    """Co-assignment matrix, cluster-count distribution and point estimate."""

    psm: np.ndarray
    k_hist: dict
    k_mode: int
    point_estimate: Partition

    @property
    def retained(self):
        """Number of summarized samples."""
        return sum(self.k_hist.values())


def summarize(samples, rng, k=None, **kmeans_options):
    """Summarize retained samples.

    :param k: Number of clusters of the point estimate; the posterior mode by
        default.
    """
    samples = _require_samples(samples)
    psm = coassignment(samples)
    mode = k_mode(samples)
    estimate = point_estimate(psm, mode if k is None else k, rng, **kmeans_options)
    return PosteriorSummary(
        psm=psm,
        k_hist=k_histogram(samples),
        k_mode=mode,
        point_estimate=estimate,
    )


def posterior_mean_scales(samples):
    """Return the posterior means of the local scales and of ``gamma2``."""
    samples = _require_samples(samples)
    sigma = np.mean([sample.sigma_tilde for sample in samples], axis=0)
    gamma2 = float(np.mean([sample.gamma2 for sample in samples]))
    return sigma, gamma2


def plugin_point_estimate(
    data, samples, K, rng, lambda_=0.5, alpha_sigma=0.5, covariates=None
):
    """Cluster data by spectral clustering of ``exp(S)`` at posterior-mean scales.

    Only the data-node block of the weights is used.
    """
    sigma, gamma2 = posterior_mean_scales(samples)
    state = ModelState(
        sigma_tilde=sigma,
        gamma2=gamma2,
        mu=data.mean,
        u_gamma=np.ones(data.n),
        lambda_=lambda_,
        alpha_sigma=alpha_sigma,
    )
    S = build_S(data, state)
    if covariates is not None:
        S = covariate_adjust_S(S, covariates)
    return spectral_cluster(similarity_from_S(S, hub=False), K, rng)


def trace_table(samples):
    """Return per-sample diagnostics as a list of row mappings.

    Columns are ``chain``, ``iteration``, ``k``, ``gamma2``, ``log_joint``,
    ``sigma_tilde_1`` and ``degree_1`` (non-hub degree of the first point).
    """
    return [
        {
            "chain": sample.chain,
            "iteration": sample.iteration,
            "k": sample.k,
            "gamma2": sample.gamma2,
            "log_joint": sample.log_joint,
            "sigma_tilde_1": float(sample.sigma_tilde[0]),
            "degree_1": sample.tree.degree(1),
        }
        for sample in _require_samples(samples)
    ]


def autocorrelation(series, max_lag):
    """Return the normalized sample autocorrelation for lags ``0..max_lag``.

    A constant series has no defined autocorrelation beyond lag 0; those
    entries are NaN.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise DataError("autocorrelation needs a series of at least two values")
    max_lag = min(int(max_lag), x.size - 1)
    x = x - x.mean()
    denom = float(np.dot(x, x))
    acf = np.full(max_lag + 1, np.nan)
    acf[0] = 1.0
    if denom > 0:
        for lag in range(1, max_lag + 1):
            acf[lag] = float(np.dot(x[:-lag], x[lag:])) / denom
    return acf
