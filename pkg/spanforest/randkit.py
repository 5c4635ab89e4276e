# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Seeded random variates and the forest-process prior simulator.

Every sampler takes an explicit :class:`numpy.random.Generator`. Generators
are not thread-safe; give each chain or worker its own stream from
:func:`spawn_generators`.

>>> rng = make_generator(7)
>>> tree = simulate_forest_process(5, 1.0, rng)
>>> tree.n
5
"""

import dataclasses
import logging

import networkx as nx
import numpy as np
from scipy import linalg, stats

from .core import HUB, AugmentedTree
from .errors import ParameterError, SamplerPathologyError

logger = logging.getLogger(__name__)

#: Largest accepted seed.
MAX_SEED = 2**64 - 1


def make_generator(seed):
    """Return a PCG64 generator for a 64-bit unsigned ``seed``."""
    return np.random.Generator(np.random.PCG64(_check_seed(seed)))


def spawn_generators(seed, count):
    """Return ``count`` independent generators derived from one root seed.

    Stream ``k`` is always the same for a given ``(seed, k)`` whatever
    ``count`` is.
    """
    children = np.random.SeedSequence(_check_seed(seed)).spawn(int(count))
    return [np.random.Generator(np.random.PCG64(child)) for child in children]


def _check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) <= MAX_SEED:
        raise ParameterError("seed must be an integer in [0, 2**64 - 1]")
    return int(seed)


def _positive(name, value):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ParameterError("{0} must be positive, got {1}".format(name, value))
    return value


def _unwrap(draw, size):
    return float(draw) if size is None else draw


@dataclasses.dataclass(frozen=True)
class GigParams(object):
    """Generalized inverse Gaussian parameters.

    The density on ``x > 0`` is proportional to
    ``x ** (lam - 1) * exp(-(psi * x + chi / x) / 2)``.
    """

    psi: float
    chi: float
    lam: float

    def __post_init__(self):
        """Check the parameters lie in the distribution's domain."""
        psi, chi, lam = float(self.psi), float(self.chi), float(self.lam)
        if not all(np.isfinite([psi, chi, lam])) or psi < 0 or chi < 0:
            raise ParameterError("GIG needs finite psi >= 0 and chi >= 0")
        valid = (
            (psi > 0 and chi > 0)
            or (chi == 0 and psi > 0 and lam > 0)
            or (psi == 0 and chi > 0 and lam < 0)
        )
        if not valid:
            raise ParameterError(
                "GIG(psi={0}, chi={1}, lam={2}) is improper".format(psi, chi, lam)
            )
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "lam", lam)


def sample_gig(params, rng, size=None):
    """Draw from a generalized inverse Gaussian distribution.

    Boundary cases are the Gamma (``chi = 0``) and Inverse-Gamma
    (``psi = 0``) limits; the interior uses scipy's ratio-of-uniforms
    ``geninvgauss`` sampler. Its acceptance rate is bounded below uniformly
    in the parameters (the mode-shifted variant is used when
    ``sqrt(psi * chi)`` is small), so the loop terminates without a cap.
    Numerically degenerate parameters can still return non-finite or zero
    draws; these raise :class:`~spanforest.errors.SamplerPathologyError`.

    :param params: :class:`GigParams`.
    :param rng: :class:`numpy.random.Generator`.
    :param size: Output shape, ``None`` for a scalar.
    """
    if params.chi == 0:
        return sample_gamma(params.lam, params.psi / 2, rng, size)
    if params.psi == 0:
        return sample_inverse_gamma(-params.lam, params.chi / 2, rng, size)
    draw = stats.geninvgauss.rvs(
        params.lam,
        np.sqrt(params.psi * params.chi),
        scale=np.sqrt(params.chi / params.psi),
        size=size,
        random_state=rng,
    )
    bad = ~(np.isfinite(draw) & (np.asarray(draw) > 0))
    if np.any(bad):
        logger.warning(
            "GIG sampler returned %d invalid draws for %r", int(np.sum(bad)), params
        )
        raise SamplerPathologyError(
            "GIG draw is not a positive finite number for {0!r}".format(params)
        )
    return _unwrap(draw, size)


def sample_gamma(shape, rate, rng, size=None):
    """Draw from Gamma(``shape``, ``rate``)."""
    shape = _positive("shape", shape)
    rate = _positive("rate", rate)
    return _unwrap(rng.gamma(shape, 1.0 / rate, size=size), size)


def sample_inverse_gamma(shape, scale, rng, size=None):
    """Draw from Inverse-Gamma(``shape``, ``scale``).

    The density is proportional to ``x ** (-shape - 1) * exp(-scale / x)``.
    """
    shape = _positive("shape", shape)
    scale = _positive("scale", scale)
    return _unwrap(scale / rng.standard_gamma(shape, size=size), size)


def sample_gaussian(mean, cov, rng, size=None):
    """Draw from a multivariate normal distribution.

    Draws are ``mean + z L^T`` with ``L`` the lower Cholesky factor of ``cov``
    and ``z`` standard normal, so an identity ``cov`` consumes the stream
    exactly like ``rng.standard_normal``.

    :param size: Number of draws, ``None`` for a single vector.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    try:
        factor = linalg.cholesky(np.atleast_2d(cov), lower=True)
    except linalg.LinAlgError:
        raise ParameterError("covariance must be symmetric positive definite")
    if factor.shape != (mean.size, mean.size):
        raise ParameterError("mean and covariance dimensions differ")
    shape = (mean.size,) if size is None else (int(size), mean.size)
    return mean + rng.standard_normal(shape) @ factor.T


def sample_student_t(mean, df, rng, size=None, shape=None, independent=False):
    """Draw from a multivariate t distribution.

    :param shape: Scale matrix, identity when omitted.
    :param independent: Draw independent univariate t coordinates around
        ``mean`` instead; ``shape`` must then be omitted.
    """
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    df = _positive("df", df)
    if independent:
        if shape is not None:
            raise ParameterError("independent coordinates take no scale matrix")
        count = (mean.size,) if size is None else (int(size), mean.size)
        return mean + stats.t.rvs(df, size=count, random_state=rng)
    if shape is None:
        shape = np.eye(mean.size)
    dist = stats.multivariate_t(loc=mean, shape=shape, df=df)
    return dist.rvs(size=1 if size is None else size, random_state=rng)


def simulate_forest_process(n, alpha, rng, exchangeable=True):
    """Draw an augmented tree from the forest-process prior.

    Node ``i`` joins the cluster of each earlier node with weight
    ``1 / (i - 1 + alpha)`` and opens a new cluster with weight
    ``alpha / (i - 1 + alpha)``.

    With ``exchangeable=False`` node ``i`` attaches directly to the earlier
    node it picked, so node 1 is always a root and clusters grow as recursive
    trees. With ``exchangeable=True`` only the resulting partition is kept and
    each cluster of size ``m`` receives one of its ``m ** (m - 1)`` rooted
    labelled trees uniformly at random; the tree law is then the CRP forest
    prior of :func:`spanforest.densities.crp_forest_log_prior`.

    :param n: Number of data nodes.
    :param alpha: Concentration parameter.
    :param rng: :class:`numpy.random.Generator`.
    """
    n = int(n)
    if n < 1:
        raise ParameterError("n must be at least 1")
    alpha = _positive("alpha", alpha)

    parent = np.zeros(n + 1, dtype=np.int64)
    uniforms = rng.random(n)
    for i in range(2, n + 1):
        slot = uniforms[i - 1] * (i - 1 + alpha)
        parent[i] = HUB if slot >= i - 1 else int(slot) + 1
    if not exchangeable:
        return AugmentedTree._trusted(parent)

    labels = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        labels[i] = i if parent[i] == HUB else labels[parent[i]]
    tree = np.zeros(n + 1, dtype=np.int64)
    for root_label in np.flatnonzero(parent[1:] == HUB) + 1:
        members = np.flatnonzero(labels == root_label)
        _attach_uniform_tree(tree, members, rng)
    return AugmentedTree._trusted(tree)


def _attach_uniform_tree(parent, members, rng):
    m = members.size
    root = int(rng.integers(m))
    parent[members[root]] = HUB
    if m == 1:
        return
    sequence = rng.integers(m, size=m - 2).tolist()
    shape = nx.from_prufer_sequence(sequence)
    for child, pred in nx.bfs_predecessors(shape, root):
        parent[members[child]] = members[pred]
