# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Seeded synthetic datasets with ground-truth labels."""

import dataclasses

import numpy as np

from .core import Dataset, Partition
from .errors import ParameterError
from .randkit import sample_gaussian, sample_student_t

#: Ring radii of the default rings scene.
RING_RADII = (0.2, 1.0, 2.0)

#: Kinds accepted by :class:`GenSpec`.
KINDS = ("rings", "gauss_mix", "t_mix", "arc", "covariate")


def gen_rings(n_per_ring, radii, noise_sd, rng):
    """Sample points around concentric circles.

    :param n_per_ring: Points per ring.
    :param radii: Positive ring radii; ring ``k`` gets label ``k + 1``.
    :param noise_sd: Standard deviation of the isotropic Gaussian noise.
    :return: ``(Dataset, Partition)``.
    """
    radii = np.asarray(radii, dtype=float)
    if radii.ndim != 1 or radii.size == 0 or np.any(radii <= 0):
        raise ParameterError("radii must be a non-empty list of positive values")
    if n_per_ring < 1 or noise_sd < 0:
        raise ParameterError("need n_per_ring >= 1 and noise_sd >= 0")
    labels = np.repeat(np.arange(radii.size), n_per_ring)
    angles = rng.uniform(0.0, 2 * np.pi, size=labels.size)
    points = radii[labels][:, np.newaxis] * np.column_stack(
        [np.cos(angles), np.sin(angles)]
    )
    points += _isotropic_noise(labels.size, noise_sd, rng)
    return Dataset(points), Partition(labels)


def _isotropic_noise(count, sd, rng, dim=2):
    return sd * sample_gaussian(np.zeros(dim), np.eye(dim), rng, size=count)


def _memberships(n, components, rng):
    if n < 2:
        raise ParameterError("n must be at least 2")
    return rng.integers(components, size=n)


def gen_mixture(n, b, rng, kind="gaussian", df=None):
    """Sample a two-component mixture centred at ``(0, 0)`` and ``(b, b)``.

    Memberships are independent fair coin flips. Coordinates are
    independent standard normal or Student t with ``df`` degrees of freedom.

    :param kind: ``"gaussian"`` or ``"t"``.
    :return: ``(Dataset, Partition)``.
    """
    labels = _memberships(n, 2, rng)
    if kind == "gaussian":
        noise = _isotropic_noise(n, 1.0, rng)
    elif kind == "t":
        if df is None or df < 1:
            raise ParameterError("t components need df >= 1")
        noise = sample_student_t(np.zeros(2), df, rng, size=n, independent=True)
    else:
        raise ParameterError("unknown mixture kind {0!r}".format(kind))
    means = np.array([[0.0, 0.0], [b, b]], dtype=float)
    return Dataset(means[labels] + noise), Partition(labels)


def gen_gaussian_components(n, means, rng, sd=1.0):
    """Sample an equal-weight isotropic Gaussian mixture.

    :param means: One mean vector per component.
    :return: ``(Dataset, Partition)``.
    """
    means = np.atleast_2d(np.asarray(means, dtype=float))
    labels = _memberships(n, means.shape[0], rng)
    points = means[labels] + _isotropic_noise(n, sd, rng, dim=means.shape[1])
    return Dataset(points), Partition(labels)


def gen_covariate_mixture(n_per_group, rng, spread=0.6):
    """Sample three groups measured on two response and two covariate dimensions.

    Group means differ in both blocks, so the covariates are informative
    about the grouping. ``spread`` is the within-group standard deviation.

    :return: ``(Dataset, X, Partition)`` where ``X`` is the ``n x 2`` covariate
        matrix.
    """
    if n_per_group < 1 or spread <= 0:
        raise ParameterError("need n_per_group >= 1 and a positive spread")
    response_means = np.array([[0.0, 0.0], [3.0, 0.5], [1.5, 2.5]])
    covariate_means = np.array([[0.0, 0.0], [2.0, -1.0], [-1.0, 2.0]])
    labels = np.repeat(np.arange(3), n_per_group)
    response = response_means[labels] + _isotropic_noise(labels.size, spread, rng)
    covariates = covariate_means[labels] + _isotropic_noise(labels.size, spread, rng)
    return Dataset(response), covariates, Partition(labels)


def gen_arc_scene(n_arc, n_cloud, noise_sd, rng):
    """Sample a half-circle arc above two compact point clouds.

    :return: ``(Dataset, Partition)`` with the arc labelled 1.
    """
    if n_arc < 1 or n_cloud < 1 or noise_sd < 0:
        raise ParameterError("need positive counts and noise_sd >= 0")
    angles = rng.uniform(0.0, np.pi, size=n_arc)
    arc = 3.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    arc += _isotropic_noise(n_arc, noise_sd, rng)
    clouds = [
        centre + _isotropic_noise(n_cloud, 0.3, rng)
        for centre in (np.array([-1.0, 1.0]), np.array([1.0, 1.0]))
    ]
    labels = np.repeat([0, 1, 2], [n_arc, n_cloud, n_cloud])
    return Dataset(np.vstack([arc] + clouds)), Partition(labels)


@dataclasses.dataclass(frozen=True)
class Generated(object):
    """A synthetic dataset with its truth and optional covariates."""

    data: Dataset
    truth: Partition
    covariates: np.ndarray = None


@dataclasses.dataclass(frozen=True)
class GenSpec(object):
    """Kind, size and kind-specific parameters of a synthetic dataset.

    ``n`` is the total number of points; for ``rings`` it must split evenly
    across the radii, for ``covariate`` across the three groups and for
    ``arc`` it is shared as half arc, quarter per cloud.

    Recognised ``params``: ``radii`` and ``noise_sd`` (rings, arc), ``b``
    (mixtures), ``df`` (``t_mix``).
    """

    kind: str
    n: int
    params: dict = dataclasses.field(default_factory=dict)

    def __post_init__(self):
        """Validate kind and size."""
        if self.kind not in KINDS:
            raise ParameterError(
                "unknown kind {0!r}, expected one of {1}".format(self.kind, KINDS)
            )
        if self.n < 2:
            raise ParameterError("n must be at least 2")
        groups = {"rings": len(self.params.get("radii", RING_RADII)), "covariate": 3}
        if self.kind in groups and self.n % groups[self.kind]:
            raise ParameterError(
                "n={0} does not split evenly into {1} groups".format(
                    self.n, groups[self.kind]
                )
            )
        noise_sd = self.params.get("noise_sd", 0.05)
        if self.kind in ("rings", "arc") and not noise_sd > 0:
            raise ParameterError("noise_sd must be positive")

    def generate(self, rng):
        """Draw the dataset with ``rng``."""
        params = self.params
        if self.kind == "rings":
            radii = params.get("radii", RING_RADII)
            data, truth = gen_rings(
                self.n // len(radii), radii, params.get("noise_sd", 0.05), rng
            )
        elif self.kind == "gauss_mix":
            data, truth = gen_mixture(self.n, params.get("b", 4.0), rng)
        elif self.kind == "t_mix":
            data, truth = gen_mixture(
                self.n, params.get("b", 4.0), rng, kind="t", df=params.get("df", 3)
            )
        elif self.kind == "arc":
            n_cloud = self.n // 4
            data, truth = gen_arc_scene(
                self.n - 2 * n_cloud, n_cloud, params.get("noise_sd", 0.05), rng
            )
        else:
            data, covariates, truth = gen_covariate_mixture(self.n // 3, rng)
            return Generated(data, truth, covariates)
        return Generated(data, truth)
