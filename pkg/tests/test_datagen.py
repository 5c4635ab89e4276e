# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Synthetic data tests."""

import numpy as np
import pytest

from spanforest.datagen import (
    KINDS,
    GenSpec,
    gen_arc_scene,
    gen_covariate_mixture,
    gen_gaussian_components,
    gen_mixture,
    gen_rings,
)
from spanforest.errors import ParameterError
from spanforest.randkit import make_generator


def test_rings_radii(rng):
    """Test that noiseless points sit on their rings."""
    data, truth = gen_rings(10, (0.5, 2.0), 0.0, rng)
    assert data.n == 20
    assert truth.sizes.tolist() == [10, 10]
    radii = np.linalg.norm(data.values, axis=1)
    assert np.allclose(radii[truth.labels == 1], 0.5)
    assert np.allclose(radii[truth.labels == 2], 2.0)


def test_rings_errors(rng):
    """Test radius and size checks."""
    with pytest.raises(ParameterError):
        gen_rings(10, (), 0.1, rng)
    with pytest.raises(ParameterError):
        gen_rings(10, (1.0, -1.0), 0.1, rng)
    with pytest.raises(ParameterError):
        gen_rings(0, (1.0,), 0.1, rng)


def test_generators_are_deterministic():
    """Test that equal seeds give equal datasets."""
    a, _ = gen_mixture(30, 4.0, make_generator(51))
    b, _ = gen_mixture(30, 4.0, make_generator(51))
    assert np.array_equal(a.values, b.values)


def test_mixture_means():
    """Test the component means of a large Gaussian mixture."""
    data, truth = gen_mixture(4000, 5.0, make_generator(52))
    assert truth.k == 2
    for members in truth.clusters():
        centre = data.values[members].mean(axis=0)
        target = 0.0 if np.all(centre < 2.5) else 5.0
        assert np.allclose(centre, target, atol=0.1)


def test_mixture_heavy_tails():
    """Test Student t noise and kind checks."""
    data, _ = gen_mixture(500, 4.0, make_generator(53), kind="t", df=2)
    assert data.p == 2
    with pytest.raises(ParameterError):
        gen_mixture(10, 4.0, make_generator(53), kind="t")
    with pytest.raises(ParameterError):
        gen_mixture(10, 4.0, make_generator(53), kind="uniform")


def test_gaussian_components(rng):
    """Test dimensions of a three-component mixture."""
    data, truth = gen_gaussian_components(60, [[0, 0, 0], [5, 5, 5], [9, 0, 9]], rng)
    assert (data.n, data.p) == (60, 3)
    assert truth.k <= 3


def test_covariate_mixture(rng):
    """Test shapes of responses, covariates and truth."""
    data, covariates, truth = gen_covariate_mixture(5, rng)
    assert data.values.shape == (15, 2)
    assert covariates.shape == (15, 2)
    assert truth.labels.tolist() == [1] * 5 + [2] * 5 + [3] * 5

    tight, _, _ = gen_covariate_mixture(5, make_generator(8), spread=0.1)
    loose, _, _ = gen_covariate_mixture(5, make_generator(8), spread=0.2)
    centres = np.repeat([[0.0, 0.0], [3.0, 0.5], [1.5, 2.5]], 5, axis=0)
    assert np.allclose(loose.values - centres, 2 * (tight.values - centres))
    with pytest.raises(ParameterError):
        gen_covariate_mixture(5, rng, spread=0.0)


def test_arc_scene(rng):
    """Test the arc above two clouds."""
    data, truth = gen_arc_scene(20, 10, 0.0, rng)
    assert truth.sizes.tolist() == [20, 10, 10]
    arc = data.values[truth.labels == 1]
    assert np.allclose(np.linalg.norm(arc, axis=1), 3.0)
    assert np.all(arc[:, 1] >= 0)


@pytest.mark.parametrize("kind", KINDS)
def test_genspec_dispatch(kind):
    """Test that every kind generates n points with truth."""
    generated = GenSpec(kind, 24).generate(make_generator(54))
    assert generated.data.n == 24
    assert generated.truth.n == 24
    if kind == "covariate":
        assert generated.covariates.shape == (24, 2)
    else:
        assert generated.covariates is None


def test_genspec_params():
    """Test kind-specific parameters."""
    spec = GenSpec("rings", 40, {"radii": (1.0, 3.0), "noise_sd": 0.01})
    generated = spec.generate(make_generator(55))
    assert generated.truth.sizes.tolist() == [20, 20]


@pytest.mark.parametrize(
    "kind,n,params",
    [
        ("spiral", 10, {}),
        ("gauss_mix", 1, {}),
        ("rings", 10, {}),
        ("covariate", 10, {}),
        ("arc", 12, {"noise_sd": 0.0}),
    ],
)
def test_genspec_errors(kind, n, params):
    """Test unknown kinds, sizes and noise levels."""
    with pytest.raises(ParameterError):
        GenSpec(kind, n, params)
