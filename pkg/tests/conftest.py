# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.


"""Pytest configuration."""

import shutil
import tempfile

import numpy as np
import pytest

from spanforest.core import Dataset, LogSimilarity, ModelState
from spanforest.densities import build_S
from spanforest.randkit import make_generator


def pytest_addoption(parser):
    """Add the ``--runslow`` option."""
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run slow tests"
    )


def pytest_configure(config):
    """Register the ``slow`` marker."""
    config.addinivalue_line("markers", "slow: long statistical experiment")


def pytest_collection_modifyitems(config, items):
    """Skip slow tests unless ``--runslow`` is given."""
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture()
def rng():
    """Return a generator with a fixed seed."""
    return make_generator(12345)


@pytest.fixture()
def tmppath():
    """Yield a temporary directory removed after the test."""
    path = tempfile.mkdtemp()
    yield path
    shutil.rmtree(path)


@pytest.fixture()
def small_data():
    """Return two well separated pairs plus a lone point in the plane."""
    return Dataset([[0.0, 0.0], [0.3, 0.1], [5.0, 5.0], [5.2, 4.9], [10.0, 0.0]])


@pytest.fixture()
def small_state(small_data):
    """Return the initial model state of ``small_data``."""
    return ModelState.initial(small_data)


@pytest.fixture()
def small_S(small_data, small_state):
    """Return the log-similarity matrix of ``small_data`` at its initial state."""
    return build_S(small_data, small_state)


@pytest.fixture()
def random_S():
    """Return a random log-similarity matrix over the hub and four nodes."""
    generator = make_generator(99)
    values = generator.normal(scale=1.5, size=(5, 5))
    values = values + values.T
    np.fill_diagonal(values, 0.0)
    return LogSimilarity(values)
