# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Bayesian spanning-forest clustering.

SpanForest clusters data with a random spanning forest: every cluster is a
tree in which each point is generated from its neighbour, and the roots of the
trees hang off an auxiliary hub node ``0``. The package provides the Gibbs
sampler for this model, closed-form matrix-tree analytics, posterior
summaries based on normalized spectral clustering and an MST-cut baseline.

Trees
-----
An augmented tree is stored as a parent array over the nodes ``0..n``;
element 0 belongs to the hub and is ignored. Deleting the hub leaves one tree
per cluster:

>>> from spanforest import partition_from_tree, validate_tree
>>> tree = validate_tree([-1, 0, 1, 0, 3])
>>> tree.k
2
>>> partition_from_tree(tree).labels.tolist()
[1, 1, 2, 2]

Fitting
-------
The sampler alternates a tree draw with updates of the continuous
parameters:

>>> from spanforest import ChainConfig, make_generator, run_chain, summarize
>>> from spanforest.datagen import gen_mixture
>>> data, truth = gen_mixture(30, 8.0, make_generator(1))
>>> samples = run_chain(data, ChainConfig(iterations=20, seed=1))
>>> len(samples)
10
>>> summary = summarize(samples, make_generator(2))
>>> summary.psm.shape
(30, 30)

Configuration
-------------
Runs started from the command line are configured through
:func:`spanforest.loaders.create_app`, which layers the defaults of
:mod:`spanforest.config`, an instance-folder ``spanforest.cfg``, a replayed
``run_config.json``, ``SPANFOREST_*`` environment variables and command-line
flags.
"""

from .core import (
    AugmentedTree,
    Dataset,
    LogSimilarity,
    ModelState,
    Partition,
    partition_from_tree,
    validate_tree,
)
from .densities import build_S
from .errors import SpanForestError
from .matrixtree import count_weighted_trees_log, edge_marginals
from .mcmc import (
    ChainConfig,
    McmcSample,
    run_chain,
    run_chains,
    sample_tree_cover,
    warm_start,
)
from .posterior import hungarian_accuracy, summarize
from .randkit import make_generator

__version__ = "0.1.0"

__all__ = (
    "__version__",
    "AugmentedTree",
    "ChainConfig",
    "Dataset",
    "LogSimilarity",
    "McmcSample",
    "ModelState",
    "Partition",
    "SpanForestError",
    "build_S",
    "count_weighted_trees_log",
    "edge_marginals",
    "hungarian_accuracy",
    "make_generator",
    "partition_from_tree",
    "run_chain",
    "run_chains",
    "sample_tree_cover",
    "summarize",
    "warm_start",
)
