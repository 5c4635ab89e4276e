# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""SpanForest default configuration.

Every value can be overridden from an instance-folder ``spanforest.cfg``, a
previous run's ``run_config.json``, ``SPANFOREST_*`` environment variables or
command-line flags, see :mod:`spanforest.loaders`.
"""

#: Root seed of all random streams. ``None`` draws one from OS entropy.
SEED = None

#: Number of Gibbs sweeps.
ITERATIONS = 1000

#: Sweeps discarded before samples are kept. ``None`` discards the first half.
BURN_IN = None

#: Keep every ``THIN``-th post burn-in sweep.
THIN = 1

#: Geometric tree-prior weight of each additional cluster.
LAMBDA = 0.5

#: Shape of the Gamma prior on the local scales.
ALPHA_SIGMA = 0.5

#: Number of K-means++ restarts in spectral clustering.
KMEANS_RESTARTS = 20

#: Iteration cap of a single K-means run.
KMEANS_MAX_ITER = 100

#: K-means convergence tolerance.
KMEANS_TOL = 1e-9

#: Covariance inflation of the covariate-dependent tree prior.
COVARIATE_ETA = 1.0

#: Sample sizes of the eigenvector convergence experiment.
EIGENCHECK_N_GRID = [10, 25, 50, 100, 200]

#: Replicates per sample size in the eigenvector convergence experiment.
EIGENCHECK_REPLICATES = 30

#: Number of leading eigenvectors compared.
EIGENCHECK_K = 5

#: Gibbs sweeps per eigenvector convergence replicate.
EIGENCHECK_ITERATIONS = 200

#: Independent chains pooled by ``fit``.
CHAINS = 1

#: Parameter sweeps on the minimum spanning tree before the first tree draw.
WARMUP_SWEEPS = 5

#: Worker processes for independent chains and replicates. Results do not
#: depend on it.
THREADS = 1

#: Level of the ``spanforest`` logger.
LOGLEVEL = "WARNING"

#: Step budget of one random-walk tree draw.
MAX_WALK_STEPS = 10**9

#: Largest node count (hub included) accepted by brute-force tree enumeration.
MAX_ENUMERATION_NODES = 8
