# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Gibbs sampler for the spanning-forest model.

Each sweep draws the augmented tree given the continuous parameters with a
random-walk covering sampler, then updates the local scales, the root mixing
variables and the root scale from their conjugate full conditionals. The root
location stays at the data mean.

The chain starts from the minimum spanning tree hung from the hub. A few
parameter sweeps on that tree give every point a local scale matched to its
neighbours before the first walk; from the prior means alone, points away
from their nearest neighbour are reachable only through the hub and the first
walks run for millions of steps.
"""

import dataclasses
import json
import logging
from bisect import bisect_right
from concurrent.futures import ProcessPoolExecutor

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order
from scipy.special import logsumexp

from . import config as defaults
from .baselines import mst
from .core import HUB, AugmentedTree, ModelState
from .densities import build_S, covariate_adjust_S, log_joint
from .errors import InvalidTreeError, ParameterError, SamplerPathologyError, SchemaError
from .randkit import GigParams, make_generator, sample_gig, sample_inverse_gamma

logger = logging.getLogger(__name__)

#: Uniforms drawn per block by the covering walk.
WALK_BLOCK = 1024


class TreeCoverSampler(object):
    """Random-walk covering sampler for a fixed log-similarity matrix.

    The walk starts at the hub and moves from ``i`` to ``j`` with probability
    proportional to ``exp(S[i, j])``. The edge through which each node is
    first entered is kept; the resulting tree has probability proportional to
    the product of its edge weights.

    :param S: :class:`~spanforest.core.LogSimilarity`.
    :param max_steps: Step budget of a single draw.
    """

    def __init__(self, S, max_steps=defaults.MAX_WALK_STEPS):
        """Precompute the cumulative transition rows."""
        logits = np.array(S.values)
        np.fill_diagonal(logits, -np.inf)
        probs = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
        self.size = S.n + 1
        self.max_steps = int(max_steps)
        self.last_steps = 0
        self._rows = np.cumsum(probs, axis=1).tolist()
        # Fallback target when rounding leaves u above the row total.
        self._last = [self.size - 1] * self.size
        self._last[-1] = self.size - 2

    def draw(self, rng):
        """Return one tree and record the walk length in ``last_steps``."""
        rows, last, size = self._rows, self._last, self.size
        parent = [HUB] * size
        visited = [False] * size
        visited[HUB] = True
        remaining = size - 1
        node, steps = HUB, 0
        while remaining:
            budget = self.max_steps - steps
            if budget <= 0:
                raise SamplerPathologyError(
                    "covering walk exceeded {0} steps with {1} nodes "
                    "unvisited".format(self.max_steps, remaining)
                )
            for u in rng.random(min(WALK_BLOCK, budget)).tolist():
                target = bisect_right(rows[node], u)
                if target >= size:
                    target = last[node]
                steps += 1
                if not visited[target]:
                    visited[target] = True
                    parent[target] = node
                    remaining -= 1
                    if not remaining:
                        break
                node = target
        self.last_steps = steps
        logger.debug("Covering walk finished after %d steps", steps)
        return AugmentedTree._trusted(parent)


def sample_tree_cover(S, rng, max_steps=defaults.MAX_WALK_STEPS):
    """Draw a spanning tree with probability proportional to its edge weights."""
    return TreeCoverSampler(S, max_steps=max_steps).draw(rng)


def gibbs_sigma_tilde(i, tree, data, state, rng):
    """Draw the local scale of node ``i`` from its full conditional.

    The Gamma prior combines with the Gaussian leaf terms of the non-hub
    neighbours into a generalized inverse Gaussian; a node without such
    neighbours draws from the prior.
    """
    return sample_gig(
        _sigma_conditional(i, tree, data, state.sigma_tilde, state.alpha_sigma), rng
    )


def _sigma_conditional(i, tree, data, sigma_tilde, alpha_sigma):
    neighbors = tree.neighbors(i)
    degree = neighbors.size
    chi = 0.0
    if degree:
        chi = float(
            np.sum(data.sq_dists[i - 1, neighbors - 1] / sigma_tilde[neighbors - 1])
        )
        # Exact duplicates would leave chi = 0 with a non-positive order.
        chi = max(chi, 1e-12 * data.sigma2_hat)
    return GigParams(
        psi=2.0 / data.mu_sigma[i - 1],
        chi=chi,
        lam=alpha_sigma - 0.5 * data.p * degree,
    )


def gibbs_u_gamma(i, data, state, rng):
    """Draw the Cauchy mixing variable of root ``i``."""
    sq_dist = float(np.sum((data.row(i) - state.mu) ** 2))
    return sample_inverse_gamma(
        0.5 * (1 + data.p), 0.5 + sq_dist / (2 * state.gamma2), rng
    )


def gibbs_gamma2(tree, data, state, rng):
    """Draw the squared root scale given the roots and their mixing variables."""
    roots = tree.roots
    sq_dists = np.sum((data.values[roots - 1] - state.mu) ** 2, axis=1)
    shape = 2.0 + 0.5 * tree.k * data.p
    scale = data.sigma2_hat + float(np.sum(sq_dists / (2 * state.u_gamma[roots - 1])))
    return sample_inverse_gamma(shape, scale, rng)


def gibbs_sweep(tree, data, state, rng):
    """Update the continuous parameters once given ``tree``.

    Scales are refreshed in ascending node order, each seeing the scales
    already updated in this sweep; then the mixing variables of the roots
    (others reset to 1) and finally the root scale.
    """
    sigma = np.array(state.sigma_tilde)
    for i in range(1, data.n + 1):
        params = _sigma_conditional(i, tree, data, sigma, state.alpha_sigma)
        sigma[i - 1] = sample_gig(params, rng)
    state = state.replace(sigma_tilde=sigma)

    u_gamma = np.ones(data.n)
    for root in tree.roots.tolist():
        u_gamma[root - 1] = gibbs_u_gamma(root, data, state, rng)
    state = state.replace(u_gamma=u_gamma)

    return state.replace(gamma2=gibbs_gamma2(tree, data, state, rng))


def initial_tree(data):
    """Return the minimum spanning tree hung from the hub.

    The single root is the point closest to the data mean, where the root
    density peaks.
    """
    weighted = mst(data)
    rows = [i for i, _, _ in weighted.edges]
    cols = [j for _, j, _ in weighted.edges]
    graph = coo_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(data.n + 1, data.n + 1)
    )
    root = int(np.argmin(np.sum((data.values - data.mean) ** 2, axis=1))) + 1
    _, parent = breadth_first_order(graph, root, directed=False)
    parent[root] = HUB
    return AugmentedTree(parent)


def warm_start(data, cfg, rng):
    """Return the starting ``(tree, state)`` of a chain.

    Starts from the prior means of :meth:`ModelState.initial` and applies
    ``cfg.warmup`` parameter sweeps on :func:`initial_tree`.
    """
    tree = initial_tree(data)
    state = ModelState.initial(data, lambda_=cfg.lambda_, alpha_sigma=cfg.alpha_sigma)
    for _ in range(cfg.warmup):
        state = gibbs_sweep(tree, data, state, rng)
    return tree, state


@dataclasses.dataclass(frozen=True)
class ChainConfig(object):
    """Length, thinning, seed and fixed hyper-parameters of one chain.

    ``burn_in`` defaults to half the iterations. ``warmup`` parameter sweeps
    on the starting tree precede the first iteration and are not counted.
    """

    iterations: int
    seed: int
    burn_in: int = None
    thin: int = 1
    lambda_: float = defaults.LAMBDA
    alpha_sigma: float = defaults.ALPHA_SIGMA
    max_walk_steps: int = defaults.MAX_WALK_STEPS
    warmup: int = defaults.WARMUP_SWEEPS

    def __post_init__(self):
        """Validate the chain layout."""
        if self.iterations < 1:
            raise ParameterError("iterations must be at least 1")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.iterations // 2)
        if not 0 <= self.burn_in < self.iterations:
            raise ParameterError(
                "burn_in must satisfy 0 <= burn_in < iterations, got {0} and "
                "{1}".format(self.burn_in, self.iterations)
            )
        if self.thin < 1:
            raise ParameterError("thin must be at least 1")
        if self.warmup < 0:
            raise ParameterError("warmup must not be negative")
        if self.retained < 1:
            raise ParameterError("thinning leaves no retained samples")
        for name in ("lambda_", "alpha_sigma"):
            if not getattr(self, name) > 0:
                raise ParameterError("{0} must be positive".format(name))

    @classmethod
    def from_app_config(cls, config):
        """Build a chain configuration from an application config mapping."""
        return cls(
            iterations=int(config["ITERATIONS"]),
            seed=int(config["SEED"]),
            burn_in=config.get("BURN_IN"),
            thin=int(config.get("THIN", 1)),
            lambda_=float(config.get("LAMBDA", defaults.LAMBDA)),
            alpha_sigma=float(config.get("ALPHA_SIGMA", defaults.ALPHA_SIGMA)),
            max_walk_steps=int(config.get("MAX_WALK_STEPS", defaults.MAX_WALK_STEPS)),
            warmup=int(config.get("WARMUP_SWEEPS", defaults.WARMUP_SWEEPS)),
        )

    @property
    def retained(self):
        """Number of samples the chain keeps."""
        return (self.iterations - self.burn_in) // self.thin


@dataclasses.dataclass(frozen=True, eq=False)
class McmcSample(object):
    """One retained state of a chain."""

    tree: AugmentedTree
    sigma_tilde: np.ndarray
    gamma2: float
    iteration: int
    log_joint: float = float("nan")
    chain: int = 1

    @property
    def k(self):
        """Number of clusters of the sampled tree."""
        return self.tree.k

    def to_dict(self):
        """Return a JSON-serializable mapping."""
        return {
            "chain": int(self.chain),
            "iteration": int(self.iteration),
            "k": self.k,
            "gamma2": float(self.gamma2),
            "log_joint": float(self.log_joint),
            "parent": self.tree.parent.tolist(),
            "sigma_tilde": np.asarray(self.sigma_tilde, dtype=float).tolist(),
        }

    @classmethod
    def from_dict(cls, record):
        """Rebuild a sample from :meth:`to_dict` output, validating the tree."""
        tree = AugmentedTree(record["parent"])
        sigma = np.asarray(record["sigma_tilde"], dtype=float)
        if sigma.shape != (tree.n,) or np.any(sigma <= 0):
            raise ValueError("sigma_tilde must hold n positive scales")
        if "k" in record and int(record["k"]) != tree.k:
            raise ValueError("k does not match the tree")
        return cls(
            tree=tree,
            sigma_tilde=sigma,
            gamma2=float(record["gamma2"]),
            iteration=int(record["iteration"]),
            log_joint=float(record.get("log_joint", float("nan"))),
            chain=int(record.get("chain", 1)),
        )


def run_chain(data, cfg, covariates=None, rng=None, callback=None, chain=1):
    """Run the Gibbs sampler and return the retained samples.

    :param data: :class:`~spanforest.core.Dataset`.
    :param cfg: :class:`ChainConfig`.
    :param covariates: Optional
        :class:`~spanforest.densities.CovariatePriorConfig` whose similarity
        is added to every log-similarity matrix.
    :param rng: Generator; a fresh one seeded with ``cfg.seed`` by default.
    :param callback: Called as ``callback(iteration, tree, state)`` after
        every sweep.
    :param chain: Chain number recorded in the samples.
    :return: List of :class:`McmcSample`, in iteration order.
    """
    if covariates is not None and covariates.n != data.n:
        raise ParameterError("covariates and data have different row counts")
    if rng is None:
        rng = make_generator(cfg.seed)
    logger.info(
        "Starting chain %d: n=%d p=%d iterations=%d burn_in=%d seed=%d",
        chain,
        data.n,
        data.p,
        cfg.iterations,
        cfg.burn_in,
        cfg.seed,
    )

    def similarity(state):
        S = build_S(data, state)
        if covariates is not None:
            S = covariate_adjust_S(S, covariates)
        return S

    _, state = warm_start(data, cfg, rng)
    logger.debug("Warm start: %d sweeps on the minimum spanning tree", cfg.warmup)
    report_every = max(cfg.iterations // 10, 1)
    samples = []
    for iteration in range(1, cfg.iterations + 1):
        sampler = TreeCoverSampler(similarity(state), max_steps=cfg.max_walk_steps)
        tree = sampler.draw(rng)
        state = gibbs_sweep(tree, data, state, rng)

        if iteration % report_every == 0:
            logger.debug(
                "Iteration %d/%d: K=%d gamma2=%.4g walk=%d",
                iteration,
                cfg.iterations,
                tree.k,
                state.gamma2,
                sampler.last_steps,
            )
        if iteration > cfg.burn_in and (iteration - cfg.burn_in) % cfg.thin == 0:
            samples.append(
                McmcSample(
                    tree=tree,
                    sigma_tilde=state.sigma_tilde,
                    gamma2=state.gamma2,
                    iteration=iteration,
                    log_joint=log_joint(tree, data, state, S=similarity(state)),
                    chain=chain,
                )
            )
        if callback is not None:
            callback(iteration, tree, state)
    logger.info("Chain %d finished with %d retained samples", chain, len(samples))
    return samples


def _run_chain_task(task):
    data, cfg, covariates, rng, chain = task
    return run_chain(data, cfg, covariates=covariates, rng=rng, chain=chain)


def run_chains(data, cfg, rngs, covariates=None, threads=1):
    """Run one chain per generator and pool the samples in chain order.

    Each chain owns its generator, so the pooled samples do not depend on
    ``threads``.

    :param rngs: One :class:`numpy.random.Generator` per chain, see
        :func:`~spanforest.randkit.spawn_generators`.
    :param threads: Worker processes; ``1`` runs in-process.
    """
    tasks = [
        (data, cfg, covariates, rng, chain) for chain, rng in enumerate(rngs, start=1)
    ]
    if not tasks:
        raise ParameterError("at least one chain is needed")
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_chain_task, tasks))
    else:
        results = [_run_chain_task(task) for task in tasks]
    return [sample for samples in results for sample in samples]


def write_samples(path, samples):
    """Write samples as JSON lines, one sample per line."""
    with open(path, "w") as fp:
        for sample in samples:
            fp.write(json.dumps(sample.to_dict(), sort_keys=True))
            fp.write("\n")


def read_samples(path):
    """Read samples written by :func:`write_samples`.

    :raises SchemaError: With the offending line number on malformed,
        truncated or inconsistent records.
    """
    samples = []
    n = None
    with open(path) as fp:
        for lineno, line in enumerate(fp, start=1):
            if not line.strip():
                continue
            if not line.endswith("\n"):
                raise SchemaError("truncated record", path, lineno)
            try:
                sample = McmcSample.from_dict(json.loads(line))
            except InvalidTreeError as exc:
                raise SchemaError("invalid tree: {0}".format(exc), path, lineno)
            except (KeyError, TypeError, ValueError) as exc:
                raise SchemaError("malformed record: {0}".format(exc), path, lineno)
            if n is not None and sample.tree.n != n:
                raise SchemaError("inconsistent node count", path, lineno)
            n = sample.tree.n
            samples.append(sample)
    if not samples:
        raise SchemaError("no samples found", path)
    return samples
