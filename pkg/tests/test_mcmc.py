# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Gibbs sampler tests."""

import json
import logging
import os
import time
from collections import Counter

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import logsumexp

from spanforest.baselines import mst
from spanforest.core import HUB, Dataset, LogSimilarity, ModelState, validate_tree
from spanforest.datagen import gen_mixture
from spanforest.densities import CovariatePriorConfig, build_S
from spanforest.errors import ParameterError, SamplerPathologyError, SchemaError
from spanforest.matrixtree import edge_marginals, enumerate_trees
from spanforest.mcmc import (
    ChainConfig,
    McmcSample,
    TreeCoverSampler,
    gibbs_gamma2,
    gibbs_sigma_tilde,
    gibbs_sweep,
    gibbs_u_gamma,
    initial_tree,
    read_samples,
    run_chain,
    run_chains,
    sample_tree_cover,
    warm_start,
    write_samples,
)
from spanforest.randkit import make_generator, sample_inverse_gamma

#: Fixed asymmetric weights over the hub and three nodes.
ASYMMETRIC_S = LogSimilarity(
    [
        [0.0, 0.2, -1.0, 0.7],
        [0.2, 0.0, 1.1, -0.4],
        [-1.0, 1.1, 0.0, 0.3],
        [0.7, -0.4, 0.3, 0.0],
    ]
)

#: Sample record whose data nodes form a two-cycle.
CYCLIC_RECORD = json.dumps(
    {"gamma2": 1.0, "iteration": 1, "parent": [-1, 2, 1], "sigma_tilde": [1.0, 1.0]}
)


def tree_law_pvalue(S, draws, seed):
    """Return the chi-square p-value of cover-walk trees against enumeration."""
    trees = enumerate_trees(S)
    log_weights = np.array([weight for _, weight in trees])
    probs = np.exp(log_weights - logsumexp(log_weights))
    sampler = TreeCoverSampler(S)
    rng = make_generator(seed)
    counts = Counter(sampler.draw(rng).key() for _ in range(draws))
    observed = [counts.get(tree.key(), 0) for tree, _ in trees]
    assert sum(observed) == draws
    return stats.chisquare(observed, draws * probs).pvalue


def test_cover_single_node(rng):
    """Test that one data node always hangs off the hub."""
    tree = sample_tree_cover(LogSimilarity([[0.0, -3.0], [-3.0, 0.0]]), rng)
    assert tree.parent.tolist() == [-1, 0]


def test_cover_uniform_triangle():
    """Test that equal weights give each of the three trees a third."""
    S = LogSimilarity(np.full((3, 3), 0.4) - 0.4 * np.eye(3))
    assert tree_law_pvalue(S, 30000, 1) > 0.01


def test_cover_asymmetric_k4():
    """Test the sixteen-tree law on fixed asymmetric weights."""
    assert tree_law_pvalue(ASYMMETRIC_S, 20000, 2) > 0.01


@pytest.mark.slow
def test_cover_asymmetric_k4_full():
    """Test the sixteen-tree law at full sample size."""
    assert tree_law_pvalue(ASYMMETRIC_S, 10**5, 3) > 0.01


def test_cover_edge_frequencies(random_S):
    """Test empirical edge frequencies against the closed-form marginals."""
    draws = 20000
    sampler = TreeCoverSampler(random_S)
    rng = make_generator(4)
    counts = np.zeros((5, 5))
    for _ in range(draws):
        counts += sampler.draw(rng).adjacency()
    freq = counts / draws
    M = edge_marginals(random_S).M
    se = np.sqrt(M * (1 - M) / draws)
    assert np.all(np.abs(freq - M) <= 4 * se + 1e-12)


def test_cover_step_budget(random_S, rng):
    """Test the pathology signal and the walk-length counter."""
    with pytest.raises(SamplerPathologyError):
        sample_tree_cover(random_S, rng, max_steps=3)
    sampler = TreeCoverSampler(random_S)
    tree = sampler.draw(rng)
    assert tree.n == 4
    assert sampler.last_steps >= 4


def test_cover_extreme_weights(rng):
    """Test that huge log weights do not overflow the transition rows."""
    values = np.full((4, 4), 900.0)
    values[0, 3] = values[3, 0] = -900.0
    np.fill_diagonal(values, 0.0)
    tree = sample_tree_cover(LogSimilarity(values), rng)
    assert validate_tree(tree.parent) == tree


def sigma_data():
    """Return data and tree where node 1 has one neighbour at distance 2."""
    data = Dataset([0.0, 2.0, 1.0])
    return data, validate_tree([-1, 0, 1, 0])


def test_sigma_tilde_prior_branch():
    """Test that a node without data neighbours draws from its Gamma prior."""
    data = Dataset([0.0, 2.0, 5.0])
    tree = validate_tree([-1, 0, 0, 0])
    state = ModelState.initial(data, alpha_sigma=0.5)
    rng = make_generator(5)
    draws = np.array(
        [gibbs_sigma_tilde(1, tree, data, state, rng) for _ in range(4000)]
    )
    _, pvalue = stats.kstest(draws, stats.gamma(a=0.5, scale=data.mu_sigma[0]).cdf)
    assert pvalue > 0.01
    assert draws.mean() == pytest.approx(0.5 * data.mu_sigma[0], rel=0.1)


def test_sigma_tilde_conditional_density():
    """Test draws against the numerically normalized prior times likelihood."""
    data, tree = sigma_data()
    assert data.mu_sigma[0] == 1.0
    state = ModelState(
        sigma_tilde=[0.5, 1.0, 0.5], gamma2=1.0, mu=data.mean, u_gamma=[1.0] * 3
    )

    def density(x):
        prior = stats.gamma.pdf(x, a=0.5, scale=1.0)
        return prior * stats.norm.pdf(0.0, loc=2.0, scale=np.sqrt(x * 1.0))

    norm = integrate.quad(density, 0, np.inf, epsabs=1e-13)[0]

    def cdf(values):
        return np.array(
            [integrate.quad(density, 0, v, epsabs=1e-13)[0] / norm for v in values]
        )

    rng = make_generator(6)
    draws = np.array(
        [gibbs_sigma_tilde(1, tree, data, state, rng) for _ in range(2000)]
    )
    _, pvalue = stats.kstest(draws, cdf)
    assert pvalue > 0.01

    mean = integrate.quad(lambda x: x * density(x), 0, np.inf)[0] / norm
    var = integrate.quad(lambda x: x**2 * density(x), 0, np.inf)[0] / norm - mean**2
    assert abs(draws.mean() - mean) < 4 * np.sqrt(var / draws.size)


def test_sigma_tilde_two_neighbours():
    """Test a middle node of a chain against its conditional density."""
    data = Dataset([[0.0, 0.0], [1.0, 0.5], [2.5, 0.0]])
    tree = validate_tree([-1, 0, 1, 2])
    state = ModelState(
        sigma_tilde=[0.8, 0.3, 1.4], gamma2=2.0, mu=data.mean, u_gamma=[1.0] * 3
    )
    mu_sigma = data.mu_sigma[1]

    def density(x):
        prior = stats.gamma.pdf(x, a=0.5, scale=mu_sigma)
        like = 1.0
        for j, sigma_j in ((0, 0.8), (2, 1.4)):
            like *= np.prod(
                stats.norm.pdf(data.values[1], data.values[j], np.sqrt(x * sigma_j))
            )
        return prior * like

    norm = integrate.quad(density, 0, np.inf, epsabs=1e-14)[0]
    mean = integrate.quad(lambda x: x * density(x), 0, np.inf)[0] / norm
    var = integrate.quad(lambda x: x**2 * density(x), 0, np.inf)[0] / norm - mean**2
    rng = make_generator(7)
    draws = np.array(
        [gibbs_sigma_tilde(2, tree, data, state, rng) for _ in range(3000)]
    )
    assert abs(draws.mean() - mean) < 4 * np.sqrt(var / draws.size)


def test_u_gamma_zero_distance():
    """Test that a root at mu draws Inverse-Gamma((1 + p) / 2, 1 / 2)."""
    data = Dataset([[0.0, 0.0], [1.0, 2.0]])
    state = ModelState(
        sigma_tilde=[1.0, 1.0], gamma2=3.0, mu=[1.0, 2.0], u_gamma=[1.0, 1.0]
    )
    rng = make_generator(8)
    draws = [gibbs_u_gamma(2, data, state, rng) for _ in range(3000)]
    _, pvalue = stats.kstest(draws, stats.invgamma(a=1.5, scale=0.5).cdf)
    assert pvalue > 0.01


def test_u_gamma_exponential_reciprocal():
    """Test that 1 / u is Exponential(1) at unit distance and scale."""
    data = Dataset([[0.0], [1.0], [3.0]])
    state = ModelState(
        sigma_tilde=[1.0, 1.0, 1.0], gamma2=1.0, mu=[0.0], u_gamma=[1.0] * 3
    )
    rng = make_generator(9)
    draws = np.array([gibbs_u_gamma(2, data, state, rng) for _ in range(3000)])
    _, pvalue = stats.kstest(1.0 / draws, stats.expon.cdf)
    assert pvalue > 0.01


def test_u_gamma_mixture_recovers_cauchy():
    """Test that the Gaussian scale mixture integrates to the Cauchy root."""
    rng = make_generator(10)
    u = sample_inverse_gamma(0.5, 0.5, rng, size=5000)
    y = 1.0 + np.sqrt(4.0 * u) * rng.standard_normal(5000)
    _, pvalue = stats.kstest(y, stats.cauchy(loc=1.0, scale=2.0).cdf)
    assert pvalue > 0.01


def test_gamma2_conditional():
    """Test one root at squared distance 2: Inverse-Gamma(2.5, 2)."""
    data = Dataset([-1.0, 1.0])
    assert data.sigma2_hat == 1.0
    tree = validate_tree([-1, 2, 0])
    state = ModelState(
        sigma_tilde=[1.0, 1.0],
        gamma2=1.0,
        mu=[1.0 - np.sqrt(2.0)],
        u_gamma=[1.0, 1.0],
    )
    rng = make_generator(11)
    draws = np.array([gibbs_gamma2(tree, data, state, rng) for _ in range(4000)])
    _, pvalue = stats.kstest(draws, stats.invgamma(a=2.5, scale=2.0).cdf)
    assert pvalue > 0.01


def test_gamma2_prior_limit():
    """Test a single root at mu: Inverse-Gamma(2 + p / 2, sigma2_hat)."""
    data = Dataset([[0.0, 1.0], [2.0, 3.0], [4.0, -1.0]])
    tree = validate_tree([-1, 0, 1, 2])
    state = ModelState.initial(data).replace(mu=data.values[0])
    rng = make_generator(12)
    draws = np.array([gibbs_gamma2(tree, data, state, rng) for _ in range(3000)])
    dist = stats.invgamma(a=3.0, scale=data.sigma2_hat)
    _, pvalue = stats.kstest(draws, dist.cdf)
    assert pvalue > 0.01


def test_gibbs_sweep(small_data, small_state, rng):
    """Test that a sweep updates every parameter and resets non-roots."""
    tree = validate_tree([-1, 0, 1, 0, 3, 0])
    state = gibbs_sweep(tree, small_data, small_state, rng)
    assert state is not small_state
    assert state.sigma_tilde.shape == (5,)
    assert np.all(state.sigma_tilde > 0)
    assert not np.array_equal(state.sigma_tilde, small_state.sigma_tilde)
    assert state.u_gamma[1] == state.u_gamma[3] == 1.0
    assert state.gamma2 != small_state.gamma2
    assert np.array_equal(state.mu, small_data.mean)


def test_chain_config():
    """Test defaults, validation and the app-config constructor."""
    cfg = ChainConfig(iterations=10, seed=1)
    assert cfg.burn_in == 5
    assert cfg.retained == 5
    assert (cfg.lambda_, cfg.alpha_sigma) == (0.5, 0.5)
    assert ChainConfig(iterations=10, seed=1, burn_in=0, thin=3).retained == 3

    for kwargs in (
        dict(iterations=0),
        dict(iterations=10, burn_in=10),
        dict(iterations=10, thin=0),
        dict(iterations=10, burn_in=8, thin=5),
        dict(iterations=10, lambda_=0.0),
    ):
        with pytest.raises(ParameterError):
            ChainConfig(seed=1, **kwargs)

    cfg = ChainConfig.from_app_config(
        {"ITERATIONS": 20, "SEED": 3, "BURN_IN": None, "THIN": 2, "LAMBDA": 0.25}
    )
    assert (cfg.iterations, cfg.seed, cfg.burn_in, cfg.thin) == (20, 3, 10, 2)
    assert cfg.lambda_ == 0.25


@pytest.fixture()
def mixture():
    """Return two-component Gaussian data with twenty points."""
    data, _ = gen_mixture(20, 6.0, make_generator(13))
    return data


def test_run_chain_smoke(mixture):
    """Test structural postconditions of a short chain."""
    calls = []
    samples = run_chain(
        mixture,
        ChainConfig(iterations=60, seed=14, thin=2),
        callback=lambda iteration, tree, state: calls.append(iteration),
    )
    assert calls == list(range(1, 61))
    assert [s.iteration for s in samples] == list(range(32, 61, 2))
    for sample in samples:
        assert validate_tree(sample.tree.parent) == sample.tree
        assert np.all(sample.sigma_tilde > 0)
        assert sample.gamma2 > 0
        assert np.isfinite(sample.log_joint)
        assert 1 <= sample.k <= 20


def test_run_chain_reproducible(mixture):
    """Test that equal seeds give equal sample lists."""
    cfg = ChainConfig(iterations=20, seed=15)
    first = [s.to_dict() for s in run_chain(mixture, cfg)]
    second = [s.to_dict() for s in run_chain(mixture, cfg)]
    assert first == second


def test_run_chain_covariates(mixture, rng):
    """Test a chain with a covariate-dependent prior."""
    covariates = CovariatePriorConfig.from_covariates(rng.normal(size=(20, 2)))
    samples = run_chain(mixture, ChainConfig(iterations=10, seed=16), covariates)
    assert len(samples) == 5
    short = CovariatePriorConfig.from_covariates(rng.normal(size=(5, 2)))
    with pytest.raises(ParameterError):
        run_chain(mixture, ChainConfig(iterations=10, seed=16), short)


def test_run_chain_logs(mixture, caplog):
    """Test start, progress and end records."""
    caplog.set_level(logging.DEBUG, logger="spanforest")
    run_chain(mixture, ChainConfig(iterations=10, seed=17))
    messages = [record.getMessage() for record in caplog.records]
    assert any(m.startswith("Starting chain 1: n=20 p=2") for m in messages)
    assert "Warm start: 5 sweeps on the minimum spanning tree" in messages
    assert any(m.startswith("Iteration 10/10") for m in messages)
    assert messages[-1] == "Chain 1 finished with 5 retained samples"


def test_samples_jsonl(mixture, tmppath):
    """Test the JSON-lines format."""
    path = os.path.join(tmppath, "samples.jsonl")
    samples = run_chain(mixture, ChainConfig(iterations=8, seed=18))
    write_samples(path, samples)
    with open(path) as fp:
        records = [json.loads(line) for line in fp]
    assert sorted(records[0]) == [
        "chain",
        "gamma2",
        "iteration",
        "k",
        "log_joint",
        "parent",
        "sigma_tilde",
    ]
    restored = read_samples(path)
    assert [s.to_dict() for s in restored] == [s.to_dict() for s in samples]


def write_lines(path, lines, newline=True):
    """Write ``lines`` to ``path``."""
    with open(path, "w") as fp:
        fp.write("\n".join(lines))
        if newline:
            fp.write("\n")


def sample_line(parent=(-1, 0, 1), sigma=(1.0, 1.0)):
    """Return one serialized sample."""
    sample = McmcSample(
        tree=validate_tree(list(parent)),
        sigma_tilde=np.array(sigma),
        gamma2=1.0,
        iteration=1,
    )
    return json.dumps(sample.to_dict())


@pytest.mark.parametrize(
    "lines,newline,line",
    [
        ([sample_line(), sample_line()[:20]], False, 2),
        ([sample_line(), "{}"], True, 2),
        (["not json"], True, 1),
        ([CYCLIC_RECORD], True, 1),
        ([sample_line(), sample_line((-1, 0, 1, 2), (1.0, 1.0, 1.0))], True, 2),
        ([sample_line(sigma=(1.0, 1.0, 1.0))], True, 1),
        ([], True, None),
    ],
)
def test_read_samples_errors(tmppath, lines, newline, line):
    """Test that malformed sample files report the offending line."""
    path = os.path.join(tmppath, "samples.jsonl")
    write_lines(path, lines, newline)
    with pytest.raises(SchemaError) as excinfo:
        read_samples(path)
    assert excinfo.value.line == line
    assert excinfo.value.path == path


def test_sample_from_dict_checks_k():
    """Test that a stored cluster count must match the tree."""
    record = json.loads(sample_line())
    record["k"] = 2
    with pytest.raises(ValueError):
        McmcSample.from_dict(record)


def test_sample_chain_field():
    """Test that the chain number is stored and defaults to one."""
    record = json.loads(sample_line())
    del record["chain"]
    assert McmcSample.from_dict(record).chain == 1
    record["chain"] = 3
    sample = McmcSample.from_dict(record)
    assert sample.chain == 3
    assert sample.to_dict()["chain"] == 3


def test_initial_tree(mixture):
    """Test that the start is the minimum spanning tree under one root."""
    tree = initial_tree(mixture)
    assert tree.k == 1
    root = int(np.argmin(np.sum((mixture.values - mixture.mean) ** 2, axis=1))) + 1
    assert tree.roots.tolist() == [root]
    expected = {(i, j) for i, j, _ in mst(mixture).edges} | {(HUB, root)}
    assert tree.edge_key() == frozenset(expected)


def test_warm_start(mixture):
    """Test the parameter sweeps that precede the first tree draw."""
    cold = ModelState.initial(mixture, lambda_=0.5, alpha_sigma=0.5)
    tree, state = warm_start(
        mixture, ChainConfig(iterations=4, seed=1, warmup=0), make_generator(2)
    )
    assert tree == initial_tree(mixture)
    assert np.array_equal(state.sigma_tilde, cold.sigma_tilde)
    assert state.gamma2 == cold.gamma2

    cfg = ChainConfig(iterations=4, seed=1, warmup=3)
    _, first = warm_start(mixture, cfg, make_generator(2))
    _, second = warm_start(mixture, cfg, make_generator(2))
    assert np.array_equal(first.sigma_tilde, second.sigma_tilde)
    assert not np.array_equal(first.sigma_tilde, cold.sigma_tilde)
    assert np.all(first.sigma_tilde > 0)

    with pytest.raises(ParameterError):
        ChainConfig(iterations=4, seed=1, warmup=-1)
    cfg = ChainConfig.from_app_config({"ITERATIONS": 4, "SEED": 1, "WARMUP_SWEEPS": 2})
    assert cfg.warmup == 2


def test_run_chains(mixture):
    """Test pooling of independent chains in and out of worker processes."""
    cfg = ChainConfig(iterations=6, seed=19)
    serial = run_chains(mixture, cfg, [make_generator(1), make_generator(2)])
    assert [s.chain for s in serial] == [1, 1, 1, 2, 2, 2]
    assert [s.iteration for s in serial] == [4, 5, 6] * 2
    alone = run_chain(mixture, cfg, rng=make_generator(2), chain=2)
    assert [s.to_dict() for s in serial[3:]] == [s.to_dict() for s in alone]

    pooled = run_chains(mixture, cfg, [make_generator(1), make_generator(2)], threads=2)
    assert [s.to_dict() for s in pooled] == [s.to_dict() for s in serial]
    with pytest.raises(ParameterError):
        run_chains(mixture, cfg, [])


@pytest.mark.slow
def test_warm_start_shortens_first_walk():
    """Test that the first covering walk after the warm start is short."""
    data, _ = gen_mixture(500, 4.0, make_generator(31))
    cfg = ChainConfig(iterations=2, seed=31)
    rng = make_generator(32)

    started = time.monotonic()
    _, state = warm_start(data, cfg, rng)
    warm = TreeCoverSampler(build_S(data, state), max_steps=2 * 10**6)
    warm.draw(rng)
    assert time.monotonic() - started < 120.0

    initial = ModelState.initial(data, lambda_=cfg.lambda_, alpha_sigma=cfg.alpha_sigma)
    cold = TreeCoverSampler(build_S(data, initial), max_steps=20 * warm.last_steps)
    try:
        cold.draw(rng)
        cold_steps = cold.last_steps
    except SamplerPathologyError:
        cold_steps = cold.max_steps
    assert warm.last_steps < cold_steps
