# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Command-line interface.

Every command writes plot-ready CSV/JSON artifacts into ``--out`` together
with a ``run_config.json`` from which the run can be replayed through
``spanforest --from-config run_config.json <command>``.
"""

import csv
import dataclasses
import functools
import json
import os

import click
import numpy as np

from . import __version__
from . import config as defaults
from .baselines import mst, mst_cut, mst_cut_fraction
from .core import Dataset
from .datagen import RING_RADII, GenSpec
from .densities import CovariatePriorConfig
from .errors import DataError, ParameterError, SchemaError, SpanForestError
from .loaders import create_app
from .matrixtree import eigencheck_experiment
from .mcmc import ChainConfig, read_samples, run_chains, write_samples
from .posterior import autocorrelation, plugin_point_estimate, summarize, trace_table
from .randkit import make_generator, spawn_generators

#: Configuration keys recorded in ``run_config.json``.
CONFIG_KEYS = tuple(sorted(key for key in dir(defaults) if key.isupper()))

#: Default sizes of generated datasets.
GENERATE_SIZES = {
    "rings": 300,
    "gauss_mix": 400,
    "t_mix": 200,
    "arc": 200,
    "covariate": 150,
}

#: Largest lag written to ``autocorr.json``.
MAX_LAG = 50


@dataclasses.dataclass
class RunConfig(object):
    """Everything needed to replay one command."""

    command: str
    config: dict
    options: dict = dataclasses.field(default_factory=dict)

    @classmethod
    def from_app_config(cls, config, command, options):
        """Capture the configuration keys and command options of a run."""
        return cls(
            command=command,
            config={key: config[key] for key in CONFIG_KEYS if key in config},
            options={key: value for key, value in options.items()},
        )

    def to_json(self):
        """Serialize to a JSON document."""
        return json.dumps(
            {
                "command": self.command,
                "config": self.config,
                "options": self.options,
                "version": __version__,
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text, path=None):
        """Deserialize a document written by :meth:`to_json`."""
        try:
            document = json.loads(text)
            return cls(
                command=document["command"],
                config=dict(document["config"]),
                options=dict(document.get("options", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("not a run configuration: {0}".format(exc), path)

    @property
    def out(self):
        """Output directory."""
        return self.options.get("out") or "."

    def path(self, name):
        """Return the path of artifact ``name`` inside the output directory."""
        return os.path.join(self.out, name)

    def write(self):
        """Write ``run_config.json`` into the output directory."""
        with open(self.path("run_config.json"), "w") as fp:
            fp.write(self.to_json())
            fp.write("\n")


def _reporting(func):
    """Turn domain and I/O errors into a diagnostic and exit status 1."""

    @functools.wraps(func)
    def wrapper(run, *args, **kwargs):
        try:
            os.makedirs(run.out, exist_ok=True)
            func(run, *args, **kwargs)
        except (SpanForestError, OSError) as exc:
            click.echo("Error: {0}".format(exc), err=True)
            return 1
        return 0

    return wrapper


def _kmeans_options(config):
    return {
        "restarts": int(config["KMEANS_RESTARTS"]),
        "max_iter": int(config["KMEANS_MAX_ITER"]),
        "tol": float(config["KMEANS_TOL"]),
    }


def _write_matrix(path, matrix):
    np.savetxt(path, matrix, delimiter=",", fmt="%.17g")


def _write_json(path, document):
    with open(path, "w") as fp:
        json.dump(document, fp, indent=2, sort_keys=True)
        fp.write("\n")


def _write_rows(path, rows, fieldnames):
    with open(path, "w", newline="") as fp:
        writer = csv.DictWriter(fp, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


def _write_summary(run, samples, summary):
    _write_matrix(run.path("psm.csv"), summary.psm)
    _write_json(
        run.path("k_hist.json"),
        {
            "k_hist": {str(k): count for k, count in summary.k_hist.items()},
            "k_mode": summary.k_mode,
            "retained": summary.retained,
        },
    )
    summary.point_estimate.to_csv(run.path("labels.csv"))

    rows = trace_table(samples)
    _write_rows(run.path("trace.csv"), rows, list(rows[0]))
    first = [row for row in rows if row["chain"] == rows[0]["chain"]]
    acf = {}
    for column in ("k", "gamma2", "log_joint"):
        series = [row[column] for row in first]
        if len(series) < 2:
            acf[column] = []
            continue
        values = autocorrelation(series, MAX_LAG)
        acf[column] = [None if np.isnan(v) else float(v) for v in values]
    _write_json(run.path("autocorr.json"), acf)


@_reporting
def cmd_fit(run):
    """Fit the model to ``options["input"]`` and write all posterior artifacts."""
    config, options = run.config, run.options
    data = Dataset.from_csv(options["input"], skip_header=options.get("skip_header"))
    covariates = None
    if options.get("covariates"):
        try:
            X = np.loadtxt(options["covariates"], delimiter=",", ndmin=2)
        except ValueError as exc:
            raise DataError("cannot parse covariates: {0}".format(exc))
        covariates = CovariatePriorConfig.from_covariates(
            X, eta=config["COVARIATE_ETA"]
        )
    cfg = ChainConfig.from_app_config(config)
    chains = int(config["CHAINS"])
    if chains < 1:
        raise ParameterError("at least one chain is needed")
    # Stream 1 summarizes, as in ``summarize``; the chains take the others.
    streams = spawn_generators(cfg.seed, chains + 1)
    summary_rng = streams[1]

    samples = run_chains(
        data,
        cfg,
        [streams[0]] + streams[2:],
        covariates=covariates,
        threads=int(config["THREADS"]),
    )
    write_samples(run.path("samples.jsonl"), samples)
    summary = summarize(
        samples, summary_rng, k=options.get("k"), **_kmeans_options(config)
    )
    _write_summary(run, samples, summary)
    if options.get("plugin"):
        estimate = plugin_point_estimate(
            data,
            samples,
            options.get("k") or summary.k_mode,
            summary_rng,
            lambda_=cfg.lambda_,
            alpha_sigma=cfg.alpha_sigma,
            covariates=covariates,
        )
        estimate.to_csv(run.path("labels_plugin.csv"))
    run.write()


@_reporting
def cmd_summarize(run):
    """Recompute the posterior summaries from an existing ``samples.jsonl``."""
    samples = read_samples(run.options["samples"])
    _, summary_rng = spawn_generators(int(run.config["SEED"]), 2)
    summary = summarize(
        samples,
        summary_rng,
        k=run.options.get("k"),
        **_kmeans_options(run.config),
    )
    _write_summary(run, samples, summary)
    run.write()


@_reporting
def cmd_baseline(run):
    """Cluster ``options["input"]`` by cutting its minimum spanning tree."""
    options = run.options
    data = Dataset.from_csv(options["input"], skip_header=options.get("skip_header"))
    tree = mst(data)
    if options.get("cut_fraction") is not None:
        partition = mst_cut_fraction(tree, options["cut_fraction"])
        method = "mst_cut_fraction"
    else:
        partition = mst_cut(tree, options.get("k") or 2)
        method = "mst_cut"
    partition.to_csv(run.path("labels.csv"))
    _write_json(
        run.path("summary.json"),
        {
            "method": method,
            "k": partition.k,
            "sizes": partition.sizes.tolist(),
            "cut_lengths": tree.cut_lengths(partition.k).tolist(),
            "total_length": tree.total_length,
        },
    )
    run.write()


@_reporting
def cmd_generate(run):
    """Write a synthetic dataset and its ground-truth labels."""
    options = run.options
    kind = options["kind"]
    params = {
        key: options[key]
        for key in ("radii", "noise_sd", "b", "df")
        if options.get(key) is not None
    }
    spec = GenSpec(kind=kind, n=options.get("n") or GENERATE_SIZES[kind], params=params)
    generated = spec.generate(make_generator(int(run.config["SEED"])))
    generated.data.to_csv(run.path("data.csv"))
    generated.truth.to_csv(run.path("truth.csv"))
    if generated.covariates is not None:
        _write_matrix(run.path("covariates.csv"), generated.covariates)
    run.write()


@_reporting
def cmd_eigencheck(run):
    """Run the eigenvector convergence experiment and write ``eigencheck.csv``."""
    config = run.config
    rows = eigencheck_experiment(
        config["EIGENCHECK_N_GRID"],
        int(config["EIGENCHECK_REPLICATES"]),
        make_generator(int(config["SEED"])),
        threads=int(config["THREADS"]),
        K=int(config["EIGENCHECK_K"]),
        iterations=int(config["EIGENCHECK_ITERATIONS"]),
        lambda_=float(config["LAMBDA"]),
        alpha_sigma=float(config["ALPHA_SIGMA"]),
    )
    _write_rows(run.path("eigencheck.csv"), rows, ["n", "replicate", "distance"])
    run.write()


def _int_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [int(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated integers")


def _float_list(ctx, param, value):
    if value is None:
        return None
    try:
        return [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated numbers")


def _launch(ctx, command, handler, options, **config_overrides):
    """Load the configuration, record the run and call ``handler``."""
    state = ctx.obj or {}
    replay = state.get("from_config")
    if replay:
        with open(replay) as fp:
            previous = RunConfig.from_json(fp.read(), replay)
        if previous.command == command:
            for key, value in previous.options.items():
                if options.get(key) is None:
                    options[key] = value
    app = create_app(run_config=replay, **config_overrides)
    if state.get("verbose"):
        app.logger.setLevel("DEBUG")
    run = RunConfig.from_app_config(app.config, command, options)
    app.logger.info("Running %s into %s", command, run.out)
    ctx.exit(handler(run))


def _require(options, *names):
    for name in names:
        if not options.get(name):
            raise click.UsageError("Missing option '--{0}'.".format(name))


@click.group()
@click.version_option(__version__)
@click.option("--verbose", is_flag=True, help="Log debug messages.")
@click.option(
    "--from-config",
    type=click.Path(exists=True, dir_okay=False),
    help="Replay the configuration of a previous run_config.json.",
)
@click.pass_context
def cli(ctx, verbose, from_config):
    """Bayesian spanning-forest clustering."""
    ctx.obj = {"verbose": verbose, "from_config": from_config}


def _chain_options(func):
    for option in reversed(
        [
            click.option("--seed", type=int, help="Root seed (SPANFOREST_SEED)."),
            click.option("--iterations", type=int, help="Gibbs sweeps."),
            click.option("--burn-in", type=int, help="Discarded sweeps."),
            click.option("--thin", type=int, help="Keep every n-th sweep."),
            click.option("--lambda", "lambda_", type=float, help="Cluster weight."),
            click.option("--alpha-sigma", type=float, help="Scale prior shape."),
        ]
    ):
        func = option(func)
    return func


@cli.command()
@click.option("--input", "input_", type=click.Path(dir_okay=False), help="Data CSV.")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--skip-header", is_flag=True, default=None, help="Skip first line.")
@_chain_options
@click.option("--k", type=int, help="Clusters of the point estimate.")
@click.option("--covariates", type=click.Path(dir_okay=False), help="Covariate CSV.")
@click.option("--eta", type=float, help="Covariate covariance inflation.")
@click.option("--plugin", is_flag=True, default=None, help="Also write plug-in labels.")
@click.option("--chains", type=int, help="Independent chains to pool.")
@click.option("--threads", type=int, help="Worker processes for the chains.")
@click.pass_context
def fit(
    ctx,
    input_,
    out,
    skip_header,
    seed,
    iterations,
    burn_in,
    thin,
    lambda_,
    alpha_sigma,
    k,
    covariates,
    eta,
    plugin,
    chains,
    threads,
):
    """Run the Gibbs sampler and summarize the posterior."""
    options = {
        "input": input_,
        "out": out,
        "skip_header": skip_header,
        "k": k,
        "covariates": covariates,
        "plugin": plugin,
    }
    _launch(
        ctx,
        "fit",
        _checked(cmd_fit, "input"),
        options,
        SEED=seed,
        ITERATIONS=iterations,
        BURN_IN=burn_in,
        THIN=thin,
        LAMBDA=lambda_,
        ALPHA_SIGMA=alpha_sigma,
        COVARIATE_ETA=eta,
        CHAINS=chains,
        THREADS=threads,
    )


@cli.command("summarize")
@click.option("--samples", type=click.Path(dir_okay=False), help="samples.jsonl.")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, help="Root seed (SPANFOREST_SEED).")
@click.option("--k", type=int, help="Clusters of the point estimate.")
@click.pass_context
def summarize_command(ctx, samples, out, seed, k):
    """Summarize an existing samples.jsonl."""
    options = {"samples": samples, "out": out, "k": k}
    _launch(ctx, "summarize", _checked(cmd_summarize, "samples"), options, SEED=seed)


@cli.command()
@click.option("--input", "input_", type=click.Path(dir_okay=False), help="Data CSV.")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--skip-header", is_flag=True, default=None, help="Skip first line.")
@click.option("--k", type=int, help="Number of clusters (default 2).")
@click.option("--cut-fraction", type=float, help="Cut this fraction of edges.")
@click.pass_context
def baseline(ctx, input_, out, skip_header, k, cut_fraction):
    """Cluster by cutting the longest minimum spanning tree edges."""
    options = {
        "input": input_,
        "out": out,
        "skip_header": skip_header,
        "k": k,
        "cut_fraction": cut_fraction,
    }
    _launch(ctx, "baseline", _checked(cmd_baseline, "input"), options)


@cli.command()
@click.option("--kind", type=click.Choice(sorted(GENERATE_SIZES)), help="Scene.")
@click.option("--n", type=int, help="Number of points.")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, help="Root seed (SPANFOREST_SEED).")
@click.option("--noise-sd", type=float, help="Noise of rings and arc.")
@click.option(
    "--radii",
    callback=_float_list,
    help="Comma-separated ring radii (default {0}).".format(
        ",".join(str(r) for r in RING_RADII)
    ),
)
@click.option("--b", type=float, help="Offset of the second mixture component.")
@click.option("--df", type=int, help="Degrees of freedom of t components.")
@click.pass_context
def generate(ctx, kind, n, out, seed, noise_sd, radii, b, df):
    """Write a synthetic dataset with ground-truth labels."""
    options = {
        "kind": kind,
        "n": n,
        "out": out,
        "noise_sd": noise_sd,
        "radii": radii,
        "b": b,
        "df": df,
    }
    _launch(ctx, "generate", _checked(cmd_generate, "kind"), options, SEED=seed)


@cli.command()
@click.option("--out", type=click.Path(file_okay=False), help="Output directory.")
@click.option("--seed", type=int, help="Root seed (SPANFOREST_SEED).")
@click.option("--n-grid", callback=_int_list, help="Comma-separated sample sizes.")
@click.option("--replicates", type=int, help="Replicates per sample size.")
@click.option("--k", type=int, help="Number of compared eigenvectors.")
@click.option("--iterations", type=int, help="Gibbs sweeps per replicate.")
@click.option("--threads", type=int, help="Worker processes.")
@click.pass_context
def eigencheck(ctx, out, seed, n_grid, replicates, k, iterations, threads):
    """Compare eigenvectors of edge marginals and of the normalized Laplacian."""
    _launch(
        ctx,
        "eigencheck",
        cmd_eigencheck,
        {"out": out},
        SEED=seed,
        EIGENCHECK_N_GRID=n_grid,
        EIGENCHECK_REPLICATES=replicates,
        EIGENCHECK_K=k,
        EIGENCHECK_ITERATIONS=iterations,
        THREADS=threads,
    )


def _checked(handler, *required):
    """Return ``handler`` guarded by a check of its required options."""

    @functools.wraps(handler)
    def wrapper(run):
        _require(run.options, *required)
        return handler(run)

    return wrapper


if __name__ == "__main__":  # pragma: no cover
    cli()
