# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Layered configuration loading.

A run is configured through the ``config`` mapping of a small Flask
application, which also owns the ``spanforest`` logger. Sources are applied
by loader classes, each usable on its own:

- :class:`SpanForestConfigModule` - values from a Python module (by default
  :mod:`spanforest.config`).
- :class:`SpanForestConfigInstanceFolder` - ``spanforest.cfg`` in the
  instance folder.
- :class:`SpanForestConfigEnvironment` - environment variables with a prefix
  (e.g. ``SPANFOREST_SEED``).
- :class:`SpanForestConfigRunFile` - the ``config`` section of a previous
  run's ``run_config.json``.
- :class:`SpanForestConfigDefault` - fills values that must always be set.

>>> import tempfile
>>> app = create_app(instance_path=tempfile.mkdtemp(), SEED=3, ITERATIONS=10)
>>> app.config["SEED"], app.config["BURN_IN"], app.config["LAMBDA"]
(3, 5, 0.5)
"""

import ast
import json
import os
import warnings

import numpy as np
from flask import Flask

from .errors import SchemaError

#: Name of the application, its logger and its instance-folder config file.
APP_NAME = "spanforest"


class SpanForestConfigModule(object):
    """Load configuration from a module or an import string."""

    def __init__(self, app=None, module="spanforest.config"):
        """Initialize extension."""
        self.module = module
        if app:
            self.init_app(app)

    def init_app(self, app):
        """Initialize Flask application."""
        if self.module:
            app.config.from_object(self.module)
            app.logger.debug("Loaded configuration module %s", self.module)


class SpanForestConfigInstanceFolder(object):
    """Load configuration from ``<instance_path>/spanforest.cfg`` if present."""

    def __init__(self, app=None):
        """Initialize extension."""
        if app:
            self.init_app(app)

    def init_app(self, app):
        """Initialize Flask application."""
        if app.config.from_pyfile("{0}.cfg".format(APP_NAME), silent=True):
            app.logger.debug("Loaded instance configuration from %s", app.instance_path)


class SpanForestConfigRunFile(object):
    """Replay the configuration recorded in a ``run_config.json``.

    :param path: Path of the file, nothing is loaded when ``None``.
    """

    def __init__(self, app=None, path=None):
        """Initialize extension."""
        self.path = path
        if app:
            self.init_app(app)

    def init_app(self, app):
        """Initialize Flask application."""
        if not self.path:
            return
        with open(self.path) as fp:
            try:
                document = json.load(fp)
            except ValueError as exc:
                raise SchemaError(str(exc), self.path)
        if not isinstance(document, dict) or not isinstance(
            document.get("config"), dict
        ):
            raise SchemaError("missing 'config' section", self.path)
        app.config.from_mapping(document["config"])
        app.logger.debug("Loaded run configuration from %s", self.path)


class SpanForestConfigEnvironment(object):
    """Load configuration from environment variables.

    Values are parsed as Python literals when possible, so
    ``SPANFOREST_SEED=7`` yields the integer ``7``.
    """

    def __init__(self, app=None, prefix="SPANFOREST_"):
        """Initialize extension."""
        self.prefix = prefix
        if app:
            self.init_app(app)

    def init_app(self, app):
        """Initialize Flask application."""
        prefix_len = len(self.prefix)
        for varname, value in os.environ.items():
            if not varname.startswith(self.prefix):
                continue

            varname = varname[prefix_len:]
            if not value:
                continue

            try:
                value = ast.literal_eval(value)
            except (SyntaxError, ValueError):
                pass

            app.config[varname] = value
            app.logger.debug("Set %s from environment", varname)


class SpanForestConfigDefault(object):
    """Fill configuration values that must always be set.

    A missing ``SEED`` is drawn from OS entropy and recorded in the config so
    the run stays reproducible from its ``run_config.json``.
    """

    def __init__(self, app=None):
        """Initialize extension."""
        if app:
            self.init_app(app)

    def init_app(self, app):
        """Initialize Flask application."""
        if app.config.get("SEED") is None:
            seed = int(np.random.SeedSequence().generate_state(1, np.uint64)[0])
            app.config["SEED"] = seed
            warnings.warn(
                "No seed configured; using SEED={0} drawn from OS entropy".format(
                    seed
                ),
                UserWarning,
            )

        if app.config.get("BURN_IN") is None and app.config.get("ITERATIONS"):
            app.config["BURN_IN"] = int(app.config["ITERATIONS"]) // 2

        app.config["LOGLEVEL"] = str(app.config.get("LOGLEVEL") or "WARNING").upper()


def create_config_loader(config="spanforest.config", env_prefix="SPANFOREST"):
    """Create the configuration loader of a run.

    Configuration is loaded in the following order, later sources winning:

        1. ``config`` module (defaults).
        2. Instance folder: ``<app.instance_path>/spanforest.cfg``.
        3. Environment variables with the prefix ``env_prefix``.
        4. ``run_config.json`` given as the ``run_config`` keyword.
        5. Keyword arguments that are not ``None`` (command-line flags).
        6. Required values still missing, see :class:`SpanForestConfigDefault`.

    A replayed run keeps its recorded values over the environment. A flag that
    sets ``ITERATIONS`` without ``BURN_IN`` drops any configured burn-in so it
    is derived again from the new length.

    :param config: Either an import string to a module with configuration or
        alternatively the module itself.
    :param env_prefix: Environment variable prefix to import configuration
        from.
    :return: A callable with the method signature
        ``config_loader(app, run_config=None, **kwargs)``.
    """

    def _config_loader(app, run_config=None, **kwargs_config):
        SpanForestConfigModule(app=app, module=config)
        SpanForestConfigInstanceFolder(app=app)
        SpanForestConfigEnvironment(app=app, prefix="{0}_".format(env_prefix))
        SpanForestConfigRunFile(app=app, path=run_config)
        overrides = {
            key: value for key, value in kwargs_config.items() if value is not None
        }
        if "ITERATIONS" in overrides and "BURN_IN" not in overrides:
            app.config["BURN_IN"] = None
        app.config.update(overrides)
        SpanForestConfigDefault(app=app)

    return _config_loader


def create_app(instance_path=None, run_config=None, **kwargs_config):
    """Create the application object holding a run's configuration and logger.

    :param instance_path: Folder searched for ``spanforest.cfg``; defaults to
        the working directory.
    :param run_config: Optional ``run_config.json`` to replay.
    :param kwargs_config: Upper-case configuration overrides.
    """
    app = Flask(
        APP_NAME,
        instance_path=os.path.abspath(instance_path or os.getcwd()),
        instance_relative_config=True,
    )
    create_config_loader()(app, run_config=run_config, **kwargs_config)
    app.logger.setLevel(app.config["LOGLEVEL"])
    return app
