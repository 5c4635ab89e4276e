# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""SpanForest exceptions."""


class SpanForestError(Exception):
    """Base class for all errors raised by SpanForest."""


class DataError(SpanForestError, ValueError):
    """Observations are malformed or too degenerate to fit."""


class ParameterError(SpanForestError, ValueError):
    """A parameter lies outside its valid domain."""


class InvalidTreeError(SpanForestError, ValueError):
    """A parent array does not encode a spanning tree rooted at the hub."""


class DimensionError(SpanForestError, ValueError):
    """Two inputs have incompatible shapes."""


class SamplerPathologyError(SpanForestError, RuntimeError):
    """A sampler exceeded its step budget."""


class FactorizationError(SpanForestError, ArithmeticError):
    """A matrix factorization or eigendecomposition failed."""


class SchemaError(SpanForestError, ValueError):
    """A stored artifact does not follow its schema.

    :param message: What is wrong.
    :param path: File the problem was found in, if any.
    :param line: One-based line number, if known.
    """

    def __init__(self, message, path=None, line=None):
        """Initialize error."""
        self.path = path
        self.line = line
        location = ""
        if path is not None:
            location = "{0}:".format(path)
            if line is not None:
                location += "{0}:".format(line)
            location += " "
        super(SchemaError, self).__init__(location + message)
