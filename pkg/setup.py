# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Bayesian clustering with random spanning forests."""

from setuptools import setup

setup()
