# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Euclidean minimum spanning tree and MST-cut clustering.

Cutting the ``K - 1`` longest edges of the minimum spanning tree gives the
single-linkage clustering with ``K`` clusters.

>>> from spanforest.core import Dataset
>>> tree = mst(Dataset([[0.0], [1.0], [2.0], [10.0]]))
>>> mst_cut(tree, 2).labels.tolist()
[1, 1, 1, 2]
"""

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .core import Partition
from .errors import ParameterError


class WeightedTree(object):
    """Spanning tree over the data nodes ``1..n`` with edge lengths.

    :param edges: ``(i, j, length)`` triples with ``i < j``.
    :param n: Number of nodes.
    """

    def __init__(self, edges, n):
        """Initialize tree."""
        self.n = int(n)
        if len(edges) != self.n - 1:
            raise ParameterError(
                "a spanning tree over {0} nodes has {1} edges, got {2}".format(
                    self.n, self.n - 1, len(edges)
                )
            )
        self.edges = [(int(i), int(j), float(length)) for i, j, length in edges]
        self.lengths = np.array([length for _, _, length in self.edges])
        if not np.all(np.isfinite(self.lengths)) or np.any(self.lengths < 0):
            raise ParameterError("edge lengths must be finite and non-negative")

    @property
    def total_length(self):
        """Sum of the edge lengths."""
        return float(self.lengths.sum())

    def _cut_order(self):
        # Longest first, earlier edge first among equal lengths.
        return np.lexsort((np.arange(self.lengths.size), -self.lengths))

    def cut_lengths(self, K):
        """Return the lengths of the ``K - 1`` edges removed by :func:`mst_cut`."""
        _check_k(K, self.n)
        return self.lengths[self._cut_order()[: K - 1]]


def _check_k(K, n):
    if not 1 <= K <= n:
        raise ParameterError("K must lie in 1..{0}, got {1}".format(n, K))


def mst(data):
    """Return the Euclidean minimum spanning tree of ``data`` (Prim's algorithm).

    The tree grows from the first point. Among equally close candidates the
    lowest-index point joins first, and it attaches to the tree node that
    reached that distance first.
    """
    dist = np.sqrt(data.sq_dists)
    n = data.n
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = dist[0].copy()
    source = np.zeros(n, dtype=int)
    edges = []
    for _ in range(n - 1):
        candidates = np.where(in_tree, np.inf, best)
        node = int(np.argmin(candidates))
        edges.append(
            (
                min(source[node], node) + 1,
                max(source[node], node) + 1,
                float(best[node]),
            )
        )
        in_tree[node] = True
        closer = dist[node] < best
        best[closer] = dist[node][closer]
        source[closer] = node
    return WeightedTree(edges, n)


def mst_cut(tree, K):
    """Delete the ``K - 1`` longest tree edges and return the components."""
    _check_k(K, tree.n)
    keep = np.ones(len(tree.edges), dtype=bool)
    keep[tree._cut_order()[: K - 1]] = False
    rows = [i - 1 for (i, _, _), kept in zip(tree.edges, keep) if kept]
    cols = [j - 1 for (_, j, _), kept in zip(tree.edges, keep) if kept]
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(tree.n, tree.n))
    _, labels = connected_components(graph, directed=False)
    return Partition(labels)


def mst_cut_fraction(tree, q):
    """Delete the longest ``round(q * (n - 1))`` edges and return the components.

    :param q: Fraction of edges to cut, in ``[0, 1]``.
    """
    if not 0 <= q <= 1:
        raise ParameterError("q must lie in [0, 1], got {0}".format(q))
    return mst_cut(tree, int(round(q * (tree.n - 1))) + 1)
