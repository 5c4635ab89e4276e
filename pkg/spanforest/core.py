# -*- coding: utf-8 -*-
#
# This file is part of SpanForest.
# Copyright (C) 2026 SpanForest developers.
#
# SpanForest is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

"""Domain types shared by the sampler, the summaries and the baselines.

Nodes are numbered ``0..n``. Node ``0`` is the auxiliary hub of the augmented
tree and data row ``r`` is node ``r + 1``. Cluster labels are indexed by data
row and take values ``1..K``.
"""

import csv
import dataclasses
import json
import warnings
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial.distance import pdist, squareform

from .errors import (
    DataError,
    DimensionError,
    InvalidTreeError,
    ParameterError,
    SchemaError,
)

#: Index of the auxiliary hub node.
HUB = 0


def _readonly(array):
    array.setflags(write=False)
    return array


class Dataset(object):
    """Observations ``y_1..y_n`` with the statistics used by the empirical priors.

    :param values: ``n x p`` array of finite reals (a 1-D array is read as
        ``p = 1``).
    """

    def __init__(self, values):
        """Initialize dataset."""
        values = np.array(values, dtype=float)
        if values.ndim == 1:
            values = values[:, np.newaxis]
        if values.ndim != 2:
            raise DataError("observations must form an n x p matrix")
        n, p = values.shape
        if n < 2:
            raise DataError("at least two observations are needed, got {0}".format(n))
        if p < 1:
            raise DataError("observations need at least one dimension")
        if not np.all(np.isfinite(values)):
            raise DataError("observations contain non-finite entries")

        self.values = _readonly(values)
        self.n = n
        self.p = p
        self.mean = _readonly(values.mean(axis=0))
        self.sigma2_hat = float(np.sum((values - self.mean) ** 2) / (n * p))

        self.sq_dists = _readonly(squareform(pdist(values, "sqeuclidean")))
        dists = np.sqrt(self.sq_dists)
        nearest = np.where(dists > 0, dists, np.inf).min(axis=1)
        if not np.all(np.isfinite(nearest)):
            raise DataError(
                "all observations are identical; the scale prior centre "
                "(nearest distinct neighbour) is undefined"
            )
        if np.any(dists[np.triu_indices(n, 1)] == 0):
            warnings.warn(
                "Dataset contains duplicate rows; nearest-neighbour distances "
                "skip exact duplicates",
                UserWarning,
            )
        #: Distance from each point to its nearest distinct neighbour.
        self.nearest_distance = _readonly(nearest)
        #: Centre of the Gamma prior on each local scale.
        self.mu_sigma = _readonly(nearest / np.sqrt(p))

    def __len__(self):
        """Return the number of observations."""
        return self.n

    def __repr__(self):
        """Return a short description."""
        return "<Dataset n={0} p={1}>".format(self.n, self.p)

    def row(self, node):
        """Return the observation attached to tree node ``node`` (``>= 1``)."""
        return self.values[node - 1]

    @classmethod
    def from_csv(cls, path, skip_header=False, delimiter=","):
        """Load observations from a CSV file, one row per observation.

        :param path: CSV file without index column.
        :param skip_header: Skip the first line.
        """
        try:
            values = np.loadtxt(
                path,
                delimiter=delimiter,
                skiprows=1 if skip_header else 0,
                ndmin=2,
            )
        except ValueError as exc:
            raise DataError("cannot parse {0}: {1}".format(path, exc))
        return cls(values)

    def to_csv(self, path, delimiter=","):
        """Write observations so that :meth:`from_csv` restores them exactly."""
        np.savetxt(path, self.values, delimiter=delimiter, fmt="%.17g")


class Partition(object):
    """Cluster assignment of ``n`` points, canonicalized by first occurrence.

    The lowest-indexed point gets label 1, the lowest-indexed point outside
    cluster 1 gets label 2, and so on, so equal clusterings compare equal
    whatever labels they were built from.
    """

    def __init__(self, labels):
        """Initialize partition from arbitrary hashable labels."""
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.size == 0:
            raise DataError("labels must be a non-empty 1-D sequence")
        _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
        rank = np.argsort(np.argsort(first))
        self.labels = _readonly((rank[inverse.ravel()] + 1).astype(np.int64))
        self.n = self.labels.size
        self.k = int(first.size)

    @classmethod
    def from_labels(cls, labels):
        """Build a partition from any label vector (alias of the constructor)."""
        return cls(labels)

    def __eq__(self, other):
        """Compare canonical label vectors."""
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self):
        """Hash the canonical label vector."""
        return hash(self.labels.tobytes())

    def __repr__(self):
        """Return a short description."""
        return "<Partition n={0} K={1}>".format(self.n, self.k)

    @property
    def sizes(self):
        """Cluster sizes ``n_1..n_K``."""
        return np.bincount(self.labels, minlength=self.k + 1)[1:]

    def clusters(self):
        """Return the member row indices of each cluster, in label order."""
        return [np.flatnonzero(self.labels == k) for k in range(1, self.k + 1)]

    def coassignment(self):
        """Return the ``n x n`` 0/1 matrix of pairs sharing a cluster."""
        return (self.labels[:, np.newaxis] == self.labels[np.newaxis, :]).astype(float)

    def to_csv(self, path):
        """Write ``index,label`` rows, one per point (node index ``1..n``)."""
        with open(path, "w", newline="") as fp:
            writer = csv.writer(fp)
            writer.writerow(["index", "label"])
            for node, label in enumerate(self.labels.tolist(), start=1):
                writer.writerow([node, label])

    @classmethod
    def from_csv(cls, path):
        """Read a partition written by :meth:`to_csv`."""
        labels = []
        with open(path, newline="") as fp:
            reader = csv.reader(fp)
            header = next(reader, None)
            if header != ["index", "label"]:
                raise SchemaError("expected header 'index,label'", path, 1)
            for lineno, row in enumerate(reader, start=2):
                try:
                    node, label = int(row[0]), int(row[1])
                except (IndexError, ValueError):
                    raise SchemaError("malformed row {0!r}".format(row), path, lineno)
                if node != len(labels) + 1:
                    raise SchemaError("indices must run 1..n in order", path, lineno)
                labels.append(label)
        if not labels:
            raise SchemaError("no labels found", path)
        return cls(labels)


class AugmentedTree(object):
    """Spanning tree over the hub ``0`` and the data nodes ``1..n``.

    ``parent[i]`` is the neighbour of ``i`` on its path to the hub. Children
    of the hub are cluster roots; deleting the hub leaves the spanning forest.
    Construction validates the structure, see :func:`validate_tree`.

    :param parent: Length ``n + 1`` sequence; element 0 is ignored.
    """

    def __init__(self, parent):
        """Initialize and validate the tree."""
        self.parent = _readonly(_check_parent(parent))
        self.n = self.parent.size - 1

    @classmethod
    def _trusted(cls, parent):
        # Skips validation for parent arrays built tree-first by a sampler.
        tree = cls.__new__(cls)
        parent = np.asarray(parent, dtype=np.int64).copy()
        parent[HUB] = -1
        tree.parent = _readonly(parent)
        tree.n = parent.size - 1
        return tree

    def __eq__(self, other):
        """Compare parent arrays."""
        if not isinstance(other, AugmentedTree):
            return NotImplemented
        return np.array_equal(self.parent, other.parent)

    def __hash__(self):
        """Hash the parent array."""
        return hash(self.key())

    def __repr__(self):
        """Return a short description."""
        return "<AugmentedTree n={0} K={1}>".format(self.n, self.k)

    def key(self):
        """Return the parent array as a tuple (hashable tree identity)."""
        return tuple(self.parent[1:].tolist())

    def edge_key(self):
        """Return the undirected edge set as a frozenset of sorted pairs."""
        return frozenset(
            (min(i, j), max(i, j)) for i, j in self.edges().tolist()
        )

    @cached_property
    def roots(self):
        """Cluster roots, i.e. the hub's neighbours, ascending."""
        return _readonly(np.flatnonzero(self.parent == HUB))

    @property
    def k(self):
        """Number of clusters."""
        return int(self.roots.size)

    def edges(self):
        """Return the ``n`` tree edges as rows ``(child, parent)``."""
        nodes = np.arange(1, self.n + 1)
        return np.column_stack([nodes, self.parent[1:]])

    @cached_property
    def _leaf_neighbors(self):
        neighbors = [[] for _ in range(self.n + 1)]
        for child, parent in enumerate(self.parent[1:].tolist(), start=1):
            if parent != HUB:
                neighbors[child].append(parent)
                neighbors[parent].append(child)
        return [_readonly(np.array(sorted(nb), dtype=np.intp)) for nb in neighbors]

    def neighbors(self, node):
        """Return the non-hub tree neighbours of ``node``."""
        return self._leaf_neighbors[node]

    def degree(self, node):
        """Return the number of non-hub tree neighbours of ``node``."""
        return int(self._leaf_neighbors[node].size)

    def adjacency(self):
        """Return the ``(n + 1) x (n + 1)`` 0/1 adjacency matrix."""
        adj = np.zeros((self.n + 1, self.n + 1))
        nodes = np.arange(1, self.n + 1)
        adj[nodes, self.parent[1:]] = 1.0
        adj[self.parent[1:], nodes] = 1.0
        return adj

    def to_json(self):
        """Serialize as ``{"parent": [...]}`` with ``-1`` at position 0."""
        return json.dumps({"parent": self.parent.tolist()})

    @classmethod
    def from_json(cls, text):
        """Deserialize and validate a tree written by :meth:`to_json`."""
        try:
            parent = json.loads(text)["parent"]
        except (TypeError, KeyError, ValueError) as exc:
            raise SchemaError("not a tree document: {0}".format(exc))
        return cls(parent)


def _check_parent(parent):
    raw = list(np.asarray(parent).ravel().tolist()) if np.ndim(parent) == 1 else []
    if len(raw) < 2:
        raise InvalidTreeError("parent array must have length n + 1 >= 2")
    raw[HUB] = -1
    parent = np.array(raw)
    n = parent.size - 1
    if parent.dtype.kind == "f":
        if not np.all(np.isfinite(parent)) or np.any(parent != np.round(parent)):
            raise InvalidTreeError("parent entries must be integers")
    elif parent.dtype.kind not in "iu":
        raise InvalidTreeError("parent entries must be integers")
    parent = parent.astype(np.int64)
    nodes = np.arange(1, n + 1)
    body = parent[1:]
    if np.any((body < 0) | (body > n)):
        raise InvalidTreeError("parent entries must lie in 0..{0}".format(n))
    loops = np.flatnonzero(body == nodes)
    if loops.size:
        raise InvalidTreeError("node {0} is its own parent".format(loops[0] + 1))

    graph = coo_matrix((np.ones(n), (nodes, body)), shape=(n + 1, n + 1))
    reached = breadth_first_order(
        graph, HUB, directed=False, return_predecessors=False
    )
    if reached.size != n + 1:
        missing = np.setdiff1d(np.arange(n + 1), reached)
        node, path = int(missing[0]), []
        while node not in path:
            path.append(node)
            node = int(parent[node])
        cycle = path[path.index(node) :]
        raise InvalidTreeError(
            "node {0} is unreachable from the hub (cycle detected among "
            "nodes {1})".format(int(missing[0]), cycle)
        )
    return parent


def validate_tree(parent):
    """Validate a parent array and return the tree it encodes.

    The edge set ``{(i, parent[i])}`` must reach every node from the hub;
    with ``n`` edges over ``n + 1`` nodes this is equivalent to being a
    spanning tree.

    :param parent: Length ``n + 1`` sequence; element 0 is ignored.
    :raises InvalidTreeError: On self-loops, out-of-range parents, cycles or
        nodes unreachable from the hub.
    """
    return AugmentedTree(parent)


def partition_from_tree(tree):
    """Return the clustering induced by deleting the hub from ``tree``."""
    if not isinstance(tree, AugmentedTree):
        tree = validate_tree(tree)
    n = tree.n
    nodes = np.arange(1, n + 1)
    mask = tree.parent[1:] != HUB
    graph = coo_matrix(
        (np.ones(mask.sum()), (nodes[mask] - 1, tree.parent[1:][mask] - 1)),
        shape=(n, n),
    )
    _, labels = connected_components(graph, directed=False)
    return Partition(labels)


@dataclasses.dataclass(frozen=True, eq=False)
class ModelState(object):
    """Continuous parameters of the forest model.

    ``sigma_tilde`` and ``u_gamma`` are indexed by data row; the leaf scale of
    edge ``(i, j)`` is always computed as ``sigma_tilde_i * sigma_tilde_j``.
    """

    sigma_tilde: np.ndarray
    gamma2: float
    mu: np.ndarray
    u_gamma: np.ndarray
    lambda_: float = 0.5
    alpha_sigma: float = 0.5

    def __post_init__(self):
        """Validate and freeze the parameter arrays."""
        sigma = np.array(self.sigma_tilde, dtype=float)
        u_gamma = np.array(self.u_gamma, dtype=float)
        mu = np.atleast_1d(np.array(self.mu, dtype=float))
        if sigma.ndim != 1 or u_gamma.shape != sigma.shape:
            raise DimensionError("sigma_tilde and u_gamma must be length-n vectors")
        for name, value in (("sigma_tilde", sigma), ("u_gamma", u_gamma)):
            if not np.all(np.isfinite(value)) or np.any(value <= 0):
                raise ParameterError("{0} must be positive and finite".format(name))
        for name in ("gamma2", "lambda_", "alpha_sigma"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise ParameterError("{0} must be positive and finite".format(name))
            object.__setattr__(self, name, value)
        if not np.all(np.isfinite(mu)):
            raise ParameterError("mu must be finite")
        object.__setattr__(self, "sigma_tilde", _readonly(sigma))
        object.__setattr__(self, "u_gamma", _readonly(u_gamma))
        object.__setattr__(self, "mu", _readonly(mu))

    @classmethod
    def initial(cls, data, lambda_=0.5, alpha_sigma=0.5):
        """Return the chain's starting point.

        Scales start at their prior means ``alpha_sigma * mu_sigma_i``, the
        root scale at the empirical variance, the root location at the data
        mean and the mixing variables at one.
        """
        return cls(
            sigma_tilde=alpha_sigma * data.mu_sigma,
            gamma2=data.sigma2_hat,
            mu=data.mean,
            u_gamma=np.ones(data.n),
            lambda_=lambda_,
            alpha_sigma=alpha_sigma,
        )

    def replace(self, **changes):
        """Return a copy with ``changes`` applied."""
        return dataclasses.replace(self, **changes)

    def sigma(self, i, j):
        """Return the leaf scale of nodes ``i`` and ``j``."""
        return self.sigma_tilde[i - 1] * self.sigma_tilde[j - 1]


class LogSimilarity(object):
    """``(n + 1) x (n + 1)`` matrix ``S`` of log edge weights.

    Row and column 0 belong to the hub. ``S`` is symmetric with a zero
    diagonal; ``exp(S)`` off the diagonal is the edge-weight matrix whose
    spanning trees the posterior is proportional to.
    """

    def __init__(self, values, atol=1e-10):
        """Initialize and validate ``S``."""
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise DimensionError("S must be a square matrix")
        if values.shape[0] < 2:
            raise DimensionError("S must cover the hub and at least one node")
        off = ~np.eye(values.shape[0], dtype=bool)
        if not np.all(np.isfinite(values[off])):
            raise ParameterError("S must be finite off the diagonal")
        if np.any(np.diag(values) != 0):
            raise ParameterError("S must have a zero diagonal")
        if not np.allclose(values, values.T, rtol=0, atol=atol):
            raise ParameterError("S must be symmetric")
        self.values = _readonly(values)
        self.n = values.shape[0] - 1

    def __repr__(self):
        """Return a short description."""
        return "<LogSimilarity n={0}>".format(self.n)

    def shifted_weights(self):
        """Return ``(A, shift)`` with ``A = exp(S - shift)`` off the diagonal.

        ``shift`` is the largest off-diagonal entry, so ``A <= 1`` and the
        largest weight never overflows.
        """
        off = ~np.eye(self.n + 1, dtype=bool)
        shift = float(self.values[off].max())
        weights = np.exp(np.where(off, self.values - shift, -np.inf))
        return weights, shift
