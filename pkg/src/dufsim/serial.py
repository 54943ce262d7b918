"""Serial Union-Find decoder, the reference the distributed simulator is checked against.

Each pass grows every odd cluster by one unit on each edge leaving it, then
unions across the edges that became fully grown. Cluster membership is frozen
for the whole growing pass, so an edge between two distinct odd clusters
gains one unit from each side. The representative of a set is its minimum
vertex index, which makes the serial root coincide with the distributed
decoder's ``cid``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .correction import peel, spanning_forest
from .graph import DecodingGraph
from .noise import Syndrome


class UnionFind:
    """Disjoint sets with union-by-minimum-index and path compression.

    Each set tracks the XOR of its members' defect flags and whether it
    holds a boundary vertex. A set is odd when its parity is set and it has
    no boundary vertex.

    >>> uf = UnionFind(4, defects=[0, 1], boundary=[3])
    >>> uf.odd(0), uf.odd(1)
    (True, True)
    >>> root = uf.union(1, 0)
    >>> root, uf.find(1), uf.odd(0)
    (0, 0, False)
    """

    def __init__(self, n: int, defects=(), boundary=()):
        self.parent = list(range(n))
        self.parity = [False] * n
        self.touches_boundary = [False] * n
        for v in defects:
            self.parity[v] = not self.parity[v]
        for v in boundary:
            self.touches_boundary[v] = True

    def find(self, v: int) -> int:
        parent = self.parent
        root = v
        while parent[root] != root:
            root = parent[root]
        while parent[v] != root:
            parent[v], v = root, parent[v]
        return root

    def union(self, u: int, v: int) -> int:
        ru, rv = self.find(u), self.find(v)
        if ru == rv:
            return ru
        if rv < ru:
            ru, rv = rv, ru
        self.parent[rv] = ru
        self.parity[ru] ^= self.parity[rv]
        self.touches_boundary[ru] |= self.touches_boundary[rv]
        return ru

    def odd(self, v: int) -> bool:
        r = self.find(v)
        return self.parity[r] and not self.touches_boundary[r]


@numba.njit(cache=True)
def _find(uf, v):
    root = v
    while uf[root] != root:
        root = uf[root]
    while uf[v] != root:
        nxt = uf[v]
        uf[v] = root
        v = nxt
    return root


@numba.njit(cache=True)
def _splitmix(state):
    state = (state + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = state
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)) & np.uint64(0xFFFFFFFFFFFFFFFF)
    return state, z ^ (z >> np.uint64(31))


@numba.njit(cache=True)
def _shuffle(arr, count, state):
    for i in range(count - 1, 0, -1):
        state, r = _splitmix(state)
        j = np.int64(r % np.uint64(i + 1))
        arr[i], arr[j] = arr[j], arr[i]
    return state


@numba.njit(cache=True)
def _decode_serial(adj_ptr, adj_vertex, adj_edge, edge_u, edge_v, w, defect, n_real, order_seed):
    n = defect.shape[0]
    n_edges = w.shape[0]
    uf = np.arange(n)
    parity = defect.copy()
    boundary = np.zeros(n, np.bool_)
    boundary[n_real:] = True
    nxt = np.full(n, -1, np.int64)
    tail = np.arange(n)
    growth = np.zeros(n_edges, np.int64)
    roots = np.empty(n, np.int64)
    fused = np.empty(n_edges, np.int64)
    state = np.uint64(order_seed)
    iterations = 0
    while True:
        n_odd = 0
        for v in range(n_real):
            if uf[v] == v and parity[v] and not boundary[v]:
                roots[n_odd] = v
                n_odd += 1
        if n_odd == 0:
            break
        iterations += 1
        if order_seed != 0:
            state = _shuffle(roots, n_odd, state)
        n_fused = 0
        for i in range(n_odd):
            r = roots[i]
            x = r
            while x != -1:
                for k in range(adj_ptr[x], adj_ptr[x + 1]):
                    e = adj_edge[k]
                    if growth[e] < w[e] and _find(uf, adj_vertex[k]) != r:
                        growth[e] += 1
                        if growth[e] == w[e]:
                            fused[n_fused] = e
                            n_fused += 1
                x = nxt[x]
        for i in range(n_fused):
            e = fused[i]
            ru = _find(uf, edge_u[e])
            rv = _find(uf, edge_v[e])
            if ru == rv:
                continue
            if rv < ru:
                ru, rv = rv, ru
            uf[rv] = ru
            parity[ru] ^= parity[rv]
            boundary[ru] |= boundary[rv]
            nxt[tail[ru]] = rv
            tail[ru] = tail[rv]
    labels = np.empty(n, np.int64)
    for v in range(n):
        labels[v] = _find(uf, v)
    return labels, growth, iterations


@dataclass
class SerialDecodeResult:
    """Outcome of one serial decode.

    ``labels[i]`` is the representative (minimum vertex index) of the cluster
    holding vertex index ``i``; ``growth`` is the final per-edge growth.
    ``correction`` holds sorted edge indices.
    """

    labels: np.ndarray
    growth: np.ndarray
    fully_grown: np.ndarray
    growth_iterations: int
    parent: np.ndarray
    correction: np.ndarray

    def partition(self, n_real: int) -> np.ndarray:
        """Canonical cluster label (minimum real index) for every real vertex."""
        return self.labels[:n_real].copy()

    def clusters(self, n_real: int) -> list[frozenset]:
        groups: dict[int, set] = {}
        for i, lab in enumerate(self.labels[:n_real]):
            groups.setdefault(int(lab), set()).add(i + 1)
        return sorted((frozenset(g) for g in groups.values()), key=min)


def decode_serial(graph: DecodingGraph, syndrome: Syndrome, order_seed: int = 0) -> SerialDecodeResult:
    """Grow and merge odd clusters until none is left, then peel.

    ``order_seed`` shuffles the order in which odd clusters grow within a
    pass; 0 keeps ascending root order. The result does not depend on it.
    """
    defect = syndrome.mask(graph)
    labels, growth, iterations = _decode_serial(
        graph.adj_ptr, graph.adj_vertex, graph.adj_edge, graph.edge_u, graph.edge_v,
        graph.weights, defect, graph.n_real, np.uint64(order_seed))
    grown = growth == graph.weights
    parent = spanning_forest(graph, grown, labels)
    correction = peel(graph, parent, grown, syndrome.defects)
    return SerialDecodeResult(labels, growth, grown, int(iterations), parent, correction)
