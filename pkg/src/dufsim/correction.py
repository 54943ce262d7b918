"""Corrections from cluster spanning trees, and shot scoring.

Both decoders end with a forest over the fully-grown edges: the distributed
decoder already holds one in its parent pointers, the serial decoder builds
one breadth-first. Peeling walks each tree leaves-first and pushes every
pending defect flag one edge towards the root; the edges it crosses form the
correction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .graph import DecodingGraph, logical_cut_mask


class DecoderError(RuntimeError):
    """A decoder produced a state that violates its own invariants."""


@dataclass
class ShotOutcome:
    annihilated: bool
    logical_failure: bool
    residual: np.ndarray


@numba.njit(cache=True)
def _spanning_forest(adj_ptr, adj_vertex, adj_edge, grown, labels, n_real):
    """BFS forest over fully-grown edges, one tree per cluster.

    ``labels`` gives the cluster of every vertex (real and boundary). Each
    tree is rooted at the cluster's lowest-index boundary vertex when it has
    one, otherwise at its lowest-index vertex.
    """
    n = labels.shape[0]
    root_of = np.full(n, -1, np.int64)
    for v in range(n):
        lab = labels[v]
        r = root_of[lab]
        if r == -1:
            root_of[lab] = v
        elif v >= n_real and r < n_real:
            root_of[lab] = v
    parent = np.arange(n)
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    for v in range(n):
        r = root_of[labels[v]]
        if seen[r]:
            continue
        seen[r] = True
        head = 0
        tail = 1
        queue[0] = r
        while head < tail:
            x = queue[head]
            head += 1
            for k in range(adj_ptr[x], adj_ptr[x + 1]):
                y = adj_vertex[k]
                if grown[adj_edge[k]] and not seen[y]:
                    seen[y] = True
                    parent[y] = x
                    queue[tail] = y
                    tail += 1
    return parent


@numba.njit(cache=True)
def _peel(adj_ptr, adj_vertex, adj_edge, grown, parent, defect, n_real, n_edges):
    """Peel a parent forest. Returns (correction mask, status).

    status 0: ok; 1: a non-boundary root is left with a pending defect;
    2: a parent link does not follow a fully-grown edge.
    """
    n = parent.shape[0]
    correction = np.zeros(n_edges, np.bool_)
    depth = np.full(n, -1, np.int64)
    stack = np.empty(n, np.int64)
    for v in range(n):
        if depth[v] >= 0:
            continue
        top = 0
        x = v
        while depth[x] < 0 and parent[x] != x:
            stack[top] = x
            top += 1
            x = parent[x]
            if top > n:
                return correction, 2
        if depth[x] < 0:
            depth[x] = 0
        dx = depth[x]
        while top > 0:
            top -= 1
            dx += 1
            depth[stack[top]] = dx
    # deepest first, ties broken by descending index; roots never move
    n_child = 0
    for v in range(n):
        if depth[v] > 0:
            n_child += 1
    keys = np.empty(n_child, np.int64)
    j = 0
    for v in range(n):
        if depth[v] > 0:
            keys[j] = -(depth[v] * (n + 1) + v)
            j += 1
    keys.sort()
    flag = defect.copy()
    for i in range(n_child):
        v = -keys[i] % (n + 1)
        if not flag[v]:
            continue
        p = parent[v]
        e = -1
        for k in range(adj_ptr[v], adj_ptr[v + 1]):
            if adj_vertex[k] == p and grown[adj_edge[k]]:
                e = adj_edge[k]
                break
        if e < 0:
            return correction, 2
        correction[e] = not correction[e]
        flag[v] = False
        flag[p] = not flag[p]
    for v in range(n_real):
        if flag[v]:
            return correction, 1
    return correction, 0


def spanning_forest(graph: DecodingGraph, grown: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Parent index per vertex for BFS trees over the fully-grown edges."""
    return _spanning_forest(graph.adj_ptr, graph.adj_vertex, graph.adj_edge,
                            np.asarray(grown, dtype=np.bool_),
                            np.asarray(labels, dtype=np.int64), graph.n_real)


def peel(graph: DecodingGraph, parent: np.ndarray, grown: np.ndarray,
         defects: np.ndarray) -> np.ndarray:
    """Correction (sorted edge indices) that flips exactly ``defects``.

    ``parent`` holds a parent vertex index per vertex (roots point to
    themselves), ``grown`` the fully-grown edge mask and ``defects`` the
    defect vertex ids. Every tree must be even or rooted at a boundary
    vertex; otherwise :class:`DecoderError` is raised.
    """
    flag = np.zeros(graph.n_vertices, dtype=np.bool_)
    flag[np.asarray(defects, dtype=np.int64) - 1] = True
    corr, status = _peel(graph.adj_ptr, graph.adj_vertex, graph.adj_edge,
                         np.asarray(grown, dtype=np.bool_),
                         np.asarray(parent, dtype=np.int64), flag, graph.n_real, graph.n_edges)
    if status == 1:
        raise DecoderError("odd defect count left in a cluster without boundary")
    if status == 2:
        raise DecoderError("parent forest does not follow fully-grown edges")
    return np.flatnonzero(corr)


def residual_edges(graph: DecodingGraph, error, correction) -> np.ndarray:
    """Symmetric difference of two edge-index collections, as a mask."""
    res = np.zeros(graph.n_edges, dtype=bool)
    res[np.asarray(error, dtype=np.int64)] ^= True
    res[np.asarray(correction, dtype=np.int64)] ^= True
    return res


def check_annihilation(graph: DecodingGraph, error, correction) -> bool:
    """True when error xor correction leaves no defect on any real vertex."""
    res = residual_edges(graph, error, correction)
    ends = np.concatenate([graph.edge_u[res], graph.edge_v[res]])
    parity = np.bincount(ends, minlength=graph.n_vertices)[:graph.n_real] & 1
    return not parity.any()


def check_logical_failure(graph: DecodingGraph, error, correction) -> bool:
    """True when the residual crosses the logical cut an odd number of times.

    Raises :class:`ValueError` if the residual still has defects.
    """
    if not check_annihilation(graph, error, correction):
        raise ValueError("residual does not annihilate the syndrome")
    res = residual_edges(graph, error, correction)
    return bool(np.count_nonzero(res & logical_cut_mask(graph)) & 1)


def score_shot(graph: DecodingGraph, error, correction) -> ShotOutcome:
    res = residual_edges(graph, error, correction)
    ok = check_annihilation(graph, error, correction)
    failed = ok and bool(np.count_nonzero(res & logical_cut_mask(graph)) & 1)
    return ShotOutcome(annihilated=ok, logical_failure=failed, residual=np.flatnonzero(res))
