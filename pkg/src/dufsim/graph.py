"""Decoding graph of the rotated surface code (Z-ancilla side).

Data qubits sit on an integer grid ``(r, c)`` with ``0 <= r, c < d`` and
``r = 0`` the bottom row. Plaquette ``(i, j)`` with ``-1 <= i, j <= d - 1``
covers the data qubits ``(i, j), (i, j+1), (i+1, j), (i+1, j+1)`` that lie on
the grid; it is a Z-plaquette when ``i + j`` is even. Interior Z-plaquettes
have weight four, and the top/bottom rows carry the weight-two ones, which
gives ``(d + 1)(d - 1)/2`` Z-ancillas per round.

Each Z-ancilla measurement is a vertex. A data qubit shared by two ancillas
is a spatial edge; a data qubit on the left or right column touches a single
ancilla and becomes a boundary edge ending on its own virtual boundary
vertex. Consecutive rounds are joined by temporal edges.

Vertex ids follow the hardware numbering: real vertices are ``1..n`` in
row-major order per round starting at the bottom-left ancilla. Boundary
vertices get ids ``n + 1 ..`` and are flagged. Internally a vertex with id
``k`` lives at array index ``k - 1``.

Vertex coordinates are ``(round, row, col)`` with real vertices at
``row = i + 1`` and ``col = j + 1`` of their plaquette. A boundary vertex
takes the row of its data qubit and ``col = 0`` (left) or ``col = d`` (right).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

SPATIAL = 0
TEMPORAL = 1
BOUNDARY = 2
KIND_NAMES = ("spatial", "temporal", "boundary")


@dataclass(frozen=True)
class GraphConfig:
    """Shape of a decoding graph.

    ``rounds`` defaults to ``d``. ``w_max`` is only meaningful in weighted
    mode, where edge weights lie in ``[2, w_max]``.
    """

    d: int
    rounds: Optional[int] = None
    weighted: bool = False
    w_max: int = 2

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 3 or self.d % 2 == 0:
            raise ValueError(f"code distance must be an odd integer >= 3, got {self.d!r}")
        if self.rounds is None:
            object.__setattr__(self, "rounds", int(self.d))
        if int(self.rounds) != self.rounds or self.rounds < 1:
            raise ValueError(f"rounds must be an integer >= 1, got {self.rounds!r}")
        if self.weighted and self.w_max < 2:
            raise ValueError(f"w_max must be >= 2 in weighted mode, got {self.w_max!r}")

    @property
    def ancillas_per_round(self) -> int:
        return (self.d + 1) * (self.d - 1) // 2


def _z_plaquettes(d: int) -> list[tuple[int, int]]:
    """Z-plaquettes ``(i, j)`` in id order: bottom row first, left to right."""
    plaq = []
    for i in range(-1, d):
        for j in range(-1, d):
            if (i + j) % 2:
                continue
            interior = 0 <= i <= d - 2 and 0 <= j <= d - 2
            top_bottom = i in (-1, d - 1) and 0 <= j <= d - 2
            if interior or top_bottom:
                plaq.append((i, j))
    return plaq


class DecodingGraph:
    """Immutable 3-D decoding graph with CSR adjacency.

    Edge arrays (``edge_u``, ``edge_v``, ``edge_kind``, ``weights``) are
    indexed by the dense edge index. ``edge_u`` is always the lower-id
    endpoint and therefore the owner of the edge's growth cell; it is always
    a real vertex.
    """

    def __init__(self, config: GraphConfig, weights: Optional[np.ndarray] = None):
        self.config = config
        d, rounds = config.d, config.rounds
        plaq = _z_plaquettes(d)
        per_round = len(plaq)
        assert per_round == config.ancillas_per_round
        pindex = {p: k for k, p in enumerate(plaq)}

        n_real = per_round * rounds
        n_boundary = 2 * d * rounds
        n = n_real + n_boundary

        v_round = np.empty(n, dtype=np.int64)
        v_row = np.empty(n, dtype=np.int64)
        v_col = np.empty(n, dtype=np.int64)
        for t in range(rounds):
            for k, (i, j) in enumerate(plaq):
                idx = t * per_round + k
                v_round[idx], v_row[idx], v_col[idx] = t, i + 1, j + 1

        eu, ev, kind, qr, qc = [], [], [], [], []
        nb = n_real
        for t in range(rounds):
            base = t * per_round
            for r in range(d):
                for c in range(d):
                    owners = [
                        pindex[(i, j)]
                        for i in (r - 1, r)
                        for j in (c - 1, c)
                        if (i, j) in pindex
                    ]
                    if len(owners) == 2:
                        a, b = sorted(owners)
                        eu.append(base + a)
                        ev.append(base + b)
                        kind.append(SPATIAL)
                    else:
                        assert len(owners) == 1 and c in (0, d - 1)
                        v_round[nb], v_row[nb] = t, r
                        v_col[nb] = 0 if c == 0 else d
                        eu.append(base + owners[0])
                        ev.append(nb)
                        kind.append(BOUNDARY)
                        nb += 1
                    qr.append(r)
                    qc.append(c)
            if t + 1 < rounds:
                for k in range(per_round):
                    eu.append(base + k)
                    ev.append(base + per_round + k)
                    kind.append(TEMPORAL)
                    qr.append(-1)
                    qc.append(-1)
        assert nb == n

        self.n_real = n_real
        self.n_boundary = n_boundary
        self.n_vertices = n
        self.vertex_round = v_round
        self.vertex_row = v_row
        self.vertex_col = v_col
        self.edge_u = np.asarray(eu, dtype=np.int64)
        self.edge_v = np.asarray(ev, dtype=np.int64)
        self.edge_kind = np.asarray(kind, dtype=np.int8)
        self.edge_qubit = np.stack([np.asarray(qr), np.asarray(qc)], axis=1)
        self.n_edges = len(eu)

        if weights is None:
            weights = np.full(self.n_edges, 2, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.int64)
        if weights.shape != (self.n_edges,):
            raise ValueError(f"expected {self.n_edges} weights, got shape {weights.shape}")
        hi = config.w_max if config.weighted else 2
        if weights.min(initial=2) < 2 or weights.max(initial=2) > hi:
            raise ValueError(f"edge weights must lie in [2, {hi}]")
        self.weights = weights

        # CSR adjacency over all vertices; neighbours listed in edge-index order
        ends = np.concatenate([self.edge_u, self.edge_v])
        other = np.concatenate([self.edge_v, self.edge_u])
        eidx = np.concatenate([np.arange(self.n_edges)] * 2)
        order = np.lexsort((eidx, ends))
        self.adj_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(ends, minlength=n), out=self.adj_ptr[1:])
        self.adj_vertex = other[order].astype(np.int64)
        self.adj_edge = eidx[order].astype(np.int64)

        for arr in (self.vertex_round, self.vertex_row, self.vertex_col, self.edge_u,
                    self.edge_v, self.edge_kind, self.edge_qubit, self.weights,
                    self.adj_ptr, self.adj_vertex, self.adj_edge):
            arr.setflags(write=False)

        self._edge_lookup = {
            (int(a), int(b)): e for e, (a, b) in enumerate(zip(self.edge_u, self.edge_v))
        }

    # -- vertex helpers -------------------------------------------------
    def _index(self, vid: int) -> int:
        if not 1 <= vid <= self.n_vertices:
            raise KeyError(f"unknown vertex id {vid}")
        return vid - 1

    def is_boundary(self, vid: int) -> bool:
        return self._index(vid) >= self.n_real

    @property
    def real_ids(self) -> range:
        return range(1, self.n_real + 1)

    @property
    def boundary_ids(self) -> range:
        return range(self.n_real + 1, self.n_vertices + 1)

    def vertex_id(self, round_: int, row: int, col: int) -> int:
        """Id of the real vertex at plaquette row/col (0-based) in a round."""
        for k in range(self.config.ancillas_per_round):
            idx = round_ * self.config.ancillas_per_round + k
            if self.vertex_row[idx] == row and self.vertex_col[idx] == col:
                return idx + 1
        raise KeyError(f"no Z-ancilla at round={round_} row={row} col={col}")

    # -- adjacency queries --------------------------------------------
    def incident_edges(self, vid: int) -> list[int]:
        i = self._index(vid)
        return self.adj_edge[self.adj_ptr[i]:self.adj_ptr[i + 1]].tolist()

    def adjacent_vertices(self, vid: int) -> list[int]:
        i = self._index(vid)
        return (self.adj_vertex[self.adj_ptr[i]:self.adj_ptr[i + 1]] + 1).tolist()

    def degree(self, vid: int) -> int:
        i = self._index(vid)
        return int(self.adj_ptr[i + 1] - self.adj_ptr[i])

    def endpoints(self, e: int) -> tuple[int, int]:
        if not 0 <= e < self.n_edges:
            raise KeyError(f"unknown edge index {e}")
        return int(self.edge_u[e]) + 1, int(self.edge_v[e]) + 1

    def other_endpoint(self, e: int, vid: int) -> int:
        a, b = self.endpoints(e)
        if vid == a:
            return b
        if vid == b:
            return a
        raise KeyError(f"vertex {vid} is not an endpoint of edge {e}")

    def edge_between(self, a: int, b: int) -> int:
        """Edge index joining vertex ids ``a`` and ``b``."""
        key = (min(a, b) - 1, max(a, b) - 1)
        try:
            return self._edge_lookup[key]
        except KeyError:
            raise KeyError(f"vertices {a} and {b} are not adjacent") from None

    def edge_kind_name(self, e: int) -> str:
        return KIND_NAMES[self.edge_kind[e]]

    def kind_counts(self) -> dict[str, int]:
        counts = np.bincount(self.edge_kind, minlength=3)
        return {name: int(c) for name, c in zip(KIND_NAMES, counts)}

    def with_weights(self, weights: np.ndarray) -> "DecodingGraph":
        return DecodingGraph(self.config, weights)

    # -- serialization -----------------------------------------------
    def to_dict(self) -> dict:
        cfg = self.config
        return {
            "config": {"d": cfg.d, "rounds": cfg.rounds, "weighted": cfg.weighted,
                       "w_max": cfg.w_max},
            "vertices": [
                {"id": i + 1, "round": int(self.vertex_round[i]), "row": int(self.vertex_row[i]),
                 "col": int(self.vertex_col[i]), "is_boundary": i >= self.n_real}
                for i in range(self.n_vertices)
            ],
            "edges": [
                {"index": e, "u": int(self.edge_u[e]) + 1, "v": int(self.edge_v[e]) + 1,
                 "kind": KIND_NAMES[self.edge_kind[e]], "w": int(self.weights[e])}
                for e in range(self.n_edges)
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))

    def __repr__(self):
        c = self.config
        return (f"DecodingGraph(d={c.d}, rounds={c.rounds}, real={self.n_real}, "
                f"boundary={self.n_boundary}, edges={self.n_edges})")


def quantize_weights(probabilities: np.ndarray, w_max: int) -> np.ndarray:
    """Map per-edge error probabilities to integer weights in ``[2, w_max]``.

    Weights are linear in ``-log p`` between the batch extremes: the most
    likely edge gets 2 and the least likely gets ``w_max``.
    """
    p = np.asarray(probabilities, dtype=float)
    if np.any((p <= 0) | (p >= 1)):
        raise ValueError("probabilities must lie strictly inside (0, 1)")
    lo, hi = np.log(p.min()), np.log(p.max())
    if hi == lo or w_max == 2:
        return np.full(p.shape, 2, dtype=np.int64)
    scaled = 2 + (w_max - 2) * (hi - np.log(p)) / (hi - lo)
    return np.clip(np.rint(scaled), 2, w_max).astype(np.int64)


def build_decoding_graph(config: GraphConfig,
                         edge_probabilities: Optional[np.ndarray] = None) -> DecodingGraph:
    """Build the decoding graph for ``config``.

    In weighted mode the weights come from ``edge_probabilities`` through
    :func:`quantize_weights`; without probabilities every edge gets ``w = 2``.
    """
    weights = None
    if edge_probabilities is not None:
        if not config.weighted:
            raise ValueError("edge probabilities given for an unweighted graph")
        weights = quantize_weights(edge_probabilities, config.w_max)
    return DecodingGraph(config, weights)


def logical_cut(graph: DecodingGraph) -> list[int]:
    """Boundary edges on the left side, every round.

    A residual error crossing this cut an odd number of times flips the
    logical Z observable.
    """
    mask = (graph.edge_kind == BOUNDARY) & (graph.edge_qubit[:, 1] == 0)
    return np.flatnonzero(mask).tolist()


def logical_cut_mask(graph: DecodingGraph) -> np.ndarray:
    mask = np.zeros(graph.n_edges, dtype=bool)
    mask[logical_cut(graph)] = True
    return mask


def edges_from_indices(graph: DecodingGraph, edges: Iterable[int]) -> np.ndarray:
    """Boolean edge mask from an iterable of edge indices."""
    mask = np.zeros(graph.n_edges, dtype=bool)
    idx = np.fromiter(edges, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= graph.n_edges):
        raise KeyError("edge index out of range")
    mask[idx] = True
    return mask
