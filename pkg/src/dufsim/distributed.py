"""Simulation of the distributed Union-Find decoder.

One processing element (PE) per real vertex holds ``cid``, ``parent``,
``st_odd``, ``odd``, ``codd``, ``busy`` and ``stage``; every edge holds a
growth cell owned by its lower-id endpoint. Boundary vertices are passive
endpoints frozen at ``cid = 0`` (below every real id), ``odd = False``, so a
cluster reaching the boundary adopts ``cid = 0`` and turns even.

Two execution models are provided:

* **staged**: the controller sequences Growing, then Merging/Checking
  rounds until no PE is busy. Inside a stage every PE runs once, in a
  seeded random order, reading whatever its neighbours last wrote.
* **synchronous**: a clock-cycle model. Every register is computed from the
  previous cycle's values and all of them commit together. Growing takes
  one cycle, merging and checking run every cycle, and the controller waits
  two cycles after each Growing before it trusts the busy bits.

Parent pointers are stored as vertex indices (id - 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numba
import numpy as np

from .correction import peel
from .graph import DecodingGraph
from .noise import Syndrome
from .serial import _shuffle

GROWING = 0
MERGING = 1
CHECKING = 2
TERMINATE = 3
STAGE_NAMES = ("growing", "merging", "checking", "terminate")

# controller register slots
_GS, _WAIT, _CYCLE, _ITER, _GROW_CYC, _MERGE_CYC = range(6)

DEFAULT_CYCLE_BUDGET = 10**6


class LivenessError(RuntimeError):
    """The simulation did not terminate within its cycle budget."""


class SimState:
    """Registers of every PE, every growth cell and the controller.

    Use :func:`init` to build one from a graph and a syndrome.
    """

    FIELDS = ("cid", "parent", "st_odd", "odd", "codd", "busy", "stage")

    def __init__(self, graph: DecodingGraph, defect: np.ndarray):
        n = graph.n_vertices
        self.graph = graph
        self.m = np.asarray(defect, dtype=np.bool_).copy()
        self.cid = np.arange(1, n + 1, dtype=np.int64)
        self.cid[graph.n_real:] = 0
        self.parent = np.arange(n, dtype=np.int64)
        self.st_odd = self.m.copy()
        self.odd = self.m.copy()
        self.codd = self.m.copy()
        self.busy = np.zeros(n, dtype=np.bool_)
        self.stage = np.full(n, MERGING, dtype=np.int64)
        self.growth = np.zeros(graph.n_edges, dtype=np.int64)
        self.ctrl = np.zeros(6, dtype=np.int64)
        self.ctrl[_GS] = GROWING
        self.ctrl[_ITER] = int(self.m.any())

    # controller views
    @property
    def global_stage(self) -> str:
        return STAGE_NAMES[self.ctrl[_GS]]

    @property
    def terminated(self) -> bool:
        return self.ctrl[_GS] == TERMINATE

    @property
    def cycle(self) -> int:
        return int(self.ctrl[_CYCLE])

    @property
    def growth_iterations(self) -> int:
        return int(self.ctrl[_ITER])

    @property
    def fully_grown(self) -> np.ndarray:
        return self.growth >= self.graph.weights

    def registers(self) -> dict:
        """Copy of every per-vertex register, keyed by field name."""
        return {f: getattr(self, f).copy() for f in self.FIELDS}

    def copy(self) -> "SimState":
        other = object.__new__(SimState)
        other.graph = self.graph
        for name in ("m", "growth", "ctrl") + self.FIELDS:
            setattr(other, name, getattr(self, name).copy())
        return other


def init(graph: DecodingGraph, syndrome: Syndrome) -> SimState:
    """Reset state: ``cid = id``, ``odd = st_odd = m``, ``parent = self``."""
    return SimState(graph, syndrome.mask(graph))


@dataclass
class DistDecodeResult:
    cid: np.ndarray
    parent: np.ndarray
    growth: np.ndarray
    fully_grown: np.ndarray
    labels: np.ndarray
    growth_iterations: int
    correction: np.ndarray
    cycles: Optional[int] = None
    stage_counts: dict = field(default_factory=dict)

    def partition(self, n_real: int) -> np.ndarray:
        return self.labels[:n_real].copy()

    def clusters(self, n_real: int) -> list[frozenset]:
        groups: dict[int, set] = {}
        for i, lab in enumerate(self.labels[:n_real]):
            groups.setdefault(int(lab), set()).add(i + 1)
        return sorted((frozenset(g) for g in groups.values()), key=min)


# ---------------------------------------------------------------------------
# synchronous (clocked) model

@numba.njit(cache=True)
def _sync_cycle(adj_ptr, adj_vertex, adj_edge, edge_u, edge_v, w, m, n_real,
                cid, parent, st_odd, odd, codd, busy, stage, growth,
                n_cid, n_parent, n_st_odd, n_odd, n_codd, n_busy, n_stage, n_growth,
                ctrl, touched):
    """Advance one clock edge: read the first register set, write the second.

    ``touched[v]`` marks vertices with a fully-grown incident edge; it is
    updated in place for the next cycle.
    """
    gs = ctrl[_GS]
    n = cid.shape[0]
    # explicit loops: slice assignment is far slower under numba
    for i in range(n):
        n_cid[i] = cid[i]
        n_parent[i] = parent[i]
        n_st_odd[i] = st_odd[i]
        n_odd[i] = odd[i]
        n_codd[i] = codd[i]
        n_busy[i] = busy[i]
        n_stage[i] = stage[i]
    for e in range(growth.shape[0]):
        n_growth[e] = growth[e]
    if gs == TERMINATE:
        return

    for v in range(n_real):
        # stage transition
        if gs == GROWING:
            n_stage[v] = GROWING
        elif stage[v] == GROWING:
            n_stage[v] = MERGING

        if not touched[v]:
            # no neighbours and no children: the merging and checking logic
            # reduces to these assignments
            n_st_odd[v] = m[v]
            n_odd[v] = st_odd[v]
            n_busy[v] = st_odd[v] != m[v] or odd[v] != st_odd[v]
            n_codd[v] = odd[v]
            continue

        best = cid[v]
        best_u = parent[v]
        subtree = m[v]
        b = False
        for k in range(adj_ptr[v], adj_ptr[v + 1]):
            u = adj_vertex[k]
            if parent[u] == v:
                subtree ^= st_odd[u]
            e = adj_edge[k]
            if growth[e] >= w[e]:
                if cid[u] < best:
                    best = cid[u]
                    best_u = u
                if cid[u] != cid[v] or odd[u] != odd[v]:
                    b = True
        # merging: three independent registers
        n_cid[v] = best
        n_parent[v] = best_u
        n_st_odd[v] = subtree
        if parent[v] == v:
            n_odd[v] = st_odd[v]
        else:
            n_odd[v] = odd[parent[v]]
        # checking
        if not b and st_odd[v] != subtree:
            b = True
        if not b and parent[v] == v and odd[v] != st_odd[v]:
            b = True
        n_busy[v] = b
        n_codd[v] = odd[v]

    # growing, performed by the owner (lower id) of each edge
    for e in range(w.shape[0]):
        a = edge_u[e]
        if stage[a] != GROWING:
            continue
        c = edge_v[e]
        if growth[e] < w[e] and cid[a] != cid[c]:
            inc = np.int64(odd[a]) + np.int64(odd[c])
            g = growth[e] + inc
            if g >= w[e]:
                g = w[e]
                touched[a] = True
                touched[c] = True
            n_growth[e] = g

    # controller
    ctrl[_CYCLE] += 1
    if gs == GROWING:
        ctrl[_GROW_CYC] += 1
        ctrl[_GS] = MERGING
        ctrl[_WAIT] = 2
        return
    ctrl[_MERGE_CYC] += 1
    if ctrl[_WAIT] > 0:
        ctrl[_WAIT] -= 1
        return
    any_busy = False
    any_odd = False
    for v in range(n):
        if busy[v]:
            any_busy = True
        if codd[v]:
            any_odd = True
    if not any_busy:
        if any_odd:
            ctrl[_GS] = GROWING
            ctrl[_ITER] += 1
        else:
            ctrl[_GS] = TERMINATE


@numba.njit(cache=True)
def _sync_run(adj_ptr, adj_vertex, adj_edge, edge_u, edge_v, w, m, n_real,
              cid, parent, st_odd, odd, codd, busy, stage, growth, ctrl, budget):
    """Clock until terminate; results land back in the passed arrays."""
    a_cid, a_parent, a_st, a_odd = cid.copy(), parent.copy(), st_odd.copy(), odd.copy()
    a_codd, a_busy, a_stage, a_growth = codd.copy(), busy.copy(), stage.copy(), growth.copy()
    b_cid, b_parent, b_st, b_odd = cid.copy(), parent.copy(), st_odd.copy(), odd.copy()
    b_codd, b_busy, b_stage, b_growth = codd.copy(), busy.copy(), stage.copy(), growth.copy()
    touched = np.zeros(cid.shape[0], np.bool_)
    for e in range(w.shape[0]):
        if growth[e] >= w[e]:
            touched[edge_u[e]] = True
            touched[edge_v[e]] = True
    steps = 0
    while ctrl[_GS] != TERMINATE and steps < budget:
        _sync_cycle(adj_ptr, adj_vertex, adj_edge, edge_u, edge_v, w, m, n_real,
                    a_cid, a_parent, a_st, a_odd, a_codd, a_busy, a_stage, a_growth,
                    b_cid, b_parent, b_st, b_odd, b_codd, b_busy, b_stage, b_growth, ctrl,
                    touched)
        a_cid, b_cid = b_cid, a_cid
        a_parent, b_parent = b_parent, a_parent
        a_st, b_st = b_st, a_st
        a_odd, b_odd = b_odd, a_odd
        a_codd, b_codd = b_codd, a_codd
        a_busy, b_busy = b_busy, a_busy
        a_stage, b_stage = b_stage, a_stage
        a_growth, b_growth = b_growth, a_growth
        steps += 1
    for i in range(cid.shape[0]):
        cid[i] = a_cid[i]
        parent[i] = a_parent[i]
        st_odd[i] = a_st[i]
        odd[i] = a_odd[i]
        codd[i] = a_codd[i]
        busy[i] = a_busy[i]
        stage[i] = a_stage[i]
    for e in range(growth.shape[0]):
        growth[e] = a_growth[e]
    return ctrl[_GS] == TERMINATE


def _graph_args(graph: DecodingGraph):
    return (graph.adj_ptr, graph.adj_vertex, graph.adj_edge, graph.edge_u, graph.edge_v,
            graph.weights)


def step_synchronous(sim: SimState) -> SimState:
    """Advance ``sim`` by one clock cycle in place and return it."""
    if sim.terminated:
        raise RuntimeError("simulation already terminated")
    prev = sim.copy()
    g = sim.graph
    _sync_cycle(*_graph_args(g), sim.m, g.n_real,
                prev.cid, prev.parent, prev.st_odd, prev.odd, prev.codd, prev.busy,
                prev.stage, prev.growth,
                sim.cid, sim.parent, sim.st_odd, sim.odd, sim.codd, sim.busy,
                sim.stage, sim.growth, sim.ctrl, _touched(g, prev.growth))
    return sim


def _touched(graph: DecodingGraph, growth: np.ndarray) -> np.ndarray:
    grown = growth >= graph.weights
    t = np.zeros(graph.n_vertices, dtype=np.bool_)
    t[graph.edge_u[grown]] = True
    t[graph.edge_v[grown]] = True
    return t


def trace_changes(before: SimState, after: SimState) -> list[tuple]:
    """``(cycle, vertex_id, field, old, new)`` for every register that changed.

    Growth cells are reported under the owner's id as ``growth[e]``.
    """
    cycle = after.cycle
    rows = []
    for f in SimState.FIELDS:
        old, new = getattr(before, f), getattr(after, f)
        for i in np.flatnonzero(old != new):
            o, nw = old[i], new[i]
            if f == "parent":
                o, nw = o + 1, nw + 1
            elif f == "stage":
                o, nw = STAGE_NAMES[o], STAGE_NAMES[nw]
            rows.append((cycle, int(i) + 1, f, _plain(o), _plain(nw)))
    for e in np.flatnonzero(before.growth != after.growth):
        rows.append((cycle, int(after.graph.edge_u[e]) + 1, f"growth[{e}]",
                     int(before.growth[e]), int(after.growth[e])))
    if before.ctrl[_GS] != after.ctrl[_GS]:
        rows.append((cycle, 0, "global_stage", STAGE_NAMES[before.ctrl[_GS]],
                     STAGE_NAMES[after.ctrl[_GS]]))
    return rows


def _plain(x):
    if isinstance(x, (np.bool_, bool)):
        return int(x)
    return x.item() if hasattr(x, "item") else x


def run_synchronous(graph: DecodingGraph, syndrome: Syndrome,
                    max_cycles: int = DEFAULT_CYCLE_BUDGET,
                    trace: Optional[Callable[[tuple], None]] = None) -> DistDecodeResult:
    """Clock the decoder until the controller signals terminate.

    ``trace`` receives one ``(cycle, vertex_id, field, old, new)`` tuple per
    changed register. Raises :class:`LivenessError` past ``max_cycles``.
    """
    sim = init(graph, syndrome)
    if trace is None:
        done = _sync_run(*_graph_args(graph), sim.m, graph.n_real,
                         sim.cid, sim.parent, sim.st_odd, sim.odd, sim.codd, sim.busy,
                         sim.stage, sim.growth, sim.ctrl, max_cycles)
    else:
        while not sim.terminated and sim.cycle < max_cycles:
            before = sim.copy()
            step_synchronous(sim)
            for row in trace_changes(before, sim):
                trace(row)
        done = sim.terminated
    if not done:
        raise LivenessError(
            f"no termination after {max_cycles} cycles (d={graph.config.d}, "
            f"defects={syndrome.defects.tolist()})")
    res = _result(sim, syndrome)
    res.cycles = sim.cycle
    res.stage_counts = {"growing": int(sim.ctrl[_GROW_CYC]),
                        "merging": int(sim.ctrl[_MERGE_CYC])}
    return res


# ---------------------------------------------------------------------------
# staged model

@numba.njit(cache=True)
def _staged_run(adj_ptr, adj_vertex, adj_edge, w, m, n_real,
                cid, parent, st_odd, odd, codd, busy, stage, growth, ctrl, counts,
                seed, budget):
    """Controller loop over Growing and Merging/Checking stages.

    ``counts`` receives the number of growing, merging and checking stages.
    Returns False if ``budget`` stages pass without termination.
    """
    order = np.arange(n_real)
    state = np.uint64(seed)
    total = 0
    any_odd = False
    for v in range(n_real):
        if codd[v]:
            any_odd = True
            break
    if not any_odd:
        ctrl[_GS] = TERMINATE
        return True
    while True:
        # Growing
        state = _shuffle(order, n_real, state)
        for i in range(n_real):
            v = order[i]
            stage[v] = GROWING
            if odd[v]:
                for k in range(adj_ptr[v], adj_ptr[v + 1]):
                    e = adj_edge[k]
                    if growth[e] < w[e] and cid[adj_vertex[k]] != cid[v]:
                        growth[e] += 1
        counts[0] += 1
        total += 1
        # Merging and Checking until no PE is busy
        while True:
            state = _shuffle(order, n_real, state)
            for i in range(n_real):
                v = order[i]
                stage[v] = MERGING
                for k in range(adj_ptr[v], adj_ptr[v + 1]):
                    u = adj_vertex[k]
                    if growth[adj_edge[k]] >= w[adj_edge[k]] and cid[u] < cid[v]:
                        cid[v] = cid[u]
                        parent[v] = u
                s = m[v]
                for k in range(adj_ptr[v], adj_ptr[v + 1]):
                    u = adj_vertex[k]
                    if parent[u] == v:
                        s ^= st_odd[u]
                st_odd[v] = s
                if parent[v] == v:
                    odd[v] = st_odd[v]
                else:
                    odd[v] = odd[parent[v]]
            counts[1] += 1
            state = _shuffle(order, n_real, state)
            any_busy = False
            for i in range(n_real):
                v = order[i]
                ok = True
                s = m[v]
                for k in range(adj_ptr[v], adj_ptr[v + 1]):
                    u = adj_vertex[k]
                    if parent[u] == v:
                        s ^= st_odd[u]
                    if growth[adj_edge[k]] >= w[adj_edge[k]]:
                        if cid[u] != cid[v] or odd[u] != odd[v]:
                            ok = False
                if st_odd[v] != s:
                    ok = False
                if parent[v] == v and odd[v] != st_odd[v]:
                    ok = False
                busy[v] = not ok
                codd[v] = odd[v]
                stage[v] = CHECKING
                any_busy |= not ok
            counts[2] += 1
            total += 2
            if not any_busy:
                break
            if total > budget:
                return False
        any_odd = False
        for v in range(n_real):
            if codd[v]:
                any_odd = True
                break
        if not any_odd:
            ctrl[_GS] = TERMINATE
            return True
        ctrl[_ITER] += 1
        if total > budget:
            return False


def run_staged(graph: DecodingGraph, syndrome: Syndrome, schedule_seed: int = 0,
               max_stages: int = DEFAULT_CYCLE_BUDGET) -> DistDecodeResult:
    """Run the stage-synchronised decoder with a seeded PE visiting order."""
    sim = init(graph, syndrome)
    counts = np.zeros(3, dtype=np.int64)
    done = _staged_run(graph.adj_ptr, graph.adj_vertex, graph.adj_edge, graph.weights,
                       sim.m, graph.n_real, sim.cid, sim.parent, sim.st_odd, sim.odd,
                       sim.codd, sim.busy, sim.stage, sim.growth, sim.ctrl, counts,
                       np.uint64(schedule_seed), max_stages)
    if not done:
        raise LivenessError(f"staged run exceeded {max_stages} stages")
    res = _result(sim, syndrome)
    res.stage_counts = dict(zip(("growing", "merging", "checking"), counts.tolist()))
    return res


# ---------------------------------------------------------------------------
# results

@numba.njit(cache=True)
def _labels(cid, adj_ptr, adj_vertex, adj_edge, grown, n_real):
    """Minimum real index of each real vertex's cluster.

    Clusters with ``cid > 0`` are named by their root; every boundary
    cluster shares ``cid = 0``, so those are split by a search over
    fully-grown real-real edges.
    """
    labels = np.full(n_real, -1, np.int64)
    queue = np.empty(n_real, np.int64)
    for v in range(n_real):
        if cid[v] > 0:
            labels[v] = cid[v] - 1
    for v in range(n_real):
        if labels[v] >= 0:
            continue
        labels[v] = v
        head = 0
        tail = 1
        queue[0] = v
        while head < tail:
            x = queue[head]
            head += 1
            for k in range(adj_ptr[x], adj_ptr[x + 1]):
                y = adj_vertex[k]
                if y < n_real and grown[adj_edge[k]] and labels[y] < 0:
                    labels[y] = v
                    queue[tail] = y
                    tail += 1
    return labels


def partition_of(sim: SimState) -> np.ndarray:
    """Cluster label per real vertex (the minimum real index in its cluster)."""
    if not sim.terminated:
        raise RuntimeError("partition requested before termination")
    g = sim.graph
    return _labels(sim.cid, g.adj_ptr, g.adj_vertex, g.adj_edge, sim.fully_grown, g.n_real)


def _result(sim: SimState, syndrome: Syndrome) -> DistDecodeResult:
    g = sim.graph
    grown = sim.fully_grown
    labels = partition_of(sim)
    correction = peel(g, sim.parent, grown, syndrome.defects)
    return DistDecodeResult(
        cid=sim.cid.copy(), parent=sim.parent.copy(), growth=sim.growth.copy(),
        fully_grown=grown, labels=labels, growth_iterations=sim.growth_iterations,
        correction=correction)
