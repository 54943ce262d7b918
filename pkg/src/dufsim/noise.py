"""Phenomenological noise sampled directly on decoding-graph edges.

Flipping a spatial or boundary edge is a data-qubit X error in one round;
flipping a temporal edge is a measurement error between consecutive rounds.
Every trial draws from its own stream keyed by ``(seed, trial)``, so a trial
can be regenerated on its own, in any order, by any worker.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .graph import DecodingGraph


def trial_rng(seed: int, trial: int = 0) -> np.random.Generator:
    """Independent generator for one trial of a seeded experiment."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(trial)]))


@dataclass
class ErrorPattern:
    """Edges flipped in one shot, as sorted edge indices."""

    flipped: np.ndarray
    probabilities: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.flipped = np.unique(np.asarray(self.flipped, dtype=np.int64))

    def mask(self, n_edges: int) -> np.ndarray:
        m = np.zeros(n_edges, dtype=bool)
        m[self.flipped] = True
        return m

    def __len__(self):
        return len(self.flipped)


@dataclass
class Syndrome:
    """Defect vertex ids of one shot, optionally paired with their cause."""

    defects: np.ndarray
    errors: Optional[ErrorPattern] = None

    def __post_init__(self):
        self.defects = np.unique(np.asarray(self.defects, dtype=np.int64))

    def __len__(self):
        return len(self.defects)

    def mask(self, graph: DecodingGraph) -> np.ndarray:
        """Boolean defect flag per vertex index (real and boundary)."""
        if self.defects.size and (self.defects.min() < 1 or self.defects.max() > graph.n_real):
            raise ValueError("defects must be real vertex ids")
        m = np.zeros(graph.n_vertices, dtype=bool)
        m[self.defects - 1] = True
        return m


def sample_errors(graph: DecodingGraph, p: Union[float, np.ndarray], rng_seed: int,
                  trial: int = 0) -> ErrorPattern:
    """Flip every edge independently with probability ``p``.

    ``p`` may be a scalar or a per-edge array (weighted experiments).
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1)):
        raise ValueError(f"error probability must lie in [0, 1], got {p!r}")
    if p_arr.ndim and p_arr.shape != (graph.n_edges,):
        raise ValueError(f"expected {graph.n_edges} edge probabilities, got {p_arr.shape}")
    rng = trial_rng(rng_seed, trial)
    flipped = np.flatnonzero(rng.random(graph.n_edges) < p_arr)
    return ErrorPattern(flipped, p_arr if p_arr.ndim else None)


def syndrome_from_errors(graph: DecodingGraph, errors: ErrorPattern) -> Syndrome:
    """Real vertices touched by an odd number of flipped edges."""
    flipped = errors.flipped
    if flipped.size and (flipped.min() < 0 or flipped.max() >= graph.n_edges):
        raise ValueError("error pattern refers to unknown edges")
    ends = np.concatenate([graph.edge_u[flipped], graph.edge_v[flipped]])
    parity = np.bincount(ends, minlength=graph.n_vertices)[:graph.n_real] & 1
    return Syndrome(np.flatnonzero(parity) + 1, errors)


def sample_syndrome(graph: DecodingGraph, p: Union[float, np.ndarray], rng_seed: int,
                    trial: int = 0) -> Syndrome:
    return syndrome_from_errors(graph, sample_errors(graph, p, rng_seed, trial))


def sample_weighted_probabilities(graph: DecodingGraph, mean: float = 0.001,
                                  stddev: float = 0.0005, rng_seed: int = 0) -> np.ndarray:
    """Per-edge error probabilities drawn i.i.d. from ``normal(mean, stddev)``.

    Draws outside ``(0, 0.5)`` are redrawn.
    """
    if not 0 < mean < 0.5:
        raise ValueError(f"mean must lie in (0, 0.5), got {mean!r}")
    if stddev < 0:
        raise ValueError(f"stddev must be non-negative, got {stddev!r}")
    # offset keeps this stream apart from the per-trial error streams
    rng = np.random.default_rng(np.random.SeedSequence([int(rng_seed), 0x5EED, 0xB1A5]))
    p = rng.normal(mean, stddev, graph.n_edges)
    bad = (p <= 0) | (p >= 0.5)
    while bad.any():
        p[bad] = rng.normal(mean, stddev, int(bad.sum()))
        bad = (p <= 0) | (p >= 0.5)
    return p
