"""Serial and distributed Union-Find decoding of the rotated surface code."""

from .correction import (DecoderError, ShotOutcome, check_annihilation,
                         check_logical_failure, peel, score_shot)
from .distributed import (DistDecodeResult, LivenessError, SimState, init, partition_of,
                          run_staged, run_synchronous, step_synchronous)
from .graph import DecodingGraph, GraphConfig, build_decoding_graph, logical_cut, quantize_weights
from .harness import (ExperimentConfig, TrialStats, format_report, replay, run_experiment,
                      sweep)
from .noise import (ErrorPattern, Syndrome, sample_errors, sample_syndrome,
                    sample_weighted_probabilities, syndrome_from_errors)
from .serial import SerialDecodeResult, UnionFind, decode_serial

__all__ = [
    "DecoderError", "ShotOutcome", "check_annihilation", "check_logical_failure", "peel",
    "score_shot", "DistDecodeResult", "LivenessError", "SimState", "init", "partition_of",
    "run_staged", "run_synchronous", "step_synchronous", "DecodingGraph", "GraphConfig",
    "build_decoding_graph", "logical_cut", "quantize_weights", "ExperimentConfig",
    "TrialStats", "format_report", "replay", "run_experiment", "sweep", "ErrorPattern",
    "Syndrome", "sample_errors", "sample_syndrome", "sample_weighted_probabilities",
    "syndrome_from_errors", "SerialDecodeResult", "UnionFind", "decode_serial",
]
