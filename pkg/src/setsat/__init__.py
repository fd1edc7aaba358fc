"""Satisfiability of set-theory formulas with powerset and finiteness over HF sets."""

from .errors import (
    ChainViolation, ImitationViolation, MarkingViolation, ParseError, ProcessViolation, PumpError,
    ResourceLimitError, SetsatError, SimulationViolation, Violation, WitnessViolation,
)
from .hfset import EMPTY, HFSet, hf
from .solver import (
    NoModelUpTo, Sat, SatWitness, Unsat, Witness, decide, decide_mlssp, decide_mlsspf,
    oracle_satisfies, rank_bound_c, verify_witness,
)
from .syntax import conjunction, normalize, parse

__all__ = [
    "EMPTY", "HFSet", "hf", "parse", "normalize", "conjunction",
    "decide", "decide_mlssp", "decide_mlsspf", "verify_witness", "oracle_satisfies", "rank_bound_c",
    "Sat", "SatWitness", "NoModelUpTo", "Unsat", "Witness",
    "SetsatError", "ResourceLimitError", "ParseError", "Violation", "ProcessViolation",
    "MarkingViolation", "ChainViolation", "SimulationViolation", "ImitationViolation",
    "WitnessViolation", "PumpError",
]
