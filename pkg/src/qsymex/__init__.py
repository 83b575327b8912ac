"""Symbolic execution of stabilizer quantum programs with classical control."""

__version__ = "0.1.0"

from .pauli import PauliString, PhasedPauli, commutes, conj_clifford, mul
from .symexpr import (
    FALSE,
    TRUE,
    AtomTable,
    BoolExpr,
    FreshGen,
    Var,
    band,
    bnot,
    bor,
    bxor,
    count_le,
    evaluate,
    simplify,
    substitute,
    to_smt,
)
from .symstab import MeasResult, SymTableau, equality_formula
from .chp import ConcreteTableau
from .qprog import Program, parse, pretty, validate
from .engine import Config, Engine, ExternalFnSpec, concrete_run, explore
from .smt import SolverConfig, check, check_formula, emit_script
from .codes import CodeSpec, inject_errors, repetition, tanner, tanner_code, toric, toric_code
from .verify import replay, verify_decoder
from .sampler import compile_sampler, gen_layered_random_circuit

__all__ = [
    "PauliString",
    "PhasedPauli",
    "commutes",
    "conj_clifford",
    "mul",
    "FALSE",
    "TRUE",
    "AtomTable",
    "BoolExpr",
    "FreshGen",
    "Var",
    "band",
    "bnot",
    "bor",
    "bxor",
    "count_le",
    "evaluate",
    "simplify",
    "substitute",
    "to_smt",
    "MeasResult",
    "SymTableau",
    "equality_formula",
    "ConcreteTableau",
    "Program",
    "parse",
    "pretty",
    "validate",
    "Config",
    "Engine",
    "ExternalFnSpec",
    "concrete_run",
    "explore",
    "SolverConfig",
    "check",
    "check_formula",
    "emit_script",
    "CodeSpec",
    "inject_errors",
    "repetition",
    "tanner",
    "tanner_code",
    "toric",
    "toric_code",
    "replay",
    "verify_decoder",
    "compile_sampler",
    "gen_layered_random_circuit",
]
