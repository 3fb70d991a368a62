"""Outcome logic for programs with probabilistic and demonic choice.

Programs in a small imperative language are given a semantics in up-closed
convex sets of subdistributions; outcome assertions are checked against
them, and proof scripts in the logic are checked rule by rule.
"""

from .assertions import (
    Almost, Amp, And, Assertion, Bot, OPlus, Proved, Refuted, Top, Unknown, equivalent, implies,
    satisfiable, satisfies,
)
from .convex import ConvexSet, GeneratorCapExceeded, amp, kleisli, oplus, unit
from .dist import Dist, dirac
from .lang import BOT, Program, State
from .parser import ParseError, parse_assertion, parse_cmd, parse_exp, parse_program
from .proof import (
    CheckReport, Derivation, Triple, check_derivation, check_script, check_triple_exhaustive,
    check_triple_semantic, load_script, standard_witnesses,
)
from .semantics import DenoteResult, denote, denote_dist, loop_iterate, min_termination_prob
from .simulate import MCResult, mc_simulate

__version__ = "0.1.0"

__all__ = [
    "Almost", "Amp", "And", "Assertion", "BOT", "Bot", "CheckReport", "ConvexSet", "DenoteResult",
    "Derivation", "Dist", "GeneratorCapExceeded", "MCResult", "OPlus", "ParseError", "Program",
    "Proved", "Refuted", "State", "Top", "Triple", "Unknown", "amp", "check_derivation", "check_script",
    "check_triple_exhaustive", "check_triple_semantic", "denote", "denote_dist", "dirac", "equivalent",
    "implies", "kleisli", "load_script", "loop_iterate", "mc_simulate", "min_termination_prob", "oplus",
    "parse_assertion", "parse_cmd", "parse_exp", "parse_program", "satisfiable", "satisfies",
    "standard_witnesses", "unit",
]
