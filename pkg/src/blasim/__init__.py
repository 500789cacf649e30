"""Simulator and checkers for synchronous Byzantine lattice agreement."""

from .adversary import ConfigError, builtin_adversaries
from .checker import Verdict, check_comparability, check_downward, check_round_bound, check_upward
from .lattice import BOTTOM, Element, Universe, comparable, element, join, join_all, leq, member_of_generated
from .sim import Envelope, RunConfig, RunReport, count_messages, report, run, simulate

__all__ = [
    "BOTTOM", "ConfigError", "Element", "Envelope", "RunConfig", "RunReport", "Universe", "Verdict",
    "builtin_adversaries", "check_comparability", "check_downward", "check_round_bound",
    "check_upward", "comparable", "count_messages", "element", "join", "join_all", "leq",
    "member_of_generated", "report",
    "run", "simulate",
]
