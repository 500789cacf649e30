"""Early-stopping lattice agreement in O(sqrt f) rounds.

Each outer round every process gradecasts its current value, keeps the
values graded at least 1 as its new safe generators, marks every leader graded
at most 1 as Byzantine, decides once its value is comparable with every value
graded 2, and moves to the join of the values graded 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional

from .gradecast import GradecastFilter, GradecastRound, GradeTriple
from .lattice import Element, comparable, join_all


class ProtocolError(RuntimeError):
    """A correct process broke a guarantee the protocol promises."""


class HarnessError(RuntimeError):
    """The simulator fed a process something impossible (a simulator bug)."""


@dataclass(frozen=True)
class SqrtfState:
    v: Element
    bad: frozenset = frozenset()
    sv: frozenset = frozenset()
    round: int = 0
    term_round: int = 0
    decided_at: Optional[int] = None
    y: Optional[Element] = None


@dataclass(frozen=True)
class RoundDigest:
    u1: frozenset
    u2: frozenset
    newly_bad: frozenset


def ceil_sqrt(k: int) -> int:
    return math.isqrt(k - 1) + 1 if k > 0 else 0


def round_cap(f: int, lattice_height: int) -> int:
    """Initial termination round ``min(h(X) + 2, 2*ceil(sqrt f) + 2)``."""
    return min(lattice_height + 2, 2 * ceil_sqrt(f) + 2)


def sqrtf_round(state: SqrtfState, triples: Mapping[int, GradeTriple], n: int):
    """Apply one outer round's ``n`` grade triples.  Returns ``(state, digest)``."""
    if len(triples) != n:
        raise HarnessError(f"expected {n} grade triples, got {len(triples)}")
    r = state.round + 1
    u1 = frozenset(t.value for t in triples.values() if t.score >= 1)
    u2 = frozenset(t.value for t in triples.values() if t.score == 2)
    flagged = frozenset(q for q, t in triples.items() if t.score <= 1)
    newly_bad = flagged - state.bad
    y, decided_at = state.y, state.decided_at
    if decided_at is None and all(comparable(state.v, u) for u in u2):
        y, decided_at = state.v, r
    new = replace(
        state,
        v=join_all(u2),
        bad=state.bad | flagged,
        sv=u1,
        round=r,
        y=y,
        decided_at=decided_at,
    )
    return new, RoundDigest(u1, u2, newly_bad)


def update_term_round(state: SqrtfState, newly_bad: int) -> SqrtfState:
    return replace(state, term_round=min(state.term_round, state.round + newly_bad + 2))


def sqrtf_output(state: SqrtfState) -> Element:
    if state.decided_at is None:
        raise ProtocolError(f"undecided at termination round {state.term_round}")
    return state.y


class SqrtfProcess:
    """Drives one process through successive outer rounds until its termination round."""

    algorithm = "sqrtf"

    def __init__(self, pid: int, n: int, f: int, x: Element, lattice_height: int):
        self.pid = pid
        self.n = n
        self.f = f
        self.x = x
        self.state = SqrtfState(v=x, term_round=round_cap(f, lattice_height))
        self.history: List[dict] = []
        self.gc: Optional[GradecastRound] = None

    def protocol(self):
        s = self.state
        while True:
            flt = GradecastFilter(s.sv, s.bad, accept_all=s.round == 0)
            self.gc = gc = GradecastRound(self.pid, self.n, self.f, flt)
            inbox = yield [(None, m) for m in gc.start(s.v)]
            inbox = yield [(None, m) for m in gc.on_leader(inbox)]
            inbox = yield [(None, m) for m in gc.on_echo(inbox)]
            triples = gc.on_confirm(inbox)
            before = s
            s, digest = sqrtf_round(s, triples, self.n)
            s = update_term_round(s, len(digest.newly_bad))
            self.state = s
            self.history.append({
                "round": s.round,
                "v_before": before.v,
                "v": s.v,
                "sv": s.sv,
                "bad": s.bad,
                "u1": digest.u1,
                "u2": digest.u2,
                "newly_bad": digest.newly_bad,
                "triples": dict(triples),
                "decided_at": s.decided_at,
                "y": s.y,
                "term_round": s.term_round,
            })
            if s.round >= s.term_round:
                return

    @property
    def output(self) -> Optional[Element]:
        return self.state.y

    @property
    def decided_at(self) -> Optional[int]:
        return self.state.decided_at

    def safe_values(self, leader: int, label=None):
        """Admissible values for messages from ``leader`` (used by adversaries)."""
        return self.state.sv
