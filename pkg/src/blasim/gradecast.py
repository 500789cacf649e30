"""Three sub-round Gradecast with safe-lattice and bad-set filtering.

Every process runs ``n`` instances in parallel, one per leader.  The pure
step functions (:func:`leader_send`, :func:`echo_step`, :func:`confirm_step`,
:func:`grade`) carry the logic; :class:`GradecastRound` wires them to inboxes.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from itertools import chain
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional

from .lattice import Element, member_of_generated, sort_key


class GcMsg(NamedTuple):
    """Wire record ``(gc, leader, sub_round, value)``."""

    leader: int
    step: int
    value: Element


class GradeTriple(NamedTuple):
    leader: int
    value: Optional[Element]
    score: int


EchoTally = Dict[Element, int]  # value -> number of distinct senders


@dataclass
class GradecastFilter:
    """What a process admits: values in the lattice generated by
    ``safe_generators`` (or anything when ``accept_all``), never from a sender
    in ``bad_set``."""

    safe_generators: frozenset = frozenset()
    bad_set: frozenset = frozenset()
    accept_all: bool = False
    _memo: Dict[Element, bool] = field(default_factory=dict, repr=False, compare=False)

    def admits_value(self, value: Element) -> bool:
        if self.accept_all:
            return True
        hit = self._memo.get(value)
        if hit is None:
            hit = self._memo[value] = member_of_generated(self.safe_generators, value)
        return hit

    def admits(self, sender: int, value: Element) -> bool:
        return sender not in self.bad_set and self.admits_value(value)


def plurality(tally: Mapping[Element, int]):
    """Most frequent value and its count; ties go to the smallest canonical value."""
    if len(tally) <= 1:
        return next(iter(tally.items()), (None, 0))
    best = min(tally, key=lambda v: (-tally[v], sort_key(v)))
    return best, tally[best]


def leader_send(leader: int, v: Element) -> GcMsg:
    return GcMsg(leader, 1, v)


def echo_step(received: Optional[Element], flt: GradecastFilter, leader: int) -> Optional[GcMsg]:
    if received is None or not flt.admits(leader, received):
        return None
    return GcMsg(leader, 2, received)


def confirm_step(tally: Mapping[Element, int], n: int, f: int) -> Optional[Element]:
    maj, count = plurality(tally)
    if count >= n - f:
        return maj
    return None


def grade(tally: Mapping[Element, int], n: int, f: int, leader: int) -> GradeTriple:
    maj, count = plurality(tally)
    if count >= n - f:
        return GradeTriple(leader, maj, 2)
    if count >= f + 1:
        return GradeTriple(leader, maj, 1)
    return GradeTriple(leader, None, 0)


# correct senders hand the same immutable tuple to every recipient, so the
# per-sender scan is memoised on that object; the entry keeps it alive, which
# keeps its id from being reused while cached
_FIRSTS: Dict[tuple, tuple] = {}


def _firsts(records, step: int) -> tuple:
    """A sender's first record per instance."""
    key = (id(records), step)
    hit = _FIRSTS.get(key)
    if hit is not None and hit[0] is records:
        return hit[1]
    # walking backwards, earlier records overwrite later ones
    out = tuple({r[0]: r for r in reversed(records) if type(r) is GcMsg and r[1] == step}.values())
    if type(records) is tuple:
        if len(_FIRSTS) >= 4096:
            _FIRSTS.clear()
        _FIRSTS[key] = (records, out)
    return out


# the part of a count that comes from shared tuples is the same for every
# recipient with the same senders, so it is computed once per sub-round
_SHARED: Dict[tuple, tuple] = {}


def _count(inbox: Mapping[int, Iterable], step: int, bad) -> Counter:
    """How many senders outside ``bad`` sent each ``(leader, step, value)`` record."""
    shared, own = [], []
    for sender, records in inbox.items():
        if sender not in bad:
            (shared if type(records) is tuple else own).append(records)
    key = (step, *map(id, shared))
    hit = _SHARED.get(key)
    if hit is not None and all(a is b for a, b in zip(hit[0], shared)):
        counts = hit[1].copy()
    else:
        counts = Counter(chain.from_iterable(_firsts(r, step) for r in shared))
        if len(_SHARED) >= 256:
            _SHARED.clear()
        _SHARED[key] = (tuple(shared), counts.copy())
    for records in own:
        counts.update(_firsts(records, step))
    return counts


class GradecastRound:
    """One process's view of ``n`` parallel Gradecast instances."""

    def __init__(self, me: int, n: int, f: int, flt: GradecastFilter):
        self.me = me
        self.n = n
        self.f = f
        self.flt = flt
        self.from_leader: Dict[int, Element] = {}
        self.echo_tallies: Dict[int, EchoTally] = {}
        self.confirm_tallies: Dict[int, EchoTally] = {}

    def start(self, value: Element) -> List[GcMsg]:
        return [leader_send(self.me, value)]

    def on_leader(self, inbox: Mapping[int, Iterable]) -> List[GcMsg]:
        for sender, records in inbox.items():
            for rec in records:
                # only the leader itself may speak for its instance in sub-round 1
                if type(rec) is GcMsg and rec[1] == 1 and rec[0] == sender:
                    self.from_leader[sender] = rec[2]
                    break
        out = []
        for leader in sorted(self.from_leader):
            msg = echo_step(self.from_leader[leader], self.flt, leader)
            if msg is not None:
                out.append(msg)
        return out

    def _tally(self, inbox: Mapping[int, Iterable], step: int,
               check_values: bool = True) -> Dict[int, Dict[Element, int]]:
        tallies: Dict[int, Dict[Element, int]] = {}
        admits = self.flt.admits_value
        bad = self.flt.bad_set
        # counts per distinct record first; records are (leader, step, value)
        counts = _count(inbox, step, bad)
        for (leader, _, value), c in counts.items():
            if not check_values or admits(value):
                tallies.setdefault(leader, {})[value] = c
        return tallies

    def on_echo(self, inbox: Mapping[int, Iterable]) -> List[GcMsg]:
        self.echo_tallies = self._tally(inbox, 2)
        out = []
        for leader in sorted(self.echo_tallies):
            maj = confirm_step(self.echo_tallies[leader], self.n, self.f)
            if maj is not None:
                out.append(GcMsg(leader, 3, maj))
        return out

    def on_confirm(self, inbox: Mapping[int, Iterable]) -> Dict[int, GradeTriple]:
        # no value filter when grading: a correct confirm already implies f + 1
        # correct echoes of a safe value, and filtering here would let two
        # correct processes grade the same value 2 and 0
        self.confirm_tallies = self._tally(inbox, 3, check_values=False)
        return {
            q: grade(self.confirm_tallies.get(q, {}), self.n, self.f, q)
            for q in range(self.n)
        }
