"""Lattice agreement in ``3 * ceil(log2 n) + 3`` sub-rounds.

One Gradecast round seeds a per-sender safe array; then each group of ids is
split into a lower (slave) and upper (master) half, the slaves SetGradecast
their value sets, slaves replace their set with what was graded 2 and masters
add what was graded at least 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, Mapping, Optional, Tuple

from .gradecast import GradecastFilter, GradecastRound, GradeTriple
from .lattice import Element, join_all
from .setgradecast import ScoredSet, SetGcFilter, SetGradecastRound

Interval = Tuple[int, int]  # half-open id range [lo, hi)


def ceil_log2(k: int) -> int:
    return (k - 1).bit_length() if k > 1 else 0


@dataclass(frozen=True)
class GroupSplit:
    group: Interval
    slaves: Interval
    masters: Interval


def split(group: Interval) -> Optional[GroupSplit]:
    """Lower ``ceil(|G|/2)`` ids are slaves; singletons are not split."""
    lo, hi = group
    if hi - lo <= 1:
        return None
    mid = lo + (hi - lo + 1) // 2
    return GroupSplit(group, (lo, mid), (mid, hi))


def groups_at(n: int, r: int) -> List[Interval]:
    """The groups that are divided during iteration ``r`` (1-based)."""
    groups = [(0, n)]
    for _ in range(r - 1):
        nxt = []
        for g in groups:
            s = split(g)
            nxt.extend([g] if s is None else [s.slaves, s.masters])
        groups = nxt
    return groups


def in_interval(i: int, iv: Interval) -> bool:
    return iv[0] <= i < iv[1]


@dataclass(frozen=True)
class LognState:
    V: frozenset
    S: tuple  # S[j]: safe value set for sender j
    group: Interval
    round: int = 0


def logn_initial_round(pid: int, x: Element, triples: Mapping[int, GradeTriple], n: int) -> LognState:
    u = frozenset(t.value for t in triples.values() if t.score >= 1)
    return LognState(V=frozenset([x]), S=(u,) * n, group=(0, n), round=0)


def logn_iteration(state: LognState, pid: int, n: int, r: int,
                   scored: Mapping[int, List[ScoredSet]]) -> LognState:
    S = list(state.S)
    V, group = state.V, state.group
    for g in groups_at(n, r):
        sp = split(g)
        if sp is None:
            continue
        u1: set = set()
        u2: set = set()
        for j in range(*sp.slaves):
            for ss in scored.get(j, ()):
                if ss.label is None:
                    u1 |= ss.at_least(1)
                    u2 |= ss.at_least(2)
        u1f, u2f = frozenset(u1), frozenset(u2)
        for j in range(*sp.slaves):
            S[j] = u2f
        for j in range(*sp.masters):
            S[j] = S[j] | u1f
        if in_interval(pid, sp.slaves):
            V, group = u2f, sp.slaves
        elif in_interval(pid, sp.masters):
            # masters keep their set: the persistence argument for correct values
            # needs V to shrink only on the slave side
            V, group = V | u1f, sp.masters
    return replace(state, V=V, S=tuple(S), group=group, round=r)


def logn_output(state: LognState) -> Element:
    return join_all(state.V)


class LognProcess:
    algorithm = "logn"

    def __init__(self, pid: int, n: int, f: int, x: Element, cap: Optional[int] = None):
        self.pid = pid
        self.n = n
        self.f = f
        self.x = x
        self.cap = cap
        self.iterations = ceil_log2(n)
        self.state: Optional[LognState] = None
        self.history: List[dict] = []
        self.gc: Optional[GradecastRound] = None
        self.sgc: Optional[SetGradecastRound] = None

    def protocol(self):
        self.gc = gc = GradecastRound(self.pid, self.n, self.f, GradecastFilter(accept_all=True))
        inbox = yield [(None, m) for m in gc.start(self.x)]
        inbox = yield [(None, m) for m in gc.on_leader(inbox)]
        inbox = yield [(None, m) for m in gc.on_echo(inbox)]
        triples = gc.on_confirm(inbox)
        self.state = s = logn_initial_round(self.pid, self.x, triples, self.n)
        self.history.append({"round": 0, "V": s.V, "S": s.S, "group": s.group, "triples": dict(triples)})

        flt = SetGcFilter(self.safe_values, cap=self.cap)
        for r in range(1, self.iterations + 1):
            self.sgc = sgc = SetGradecastRound(self.pid, self.n, self.f, flt)
            sp = split(s.group)
            leads = sp is not None and in_interval(self.pid, sp.slaves)
            first = sgc.start(s.V) if leads else []
            inbox = yield [(None, m) for m in first]
            inbox = yield [(None, m) for m in sgc.on_leader(inbox)]
            inbox = yield [(None, m) for m in sgc.on_echo(inbox)]
            scored = sgc.on_confirm(inbox)
            prev_group = s.group
            self.state = s = logn_iteration(s, self.pid, self.n, r, scored)
            self.history.append({
                "round": r, "V": s.V, "S": s.S, "group": s.group,
                "parent": prev_group, "scored": scored,
            })

    def safe_values(self, leader: int, label=None):
        if label is not None or self.state is None:
            return frozenset()
        return self.state.S[leader]

    @property
    def output(self) -> Optional[Element]:
        return None if self.state is None else logn_output(self.state)

    @property
    def decided_at(self) -> Optional[int]:
        """Rounds taken, the initial Gradecast round included."""
        done = len(self.history) == self.iterations + 1
        return len(self.history) if done else None
