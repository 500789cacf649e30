"""Lattice agreement in ``4 * ceil(log2 f) + 3`` sub-rounds.

Groups are identified by labels (knowledge thresholds).  Every iteration each
process SetGradecasts its value set with its label, exchanges the values it
graded 2 with the members of each group, and classifies itself as a master
(label goes up) or a slave (label goes down) by counting the exchanged values.

Labels are integers scaled by ``2 ** (L + 1)`` with ``L = ceil(log2 f)`` so the
halving schedule ``k +- F2 / 2 ** (r + 1)`` stays exact; ``F2 = 2 ** L`` is f
padded to a power of two.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Set

from .bla_logn import ceil_log2
from .gradecast import GradecastFilter, GradecastRound, GradeTriple
from .lattice import Element, join_all, sort_key
from .setgradecast import ScoredSet, SetGcFilter, SetGradecastRound, well_formed


class CxMsg(NamedTuple):
    """Wire record ``(cx, target label, values)``."""

    label: int
    values: tuple


@dataclass(frozen=True)
class LabelScheme:
    n: int
    f: int

    @property
    def levels(self) -> int:
        return ceil_log2(self.f)

    @property
    def padded_f(self) -> int:
        return 1 << self.levels

    @property
    def scale(self) -> int:
        return 1 << (self.levels + 1)

    @property
    def k0(self) -> int:
        """``n - F2/2`` in scaled form."""
        return self.n * self.scale - self.padded_f * self.scale // 2

    def step(self, r: int) -> int:
        """``F2 / 2**(r+1)`` in scaled form."""
        return self.padded_f * self.scale >> (r + 1)

    def window(self, r: int) -> int:
        """``F2 / 2**r`` in scaled form."""
        return self.padded_f * self.scale >> r

    def master(self, k: int, r: int) -> int:
        return k + self.step(r)

    def slave(self, k: int, r: int) -> int:
        return k - self.step(r)

    def labels_at(self, r: int) -> Set[int]:
        """Every label a correct process can hold at the start of iteration ``r``."""
        labels = {self.k0}
        for i in range(1, r):
            labels = {k + d for k in labels for d in (self.step(i), -self.step(i))}
        return labels

    def unscale(self, k: int) -> float:
        return k / self.scale


@dataclass(frozen=True)
class LogfState:
    V: frozenset
    label: int
    F: Mapping[int, frozenset] = field(default_factory=dict)
    round: int = 0

    def safe(self, label: int) -> frozenset:
        return self.F.get(label, frozenset())


def logf_initial_round(x: Element, triples: Mapping[int, GradeTriple], scheme: LabelScheme) -> LogfState:
    ok = frozenset(t.value for t in triples.values() if t.score >= 1)
    sure = frozenset(t.value for t in triples.values() if t.score == 2)
    return LogfState(V=sure, label=scheme.k0, F={scheme.k0: ok}, round=0)


def group_views(scored: Mapping[int, List[ScoredSet]], extra_labels: Iterable[int],
                legit: Set[int]) -> Dict[int, tuple]:
    """``label -> (U1, U2)`` for every legitimate label observed this iteration."""
    u1: Dict[int, set] = {}
    u2: Dict[int, set] = {}
    for sets in scored.values():
        for ss in sets:
            if ss.label in legit:
                u1.setdefault(ss.label, set()).update(ss.at_least(1))
                u2.setdefault(ss.label, set()).update(ss.at_least(2))
    for k in extra_labels:
        if k in legit:
            u1.setdefault(k, set())
            u2.setdefault(k, set())
    return {k: (frozenset(u1[k]), frozenset(u2[k])) for k in sorted(u1)}


def logf_exchange(state: LogfState, r: int, views: Mapping[int, tuple],
                  leader_labels: Mapping[int, int], scheme: LabelScheme):
    """Update the safe map and build the exchange messages.

    Returns ``(state, outbox)`` where ``outbox`` is a list of ``(dest, CxMsg)``.
    """
    F = dict(state.F)
    out = []
    for k, (u1, u2) in views.items():
        F[scheme.master(k, r)] = state.safe(k) | u1
        F[scheme.slave(k, r)] = u2
        msg = CxMsg(k, tuple(sorted(u2, key=sort_key)))
        out.extend((j, msg) for j in sorted(leader_labels) if leader_labels[j] == k)
    return replace(state, F=F), out


def accepted_union(exchange: Mapping[int, Iterable[Element]], u1: frozenset) -> frozenset:
    """``T``: union of the exchanged sets that are subsets of ``U1``."""
    t: set = set()
    for j in sorted(exchange):
        r_j = frozenset(exchange[j])
        if r_j <= u1:
            t |= r_j
    return frozenset(t)


def logf_iteration(state: LogfState, r: int, views: Mapping[int, tuple],
                   exchange: Mapping[int, Iterable[Element]], scheme: LabelScheme) -> LogfState:
    """Classify this process within its own group after the exchange sub-round."""
    k = state.label
    u1, u2 = views.get(k, (frozenset(), frozenset()))
    t = accepted_union(exchange, u1)
    if len(t) * scheme.scale > k:
        return replace(state, V=u1, label=scheme.master(k, r), round=r)
    return replace(state, V=u2, label=scheme.slave(k, r), round=r)


def logf_output(state: LogfState) -> Element:
    return join_all(state.V)


class LogfProcess:
    algorithm = "logf"

    def __init__(self, pid: int, n: int, f: int, x: Element, cap: Optional[int] = None):
        self.pid = pid
        self.n = n
        self.f = f
        self.x = x
        self.cap = cap
        self.scheme = LabelScheme(n, f)
        self.iterations = self.scheme.levels
        self.state: Optional[LogfState] = None
        self.history: List[dict] = []
        self.gc: Optional[GradecastRound] = None
        self.sgc: Optional[SetGradecastRound] = None
        self.views: Dict[int, tuple] = {}

    def protocol(self):
        self.gc = gc = GradecastRound(self.pid, self.n, self.f, GradecastFilter(accept_all=True))
        inbox = yield [(None, m) for m in gc.start(self.x)]
        inbox = yield [(None, m) for m in gc.on_leader(inbox)]
        inbox = yield [(None, m) for m in gc.on_echo(inbox)]
        triples = gc.on_confirm(inbox)
        self.state = s = logf_initial_round(self.x, triples, self.scheme)
        self.history.append({"round": 0, "V": s.V, "label": s.label, "F": dict(s.F),
                             "triples": dict(triples)})

        flt = SetGcFilter(self.safe_values, cap=self.cap)
        for r in range(1, self.iterations + 1):
            self.sgc = sgc = SetGradecastRound(self.pid, self.n, self.f, flt)
            inbox = yield [(None, m) for m in sgc.start(s.V, s.label)]
            inbox = yield [(None, m) for m in sgc.on_leader(inbox)]
            inbox = yield [(None, m) for m in sgc.on_echo(inbox)]
            scored = sgc.on_confirm(inbox)
            leader_labels = {j: m.label for j, m in sgc.from_leader.items()
                             if isinstance(m.label, int)}
            legit = self.scheme.labels_at(r)
            self.views = views = group_views(scored, leader_labels.values(), legit)
            before = s
            s, out = logf_exchange(s, r, views, leader_labels, self.scheme)
            self.state = s
            inbox = yield out
            exchange = self._exchange_sets(inbox, s.label)
            self.state = s = logf_iteration(s, r, views, exchange, self.scheme)
            self.history.append({
                "round": r, "V": s.V, "label": s.label, "prev_label": before.label,
                "F": dict(s.F), "scored": scored, "views": views,
                "T": accepted_union(exchange, views.get(before.label, (frozenset(),))[0]),
                "leader_labels": leader_labels,
            })

    def _exchange_sets(self, inbox: Mapping[int, Iterable], label: int) -> Dict[int, tuple]:
        got: Dict[int, tuple] = {}
        for sender, records in inbox.items():
            for rec in records:
                if isinstance(rec, CxMsg) and rec.label == label:
                    if well_formed(rec.values, self.cap):
                        got[sender] = rec.values
                    break
        return got

    def safe_values(self, leader: int, label=None):
        if self.state is None or not isinstance(label, int):
            return frozenset()
        return self.state.safe(label)

    @property
    def output(self) -> Optional[Element]:
        return None if self.state is None else logf_output(self.state)

    @property
    def decided_at(self) -> Optional[int]:
        done = len(self.history) == self.iterations + 1
        return len(self.history) if done else None
