"""SetGradecast: gradecast a set of distinct values, grading each one alone.

Values are graded together with the label the leader attached, so a graded
item is a ``(label, value)`` pair.  With no labels (``label=None``) this is
plain SetGradecast.  A value is admitted for an instance only if it lies in the
receiving process's safe set for that instance's leader and label.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Collection, Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from .lattice import Element, sort_key

Label = Optional[int]
Item = Tuple[Label, Element]


class SgcMsg(NamedTuple):
    """Wire record ``(sgc, leader, sub_round, values, label)``."""

    leader: int
    step: int
    values: tuple
    label: Label = None


@dataclass
class ScoredSet:
    leader: int
    label: Label
    scores: Dict[Element, int] = field(default_factory=dict)

    def at_least(self, score: int) -> set:
        return {v for v, c in self.scores.items() if c >= score}


@dataclass
class SetGcFilter:
    """``safe_for(leader, label)`` returns the admissible values for that instance."""

    safe_for: Callable[[int, Label], Collection[Element]]
    cap: Optional[int] = None

    def admits(self, leader: int, label: Label, v: Element) -> bool:
        return v in self.safe_for(leader, label)


def well_formed(values: tuple, cap: Optional[int] = None) -> bool:
    if len(set(values)) != len(values):
        return False
    return cap is None or len(values) <= cap


def sgc_leader_send(leader: int, values: Iterable[Element], label: Label = None) -> SgcMsg:
    return SgcMsg(leader, 1, tuple(sorted(set(values), key=sort_key)), label)


def sgc_echo(received: Optional[SgcMsg], flt: SetGcFilter) -> Optional[SgcMsg]:
    if received is None:
        return None
    kept = tuple(v for v in received.values if flt.admits(received.leader, received.label, v))
    return SgcMsg(received.leader, 2, kept, received.label)


def sgc_confirm(tally: Mapping[Item, int], n: int, f: int) -> List[Item]:
    """Every item seen from at least ``n - f`` senders (no plurality here)."""
    return sorted((it for it, c in tally.items() if c >= n - f), key=_item_key)


def sgc_grade(tally: Mapping[Item, int], n: int, f: int, leader: int) -> List[ScoredSet]:
    by_label: Dict[Label, ScoredSet] = {}
    for (label, v), c in sorted(tally.items(), key=lambda kv: _item_key(kv[0])):
        score = 2 if c >= n - f else 1 if c >= f + 1 else 0
        if score:
            by_label.setdefault(label, ScoredSet(leader, label)).scores[v] = score
    return [by_label[k] for k in sorted(by_label, key=_label_key)]


def _label_key(label: Label):
    return (label is not None, label if label is not None else 0)


def _item_key(item: Item):
    return (_label_key(item[0]), sort_key(item[1]))


def _first_per_instance(records: Iterable, step: int, cap: Optional[int]) -> Dict[int, SgcMsg]:
    out: Dict[int, SgcMsg] = {}
    for rec in records:
        if isinstance(rec, SgcMsg) and rec.step == step and rec.leader not in out:
            # a set with duplicate values burns the sender's slot for this instance
            out[rec.leader] = rec if well_formed(rec.values, cap) else None
    return {q: r for q, r in out.items() if r is not None}


class SetGradecastRound:
    """One process's view of all SetGradecast instances of one iteration."""

    def __init__(self, me: int, n: int, f: int, flt: SetGcFilter):
        self.me = me
        self.n = n
        self.f = f
        self.flt = flt
        self.from_leader: Dict[int, SgcMsg] = {}
        self.echo_tallies: Dict[int, Dict[Item, int]] = {}
        self.confirm_tallies: Dict[int, Dict[Item, int]] = {}

    def start(self, values: Iterable[Element], label: Label = None) -> List[SgcMsg]:
        return [sgc_leader_send(self.me, values, label)]

    def on_leader(self, inbox: Mapping[int, Iterable]) -> List[SgcMsg]:
        for sender, records in inbox.items():
            rec = _first_per_instance(records, 1, self.flt.cap).get(sender)
            if rec is not None:
                self.from_leader[sender] = rec
        return [sgc_echo(self.from_leader[q], self.flt) for q in sorted(self.from_leader)]

    def _tally(self, inbox: Mapping[int, Iterable], step: int,
               check_values: bool = True) -> Dict[int, Dict[Item, int]]:
        tallies: Dict[int, Dict[Item, int]] = {}
        for sender, records in inbox.items():
            for leader, rec in _first_per_instance(records, step, self.flt.cap).items():
                t = tallies.get(leader)
                if t is None:
                    t = tallies[leader] = {}
                safe = self.flt.safe_for(leader, rec.label) if check_values else None
                for v in rec.values:
                    if safe is None or v in safe:
                        key = (rec.label, v)
                        t[key] = t.get(key, 0) + 1
        return tallies

    def on_echo(self, inbox: Mapping[int, Iterable]) -> List[SgcMsg]:
        self.echo_tallies = self._tally(inbox, 2)
        out = []
        for leader in sorted(set(self.echo_tallies) | set(self.from_leader)):
            items = sgc_confirm(self.echo_tallies.get(leader, {}), self.n, self.f)
            labels = {lab for lab, _ in items}
            if len(labels) > 1:
                # cannot happen with n > 3f; keep the canonical first label only
                first = items[0][0]
                items = [it for it in items if it[0] == first]
            if items:
                label = items[0][0]
            elif leader in self.from_leader:
                label = self.from_leader[leader].label
            else:
                continue
            out.append(SgcMsg(leader, 3, tuple(v for _, v in items), label))
        return out

    def on_confirm(self, inbox: Mapping[int, Iterable]) -> Dict[int, List[ScoredSet]]:
        # grading counts every confirm; see GradecastRound.on_confirm
        self.confirm_tallies = self._tally(inbox, 3, check_values=False)
        return {
            q: sgc_grade(self.confirm_tallies[q], self.n, self.f, q)
            for q in sorted(self.confirm_tallies)
        }
