"""Built-in Byzantine strategies.

A strategy is called once per Byzantine id per sub-round with a
:class:`NetworkView` and returns ``{recipient: [records]}``.  Strategies are
omniscient and rushing: they see every correct process's state and the
messages correct processes send in the current sub-round.
"""

from __future__ import annotations

import random
import re
from typing import Callable, Dict, List, Optional

from .gradecast import GcMsg
from .lattice import Element, sort_key
from .setgradecast import SgcMsg
from .bla_logf import CxMsg


class ConfigError(ValueError):
    pass


Payloads = Dict[int, List[object]]
Strategy = Callable[[int, "NetworkView"], Payloads]


def _expand(n: int, outgoing) -> Payloads:
    if all(dest is None for dest, _ in outgoing):
        bcast = [rec for _, rec in outgoing]
        return {t: list(bcast) for t in range(n)} if bcast else {}
    out: Payloads = {}
    for dest, rec in outgoing:
        targets = range(n) if dest is None else [dest]
        for t in targets:
            out.setdefault(t, []).append(rec)
    return out


def silent(b, view) -> Payloads:
    return {}


def honest(b, view) -> Payloads:
    return _expand(view.n, view.honest(b))


def crash_at(r: int) -> Strategy:
    def strategy(b, view):
        return honest(b, view) if view.sub_round < r else {}
    return strategy


def terrible(r: int) -> Strategy:
    """Correct through outer round ``r - 1``, silent from outer round ``r`` on."""
    def strategy(b, view):
        return honest(b, view) if view.outer_round < r else {}
    return strategy


def _leader_record(b, view):
    for dest, rec in view.honest(b):
        if isinstance(rec, (GcMsg, SgcMsg)) and rec.step == 1 and rec.leader == b:
            return rec
    return None


def _tweak(rec, fresh: Element):
    if isinstance(rec, GcMsg):
        return rec._replace(value=rec.value | fresh)
    values = tuple(sorted(set(rec.values) | {fresh}, key=sort_key))
    return rec._replace(values=values)


def equivocate_split(b, view) -> Payloads:
    """Leader messages differ between the lower and upper halves of the ids;
    silent in every other sub-round."""
    rec = _leader_record(b, view)
    if rec is None:
        return {}
    other = _tweak(rec, view.mint(b))
    half = view.n // 2
    return {t: [rec if t < half else other] for t in range(view.n)}


def inject_fresh(b, view) -> Payloads:
    """Correct behaviour except that every leader message carries a novel tag."""
    out = honest(b, view)
    rec = _leader_record(b, view)
    if rec is not None:
        forged = _tweak(rec, view.mint(b))
        for t in out:
            out[t] = [forged if m == rec else m for m in out[t]]
    return out


def lie_label(b, view) -> Payloads:
    """Forged labels on SetGradecast leader messages and oversized exchange sets.

    Lower half of the ids sees the true label, the upper half a sibling group's
    label; exchange messages carry every element the adversary knows of.
    """
    out = honest(b, view)
    if view.kind == "sgc" and view.step == 1:
        rec = _leader_record(b, view)
        if rec is not None and isinstance(rec.label, int):
            scheme = view.process(b).scheme
            r = view.outer_round - 1
            forged = rec._replace(label=rec.label + 2 * scheme.step(r - 1))
            for t in range(view.n // 2, view.n):
                out[t] = [forged if m == rec else m for m in out.get(t, [])]
    elif view.kind == "cx":
        everything = set(view.known_values()) | {view.mint(b)}
        values = tuple(sorted(everything, key=sort_key))
        labels = {m.label for recs in out.values() for m in recs if isinstance(m, CxMsg)}
        labels |= {getattr(view.process(t).state, "label", None) for t in view.correct}
        out = {t: [CxMsg(k, values) for k in sorted(x for x in labels if x is not None)]
               for t in range(view.n)}
    return out


def random_within_safe(seed: Optional[int] = None) -> Strategy:
    """Per-recipient random messages drawn from what each recipient would admit."""
    own = random.Random(seed) if seed is not None else None

    def strategy(b, view):
        rng = own or view.rng
        out: Payloads = {}
        for t in sorted(view.correct):
            recs = _random_records(b, t, view, rng)
            if recs:
                out[t] = recs
        return out
    return strategy


def _random_join(gens, rng) -> Optional[Element]:
    gens = sorted(gens, key=sort_key)
    if not gens:
        return None
    pick = [g for g in gens if rng.random() < 0.5] or [rng.choice(gens)]
    return frozenset().union(*pick)


def _random_subset(values, rng) -> tuple:
    values = sorted(values, key=sort_key)
    return tuple(v for v in values if rng.random() < 0.6)


def _gc_value(b, target, view, rng) -> Optional[Element]:
    flt = target.gc.flt
    if flt.accept_all:
        base = view.config.inputs[b]
        return rng.choice([base, view.mint(b), base | view.mint(b)])
    return _random_join(flt.safe_generators, rng)


def _random_records(b, t, view, rng) -> List[object]:
    target = view.process(t)
    kind, step = view.kind, view.step
    if kind == "gc":
        if target.gc is None:
            return []
        if step == 1:
            v = _gc_value(b, target, view, rng)
            return [] if v is None else [GcMsg(b, 1, v)]
        recs = []
        for q in range(view.n):
            if rng.random() < 0.5:
                continue
            seen = view.correct_values(q, step)
            if seen and rng.random() < 0.5:
                v = rng.choice(seen)
            else:
                v = _gc_value(b, target, view, rng)
            if v is not None:
                recs.append(GcMsg(q, step, v))
        return recs
    if kind == "sgc":
        if target.sgc is None:
            return []
        if step == 1:
            label = getattr(view.process(b).state, "label", None)
            return [SgcMsg(b, 1, _random_subset(target.safe_values(b, label), rng), label)]
        recs = []
        for q in range(view.n):
            if rng.random() < 0.5:
                continue
            got = target.sgc.from_leader.get(q)
            label = got.label if got is not None else getattr(view.process(q).state, "label", None)
            recs.append(SgcMsg(q, step, _random_subset(target.safe_values(q, label), rng), label))
        return recs
    if kind == "cx":
        label = target.state.label
        u1 = target.views.get(label, (frozenset(),))[0]
        return [CxMsg(label, _random_subset(u1, rng))]
    return []


_BUILTINS = {
    "silent": lambda: silent,
    "honest": lambda: honest,
    "crash_at": crash_at,
    "equivocate_split": lambda: equivocate_split,
    "inject_fresh": lambda: inject_fresh,
    "terrible": terrible,
    "lie_label": lambda: lie_label,
    "random_within_safe": random_within_safe,
}

# parameters used when a sweep names a strategy without arguments
DEFAULT_PARAMS = {"crash_at": {"r": 4}, "terrible": {"r": 2}, "random_within_safe": {}}


def builtin_adversaries() -> List[str]:
    return [name for name in _BUILTINS if name != "honest"]


_CALL_RE = re.compile(r"^\s*([a-z_]+)\s*(?:\((.*)\))?\s*$")


def parse_spec(spec) -> tuple:
    """Normalise ``"crash_at(5)"`` / ``{"name": ..., "params": {...}}`` to ``(name, params)``."""
    if isinstance(spec, dict):
        return spec["name"], dict(spec.get("params") or {})
    m = _CALL_RE.match(str(spec))
    if m is None:
        raise ConfigError(f"bad adversary spec {spec!r}")
    name, args = m.group(1), m.group(2)
    if not args:
        return name, dict(DEFAULT_PARAMS.get(name, {}))
    key = {"crash_at": "r", "terrible": "r", "random_within_safe": "seed"}.get(name)
    if key is None:
        raise ConfigError(f"{name} takes no parameters")
    return name, {key: int(args)}


def make_strategy(name: str, params: Optional[dict] = None) -> Strategy:
    if name not in _BUILTINS:
        raise ConfigError(f"unknown adversary {name!r}; known: {', '.join(sorted(_BUILTINS))}")
    try:
        return _BUILTINS[name](**{**DEFAULT_PARAMS.get(name, {}), **(params or {})})
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name}: {exc}") from None
