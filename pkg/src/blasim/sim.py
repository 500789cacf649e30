"""Deterministic lockstep simulator.

Every sub-round each active correct process emits its messages, each
Byzantine id's strategy emits arbitrary per-recipient records, and all records
between one ordered pair of processes travel in a single :class:`Envelope`.
Inboxes are ``{sender: [records]}`` maps, so delivery order never matters.
"""

from __future__ import annotations

import gc
import hashlib
import json
import random
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from . import checker
from .adversary import ConfigError, make_strategy, parse_spec
from .bla_logf import CxMsg, LogfProcess
from .bla_logn import LognProcess
from .bla_sqrtf import HarnessError, SqrtfProcess
from .gradecast import GcMsg
from .lattice import Element, Universe, decode, encode, sort_key
from .setgradecast import SgcMsg

ALGORITHMS = ("sqrtf", "logn", "logf")
MAX_SUB_ROUNDS = 10_000


class Envelope(NamedTuple):
    frm: int
    to: int
    sub_round: int
    payload: tuple


@dataclass(frozen=True)
class RunConfig:
    n: int
    f: int
    algorithm: str
    inputs: Tuple[Element, ...]
    byzantine_ids: Tuple[int, ...] = ()
    adversary: str = "silent"
    adversary_params: Mapping = field(default_factory=dict)
    seed: int = 0
    universe_size: Optional[int] = None

    @classmethod
    def make(cls, n: int, algorithm: str, *, f: Optional[int] = None, t: Optional[int] = None,
             adversary="silent", seed: int = 0, inputs=None, byzantine_ids=None,
             universe_size: Optional[int] = None) -> "RunConfig":
        """Convenience constructor: distinct singleton inputs and, when ``t`` is
        given, ``t`` Byzantine ids drawn from ``seed``."""
        f = (n - 1) // 3 if f is None else f
        if inputs is None:
            inputs = [frozenset({(i, 0)}) for i in range(n)]
        if byzantine_ids is None:
            byzantine_ids = sorted(random.Random(seed).sample(range(n), t)) if t else ()
        name, params = parse_spec(adversary)
        return cls(n=n, f=f, algorithm=algorithm, inputs=tuple(inputs),
                   byzantine_ids=tuple(sorted(byzantine_ids)), adversary=name,
                   adversary_params=params, seed=seed, universe_size=universe_size)

    @property
    def t(self) -> int:
        return len(self.byzantine_ids)

    @property
    def correct(self) -> List[int]:
        byz = set(self.byzantine_ids)
        return [i for i in range(self.n) if i not in byz]

    @property
    def universe(self) -> Universe:
        size = 4 * self.n if self.universe_size is None else self.universe_size
        return Universe.first(self.n, size)

    def validate(self) -> "RunConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.f < 0 or self.n < 3 * self.f + 1:
            raise ConfigError(f"need n >= 3f + 1, got n={self.n}, f={self.f}")
        byz = self.byzantine_ids
        if len(set(byz)) != len(byz) or any(not 0 <= b < self.n for b in byz):
            raise ConfigError(f"bad byzantine_ids {list(byz)}")
        if len(byz) > self.f:
            raise ConfigError(f"{len(byz)} Byzantine ids exceed f={self.f}")
        if len(self.inputs) != self.n:
            raise ConfigError(f"need {self.n} inputs, got {len(self.inputs)}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.universe_size is not None and self.universe_size < 0:
            raise ConfigError("universe_size must be nonnegative")
        uni = self.universe
        for i in self.correct:
            if not uni.contains(self.inputs[i]):
                raise ConfigError(f"input of process {i} has tags outside the universe")
        make_strategy(self.adversary, self.adversary_params)
        return self

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "f": self.f,
            "byzantine_ids": list(self.byzantine_ids),
            "algorithm": self.algorithm,
            "inputs": [encode(x) for x in self.inputs],
            "adversary": {"name": self.adversary, "params": dict(self.adversary_params)},
            "seed": self.seed,
            "universe_size": self.universe.height,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunConfig":
        fields = {"n", "f", "byzantine_ids", "algorithm", "inputs", "adversary", "seed", "universe_size"}
        extra = set(d) - fields
        if extra:
            raise ConfigError(f"unknown config fields: {sorted(extra)}")
        missing = {"n", "f", "algorithm", "inputs"} - set(d)
        if missing:
            raise ConfigError(f"missing config fields: {sorted(missing)}")
        try:
            name, params = parse_spec(d.get("adversary", "silent"))
            inputs = tuple(decode(s) for s in d["inputs"])
            return cls(
                n=int(d["n"]), f=int(d["f"]), algorithm=str(d["algorithm"]), inputs=inputs,
                byzantine_ids=tuple(sorted(int(b) for b in d.get("byzantine_ids", ()))),
                adversary=name, adversary_params=params, seed=int(d.get("seed", 0)),
                universe_size=None if d.get("universe_size") is None else int(d["universe_size"]),
            )
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(f"malformed config: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not JSON: {exc}") from None
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


def phase_of(algorithm: str, s: int) -> Tuple[str, int, int]:
    """``(kind, step, outer_round)`` of 0-based sub-round ``s``."""
    if algorithm == "sqrtf" or s < 3:
        return "gc", s % 3 + 1, s // 3 + 1
    t = s - 3
    if algorithm == "logn":
        return "sgc", t % 3 + 1, t // 3 + 2
    pos = t % 4
    return ("sgc", pos + 1, t // 4 + 2) if pos < 3 else ("cx", 1, t // 4 + 2)


def _well_formed(rec, kind: str, step: int, ok_elem) -> bool:
    """Wire check of one adversarial record; ``ok_elem`` tests a single element."""
    if kind == "gc":
        return (type(rec) is GcMsg and rec[1] == step and isinstance(rec[0], int)
                and isinstance(rec[2], frozenset) and ok_elem(rec[2]))
    if kind == "sgc":
        return (isinstance(rec, SgcMsg) and rec.step == step and isinstance(rec.leader, int)
                and isinstance(rec.values, tuple)
                and all(isinstance(v, frozenset) and ok_elem(v) for v in rec.values)
                and (rec.label is None or isinstance(rec.label, int)))
    return (isinstance(rec, CxMsg) and isinstance(rec.label, int) and isinstance(rec.values, tuple)
            and all(isinstance(v, frozenset) and ok_elem(v) for v in rec.values))


class NetworkView:
    """Everything an adversary may look at during one sub-round."""

    def __init__(self, sim: "_Simulation", sub_round: int, phase, correct_out):
        self._sim = sim
        self.config = sim.config
        self.n = sim.config.n
        self.f = sim.config.f
        self.sub_round = sub_round
        self.kind, self.step, self.outer_round = phase
        self.correct = sim.correct
        self.correct_out: Dict[Tuple[int, int], list] = correct_out
        self.history: List[Envelope] = sim.envelopes
        self.rng = sim.rng
        self._gc_values = None

    def process(self, i: int):
        self._sim.catch_up(i)
        return self._sim.procs[i]

    def honest(self, b: int) -> list:
        """What the protocol would have ``b`` send now, given what ``b`` received."""
        self._sim.catch_up(b)
        return self._sim.pending.get(b, [])

    def mint(self, b: int) -> Element:
        return self._sim.mint(b)

    def correct_values(self, leader: int, step: int) -> list:
        """Distinct values correct processes send this sub-round for ``leader``'s instance."""
        if self._gc_values is None:
            seen: Dict[Tuple[int, int], set] = {}
            for i in self.correct:
                if i not in self._sim.active:
                    continue
                for _, rec in self._sim.pending[i]:
                    if isinstance(rec, GcMsg):
                        seen.setdefault((rec.leader, rec.step), set()).add(rec.value)
            self._gc_values = {k: sorted(v, key=sort_key) for k, v in seen.items()}
        return self._gc_values.get((leader, step), [])

    def known_values(self) -> set:
        vals = set(self.config.inputs)
        for env in self.history:
            for rec in env.payload:
                if isinstance(rec, GcMsg):
                    vals.add(rec.value)
                elif isinstance(rec, (SgcMsg, CxMsg)):
                    vals.update(rec.values)
        return vals


@dataclass
class Transcript:
    """Immutable-after-run record handed to the checkers."""

    config: RunConfig
    correct: List[int]
    histories: Dict[int, List[dict]]
    outputs: Dict[int, Optional[Element]]
    decided_at: Dict[int, Optional[int]]
    sub_rounds: int
    outer_rounds: int
    envelopes: int
    envelopes_no_self: int
    correct_envelopes: int
    correct_per_sub_round: List[int]
    recorded_byz_values: Dict[int, set]
    lattice_height: int
    last_round: Dict[int, int]


@dataclass
class RunReport:
    config: RunConfig
    outputs: Dict[int, Optional[Element]]
    decision_rounds: Dict[int, Optional[int]]
    sub_rounds: int
    outer_rounds: int
    envelopes: int
    envelopes_no_self: int
    correct_envelopes: int
    max_correct_envelopes_per_sub_round: int
    recorded_byz_values: List[Tuple[int, Element]]
    verdicts: List[checker.Verdict]
    digests: List[dict]

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def failures(self) -> List[checker.Verdict]:
        return [v for v in self.verdicts if not v.passed]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "outputs": {str(i): (None if y is None else encode(y)) for i, y in self.outputs.items()},
            "decision_rounds": {str(i): r for i, r in self.decision_rounds.items()},
            "sub_rounds": self.sub_rounds,
            "outer_rounds": self.outer_rounds,
            "envelopes": self.envelopes,
            "envelopes_without_self": self.envelopes_no_self,
            "correct_envelopes": self.correct_envelopes,
            "max_correct_envelopes_per_sub_round": self.max_correct_envelopes_per_sub_round,
            "recorded_byzantine_values": [[b, encode(v)] for b, v in self.recorded_byz_values],
            "verdicts": [v.to_dict() for v in self.verdicts],
            "all_pass": self.passed,
            "digests": self.digests,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def count_messages(report: RunReport, include_self: bool = True) -> int:
    return report.envelopes if include_self else report.envelopes_no_self


def make_process(config: RunConfig, pid: int):
    x = config.inputs[pid]
    uni = config.universe
    if config.algorithm == "sqrtf":
        return SqrtfProcess(pid, config.n, config.f, x, uni.height)
    if config.algorithm == "logn":
        return LognProcess(pid, config.n, config.f, x, cap=uni.height)
    return LogfProcess(pid, config.n, config.f, x, cap=uni.height)


class _Simulation:
    def __init__(self, config: RunConfig):
        self.config = config.validate()
        self.universe = config.universe
        self.rng = random.Random(config.seed)
        self.strategy = make_strategy(config.adversary, config.adversary_params)
        self.byz = sorted(config.byzantine_ids)
        self.correct = config.correct
        # Byzantine ids get an honest shadow that adversaries may consult; a
        # shadow only replays its queued inboxes when someone looks at it
        self.procs = {i: make_process(config, i) for i in range(config.n)}
        self.backlog: Dict[int, list] = {b: [] for b in self.byz}
        self.gens = {i: p.protocol() for i, p in self.procs.items()}
        self.pending: Dict[int, list] = {}
        self.active = set()
        self.envelopes: List[Envelope] = []
        self.nonces = {b: 1 for b in self.byz}
        self.last_round = {i: 0 for i in range(config.n)}
        self._in_universe: Dict[frozenset, bool] = {}

    def mint(self, b: int) -> Element:
        """A fresh tag of origin ``b`` while the universe has one left."""
        k = self.nonces[b]
        if (b, k) in self.universe.tags:
            self.nonces[b] = k + 1
            return frozenset({(b, k)})
        if (b, k - 1) in self.universe.tags:
            return frozenset({(b, k - 1)})
        return frozenset()

    def in_universe(self, v: frozenset) -> bool:
        hit = self._in_universe.get(v)
        if hit is None:
            hit = self._in_universe[v] = v <= self.universe.tags
        return hit

    def _wire_filter(self, payload, phase, checked: Dict[int, bool]) -> list:
        kept = []
        for r in payload:
            ok = checked.get(id(r))
            if ok is None:
                ok = checked[id(r)] = _well_formed(r, phase[0], phase[1], self.in_universe)
            if ok:
                kept.append(r)
        return kept

    def catch_up(self, b: int) -> None:
        queued = self.backlog.get(b)
        if queued:
            for inbox in queued:
                if b in self.active:
                    self._advance(b, inbox)
            queued.clear()

    def _advance(self, i: int, inbox) -> None:
        try:
            self.pending[i] = self.gens[i].send(inbox)
        except StopIteration:
            self.active.discard(i)
            self.pending[i] = []

    def run(self) -> Transcript:
        cfg = self.config
        n = cfg.n
        for i in range(n):
            self.pending[i] = next(self.gens[i])
            self.active.add(i)
        per_sub: List[int] = []
        byz = set(self.byz)
        total = no_self = correct_total = 0
        s = 0
        while any(i in self.active for i in self.correct):
            if s >= MAX_SUB_ROUNDS:
                raise HarnessError("run did not terminate")
            phase = phase_of(cfg.algorithm, s)
            s += 1
            boxes: Dict[Tuple[int, int], list] = {}
            for i in self.correct:
                if i not in self.active:
                    continue
                self.last_round[i] = phase[2]
                out = self.pending[i]
                bcast = [rec for dest, rec in out if dest is None]
                if len(bcast) == len(out):
                    if bcast:
                        shared = tuple(bcast)
                        for t in range(n):
                            boxes[(i, t)] = shared
                    continue
                for dest, rec in out:
                    for t in (range(n) if dest is None else (dest,)):
                        boxes.setdefault((i, t), []).append(rec)
            correct_out = dict(boxes)
            view = NetworkView(self, s, phase, correct_out)
            for b in self.byz:
                payloads = self.strategy(b, view) or {}
                for t in sorted(payloads):
                    if isinstance(t, int) and 0 <= t < n and payloads[t]:
                        boxes[(b, t)] = list(payloads[t])
            inboxes: Dict[int, Dict[int, list]] = {i: {} for i in range(n)}
            # verdict per record object; adversaries often send one object to many recipients
            checked: Dict[int, bool] = {}
            n_correct = 0
            for (frm, to) in sorted(boxes):
                payload = tuple(boxes[(frm, to)])
                if not payload:
                    continue
                env = Envelope(frm, to, s, payload)
                self.envelopes.append(env)
                total += 1
                no_self += frm != to
                if frm in byz:
                    # only adversarial records need the wire check
                    inboxes[to][frm] = self._wire_filter(payload, phase, checked)
                else:
                    n_correct += 1
                    inboxes[to][frm] = payload
            per_sub.append(n_correct)
            correct_total += n_correct
            for i in range(n):
                if i in byz:
                    self.backlog[i].append(inboxes[i])
                elif i in self.active:
                    self._advance(i, inboxes[i])
        recorded = self._recorded_byz()
        return Transcript(
            config=cfg,
            correct=list(self.correct),
            histories={i: self.procs[i].history for i in self.correct},
            outputs={i: self.procs[i].output for i in self.correct},
            decided_at={i: self.procs[i].decided_at for i in self.correct},
            sub_rounds=s,
            outer_rounds=phase_of(cfg.algorithm, s - 1)[2] if s else 0,
            envelopes=total,
            envelopes_no_self=no_self,
            correct_envelopes=correct_total,
            correct_per_sub_round=per_sub,
            recorded_byz_values=recorded,
            lattice_height=self.universe.height,
            last_round={i: self.last_round[i] for i in self.correct},
        )

    def _recorded_byz(self) -> Dict[int, set]:
        """Initial-round values of Byzantine leaders graded >= 1 by some correct process."""
        rec: Dict[int, set] = {}
        for i in self.correct:
            hist = self.procs[i].history
            if not hist:
                continue
            for b in self.byz:
                tr = hist[0]["triples"][b]
                if tr.score >= 1:
                    rec.setdefault(b, set()).add(tr.value)
        return rec


def simulate(config: RunConfig) -> Transcript:
    # a run allocates many small containers and keeps them in the transcript;
    # cyclic collection passes over that growing heap cost more than they free
    paused = gc.isenabled()
    gc.disable()
    try:
        return _Simulation(config).run()
    finally:
        if paused:
            gc.enable()


def run(config: RunConfig, invert: bool = False) -> RunReport:
    """Run ``config`` to completion and check every property on the transcript.

    ``invert`` flips every verdict; it exists only to exercise failure paths.
    """
    return report(simulate(config), invert)


def report(tr: Transcript, invert: bool = False) -> RunReport:
    """Check every property on a finished transcript."""
    config = tr.config
    verdicts = checker.check_all(tr)
    if invert:
        verdicts = [v.inverted() for v in verdicts]
    recorded = sorted(((b, v) for b, vals in tr.recorded_byz_values.items() for v in vals),
                      key=lambda bv: (bv[0], sort_key(bv[1])))
    return RunReport(
        config=config,
        outputs=tr.outputs,
        decision_rounds=tr.decided_at,
        sub_rounds=tr.sub_rounds,
        outer_rounds=tr.outer_rounds,
        envelopes=tr.envelopes,
        envelopes_no_self=tr.envelopes_no_self,
        correct_envelopes=tr.correct_envelopes,
        max_correct_envelopes_per_sub_round=max(tr.correct_per_sub_round, default=0),
        recorded_byz_values=recorded,
        verdicts=verdicts,
        digests=checker.digests(tr),
    )
