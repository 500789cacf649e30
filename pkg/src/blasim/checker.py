"""Property, lemma and bound checks over a finished run.

Every check reads the transcript only and returns a :class:`Verdict`; a failing
verdict carries a JSON-ready witness that, together with the run config,
pinpoints the violation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional

from .bla_logf import LabelScheme
from .bla_logn import ceil_log2, groups_at, split
from .bla_sqrtf import ceil_sqrt, round_cap
from .lattice import Element, comparable, encode, join_all, leq, member_of_generated, sort_key


@dataclass
class Verdict:
    name: str
    passed: bool
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "witness": self.witness}

    def inverted(self) -> "Verdict":
        witness = self.witness or {"inverted": True}
        return Verdict(self.name, not self.passed, witness)


def _enc(obj):
    """Make witnesses JSON-ready: elements become their canonical text."""
    if isinstance(obj, frozenset) and all(isinstance(t, tuple) for t in obj):
        return encode(obj)
    if isinstance(obj, (set, frozenset)):
        items = [_enc(x) for x in obj]
        return sorted(items, key=lambda s: (isinstance(s, str), str(s)))
    if isinstance(obj, dict):
        return {str(k): _enc(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_enc(x) for x in obj]
    return obj


class _Collector:
    """Accumulates the first witness per property; everything checked passes otherwise."""

    def __init__(self, names: Iterable[str]):
        self.order = list(names)
        self.witness: Dict[str, dict] = {}
        self.counts = {name: 0 for name in self.order}

    def check(self, name: str, ok: bool, lazy=None, **witness) -> None:
        """Record one check; ``lazy`` builds the witness only when it is needed."""
        self.counts[name] += 1
        if not ok and name not in self.witness:
            self.witness[name] = _enc(lazy() if lazy is not None else witness)

    def verdicts(self) -> List[Verdict]:
        return [Verdict(name, name not in self.witness, self.witness.get(name, {}))
                for name in self.order]


# -- the lattice agreement properties ---------------------------------------

def check_comparability(outputs: Mapping[int, Element]) -> Verdict:
    for (i, yi), (j, yj) in combinations(sorted(outputs.items()), 2):
        if not comparable(yi, yj):
            return Verdict("comparability", False, _enc({"i": i, "j": j, "y_i": yi, "y_j": yj}))
    return Verdict("comparability", True)


def check_downward(inputs: Mapping[int, Element], outputs: Mapping[int, Element]) -> Verdict:
    for i in sorted(inputs):
        if not leq(inputs[i], outputs[i]):
            return Verdict("downward_validity", False, _enc({"i": i, "x": inputs[i], "y": outputs[i]}))
    return Verdict("downward_validity", True)


def check_upward(inputs: Mapping[int, Element], outputs: Mapping[int, Element],
                 recorded_byz_values: Mapping[int, Iterable[Element]], t: int) -> Verdict:
    """Instrumented form: outputs lie below correct inputs plus the Byzantine
    values some correct process accepted in the initial round (at most one per id)."""
    recorded = {b: set(vs) for b, vs in recorded_byz_values.items() if vs}
    multi = {b: vs for b, vs in recorded.items() if len(vs) > 1}
    if multi:
        return Verdict("upward_validity", False, _enc({"several_values_from": multi}))
    extra = [v for vs in recorded.values() for v in vs]
    if len(extra) > t:
        return Verdict("upward_validity", False, _enc({"recorded": recorded, "t": t}))
    bound = join_all(list(inputs.values()) + extra)
    top = join_all(outputs.values())
    if not leq(top, bound):
        stray = top - bound
        return Verdict("upward_validity", False,
                       _enc({"join_outputs": top, "bound": bound, "unexplained_tags": sorted(stray)}))
    return Verdict("upward_validity", True)


def check_decided(tr) -> Verdict:
    missing = [i for i in tr.correct if tr.outputs.get(i) is None or tr.decided_at.get(i) is None]
    if missing:
        return Verdict("decided", False, {"undecided": missing})
    return Verdict("decided", True)


# -- bounds -----------------------------------------------------------------

def sqrtf_outer_bound(t: int) -> int:
    """Early-stopping bound on outer rounds with ``t`` actual Byzantine processes."""
    return 2 * ceil_sqrt(t) + 2 if t > 0 else 3


def expected_sub_rounds(algorithm: str, n: int, f: int) -> Optional[int]:
    if algorithm == "logn":
        return 3 + 3 * ceil_log2(n)
    if algorithm == "logf":
        return 3 + 4 * ceil_log2(f)
    return None


def check_round_bound(tr) -> Verdict:
    cfg = tr.config
    if cfg.algorithm == "sqrtf":
        h = tr.lattice_height
        cap = min(3 * h + 6, 6 * ceil_sqrt(cfg.f) + 6)
        early = sqrtf_outer_bound(cfg.t)
        last = max(tr.decided_at.values(), key=lambda r: -1 if r is None else r, default=None)
        ok = (tr.sub_rounds <= cap and tr.outer_rounds <= early
              and tr.sub_rounds == 3 * tr.outer_rounds
              and all(r is not None and r <= min(early, round_cap(cfg.f, h)) for r in tr.decided_at.values()))
        w = {"sub_rounds": tr.sub_rounds, "cap": cap, "outer_rounds": tr.outer_rounds,
             "early_stop_bound": early, "last_decision_round": last}
        return Verdict("round_bound", ok, {} if ok else w)
    want = expected_sub_rounds(cfg.algorithm, cfg.n, cfg.f)
    ok = tr.sub_rounds == want
    return Verdict("round_bound", ok, {} if ok else {"sub_rounds": tr.sub_rounds, "expected": want})


def check_message_bound(tr) -> Verdict:
    cfg = tr.config
    n2 = cfg.n * cfg.n
    if cfg.algorithm == "sqrtf":
        total_bound = 3 * tr.outer_rounds * n2
    else:
        total_bound = expected_sub_rounds(cfg.algorithm, cfg.n, cfg.f) * n2
    worst = max(tr.correct_per_sub_round, default=0)
    ok = worst <= n2 and tr.correct_envelopes <= total_bound
    w = {"max_per_sub_round": worst, "per_sub_round_bound": n2,
         "correct_envelopes": tr.correct_envelopes, "total_bound": total_bound}
    return Verdict("message_bound", ok, {} if ok else w)


# -- sqrtf lemmas -------------------------------------------------------------

SQRTF_CHECKS = (
    "p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "at_most_one", "correct_contains",
    "dec_2round", "dec_fr", "bad_no_more", "decision_frozen", "term_round_monotone",
    "gradecast_p1", "gradecast_p2", "gradecast_p3",
)


def sqrtf_lemmas(tr) -> List[Verdict]:
    col = _Collector(SQRTF_CHECKS)
    C = tr.correct
    H = tr.histories
    x = {i: tr.config.inputs[i] for i in C}
    n = tr.config.n
    # rounds in which every correct process still ran; cross-process lemmas are
    # stated for processes that take part in the round
    full = min(len(H[i]) for i in C)

    def row(i, r):
        return H[i][r - 1]

    def S(r):
        return frozenset().union(*(row(i, r)["sv"] for i in C))

    def vbar(r):
        return join_all(row(i, r)["v"] for i in C)

    cap = round_cap(tr.config.f, tr.lattice_height)
    for i in C:
        prev_term = cap
        decided = None
        for h in H[i]:
            r = h["round"]
            col.check("term_round_monotone", h["term_round"] <= prev_term, i=i, round=r)
            prev_term = h["term_round"]
            if decided is not None:
                col.check("decision_frozen", (h["decided_at"], h["y"]) == decided, i=i, round=r)
            elif h["decided_at"] is not None:
                decided = (h["decided_at"], h["y"])
            v_prev = x[i] if r == 1 else row(i, r - 1)["v"]
            if h["decided_at"] is None:
                col.check("p4", v_prev < h["v"], i=i, round=r, before=v_prev, after=h["v"])
            for j in sorted(h["newly_bad"]):
                if j in C:
                    # a correct process that already stopped is silent, not faulty
                    col.check("p8", len(H[j]) < r, i=i, j=j, round=r)

    always2 = set(range(n))  # graded 2 by some correct process in every round so far
    for r in range(1, full + 1):
        Sr = S(r)
        v_r = vbar(r)
        s_r = join_all(Sr)
        for i in C:
            v_i = row(i, r)["v"]
            for j in C:
                sv_j = row(j, r)["sv"]
                col.check("p1", member_of_generated(sv_j, v_i),
                          lambda: dict(round=r, i=i, j=j, v_i=v_i, sv_j=sv_j))
            col.check("p2", member_of_generated(row(i, r)["sv"], v_r), round=r, i=i, v=v_r)
        col.check("p3", leq(v_r, s_r), round=r, v=v_r, s=s_r)

        for q in range(n):
            graded = {i: row(i, r)["triples"][q] for i in C}
            accepted = {g.value for g in graded.values() if g.score >= 1}
            col.check("at_most_one", len(accepted) <= 1, round=r, leader=q, values=accepted)
            col.check("gradecast_p2", len(accepted) <= 1, round=r, leader=q, values=accepted)
            if any(g.score == 2 for g in graded.values()):
                col.check("gradecast_p3", all(g.score >= 1 for g in graded.values()),
                          lambda: dict(round=r, leader=q, scores={i: g.score for i, g in graded.items()}))
            if q in C:
                sent = row(q, r)["v_before"]
                col.check("gradecast_p1", all(g.score == 2 and g.value == sent for g in graded.values()),
                          lambda: dict(round=r, leader=q, sent=sent,
                                       got={i: [g.value, g.score] for i, g in graded.items()}))
            if r > 1:
                everyone_bad = all(q in row(i, r - 1)["bad"] for i in C)
                if everyone_bad:
                    col.check("bad_no_more", all(g.score == 0 for g in graded.values()),
                              round=r, leader=q)

        if r < full:
            Sn = S(r + 1)
            col.check("p6", all(member_of_generated(Sr, u) for u in Sn), round=r,
                      outside=[u for u in Sn if not member_of_generated(Sr, u)])
            col.check("p7", leq(join_all(Sn), s_r), round=r)
            # strict growth follows from p4 for a process still undecided after r + 1
            if any(row(i, r + 1)["decided_at"] is None for i in C):
                col.check("p5", v_r < vbar(r + 1), round=r, before=v_r, after=vbar(r + 1))
            for i in C:
                col.check("correct_contains", leq(v_r, row(i, r + 1)["v"]), round=r, i=i)

        if v_r == s_r:
            late = {i: tr.decided_at[i] for i in C
                    if tr.decided_at[i] is None or tr.decided_at[i] > r + 2}
            col.check("dec_2round", not late, round=r, late=late)

        # terrible: graded 2 by some correct process in every earlier round, by none now
        graded2 = {q for q in range(n) if any(row(i, r)["triples"][q].score == 2 for i in C)}
        terrible = sorted(always2 - graded2)
        always2 &= graded2
        late = {i: tr.decided_at[i] for i in C
                if tr.decided_at[i] is None or tr.decided_at[i] > r + len(terrible) + 2}
        col.check("dec_fr", not late, round=r, terrible=terrible, late=late)
    return col.verdicts()


# -- shared SetGradecast checks ----------------------------------------------

def _sgc_checks(col: _Collector, r: int, C: List[int], scored: Mapping[int, Mapping],
                safe: Mapping, sent: Mapping) -> None:
    """``scored[i][q]`` is i's list of ScoredSets for leader q, ``safe(i, q, label)``
    i's safe set for that instance before the round, ``sent[q]`` the
    ``(values, label)`` a correct leader q gradecast."""
    leaders = sorted({q for i in C for q in scored[i]} | set(sent))
    for q in leaders:
        per: Dict[int, Dict] = {}
        for i in C:
            per[i] = {(ss.label, v): c for ss in scored[i].get(q, ()) for v, c in ss.scores.items()}
        items = set().union(*(set(p) for p in per.values()))
        for label, v in sorted(items, key=lambda it: (str(it[0]), sort_key(it[1]))):
            if any(per[i].get((label, v), 0) == 2 for i in C):
                col.check("setgradecast_p2", all(per[i].get((label, v), 0) >= 1 for i in C),
                          round=r, leader=q, label=label, value=v)
            for i in C:
                if per[i].get((label, v), 0) >= 1:
                    col.check("setgradecast_p3", any(v in safe(j, q, label) for j in C),
                              round=r, leader=q, label=label, value=v, grader=i)
        if q in sent:
            values, label = sent[q]
            for v in values:
                if all(v in safe(i, q, label) for i in C):
                    col.check("setgradecast_p1", all(per[i].get((label, v), 0) == 2 for i in C),
                              round=r, leader=q, label=label, value=v)
        labels = {lab for p in per.values() for lab, _ in p}
        if q in sent:
            col.check("setgradecast_label", labels <= {sent[q][1]}, round=r, leader=q, labels=labels)


# -- logn lemmas -------------------------------------------------------------

LOGN_CHECKS = (
    "initial_safe_rows", "cls_logn_p1", "cls_logn_p2", "cls_logn_p3", "domination",
    "correct_value", "comp", "setgradecast_p1", "setgradecast_p2", "setgradecast_p3",
    "setgradecast_label",
)


def logn_lemmas(tr) -> List[Verdict]:
    col = _Collector(LOGN_CHECKS)
    C = tr.correct
    H = tr.histories
    n = tr.config.n
    rounds = ceil_log2(n)
    for i in C:
        # one set U copied into every slot of the process's own array
        col.check("initial_safe_rows", len(set(H[i][0]["S"])) == 1, i=i)

    def SF(r, ids) -> frozenset:
        return frozenset().union(*(H[i][r]["S"][j] for i in C for j in ids))

    for r in range(1, rounds + 1):
        for g in groups_at(n, r):
            sp = split(g)
            if sp is None:
                continue
            parent = SF(r - 1, range(*g))
            sf_s = SF(r, range(*sp.slaves))
            col.check("cls_logn_p1", sf_s <= parent, round=r, group=g, extra=sf_s - parent)
            sf_m = SF(r, range(*sp.masters))
            col.check("cls_logn_p2", sf_m <= parent, round=r, group=g, extra=sf_m - parent)
            for i in C:
                if g[0] <= i < g[1]:
                    V = H[i][r]["V"]
                    col.check("cls_logn_p3", V <= parent, round=r, group=g, i=i, extra=V - parent)
                if sp.masters[0] <= i < sp.masters[1]:
                    for t in range(r, rounds + 1):
                        col.check("domination", sf_s <= H[i][t]["V"], round=r, group=g, j=i,
                                  at_round=t, missing=sf_s - H[i][t]["V"])
        scored = {i: H[i][r]["scored"] for i in C}
        slaves = set()
        for g in groups_at(n, r):
            sp = split(g)
            if sp is not None:
                slaves.update(range(*sp.slaves))
        sent = {q: (H[q][r - 1]["V"], None) for q in C if q in slaves}
        _sgc_checks(col, r, C, scored, lambda i, q, label: H[i][r - 1]["S"][q] if label is None else (),
                    sent)

    for r in range(0, rounds + 1):
        for j in C:
            for v in H[j][r]["V"]:
                if all(v in H[i][r]["S"][j] for i in C):
                    for t in range(r, rounds + 1):
                        ok = v in H[j][t]["V"] and all(v in H[i][t]["S"][j] for i in C)
                        col.check("correct_value", ok, round=r, j=j, value=v, at_round=t)

    finals = {i: H[i][rounds]["V"] for i in C}
    for i, j in combinations(C, 2):
        col.check("comp", finals[i] <= finals[j] or finals[j] <= finals[i], i=i, j=j,
                  V_i=finals[i], V_j=finals[j])
    return col.verdicts()


# -- logf lemmas -------------------------------------------------------------

LOGF_CHECKS = (
    "legit_labels", "dec_values", "dec_safe", "cls_logf_p1", "cls_logf_p2", "cls_logf_p3",
    "cls_logf_p4", "cls_logf_p5", "cls_logf_p6", "cls_logf_p7", "cls_logf_p8",
    "correct_value", "same_group", "comp", "setgradecast_p1", "setgradecast_p2",
    "setgradecast_p3", "setgradecast_label",
)


def logf_lemmas(tr) -> List[Verdict]:
    col = _Collector(LOGF_CHECKS)
    C = tr.correct
    H = tr.histories
    scheme = LabelScheme(tr.config.n, tr.config.f)
    rounds = scheme.levels
    sc = scheme.scale
    # the size bounds count processes through their values, which needs every
    # correct input to be a different value
    counted = len({tr.config.inputs[i] for i in C}) == len(C)

    # H[i][r - 1] is process i at the beginning of round r (r = 1 .. rounds + 1)
    def V(i, r):
        return H[i][r - 1]["V"]

    def label(i, r):
        return H[i][r - 1]["label"]

    def SF(r, k) -> frozenset:
        return frozenset().union(*(H[i][r - 1]["F"].get(k, frozenset()) for i in C))

    for r in range(1, rounds + 2):
        legit = scheme.labels_at(r)
        groups: Dict[int, List[int]] = {}
        for i in C:
            col.check("legit_labels", label(i, r) in legit, round=r, i=i,
                      label=scheme.unscale(label(i, r)))
            groups.setdefault(label(i, r), []).append(i)
        w = scheme.window(r)
        for k, members in sorted(groups.items()):
            for i in members:
                size = len(V(i, r)) * sc
                # the lower end holds with equality after the initial round when
                # f is a power of two and f processes are silent, so it is checked
                # non-strictly
                col.check("dec_values", not counted or k - w <= size <= k + w, round=r, label=scheme.unscale(k), i=i,
                          size=len(V(i, r)), low=scheme.unscale(k - w), high=scheme.unscale(k + w))
            col.check("dec_safe", not counted or len(SF(r, k)) * sc <= k + w, round=r, label=scheme.unscale(k),
                      size=len(SF(r, k)), high=scheme.unscale(k + w))
            if r > rounds:
                continue
            lo, hi = k - w, k + w
            m, s = scheme.master(k, r), scheme.slave(k, r)
            sf_k, sf_m, sf_s = SF(r, k), SF(r + 1, m), SF(r + 1, s)
            col.check("cls_logf_p3", sf_m <= sf_k, round=r, label=scheme.unscale(k), extra=sf_m - sf_k)
            col.check("cls_logf_p4", sf_s <= sf_k, round=r, label=scheme.unscale(k), extra=sf_s - sf_k)
            col.check("cls_logf_p5", not counted or len(sf_m) * sc <= hi, round=r, label=scheme.unscale(k), size=len(sf_m))
            if any(label(i, r + 1) == s for i in members):
                col.check("cls_logf_p6", not counted or len(sf_s) * sc <= k, round=r, label=scheme.unscale(k),
                          size=len(sf_s))
            for i in members:
                nxt = V(i, r + 1)
                size = len(nxt) * sc
                col.check("cls_logf_p8", nxt <= sf_k, round=r, i=i, extra=nxt - sf_k)
                if label(i, r + 1) == m:
                    col.check("cls_logf_p1", not counted or k < size <= hi, round=r, i=i, size=len(nxt))
                    col.check("cls_logf_p7", sf_s <= nxt, round=r, j=i, missing=sf_s - nxt)
                else:
                    col.check("cls_logf_p2", not counted or lo <= size <= k, round=r, i=i, size=len(nxt))

        if r <= rounds:
            scored = {i: H[i][r]["scored"] for i in C}
            sent = {q: (V(q, r), label(q, r)) for q in C}
            _sgc_checks(col, r, C, scored,
                        lambda i, q, lab: H[i][r - 1]["F"].get(lab, frozenset()), sent)

    for r in range(1, rounds + 2):
        for j in C:
            for v in V(j, r):
                if all(v in H[i][r - 1]["F"].get(label(j, r), frozenset()) for i in C):
                    for t in range(r, rounds + 2):
                        ok = v in V(j, t) and all(
                            v in H[i][t - 1]["F"].get(label(j, t), frozenset()) for i in C)
                        col.check("correct_value", ok, round=r, j=j, value=v, at_round=t)

    final = rounds + 1
    for i, j in combinations(C, 2):
        Vi, Vj = V(i, final), V(j, final)
        if label(i, final) == label(j, final):
            col.check("same_group", Vi == Vj, i=i, j=j, V_i=Vi, V_j=Vj)
        col.check("comp", Vi <= Vj or Vj <= Vi, i=i, j=j, V_i=Vi, V_j=Vj)
    return col.verdicts()


# -- entry points ------------------------------------------------------------

_LEMMAS = {"sqrtf": sqrtf_lemmas, "logn": logn_lemmas, "logf": logf_lemmas}


def check_all(tr) -> List[Verdict]:
    cfg = tr.config
    inputs = {i: cfg.inputs[i] for i in tr.correct}
    decided = check_decided(tr)
    verdicts = [decided]
    if decided.passed:
        outputs = {i: tr.outputs[i] for i in tr.correct}
        verdicts += [
            check_comparability(outputs),
            check_downward(inputs, outputs),
            check_upward(inputs, outputs, tr.recorded_byz_values, cfg.t),
        ]
    verdicts += [check_round_bound(tr), check_message_bound(tr)]
    for v in _LEMMAS[cfg.algorithm](tr):
        verdicts.append(Verdict(f"{cfg.algorithm}.{v.name}", v.passed, v.witness))
    return verdicts


def digests(tr) -> List[dict]:
    """Compact per-round snapshot of every correct process."""
    out = []
    rounds = max((len(h) for h in tr.histories.values()), default=0)
    for r in range(rounds):
        snap = {}
        for i in tr.correct:
            h = tr.histories[i]
            if r >= len(h):
                continue
            row = h[r]
            if tr.config.algorithm == "sqrtf":
                snap[str(i)] = {"v": encode(row["v"]), "bad": sorted(row["bad"]),
                                "decided_at": row["decided_at"], "term_round": row["term_round"]}
            else:
                d = {"V": [encode(v) for v in sorted(row["V"], key=sort_key)]}
                if "label" in row:
                    d["label"] = row["label"]
                if "group" in row:
                    d["group"] = list(row["group"])
                snap[str(i)] = d
        out.append({"round": r + 1, "processes": snap})
    return out
