import pytest
from hypothesis import given, settings, strategies as st

from blasim.bla_sqrtf import (
    HarnessError, ProtocolError, SqrtfState, ceil_sqrt, round_cap, sqrtf_output, sqrtf_round,
    update_term_round,
)
from blasim.gradecast import GradeTriple
from blasim.lattice import comparable, element, join_all
from blasim.sim import RunConfig, run

a, b, c, d = (element((i, 0)) for i in range(4))


def triples(*graded):
    return {q: GradeTriple(q, v, s) for q, (v, s) in enumerate(graded)}


def all_correct_oracle(inputs):
    """Independent model of a run with no faults: every value is graded 2
    everywhere, so each round everyone moves to the join of all current values
    and decides once its value is comparable with all of them."""
    vals = list(inputs)
    decided = [None] * len(vals)
    r = 0
    while None in decided:
        r += 1
        for i, v in enumerate(vals):
            if decided[i] is None and all(comparable(v, u) for u in vals):
                decided[i] = (r, v)
        top = join_all(vals)
        vals = [top] * len(vals)
    return decided


@pytest.mark.parametrize("k,want", [(0, 0), (1, 1), (2, 2), (4, 2), (5, 3), (9, 3), (10, 4)])
def test_ceil_sqrt(k, want):
    assert ceil_sqrt(k) == want


def test_round_cap_takes_smaller_bound():
    assert round_cap(1, 100) == 4
    assert round_cap(5, 100) == 8
    assert round_cap(5, 2) == 4


def test_identical_inputs_decide_in_round_one():
    s = SqrtfState(v=a, term_round=4)
    s, dig = sqrtf_round(s, triples((a, 2), (a, 2), (a, 2), (a, 2)), 4)
    assert (s.decided_at, s.y, s.v) == (1, a, a)
    assert dig.u2 == {a} and not dig.newly_bad


def test_distinct_inputs_decide_in_round_two():
    s = SqrtfState(v=a, term_round=4)
    t1 = triples((a, 2), (b, 2), (c, 2), (d, 2))
    s, _ = sqrtf_round(s, t1, 4)
    assert s.decided_at is None and s.v == a | b | c | d
    top = a | b | c | d
    s, _ = sqrtf_round(s, triples((top, 2), (top, 2), (top, 2), (top, 2)), 4)
    assert (s.decided_at, s.y) == (2, top)
    assert sqrtf_output(s) == top


def test_low_scores_enter_bad_set_and_sv_is_replaced():
    s = SqrtfState(v=a, sv=frozenset({d}), term_round=6)
    s, dig = sqrtf_round(s, triples((a, 2), (b, 1), (None, 0), (a, 2)), 4)
    assert s.bad == {1, 2}
    assert dig.newly_bad == {1, 2}
    assert s.sv == {a, b}
    assert dig.u2 <= dig.u1


def test_decision_is_frozen():
    s = SqrtfState(v=a, term_round=6)
    s, _ = sqrtf_round(s, triples((a, 2), (a, 2), (a, 2), (a, 2)), 4)
    s, _ = sqrtf_round(s, triples((a | b, 2), (a, 2), (a, 2), (a, 2)), 4)
    assert (s.decided_at, s.y) == (1, a)
    assert s.v == a | b


def test_wrong_triple_count_is_a_harness_error():
    with pytest.raises(HarnessError):
        sqrtf_round(SqrtfState(v=a), triples((a, 2)), 4)


def test_undecided_output_is_a_protocol_error():
    with pytest.raises(ProtocolError):
        sqrtf_output(SqrtfState(v=a, term_round=3))


def test_term_round_update():
    s = SqrtfState(v=a, term_round=10, round=1)
    assert update_term_round(s, 0).term_round == 3
    s = SqrtfState(v=a, term_round=3, round=2)
    assert update_term_round(s, 5).term_round == 3


@settings(max_examples=30, deadline=None)
@given(st.lists(st.frozensets(st.sampled_from([(o, 0) for o in range(4)]), min_size=1), min_size=4, max_size=7))
def test_simulator_matches_all_correct_oracle(inputs):
    n = len(inputs)
    rep = run(RunConfig.make(n, "sqrtf", inputs=inputs))
    want = all_correct_oracle(inputs)
    got = [(rep.decision_rounds[i], rep.outputs[i]) for i in range(n)]
    assert got == want
    assert rep.passed


def test_four_distinct_inputs_end_to_end():
    rep = run(RunConfig.make(4, "sqrtf"))
    top = a | b | c | d
    assert rep.outputs == {i: top for i in range(4)}
    assert rep.decision_rounds == {i: 2 for i in range(4)}
    # early stopping: nobody is ever flagged, so every process stops after round 3
    assert rep.outer_rounds == 3 and rep.sub_rounds == 9
