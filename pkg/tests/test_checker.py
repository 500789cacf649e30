from blasim import RunConfig, simulate
from blasim.checker import (
    check_comparability, check_downward, check_message_bound, check_round_bound, check_upward,
    expected_sub_rounds, sqrtf_outer_bound,
)
from blasim.lattice import element

a, b, c, z = element((0, 0)), element((1, 0)), element((2, 0)), element((3, 0))


def test_comparability():
    assert check_comparability({0: a, 1: a | b, 2: a | b | c}).passed
    v = check_comparability({0: a | b, 1: a | c})
    assert not v.passed and v.witness == {"i": 0, "j": 1, "y_i": "{0:0,1:0}", "y_j": "{0:0,2:0}"}


def test_downward():
    assert check_downward({0: a}, {0: a | b}).passed
    v = check_downward({0: a, 1: b}, {0: a, 1: a})
    assert not v.passed and v.witness["i"] == 1


def test_upward_accepts_recorded_byzantine_values():
    inputs = {0: a, 1: b}
    assert check_upward(inputs, {0: a | b, 1: a | b}, {}, 0).passed
    assert check_upward(inputs, {0: a | z, 1: a | b | z}, {3: [z]}, 1).passed


def test_upward_rejects_unexplained_tags():
    v = check_upward({0: a, 1: b}, {0: a | z, 1: a | b | z}, {}, 1)
    assert not v.passed and v.witness["unexplained_tags"] == [[3, 0]]


def test_upward_rejects_two_values_from_one_id_or_too_many_ids():
    assert not check_upward({0: a}, {0: a}, {3: [z, c]}, 1).passed
    assert not check_upward({0: a}, {0: a}, {2: [c], 3: [z]}, 1).passed


def test_bounds():
    assert [sqrtf_outer_bound(t) for t in (0, 1, 2, 4, 5)] == [3, 4, 6, 6, 8]
    assert expected_sub_rounds("logn", 16, 5) == 15
    assert expected_sub_rounds("logf", 16, 5) == 15
    assert expected_sub_rounds("logf", 4, 1) == 3
    assert expected_sub_rounds("sqrtf", 4, 1) is None


def test_round_and_message_bounds_hold_on_a_run():
    tr = simulate(RunConfig.make(13, "logf", t=4, adversary="equivocate_split", seed=1))
    assert check_round_bound(tr).passed
    assert check_message_bound(tr).passed


def test_round_bound_flags_a_wrong_count():
    tr = simulate(RunConfig.make(7, "logn"))
    tr.sub_rounds += 1
    v = check_round_bound(tr)
    assert not v.passed and v.witness == {"sub_rounds": 13, "expected": 12}
