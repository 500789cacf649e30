import json

import pytest
from hypothesis import given, settings, strategies as st

from blasim import ConfigError, RunConfig, count_messages, run, simulate
from blasim.sim import phase_of


def test_make_defaults():
    cfg = RunConfig.make(7, "logn", t=2, seed=3)
    assert cfg.f == 2 and cfg.t == 2
    assert cfg.inputs[5] == frozenset({(5, 0)})
    assert len(cfg.correct) == 5
    assert cfg.universe.height == 28
    assert RunConfig.make(7, "logn", t=2, seed=3).byzantine_ids == cfg.byzantine_ids


@pytest.mark.parametrize("kwargs", [
    dict(n=4, algorithm="paxos"),
    dict(n=3, algorithm="sqrtf", f=1),
    dict(n=4, algorithm="sqrtf", byzantine_ids=[0, 1]),
    dict(n=4, algorithm="sqrtf", byzantine_ids=[4]),
    dict(n=4, algorithm="sqrtf", adversary="nonsense"),
    dict(n=4, algorithm="sqrtf", inputs=[frozenset({(9, 9)})] * 4),
    dict(n=4, algorithm="sqrtf", inputs=[frozenset()] * 3),
    dict(n=4, algorithm="sqrtf", seed=-1),
])
def test_validate_rejects(kwargs):
    n, alg = kwargs.pop("n"), kwargs.pop("algorithm")
    with pytest.raises(ConfigError):
        RunConfig.make(n, alg, **kwargs).validate()


@pytest.mark.parametrize("text", [
    "not json", "[1, 2]", '{"n": 4}',
    '{"n": 4, "f": 1, "algorithm": "sqrtf", "inputs": ["{0:0}"] , "bogus": 1}',
    '{"n": 4, "f": 1, "algorithm": "sqrtf", "inputs": ["{0:"]}',
])
def test_from_json_rejects(text):
    with pytest.raises(ConfigError):
        RunConfig.from_json(text)


def test_json_round_trip():
    cfg = RunConfig.make(10, "logf", t=3, adversary="crash_at(7)", seed=11)
    back = RunConfig.from_json(cfg.to_json())
    assert back.to_json() == cfg.to_json()
    assert back.adversary_params == {"r": 7}
    assert back.digest() == cfg.digest()


def test_phase_schedule():
    assert [phase_of("sqrtf", s) for s in (0, 2, 3, 8)] == [
        ("gc", 1, 1), ("gc", 3, 1), ("gc", 1, 2), ("gc", 3, 3)]
    assert [phase_of("logn", s) for s in (2, 3, 5, 6)] == [
        ("gc", 3, 1), ("sgc", 1, 2), ("sgc", 3, 2), ("sgc", 1, 3)]
    assert [phase_of("logf", s) for s in (3, 5, 6, 7)] == [
        ("sgc", 1, 2), ("sgc", 3, 2), ("cx", 1, 2), ("sgc", 1, 3)]


def test_all_correct_envelope_counts():
    rep = run(RunConfig.make(4, "logn"))
    # everyone messages everyone, except that only the two slaves of each
    # iteration open a SetGradecast instance
    assert rep.envelopes == 7 * 16 + 2 * 8
    assert count_messages(rep, include_self=False) == 7 * 12 + 2 * 6
    assert rep.max_correct_envelopes_per_sub_round == 16


def test_silent_byzantine_sends_nothing():
    rep = run(RunConfig.make(4, "sqrtf", byzantine_ids=[2], adversary="silent"))
    assert rep.envelopes == rep.correct_envelopes


def test_byzantine_outputs_are_not_reported():
    tr = simulate(RunConfig.make(7, "sqrtf", byzantine_ids=[1, 4], adversary="equivocate_split"))
    assert tr.correct == [0, 2, 3, 5, 6]
    assert set(tr.outputs) >= set(tr.correct)


def test_report_json_is_stable():
    cfg = RunConfig.make(7, "sqrtf", t=2, adversary="random_within_safe", seed=5)
    a, b = run(cfg).to_json(), run(cfg).to_json()
    assert a == b
    d = json.loads(a)
    assert d["all_pass"] is True
    assert d["config"] == cfg.to_dict()


def test_invert_flips_verdicts():
    rep = run(RunConfig.make(4, "sqrtf"), invert=True)
    assert not rep.passed
    assert all(not v.passed for v in rep.verdicts)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["sqrtf", "logn", "logf"]), st.integers(4, 10), st.integers(0, 2 ** 32))
def test_reruns_are_identical(alg, n, seed):
    cfg = RunConfig.make(n, alg, t=(n - 1) // 3, adversary="random_within_safe", seed=seed)
    assert run(cfg).to_json() == run(cfg).to_json()
