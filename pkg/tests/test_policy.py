import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multisig_opt.errors import CollisionUnresolvable, InvalidParameter
from multisig_opt.policy import (
    PolicyDocument,
    PolicyStage,
    Unit,
    compile_policy,
    example_degrading_policy,
    parse_policy,
    serialize_policy,
    threshold_to_m,
)
from multisig_opt.schedule import Schedule
from multisig_opt.verify import golden_policy_text


def test_threshold_to_m():
    assert threshold_to_m(2 / 3, 3) == 2
    assert threshold_to_m(1 / 3, 3) == 1
    assert threshold_to_m(0.0, 5) == 1
    assert threshold_to_m(1.0, 5) == 5
    assert threshold_to_m(0.41, 5) == 3
    with pytest.raises(InvalidParameter):
        threshold_to_m(0.5, 0)


@given(tau=st.floats(0.0, 1.0), n=st.integers(1, 50))
def test_rounding_never_below_optimum(tau, n):
    m = threshold_to_m(tau, n)
    assert 1 <= m <= n
    assert m / n >= tau - 1e-9


@given(taus=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=10), n=st.integers(1, 30))
def test_realization_monotone(taus, n):
    ordered = sorted(taus)
    ms = [threshold_to_m(t, n) for t in ordered]
    assert ms == sorted(ms)


def test_golden_fixture():
    text = serialize_policy(example_degrading_policy())
    assert text == golden_policy_text()
    doc = parse_policy(text)
    assert [(s.m, s.n or doc.n) for s in doc.stages] == [(2, 3), (1, 3), (1, 1)]
    assert [s.activates_at for s in doc.stages] == [0, 52560, 262800]


def test_collision_bumps_one_tick():
    doc = compile_policy(Schedule((0.8, 0.5, 0.2), (1.0, 1.2)), 10, Unit.SECONDS, 1.0)
    assert [s.activates_at for s in doc.stages] == [0, 1, 2]


def test_collision_past_horizon():
    with pytest.raises(CollisionUnresolvable):
        compile_policy(Schedule((0.8, 0.5), (1.9,), horizon=2.0), 10, Unit.SECONDS, 1.0)


def test_document_validation():
    with pytest.raises(InvalidParameter):
        PolicyDocument(3, (PolicyStage(4, 0, 1.0, "x"),))
    with pytest.raises(InvalidParameter):
        PolicyDocument(3, (PolicyStage(1, 5, 0.3, "x"),))
    with pytest.raises(InvalidParameter):
        PolicyDocument(3, (PolicyStage(2, 0, 0.6, "x"), PolicyStage(1, 0, 0.3, "y")))


@st.composite
def documents(draw):
    n = draw(st.integers(1, 20))
    k = draw(st.integers(1, 6))
    gaps = draw(st.lists(st.integers(1, 10**6), min_size=k - 1, max_size=k - 1))
    times = [0]
    for g in gaps:
        times.append(times[-1] + g)
    stages = []
    for t in times:
        stage_n = draw(st.one_of(st.none(), st.integers(1, 20)))
        m = draw(st.integers(1, stage_n or n))
        tau = draw(st.floats(0.0, 1.0))
        note = draw(st.text(max_size=30))
        stages.append(PolicyStage(m, t, tau, note, stage_n))
    unit = draw(st.sampled_from(list(Unit)))
    scale = draw(st.floats(1e-3, 1e6))
    return PolicyDocument(n, tuple(stages), unit, scale)


@settings(max_examples=100)
@given(doc=documents())
def test_serialize_round_trip(doc):
    text = serialize_policy(doc)
    assert parse_policy(text) == doc
    assert serialize_policy(parse_policy(text)) == text


def test_compile_infinite_horizon_schedule():
    sched = Schedule((0.678909006, 0.0), (7.59510311,))
    doc = compile_policy(sched, 5, "blocks", 144.0)
    assert [s.m for s in doc.stages] == [4, 1]
    assert doc.stages[1].activates_at == math.floor(7.59510311 * 144 + 0.5)
