import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from ecsdbn.cost import (apply_costs, cost_scaled_proba, expected_risk, overall_risk,
                         predict_with_costs)
from ecsdbn.exceptions import ParameterError, ShapeError


def prob_rows(n, k, seed):
    p = np.random.default_rng(seed).random((n, k))
    return p / p.sum(axis=1, keepdims=True)


def test_zero_costs_identity():
    p = prob_rows(10, 3, 0)
    assert np.array_equal(apply_costs(p, [0, 0, 0]), p)


def test_worked_example():
    np.testing.assert_allclose(apply_costs([[0.7, 0.3]], [0.6, 0.0]), [[0.28, 0.30]], atol=1e-15)
    assert predict_with_costs([[0.7, 0.3]], [0.6, 0.0])[0] == 1
    assert predict_with_costs([[0.7, 0.3]], [0.0, 0.0])[0] == 0


def test_unit_cost_annihilates_column():
    out = apply_costs(prob_rows(8, 3, 1), [0.2, 1.0, 0.5])
    assert np.all(out[:, 1] == 0)


def test_all_unit_costs_fall_back_to_first_class():
    assert np.all(predict_with_costs(prob_rows(5, 3, 2), [1, 1, 1]) == 0)
    np.testing.assert_allclose(cost_scaled_proba(prob_rows(2, 4, 3), [1, 1, 1, 1]), 0.25)


def test_guards():
    with pytest.raises(ShapeError):
        apply_costs(prob_rows(2, 3, 0), [0.1, 0.2])
    with pytest.raises(ParameterError):
        apply_costs(prob_rows(2, 2, 0), [0.1, 1.2])


probs_strategy = st.integers(0, 2**32 - 1).map(lambda s: prob_rows(25, 3, s))


@given(probs_strategy, st.floats(0, 0.999))
def test_uniform_costs_keep_argmax(p, c):
    assert np.array_equal(predict_with_costs(p, [c, c, c]), np.argmax(p, axis=1))


@given(probs_strategy, arrays(float, 3, elements=st.floats(0, 1)), st.integers(0, 2),
       st.floats(0, 1))
def test_raising_a_cost_never_adds_predictions(p, c, j, bump):
    before = predict_with_costs(p, c) == j
    raised = c.copy()
    raised[j] = max(c[j], bump)
    after = predict_with_costs(p, raised) == j
    assert np.all(before | ~after)


@given(probs_strategy, arrays(float, 3, elements=st.floats(0, 1)))
def test_scaled_values_in_unit_interval(p, c):
    out = apply_costs(p, c)
    assert np.all((out >= 0) & (out <= 1))
    q = cost_scaled_proba(p, c)
    np.testing.assert_allclose(q.sum(axis=1), 1.0)
    assert np.array_equal(np.argmax(q, axis=1), predict_with_costs(p, c))


def test_expected_risk_cases():
    cm0 = np.zeros((3, 3))
    assert expected_risk([0.2, 0.3, 0.5], cm0, 1) == 0.0
    assert abs(expected_risk([0.3, 0.7], [[0, 1], [0.4, 0]], 0) - 0.7) < 1e-15
    ones = np.ones((3, 3)) - np.eye(3)
    p = [0.2, 0.3, 0.5]
    for i in range(3):
        assert abs(expected_risk(p, ones, i) - (1 - p[i])) < 1e-15


def test_expected_risk_guards():
    with pytest.raises(ParameterError):
        expected_risk([0.5, 0.5], np.zeros((2, 2)), 2)
    with pytest.raises(ParameterError):
        expected_risk([0.5, 0.5], [[0.1, 0.2], [0.3, 0]], 0)


def test_overall_risk_cases():
    p = prob_rows(4, 3, 5)
    assert overall_risk(p, np.zeros((3, 3)), np.full(4, 0.25)) == 0.0
    cm = [[0, 0.5, 0.2], [0.1, 0, 0.9], [0.3, 0.6, 0]]
    single = p[:1]
    expected = sum(expected_risk(single[0], cm, i) for i in range(3))
    assert abs(overall_risk(single, cm, [1.0]) - expected) < 1e-15


def test_overall_risk_hand_case():
    probs = [[0.2, 0.8], [0.6, 0.4]]
    cm = [[0, 0.5], [0.25, 0]]
    # sample 1: 0.8*0.5 + 0.2*0.25 = 0.45; sample 2: 0.4*0.5 + 0.6*0.25 = 0.35
    assert abs(overall_risk(probs, cm, [0.3, 0.7]) - (0.3 * 0.45 + 0.7 * 0.35)) < 1e-12
    with pytest.raises(ShapeError):
        overall_risk(probs, cm, [1.0])
