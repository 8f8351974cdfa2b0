import numpy as np
import pytest
from pytest import raises

from config.tolerances import TIME_RANGE
from services.jets import lift
from services.opcalc import (DiffOp, MomentumPoint, commutator, commutator_op, compose, conjugate, constant_matrix,
                             momentum, op_equal_at, position, sample_points)
from utils.errors import DomainError, NonUnitaryError, OrderError


@pytest.fixture
def q(params):
    return MomentumPoint((0.3, -1.2, 0.8, 2.0, -0.4, 1.1), params, t=0.7)


@pytest.mark.parametrize('a', range(1, 7))
@pytest.mark.parametrize('b', range(1, 7))
def test_canonical_pair(q, a, b):
    bracket = commutator(position(a, 1), momentum(b, 1), q)
    expected = 1j if a == b else 0.0
    assert bracket.zeroth.value[0, 0] == pytest.approx(expected)
    assert all(np.all(j.value == 0) for j in bracket.first.values())


def test_chain_rule_on_composition(q):
    """x_1 p_1 = i + p_1 x_1 with x_A = i d/dp_A."""
    product = compose(position(1, 1), momentum(1, 1)).evaluate(q, 0)
    assert product.zeroth.value[0, 0] == pytest.approx(1j)
    assert product.first[0].value[0, 0] == pytest.approx(1j * q.p[0])


def test_commutator_with_square(q):
    square = compose(momentum(1, 1), momentum(1, 1))
    bracket = commutator(position(1, 1), square, q)
    assert bracket.zeroth.value[0, 0] == pytest.approx(2j * q.p[0])


def test_reduced_commutator_of_positions(q):
    bracket = commutator_op(position(1, 1), position(2, 1), reduce=True)
    assert bracket.order == 1
    coefficients = bracket.evaluate(q, 0)
    assert not coefficients.second
    assert np.all(coefficients.zeroth.value == 0)


def test_order_limit():
    second = compose(position(1, 1), position(2, 1))
    with raises(OrderError):
        compose(second, position(3, 1))
    with raises(OrderError):
        DiffOp(1, 3, lambda q, k: None)


def test_conjugation_by_constant_unitary(q):
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    conjugated = conjugate(lambda point, k: lift(swap, k), position(2, 2))
    report = op_equal_at(conjugated, position(2, 2), [q], 1e-15)
    assert report.passed


def test_conjugation_rejects_non_unitary(q):
    doubled = conjugate(lambda point, k: lift(2 * np.eye(2), k), momentum(1, 2))
    with raises(NonUnitaryError):
        doubled.evaluate(q, 0)


def test_op_equal_at_reports_every_grade(params):
    points = sample_points(params, 2, 1)
    report = op_equal_at(momentum(1, 2), momentum(1, 2) + constant_matrix(0.5 * np.eye(2)), points, 1e-12)
    assert len(report.entries) == 3 * len(points)
    orders = report.max_by_order()
    assert orders[0] == pytest.approx(0.5)
    assert orders[1] == orders[2] == 0.0
    assert not report.passed


def test_point_parameters_must_match(params, unequal_params):
    op = momentum(1, 8).with_params(params)
    with raises(DomainError):
        op.evaluate(MomentumPoint((0.0,) * 6, unequal_params), 0)


@pytest.mark.parametrize('p', [(0.0,) * 5, (0.0,) * 7, (np.nan, 0, 0, 0, 0, 0)])
def test_bad_momentum_points(params, p):
    with raises(DomainError):
        MomentumPoint(p, params)


def test_sample_points_are_reproducible(params):
    first = sample_points(params, 5, 0x5EED)
    second = sample_points(params, 5, 0x5EED)
    assert first == second
    assert len(first) == 12
    assert first[0].p == (0.0,) * 6
    assert all(abs(q.t) <= TIME_RANGE for q in first)
    assert sample_points(params, 5, 1)[-1] != first[-1]
