import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from pytest import raises

from services.jets import Jet, jet_sum, lift
from utils.errors import DomainError


def test_variable_seeds_unit_gradient():
    x = Jet.variable(1.5, 2, 1)
    assert x.value == 1.5
    assert list(x.derivative_block(1)) == [0, 0, 1, 0, 0, 0]


def test_sqrt_derivatives():
    root = Jet.variable(2.0, 0, 2).sqrt()
    assert math.isclose(float(root.value), math.sqrt(2.0))
    assert math.isclose(root.derivative_block(1)[0], 0.5 / math.sqrt(2.0))
    assert math.isclose(root.derivative_block(2)[0, 0], -0.25 * 2.0 ** -1.5)
    assert root.derivative_block(2)[1, 1] == 0.0


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_product_rule(a, b):
    x = Jet.variable(a, 0, 2)
    y = Jet.variable(b, 1, 2)
    product = x * y
    assert product.derivative_block(1)[0] == pytest.approx(b)
    assert product.derivative_block(1)[1] == pytest.approx(a)
    assert product.derivative_block(2)[0, 1] == pytest.approx(1.0)
    assert product.derivative_block(2)[0, 0] == pytest.approx(0.0)


@given(st.floats(0.1, 50))
def test_reciprocal_matches_closed_form(x0):
    inverse = Jet.variable(x0, 3, 2).reciprocal()
    assert float(inverse.value) == pytest.approx(1 / x0)
    assert inverse.derivative_block(1)[3] == pytest.approx(-1 / x0 ** 2)
    assert inverse.derivative_block(2)[3, 3] == pytest.approx(2 / x0 ** 3)


def test_matrix_jets_follow_leibniz():
    p = Jet.variable(0.7, 0, 1)
    a = np.array([[0, 1], [1, 0]], dtype=complex)
    left = lift(a, 1) * p
    product = left @ left
    assert np.allclose(product.value, 0.49 * np.eye(2))
    assert np.allclose(product.derivative_block(1)[0], 1.4 * np.eye(2))


def test_partial_and_truncate():
    x = Jet.variable(3.0, 1, 2)
    square = x * x
    partial = square.partial(1)
    assert partial.order == 1
    assert float(partial.value) == pytest.approx(6.0)
    assert square.truncate(1).order == 1
    with raises(ValueError):
        square.truncate(3)


def test_dagger_conjugates_blocks():
    jet = lift(np.array([[0, 1j], [0, 0]]), 1) * Jet.variable(1.0, 0, 1)
    dagger = jet.dagger()
    assert dagger.value[1, 0] == -1j
    assert dagger.derivative_block(1)[0][1, 0] == -1j


def test_jet_sum():
    total = jet_sum([Jet.variable(1.0, a, 1) for a in range(6)])
    assert float(total.value) == 6.0
    assert np.all(total.derivative_block(1) == 1.0)


@pytest.mark.parametrize('value,alpha', [(-1.0, 0.5), (0.0, -1.0), (0.0, 0.5)])
def test_power_outside_domain(value, alpha):
    with raises(DomainError):
        Jet.variable(value, 0, 1).power(alpha)
