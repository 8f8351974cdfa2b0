"""
Forward-mode differentiation records for scalar and matrix valued functions of
the six momentum components.

A Jet carries a value together with every partial derivative up to a fixed
order. The k-th entry of ``derivs`` has shape ``(6,) * k + value.shape``;
``None`` stands for an identically vanishing derivative block. Products follow
the general Leibniz rule, scalar functions (square roots, reciprocals) are
applied through their Taylor expansion about the value.
"""

import itertools
import logging
from math import factorial
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from utils.errors import DomainError

logger = logging.getLogger(__name__)

N_MOMENTA = 6
_AXES = 'pqrstu'

Number = Union[int, float, complex]


def _value_subscripts(x_ndim: int, y_ndim: int, matmul: bool) -> Tuple[str, str, str]:
    if matmul:
        if x_ndim != 2 or y_ndim != 2:
            raise ValueError("Matrix product needs two matrix-valued jets")
        return 'xy', 'yz', 'xz'
    if x_ndim == 0 and y_ndim == 0:
        return '', '', ''
    if x_ndim == 0:
        letters = 'xyzw'[:y_ndim]
        return '', letters, letters
    if y_ndim == 0:
        letters = 'xyzw'[:x_ndim]
        return letters, '', letters
    raise ValueError("Elementwise product of two non-scalar jets is not defined; use @")


def _add_blocks(a: Optional[np.ndarray], b: Optional[np.ndarray]) -> Optional[np.ndarray]:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


def _binomial_series(alpha: float, x0: float, order: int) -> List[float]:
    """Taylor coefficients of x**alpha about x0 up to the given order."""
    coefficients = []
    falling = 1.0
    for j in range(order + 1):
        coefficients.append(falling / factorial(j) * x0 ** (alpha - j))
        falling *= alpha - j
    return coefficients


class Jet:
    __slots__ = ('value', 'derivs')
    # numpy operands defer to the reflected jet operators
    __array_ufunc__ = None

    def __init__(self, value, derivs: Sequence[Optional[np.ndarray]] = ()):
        self.value = np.asarray(value)
        self.derivs = tuple(derivs)

    # construction

    @classmethod
    def constant(cls, value, order: int) -> 'Jet':
        return cls(value, (None,) * order)

    @classmethod
    def variable(cls, x: float, index: int, order: int) -> 'Jet':
        """The coordinate function p_index, seeded with a unit first derivative."""
        if order == 0:
            return cls(float(x))
        seed = np.zeros(N_MOMENTA)
        seed[index] = 1.0
        return cls(float(x), (seed,) + (None,) * (order - 1))

    # inspection

    @property
    def order(self) -> int:
        return len(self.derivs)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    def component(self, k: int) -> Optional[np.ndarray]:
        return self.value if k == 0 else self.derivs[k - 1]

    def derivative_block(self, k: int) -> np.ndarray:
        """Dense k-th derivative tensor (zeros where the block is symbolic zero)."""
        block = self.component(k)
        if block is None:
            return np.zeros((N_MOMENTA,) * k + self.shape, dtype=self.value.dtype)
        return block

    def gradient(self) -> List[np.ndarray]:
        """The six first partials as separate arrays."""
        if self.order < 1:
            raise ValueError("Jet carries no derivatives")
        block = self.derivative_block(1)
        return [block[c] for c in range(N_MOMENTA)]

    def truncate(self, order: int) -> 'Jet':
        if order > self.order:
            raise ValueError(f"Cannot raise jet order from {self.order} to {order}")
        return Jet(self.value, self.derivs[:order])

    def partial(self, index: int) -> 'Jet':
        """d/dp_index as a jet of one order less."""
        if self.order < 1:
            raise ValueError("Partial derivative of an order-0 jet")
        blocks = [b[index] if b is not None else None for b in self.derivs]
        value = blocks[0] if blocks[0] is not None else np.zeros(self.shape, dtype=self.value.dtype)
        return Jet(value, blocks[1:])

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(b)) for b in (self.value,) + self.derivs if b is not None)

    # arithmetic

    def _coerce(self, other) -> 'Jet':
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order)

    def __add__(self, other) -> 'Jet':
        other = self._coerce(other)
        if other.shape != self.shape:
            raise ValueError(f"Shape mismatch in jet sum: {self.shape} vs {other.shape}")
        order = min(self.order, other.order)
        derivs = [_add_blocks(a, b) for a, b in zip(self.derivs[:order], other.derivs[:order])]
        return Jet(self.value + other.value, derivs)

    __radd__ = __add__

    def __neg__(self) -> 'Jet':
        return Jet(-self.value, [None if b is None else -b for b in self.derivs])

    def __sub__(self, other) -> 'Jet':
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> 'Jet':
        return self._coerce(other) - self

    def __mul__(self, other) -> 'Jet':
        if isinstance(other, (int, float, complex, np.number)):
            return Jet(self.value * other, [None if b is None else b * other for b in self.derivs])
        other = self._coerce(other)
        return _product(self, other, matmul=False)

    def __rmul__(self, other) -> 'Jet':
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return _product(self._coerce(other), self, matmul=False)

    def __matmul__(self, other) -> 'Jet':
        return _product(self, self._coerce(other), matmul=True)

    def __rmatmul__(self, other) -> 'Jet':
        return _product(self._coerce(other), self, matmul=True)

    def __truediv__(self, other) -> 'Jet':
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return self * (1.0 / other)

    def dagger(self) -> 'Jet':
        """Conjugate transpose over the value axes."""
        return Jet(
            np.swapaxes(self.value, -1, -2).conj(),
            [None if b is None else np.swapaxes(b, -1, -2).conj() for b in self.derivs],
        )

    def conj(self) -> 'Jet':
        return Jet(self.value.conj(), [None if b is None else b.conj() for b in self.derivs])

    # scalar functions

    def power(self, alpha: float, name: str = 'argument') -> 'Jet':
        if self.shape != ():
            raise ValueError("power() applies to scalar jets only")
        x0 = complex(self.value)
        if abs(x0.imag) > 0.0:
            raise DomainError(f"{name} is not real: {x0}")
        x0 = x0.real
        if x0 < 0.0 and not float(alpha).is_integer():
            raise DomainError(f"{name} is negative ({x0:.6g}) under a fractional power")
        if x0 == 0.0 and (alpha < 0 or (self.order > 0 and not float(alpha).is_integer())):
            raise DomainError(f"{name} vanishes where its power {alpha} is singular")
        return _taylor_compose(self, _binomial_series(alpha, x0, self.order))

    def sqrt(self, name: str = 'argument') -> 'Jet':
        return self.power(0.5, name)

    def reciprocal(self, name: str = 'denominator') -> 'Jet':
        return self.power(-1.0, name)


def _product(x: Jet, y: Jet, matmul: bool) -> Jet:
    vx, vy, vout = _value_subscripts(x.value.ndim, y.value.ndim, matmul)
    order = min(x.order, y.order)
    value = np.einsum(f'{vx},{vy}->{vout}', x.value, y.value)
    derivs = []
    for k in range(1, order + 1):
        axes = _AXES[:k]
        total = None
        for r in range(k + 1):
            xs = x.component(r)
            ys = y.component(k - r)
            if xs is None or ys is None:
                continue
            for subset in itertools.combinations(range(k), r):
                rest = [i for i in range(k) if i not in subset]
                sx = ''.join(axes[i] for i in subset) + vx
                sy = ''.join(axes[i] for i in rest) + vy
                term = np.einsum(f'{sx},{sy}->{axes}{vout}', xs, ys)
                total = term if total is None else total + term
        derivs.append(total)
    return Jet(value, derivs)


def _taylor_compose(x: Jet, coefficients: List[float]) -> Jet:
    """f(x) = sum_j c_j (x - x0)^j truncated at the jet order."""
    delta = Jet(np.zeros_like(x.value), x.derivs)
    result = Jet.constant(coefficients[0], x.order)
    power = None
    for j in range(1, x.order + 1):
        power = delta if power is None else _product(power, delta, matmul=False)
        result = result + power * coefficients[j]
    return result


def lift(matrix: np.ndarray, order: int) -> Jet:
    """A constant matrix as a jet."""
    return Jet.constant(np.asarray(matrix, dtype=complex), order)


def jet_sum(terms: Sequence[Jet]) -> Jet:
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total
