"""
Momentum-representation operator calculus.

An operator is L = A(p) + sum_C B_C(p) d/dp_C + sum_{C,D} T_CD(p) d/dp_C d/dp_D
with matrix coefficients (T symmetric). Position acts as x_A = +i d/dp_A so
that [x_A, p_B] = i delta_AB with p acting by multiplication. Coefficients are
evaluated as jets, so compositions and commutators are exact at each sample
point; a coefficient evaluated at order k needs its operands at order k+1.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.tolerances import COMPONENT_RANGE, TIME_RANGE, UNITARITY_ATOL
from services.jets import N_MOMENTA, Jet, lift
from services.params import TwoBodyParams
from utils.errors import DomainError, NonUnitaryError, OrderError

logger = logging.getLogger(__name__)

MAX_ORDER = 2
REDUCE_ATOL = 1e-8

SecondKey = Tuple[int, int]


@dataclass(frozen=True)
class MomentumPoint:
    """Six momenta p_1..p_6 (p_a total, p_{a+3} relative), time t and parameters."""
    p: Tuple[float, ...]
    params: TwoBodyParams
    t: float = 0.0

    def __post_init__(self):
        p = tuple(float(x) for x in self.p)
        if len(p) != N_MOMENTA:
            raise DomainError(f"Momentum point needs 6 components, got {len(p)}")
        if not all(np.isfinite(p)) or not np.isfinite(self.t):
            raise DomainError(f"Non-finite momentum point {p}, t={self.t}")
        object.__setattr__(self, 'p', p)
        object.__setattr__(self, 't', float(self.t))

    @property
    def array(self) -> np.ndarray:
        return np.array(self.p)

    def with_time(self, t: float) -> 'MomentumPoint':
        return MomentumPoint(self.p, self.params, t)


@lru_cache(maxsize=4096)
def momentum_jets(q: MomentumPoint, order: int) -> Tuple[Jet, ...]:
    return tuple(Jet.variable(x, index, order) for index, x in enumerate(q.p))


def _sym_key(c: int, d: int) -> SecondKey:
    return (c, d) if c <= d else (d, c)


def _add(a: Optional[Jet], b: Optional[Jet]) -> Optional[Jet]:
    if a is None:
        return b
    if b is None:
        return a
    return a + b


@dataclass
class OpCoefficients:
    """Coefficients of an operator at one point, each a matrix jet.

    ``first[C]`` multiplies d/dp_C; ``second[(C, D)]`` with C <= D is the
    symmetric T_CD = T_DC. Missing entries are zero.
    """
    dim: int
    zeroth: Jet
    first: Dict[int, Jet] = field(default_factory=dict)
    second: Dict[SecondKey, Jet] = field(default_factory=dict)

    @property
    def order(self) -> int:
        orders = [self.zeroth.order] + [j.order for j in self.first.values()]
        orders += [j.order for j in self.second.values()]
        return min(orders)

    @property
    def degree(self) -> int:
        if self.second:
            return 2
        return 1 if self.first else 0

    def t(self, c: int, d: int) -> Optional[Jet]:
        return self.second.get(_sym_key(c, d))

    def graded(self) -> List[List[Jet]]:
        """[[A], [B_1..B_6], [T_CD for C <= D]] with explicit zero jets."""
        order = self.order
        zero = lift(np.zeros((self.dim, self.dim)), order)
        first = [self.first.get(c, zero) for c in range(N_MOMENTA)]
        second = [self.second.get(key, zero) for key in itertools.combinations_with_replacement(range(N_MOMENTA), 2)]
        return [[self.zeroth.truncate(order)], first, second]

    def grade_values(self, grade: int) -> List[np.ndarray]:
        return [j.value for j in self.graded()[grade]]

    def __add__(self, other: 'OpCoefficients') -> 'OpCoefficients':
        first = dict(self.first)
        for c, j in other.first.items():
            first[c] = _add(first.get(c), j)
        second = dict(self.second)
        for key, j in other.second.items():
            second[key] = _add(second.get(key), j)
        return OpCoefficients(self.dim, self.zeroth + other.zeroth, first, second)

    def scaled(self, factor: complex) -> 'OpCoefficients':
        return OpCoefficients(
            self.dim,
            self.zeroth * factor,
            {c: j * factor for c, j in self.first.items()},
            {k: j * factor for k, j in self.second.items()},
        )

    def __sub__(self, other: 'OpCoefficients') -> 'OpCoefficients':
        return self + other.scaled(-1.0)


CoefficientFn = Callable[[MomentumPoint, int], OpCoefficients]
MatrixFn = Callable[[MomentumPoint, int], Jet]


class DiffOp:
    """A differential operator in momentum representation, graded by order."""

    def __init__(self, dim: int, order: int, coefficients: CoefficientFn, name: str = '',
                 params: Optional[TwoBodyParams] = None):
        if order > MAX_ORDER:
            raise OrderError(f"Operator order {order} exceeds {MAX_ORDER}")
        self.dim = dim
        self.order = order
        self._coefficients = coefficients
        self.name = name
        self.params = params

    def __repr__(self) -> str:
        return f"DiffOp({self.name or 'anonymous'}, dim={self.dim}, order={self.order})"

    def evaluate(self, q: MomentumPoint, order: int = 1) -> OpCoefficients:
        """Coefficients at q with all partials up to ``order``."""
        if self.params is not None and q.params != self.params:
            raise DomainError(f"{self.name}: point parameters {q.params} differ from {self.params}")
        coefficients = self._coefficients(q, order)
        if not coefficients.zeroth.is_finite():
            raise DomainError(f"{self.name}: non-finite coefficient at p={q.p}")
        return coefficients

    def named(self, name: str) -> 'DiffOp':
        return DiffOp(self.dim, self.order, self._coefficients, name, self.params)

    def cached(self, maxsize: int = 2048) -> 'DiffOp':
        """Same operator with memoized coefficients; results must be treated as read-only."""
        return DiffOp(self.dim, self.order, lru_cache(maxsize=maxsize)(self._coefficients), self.name, self.params)

    def with_params(self, params: TwoBodyParams) -> 'DiffOp':
        return DiffOp(self.dim, self.order, self._coefficients, self.name, params)

    def _merge_params(self, other: 'DiffOp') -> Optional[TwoBodyParams]:
        return self.params if self.params is not None else other.params

    def __add__(self, other: 'DiffOp') -> 'DiffOp':
        _check_dims(self, other)
        return DiffOp(
            self.dim, max(self.order, other.order),
            lambda q, k: self._coefficients(q, k) + other._coefficients(q, k),
            f"({self.name} + {other.name})", self._merge_params(other),
        )

    def __sub__(self, other: 'DiffOp') -> 'DiffOp':
        _check_dims(self, other)
        return DiffOp(
            self.dim, max(self.order, other.order),
            lambda q, k: self._coefficients(q, k) - other._coefficients(q, k),
            f"({self.name} - {other.name})", self._merge_params(other),
        )

    def __neg__(self) -> 'DiffOp':
        return self.scaled(-1.0)

    def scaled(self, factor: complex) -> 'DiffOp':
        return DiffOp(self.dim, self.order, lambda q, k: self._coefficients(q, k).scaled(factor),
                      f"{factor}*{self.name}", self.params)

    def __rmul__(self, factor: complex) -> 'DiffOp':
        return self.scaled(factor)


def _check_dims(a: DiffOp, b: DiffOp) -> None:
    if a.dim != b.dim:
        raise ValueError(f"Operand dimensions differ: {a.dim} vs {b.dim}")


# elementary operators

def multiplication(fn: MatrixFn, dim: int, name: str = '', params: Optional[TwoBodyParams] = None) -> DiffOp:
    """Order-0 operator acting by the matrix function fn(p)."""
    return DiffOp(dim, 0, lambda q, k: OpCoefficients(dim, fn(q, k)), name, params)


def scalar_multiplication(fn: Callable[[MomentumPoint, int], Jet], dim: int, name: str = '',
                          params: Optional[TwoBodyParams] = None) -> DiffOp:
    """Order-0 operator f(p) * I for a scalar jet function."""
    identity = np.eye(dim, dtype=complex)
    return multiplication(lambda q, k: fn(q, k) * identity, dim, name, params)


def constant_matrix(matrix: np.ndarray, name: str = '') -> DiffOp:
    matrix = np.asarray(matrix, dtype=complex)
    return multiplication(lambda q, k: lift(matrix, k), matrix.shape[0], name)


def momentum(index: int, dim: int) -> DiffOp:
    """p_A by multiplication; ``index`` is 1-based."""
    _check_axis(index)
    return scalar_multiplication(lambda q, k: momentum_jets(q, k)[index - 1], dim, f"p{index}")


def position(index: int, dim: int) -> DiffOp:
    """x_A = +i d/dp_A; ``index`` is 1-based."""
    _check_axis(index)
    identity = np.eye(dim, dtype=complex)

    def coefficients(q: MomentumPoint, k: int) -> OpCoefficients:
        return OpCoefficients(dim, lift(np.zeros((dim, dim)), k), {index - 1: lift(1j * identity, k)})

    return DiffOp(dim, 1, coefficients, f"x{index}")


def _check_axis(index: int) -> None:
    if not 1 <= index <= N_MOMENTA:
        raise DomainError(f"Momentum index {index} outside 1..{N_MOMENTA}")


# composition

def _compose_coefficients(c1: OpCoefficients, c2: OpCoefficients, order: int) -> OpCoefficients:
    """Coefficients of L1 L2 from L1 at ``order`` and L2 at order + degree(L1)."""
    a1 = c1.zeroth.truncate(order)
    a2 = c2.zeroth
    zeroth = a1 @ a2.truncate(order)
    first: Dict[int, Jet] = {}
    second: Dict[SecondKey, Jet] = {}

    for c, b1 in c1.first.items():
        b1 = b1.truncate(order)
        zeroth = zeroth + b1 @ a2.partial(c).truncate(order)
        first[c] = _add(first.get(c), b1 @ a2.truncate(order))
        for d, b2 in c2.first.items():
            first[d] = _add(first.get(d), b1 @ b2.partial(c).truncate(order))
            key = _sym_key(c, d)
            term = b1 @ b2.truncate(order) * (0.5 if c != d else 1.0)
            second[key] = _add(second.get(key), term)

    for d, b2 in c2.first.items():
        first[d] = _add(first.get(d), a1 @ b2.truncate(order))

    for key, t2 in c2.second.items():
        second[key] = _add(second.get(key), a1 @ t2.truncate(order))

    for (c, d), t1 in c1.second.items():
        t1 = t1.truncate(order)
        multiplicity = 2.0 if c != d else 1.0
        second[(c, d)] = _add(second.get((c, d)), t1 @ a2.truncate(order))
        zeroth = zeroth + multiplicity * (t1 @ a2.partial(c).partial(d).truncate(order))
        # cross terms 2 T_CD (d_C A2) d_D, summed over the full symmetric T
        for x, y in ((c, d), (d, c)) if c != d else ((c, d),):
            first[y] = _add(first.get(y), 2.0 * (t1 @ a2.partial(x).truncate(order)))

    return OpCoefficients(c1.dim, zeroth, first, second)


def compose(l1: DiffOp, l2: DiffOp) -> DiffOp:
    """Operator product L1 L2 with chain-rule terms, e.g. x_a F = i(d_a F) + F x_a."""
    _check_dims(l1, l2)
    total = l1.order + l2.order
    if total > MAX_ORDER:
        raise OrderError(f"compose({l1.name}, {l2.name}) would have order {total} > {MAX_ORDER}")

    def coefficients(q: MomentumPoint, k: int) -> OpCoefficients:
        return _compose_coefficients(l1.evaluate(q, k), l2.evaluate(q, k + l1.order), k)

    return DiffOp(l1.dim, total, coefficients, f"{l1.name}*{l2.name}", l1._merge_params(l2))


def bracket(c1: OpCoefficients, c2: OpCoefficients, order: int) -> OpCoefficients:
    """[L1, L2] from coefficient sets evaluated at order + 1 (order + 2 for degree-2 operands)."""
    return _compose_coefficients(c1, c2, order) - _compose_coefficients(c2, c1, order)


def commutator_op(l1: DiffOp, l2: DiffOp, reduce: bool = False) -> DiffOp:
    """[L1, L2] as an operator.

    With ``reduce`` the order-2 part is required to vanish (checked at each
    evaluation, REDUCE_ATOL) and the result is declared of order max(order L1,
    order L2), so it can be composed again.
    """
    _check_dims(l1, l2)
    total = l1.order + l2.order
    if total > MAX_ORDER:
        raise OrderError(f"[{l1.name}, {l2.name}] would have order {total} > {MAX_ORDER}")
    name = f"[{l1.name}, {l2.name}]"

    def coefficients(q: MomentumPoint, k: int) -> OpCoefficients:
        c1 = l1.evaluate(q, k + l2.order)
        c2 = l2.evaluate(q, k + l1.order)
        result = _compose_coefficients(c1, c2, k) - _compose_coefficients(c2, c1, k)
        if reduce and total == 2 and max(l1.order, l2.order) < 2:
            leftover = max((float(np.max(np.abs(j.value))) for j in result.second.values()), default=0.0)
            if leftover > REDUCE_ATOL:
                logger.error(f"{name}: second-order part {leftover:.3e} does not vanish at p={q.p}")
                raise OrderError(f"{name} has a non-vanishing second-order part ({leftover:.3e})")
            result.second = {}
        return result

    declared = max(l1.order, l2.order) if reduce else total
    return DiffOp(l1.dim, declared, coefficients, name, l1._merge_params(l2))


def commutator(l1: DiffOp, l2: DiffOp, q: MomentumPoint, order: int = 0) -> OpCoefficients:
    """Coefficients of [L1, L2] at q, including the order-2 part."""
    return commutator_op(l1, l2).evaluate(q, order)


def unitarity_residual(u: np.ndarray) -> float:
    identity = np.eye(u.shape[0])
    return float(np.max(np.abs(u @ u.conj().T - identity)))


def conjugate(ufn: MatrixFn, l: DiffOp, name: str = '', atol: float = UNITARITY_ATOL) -> DiffOp:
    """U L U^dagger, derivative-of-U terms included in the lower orders."""

    def coefficients(q: MomentumPoint, k: int) -> OpCoefficients:
        u = ufn(q, k + l.order)
        residual = unitarity_residual(u.value)
        if residual > atol:
            logger.error(f"Conjugation by non-unitary matrix at p={q.p}: residual {residual:.3e}")
            raise NonUnitaryError(f"U is not unitary at p={q.p} (residual {residual:.3e})")
        ud = u.dagger()
        c = l.evaluate(q, k)
        uk, udk = u.truncate(k), ud.truncate(k)
        zeroth = uk @ c.zeroth @ udk
        first: Dict[int, Jet] = {}
        second: Dict[SecondKey, Jet] = {}
        for cc, b in c.first.items():
            zeroth = zeroth + uk @ b @ ud.partial(cc).truncate(k)
            first[cc] = uk @ b @ udk
        for (cc, d), t in c.second.items():
            multiplicity = 2.0 if cc != d else 1.0
            zeroth = zeroth + multiplicity * (uk @ t @ ud.partial(cc).partial(d).truncate(k))
            for x, y in ((cc, d), (d, cc)) if cc != d else ((cc, d),):
                first[y] = _add(first.get(y), 2.0 * (uk @ t @ ud.partial(x).truncate(k)))
            second[(cc, d)] = uk @ t @ udk
        return OpCoefficients(l.dim, zeroth, first, second)

    return DiffOp(l.dim, l.order, coefficients, name or f"U {l.name} U+", l.params)


def dagger_fn(ufn: MatrixFn) -> MatrixFn:
    return lambda q, k: ufn(q, k).dagger()


# pointwise comparison

@dataclass(frozen=True)
class ResidualEntry:
    relation: str
    point: int
    order: int
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tol)

    def to_dict(self) -> Dict[str, object]:
        return {
            'relation': self.relation,
            'point': self.point,
            'order': self.order,
            'residual': self.residual,
            'tol': self.tol,
            'pass': self.passed,
        }


@dataclass
class ResidualReport:
    entries: List[ResidualEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_residual(self) -> float:
        return max((e.residual for e in self.entries), default=0.0)

    def max_by_order(self) -> Dict[int, float]:
        result: Dict[int, float] = {}
        for e in self.entries:
            result[e.order] = max(result.get(e.order, 0.0), e.residual)
        return result

    def to_dicts(self) -> List[Dict[str, object]]:
        return [e.to_dict() for e in self.entries]


def grade_residuals(difference: OpCoefficients) -> Dict[int, float]:
    """max-norm of each grade's coefficient values."""
    residuals = {}
    for grade, jets in enumerate(difference.graded()):
        residuals[grade] = max((float(np.max(np.abs(j.value), initial=0.0)) for j in jets), default=0.0)
    return residuals


def op_equal_at(l1: DiffOp, l2: DiffOp, points: Sequence[MomentumPoint], tol: float,
                relation: str = '') -> ResidualReport:
    """Per-point, per-order max-norm residuals of L1 - L2."""
    _check_dims(l1, l2)
    relation = relation or f"{l1.name} == {l2.name}"
    report = ResidualReport()
    for index, q in enumerate(points):
        difference = l1.evaluate(q, 0) - l2.evaluate(q, 0)
        for grade, residual in grade_residuals(difference).items():
            report.entries.append(ResidualEntry(relation, index, grade, residual, tol))
    return report


def deterministic_points(params: TwoBodyParams, scale: float = 1.0) -> List[MomentumPoint]:
    """p = 0 followed by one axis-aligned point per momentum component, all at t = 0."""
    points = [MomentumPoint((0.0,) * N_MOMENTA, params)]
    for index in range(N_MOMENTA):
        p = [0.0] * N_MOMENTA
        p[index] = scale
        points.append(MomentumPoint(tuple(p), params))
    return points


def sample_points(params: TwoBodyParams, count: int, seed: int,
                  component_range: float = COMPONENT_RANGE, time_range: float = TIME_RANGE,
                  include_deterministic: bool = True) -> List[MomentumPoint]:
    """Deterministic points plus ``count`` uniform random points with random t."""
    rng = np.random.default_rng(seed)
    points = deterministic_points(params) if include_deterministic else []
    momenta = rng.uniform(-component_range, component_range, size=(count, N_MOMENTA))
    times = rng.uniform(-time_range, time_range, size=count)
    points.extend(MomentumPoint(tuple(p), params, t) for p, t in zip(momenta, times))
    logger.debug(f"Sampled {len(points)} momentum points with seed {seed:#x}")
    return points
