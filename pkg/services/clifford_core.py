"""
Constant matrices of the two-particle equation: Pauli blocks, the 4x4 s/tau
matrices, the 8x8 Gamma set, the spin tensors and a 16x16 Clifford set.
"""

import itertools
import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from config.tolerances import MATRIX_ATOL
from data.spin_tables import PAULI_TABLES, S_TABLES, TAU_TABLES
from utils.errors import IndexRangeError

logger = logging.getLogger(__name__)

ComplexMatrix = np.ndarray

LEVI_CIVITA = np.zeros((3, 3, 3))
for _a, _b, _c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_a, _b, _c] = 1.0
    LEVI_CIVITA[_a, _c, _b] = -1.0


def _check_index(a: int, upper: int = 3) -> None:
    if not isinstance(a, (int, np.integer)) or not 1 <= a <= upper:
        raise IndexRangeError(f"Index {a!r} outside 1..{upper}")


def _frozen(matrix: np.ndarray) -> ComplexMatrix:
    matrix = np.asarray(matrix, dtype=complex)
    matrix.setflags(write=False)
    return matrix


def matrices_close(a: ComplexMatrix, b: ComplexMatrix, atol: float = MATRIX_ATOL) -> bool:
    """Entrywise comparison with an explicit absolute tolerance."""
    return bool(np.max(np.abs(np.asarray(a) - np.asarray(b)), initial=0.0) <= atol)


def max_norm(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix), initial=0.0))


def commutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return a @ b - b @ a


def anticommutator(a: ComplexMatrix, b: ComplexMatrix) -> ComplexMatrix:
    return a @ b + b @ a


def pauli(a: int) -> ComplexMatrix:
    _check_index(a)
    return _frozen(PAULI_TABLES[a])


def spin_s(a: int) -> ComplexMatrix:
    _check_index(a)
    return _frozen(0.5 * np.array(S_TABLES[a], dtype=complex))


def spin_tau(a: int) -> ComplexMatrix:
    _check_index(a)
    return _frozen(0.5 * np.array(TAU_TABLES[a], dtype=complex))


@dataclass(frozen=True)
class GammaSet:
    """Ordered anticommuting matrices with their metric signature.

    gammas[0] is Gamma_0; gammas[1:7] are Gamma_1..Gamma_6 (Gamma_a for the
    total momentum, Gamma_{a+3} for the relative momentum); a 16x16 set also
    carries Gamma_7 at position 7.
    """
    dim: int
    gammas: Tuple[ComplexMatrix, ...]
    metric: Tuple[int, ...]

    def __getitem__(self, mu: int) -> ComplexMatrix:
        return self.gammas[mu]

    def __len__(self) -> int:
        return len(self.gammas)

    @property
    def identity(self) -> ComplexMatrix:
        return np.eye(self.dim, dtype=complex)

    def anticommutator_residuals(self) -> Dict[Tuple[int, int], float]:
        """max-norm of {G_mu, G_nu} - 2 g_mu_nu I for every ordered pair mu <= nu."""
        residuals = {}
        for mu, nu in itertools.combinations_with_replacement(range(len(self)), 2):
            expected = 2.0 * self.metric[mu] * self.identity if mu == nu else 0.0
            residuals[(mu, nu)] = max_norm(anticommutator(self[mu], self[nu]) - expected)
        return residuals

    def hermiticity_residuals(self) -> List[float]:
        """Gamma_0 must be Hermitian and the rest anti-Hermitian."""
        residuals = []
        for mu, g in enumerate(self.gammas):
            sign = 1.0 if self.metric[mu] > 0 else -1.0
            residuals.append(max_norm(g - sign * g.conj().T))
        return residuals


@lru_cache(maxsize=None)
def gamma8() -> GammaSet:
    s3, s2, s1 = pauli(3), pauli(2), pauli(1)
    gammas = [np.kron(s3, np.eye(4))]
    gammas += [2j * np.kron(s2, spin_s(a)) for a in (1, 2, 3)]
    gammas += [2j * np.kron(s1, spin_tau(a)) for a in (1, 2, 3)]
    return GammaSet(dim=8, gammas=tuple(_frozen(g) for g in gammas), metric=(1, -1, -1, -1, -1, -1, -1))


@lru_cache(maxsize=None)
def gamma16() -> GammaSet:
    """Doubled set: Gamma_mu^(16) = sigma_3 (x) Gamma_mu, Gamma_7^(16) = i sigma_1 (x) I_8."""
    base = gamma8()
    gammas = [np.kron(pauli(3), g) for g in base.gammas]
    gammas.append(1j * np.kron(pauli(1), np.eye(8)))
    return GammaSet(dim=16, gammas=tuple(_frozen(g) for g in gammas), metric=base.metric + (-1,))


@dataclass(frozen=True)
class SpinTensorSet:
    """S1[a][b], S2[a][b] and S = S1 + S2 indexed 0..2 internally.

    S2 is defined from Gamma_{a+3}, Gamma_{b+3}; ``S2_relative`` exposes the
    same matrices under the relative-index name S^(2)_{a+3,b+3}.
    """
    S1: Tuple[Tuple[ComplexMatrix, ...], ...]
    S2: Tuple[Tuple[ComplexMatrix, ...], ...]
    S: Tuple[Tuple[ComplexMatrix, ...], ...]

    def S2_relative(self, a: int, b: int) -> ComplexMatrix:
        """S^(2)_{a+3,b+3} for relative indices a, b in 4..6."""
        _check_index(a - 3)
        _check_index(b - 3)
        return self.S2[a - 4][b - 4]

    def vector(self, family: str = 'S') -> List[ComplexMatrix]:
        """Dual vector S_c = 1/2 eps_cab S_ab."""
        tensor = getattr(self, family)
        return [
            sum(0.5 * LEVI_CIVITA[c, a, b] * tensor[a][b] for a in range(3) for b in range(3))
            for c in range(3)
        ]

    def casimir(self, family: str = 'S') -> ComplexMatrix:
        return sum(v @ v for v in self.vector(family))

    def casimir_spectrum(self, family: str = 'S') -> np.ndarray:
        return np.linalg.eigvalsh(self.casimir(family))


def _spin_family(g: GammaSet, offset: int) -> Tuple[Tuple[ComplexMatrix, ...], ...]:
    return tuple(
        tuple(_frozen(0.25j * commutator(g[a + offset], g[b + offset])) for b in (1, 2, 3))
        for a in (1, 2, 3)
    )


def spin_tensors(g: GammaSet = None) -> SpinTensorSet:
    if g is None:
        return _default_spin_tensors()
    s1 = _spin_family(g, 0)
    s2 = _spin_family(g, 3)
    total = tuple(tuple(_frozen(s1[a][b] + s2[a][b]) for b in range(3)) for a in range(3))
    return SpinTensorSet(S1=s1, S2=s2, S=total)


@lru_cache(maxsize=None)
def _default_spin_tensors() -> SpinTensorSet:
    return spin_tensors(gamma8())


def structure_constants(matrices: List[ComplexMatrix]) -> np.ndarray:
    """Measure f_abc in [u_a, u_b] = f_abc u_c by least squares.

    The su(2) convention of the s/tau tables is not assumed; callers compare
    the measured table with i*eps_abc and report the result.
    """
    basis = np.stack([np.asarray(u).ravel() for u in matrices], axis=1)
    constants = np.zeros((3, 3, 3), dtype=complex)
    for a, b in itertools.product(range(3), repeat=2):
        target = commutator(matrices[a], matrices[b]).ravel()
        constants[a, b], *_ = np.linalg.lstsq(basis, target, rcond=None)
    return constants


def matrix_to_json(matrix: ComplexMatrix) -> List[List[List[float]]]:
    """Row-major array-of-arrays of [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(matrix)]


def matrix_from_json(rows: List[List[List[float]]]) -> ComplexMatrix:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def dump_matrix_set(name: str) -> Dict[str, object]:
    """Serializable dump for the gen-matrices command."""
    if name == 'gamma8' or name == 'gamma16':
        g = gamma8() if name == 'gamma8' else gamma16()
        return {
            'set': name,
            'dim': g.dim,
            'metric': list(g.metric),
            'matrices': {f'Gamma_{mu}': matrix_to_json(m) for mu, m in enumerate(g.gammas)},
        }
    if name == 'spin':
        tensors = spin_tensors()
        matrices = {}
        for family in ('S1', 'S2', 'S'):
            table = getattr(tensors, family)
            for a, b in itertools.combinations(range(3), 2):
                matrices[f'{family}_{a + 1}{b + 1}'] = matrix_to_json(table[a][b])
        for a in (1, 2, 3):
            matrices[f's_{a}'] = matrix_to_json(spin_s(a))
            matrices[f'tau_{a}'] = matrix_to_json(spin_tau(a))
        return {'set': name, 'dim': 8, 'matrices': matrices}
    raise IndexRangeError(f"Unknown matrix set {name!r}; expected gamma8, gamma16 or spin")


def write_matrix_set(name: str, path: str) -> None:
    payload = dump_matrix_set(name)
    with open(path, 'w') as f:
        json.dump(payload, f, indent=1, sort_keys=True)
    logger.info(f"Wrote matrix set {name} to {path}")
