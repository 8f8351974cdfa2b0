from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

CHECK = 'check'
FINDING = 'finding'


@dataclass
class ReportEntry:
    """One measured relation. Findings are recorded but never fail a run."""
    suite: str
    check: str
    residual: float
    tolerance: float
    passed: bool
    kind: str = CHECK
    inputs: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'suite': self.suite,
            'check': self.check,
            'kind': self.kind,
            'residual': float(self.residual),
            'tolerance': float(self.tolerance),
            'pass': bool(self.passed),
            'inputs': self.inputs,
        }


def check_residual(suite: str, check: str, residual: float, tolerance: float,
                   kind: str = CHECK, strict: bool = False, **inputs) -> ReportEntry:
    """residual <= tolerance (or < with ``strict``); NaN never passes."""
    residual = float(residual)
    passed = residual < tolerance if strict else residual <= tolerance
    return ReportEntry(suite, check, residual, float(tolerance), bool(passed and not np.isnan(residual)), kind, inputs)


def check_window(suite: str, check: str, value: float, window: Sequence[float], kind: str = CHECK,
                 **inputs) -> ReportEntry:
    """value inside [low, high]; the entry stores the distance to the window as residual."""
    low, high = window
    distance = max(0.0, low - value, value - high)
    inputs = dict(inputs, value=float(value), window=[float(low), float(high)])
    return ReportEntry(suite, check, distance, 0.0, bool(low <= value <= high), kind, inputs)


def entries_from_residuals(suite: str, prefix: str, entries: Iterable[Any], kind: str = CHECK,
                           tolerance: Optional[float] = None) -> List[ReportEntry]:
    """Collapse per-point residual entries to one report entry per (relation, order).

    Each input needs ``relation``, ``point``, ``order``, ``residual`` and ``tol``;
    the worst point is kept in the inputs.
    """
    grouped: Dict[Any, Dict[str, Any]] = {}
    for entry in entries:
        key = (entry.relation, entry.order)
        worst = grouped.setdefault(key, {'residual': -1.0, 'point': None, 'tol': entry.tol, 'count': 0})
        worst['count'] += 1
        residual = entry.residual if not np.isnan(entry.residual) else np.inf
        if residual > worst['residual']:
            worst.update(residual=residual, point=entry.point)
    result = []
    for (relation, order), worst in sorted(grouped.items()):
        tol = worst['tol'] if tolerance is None else tolerance
        result.append(check_residual(suite, f'{prefix}{relation}.order{order}', worst['residual'], tol, kind,
                                     points=worst['count'], worst_point=worst['point']))
    return result


def findings_when_failing(entries: Iterable[ReportEntry]) -> List[ReportEntry]:
    """Passing entries stay checks; a failing one is recorded as a finding."""
    return [entry if entry.passed else replace(entry, kind=FINDING) for entry in entries]


def find_issues(entries: Iterable[ReportEntry]) -> List[str]:
    """Human-readable lines for every failing check (findings excluded)."""
    issues = []
    for entry in entries:
        if entry.kind == CHECK and not entry.passed:
            issues.append(f"{entry.suite}: {entry.check} residual {entry.residual:.3e} exceeds {entry.tolerance:.1e}")
    return issues


def central_difference(fn: Callable[[np.ndarray], Any], x: Sequence[float], index: int,
                       step: float = 1e-6) -> Any:
    """(f(x + h e_i) - f(x - h e_i)) / 2h."""
    x = np.asarray(x, dtype=float)
    offset = np.zeros_like(x)
    offset[index] = step
    return (np.asarray(fn(x + offset)) - np.asarray(fn(x - offset))) / (2 * step)


def relative_error(value: float, reference: float) -> float:
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)
