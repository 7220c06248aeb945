"""Machine-readable check reports shared by every verifier and the CLI."""
from __future__ import annotations

import json
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping

import numpy as np

__all__ = ['Residual', 'CheckReport', 'jsonable', 'timer', 'write_reports']


@dataclass(frozen=True)
class Residual:
    name: str
    value: float

    def __post_init__(self):
        v = float(self.value)
        if not v >= 0:
            raise ValueError(f"residual {self.name!r} must be a nonnegative real, got {self.value!r}")
        object.__setattr__(self, 'value', v)


@dataclass
class CheckReport:
    """Outcome of one verification.

    ``passed`` is ``all residuals <= tolerance`` unless the check has a
    structural condition (dimension equality, spread bound); such conditions
    are recorded under ``params['structural']``.
    """
    check: str
    params: dict[str, Any]
    residuals: list[Residual]
    tolerance: float
    passed: bool
    elapsed_ms: int = 0
    warnings: list[str] = field(default_factory=list)

    @classmethod
    def from_residuals(cls, check: str, params: Mapping[str, Any], residuals: Mapping[str, float] | Iterable[tuple[str, float]],
                       tolerance: float, structural: Mapping[str, bool] | None = None,
                       warnings: Iterable[str] = ()) -> 'CheckReport':
        items = residuals.items() if isinstance(residuals, Mapping) else residuals
        res = [Residual(n, v) for n, v in items]
        ok = all(r.value <= tolerance for r in res)
        params = dict(params)
        if structural:
            params['structural'] = dict(structural)
            ok = ok and all(structural.values())
        return cls(check, params, res, float(tolerance), bool(ok), warnings=list(warnings))

    def residual(self, name: str) -> float:
        for r in self.residuals:
            if r.name == name:
                return r.value
        raise KeyError(name)

    @property
    def max_residual(self) -> float:
        return max((r.value for r in self.residuals), default=0.0)

    def to_dict(self) -> dict:
        params = dict(self.params)
        if self.warnings:
            params['warnings'] = list(self.warnings)
        return {
            'check': self.check,
            'params': jsonable(params),
            'residuals': [{'name': r.name, 'value': r.value} for r in self.residuals],
            'tolerance': self.tolerance,
            'pass': self.passed,
            'elapsed_ms': int(self.elapsed_ms),
        }

    def summary(self) -> str:
        status = 'PASS' if self.passed else 'FAIL'
        return f"{status} {self.check} max_residual={self.max_residual:.3e} tol={self.tolerance:.1e}"


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and tuples into JSON-ready values."""
    if isinstance(obj, Mapping):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return {'re': obj.real, 'im': obj.imag}
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    return repr(obj)


@contextmanager
def timer():
    """Yields a one-item list that receives elapsed milliseconds on exit."""
    box = [0]
    start = time.perf_counter()
    try:
        yield box
    finally:
        box[0] = int(round((time.perf_counter() - start) * 1000))


def write_reports(reports: Iterable[CheckReport], path) -> None:
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2)
        fh.write('\n')
