"""Skeletal multiplicity-free fusion data: loading, quantum dimensions, pentagon.

F-symbols follow the splitting-tree convention

    |(ab)_e c; d> = sum_f [F^{abc}_d]_{ef} |a(bc)_f; d>,

so the pentagon reads

    F^{fcd}_e[g,l] F^{abl}_e[f,k] = sum_h F^{abc}_g[f,h] F^{ahd}_e[g,k] F^{bcd}_k[h,l].
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .reports import CheckReport, timer

__all__ = ['FusionDataError', 'FusionData', 'load_fusion_data', 'read_fusion_data', 'shipped_fusion',
           'SHIPPED_FUSION', 'quantum_dims', 'verify_pentagon', 'pentagon_residual', 'f_unitarity_residual']

SHIPPED_FUSION = ('vec_z2', 'vec_z2_twisted', 'vec_z3', 'fibonacci', 'ising')


class FusionDataError(ValueError):
    """Fusion data violating a required identity; the message names it."""


@dataclass(eq=False)
class FusionData:
    labels: tuple[str, ...]
    unit: str
    dual: dict[str, str]
    fusion: frozenset[tuple[str, str, str]]
    F: dict[tuple[str, str, str, str], tuple[tuple[str, ...], tuple[str, ...], np.ndarray]]
    dims: dict[str, float] = field(default_factory=dict)
    name: str = ''

    def N(self, a: str, b: str, c: str) -> int:
        return 1 if (a, b, c) in self.fusion else 0

    def products(self, a: str, b: str) -> list[str]:
        """Simple summands of ``a (x) b`` in label order."""
        return [c for c in self.labels if (a, b, c) in self.fusion]

    def fusion_matrix(self, a: str) -> np.ndarray:
        """``(N_a)_{bc} = N_{ab}^c``."""
        return np.array([[self.N(a, b, c) for c in self.labels] for b in self.labels], dtype=float)

    def block_labels(self, a, b, c, d) -> tuple[list[str], list[str]]:
        es = [e for e in self.labels if self.N(a, b, e) and self.N(e, c, d)]
        fs = [f for f in self.labels if self.N(b, c, f) and self.N(a, f, d)]
        return es, fs

    def F_block(self, a, b, c, d) -> tuple[tuple[str, ...], tuple[str, ...], np.ndarray]:
        return self.F[(a, b, c, d)]

    def F_entry(self, a, b, c, d, e, f) -> complex:
        """``[F^{abc}_d]_{ef}``; zero when the trees do not exist."""
        blk = self.F.get((a, b, c, d))
        if blk is None:
            return 0.0
        es, fs, mat = blk
        try:
            return mat[es.index(e), fs.index(f)]
        except ValueError:
            return 0.0

    def d(self, a: str) -> float:
        return self.dims[a]

    @property
    def global_dim(self) -> float:
        return float(sum(self.dims[a] ** 2 for a in self.labels))

    def with_F(self, key, matrix) -> 'FusionData':
        """Copy with one F-block replaced (used to build corrupted data)."""
        es, fs, _ = self.F[key]
        new = dict(self.F)
        new[key] = (es, fs, np.asarray(matrix, dtype=complex))
        return FusionData(self.labels, self.unit, dict(self.dual), self.fusion, new, dict(self.dims), self.name + '*')


def load_fusion_data(source, check_pentagon: bool = True, tol: float = 1e-10) -> FusionData:
    """Validated :class:`FusionData` from a mapping or JSON text.

    Missing F entries default to 1 for one-dimensional blocks. Larger blocks
    must be given in full. Checks: unit and dual laws, multiplicity-freeness,
    triangle gauge, unitarity of every F block, quantum dimensions (computed
    when absent), and the pentagon unless ``check_pentagon`` is false.
    """
    if isinstance(source, (str, bytes)):
        try:
            source = json.loads(source)
        except json.JSONDecodeError as err:
            raise FusionDataError(f"parse error: {err}") from err
    if not isinstance(source, Mapping):
        raise FusionDataError("fusion data must be a JSON object")
    try:
        labels = tuple(str(x) for x in source['labels'])
        unit = str(source['unit'])
        dual = {str(k): str(v) for k, v in source['dual'].items()}
        triples = [tuple(str(x) for x in t) for t in source['fusion']]
    except (KeyError, TypeError, AttributeError) as err:
        raise FusionDataError(f"missing or malformed field: {err}") from err
    if len(set(labels)) != len(labels):
        raise FusionDataError("duplicate labels")
    if unit not in labels:
        raise FusionDataError(f"unit {unit!r} is not a label")
    for t in triples:
        if len(t) != 3 or not set(t) <= set(labels):
            raise FusionDataError(f"bad fusion triple {t}")
    if len(set(triples)) != len(triples):
        raise FusionDataError("repeated fusion triple: data must be multiplicity-free")
    fusion = frozenset(triples)
    fd = FusionData(labels, unit, dual, fusion, {}, name=str(source.get('name', '')))
    _check_unit_and_dual(fd)

    given: dict[tuple, dict[tuple[str, str], complex]] = {}
    for entry in source.get('F', []):
        try:
            a, b, c, d = (str(x) for x in entry['abcd'])
            e, f = str(entry['e']), str(entry['f'])
            val = complex(float(entry.get('re', 0.0)), float(entry.get('im', 0.0)))
        except (KeyError, TypeError, ValueError) as err:
            raise FusionDataError(f"malformed F entry {entry!r}: {err}") from err
        given.setdefault((a, b, c, d), {})[(e, f)] = val
    F = {}
    for a, b, c, d in itertools.product(labels, repeat=4):
        es, fs = fd.block_labels(a, b, c, d)
        if not es and not fs:
            continue
        if len(es) != len(fs):
            raise FusionDataError(f"F^{{{a}{b}{c}}}_{d} is not square ({len(es)}x{len(fs)})")
        vals = given.pop((a, b, c, d), {})
        for e, f in vals:
            if e not in es or f not in fs:
                raise FusionDataError(f"F entry ({a},{b},{c},{d};{e},{f}) is not admissible")
        if len(es) == 1 and not vals:
            mat = np.ones((1, 1), dtype=complex)
        else:
            missing = [(e, f) for e in es for f in fs if (e, f) not in vals]
            if missing and len(es) > 1:
                raise FusionDataError(f"F^{{{a}{b}{c}}}_{d} is missing entries {missing}")
            mat = np.array([[vals.get((e, f), 1.0) for f in fs] for e in es], dtype=complex)
        F[(a, b, c, d)] = (tuple(es), tuple(fs), mat)
    if given:
        raise FusionDataError(f"F entries given for inadmissible blocks {sorted(given)}")
    fd.F = F
    _check_triangle(fd)
    unit_res = f_unitarity_residual(fd)
    if unit_res > tol:
        raise FusionDataError(f"non-unitary F: residual {unit_res:.3e}")
    computed = quantum_dims(fd)
    if 'dims' in source and source['dims'] is not None:
        dims = {str(k): float(v) for k, v in source['dims'].items()}
        bad = {a: (dims.get(a), computed[a]) for a in labels if abs(dims.get(a, np.nan) - computed[a]) > 1e-8}
        if bad:
            raise FusionDataError(f"dims differ from Perron-Frobenius values: {bad}")
        fd.dims = dims
    else:
        fd.dims = computed
    if check_pentagon:
        res = pentagon_residual(fd)
        if res > tol:
            raise FusionDataError(f"pentagon failure: residual {res:.3e}")
    return fd


def _check_unit_and_dual(fd: FusionData):
    one = fd.unit
    for a in fd.labels:
        if fd.products(one, a) != [a] or fd.products(a, one) != [a]:
            raise FusionDataError(f"unit law fails for {a!r}")
        if a not in fd.dual or fd.dual[a] not in fd.labels:
            raise FusionDataError(f"label {a!r} has no dual")
        if fd.dual[fd.dual[a]] != a:
            raise FusionDataError(f"dual is not an involution at {a!r}")
        if not fd.N(a, fd.dual[a], one):
            raise FusionDataError(f"{a!r} (x) dual({a!r}) does not contain the unit")
        for b in fd.labels:
            if b != fd.dual[a] and fd.N(a, b, one):
                raise FusionDataError(f"unit appears in {a!r} (x) {b!r} although {b!r} is not the dual")
    if fd.dual[one] != one:
        raise FusionDataError("dual of the unit must be the unit")


def _check_triangle(fd: FusionData, tol: float = 1e-12):
    for (a, b, c, d), (_, _, mat) in fd.F.items():
        if fd.unit in (a, b, c) and np.abs(mat - np.eye(len(mat))).max() > tol:
            raise FusionDataError(f"triangle gauge violated: F^{{{a}{b}{c}}}_{d} = {mat.tolist()}")


def f_unitarity_residual(fd: FusionData) -> float:
    worst = 0.0
    for _, _, mat in fd.F.values():
        worst = max(worst, float(np.abs(mat @ mat.conj().T - np.eye(len(mat))).max()))
    return worst


def quantum_dims(fd: FusionData) -> dict[str, float]:
    """Perron-Frobenius eigenvalue of each fusion matrix."""
    total = sum(fd.fusion_matrix(a) for a in fd.labels)
    n = len(fd.labels)
    reach = np.linalg.matrix_power(np.eye(n) + (total > 0), n) > 0
    if not reach.all():
        raise FusionDataError("fusion ring is reducible")
    dims = {}
    for a in fd.labels:
        vals = np.linalg.eigvals(fd.fusion_matrix(a))
        dims[a] = float(np.max(vals.real))
    one = fd.unit
    if abs(dims[one] - 1) > 1e-10:
        raise FusionDataError("dimension of the unit is not 1")
    for a in fd.labels:
        if abs(dims[a] - dims[fd.dual[a]]) > 1e-8:
            raise FusionDataError(f"d({a}) != d(dual {a})")
    return dims


def pentagon_residual(fd: FusionData) -> float:
    """Largest pentagon defect over all admissible label tuples."""
    labs = fd.labels
    F = fd.F_entry
    worst = 0.0
    for a, b, c, d in itertools.product(labs, repeat=4):
        for f in fd.products(a, b):
            for g in fd.products(f, c):
                for e in fd.products(g, d):
                    for l in fd.products(c, d):
                        for k in fd.products(b, l):
                            if not fd.N(a, k, e):
                                continue
                            lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, k)
                            rhs = sum(F(a, b, c, g, f, h) * F(a, h, d, e, g, k) * F(b, c, d, k, h, l)
                                      for h in labs)
                            worst = max(worst, abs(lhs - rhs))
    return float(worst)


def verify_pentagon(fd: FusionData, tol: float = 1e-10) -> CheckReport:
    with timer() as clock:
        res = {'pentagon': pentagon_residual(fd), 'f_unitarity': f_unitarity_residual(fd)}
        dims = fd.dims or quantum_dims(fd)
        res['dimension_consistency'] = max(
            abs(dims[a] * dims[b] - sum(dims[c] for c in fd.products(a, b)))
            for a in fd.labels for b in fd.labels)
    rep = CheckReport.from_residuals('pentagon', {'fusion': fd.name, 'labels': list(fd.labels)}, res, tol)
    rep.elapsed_ms = clock[0]
    return rep


def read_fusion_data(path, check_pentagon: bool = True) -> FusionData:
    fd = load_fusion_data(Path(path).read_text(encoding='utf-8'), check_pentagon=check_pentagon)
    fd.name = fd.name or Path(path).stem
    return fd


def shipped_fusion(name: str, check_pentagon: bool = True) -> FusionData:
    """One of :data:`SHIPPED_FUSION`, loaded from package data."""
    if name not in SHIPPED_FUSION:
        raise KeyError(f"unknown fusion data {name!r}; choose from {SHIPPED_FUSION}")
    text = resources.files('stabchain.data').joinpath(f'{name}.json').read_text(encoding='utf-8')
    fd = load_fusion_data(text, check_pentagon=check_pentagon)
    fd.name = fd.name or name
    return fd
