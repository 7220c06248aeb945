"""Lagrangian algebra ``L = sum_X X (x) dual(X)`` and its half-braiding.

Structure maps are first written diagrammatically on the unreduced object
(cups and caps with their dimension factors). They are then pulled back along
the unitary ``V: sum_{X, c in X (x) dual X} c -> L`` to skeletal structure
constants. Every check runs through :class:`~stabchain.diagrams.Calculus`,
so associativity and the hexagon see the F-moves.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagrams import Calculus, Morphism, Obj
from .fusion import FusionData
from .reports import CheckReport, timer

__all__ = ['AlgebraObject', 'build_lagrangian_qsystem', 'verify_qsystem', 'half_braiding',
           'verify_half_braiding', 'multiplication_morphism', 'unit_morphism']


@dataclass
class AlgebraObject:
    """Algebra on ``sum_i summands[i]``.

    ``multiplication[i, j, k]`` is the coefficient of the fusion vertex
    ``summands[i] (x) summands[j] -> summands[k]`` (zero when inadmissible).
    ``unit[i]`` is the coefficient of ``1 -> summands[i]``.
    """
    summands: list[str]
    multiplication: np.ndarray
    unit: np.ndarray
    module_labels: list[str] = field(default_factory=list)
    origin: list[tuple[str, str]] = field(default_factory=list)
    global_dim: float = 1.0

    def __post_init__(self):
        n = len(self.summands)
        self.multiplication = np.asarray(self.multiplication, dtype=complex)
        self.unit = np.asarray(self.unit, dtype=complex)
        if self.multiplication.shape != (n, n, n) or self.unit.shape != (n,):
            raise ValueError(f"structure tensors do not match {n} summands")
        if not (np.isfinite(self.multiplication).all() and np.isfinite(self.unit).all()):
            raise ValueError("structure tensors must be finite")

    @property
    def obj(self) -> Obj:
        return Obj(tuple((s,) for s in self.summands))

    def total_dim(self, fd: FusionData) -> float:
        return float(sum(fd.dims[s] for s in self.summands))


def _check_labels(fd: FusionData, labels):
    bad = [x for x in labels if x not in fd.labels]
    if bad:
        raise ValueError(f"inadmissible labels {bad}")


def _unreduced(fd, module_labels):
    return Obj(tuple((x, fd.dual[x]) for x in module_labels))


def _reduction(calc: Calculus, module_labels):
    """Unitary ``V`` from the skeletal summands onto the unreduced object."""
    fd = calc.fd
    origin = [(x, c) for x in module_labels for c in fd.products(x, fd.dual[x])]
    skel = Obj(tuple((c,) for _, c in origin))
    parts = {(i, module_labels.index(x)): calc.vertex(x, fd.dual[x], c) for i, (x, c) in enumerate(origin)}
    return calc.embed(skel, _unreduced(fd, module_labels), parts), origin


def build_lagrangian_qsystem(fd: FusionData, module_labels, calc: Calculus | None = None) -> AlgebraObject:
    """Skeletal structure constants of ``sum_X X (x) dual X``.

    Multiplication on the ``X`` block is ``sqrt(D)/sqrt(d_X) (1 (x) ev_X (x) 1)``
    and the unit is ``sqrt(d_X)/sqrt(D) coev_X`` with ``D = sum_X d_X^2``.
    """
    module_labels = list(module_labels)
    _check_labels(fd, module_labels)
    if len(set(module_labels)) != len(module_labels):
        raise ValueError("module labels must be distinct")
    calc = calc or Calculus(fd)
    D = float(sum(fd.dims[x] ** 2 for x in module_labels))
    L = _unreduced(fd, module_labels)
    I = calc.identity
    mult_parts, unit_parts = {}, {}
    n = len(module_labels)
    for k, x in enumerate(module_labels):
        xb = fd.dual[x]
        cap = calc.tensor_all(I(Obj.of(x)), calc.ev(x), I(Obj.of(xb)))
        mult_parts[(k * n + k, k)] = np.sqrt(D / fd.dims[x]) * cap
        unit_parts[(0, k)] = np.sqrt(fd.dims[x] / D) * calc.coev(x)
    m_big = calc.embed(L @ L, L, mult_parts)
    u_big = calc.embed(Obj.unit(), L, unit_parts)
    V, origin = _reduction(calc, module_labels)
    m_skel = V.H @ m_big @ calc.tensor(V, V)
    u_skel = V.H @ u_big
    summands = [c for _, c in origin]
    q = AlgebraObject(summands, np.zeros((len(summands),) * 3), np.zeros(len(summands)),
                      module_labels, origin, D)
    q.multiplication = _structure_constants(calc, q, m_skel)
    rows = calc.offsets(q.obj, fd.unit)
    q.unit = np.array([u_skel.blocks[fd.unit][rows[i], 0] if s == fd.unit else 0.0
                       for i, s in enumerate(summands)], dtype=complex)
    return q


def _structure_constants(calc, q: AlgebraObject, m: Morphism) -> np.ndarray:
    fd = calc.fd
    n = len(q.summands)
    out = np.zeros((n, n, n), dtype=complex)
    src, tgt = m.source, m.target
    for i, a in enumerate(q.summands):
        for j, b in enumerate(q.summands):
            for k, c in enumerate(q.summands):
                if fd.N(a, b, c):
                    row = calc.offsets(tgt, c)[k]
                    col = calc.offsets(src, c)[i * n + j]
                    out[i, j, k] = m.blocks[c][row, col]
    return out


def multiplication_morphism(calc: Calculus, q: AlgebraObject) -> Morphism:
    fd = calc.fd
    n = len(q.summands)
    L = q.obj
    parts = {}
    for i, a in enumerate(q.summands):
        for j, b in enumerate(q.summands):
            for k, c in enumerate(q.summands):
                coef = q.multiplication[i, j, k]
                if coef != 0:
                    if not fd.N(a, b, c):
                        raise ValueError(f"coefficient on inadmissible channel {a},{b}->{c}")
                    parts[(i * n + j, k)] = _accumulate(parts.get((i * n + j, k)), coef * calc.vertex(a, b, c).H)
    return calc.embed(L @ L, L, parts)


def _accumulate(old, new):
    return new if old is None else old + new


def unit_morphism(calc: Calculus, q: AlgebraObject) -> Morphism:
    one = calc.fd.unit
    parts = {}
    for i, s in enumerate(q.summands):
        if q.unit[i] != 0:
            if s != one:
                raise ValueError("unit coefficient on a non-unit summand")
            parts[(0, i)] = Morphism(calc, Obj.unit(), Obj.of(one), {one: [[q.unit[i]]]})
    return calc.embed(Obj.unit(), q.obj, parts)


def verify_qsystem(q: AlgebraObject, fd: FusionData, tol: float = 1e-8, calc: Calculus | None = None) -> CheckReport:
    """Associativity, unit laws and the Frobenius identities through F-moves."""
    calc = calc or Calculus(fd)
    with timer() as clock:
        m = multiplication_morphism(calc, q)
        u = unit_morphism(calc, q)
        one_L = calc.identity(q.obj)
        T = calc.tensor
        res = {
            'associativity': (m @ T(m, one_L)).distance(m @ T(one_L, m)),
            'left_unit': (m @ T(u, one_L)).distance(one_L),
            'right_unit': (m @ T(one_L, u)).distance(one_L),
        }
        mm = m.H @ m
        res['frobenius_left'] = (T(one_L, m) @ T(m.H, one_L)).distance(mm)
        res['frobenius_right'] = (T(m, one_L) @ T(one_L, m.H)).distance(mm)
    params = {'summands': q.summands, 'module_labels': q.module_labels, 'global_dim': q.global_dim,
              'fusion': fd.name}
    rep = CheckReport.from_residuals('qsystem', params, res, tol)
    rep.elapsed_ms = clock[0]
    return rep


def half_braiding(fd: FusionData, q: AlgebraObject, w: str, calc: Calculus | None = None,
                  reduced: bool = True, formula: bool = False) -> Morphism:
    """``sigma_{L,w}: L (x) w -> w (x) L``.

    The block ``Y (x) dual Y -> Z (x) dual Z`` is
    ``sqrt(d_Z)/sqrt(d_Y) (alpha (x) alpha_rot)`` where ``alpha`` is the
    splitting vertex ``Y -> w (x) Z`` and ``alpha_rot: dual Y (x) w -> dual Z``
    is its partial rotation
    ``(ev_Y (x) 1)(1 (x) alpha^dagger (x) 1)(1 (x) 1 (x) coev_Z)``.
    For ``w`` the unit the identity is returned unless ``formula`` asks for
    the diagrammatic evaluation.
    """
    _check_labels(fd, [w])
    if not q.module_labels:
        raise ValueError("half-braiding needs an algebra from build_lagrangian_qsystem")
    calc = calc or Calculus(fd)
    mods = q.module_labels
    L = _unreduced(fd, mods)
    W = Obj.of(w)
    if w == fd.unit and reduced and not formula:
        S = q.obj
        return Morphism(calc, S @ W, W @ S, {c: np.eye(calc.dim(S @ W, c)) for c in fd.labels if calc.dim(S @ W, c)})
    sigma = _unreduced_half_braiding(calc, mods, w)
    if not reduced:
        return sigma
    V, _ = _reduction(calc, mods)
    one_w = calc.identity(W)
    return calc.tensor(one_w, V.H) @ sigma @ calc.tensor(V, one_w)


def _unreduced_half_braiding(calc: Calculus, mods, w) -> Morphism:
    fd = calc.fd
    I = calc.identity
    L = _unreduced(fd, mods)
    W = Obj.of(w)
    parts = {}
    for iy, y in enumerate(mods):
        yb = fd.dual[y]
        for iz, z in enumerate(mods):
            if not fd.N(w, z, y):
                continue
            zb = fd.dual[z]
            alpha = calc.vertex(w, z, y)
            rot = (calc.tensor(calc.ev(y), I(Obj.of(zb)))
                   @ calc.tensor_all(I(Obj.of(yb)), alpha.H, I(Obj.of(zb)))
                   @ calc.tensor_all(I(Obj.of(yb, w)), calc.coev(z)))
            parts[(iy, iz)] = np.sqrt(fd.dims[z] / fd.dims[y]) * calc.tensor(alpha, rot)
    return calc.embed(L @ W, W @ L, parts)


def verify_half_braiding(fd: FusionData, q: AlgebraObject, tol: float = 1e-8, calc: Calculus | None = None,
                         labels=None) -> CheckReport:
    """Unitarity, hexagon, unit normalization and algebra compatibility of ``sigma``."""
    calc = calc or Calculus(fd)
    labels = list(labels or fd.labels)
    _check_labels(fd, labels)
    with timer() as clock:
        sig = {w: half_braiding(fd, q, w, calc) for w in fd.labels}
        S = q.obj
        T, I = calc.tensor, calc.identity
        m = multiplication_morphism(calc, q)
        u = unit_morphism(calc, q)
        res = {'unitarity': 0.0, 'hexagon': 0.0, 'multiplication': 0.0, 'unit': 0.0}
        for w in labels:
            s = sig[w]
            W = Obj.of(w)
            res['unitarity'] = max(res['unitarity'], (s @ s.H).distance(I(W @ S)), (s.H @ s).distance(I(S @ W)))
            lhs = s @ T(m, I(W))
            rhs = T(I(W), m) @ T(s, I(S)) @ T(I(S), s)
            res['multiplication'] = max(res['multiplication'], lhs.distance(rhs))
            res['unit'] = max(res['unit'], (s @ T(u, I(W))).distance(T(I(W), u)))
        for a in labels:
            for b in labels:
                A, B = Obj.of(a), Obj.of(b)
                via_pair = T(I(A), sig[b]) @ T(sig[a], I(B))
                via_fusion = None
                for c in fd.products(a, b):
                    psi = calc.vertex(a, b, c)
                    term = T(psi, I(S)) @ sig[c] @ T(I(S), psi.H)
                    via_fusion = term if via_fusion is None else via_fusion + term
                res['hexagon'] = max(res['hexagon'], via_pair.distance(via_fusion))
        raw_unit = half_braiding(fd, q, fd.unit, calc, formula=True)
        res['unit_label_formula'] = max(float(np.abs(b - np.eye(len(b))).max()) for b in raw_unit.blocks.values())
    params = {'summands': q.summands, 'labels': labels, 'fusion': fd.name}
    rep = CheckReport.from_residuals('halfbraid', params, res, tol)
    rep.elapsed_ms = clock[0]
    return rep
