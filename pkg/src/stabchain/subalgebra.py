"""Subalgebras of local path algebras: conditional expectations, Pimsner-Popa
bases, Jones projections and relative Haag duality.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .algebra import BlockOperator, LocalAlgebra, TraceData, include, markov_trace, trace_weights
from .commutant import _containment_batch, _embed, _null_space, maximal_intervals
from .graphs import Graph, Interval, count_matrix, enumerate_paths, path_index, uniform_reach
from .reports import CheckReport, timer

log = logging.getLogger(__name__)

__all__ = ['SubalgebraSpec', 'ExpectationMap', 'generated_basis', 'conditional_expectation', 'pp_basis',
           'PimsnerPopaError', 'jones_projection', 'tl_generators', 'tl_spec', 'full_spec', 'scalar_spec',
           'relative_haag_check', 'tl_relative_haag_check']


class PimsnerPopaError(RuntimeError):
    """No basis reconstructs the ambient algebra at the requested tolerance."""


@dataclass
class SubalgebraSpec:
    """Generators of a unital *-subalgebra of ``ambient``; adjoints and ``1`` are added."""
    ambient: LocalAlgebra
    generators: list[BlockOperator] = field(default_factory=list)

    def __post_init__(self):
        for gen in self.generators:
            if gen.algebra != self.ambient:
                raise ValueError(f"generator lives in {gen.algebra}, not in {self.ambient}")

    def closed_generators(self) -> list[BlockOperator]:
        gens = [self.ambient.identity()]
        for gen in self.generators:
            gens.append(gen)
            if (gen - gen.H).max_abs() > 1e-14:
                gens.append(gen.H)
        return gens


def _orth_columns(mat: np.ndarray, cutoff: float = 1e-10) -> np.ndarray:
    if mat.shape[1] == 0:
        return mat
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    return u[:, s > cutoff * max(s[0], 1.0)]


def generated_basis(spec: SubalgebraSpec, max_rounds: int = 64) -> np.ndarray:
    """Orthonormal (Hilbert-Schmidt) basis, as columns of vectorized operators,
    of the unital *-algebra generated by ``spec``."""
    alg = spec.ambient
    gens = spec.closed_generators()
    basis = _orth_columns(np.array([alg.vectorize(x) for x in gens]).T)
    for _ in range(max_rounds):
        ops = [alg.unvectorize(col) for col in basis.T]
        prods = [alg.vectorize(gen @ op) for gen in gens[1:] for op in ops]
        if not prods:
            break
        grown = _orth_columns(np.concatenate([basis, np.array(prods).T], axis=1))
        if grown.shape[1] == basis.shape[1]:
            break
        basis = grown
    else:
        raise RuntimeError("generated algebra did not stabilize")
    return basis


@dataclass(eq=False)
class ExpectationMap:
    """Linear map on the vectorized ambient algebra, plus a basis of its range."""
    ambient: LocalAlgebra
    matrix: np.ndarray
    range_basis: np.ndarray
    trace: TraceData

    def __call__(self, x: BlockOperator) -> BlockOperator:
        return self.ambient.unvectorize(self.matrix @ self.ambient.vectorize(x))

    @property
    def rank(self) -> int:
        return self.range_basis.shape[1]

    def range_elements(self) -> list[BlockOperator]:
        return [self.ambient.unvectorize(c) for c in self.range_basis.T]

    def residuals(self, rng: np.random.Generator, samples: int = 8) -> dict[str, float]:
        """Idempotence, unitality, bimodule property, trace preservation and positivity."""
        alg = self.ambient
        e = self.matrix
        sub = self.range_elements()
        res = {'idempotent': float(np.abs(e @ e - e).max()),
               'unital': (self(alg.identity()) - alg.identity()).max_abs()}
        bimod = trace = positive = 0.0
        for _ in range(samples):
            x = alg.random(rng)
            b1 = _random_combination(sub, rng, alg)
            b2 = _random_combination(sub, rng, alg)
            bimod = max(bimod, (self(b1 @ x @ b2) - b1 @ self(x) @ b2).max_abs())
            trace = max(trace, abs(markov_trace(self(x), self.trace) - markov_trace(x, self.trace)))
            ex = self(x.H @ x)
            for m in ex.blocks.values():
                if m.size:
                    positive = max(positive, -float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()))
        res.update(bimodule=bimod, trace_preserving=trace, positivity=max(positive, 0.0))
        return res


def _random_combination(ops, rng, alg):
    out = alg.zero()
    for op in ops:
        out = out + complex(rng.normal(), rng.normal()) * op
    return out


def conditional_expectation(spec: SubalgebraSpec, td: TraceData) -> ExpectationMap:
    """Orthogonal projection onto the generated algebra for ``<x, y> = tau(x^dagger y)``."""
    alg = spec.ambient
    weights = trace_weights(alg, td)
    if min(weights.values()) <= 0:
        from .algebra import TraceDegenerate
        raise TraceDegenerate("trace weights are not strictly positive")
    w = np.concatenate([np.full(d * d, weights[b]) for b, d in alg.block_dims.items()])
    v = generated_basis(spec)
    gram = v.conj().T @ (w[:, None] * v)
    mat = v @ np.linalg.solve(gram, v.conj().T * w[None, :])
    return ExpectationMap(alg, mat, v, td)


# ---------------------------------------------------------------------------
# Pimsner-Popa


def _pinv_sqrt(h: BlockOperator, cutoff: float) -> tuple[BlockOperator, BlockOperator]:
    """``(h^{+1/2}, support projection)`` of a positive block operator."""
    inv, supp = {}, {}
    top = max(h.norm(), 1e-300)
    for b, m in h.blocks.items():
        vals, vecs = np.linalg.eigh((m + m.conj().T) / 2)
        keep = vals > cutoff * top
        inv[b] = (vecs[:, keep] / np.sqrt(vals[keep])) @ vecs[:, keep].conj().T
        supp[b] = vecs[:, keep] @ vecs[:, keep].conj().T
    return BlockOperator(h.algebra, inv), BlockOperator(h.algebra, supp)


def pp_basis(spec: SubalgebraSpec, E: ExpectationMap, tol: float = 1e-8,
             cutoff: float = 1e-10) -> list[BlockOperator]:
    """Finite set ``{b_i}`` with ``a = sum_i b_i E(b_i^dagger a)`` for every ``a`` in the ambient algebra.

    Built greedily as a right module basis. Candidates are ``1`` followed by
    the ambient matrix units. Each candidate's residual is normalized by
    ``E(y^dagger y)^{-1/2}``. A new element is folded into an earlier one
    when the two have orthogonal support projections, which keeps the set small.
    """
    alg = spec.ambient
    basis: list[BlockOperator] = []
    supports: list[BlockOperator] = []

    def residual(a):
        out = a
        for b in basis:
            out = out - b @ E(b.H @ a)
        return out

    for cand in [alg.identity()] + alg.basis():
        y = residual(cand)
        if y.max_abs() <= cutoff:
            continue
        h = E(y.H @ y)
        root, supp = _pinv_sqrt(h, cutoff)
        if supp.max_abs() == 0:
            continue
        new = y @ root
        for n, (b, s) in enumerate(zip(basis, supports)):
            if (s @ supp).max_abs() <= cutoff:
                basis[n] = b + new
                supports[n] = s + supp
                break
        else:
            basis.append(new)
            supports.append(supp)
    worst = max((residual(u).max_abs() for u in alg.basis()), default=0.0)
    if worst > tol:
        raise PimsnerPopaError(f"reconstruction residual {worst:.3e} exceeds {tol:.1e}")
    return basis


def pp_reconstruction_residual(basis: Sequence[BlockOperator], E: ExpectationMap, a: BlockOperator) -> float:
    out = a
    for b in basis:
        out = out - b @ E(b.H @ a)
    return out.max_abs()


__all__.append('pp_reconstruction_residual')


# ---------------------------------------------------------------------------
# Jones projections


def jones_projection(g: Graph, td: TraceData, site: int) -> BlockOperator:
    """Jones projection on the window ``[site, site+1]``.

    On block ``(a, a)`` it is ``|v_a><v_a|`` with
    ``v_a = sum_c sum_x sqrt(mu_c / (lam mu_a)) |a ->x c ->x a>``,
    pairing edge ``x`` of ``a -> c`` with edge ``x`` of ``c -> a``.
    This needs a symmetric multiplicity matrix. Other blocks are zero.
    """
    if not g.is_symmetric():
        raise ValueError("Jones projections need a symmetric multiplicity matrix")
    uniform_reach(g)
    mu = td.v / np.linalg.norm(td.v)
    lam = td.lam
    window = Interval(site, site + 1)
    alg = LocalAlgebra(g, window)
    blocks = {}
    for a in range(g.vertex_count):
        if (a, a) not in alg.block_dims:
            continue
        idx = path_index(g, 2, a, a)
        vec = np.zeros(len(idx))
        for p, n in idx.items():
            (_, c, x), (_, _, y) = p.edges
            if x == y:
                vec[n] = np.sqrt(mu[c] / (lam * mu[a]))
        blocks[(a, a)] = np.outer(vec, vec).astype(complex)
    return BlockOperator(alg, blocks)


def tl_generators(g: Graph, td: TraceData, support: Interval) -> list[BlockOperator]:
    """Jones projections ``e_x`` for every window ``[x, x+1]`` inside ``support``, included into ``A_support``."""
    amb = LocalAlgebra(g, support)
    return [include(jones_projection(g, td, x), amb) for x in range(support.lo, support.hi)]


def tl_spec(g: Graph, td: TraceData, support: Interval) -> SubalgebraSpec:
    return SubalgebraSpec(LocalAlgebra(g, support), tl_generators(g, td, support))


def full_spec(alg: LocalAlgebra) -> SubalgebraSpec:
    return SubalgebraSpec(alg, alg.basis())


def scalar_spec(alg: LocalAlgebra) -> SubalgebraSpec:
    return SubalgebraSpec(alg, [])


# ---------------------------------------------------------------------------
# relative Haag duality


WindowGenerators = Callable[[LocalAlgebra, Interval], list[BlockOperator]]


def relative_haag_check(ambient: LocalAlgebra, inner: Interval, complement_generators: Sequence[BlockOperator],
                        boundary_generators: Sequence[BlockOperator] = (), tol: float = 1e-10,
                        max_spread: int = 0) -> CheckReport:
    """``{a in A_Λ : [a, B_{Λ\\I}] = 0}`` and the least ``R`` with containment in ``ι(A_{I^{+R}})``.

    ``complement_generators`` generate ``B_{Λ\\I}`` inside ``ambient``.
    ``boundary_generators`` (optional) are elements of ``B_{I^c}`` living in a
    larger algebra. They cross the ends of ``Λ``, and ``ι(a)`` must commute
    with them too.
    """
    total = ambient.support
    if not inner.issubset(total):
        raise ValueError(f"{inner} is not inside {total}")
    warnings = []
    with timer() as clock:
        n = ambient.dim
        units = ambient.basis()
        unit_batch = {b: np.array([u.blocks[b] for u in units]) for b in ambient.blocks}
        cols = []
        for gen in complement_generators:
            if gen.algebra != ambient:
                raise ValueError("complement generators must live in the ambient algebra")
            cols.append(_commutator_columns(unit_batch, gen))
        for gen in boundary_generators:
            lifted = _embed(unit_batch, ambient, gen.algebra)
            cols.append(_commutator_columns(lifted, gen))
        mat = np.concatenate(cols, axis=1).T if cols else np.zeros((0, n))
        coeff = _null_space(mat, n)
        basis = {b: np.einsum('kn,nde->kde', coeff, unit_batch[b]) for b in ambient.blocks}
        comm_dim = coeff.shape[0]
        if comm_dim == n:
            warnings.append("subalgebra acts trivially: the commutant is the whole ambient algebra")
            log.warning(warnings[-1])
        spread, at_zero, last = None, None, None
        r_max = max(inner.lo - total.lo, total.hi - inner.hi)
        for radius in range(r_max + 1):
            grown = inner.enlarge(radius).clip(total)
            res = float(_containment_batch(basis, ambient, [grown]).max()) if comm_dim else 0.0
            at_zero = res if radius == 0 else at_zero
            last = res
            if res <= tol:
                spread = radius
                break
        params = {'total': [total.lo, total.hi], 'inner': [inner.lo, inner.hi], 'commutant_dim': comm_dim,
                  'local_dim': ambient.restrict_to(inner).dim, 'spread': spread, 'containment_at_zero': at_zero,
                  'max_spread': max_spread, 'boundary_generators': len(boundary_generators)}
        rep = CheckReport.from_residuals('relative-haag', params, {'containment': last}, tol,
                                         structural={'spread_ok': spread is not None and spread <= max_spread},
                                         warnings=warnings)
    rep.elapsed_ms = clock[0]
    return rep


def _commutator_columns(batch: dict, gen: BlockOperator) -> np.ndarray:
    """Rows: vectorized ``[x_k, gen]`` for every ``x_k`` in the batch."""
    parts = []
    for b, x in batch.items():
        g = gen.blocks[b]
        parts.append((x @ g - g @ x).reshape(x.shape[0], -1))
    return np.concatenate(parts, axis=1)


def tl_relative_haag_check(g: Graph, td: TraceData, total: Interval, inner: Interval, tol: float = 1e-10,
                           max_spread: int = 1, margin: int | None = None) -> CheckReport:
    """Relative Haag check for the Temperley-Lieb subalgebra of the path net.

    ``B_{Λ\\I}`` is generated by the Jones projections whose windows avoid
    ``I``. Windows in ``I^c`` that cross the ends of ``Λ`` are added within
    ``margin`` sites (default the uniform reach).
    """
    ambient = LocalAlgebra(g, total)
    r = uniform_reach(g) if margin is None else margin
    inside = [x for x in range(total.lo, total.hi) if x + 1 < inner.lo or x > inner.hi]
    comp = [include(jones_projection(g, td, x), ambient) for x in inside]
    boundary = []
    if len(ambient.blocks) > 1 and r > 0:
        box = total.enlarge(r)
        big = LocalAlgebra(g, box)
        for x in range(box.lo, box.hi):
            crosses = (x < total.lo <= x + 1) or (x <= total.hi < x + 1)
            if crosses and (x + 1 < inner.lo or x > inner.hi):
                boundary.append(include(jones_projection(g, td, x), big))
    rep = relative_haag_check(ambient, inner, comp, boundary, tol=tol, max_spread=max_spread)
    rep.check = 'tl-relative-haag'
    rep.params['margin'] = r
    return rep
