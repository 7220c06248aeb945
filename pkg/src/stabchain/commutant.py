"""Commutants inside block algebras, Haag-duality checks and net-axiom validation.

Two solvers live here.

``commutant`` is the general one: it vectorizes ``[x, g] = 0`` block by block
and reads the null space off an SVD.

``subalgebra_commutant`` handles the case that matters for Haag duality, where
the generators are images of whole local algebras. It propagates matrix-unit
systems instead of solving a ``d^2``-sized linear system, so four-site nets
with three-dimensional sites stay cheap.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .algebra import BlockOperator, LocalAlgebra, RegisterShape, embedding_structure, include
from .graphs import Graph, Interval, uniform_reach
from .reports import CheckReport, timer

log = logging.getLogger(__name__)

__all__ = ['commutant', 'subalgebra_commutant', 'Sector', 'commutant_sectors', 'containment_residual',
           'maximal_intervals', 'haag_check', 'validate_net']

SVD_CUTOFF = 1e-10


# ---------------------------------------------------------------------------
# dense solver


def _orthonormal_rows(rows: np.ndarray, cutoff: float = SVD_CUTOFF) -> np.ndarray:
    """Orthonormal basis (as rows) of the row span of ``rows``."""
    if rows.size == 0:
        return rows
    _, s, vh = np.linalg.svd(rows, full_matrices=False)
    keep = s > cutoff * s[0] if s.size and s[0] > 0 else np.zeros(0, bool)
    return vh[:keep.sum()]


def _null_space(mat: np.ndarray, n: int, cutoff: float = SVD_CUTOFF) -> np.ndarray:
    """Orthonormal null-space basis (as rows) of ``mat`` acting on ``C^n``.

    Callers build ``mat`` from unit-norm data, so the cutoff is taken relative
    to ``max(s_max, 1)``; a roundoff-level matrix then has rank zero.
    """
    if mat.size == 0:
        return np.eye(n, dtype=complex)
    # tall constraint matrices only need the n x n right factor
    _, s, vh = np.linalg.svd(mat, full_matrices=mat.shape[0] < n)
    top = max(s[0] if s.size else 0.0, 1.0)
    rank = int((s > cutoff * top).sum())
    return vh[rank:].conj()


def commutant(generators: Sequence[BlockOperator], ambient: LocalAlgebra,
              cutoff: float = SVD_CUTOFF) -> list[BlockOperator]:
    """Hilbert-Schmidt orthonormal basis of ``{x in ambient : [x, g] = 0 for all g}``.

    Elements are listed block by block in the ambient block order. Inside a
    block they follow the trailing right-singular vectors of the stacked
    constraint matrix.
    """
    for gen in generators:
        if gen.algebra != ambient:
            raise ValueError(f"generator lives in {gen.algebra}, not in {ambient}")
    out = []
    for b, d in ambient.block_dims.items():
        mats = [gen.blocks[b] for gen in generators]
        # redundant generators only cost time: keep an orthonormal basis of their span
        span = _orthonormal_rows(np.array([m.ravel() for m in mats])) if mats else np.zeros((0, d * d))
        eye = np.eye(d)
        rows = [np.kron(eye, m.reshape(d, d).T) - np.kron(m.reshape(d, d), eye) for m in span]
        constraint = np.vstack(rows) if rows else np.zeros((0, d * d))
        for vec in _null_space(constraint, d * d, cutoff):
            out.append(BlockOperator(ambient, {b: vec.reshape(d, d)}))
    return out


# ---------------------------------------------------------------------------
# matrix-unit solver


@dataclass
class Sector:
    """One simple summand ``M_m (x) 1_r`` of a commutant inside one ambient block.

    ``isometries`` has shape ``(r, d, m)``; the summand consists of
    ``sum_i W_i y W_i^dagger`` for ``y`` in ``M_m``.
    """
    block: tuple[int, int]
    isometries: np.ndarray

    @property
    def size(self) -> int:
        return self.isometries.shape[2]

    @property
    def multiplicity(self) -> int:
        return self.isometries.shape[0]


def _refine(sector: Sector, rows_list: Sequence[np.ndarray]) -> list[Sector]:
    """Split a commutant sector by one more commuting family of matrix units."""
    w1 = sector.isometries[0]
    m = w1.shape[1]
    out = []
    covered = 0
    for rows in rows_list:
        n_in = rows.shape[1]
        first = w1[rows[:, 0]]
        y11 = first.conj().T @ first
        vals, vecs = np.linalg.eigh((y11 + y11.conj().T) / 2)
        q = vecs[:, vals > 0.5]
        if q.shape[1] == 0:
            continue
        covered += q.shape[1] * n_in
        # U_p = y_{p1} Q maps the new multiplicity space into copy p
        us = [w1[rows[:, p]].conj().T @ first @ q for p in range(n_in)]
        new = np.einsum('idm,pmn->ipdn', sector.isometries, np.array(us))
        out.append(Sector(sector.block, new.reshape(-1, new.shape[2], new.shape[3])))
    if covered != m:
        raise RuntimeError(f"matrix units do not resolve the identity ({covered} of {m}); image not unital?")
    return out


def commutant_sectors(ambient: LocalAlgebra, pieces: Sequence[LocalAlgebra]) -> list[Sector]:
    """Simple summands of the commutant of ``ι(piece)`` for all pieces.

    The pieces must have mutually commuting images (for instance algebras
    of disjoint intervals).
    """
    sectors = []
    for b, d in ambient.block_dims.items():
        current = [Sector(b, np.eye(d, dtype=complex)[None])]
        for piece in pieces:
            struct = embedding_structure(piece, ambient)[b]
            rows_list = [sec.rows for sec in struct]
            current = [s for sec in current for s in _refine(sec, rows_list)]
        sectors.extend(current)
    return sectors


def _sector_basis(sec: Sector) -> np.ndarray:
    """Orthonormal matrix units of a sector, shape ``(m*m, d, d)``."""
    w = sec.isometries
    x = np.einsum('idm,ien->mnde', w, w.conj(), optimize=True) / np.sqrt(w.shape[0])
    m, d = w.shape[2], w.shape[1]
    return x.reshape(m * m, d, d)


def subalgebra_commutant(ambient: LocalAlgebra, pieces: Sequence[LocalAlgebra]) -> list[BlockOperator]:
    """Orthonormal basis of the commutant of the images of ``pieces`` in ``ambient``."""
    out = []
    for sec in commutant_sectors(ambient, pieces):
        for x in _sector_basis(sec):
            out.append(BlockOperator(ambient, {sec.block: x}))
    return out


# ---------------------------------------------------------------------------
# batched containment tests

Batch = dict  # block -> array (n, d, d)


def _as_batch(ops: Sequence[BlockOperator], alg: LocalAlgebra) -> Batch:
    return {b: np.array([op.blocks[b] for op in ops]).reshape(len(ops), d, d)
            for b, d in alg.block_dims.items()}


def _sector_batch(sectors: Sequence[Sector], alg: LocalAlgebra) -> Batch:
    mats = [(sec.block, x) for sec in sectors for x in _sector_basis(sec)]
    n = len(mats)
    batch = {b: np.zeros((n, d, d), dtype=complex) for b, d in alg.block_dims.items()}
    for k, (b, x) in enumerate(mats):
        batch[b][k] = x
    return batch


def _batch_size(batch: Batch) -> int:
    return next(iter(batch.values())).shape[0] if batch else 0


def _preimage(batch: Batch, small: LocalAlgebra, big: LocalAlgebra) -> Batch:
    """Coefficients of the orthogonal projection onto ``ι(small)``, as elements of ``small``."""
    struct = embedding_structure(small, big)
    n = _batch_size(batch)
    acc = {b: np.zeros((n, d, d), dtype=complex) for b, d in small.block_dims.items()}
    counts = {b: 0 for b in small.blocks}
    for bb, secs in struct.items():
        x = batch[bb]
        for sec in secs:
            r = sec.rows
            acc[sec.source_block] += x[:, r[:, :, None], r[:, None, :]].sum(axis=1)
            counts[sec.source_block] += r.shape[0]
    return {b: acc[b] / counts[b] for b in small.blocks}


def _embed(batch: Batch, small: LocalAlgebra, big: LocalAlgebra) -> Batch:
    struct = embedding_structure(small, big)
    n = _batch_size(batch)
    out = {}
    for bb, d in big.block_dims.items():
        m = np.zeros((n, d, d), dtype=complex)
        for sec in struct[bb]:
            r = sec.rows
            m[:, r[:, :, None], r[:, None, :]] = batch[sec.source_block][:, None, :, :]
        out[bb] = m
    return out


def _project_generated(batch: Batch, sectors: Sequence[Sector]) -> Batch:
    """Orthogonal projection onto the commutant of the algebra whose sectors are given.

    With ``sectors`` describing ``S'`` this projects onto ``S''``:
    ``P(x) = sum_k m_k^-1 sum_ij tr(W_i^dagger x W_j) W_i W_j^dagger``.
    """
    out = {b: np.zeros_like(x) for b, x in batch.items()}
    for sec in sectors:
        r, d, m = sec.isometries.shape
        wcat = sec.isometries.transpose(1, 0, 2).reshape(d, r * m)
        x = batch[sec.block]
        inner = (wcat.conj().T @ x @ wcat).reshape(-1, r, m, r, m)
        t = np.trace(inner, axis1=2, axis2=4) / m
        expanded = np.einsum('nij,mk->nimjk', t, np.eye(m)).reshape(-1, r * m, r * m)
        out[sec.block] += wcat @ expanded @ wcat.conj().T
    return out


def _batch_norms(batch: Batch) -> np.ndarray:
    n = _batch_size(batch)
    tot = np.zeros(n)
    for x in batch.values():
        tot += (np.abs(x) ** 2).reshape(n, -1).sum(axis=1)
    return np.sqrt(tot)


def maximal_intervals(sites: Iterable[int]) -> list[Interval]:
    """Split a finite set of integers into maximal runs."""
    s = sorted(set(sites))
    out = []
    for x in s:
        if out and out[-1].hi == x - 1:
            out[-1] = Interval(out[-1].lo, x)
        else:
            out.append(Interval(x, x))
    return out


def _generated_dim(alg: LocalAlgebra, comps: Sequence[Interval]) -> int:
    """Linear dimension of the algebra generated by ``ι(A_c)`` for ``c`` in ``comps``.

    Computed inside the hull of the components, where the centre is already
    generated; inclusion into ``alg`` is injective, so the dimension carries over.
    """
    hull = alg.restrict_to(Interval(comps[0].lo, comps[-1].hi))
    if len(comps) == 1:
        return hull.dim
    pieces = [hull.restrict_to(c) for c in comps]
    return sum(s.multiplicity ** 2 for s in commutant_sectors(hull, pieces))


def _containment_batch(batch: Batch, ambient: LocalAlgebra, comps: Sequence[Interval]) -> np.ndarray:
    """Per-element residual of containment in the algebra generated by the components.

    Zero exactly when the element lies in that algebra. The projection runs
    through the hull of the components, whose centre is already generated by
    the two extreme components.
    """
    hull = Interval(comps[0].lo, comps[-1].hi)
    small = ambient.restrict_to(hull)
    y = _preimage(batch, small, ambient)
    if len(comps) > 1:
        sectors = commutant_sectors(small, [small.restrict_to(c) for c in comps])
        y = _project_generated(y, sectors)
    back = _embed(y, small, ambient)
    return _batch_norms({b: batch[b] - back[b] for b in batch})


def containment_residual(ops: Sequence[BlockOperator], sites: Iterable[int]) -> float:
    """Largest Hilbert-Schmidt distance from ``ops`` to the algebra generated on ``sites``."""
    ops = list(ops)
    if not ops:
        return 0.0
    amb = ops[0].algebra
    comps = maximal_intervals(sites)
    return float(_containment_batch(_as_batch(ops, amb), amb, comps).max())


# ---------------------------------------------------------------------------
# Haag duality


def _average_over_units(batch: Batch, piece: LocalAlgebra, big: LocalAlgebra) -> Batch:
    """Projection onto the commutant of ``ι(piece)``: ``x -> sum_c n_c^-1 sum_pq E_pq x E_qp``."""
    struct = embedding_structure(piece, big)
    out = {}
    for bb, x in batch.items():
        y = np.zeros_like(x)
        for sec in struct[bb]:
            r = sec.rows
            n_in = r.shape[1]
            part = x[:, r[:, None, :], r[None, :, :]].sum(axis=3) / n_in
            y[:, r[:, None, :], r[None, :, :]] = part[:, :, :, None]
        out[bb] = y
    return out


def _site_ancilla(support: Interval, dim: int | None) -> RegisterShape | None:
    return None if dim is None else RegisterShape.uniform(support.sites(), dim)


def _boundary_constraint(basis: Batch, ambient: LocalAlgebra, free_sites: set[int],
                         margin: int, ancilla_dim: int | None) -> np.ndarray:
    """Coefficient vectors (rows) of elements of ``span(basis)`` commuting with
    the local algebras of ``free_sites`` that cross the boundary of the ambient
    interval by up to ``margin`` sites.
    """
    total = ambient.support
    straddles = []
    if total.lo in free_sites:
        hi = total.lo
        while hi + 1 in free_sites and hi + 1 <= total.hi:
            hi += 1
        straddles.append(Interval(total.lo - margin, hi))
    if total.hi in free_sites:
        lo = total.hi
        while lo - 1 in free_sites and lo - 1 >= total.lo:
            lo -= 1
        straddles.append(Interval(lo, total.hi + margin))
    n = _batch_size(basis)
    if not straddles or n == 0:
        return np.eye(n, dtype=complex)
    big_support = Interval(total.lo - margin, total.hi + margin)
    big = LocalAlgebra(ambient.graph, big_support, _site_ancilla(big_support, ancilla_dim))
    lifted = _embed(basis, ambient, big)
    cols = []
    for s in straddles:
        avg = _average_over_units(lifted, LocalAlgebra(ambient.graph, s, _site_ancilla(s, ancilla_dim)), big)
        cols.append(np.concatenate([(avg[b] - lifted[b]).reshape(n, -1) for b in big.blocks], axis=1))
    mat = np.concatenate(cols, axis=1).T
    return _null_space(mat, n)


def haag_check(g: Graph, total: Interval, inner: Interval | Iterable[int], ancilla_dim: int | None = None,
               tol: float = 1e-10, max_spread: int = 0, margin: int | None = None) -> CheckReport:
    """Commutant of ``ι(A_{Λ\\F})`` in ``A_Λ`` against ``ι(A_F)``.

    ``inner`` is an interval or any finite set of sites ``F``. The commutant
    also has to commute with the local algebras of ``F^c`` that cross the
    ends of ``Λ`` (``margin`` sites beyond, default the uniform reach).
    Otherwise the centre of ``A_Λ``, which records boundary vertices, would
    sit in every finite-volume commutant. Both dimensions are reported.
    Passes when the dimensions agree and the commutant lies in ``A_{F^{+R}}``
    for some ``R <= max_spread``.
    """
    sites = set(inner.sites()) if isinstance(inner, Interval) else {int(s) for s in inner}
    if not sites:
        raise ValueError("inner set is empty")
    if not sites <= set(total.sites()):
        raise ValueError(f"inner sites {sorted(sites)} are not inside {total}")
    warnings = []
    with timer() as clock:
        amb = LocalAlgebra(g, total, _site_ancilla(total, ancilla_dim))
        free = maximal_intervals(set(total.sites()) - sites)
        params = {'graph': g.N.tolist(), 'total': [total.lo, total.hi], 'inner': sorted(sites),
                  'ancilla_dim': ancilla_dim, 'max_spread': max_spread}
        comps = maximal_intervals(sites)
        local_dim = _generated_dim(amb, comps)
        if not free:
            warnings.append("inner set covers the whole interval: commutant is the full algebra (vacuous)")
            log.warning(warnings[-1])
            params.update(commutant_dim=amb.dim, commutant_dim_in_box=amb.dim, local_dim=local_dim, spread=0)
            rep = CheckReport.from_residuals('haag', params, {'containment': 0.0}, tol,
                                             structural={'dims_equal': True, 'spread_ok': True}, warnings=warnings)
            rep.elapsed_ms = clock[0]
            return rep
        sectors = commutant_sectors(amb, [amb.restrict_to(c) for c in free])
        basis = _sector_batch(sectors, amb)
        naive_dim = _batch_size(basis)
        if len(amb.blocks) > 1:
            r = uniform_reach(g) if margin is None else margin
            coeff = _boundary_constraint(basis, amb, set(total.sites()) - sites, r, ancilla_dim)
            basis = {b: np.einsum('kn,nde->kde', coeff, x) for b, x in basis.items()}
            params['margin'] = r
        comm_dim = _batch_size(basis)
        spread, at_zero, at_spread = None, None, None
        max_r = max(total.hi - min(sites), max(sites) - total.lo)
        for radius in range(0, max_r + 1):
            grown = {s for x in sites for s in range(x - radius, x + radius + 1)} & set(total.sites())
            res = float(_containment_batch(basis, amb, maximal_intervals(grown)).max()) if comm_dim else 0.0
            if radius == 0:
                at_zero = res
            at_spread = res
            if res <= tol:
                spread = radius
                break
        params.update(commutant_dim=comm_dim, commutant_dim_in_box=naive_dim, local_dim=local_dim,
                      spread=spread, containment_at_zero=at_zero)
        structural = {'dims_equal': comm_dim == local_dim,
                      'spread_ok': spread is not None and spread <= max_spread}
        rep = CheckReport.from_residuals('haag', params, {'containment': at_spread}, tol,
                                         structural=structural, warnings=warnings)
    rep.elapsed_ms = clock[0]
    return rep


# ---------------------------------------------------------------------------
# net axioms


IncludeFn = Callable[[BlockOperator, Interval], BlockOperator]


def validate_net(g: Graph, max_interval: int, include_fn: IncludeFn = include, seed: int = 0,
                 tol: float = 1e-12) -> CheckReport:
    """Isotony and locality of the path net on all sub-intervals of ``[0, max_interval)``.

    Per nested pair ``I ⊆ J``: the image of ``1`` is ``1``, products and
    adjoints are preserved, and norms are preserved (injectivity). Per
    disjoint pair: the images commute inside the hull.
    """
    rng = np.random.default_rng(seed)
    intervals = [Interval(a, b) for a in range(max_interval) for b in range(a, max_interval)]
    worst = {'unital': 0.0, 'multiplicative': 0.0, 'adjoint': 0.0, 'injective': 0.0, 'locality': 0.0}
    with timer() as clock:
        for I in intervals:
            alg = LocalAlgebra(g, I)
            f, h = alg.random(rng), alg.random(rng)
            for J in intervals:
                if I == J or not I.issubset(J):
                    continue
                big = LocalAlgebra(g, J)
                fi, hi = include_fn(f, J), include_fn(h, J)
                worst['unital'] = max(worst['unital'], (include_fn(alg.identity(), J) - big.identity()).max_abs())
                worst['multiplicative'] = max(worst['multiplicative'], (include_fn(f @ h, J) - fi @ hi).max_abs())
                worst['adjoint'] = max(worst['adjoint'], (include_fn(f.H, J) - fi.H).max_abs())
                worst['injective'] = max(worst['injective'], abs(fi.norm() - f.norm()) / max(f.norm(), 1.0))
        for I in intervals:
            for K in intervals:
                if not (I.hi < K.lo):
                    continue
                hull = Interval(I.lo, K.hi)
                a = include_fn(LocalAlgebra(g, I).random(rng), hull)
                b = include_fn(LocalAlgebra(g, K).random(rng), hull)
                worst['locality'] = max(worst['locality'], a.commutator(b).max_abs())
    params = {'graph': g.N.tolist(), 'max_interval': max_interval, 'seed': seed}
    rep = CheckReport.from_residuals('graph-validate', params, worst, tol)
    rep.params['axioms'] = {k: v <= tol for k, v in worst.items()}
    rep.elapsed_ms = clock[0]
    return rep
