"""Ancilla stabilization and the explicit interleaving bijections.

Registers stand in for the oscillator factors ``l^2(N)``: each has a finite
dimension, and per-block codomains may be ragged. All unitaries here are
permutations of enumerated bases. They are stored as forward/inverse index
arrays and never as dense matrices.

Layout used by :func:`build_lambda` for an interval of ``n`` segments of
length ``2k`` (sites ``0 .. 2kn-1`` relative to the interval start)::

    segment s     : sites 2ks .. 2ks+2k-1, path p_s from v_s to v_{s+1}
    merge path    : site 2ks carries  l_{v_s v_{s+1}} * r + p_s
    merge vertex  : site 2ks-k (s >= 1) carries  t * r + v_s

Every other site keeps its plain register value ``r``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .algebra import BlockOperator, LocalAlgebra, RegisterShape, TraceData, markov_trace
from .graphs import Graph, Interval, count_matrix, enumerate_paths, path_index, single_vertex_graph, uniform_reach
from .commutant import maximal_intervals
from .algebra import embedding_structure
from .reports import CheckReport, timer

__all__ = ['RegisterShape', 'BasisBijection', 'RegisterMismatch', 'phi', 'psi', 'build_lambda',
           'lambda_family', 'register_algebra', 'alpha', 'spread_certificate', 'StabilizedState',
           'stabilized_state_eval', 'merge_forward', 'merge_inverse']


class RegisterMismatch(ValueError):
    """An operator's registers do not match the bijection codomain."""


def merge_forward(index: np.ndarray | int, digit: np.ndarray | int, base: int):
    """``(index, digit) -> base * digit + index``."""
    return base * np.asarray(digit) + np.asarray(index)


def merge_inverse(merged: np.ndarray | int, base: int):
    """``n -> (n mod base, (n - n mod base) / base)``."""
    merged = np.asarray(merged)
    low = merged % base
    return low, (merged - low) // base


@dataclass(frozen=True, eq=False)
class BasisBijection:
    """Exact permutation between two enumerated orthonormal bases.

    ``domain`` and ``codomain`` are integer arrays whose rows are the basis
    labels in enumeration order. ``forward[x]`` is the codomain position of
    domain element ``x`` and ``inverse`` undoes it.
    """
    domain_labels: tuple[str, ...]
    domain: np.ndarray
    codomain_labels: tuple[str, ...]
    codomain: np.ndarray
    forward: np.ndarray
    inverse: np.ndarray
    codomain_shape: RegisterShape | None = None

    @property
    def size(self) -> int:
        return len(self.forward)

    def composition_errors(self) -> tuple[int, int]:
        """Number of points where ``inverse∘forward`` and ``forward∘inverse`` differ from the identity."""
        ident = np.arange(self.size)
        return (int((self.inverse[self.forward] != ident).sum()),
                int((self.forward[self.inverse] != ident).sum()))

    def is_permutation(self) -> bool:
        f = self.forward
        return (len(self.domain) == len(self.codomain) == len(f)
                and np.array_equal(np.sort(f), np.arange(len(f)))
                and self.composition_errors() == (0, 0))

    def matrix(self) -> np.ndarray:
        """Dense permutation unitary ``U |x> = |forward[x]>`` (small sizes only)."""
        u = np.zeros((self.size, self.size))
        u[self.forward, np.arange(self.size)] = 1.0
        return u

    def pull_back(self, mat: np.ndarray) -> np.ndarray:
        """``U^dagger M U`` computed by index permutation."""
        f = self.forward
        return mat[f[:, None], f[None, :]]

    def push_forward(self, mat: np.ndarray) -> np.ndarray:
        """``U M U^dagger`` computed by index permutation."""
        g = self.inverse
        return mat[g[:, None], g[None, :]]

    def map_label(self, row: Sequence[int]) -> tuple[int, ...]:
        idx = _row_index(self.domain, row)
        return tuple(int(x) for x in self.codomain[self.forward[idx]])


def _row_index(table: np.ndarray, row) -> int:
    hits = np.flatnonzero((table == np.asarray(row)).all(axis=1))
    if len(hits) != 1:
        raise KeyError(f"label {tuple(row)} not in basis")
    return int(hits[0])


def _product_table(dims: Sequence[int]) -> np.ndarray:
    if not dims:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.unravel_index(np.arange(int(np.prod(dims, dtype=np.int64))), tuple(dims))
    return np.stack(grids, axis=1).astype(np.int64)


def phi(l: int, regs: RegisterShape) -> BasisBijection:
    """``|p, n_1, rest> -> |l n_1 + p, rest>`` from ``C^l (x) regs`` onto ``C^{lD} (x) rest``."""
    if l < 1:
        raise ValueError("l must be at least 1")
    if len(regs) == 0:
        raise ValueError("phi needs at least one register")
    first, rest = regs.dims[0], regs.dims[1:]
    dom = _product_table((l,) + regs.dims)
    cod = _product_table((l * first,) + rest)
    merged = merge_forward(dom[:, 0], dom[:, 1], l)
    forward = np.ravel_multi_index((merged, *dom[:, 2:].T), (l * first,) + rest) if rest else merged
    low, high = merge_inverse(cod[:, 0], l)
    inverse = np.ravel_multi_index((low, high, *cod[:, 1:].T), (l,) + regs.dims)
    labels = regs.labels
    shape = RegisterShape(((labels[0], l * first),) + regs.registers[1:])
    return BasisBijection(('path',) + labels, dom, labels, cod, np.asarray(forward, np.int64),
                          np.asarray(inverse, np.int64), shape)


def psi(t: int, regs: RegisterShape, branch_dims: Sequence[int] | None = None) -> BasisBijection:
    """``|j, n_1, rest> -> |t n_1 + j, rest>`` from ``(+)_j C^{D_j} (x) rest`` onto ``C^{sum D_j} (x) rest``.

    ``branch_dims[j]`` is the first-register dimension on branch ``j``
    (default: the first register's dimension on every branch). Pairs
    ``(j, n_1)`` are ranked by ``(n_1, j)``, which reduces to ``t n_1 + j``
    when all branches agree.
    """
    if t < 1:
        raise ValueError("t must be at least 1")
    if len(regs) == 0:
        raise ValueError("psi needs at least one register")
    dims = [regs.dims[0]] * t if branch_dims is None else [int(d) for d in branch_dims]
    if len(dims) != t or min(dims) < 1:
        raise ValueError(f"need {t} positive branch dimensions, got {dims}")
    rest = regs.dims[1:]
    pairs = np.array([(j, n) for j in range(t) for n in range(dims[j])], dtype=np.int64)
    order = np.lexsort((pairs[:, 0], pairs[:, 1]))
    rank = np.empty(len(pairs), dtype=np.int64)
    rank[order] = np.arange(len(pairs))
    total = len(pairs)
    rest_table = _product_table(rest)
    n_rest = len(rest_table)
    dom = np.concatenate([np.repeat(pairs, n_rest, axis=0), np.tile(rest_table, (total, 1))], axis=1)
    forward = rank.repeat(n_rest) * n_rest + np.tile(np.arange(n_rest), total)
    cod = _product_table((total,) + rest)
    inverse = np.empty_like(forward)
    inverse[forward] = np.arange(len(forward))
    labels = regs.labels
    shape = RegisterShape(((labels[0], total),) + regs.registers[1:])
    return BasisBijection(('branch',) + labels, dom, labels, cod, np.asarray(forward, np.int64), inverse, shape)


# ---------------------------------------------------------------------------
# the composite


def build_lambda(g: Graph, i: int, j: int, n_blocks: int, half_block: int, D: int) -> BasisBijection:
    """The composite of segment-wise path merges and vertex merges on one boundary block.

    Domain: the ``(i, j)`` block basis of ``A_I`` (x) registers, ``I = [0, 2kn-1]``
    with ``D`` per site, in :class:`LocalAlgebra` order (path major). Codomain:
    the image register tuples (one value per site), enumerated in
    lexicographic order. The tuple set is ragged for graphs with several
    vertices.
    """
    k, n = half_block, n_blocks
    if n < 2:
        raise ValueError("n_blocks must be at least 2")
    if k < 1 or D < 1:
        raise ValueError("half_block and D must be positive")
    t = g.vertex_count
    if not (0 <= i < t and 0 <= j < t):
        raise IndexError(f"boundary vertices ({i}, {j}) out of range")
    m = uniform_reach(g)
    if 2 * k < m:
        raise ValueError(f"segment length 2k={2 * k} is below the uniform reach {m}")
    seg = 2 * k
    length = seg * n
    lcount = count_matrix(g, seg)
    paths = enumerate_paths(g, length, i, j)
    n_regs = D ** length
    regs = _product_table((D,) * length)

    # per path: vertices at segment boundaries and the segment path indices
    verts = np.empty((len(paths), n + 1), dtype=np.int64)
    seg_idx = np.empty((len(paths), n), dtype=np.int64)
    for row, p in enumerate(paths):
        rest = p
        for s in range(n):
            piece, rest = rest.split(seg)
            verts[row, s] = piece.start
            seg_idx[row, s] = path_index(g, seg, piece.start, piece.end)[piece]
        verts[row, n] = rest.start

    n_paths = len(paths)
    pv = np.repeat(np.arange(n_paths), n_regs)
    code = np.tile(regs, (n_paths, 1)).copy()
    for s in range(n):
        a, b = verts[pv, s], verts[pv, s + 1]
        code[:, seg * s] = merge_forward(seg_idx[pv, s], code[:, seg * s], lcount[a, b])
    for s in range(1, n):
        code[:, seg * s - k] = merge_forward(verts[pv, s], code[:, seg * s - k], t)

    order = np.lexsort(code.T[::-1])
    codomain = code[order]
    if len(codomain) > 1 and (np.diff(codomain, axis=0) == 0).all(axis=1).any():
        raise RuntimeError("interleaving map is not injective")
    forward = np.empty(len(code), dtype=np.int64)
    forward[order] = np.arange(len(code))
    inverse = order.astype(np.int64)
    domain = np.concatenate([np.repeat(np.arange(n_paths), n_regs)[:, None], np.tile(regs, (n_paths, 1))], axis=1)
    bounds = codomain.max(axis=0) + 1
    shape = RegisterShape(tuple((s, int(d)) for s, d in enumerate(bounds)))
    return BasisBijection(('path',) + tuple(range(length)), domain, tuple(range(length)), codomain,
                          forward, inverse, shape)


def lambda_family(g: Graph, n_blocks: int, half_block: int, D: int) -> dict[tuple[int, int], BasisBijection]:
    t = g.vertex_count
    counts = count_matrix(g, 2 * half_block * n_blocks)
    return {(i, j): build_lambda(g, i, j, n_blocks, half_block, D)
            for i in range(t) for j in range(t) if counts[i, j] > 0}


def _family_params(family: Mapping[tuple[int, int], BasisBijection]) -> tuple[int, int]:
    """``(length, D)`` of a lambda family."""
    lam = next(iter(family.values()))
    length = lam.domain.shape[1] - 1
    D = int(lam.domain[:, 1:].max()) + 1 if lam.size else 1
    return length, D


def register_algebra(sites: Interval, dims: Sequence[int]) -> LocalAlgebra:
    """``B(K^{(x) sites})`` truncated to the given register dimensions."""
    if len(dims) != len(sites):
        raise ValueError("one dimension per site required")
    return LocalAlgebra(_TRIVIAL, sites, RegisterShape(tuple(zip(sites.sites(), dims))))


_TRIVIAL = single_vertex_graph(1)


def alpha(a: BlockOperator, family: Mapping[tuple[int, int], BasisBijection], g: Graph,
          half_block: int) -> BlockOperator:
    """``(+)_{ij} Λ_ij^dagger (1 (x) a (x) 1) Λ_ij`` in the stabilized algebra of the whole interval.

    ``a`` lives in a :func:`register_algebra` whose sites lie in the middle
    interval. The acted-on registers must be free in every codomain, meaning
    the tuple set factorizes as (their full range) x (everything else).
    Otherwise ``1 (x) a (x) 1`` is not defined on the truncated codomain.
    """
    if a.algebra.graph.vertex_count != 1 or a.algebra.ancilla is None:
        raise RegisterMismatch("operator must live in a register algebra")
    length, D = _family_params(family)
    k = half_block
    middle = Interval(k, length - k - 1)
    sites = list(a.algebra.ancilla.labels)
    if not all(s in middle for s in sites):
        raise RegisterMismatch(f"registers {sites} are not inside the middle interval {middle}")
    dims = a.algebra.ancilla.dims
    amat = a.blocks[(0, 0)]
    target = LocalAlgebra.stabilized(g, Interval(0, length - 1), D)
    blocks = {}
    for b in target.blocks:
        lam = family[b]
        cod = lam.codomain
        sub = cod[:, sites]
        other = np.delete(cod, sites, axis=1)
        for s, d in zip(sites, dims):
            if cod[:, s].max() + 1 != d:
                raise RegisterMismatch(f"register {s} has range {cod[:, s].max() + 1} in block {b}, operator expects {d}")
        _, rest_id = np.unique(other, axis=0, return_inverse=True)
        rest_id = rest_id.ravel()
        n_rest = rest_id.max() + 1
        d_sub = int(np.prod(dims))
        if n_rest * d_sub != len(cod):
            raise RegisterMismatch(f"registers {sites} are not free in block {b}: codomain does not factorize")
        pos = np.full((n_rest, d_sub), -1, dtype=np.int64)
        pos[rest_id, np.ravel_multi_index(sub.T, dims)] = lam.inverse
        if (pos < 0).any():
            raise RegisterMismatch(f"registers {sites} are not free in block {b}")
        m = np.zeros((lam.size, lam.size), dtype=complex)
        m[pos[:, :, None], pos[:, None, :]] = amat[None, :, :]
        blocks[b] = m
    return BlockOperator(target, blocks)


# ---------------------------------------------------------------------------
# spread certificate


def spread_certificate(output: BlockOperator, support: Interval, half_block: int, tol: float = 1e-10,
                       margin: int = 0) -> CheckReport:
    """Smallest ``R`` for which ``output`` commutes with every stabilized local
    algebra on the maximal intervals outside ``support^{+R}``.

    The box is the output's own interval, enlarged by ``margin`` sites so that
    generators crossing its ends are tested too. Passes iff ``R <= half_block``.
    On failure at ``R = half_block`` the worst generator is returned as a witness.
    """
    with timer() as clock:
        alg = output.algebra
        D = _uniform_ancilla(alg)
        box = alg.support.enlarge(margin)
        if margin:
            from .algebra import include
            big = LocalAlgebra(alg.graph, box, None if D is None else RegisterShape.uniform(box.sites(), D))
            output = include(output, big)
            alg = big
        r_max = max(support.lo - box.lo, box.hi - support.hi, 0)
        found, per_radius, witness = None, {}, None
        for radius in range(0, r_max + 1):
            grown = support.enlarge(radius)
            outside = [s for s in box.sites() if s not in grown]
            worst, where = 0.0, None
            for piece in maximal_intervals(outside):
                p_alg = LocalAlgebra(alg.graph, piece, None if D is None else RegisterShape.uniform(piece.sites(), D))
                res, unit = _worst_commutator(output, p_alg)
                if res > worst:
                    worst, where = res, {'interval': [piece.lo, piece.hi], **unit}
            per_radius[radius] = worst
            if radius == half_block:
                witness = where
            if worst <= tol and found is None:
                found = radius
                if radius >= half_block:
                    break
        params = {'support': [support.lo, support.hi], 'half_block': half_block, 'box': [box.lo, box.hi],
                  'spread': found, 'residual_by_radius': per_radius}
        ok = found is not None and found <= half_block
        if not ok:
            params['witness'] = witness
        at_k = per_radius.get(half_block, 0.0)
        rep = CheckReport.from_residuals('spread', params, {'commutator_at_half_block': at_k}, tol,
                                         structural={'spread_within_bound': ok})
    rep.elapsed_ms = clock[0]
    return rep


def _uniform_ancilla(alg: LocalAlgebra) -> int | None:
    if alg.ancilla is None:
        return None
    dims = set(alg.ancilla.dims)
    if len(dims) != 1:
        raise ValueError("spread certificate needs one register dimension per site")
    return dims.pop()


def _worst_commutator(x: BlockOperator, piece: LocalAlgebra) -> tuple[float, dict]:
    """Largest ``|[x, ι(e_pq)]|`` over matrix units of ``piece``."""
    struct = embedding_structure(piece, x.algebra)
    worst, where = 0.0, {}
    for src, d in piece.block_dims.items():
        for p in range(d):
            for q in range(d):
                res = 0.0
                for bb, secs in struct.items():
                    for sec in secs:
                        if sec.source_block != src:
                            continue
                        m = x.blocks[bb]
                        rows_p, rows_q = sec.rows[:, p], sec.rows[:, q]
                        # x E - E x with E = sum_o |rows_p[o]><rows_q[o]|
                        xe = np.zeros_like(m)
                        xe[:, rows_q] = m[:, rows_p]
                        ex = np.zeros_like(m)
                        ex[rows_p, :] = m[rows_q, :]
                        res = max(res, float(np.abs(xe - ex).max()))
                if res > worst:
                    worst, where = res, {'block': list(src), 'unit': [p, q]}
    return worst, where


# ---------------------------------------------------------------------------
# product states with an ancilla vector


@dataclass(frozen=True, eq=False)
class StabilizedState:
    """A state on the path algebra tensored with the product vector state of ``xi``.

    ``base`` is a :class:`TraceData` (Markov trace) or a mapping from block to
    density matrix on the path space. The density blocks must be positive
    and have total trace 1.
    """
    base: TraceData | Mapping[tuple[int, int], np.ndarray]
    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=complex)
        if xi.ndim != 1 or abs(np.linalg.norm(xi) - 1) > 1e-12:
            raise ValueError("ancilla vector must be a unit vector")
        object.__setattr__(self, 'xi', xi)
        if not isinstance(self.base, TraceData):
            blocks = {b: np.asarray(r, dtype=complex) for b, r in self.base.items()}
            tot = sum(np.trace(r) for r in blocks.values())
            if abs(tot - 1) > 1e-10:
                raise ValueError(f"density blocks have total trace {tot}, expected 1")
            for b, r in blocks.items():
                if np.abs(r - r.conj().T).max() > 1e-10 or np.linalg.eigvalsh((r + r.conj().T) / 2).min() < -1e-10:
                    raise ValueError(f"density block {b} is not positive")
            object.__setattr__(self, 'base', blocks)


def stabilized_state_eval(state: StabilizedState, f: BlockOperator) -> complex:
    """``(base (x) <xi|^{(x)sites} . |xi>^{(x)sites})(f)``."""
    alg = f.algebra
    if alg.ancilla is None:
        raise ValueError("operator carries no ancilla registers")
    if any(d != len(state.xi) for d in alg.ancilla.dims):
        raise ValueError(f"register dimensions {alg.ancilla.dims} do not match the vector of length {len(state.xi)}")
    vec = np.ones(1, dtype=complex)
    for _ in alg.ancilla.dims:
        vec = np.kron(vec, state.xi)
    r = alg.ancilla_dim
    path_alg = LocalAlgebra(alg.graph, alg.support)
    compressed = {}
    for b, m in f.blocks.items():
        p = m.shape[0] // r
        compressed[b] = np.einsum('xrys,r,s->xy', m.reshape(p, r, p, r), vec.conj(), vec)
    reduced = BlockOperator(path_alg, compressed)
    if isinstance(state.base, TraceData):
        return markov_trace(reduced, state.base)
    out = 0j
    for b, m in reduced.blocks.items():
        rho = state.base.get(b)
        if rho is None:
            continue
        if rho.shape != m.shape:
            raise ValueError(f"density block {b} has shape {rho.shape}, expected {m.shape}")
        out += np.trace(rho @ m)
    return complex(out)
