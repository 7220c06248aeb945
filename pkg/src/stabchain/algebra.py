"""Local algebras of the path model and their block operators.

For a graph ``g`` and an interval ``I`` the local algebra is

    A_I = (+)_{i,j} B(H^I_{ij}),   H^I_{ij} = C[paths of length |I| from i to j],

optionally tensored with ancilla registers (one :class:`RegisterShape` for the
whole interval). Inside a block the basis is ``path (x) reg_1 (x) reg_2 ...``,
path index major, registers in the order of the shape.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Iterable

import numpy as np

from .graphs import Graph, Interval, count_matrix, enumerate_paths, path_index

__all__ = ['RegisterShape', 'LocalAlgebra', 'BlockOperator', 'TraceData', 'TraceDegenerate',
           'identity', 'include', 'trace_data', 'markov_trace', 'trace_weights',
           'embedding_structure']


@dataclass(frozen=True)
class RegisterShape:
    """Ordered ancilla registers ``(label, dimension)``; dimensions may differ."""
    registers: tuple[tuple[Hashable, int], ...]

    def __post_init__(self):
        regs = tuple((lab, int(d)) for lab, d in self.registers)
        for lab, d in regs:
            if d < 1:
                raise ValueError(f"register {lab!r} has dimension {d} < 1")
        labels = [lab for lab, _ in regs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate register labels in {labels}")
        object.__setattr__(self, 'registers', regs)

    @classmethod
    def uniform(cls, sites: Iterable[Hashable], dim: int) -> 'RegisterShape':
        return cls(tuple((s, dim) for s in sites))

    @property
    def labels(self) -> tuple:
        return tuple(lab for lab, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.registers)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.registers else 1

    def __len__(self):
        return len(self.registers)

    def dim_of(self, label) -> int:
        return dict(self.registers)[label]

    def restrict(self, labels: Iterable[Hashable]) -> 'RegisterShape':
        keep = set(labels)
        return RegisterShape(tuple(r for r in self.registers if r[0] in keep))


def _site_shape(interval: Interval, dim: int | None) -> RegisterShape | None:
    return None if dim is None else RegisterShape.uniform(interval.sites(), dim)


@dataclass(frozen=True)
class LocalAlgebra:
    """The algebra ``A_I`` (tensored with ancilla registers when ``ancilla`` is given)."""
    graph: Graph
    support: Interval
    ancilla: RegisterShape | None = None

    @classmethod
    def stabilized(cls, graph: Graph, support: Interval, dim: int) -> 'LocalAlgebra':
        """``A_I`` with one ``dim``-dimensional register per site of ``I``."""
        return cls(graph, support, _site_shape(support, dim))

    @property
    def ancilla_dim(self) -> int:
        return 1 if self.ancilla is None else self.ancilla.total

    @property
    def blocks(self) -> tuple[tuple[int, int], ...]:
        return _blocks(self.graph, len(self.support))

    def path_dim(self, i: int, j: int) -> int:
        return int(count_matrix(self.graph, len(self.support))[i, j])

    def block_dim(self, i: int, j: int) -> int:
        return self.path_dim(i, j) * self.ancilla_dim

    @property
    def block_dims(self) -> dict[tuple[int, int], int]:
        return {b: self.block_dim(*b) for b in self.blocks}

    @property
    def dim(self) -> int:
        """Linear dimension of the algebra."""
        return sum(d * d for d in self.block_dims.values())

    def restrict_to(self, sub: Interval) -> 'LocalAlgebra':
        """The algebra of a sub-interval, carrying the matching ancilla registers."""
        if not sub.issubset(self.support):
            raise ValueError(f"{sub} is not inside {self.support}")
        anc = None if self.ancilla is None else self.ancilla.restrict(sub.sites())
        return LocalAlgebra(self.graph, sub, anc)

    def identity(self) -> 'BlockOperator':
        return BlockOperator(self, {b: np.eye(d, dtype=complex) for b, d in self.block_dims.items()})

    def zero(self) -> 'BlockOperator':
        return BlockOperator(self, {})

    def matrix_units(self):
        """Yield ``(block, p, q, e_pq)`` for every matrix unit of the algebra."""
        for b, d in self.block_dims.items():
            for p in range(d):
                for q in range(d):
                    m = np.zeros((d, d), dtype=complex)
                    m[p, q] = 1.0
                    yield b, p, q, BlockOperator(self, {b: m})

    def basis(self) -> list['BlockOperator']:
        return [u for *_, u in self.matrix_units()]

    def random(self, rng: np.random.Generator, hermitian: bool = False) -> 'BlockOperator':
        blocks = {}
        for b, d in self.block_dims.items():
            m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
            blocks[b] = (m + m.conj().T) / 2 if hermitian else m
        return BlockOperator(self, blocks)

    def vectorize(self, op: 'BlockOperator') -> np.ndarray:
        self._check(op)
        return np.concatenate([op.blocks[b].ravel() for b in self.blocks])

    def unvectorize(self, vec: np.ndarray) -> 'BlockOperator':
        blocks, start = {}, 0
        for b, d in self.block_dims.items():
            blocks[b] = np.asarray(vec[start:start + d * d]).reshape(d, d).astype(complex)
            start += d * d
        return BlockOperator(self, blocks)

    def _check(self, op: 'BlockOperator'):
        if op.algebra != self:
            raise ValueError(f"operator lives in {op.algebra}, expected {self}")

    def __repr__(self):
        anc = '' if self.ancilla is None else f", ancilla={self.ancilla.dims}"
        return f"LocalAlgebra({self.graph!r}, {self.support}{anc})"


@lru_cache(maxsize=None)
def _blocks(g: Graph, length: int) -> tuple[tuple[int, int], ...]:
    counts = count_matrix(g, length)
    t = g.vertex_count
    return tuple((i, j) for i in range(t) for j in range(t) if counts[i, j] > 0)


@dataclass(eq=False)
class BlockOperator:
    """Element of a :class:`LocalAlgebra`, stored as one dense matrix per block."""
    algebra: LocalAlgebra
    blocks: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        dims = self.algebra.block_dims
        full = {}
        for b, d in dims.items():
            m = self.blocks.get(b)
            if m is None:
                full[b] = np.zeros((d, d), dtype=complex)
                continue
            m = np.asarray(m, dtype=complex)
            if m.shape != (d, d):
                raise ValueError(f"block {b} has shape {m.shape}, expected {(d, d)}")
            full[b] = m
        extra = set(self.blocks) - set(dims)
        if extra:
            raise ValueError(f"blocks {sorted(extra)} do not exist in {self.algebra}")
        self.blocks = full

    def _same(self, other: 'BlockOperator'):
        if not isinstance(other, BlockOperator):
            raise TypeError(f"expected BlockOperator, got {type(other).__name__}")
        if other.algebra != self.algebra:
            raise ValueError(f"algebra mismatch: {self.algebra} vs {other.algebra}")

    def __add__(self, other):
        self._same(other)
        return BlockOperator(self.algebra, {b: m + other.blocks[b] for b, m in self.blocks.items()})

    def __sub__(self, other):
        self._same(other)
        return BlockOperator(self.algebra, {b: m - other.blocks[b] for b, m in self.blocks.items()})

    def __neg__(self):
        return BlockOperator(self.algebra, {b: -m for b, m in self.blocks.items()})

    def __mul__(self, scalar):
        if isinstance(scalar, BlockOperator):
            raise TypeError("use @ for operator products")
        return BlockOperator(self.algebra, {b: scalar * m for b, m in self.blocks.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / scalar)

    def __matmul__(self, other):
        self._same(other)
        return BlockOperator(self.algebra, {b: m @ other.blocks[b] for b, m in self.blocks.items()})

    def adjoint(self) -> 'BlockOperator':
        return BlockOperator(self.algebra, {b: m.conj().T for b, m in self.blocks.items()})

    @property
    def H(self) -> 'BlockOperator':
        return self.adjoint()

    def commutator(self, other) -> 'BlockOperator':
        return self @ other - other @ self

    def norm(self) -> float:
        """Operator norm (largest block spectral norm)."""
        return max((np.linalg.norm(m, 2) for m in self.blocks.values() if m.size), default=0.0)

    def hs_norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(m, m).real for m in self.blocks.values())))

    def max_abs(self) -> float:
        return max((float(np.abs(m).max()) for m in self.blocks.values() if m.size), default=0.0)

    def trace(self) -> complex:
        """Unnormalized trace summed over blocks."""
        return complex(sum(np.trace(m) for m in self.blocks.values()))

    def vector(self) -> np.ndarray:
        return self.algebra.vectorize(self)

    def __repr__(self):
        return f"BlockOperator({self.algebra}, blocks={list(self.blocks)})"


def identity(g: Graph, support: Interval, ancilla: RegisterShape | None = None) -> BlockOperator:
    return LocalAlgebra(g, support, ancilla).identity()


# ---------------------------------------------------------------------------
# inclusion maps


@dataclass(frozen=True)
class _Sector:
    source_block: tuple[int, int]
    # rows[o, k]: index in the target block of (outer configuration o, inner basis state k)
    rows: np.ndarray


@lru_cache(maxsize=None)
def embedding_structure(small: LocalAlgebra, big: LocalAlgebra) -> dict[tuple[int, int], tuple[_Sector, ...]]:
    """Index data of the inclusion ``small -> big``.

    For each target block, one :class:`_Sector` per source block whose image
    meets it. The image of ``f`` in the target block places ``f[source_block]``
    on every ``rows[o]`` diagonal sub-block, which is exactly
    ``1_left (x) f (x) 1_right`` under the concatenation bijection of paths.
    """
    if small.graph is not big.graph:
        raise ValueError("graph mismatch")
    I, J = small.support, big.support
    if not I.issubset(J):
        raise ValueError(f"{I} is not contained in {J}")
    g = small.graph
    left_len, inner_len = I.lo - J.lo, len(I)

    # registers: small ones must appear in the big shape with equal dimension
    small_regs = () if small.ancilla is None else small.ancilla.registers
    big_regs = () if big.ancilla is None else big.ancilla.registers
    big_pos = {lab: n for n, (lab, _) in enumerate(big_regs)}
    for lab, d in small_regs:
        if lab not in big_pos or big_regs[big_pos[lab]][1] != d:
            raise ValueError(f"register {lab!r} of dimension {d} missing from target ancilla")
    big_dims = tuple(d for _, d in big_regs)
    inner_pos = [big_pos[lab] for lab, _ in small_regs]
    outer_pos = [n for n in range(len(big_regs)) if n not in set(inner_pos)]
    r_total = int(np.prod(big_dims, dtype=np.int64)) if big_regs else 1
    if big_regs:
        multi = np.array(np.unravel_index(np.arange(r_total), big_dims)).T
        in_dims = [big_dims[p] for p in inner_pos]
        out_dims = [big_dims[p] for p in outer_pos]
        r_in = np.ravel_multi_index(multi[:, inner_pos].T, in_dims) if inner_pos else np.zeros(r_total, int)
        r_out = np.ravel_multi_index(multi[:, outer_pos].T, out_dims) if outer_pos else np.zeros(r_total, int)
        n_rin = int(np.prod(in_dims, dtype=np.int64)) if inner_pos else 1
        n_rout = r_total // n_rin
        reg_pos = np.empty((n_rout, n_rin), dtype=np.int64)
        reg_pos[r_out, r_in] = np.arange(r_total)
    else:
        n_rin = n_rout = 1
        reg_pos = np.zeros((1, 1), dtype=np.int64)

    out = {}
    for bb in big.blocks:
        paths = enumerate_paths(g, len(J), *bb)
        groups: dict[tuple[int, int], dict] = {}
        for row, p in enumerate(paths):
            left, rest = p.split(left_len)
            inner, right = rest.split(inner_len)
            sb = (inner.start, inner.end)
            idx = path_index(g, inner_len, *sb)[inner]
            grp = groups.setdefault(sb, {})
            grp.setdefault((left, right), {})[idx] = row
        sectors = []
        for sb in small.blocks:
            if sb not in groups:
                continue
            n_in = small.path_dim(*sb)
            outers = list(groups[sb].values())
            path_pos = np.array([[o[k] for k in range(n_in)] for o in outers], dtype=np.int64)
            # combine: target index = path_row * r_total + reg_pos[outer_reg, inner_reg]
            rows = (path_pos[:, None, :, None] * r_total + reg_pos[None, :, None, :])
            rows = rows.reshape(len(outers) * n_rout, n_in * n_rin)
            sectors.append(_Sector(sb, rows))
        out[bb] = tuple(sectors)
    return out


def include(f: BlockOperator, target: Interval | LocalAlgebra) -> BlockOperator:
    """Image of ``f`` under ``A_I -> A_J``: tensor with identities on ``J \\ I``.

    ``target`` may be an interval (the ancilla, if any, is then extended by
    registers of the same dimension on the new sites) or a full
    :class:`LocalAlgebra`.
    """
    small = f.algebra
    if isinstance(target, Interval):
        big = LocalAlgebra(small.graph, target, _extend_ancilla(small, target))
    else:
        big = target
    if small.graph is not big.graph:
        raise ValueError("graph mismatch")
    if not small.support.issubset(big.support):
        raise ValueError(f"{small.support} is not contained in {big.support}")
    struct = embedding_structure(small, big)
    blocks = {}
    for bb, d in big.block_dims.items():
        m = np.zeros((d, d), dtype=complex)
        for sec in struct[bb]:
            r = sec.rows
            m[r[:, :, None], r[:, None, :]] = f.blocks[sec.source_block][None, :, :]
        blocks[bb] = m
    return BlockOperator(big, blocks)


def _extend_ancilla(small: LocalAlgebra, target: Interval) -> RegisterShape | None:
    if small.ancilla is None:
        return None
    dims = set(small.ancilla.dims)
    if len(dims) != 1 or set(small.ancilla.labels) != set(small.support.sites()):
        raise ValueError("cannot infer target registers; pass a LocalAlgebra instead")
    return RegisterShape.uniform(target.sites(), dims.pop())


# ---------------------------------------------------------------------------
# Markov trace


class TraceDegenerate(ValueError):
    """Perron-Frobenius weights are not strictly positive."""


@dataclass(frozen=True, eq=False)
class TraceData:
    """Left/right Perron-Frobenius vectors ``u N = lam u``, ``N v = lam v`` with ``u.v = 1``."""
    u: np.ndarray
    v: np.ndarray
    lam: float

    @property
    def symmetric_weights(self) -> bool:
        """Whether ``u`` is proportional to ``v`` (always true for symmetric graphs)."""
        a = self.u / np.linalg.norm(self.u)
        b = self.v / np.linalg.norm(self.v)
        return bool(np.allclose(a, b, atol=1e-10))

    def residuals(self, g: Graph) -> tuple[float, float]:
        n = g.N.astype(float)
        return (float(np.linalg.norm(self.u @ n - self.lam * self.u)),
                float(np.linalg.norm(n @ self.v - self.lam * self.v)))


def _pf_vector(m: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eig(m)
    k = int(np.argmax(vals.real))
    lam = float(vals[k].real)
    vec = vecs[:, k]
    vec = vec * np.exp(-1j * np.angle(vec[np.argmax(np.abs(vec))]))
    vec = vec.real
    if (vec <= 1e-14).any():
        raise TraceDegenerate(f"Perron-Frobenius vector {vec} is not strictly positive")
    return lam, vec


def trace_data(g: Graph) -> TraceData:
    n = g.N.astype(float)
    lam, v = _pf_vector(n)
    _, u = _pf_vector(n.T)
    v = v / v.sum()
    u = u / (u @ v)
    # one Newton-free polish step keeps residuals at machine level for larger graphs
    v = n @ v / lam
    v = v / v.sum()
    u = u @ n / lam
    u = u / (u @ v)
    return TraceData(u, v, lam)


def trace_weights(alg: LocalAlgebra, td: TraceData) -> dict[tuple[int, int], float]:
    """Per-block weights ``w`` with ``tau(f) = sum_b w_b Tr f_b``."""
    scale = td.lam ** (-len(alg.support)) / alg.ancilla_dim
    return {(i, j): float(td.u[i] * td.v[j] * scale) for (i, j) in alg.blocks}


def markov_trace(f: BlockOperator, td: TraceData) -> complex:
    """``tau_I(f) = lam^-|I| sum_{ij} u_i v_j Tr f_ij`` (ancilla traces normalized)."""
    if len(td.u) != f.algebra.graph.vertex_count:
        raise ValueError("trace data does not match the graph")
    w = trace_weights(f.algebra, td)
    return complex(sum(w[b] * np.trace(m) for b, m in f.blocks.items()))
