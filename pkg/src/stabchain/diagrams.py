"""Skeletal string-diagram calculus over multiplicity-free fusion data.

An object is a direct sum of words (tuples of simple labels). A morphism
``X -> Y`` is stored as one matrix per total charge ``c`` acting between the
left-associated splitting-tree bases of ``Hom(c, X)`` and ``Hom(c, Y)``. Trees
are orthonormal, so composition is matrix product and the dagger is the
conjugate transpose. Tensor products are assembled by F-moves that convert a
pair of trees into a single left-associated tree.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Mapping

import numpy as np

from .fusion import FusionData

__all__ = ['Word', 'Obj', 'Morphism', 'Calculus']

Word = tuple


@dataclass(frozen=True)
class Obj:
    """Ordered direct sum of words; ``Obj(((),))`` is the tensor unit."""
    words: tuple

    @classmethod
    def of(cls, *labels: str) -> 'Obj':
        return cls((tuple(labels),))

    @classmethod
    def unit(cls) -> 'Obj':
        return cls(((),))

    @classmethod
    def sum(cls, *objs: 'Obj') -> 'Obj':
        return cls(tuple(w for o in objs for w in o.words))

    def __matmul__(self, other: 'Obj') -> 'Obj':
        return Obj(tuple(w + v for w in self.words for v in other.words))

    def __repr__(self):
        inner = ' + '.join('(' + ','.join(w) + ')' if w else '1' for w in self.words)
        return f"Obj[{inner}]"


class Morphism:
    """Charge-blocked matrix between two objects."""

    def __init__(self, calc: 'Calculus', source: Obj, target: Obj, blocks: Mapping[str, np.ndarray] | None = None):
        self.calc, self.source, self.target = calc, source, target
        self.blocks = {}
        for c in calc.fd.labels:
            shape = (calc.dim(target, c), calc.dim(source, c))
            if shape[0] == 0 or shape[1] == 0:
                continue
            blk = None if blocks is None else blocks.get(c)
            if blk is None:
                blk = np.zeros(shape, dtype=complex)
            blk = np.asarray(blk, dtype=complex)
            if blk.shape != shape:
                raise ValueError(f"charge {c}: block shape {blk.shape} != {shape}")
            self.blocks[c] = blk
        if blocks is not None:
            extra = [c for c, b in blocks.items() if c not in self.blocks and np.size(b)]
            if extra:
                raise ValueError(f"blocks for absent charges {extra}")

    def __matmul__(self, other: 'Morphism') -> 'Morphism':
        """``self o other``: apply ``other`` first."""
        if other.target != self.source:
            raise ValueError(f"cannot compose {other.target} -> {self.source}")
        return Morphism(self.calc, other.source, self.target,
                        {c: self.blocks[c] @ other.blocks[c] for c in self.blocks if c in other.blocks})

    def __add__(self, other: 'Morphism') -> 'Morphism':
        self._same_type(other)
        return Morphism(self.calc, self.source, self.target, {c: b + other.blocks[c] for c, b in self.blocks.items()})

    def __sub__(self, other: 'Morphism') -> 'Morphism':
        return self + (-1) * other

    def __rmul__(self, scalar) -> 'Morphism':
        return Morphism(self.calc, self.source, self.target, {c: scalar * b for c, b in self.blocks.items()})

    def _same_type(self, other):
        if (self.source, self.target) != (other.source, other.target):
            raise ValueError("morphisms have different source or target")

    @property
    def H(self) -> 'Morphism':
        return Morphism(self.calc, self.target, self.source, {c: b.conj().T for c, b in self.blocks.items()})

    def tensor(self, other: 'Morphism') -> 'Morphism':
        return self.calc.tensor(self, other)

    def max_abs(self) -> float:
        return max((float(np.abs(b).max()) for b in self.blocks.values()), default=0.0)

    def distance(self, other: 'Morphism') -> float:
        return (self - other).max_abs()

    def __repr__(self):
        return f"Morphism({self.source} -> {self.target}, charges={list(self.blocks)})"


class Calculus:
    """Trees, F-move basis changes and elementary morphisms for one fusion category."""

    def __init__(self, fd: FusionData):
        self.fd = fd
        self.one = fd.unit
        self.trees = lru_cache(maxsize=None)(self._trees)
        self.pair_to_left = lru_cache(maxsize=None)(self._pair_to_left)
        self._ev_phase: dict[str, complex] = {}

    # -- bases -----------------------------------------------------------
    def _trees(self, word: Word, charge: str) -> tuple:
        """Left-associated trees as tuples of running charges ending in ``charge``."""
        if not word:
            return ((),) if charge == self.one else ()
        partial = [(word[0],)]
        for lab in word[1:]:
            partial = [t + (x,) for t in partial for x in self.fd.products(t[-1], lab)]
        return tuple(t for t in partial if t[-1] == charge)

    def dim(self, obj: Obj, charge: str) -> int:
        return sum(len(self.trees(w, charge)) for w in obj.words)

    def offsets(self, obj: Obj, charge: str) -> list[int]:
        out, acc = [], 0
        for w in obj.words:
            out.append(acc)
            acc += len(self.trees(w, charge))
        return out

    def charges(self, word: Word) -> list[str]:
        return [c for c in self.fd.labels if self.trees(word, c)]

    def _pair_layout(self, A: Word, B: Word, c: str):
        """Column layout of the pair-tree basis: ``(a, b, offset, n_a, n_b)``."""
        out, off = [], 0
        for a in self.charges(A):
            for b in self.charges(B):
                if not self.fd.N(a, b, c):
                    continue
                na, nb = len(self.trees(A, a)), len(self.trees(B, b))
                out.append((a, b, off, na, nb))
                off += na * nb
        return out, off

    def _pair_to_left(self, A: Word, B: Word, c: str) -> np.ndarray:
        """Unitary from pair trees ``(A)_a (x) (B)_b -> c`` to left trees of ``A+B``."""
        layout, ncols = self._pair_layout(A, B, c)
        left = self.trees(A + B, c)
        index = {t: i for i, t in enumerate(left)}
        U = np.zeros((len(left), ncols), dtype=complex)
        if not A or not B:
            for (a, b, off, na, nb) in layout:
                U[:, off:off + na * nb] = np.eye(len(left))
            return U
        if len(B) == 1:
            for (a, b, off, na, nb) in layout:
                for i, tA in enumerate(self.trees(A, a)):
                    U[index[tA + (c,)], off + i] = 1.0
            return U
        Bp, last = B[:-1], B[-1]
        for (a, b, off, na, nb) in layout:
            for i, tA in enumerate(self.trees(A, a)):
                for j, tB in enumerate(self.trees(B, b)):
                    ep = tB[-2]
                    jp = self.trees(Bp, ep).index(tB[:-1])
                    col = off + i * nb + j
                    # |a (e' last)_b; c> = sum_x conj(F^{a e' last}_c[x, b]) |(a e')_x last; c>
                    for x in self.fd.products(a, ep):
                        if not self.fd.N(x, last, c):
                            continue
                        coeff = np.conj(self.fd.F_entry(a, ep, last, c, x, b))
                        if coeff == 0:
                            continue
                        sub = self.pair_to_left(A, Bp, x)
                        lay, _ = self._pair_layout(A, Bp, x)
                        for (a2, b2, off2, na2, nb2) in lay:
                            if (a2, b2) == (a, ep):
                                scol = off2 + i * nb2 + jp
                                break
                        lefts = self.trees(A + Bp, x)
                        for r, lt in enumerate(lefts):
                            if sub[r, scol] != 0:
                                U[index[lt + (c,)], col] += coeff * sub[r, scol]
        return U

    # -- tensor product ----------------------------------------------------
    def tensor(self, f: Morphism, g: Morphism) -> Morphism:
        src, tgt = f.source @ g.source, f.target @ g.target
        blocks = {}
        for c in self.fd.labels:
            rows, cols = self.dim(tgt, c), self.dim(src, c)
            if not rows or not cols:
                continue
            M = np.zeros((rows, cols), dtype=complex)
            r0 = 0
            for tA, wA2 in enumerate(f.target.words):
                for tB, wB2 in enumerate(g.target.words):
                    nrow = len(self.trees(wA2 + wB2, c))
                    c0 = 0
                    for sA, wA in enumerate(f.source.words):
                        for sB, wB in enumerate(g.source.words):
                            ncol = len(self.trees(wA + wB, c))
                            if nrow and ncol:
                                M[r0:r0 + nrow, c0:c0 + ncol] = self._word_tensor(f, g, (sA, tA), (sB, tB), c)
                            c0 += ncol
                    r0 += nrow
            blocks[c] = M
        return Morphism(self, src, tgt, blocks)

    def _sub(self, m: Morphism, si: int, ti: int, charge: str) -> np.ndarray:
        """Block of ``m`` between source word ``si`` and target word ``ti``."""
        w_src, w_tgt = m.source.words[si], m.target.words[ti]
        nr, nc = len(self.trees(w_tgt, charge)), len(self.trees(w_src, charge))
        blk = m.blocks.get(charge)
        if blk is None:
            return np.zeros((nr, nc), dtype=complex)
        r0 = self.offsets(m.target, charge)[ti]
        c0 = self.offsets(m.source, charge)[si]
        return blk[r0:r0 + nr, c0:c0 + nc]

    def _word_tensor(self, f, g, idx_f, idx_g, c) -> np.ndarray:
        wA, wA2 = f.source.words[idx_f[0]], f.target.words[idx_f[1]]
        wB, wB2 = g.source.words[idx_g[0]], g.target.words[idx_g[1]]
        lay_src, n_src = self._pair_layout(wA, wB, c)
        lay_tgt, n_tgt = self._pair_layout(wA2, wB2, c)
        P = np.zeros((n_tgt, n_src), dtype=complex)
        tgt_pos = {(a, b): (off, na, nb) for a, b, off, na, nb in lay_tgt}
        for a, b, off, na, nb in lay_src:
            if (a, b) not in tgt_pos:
                continue
            off2, na2, nb2 = tgt_pos[(a, b)]
            P[off2:off2 + na2 * nb2, off:off + na * nb] = np.kron(self._sub(f, *idx_f, a), self._sub(g, *idx_g, b))
        return self.pair_to_left(wA2, wB2, c) @ P @ self.pair_to_left(wA, wB, c).conj().T

    # -- elementary morphisms ---------------------------------------------
    def identity(self, obj: Obj) -> Morphism:
        return Morphism(self, obj, obj, {c: np.eye(self.dim(obj, c)) for c in self.fd.labels if self.dim(obj, c)})

    def zero(self, source: Obj, target: Obj) -> Morphism:
        return Morphism(self, source, target)

    def vertex(self, a: str, b: str, c: str) -> Morphism:
        """Isometric splitting vertex ``c -> a (x) b``."""
        if not self.fd.N(a, b, c):
            raise ValueError(f"{c} is not in {a} (x) {b}")
        return Morphism(self, Obj.of(c), Obj.of(a, b), {c: np.ones((1, 1))})

    def coev(self, a: str) -> Morphism:
        """``1 -> a (x) dual(a)`` with norm squared ``d_a``."""
        ab = self.fd.dual[a]
        return Morphism(self, Obj.unit(), Obj.of(a, ab), {self.one: [[np.sqrt(self.fd.dims[a])]]})

    def ev(self, a: str) -> Morphism:
        """``dual(a) (x) a -> 1`` with the phase fixed by the zigzag identity."""
        ab = self.fd.dual[a]
        return Morphism(self, Obj.of(ab, a), Obj.unit(), {self.one: [[self.ev_phase(a) * np.sqrt(self.fd.dims[a])]]})

    def ev_phase(self, a: str) -> complex:
        if a not in self._ev_phase:
            ab = self.fd.dual[a]
            raw = Morphism(self, Obj.of(ab, a), Obj.unit(), {self.one: [[np.sqrt(self.fd.dims[a])]]})
            zig = self.tensor(self.identity(Obj.of(a)), raw) @ self.tensor(self.coev(a), self.identity(Obj.of(a)))
            z = complex(zig.blocks[a][0, 0])
            if abs(abs(z) - 1) > 1e-9:
                raise ValueError(f"zigzag for {a} has modulus {abs(z)}; dims and F are inconsistent")
            self._ev_phase[a] = 1 / z
        return self._ev_phase[a]

    def embed(self, source: Obj, target: Obj, parts) -> Morphism:
        """Morphism assembled from ``{(source word index, target word index): word morphism}``."""
        blocks = {c: np.zeros((self.dim(target, c), self.dim(source, c)), dtype=complex)
                  for c in self.fd.labels if self.dim(target, c) and self.dim(source, c)}
        for (si, ti), m in parts.items():
            for c, blk in m.blocks.items():
                if c not in blocks:
                    continue
                r0 = self.offsets(target, c)[ti]
                c0 = self.offsets(source, c)[si]
                blocks[c][r0:r0 + blk.shape[0], c0:c0 + blk.shape[1]] += blk
        return Morphism(self, source, target, blocks)

    def tensor_all(self, *ms: Morphism) -> Morphism:
        out = ms[0]
        for m in ms[1:]:
            out = self.tensor(out, m)
        return out
