"""Brute-force reference computations.

Each oracle reaches its answer by a different route from the library code it
checks: explicit enumeration, dense Kronecker products, power iteration or
direct index formulas.
"""
from __future__ import annotations

import itertools

import numpy as np


# ---------------------------------------------------------------------------
# graphs


def dfs_paths(N, length, i, j):
    """All paths ``i -> j`` as tuples of ``(target, edge index)``, in lexicographic order."""
    N = np.asarray(N)
    out = []

    def walk(v, acc):
        if len(acc) == length:
            if v == j:
                out.append(tuple(acc))
            return
        for w in range(N.shape[0]):
            for e in range(N[v, w]):
                walk(w, acc + [(w, e)])

    walk(i, [])
    return out


def reach_by_powers(N, max_m=20):
    """Smallest ``m`` with ``N^l > 0`` for ``l = m .. max_m + 5``; None if absent."""
    N = np.asarray(N, dtype=object)
    powers = [np.eye(N.shape[0], dtype=object)]
    for _ in range(max_m + 6):
        powers.append(powers[-1].dot(N))
    for m in range(1, max_m + 1):
        if all((powers[l] > 0).all() for l in range(m, max_m + 6)):
            return m
    return None


def pf_power_iteration(N, iters=2000):
    """Perron eigenvalue with right and left eigenvectors, normalized so ``sum v = 1`` and ``u.v = 1``."""
    A = np.asarray(N, dtype=float)
    # shift by the identity so periodic graphs still converge
    B = A + np.eye(len(A))
    v = np.ones(len(A))
    u = np.ones(len(A))
    for _ in range(iters):
        v = B @ v
        v /= v.sum()
        u = u @ B
        u /= u.sum()
    lam = float((A @ v)[0] / v[0])
    return lam, u / (u @ v), v


# ---------------------------------------------------------------------------
# path algebras as dense matrices over the full path space


def path_space(N, length):
    """Every path of the given length (any endpoints) with its endpoints, lexicographic per block."""
    t = np.asarray(N).shape[0]
    return {(i, j): dfs_paths(N, length, i, j) for i in range(t) for j in range(t)}


def dense_include(N, f_blocks, small, big):
    """Blocks of ``1 (x) f (x) 1`` at the big interval, built from explicit path splitting.

    ``small`` and ``big`` are ``(lo, hi)`` pairs. Returns a dict block -> matrix
    in the lexicographic order of :func:`dfs_paths`.
    """
    left = small[0] - big[0]
    mid = small[1] - small[0] + 1
    L = big[1] - big[0] + 1
    t = np.asarray(N).shape[0]
    out = {}
    for a in range(t):
        for b in range(t):
            paths = dfs_paths(N, L, a, b)
            if not paths:
                continue
            m = np.zeros((len(paths), len(paths)), dtype=complex)
            for r, P in enumerate(paths):
                for c, Q in enumerate(paths):
                    if P[:left] != Q[:left] or P[left + mid:] != Q[left + mid:]:
                        continue
                    start = a if left == 0 else P[left - 1][0]
                    end_p, end_q = P[left + mid - 1][0], Q[left + mid - 1][0]
                    if end_p != end_q:
                        continue
                    blk = f_blocks.get((start, end_p))
                    if blk is None:
                        continue
                    sub = dfs_paths(N, mid, start, end_p)
                    m[r, c] = blk[sub.index(P[left:left + mid]), sub.index(Q[left:left + mid])]
            out[(a, b)] = m
    return out


def brute_commutant_dim(generators, basis):
    """Dimension of ``{x in span(basis) : [x, g] = 0 for all g}`` by a rank computation.

    ``generators`` and ``basis`` are lists of dicts block -> matrix on the same blocks.
    """
    blocks = sorted(basis[0].keys())
    if not generators:
        return len(basis)
    cols = []
    for x in basis:
        parts = []
        for g in generators:
            for b in blocks:
                parts.append((x[b] @ g[b] - g[b] @ x[b]).ravel())
        cols.append(np.concatenate(parts))
    mat = np.array(cols).T
    return len(basis) - int(np.linalg.matrix_rank(mat, tol=1e-9))


# ---------------------------------------------------------------------------
# merges


def phi_table(l, dims):
    """Dictionary ``(p, n1, *rest) -> (l*n1 + p, *rest)``."""
    out = {}
    for p in range(l):
        for regs in itertools.product(*[range(d) for d in dims]):
            out[(p,) + regs] = (l * regs[0] + p,) + regs[1:]
    return out


def psi_table(t, dims):
    out = {}
    for j in range(t):
        for regs in itertools.product(*[range(d) for d in dims]):
            out[(j,) + regs] = (t * regs[0] + j,) + regs[1:]
    return out


def lambda_codes(N, i, j, n_blocks, k, D):
    """Image register tuple of every ``(path, registers)`` label, written out site by site."""
    N = np.asarray(N)
    t = N.shape[0]
    seg = 2 * k
    length = seg * n_blocks
    counts = np.linalg.matrix_power(N.astype(object), seg)
    out = {}
    for pi, P in enumerate(dfs_paths(N, length, i, j)):
        verts = [i] + [P[s * seg - 1][0] for s in range(1, n_blocks + 1)]
        for regs in itertools.product(range(D), repeat=length):
            code = list(regs)
            for s in range(n_blocks):
                a, b = verts[s], verts[s + 1]
                piece = P[s * seg:(s + 1) * seg]
                idx = dfs_paths(N, seg, a, b).index(piece)
                code[s * seg] = int(counts[a, b]) * regs[s * seg] + idx
            for s in range(1, n_blocks):
                code[s * seg - k] = t * regs[s * seg - k] + verts[s]
            out[(pi,) + regs] = tuple(code)
    return out


# ---------------------------------------------------------------------------
# fusion categories


def dense_F(fd):
    """``F[a,b,c,d,e,f]`` as a dense array over label indices (zero where inadmissible)."""
    labs = list(fd.labels)
    n = len(labs)
    F = np.zeros((n,) * 6, dtype=complex)
    for (a, b, c, d), (es, fs, mat) in fd.F.items():
        for r, e in enumerate(es):
            for s, f in enumerate(fs):
                F[labs.index(a), labs.index(b), labs.index(c), labs.index(d), labs.index(e), labs.index(f)] = mat[r, s]
    return F


def dense_N(fd):
    labs = list(fd.labels)
    n = len(labs)
    N = np.zeros((n, n, n))
    for a, b, c in fd.fusion:
        N[labs.index(a), labs.index(b), labs.index(c)] = 1
    return N


def pentagon_defect_einsum(F, N):
    """Pentagon defect through a single dense contraction over all 9 free labels."""
    lhs = np.einsum('fcdegl,ablefk->abcdefgkl', F, F)
    rhs = np.einsum('abcgfh,ahdegk,bcdkhl->abcdefgkl', F, F, F)
    # mask: the two outer trees exist
    mask = np.einsum('abf,fcg,gde,cdl,blk,ake->abcdefgkl', N, N, N, N, N, N) > 0
    return float(np.abs((lhs - rhs)[mask]).max()) if mask.any() else 0.0


def fibonacci_F(a):
    """Candidate ``F^{ttt}_t`` with ``[1,1]`` entry ``a``, unitary and symmetric."""
    b = np.sqrt(max(0.0, 1 - a * a))
    return np.array([[a, b], [b, -a]])


def skeletal_associativity_defect(summands, m, fd):
    """``m(m (x) 1) - m(1 (x) m)`` evaluated by hand with one F-move per triple."""
    worst = 0.0
    n = len(summands)
    for i, j, l, k in itertools.product(range(n), repeat=4):
        a, b, c, d = summands[i], summands[j], summands[l], summands[k]
        for x in fd.labels:
            if not (fd.N(a, b, x) and fd.N(x, c, d)):
                continue
            lhs = sum(m[i, j, p] * m[p, l, k] for p in range(n) if summands[p] == x)
            rhs = 0.0
            for y in fd.labels:
                if not (fd.N(b, c, y) and fd.N(a, y, d)):
                    continue
                rhs += fd.F_entry(a, b, c, d, x, y) * sum(m[j, l, q] * m[i, q, k] for q in range(n) if summands[q] == y)
            worst = max(worst, abs(lhs - rhs))
    return worst


def group_half_braiding(order, w):
    """Expected ``sigma_{L,w}`` for Vec(Z/N) with trivial F: summand ``Y`` goes to ``Z = Y - w``."""
    P = np.zeros((order, order))
    for y in range(order):
        P[(y - w) % order, y] = 1.0
    return P
