"""One report-producing function per verification, shared by the CLI and the tests."""
from __future__ import annotations

import itertools
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .algebra import LocalAlgebra, RegisterShape, include, markov_trace, trace_data
from .commutant import haag_check, validate_net
from .fusion import SHIPPED_FUSION, FusionData, read_fusion_data, shipped_fusion, verify_pentagon
from .graphs import Graph, Interval, load_graph, read_graph, single_vertex_graph
from .qsystem import build_lagrangian_qsystem, verify_half_braiding, verify_qsystem
from .reports import CheckReport, timer
from .stabilization import (BasisBijection, alpha, build_lambda, lambda_family, phi, psi, register_algebra,
                            spread_certificate)
from .subalgebra import conditional_expectation, pp_basis, pp_reconstruction_residual, tl_generators, tl_spec

__all__ = ['SHIPPED_GRAPHS', 'resolve_graph', 'resolve_fusion', 'check_graph_validate', 'check_haag',
           'check_phi_psi', 'check_factorize', 'check_alpha', 'check_trace', 'check_tl', 'check_expectation',
           'check_qsystem', 'check_halfbraid', 'check_pentagon', 'gaussian_integer_operator']

SHIPPED_GRAPHS = ('fibonacci_graph', 'two_loop_graph', 'tadpole_graph', 'skew_graph')


def resolve_graph(spec) -> Graph:
    """A :class:`Graph` from a file path, a shipped name, ``loops:D`` or a graph."""
    if isinstance(spec, Graph):
        return spec
    spec = str(spec)
    if spec.startswith('loops:'):
        return single_vertex_graph(int(spec.split(':', 1)[1]))
    name = spec[:-5] if spec.endswith('.json') else spec
    for cand in (name, name + '_graph'):
        if cand in SHIPPED_GRAPHS and not Path(spec).exists():
            return load_graph(resources.files('stabchain.data').joinpath(f'{cand}.json').read_text(encoding='utf-8'))
    return read_graph(spec)


def resolve_fusion(spec, check_pentagon: bool = True) -> FusionData:
    if isinstance(spec, FusionData):
        return spec
    spec = str(spec)
    if spec in SHIPPED_FUSION and not Path(spec).exists():
        return shipped_fusion(spec, check_pentagon=check_pentagon)
    return read_fusion_data(spec, check_pentagon=check_pentagon)


def _sites(inner) -> Interval | list[int]:
    if isinstance(inner, Interval):
        return inner
    inner = sorted(int(x) for x in inner)
    if inner and inner == list(range(inner[0], inner[-1] + 1)):
        return Interval(inner[0], inner[-1])
    return inner


# ---------------------------------------------------------------------------
# path algebra and stabilization


def check_graph_validate(graph, max_interval: int = 4, seed: int = 0, tol: float = 1e-12) -> CheckReport:
    return validate_net(resolve_graph(graph), max_interval, seed=seed, tol=tol)


def check_haag(graph, total: Sequence[int], inner, ancilla_dim: int | None = None, tol: float = 1e-10,
               max_spread: int = 0, margin: int | None = None) -> CheckReport:
    g = resolve_graph(graph)
    return haag_check(g, Interval(*total), _sites(inner), ancilla_dim=ancilla_dim, tol=tol,
                      max_spread=max_spread, margin=margin)


def check_phi_psi(max_l: int = 6, max_t: int = 6, max_D: int = 6, registers: int = 2) -> CheckReport:
    """Exhaustive composition check of both merges; zero tolerance."""
    bad_comp = non_perm = cases = 0
    with timer() as clock:
        for D in range(1, max_D + 1):
            regs = RegisterShape.uniform(range(registers), D)
            maps: list[BasisBijection] = [phi(l, regs) for l in range(1, max_l + 1)]
            maps += [psi(t, regs) for t in range(1, max_t + 1)]
            maps += [psi(t, regs, branch_dims=[D + j % 2 for j in range(t)]) for t in range(1, max_t + 1)]
            for m in maps:
                cases += 1
                bad_comp += sum(m.composition_errors())
                non_perm += not m.is_permutation()
    rep = CheckReport.from_residuals('phi-psi', {'max_l': max_l, 'max_t': max_t, 'max_D': max_D,
                                                 'registers': registers, 'cases': cases},
                                     {'composition_errors': bad_comp, 'non_permutations': non_perm}, 0.0)
    rep.elapsed_ms = clock[0]
    return rep


def check_factorize(graph, n_blocks: Iterable[int] = (2, 3), half_block: int = 1,
                    ancilla_dims: Iterable[int] = (1, 2, 3)) -> CheckReport:
    """Dimension bookkeeping and permutation property of every boundary block's interleaving map."""
    g = resolve_graph(graph)
    sizes, dim_gap, comp, non_perm = {}, 0, 0, 0
    with timer() as clock:
        for n, D in itertools.product(n_blocks, ancilla_dims):
            length = 2 * half_block * n
            alg = LocalAlgebra.stabilized(g, Interval(0, length - 1), D)
            for (i, j) in alg.block_dims:
                lam = build_lambda(g, i, j, n, half_block, D)
                dom = alg.path_dim(i, j) * D ** length
                sizes.setdefault((n, D), {})[(i, j)] = (dom, len(lam.codomain))
                dim_gap += abs(dom - len(lam.codomain)) + abs(dom - lam.size)
                comp += sum(lam.composition_errors())
                non_perm += not lam.is_permutation()
    params = {'half_block': half_block, 'n_blocks': list(n_blocks), 'ancilla_dims': list(ancilla_dims),
              'dimensions': {f"n={n},D={D}": {f"{i},{j}": v for (i, j), v in blocks.items()}
                             for (n, D), blocks in sizes.items()}}
    rep = CheckReport.from_residuals('factorize', params, {'dimension_mismatch': dim_gap,
                                                           'composition_errors': comp,
                                                           'non_permutations': non_perm}, 0.0)
    rep.elapsed_ms = clock[0]
    return rep


def gaussian_integer_operator(alg: LocalAlgebra, rng: np.random.Generator, scale: int = 3):
    """Random operator with small Gaussian-integer entries, so products are exact in floating point."""
    from .algebra import BlockOperator
    blocks = {b: (rng.integers(-scale, scale + 1, (d, d)) + 1j * rng.integers(-scale, scale + 1, (d, d)))
              for b, d in alg.block_dims.items()}
    return BlockOperator(alg, blocks)


def check_alpha(graph='loops:2', n_blocks: int = 2, half_block: int = 1, ancilla_dim: int = 2,
                samples: int = 100, seed: int = 0, tol: float = 1e-10, certify_every: int = 1) -> CheckReport:
    """Homomorphism, adjoint and spread of the conjugation map on interior registers.

    Each sample draws a site window of one or two registers in the middle
    interval and two Gaussian-integer operators on it.
    """
    g = resolve_graph(graph)
    k, n, D = half_block, n_blocks, ancilla_dim
    rng = np.random.default_rng(seed)
    with timer() as clock:
        family = lambda_family(g, n, k, D)
        shape = next(iter(family.values())).codomain_shape
        middle = Interval(k, 2 * k * n - k - 1)
        windows = [Interval(s, s) for s in middle.sites()] + \
                  [Interval(s, s + 1) for s in middle.sites() if s + 1 <= middle.hi]
        hom = adj = comm = 0.0
        worst_spread = 0
        spreads = {}
        for idx in range(samples):
            win = windows[int(rng.integers(len(windows)))]
            alg = register_algebra(win, [shape.dim_of(s) for s in win.sites()])
            a = gaussian_integer_operator(alg, rng)
            b = gaussian_integer_operator(alg, rng)
            aa, ab = alpha(a, family, g, k), alpha(b, family, g, k)
            hom = max(hom, (alpha(a @ b, family, g, k) - aa @ ab).max_abs())
            adj = max(adj, (alpha(a.H, family, g, k) - aa.H).max_abs())
            if idx % certify_every == 0:
                cert = spread_certificate(aa, win, k, tol=tol)
                r = cert.params['spread']
                spreads[str(win)] = r
                worst_spread = max(worst_spread, k + 1 if r is None else r)
                res_by_r = cert.params.get('residual_by_radius', {})
                if r is not None:
                    comm = max(comm, float(res_by_r.get(r, res_by_r.get(str(r), 0.0))))
    params = {'graph': g.to_dict(), 'n_blocks': n, 'half_block': k, 'ancilla_dim': D, 'samples': samples,
              'seed': seed, 'spread_by_window': spreads, 'max_spread': worst_spread}
    rep = CheckReport.from_residuals('alpha-check', params,
                                     {'homomorphism': hom, 'adjoint': adj, 'spread_commutator': comm},
                                     tol, structural={'spread_within_half_block': worst_spread <= k})
    if hom or adj:
        rep.passed = False
        rep.warnings.append('homomorphism or adjoint residual is not exactly zero')
    rep.elapsed_ms = clock[0]
    return rep


def check_trace(graphs: Sequence = ('fibonacci_graph', 'tadpole_graph', 'skew_graph', 'loops:2'),
                max_interval: int = 4, samples: int = 100, seed: int = 0, tol: float = 1e-12) -> CheckReport:
    """``tau_J o include = tau_I`` on random elements and nested interval pairs."""
    rng = np.random.default_rng(seed)
    worst, by_graph = 0.0, {}
    with timer() as clock:
        for spec in graphs:
            g = resolve_graph(spec)
            td = trace_data(g)
            u_res, v_res = td.residuals(g)
            pairs = [(Interval(a, b), Interval(c, d))
                     for c in range(max_interval) for d in range(c, max_interval)
                     for a in range(c, d + 1) for b in range(a, d + 1) if (a, b) != (c, d)]
            local = max(u_res, v_res)
            for _ in range(samples):
                I, J = pairs[int(rng.integers(len(pairs)))]
                f = LocalAlgebra(g, I).random(rng)
                local = max(local, abs(markov_trace(include(f, J), td) - markov_trace(f, td)))
            by_graph[str(spec)] = local
            worst = max(worst, local)
    rep = CheckReport.from_residuals('trace-check', {'graphs': [str(s) for s in graphs], 'samples': samples,
                                                     'seed': seed, 'residual_by_graph': by_graph},
                                     {'trace_compatibility': worst}, tol)
    rep.elapsed_ms = clock[0]
    return rep


# ---------------------------------------------------------------------------
# Temperley-Lieb and conditional expectations


def check_tl(graph='fibonacci_graph', length: int = 5, tol: float = 1e-10) -> CheckReport:
    """Projection, braid-type and distant-commutation relations of the Jones projections."""
    g = resolve_graph(graph)
    td = trace_data(g)
    with timer() as clock:
        es = tl_generators(g, td, Interval(0, length - 1))
        delta2 = td.lam ** -2
        res = {'idempotent': 0.0, 'selfadjoint': 0.0, 'neighbour': 0.0, 'distant': 0.0}
        for i, e in enumerate(es):
            res['idempotent'] = max(res['idempotent'], (e @ e - e).max_abs())
            res['selfadjoint'] = max(res['selfadjoint'], (e.H - e).max_abs())
            for j, f in enumerate(es):
                if abs(i - j) == 1:
                    res['neighbour'] = max(res['neighbour'], (e @ f @ e - delta2 * e).max_abs())
                elif abs(i - j) > 1:
                    res['distant'] = max(res['distant'], e.commutator(f).max_abs())
    rep = CheckReport.from_residuals('tl-check', {'graph': g.to_dict(), 'length': length,
                                                  'index_inverse': delta2, 'generators': len(es)}, res, tol)
    rep.elapsed_ms = clock[0]
    return rep


def check_expectation(graph='fibonacci_graph', length: int = 4, seed: int = 0, tol: float = 1e-10,
                      pp_tol: float = 1e-8, samples: int = 8) -> CheckReport:
    """Trace-preserving conditional expectation onto the TL algebra and its Pimsner-Popa basis."""
    g = resolve_graph(graph)
    td = trace_data(g)
    rng = np.random.default_rng(seed)
    with timer() as clock:
        spec = tl_spec(g, td, Interval(0, length - 1))
        E = conditional_expectation(spec, td)
        res = E.residuals(rng, samples=samples)
        basis = pp_basis(spec, E, tol=pp_tol)
        recon = max(pp_reconstruction_residual(basis, E, spec.ambient.random(rng)) for _ in range(samples))
    rep = CheckReport.from_residuals('expectation', {'graph': g.to_dict(), 'length': length, 'seed': seed,
                                                     'rank': E.rank, 'pp_basis_size': len(basis),
                                                     'pp_tolerance': pp_tol},
                                     res, tol, structural={'pp_reconstruction_ok': recon <= pp_tol})
    rep.residuals.append(type(rep.residuals[0])('pp_reconstruction', recon))
    rep.elapsed_ms = clock[0]
    return rep


# ---------------------------------------------------------------------------
# fusion data


def check_qsystem(fusion, labels: Sequence[str] | None = None, tol: float = 1e-8) -> CheckReport:
    fd = resolve_fusion(fusion)
    q = build_lagrangian_qsystem(fd, labels or fd.labels)
    rep = verify_qsystem(q, fd, tol)
    rep.params['unit'] = q.unit
    rep.params['total_dim'] = q.total_dim(fd)
    return rep


def check_halfbraid(fusion, labels: Sequence[str] | None = None, tol: float = 1e-8) -> CheckReport:
    fd = resolve_fusion(fusion)
    q = build_lagrangian_qsystem(fd, labels or fd.labels)
    return verify_half_braiding(fd, q, tol)


def check_pentagon(fusion, tol: float = 1e-10) -> CheckReport:
    return verify_pentagon(resolve_fusion(fusion, check_pentagon=False), tol)
