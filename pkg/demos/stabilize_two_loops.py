"""Ancilla stabilization on the two-loop graph.

Run with ``python3 demos/stabilize_two_loops.py``. Builds the interleaving
permutations, conjugates a few interior operators and certifies how far
their images spread.
"""
import numpy as np

from stabchain import Interval, RegisterMismatch, alpha, build_lambda, fibonacci_graph, single_vertex_graph
from stabchain.checks import gaussian_integer_operator
from stabchain.stabilization import lambda_family, register_algebra, spread_certificate

# bookkeeping on the Fibonacci graph: the example block from the tests
fib = fibonacci_graph()
lam = build_lambda(fib, 0, 1, n_blocks=2, half_block=1, D=2)
print(f"Fibonacci block (0,1): {lam.size} basis states, codomain registers {lam.codomain_shape.dims}")
print(f"permutation: {lam.is_permutation()}, composition errors: {lam.composition_errors()}")

g = single_vertex_graph(2)
family = lambda_family(g, n_blocks=2, half_block=1, D=2)
shape = family[(0, 0)].codomain_shape
print(f"two loops, n=2, k=1, D=2: registers {shape.dims}")

rng = np.random.default_rng(11)
for window in (Interval(1, 1), Interval(2, 2), Interval(1, 2)):
    alg = register_algebra(window, [shape.dim_of(s) for s in window.sites()])
    a, b = gaussian_integer_operator(alg, rng), gaussian_integer_operator(alg, rng)
    hom = (alpha(a @ b, family, g, 1) - alpha(a, family, g, 1) @ alpha(b, family, g, 1)).max_abs()
    cert = spread_certificate(alpha(a, family, g, 1), window, half_block=1)
    print(f"window {window}: |alpha(ab) - alpha(a)alpha(b)| = {hom}, spread {cert.params['spread']}, "
          f"{cert.summary()}")

# on the Fibonacci graph every register is tied to the path, so alpha has nothing free to act on
try:
    alpha(register_algebra(Interval(2, 2), [2]).identity(), lambda_family(fib, 3, 1, 1), fib, 1)
except RegisterMismatch as err:
    print(f"Fibonacci: {err}")
