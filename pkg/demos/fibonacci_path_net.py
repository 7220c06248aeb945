"""Walk through the path net of the Fibonacci graph.

Run with ``python3 demos/fibonacci_path_net.py``. Prints the Perron data,
checks that the Markov trace survives inclusion, compares commutant
dimensions with and without the constraints that straddle the ends of the
box, and finishes with the Jones projections.
"""
import numpy as np

from stabchain import (Interval, LocalAlgebra, fibonacci_graph, haag_check, include, jones_projection, markov_trace,
                       trace_data, uniform_reach)

g = fibonacci_graph()
td = trace_data(g)
print(f"multiplicities {g.N.tolist()}, uniform reach {uniform_reach(g)}")
print(f"Perron eigenvalue {td.lam:.6f}  (golden ratio {(1 + 5 ** 0.5) / 2:.6f})")
print(f"left vector {np.round(td.u, 4)}, right vector {np.round(td.v, 4)}")

# the trace of a local operator does not care which box it is viewed in
rng = np.random.default_rng(7)
small = LocalAlgebra(g, Interval(1, 2))
x = small.random(rng)
for box in (Interval(1, 2), Interval(0, 3), Interval(-2, 5)):
    print(f"tau on {box}: {markov_trace(include(x, box), td):.12f}")

# commutant of the complement inside [0,3]; margin 0 ignores constraints from outside the box
for margin in (0, None):
    rep = haag_check(g, Interval(0, 3), Interval(1, 2), margin=margin)
    p = rep.params
    print(f"margin={margin}: commutant {p['commutant_dim']} vs local {p['local_dim']}, "
          f"in-box {p['commutant_dim_in_box']}, {rep.summary()}")

# Jones projections on adjacent windows satisfy the Temperley-Lieb relations
amb = LocalAlgebra(g, Interval(0, 2))
e0 = include(jones_projection(g, td, 0), amb)
e1 = include(jones_projection(g, td, 1), amb)
print(f"|e0 e0 - e0|          = {(e0 @ e0 - e0).max_abs():.1e}")
print(f"|e0 e1 e0 - e0/lam^2| = {(e0 @ e1 @ e0 - e0 / td.lam ** 2).max_abs():.1e}")
print(f"tau(e0) = {markov_trace(e0, td).real:.6f}, 1/lam^2 = {td.lam ** -2:.6f}")
