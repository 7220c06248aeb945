"""Lagrangian algebra of the Fibonacci category and its half-braiding.

Run with ``python3 demos/lagrangian_qsystem.py``.
"""
import numpy as np

from stabchain import build_lagrangian_qsystem, half_braiding, shipped_fusion, verify_half_braiding, verify_pentagon
from stabchain import verify_qsystem

fd = shipped_fusion('fibonacci')
print(f"labels {fd.labels}, dims {fd.dims}, global dimension {fd.global_dim:.6f}")
print(verify_pentagon(fd).summary())

q = build_lagrangian_qsystem(fd, fd.labels)
print(f"summands {q.summands}, total dimension {q.total_dim(fd):.6f}")
print(f"unit coefficients {np.round(q.unit.real, 4)}")
print(verify_qsystem(q, fd).summary())
print(verify_half_braiding(fd, q).summary())

sigma = half_braiding(fd, q, 't')
for charge, block in sigma.blocks.items():
    print(f"sigma_t on charge {charge}:\n{np.round(block.real, 4)}")

# only the trivial summand: still an algebra, but no longer Lagrangian
partial = build_lagrangian_qsystem(fd, ['1'])
print(f"labels ['1']: {verify_qsystem(partial, fd).summary()}; {verify_half_braiding(fd, partial).summary()}")

# swap the columns of F^{ttt}_t: still unitary, but the pentagon notices
_, _, block = fd.F_block('t', 't', 't', 't')
print(verify_pentagon(fd.with_F(('t', 't', 't', 't'), block[:, ::-1])).summary())
