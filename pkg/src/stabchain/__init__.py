"""Finite-truncation toolkit for stabilized anyon chains.

Path-model local algebras over a graph, ancilla stabilization with exact
interleaving bijections, commutant and Haag-duality checks, Temperley-Lieb
conditional expectations, and a skeletal diagram calculus for Lagrangian
Q-systems and half-braidings.
"""
from .algebra import (BlockOperator, LocalAlgebra, RegisterShape, TraceData, TraceDegenerate, include,
                      markov_trace, trace_data)
from .commutant import commutant, containment_residual, haag_check, validate_net
from .fusion import FusionData, FusionDataError, load_fusion_data, quantum_dims, shipped_fusion, verify_pentagon
from .graphs import Graph, GraphError, Interval, Path, fibonacci_graph, load_graph, single_vertex_graph, uniform_reach
from .qsystem import AlgebraObject, build_lagrangian_qsystem, half_braiding, verify_half_braiding, verify_qsystem
from .reports import CheckReport, Residual
from .stabilization import (BasisBijection, RegisterMismatch, StabilizedState, alpha, build_lambda, phi, psi,
                            spread_certificate, stabilized_state_eval)
from .subalgebra import (SubalgebraSpec, conditional_expectation, jones_projection, pp_basis,
                         relative_haag_check)

__version__ = '0.1.0'
