"""divlab: exact computations around second-order divergence-free tensors.

The package constructs the space of second-order normal tensors, the
divergence subspaces its degree-m pieces live in, their orthogonal-group
invariants, and the Lovelock tensors — all over exact rational arithmetic,
with the graph-combinatorial vanishing certificates as replayable traces.
"""

from .divspaces import (DivProblem, DivSpace, DivVariant,
                        check_derived_symmetries, div_equations, div_space,
                        explicit_component)
from .graphs import (ComponentKey, Multigraph, classify_hairy,
                     connected_to_cycle, graph_of_component, key_edge,
                     parse_component_key, replay_trace, vanish_by_cycle,
                     zero_functional_oracle)
from .invariants import (OrthoGroupData, invariant_div_dim,
                         invariant_div_space, invariant_subspace,
                         matching_span_dim, ortho_data)
from .jets import JetPoly, jet_compose, jet_inverse_matrix, jet_mul, jet_partial
from .linalg import SparseMatrix, SubspaceBasis, kernel_basis, rank, rank_mod_p
from .lovelock import (CurvatureData, MetricJet, curvature, divergence,
                       jet_coordinate_derivative, lovelock_delta,
                       lovelock_form, random_metric_jet, weight_check)
from .normal import (MetricJet2, NormalTensorSpace, basis_n2,
                     expected_n2_dim, normal_jet_reduction, pi_star, s3_matrix)
from .tensors import (Signature, SlotSpace, SparseTensor, contract,
                      enumerate_basis, gl_derivation, symmetrize,
                      tensor_product)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
