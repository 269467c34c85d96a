"""Normal tensors: second derivatives of a metric in normal coordinates.
====================================================================

The value of g_{ab,cd} at the origin of a normal chart is constrained: its
symmetrization over the last three indices vanishes.  The space of tensors
with that property is the kernel of an explicit linear map on
S^2 (x) S^2, and its dimension is the familiar count of algebraic
curvature tensors, n^2 (n^2 - 1) / 12.
"""

from fractions import Fraction

from divlab import MetricJet2, basis_n2, expected_n2_dim, normal_jet_reduction
from divlab.linalg import kernel_basis
from divlab.normal import s3_matrix

F = Fraction

# --- the kernel dimensions -------------------------------------------------

print("dim of the normal-tensor space, computed as a kernel rank:")
for n in range(1, 6):
    dim = kernel_basis(s3_matrix(n)).dim
    print(f"  n={n}:  {dim}   (formula n^2(n^2-1)/12 gives {expected_n2_dim(n)})")

# --- the graded basis at n = 4 ----------------------------------------------

space = basis_n2(4)
print("\nmultidegree blocks of the basis at n=4 (letters used by each block):")
for mdeg, labels in sorted(space.blocks.items()):
    print(f"  letters {mdeg}: {len(labels)} basis vector(s)")

# the famous dim-2 block: four distinct letters, two independent components
print("\nblock with all four letters distinct:",
      [space.vectors[i].free_word for i in space.labels_in_block((1, 1, 1, 1))])

# --- every basis vector swaps its index pairs -------------------------------

vec = space.vectors[0]
print("\npair-interchange on a sample basis vector:",
      all(vec.component(a, b, c, d) == vec.component(c, d, a, b)
          for (a, b, c, d) in space.words))

# --- reducing a metric 2-jet to its normal tensor ---------------------------

n = 2
eye = [[F(1), F(0)], [F(0), F(1)]]
jet = MetricJet2(n, eye,
                 d1={(0, 0, 1): F(1, 2), (0, 1, 0): F(-1, 3)},
                 d2={(0, 0, 1, 1): F(1), (1, 1, 0, 0): F(-2)})
reduced, normal = normal_jet_reduction(jet)
print("\nafter the normal-coordinate change:")
print("  first derivatives:", dict(reduced.d1) or "all zero")
print("  normal tensor components:", dict(normal.components))
print("  (a single line at n=2: the Gauss curvature of the 2-jet)")
