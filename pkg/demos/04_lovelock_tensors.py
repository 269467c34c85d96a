"""Lovelock tensors: exact divergence-free 2-tensors from curvature.
==================================================================

Metrics are jets with rational coefficients, so curvature, the Lovelock
tensors, and their divergences are computed exactly — the divergence of
L_k prints as literal zeros, not small floats.

Two constructions are compared: the generalized-Kronecker-delta
contraction (unit leading constant, L_0 = g*) and the wedge of curvature
and metric factors pushed through the volume-form duality.  They differ by
the derived constant sign(det g) (n-2k-1)!/4^k; the wedge normalization is
the one with the textbook Einstein factor at k = 1.
"""

import math
from fractions import Fraction

from divlab import (MetricJet, Signature, curvature, divergence,
                    jet_coordinate_derivative, lovelock_delta, lovelock_form,
                    random_metric_jet, weight_check)
from divlab.lovelock import einstein_contravariant, form_delta_ratio

F = Fraction

n = 4
sig = Signature(3, 1)
mj = random_metric_jet(n, sig, order=3, seed=2026)

# --- curvature of the seeded jet ---------------------------------------------

curv = curvature(mj)
print(f"scalar curvature at the origin: {curv.scalar.constant_term()}")

# --- L_1 and its divergence ----------------------------------------------------

l1 = lovelock_delta(1, mj)
print("\nL_1 at the origin (delta normalization):")
for i in range(n):
    print("  ", [str(l1[i][j].constant_term()) for j in range(n)])
print("divergence of L_1:", [str(x) for x in divergence(l1, mj)])

# --- Einstein identification ----------------------------------------------------

lf = lovelock_form(1, mj)
ein = einstein_contravariant(curv)
factor = F((-1) ** (sig.minus + 1) * math.factorial(n - 3))
print("\nwedge-route L_1 equals", factor, "x (Ric# - r/2 g*):",
      all(lf[i][j] == ein[i][j] * factor for i in range(n) for j in range(n)))
print("form/delta ratio at k=1:", form_delta_ratio(1, n, sig))

# --- the k = 2 tensor in five dimensions ----------------------------------------

mj5 = random_metric_jet(5, Signature(5, 0), order=3, seed=7)
l2 = lovelock_delta(2, mj5)
print("\nn=5: divergence of the quadratic Lovelock tensor:",
      [str(x) for x in divergence(l2, mj5)])

# --- homogeneity and the coordinate derivative ----------------------------------

print("\nweight under g -> lambda^2 g:")
for k in (0, 1, 2):
    print(" ", weight_check(k, mj5, F(3)))

deriv = jet_coordinate_derivative(1, mj)
print("\nderivative along the second-derivative coordinates:",
      len(deriv.comps), "components;")
print("  three-term cyclic identity residual:", deriv.max_cyclic_residual())
print("  last-three symmetrization residual:", deriv.s3_residual(),
      "(the derivative lives in the normal-tensor space)")
