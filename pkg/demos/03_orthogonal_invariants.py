"""Orthogonal invariants: fixed points versus metric matchings.
=============================================================

Invariant tensors under the full orthogonal group are computed two ways:

  * fixed points: the simultaneous kernel of the so(p,q) action, restricted
    beforehand to coordinates where every index letter appears evenly
    (which is exactly what fixedness under the coordinate reflections
    forces);
  * spans of dual-metric products over perfect matchings of the slots —
    the classical spanning set.

The two dimensions agree on every full tensor power, which is the package's
standing cross-check.  Applied to the divergence spaces, the fixed-point
computation recovers the classification: one invariant line per degree for
two-index tensors, nothing for forms, only metric powers for fully
symmetric tensors.
"""

from divlab import (DivVariant, Signature, SlotSpace, invariant_div_dim,
                    invariant_subspace, matching_span_dim, ortho_data)
from divlab.tensors import UP

# --- fixed points equal matching spans on tensor powers ----------------------

print("fixed points vs matching spans, n = 3, Euclidean signature:")
group = ortho_data(3, Signature(3, 0))
for r in range(1, 7):
    space = SlotSpace(3, (UP,) * r)
    fixed = invariant_subspace(space, group).dim
    span = matching_span_dim(space, group)
    print(f"  r={r}: fixed {fixed:>2}, matchings span {span:>2}"
          + ("   <- odd r vanishes" if r % 2 else ""))

# --- the reflections matter ---------------------------------------------------

lam3 = SlotSpace(3, (UP,) * 3, blocks=[("skew", (0, 1, 2))])
print("\ntop forms: the rotation algebra alone fixes the volume element,")
print("but orientation-reversing isometries kill it:",
      invariant_subspace(lam3, group).dim, "invariants")

# --- invariant lines in the divergence spaces ---------------------------------

print("\ninvariant part of the two-index divergence spaces:")
for (n, m) in [(2, 1), (3, 1), (4, 1), (5, 1), (5, 2)]:
    d = invariant_div_dim(n, 2, m)
    note = "no room below n = 2m + 1" if d == 0 else "the Lovelock line"
    print(f"  n={n} m={m}: dim {d}   ({note})")

print("\nforms have no divergence-free invariants:")
for (n, p) in [(3, 2), (4, 2), (4, 4)]:
    print(f"  n={n} Lambda^{p}: degree-1 invariants =",
          invariant_div_dim(n, p, 1, DivVariant.fully_skew(p)))
