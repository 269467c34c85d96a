"""Divergence spaces and their vanishing range.
=============================================

The m-th derivative of a divergence-free second-order p-tensor satisfies a
family of three-term cyclic identities.  The solution space inside
(x)^p T (x) S^m N^2 is computed here block by block (index letters are
preserved by every identity, so the system is graded by the multiset of
letters used).

Two headline facts:
  * the space is zero as soon as m >= n/2 — this is why such natural
    tensors are polynomial of bounded degree in the metric's second
    derivatives;
  * the triple-symmetric variant vanishes for every m >= 1.
"""

from divlab import DivVariant, check_derived_symmetries, div_space

# --- vanishing at and above half the dimension ------------------------------

print("plain divergence spaces (p = 2):")
for n in (2, 3, 4):
    for m in (1, 2):
        ds = div_space(n, 2, m, with_basis=False, policy="two-prime")
        marker = "  <- vanishes: m >= n/2" if 2 * m >= n else ""
        print(f"  n={n} m={m}: ambient {ds.ambient_dim:>5}, dim {ds.dim}{marker}")

# --- the nonzero space at (n, p, m) = (3, 2, 1) ------------------------------

ds = div_space(3, 2, 1)
print(f"\n(3,2,1): dim {ds.dim}; sample kernel vector (coordinate: value):")
sample = ds.basis.vectors[0]
for coord, val in sorted(sample.items())[:6]:
    word, multiset = ds.problem.coord_pair(coord)
    print(f"  word {word}, basis labels {multiset}: {val}")

report = check_derived_symmetries(ds.problem, sample)
print("derived cyclic identities verified on",
      report["checked"], "explicit components")

# --- symmetric-triple variant is always zero ---------------------------------

print("\ntriple-symmetric variant (slots p-2, p-1, p symmetric):")
for (n, p, m) in [(3, 4, 1), (3, 5, 1), (4, 4, 1)]:
    ds = div_space(n, p, m, DivVariant.sym_last3(p), with_basis=False,
                   policy="two-prime")
    print(f"  n={n} p={p} m={m}: dim {ds.dim}")
