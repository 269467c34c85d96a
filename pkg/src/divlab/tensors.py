"""Sparse multi-index tensors with declared slot variances and symmetries.

Storage is symmetry-canonical: only one representative word per symmetry
orbit is kept, and reading any word resolves through the orbit with the
correct sign.  Scalars are generic — exact rationals for the pointwise
classification work, jets for the differential-geometry side — as long as
they support +, *, and truthiness for zero-testing.

Index words use letters 1..n throughout, matching the way components are
written in the divergence-space combinatorics.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

UP = "up"       # contravariant
DOWN = "down"   # covariant

ZERO = Fraction(0)


class InvalidSymmetryError(ValueError):
    pass


class InvalidPairingError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    plus: int
    minus: int

    @property
    def n(self) -> int:
        return self.plus + self.minus

    def eta(self) -> list[Fraction]:
        """Diagonal of the model metric diag(+1 x plus, -1 x minus)."""
        return [Fraction(1)] * self.plus + [Fraction(-1)] * self.minus

    def __str__(self):
        return f"({self.plus},{self.minus})"


def _compose(p, q):
    """(p o q)(i) = p[q[i]] as image tuples."""
    return tuple(p[q[i]] for i in range(len(p)))


class SlotSpace:
    """n-dimensional slot space: variances plus a signed symmetry group.

    ``blocks`` lists (kind, positions) with kind "sym" or "skew"; extra
    signed generators may be supplied as (perm, sign) pairs with perm an
    image tuple on slot positions.  The generated group is closed once and
    cached on the instance.
    """

    def __init__(self, dim: int, variances, blocks=(), generators=()):
        self.dim = dim
        self.variances = tuple(variances)
        for v in self.variances:
            if v not in (UP, DOWN):
                raise ValueError(f"bad variance {v!r}")
        self.blocks = tuple((kind, tuple(pos)) for kind, pos in blocks)
        nslots = len(self.variances)
        gens: list[tuple[tuple, int]] = []
        for kind, pos in self.blocks:
            if kind not in ("sym", "skew"):
                raise InvalidSymmetryError(f"unknown block kind {kind!r}")
            sign = 1 if kind == "sym" else -1
            for a, b in zip(pos, pos[1:]):
                perm = list(range(nslots))
                perm[a], perm[b] = perm[b], perm[a]
                gens.append((tuple(perm), sign))
        for perm, sign in generators:
            gens.append((tuple(perm), int(sign)))
        for perm, sign in gens:
            if sorted(perm) != list(range(nslots)):
                raise InvalidSymmetryError(f"not a slot permutation: {perm}")
            for i, j in enumerate(perm):
                if self.variances[i] != self.variances[j]:
                    raise InvalidSymmetryError(
                        "symmetry permutes slots of different variance")
        self.group = self._close(gens, nslots)
        self._canon_cache: dict[tuple, tuple | None] = {}
        # disjoint sym/skew blocks canonicalize by sorting, no group sweep
        self._fast_blocks = None
        if not generators:
            used = [p for _, pos in self.blocks for p in pos]
            if len(used) == len(set(used)):
                self._fast_blocks = [(kind, tuple(sorted(pos)))
                                     for kind, pos in self.blocks]

    @staticmethod
    def _close(gens, nslots):
        ident = tuple(range(nslots))
        group: dict[tuple, int] = {ident: 1}
        frontier = [ident]
        while frontier:
            nxt = []
            for perm in frontier:
                sign = group[perm]
                for gperm, gsign in gens:
                    q = _compose(gperm, perm)
                    s = gsign * sign
                    if q in group:
                        if group[q] != s:
                            raise InvalidSymmetryError(
                                "inconsistent signs in symmetry group closure")
                    else:
                        group[q] = s
                        nxt.append(q)
            frontier = nxt
        return sorted(group.items())

    @property
    def num_slots(self) -> int:
        return len(self.variances)

    # -- canonical words ----------------------------------------------------

    def canonicalize(self, word):
        """(canonical_word, sign) for the orbit of ``word``; None if forced zero."""
        word = tuple(word)
        hit = self._canon_cache.get(word)
        if hit is not None or word in self._canon_cache:
            return hit
        if self._fast_blocks is not None:
            result = self._canonicalize_blockwise(word)
        else:
            result = self._canonicalize_group(word)
        self._canon_cache[word] = result
        return result

    def _canonicalize_blockwise(self, word):
        out = list(word)
        sign = 1
        for kind, pos in self._fast_blocks:
            letters = [word[p] for p in pos]
            if kind == "skew":
                if len(set(letters)) != len(letters):
                    return None
                inversions = sum(1 for i in range(len(letters))
                                 for j in range(i + 1, len(letters))
                                 if letters[i] > letters[j])
                if inversions % 2:
                    sign = -sign
            for p, letter in zip(pos, sorted(letters)):
                out[p] = letter
        return tuple(out), sign

    def _canonicalize_group(self, word):
        best = None
        best_sign = 0
        zero = False
        for perm, sign in self.group:
            img = tuple(word[perm[k]] for k in range(len(perm)))
            if best is None or img < best:
                best, best_sign = img, sign
            elif img == best and sign != best_sign:
                zero = True
        return None if zero else (best, best_sign)

    def is_canonical(self, word) -> bool:
        c = self.canonicalize(word)
        return c is not None and c[0] == tuple(word) and c[1] == 1

    def orbit(self, word):
        """All (explicit_word, sign) pairs in the orbit of a canonical word."""
        seen: dict[tuple, int] = {}
        for perm, sign in self.group:
            img = tuple(word[perm[k]] for k in range(len(perm)))
            seen.setdefault(img, sign)
        return sorted(seen.items())

    def stabilizer_order(self, word) -> int:
        word = tuple(word)
        return sum(1 for perm, _ in self.group
                   if tuple(word[perm[k]] for k in range(len(perm))) == word)

    def basis_words(self):
        """Canonical index words in graded-lex order; length = dimension."""
        cached = getattr(self, "_basis_words", None)
        if cached is not None:
            return cached
        if self._fast_blocks is not None:
            words = self._basis_words_blockwise()
        else:
            words = []
            for word in itertools.product(range(1, self.dim + 1),
                                          repeat=self.num_slots):
                c = self.canonicalize(word)
                if c is not None and c[0] == word:
                    words.append(word)
        self._basis_words = words
        return words

    def _basis_words_blockwise(self):
        rng1 = range(1, self.dim + 1)
        in_block = {p for _, pos in self._fast_blocks for p in pos}
        units = []      # (positions, choices for their letters)
        for p in range(self.num_slots):
            if p not in in_block:
                units.append(((p,), [(x,) for x in rng1]))
        for kind, pos in self._fast_blocks:
            if kind == "sym":
                choices = list(itertools.combinations_with_replacement(
                    rng1, len(pos)))
            else:
                choices = list(itertools.combinations(rng1, len(pos)))
            units.append((pos, choices))
        words = []
        for assignment in itertools.product(*(c for _, c in units)):
            word = [0] * self.num_slots
            for (pos, _), letters in zip(units, assignment):
                for p, letter in zip(pos, letters):
                    word[p] = letter
            words.append(tuple(word))
        words.sort()
        return words

    @property
    def dimension(self) -> int:
        return len(self.basis_words())

    def to_json(self) -> dict:
        return {"dim": self.dim, "variances": list(self.variances),
                "blocks": [[k, list(p)] for k, p in self.blocks]}

    def __eq__(self, other):
        return (isinstance(other, SlotSpace) and self.dim == other.dim
                and self.variances == other.variances
                and self.group == other.group)

    def __repr__(self):
        return (f"SlotSpace(dim={self.dim}, variances={self.variances}, "
                f"blocks={self.blocks})")


def enumerate_basis(space: SlotSpace):
    return space.basis_words()


class SparseTensor:
    """Tensor over a SlotSpace; canonical-representative storage, no zeros.

    ``components[word]`` is the actual component value at the canonical word;
    any other word reads as sign * canonical component.
    """

    def __init__(self, space: SlotSpace, components=None):
        self.space = space
        self.components: dict[tuple, object] = {}
        if components:
            for word, value in components.items():
                self.set(word, value)

    def copy(self) -> "SparseTensor":
        t = SparseTensor(self.space)
        t.components = dict(self.components)
        return t

    def get(self, word):
        c = self.space.canonicalize(word)
        if c is None:
            return ZERO
        canon, sign = c
        v = self.components.get(canon)
        if v is None:
            return ZERO
        return v if sign == 1 else -v

    def set(self, word, value):
        c = self.space.canonicalize(word)
        if c is None:
            if value:
                raise ValueError(f"word {word} is forced zero by the symmetry")
            return
        canon, sign = c
        if value:
            self.components[canon] = value if sign == 1 else -value
        else:
            self.components.pop(canon, None)

    def add(self, word, value):
        if not value:
            return
        c = self.space.canonicalize(word)
        if c is None:
            raise ValueError(f"word {word} is forced zero by the symmetry")
        canon, sign = c
        cur = self.components.get(canon, None)
        delta = value if sign == 1 else -value
        s = delta if cur is None else cur + delta
        if s:
            self.components[canon] = s
        else:
            self.components.pop(canon, None)

    def expanded_items(self):
        """Yield (explicit word, value) over every word with nonzero value."""
        for canon, v in self.components.items():
            for word, sign in self.space.orbit(canon):
                yield word, (v if sign == 1 else -v)

    def is_zero(self) -> bool:
        return not self.components

    def scale(self, factor) -> "SparseTensor":
        t = SparseTensor(self.space)
        if factor:
            t.components = {w: factor * v for w, v in self.components.items()}
        return t

    def __add__(self, other):
        if not isinstance(other, SparseTensor) or other.space != self.space:
            return NotImplemented
        t = self.copy()
        for w, v in other.components.items():
            t.add(w, v)
        return t

    def __sub__(self, other):
        return self + other.scale(Fraction(-1))

    def __eq__(self, other):
        return (isinstance(other, SparseTensor) and self.space == other.space
                and self.components == other.components)

    def to_json(self) -> dict:
        from .linalg import format_rational
        comps = []
        for w in sorted(self.components):
            v = self.components[w]
            comps.append([list(w), format_rational(v)])
        return {"space": self.space.to_json(), "components": comps}

    def __repr__(self):
        return f"SparseTensor({len(self.components)} canonical components)"


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def tensor_product(a: SparseTensor, b: SparseTensor) -> SparseTensor:
    if a.space.dim != b.space.dim:
        raise ValueError("tensor factors live over different dimensions")
    offset = a.space.num_slots
    blocks = list(a.space.blocks) + [
        (k, tuple(p + offset for p in pos)) for k, pos in b.space.blocks]
    space = SlotSpace(a.space.dim, a.space.variances + b.space.variances,
                      blocks=blocks)
    t = SparseTensor(space)
    for wa, va in a.expanded_items():
        for wb, vb in b.expanded_items():
            word = wa + wb
            if space.is_canonical(word):
                t.add(word, va * vb)
    return t


def symmetrize(t: SparseTensor, blocks=(), generators=()) -> SparseTensor:
    """Signed group average: (Pt)^v = (1/|G|) sum_s sign(s) t^(s.v).

    G is the group generated by the given blocks/generators; the result is
    stored on a SlotSpace carrying exactly that symmetry.  Idempotent.
    """
    space = t.space
    probe = SlotSpace(space.dim, space.variances, blocks=blocks,
                      generators=generators)
    group = probe.group
    inv_order = Fraction(1, len(group))
    out = SparseTensor(probe)
    candidates = set()
    for word, _ in t.expanded_items():
        c = probe.canonicalize(word)
        if c is not None:
            candidates.add(c[0])
    for cw in sorted(candidates):
        total = None
        for perm, sign in group:
            img = tuple(cw[perm[k]] for k in range(len(perm)))
            v = t.get(img)
            if v:
                contrib = v if sign == 1 else -v
                total = contrib if total is None else total + contrib
        if total:
            val = total * inv_order
            if val:
                out.components[cw] = val
    return out


def contract(t: SparseTensor, pairings, g=None, g_inv=None) -> SparseTensor:
    """Contract slot pairs, inserting g / g_inv as the variances dictate.

    Two contravariant slots are paired through the covariant metric ``g``;
    two covariant slots through ``g_inv``; a mixed pair is the natural trace.
    ``g`` and ``g_inv`` are n x n nested sequences of scalars.
    """
    space = t.space
    used = [s for pair in pairings for s in pair]
    if len(set(used)) != len(used):
        raise InvalidPairingError("overlapping slot pairs")
    for s in used:
        if not 0 <= s < space.num_slots:
            raise InvalidPairingError(f"slot {s} out of range")
    weights = []
    for s1, s2 in pairings:
        v1, v2 = space.variances[s1], space.variances[s2]
        if v1 == UP and v2 == UP:
            if g is None:
                raise InvalidPairingError("metric g required for up-up pairing")
            weights.append(g)
        elif v1 == DOWN and v2 == DOWN:
            if g_inv is None:
                raise InvalidPairingError("g_inv required for down-down pairing")
            weights.append(g_inv)
        else:
            weights.append(None)
    keep = [k for k in range(space.num_slots) if k not in set(used)]
    out_space = SlotSpace(space.dim, tuple(space.variances[k] for k in keep))
    out = SparseTensor(out_space)
    for word, value in t.expanded_items():
        factor = value
        dead = False
        for (s1, s2), w in zip(pairings, weights):
            i, j = word[s1], word[s2]
            if w is None:
                if i != j:
                    dead = True
                    break
            else:
                coeff = w[i - 1][j - 1]
                if not coeff:
                    dead = True
                    break
                factor = factor * coeff
        if dead:
            continue
        out.add(tuple(word[k] for k in keep), factor)
    return out


def gl_derivation(t: SparseTensor, a_matrix) -> SparseTensor:
    """Leibniz action of gl(n): A on each contravariant slot, -A^T on covariant.

    On a pure tensor the slot k contribution replaces e_i by A e_i (basis
    scatter coefficient A[s][i]), respectively the dual action on covariant
    slots.  The action commutes with slot permutations, so the result lives
    on the same SlotSpace.
    """
    space = t.space
    n = space.dim
    out = SparseTensor(space)
    for word, value in t.expanded_items():
        for k in range(space.num_slots):
            up = space.variances[k] == UP
            wk = word[k]
            for s in range(1, n + 1):
                coeff = (a_matrix[s - 1][wk - 1] if up
                         else -a_matrix[wk - 1][s - 1])
                if not coeff:
                    continue
                repl = word[:k] + (s,) + word[k + 1:]
                if space.canonicalize(repl) is None:
                    continue
                out.add(repl, coeff * value)
    return out
