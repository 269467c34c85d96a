"""Divergence spaces: the subspaces of (x)^p T (x) S^m N2 cut out by the
cyclic-sum identities satisfied by derivatives of divergence-free tensors.

Coordinates.  An ambient coordinate is a pair (word, multiset): a canonical
p-letter word for the tensor slots and a sorted m-multiset of normal-tensor
basis labels.  The coordinate multiplies the *full group sum* basis element
(sum over all slot permutations of the word symmetry, sum over all m!
arrangements of the multiset), so multiplicity bookkeeping stays integral.

Grading.  Every defining equation permutes index letters without changing
them, so the system is block-diagonal over the multiset of letters used by
a coordinate (word letters plus the letters of each basis label's
multidegree).  All kernels are computed block by block; this is what makes
the larger instances tractable in exact arithmetic.

Certification.  A mod-p rank is a lower bound for the exact rank, so full
column rank modulo a single prime certifies a zero kernel exactly.  The
two-prime policy covers dimension-only queries on blocks with nonzero
kernels; exact kernels are always recomputed in exact arithmetic and each
kernel vector is verified against the raw equations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .linalg import (SparseMatrix, SubspaceBasis, _Echelon,
                     random_prime_31bit, rows_rank_mod_p)
from .normal import NormalTensorSpace, basis_n2, word_multidegree
from .tensors import UP, SlotSpace

F = Fraction
ZERO = F(0)


class InternalConsistencyError(AssertionError):
    """A derived identity failed on a computed kernel vector."""


@dataclass(frozen=True)
class DivVariant:
    """Which slot symmetry the p tensor slots carry.

    kind: "plain" | "sym3" (last three slots symmetric) | "skew" | "fullsym".
    """
    kind: str
    p: int

    def __post_init__(self):
        if self.kind not in ("plain", "sym3", "skew", "fullsym"):
            raise ValueError(f"unknown variant kind {self.kind!r}")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.kind == "sym3" and self.p < 3:
            raise ValueError("sym3 needs at least three slots")

    @classmethod
    def plain(cls, p):
        return cls("plain", p)

    @classmethod
    def sym_last3(cls, p):
        return cls("sym3", p)

    @classmethod
    def fully_skew(cls, p):
        return cls("skew", p)

    @classmethod
    def fully_sym(cls, p):
        return cls("fullsym", p)

    def __str__(self):
        return self.kind


class WordScheme:
    """Canonical words and full-sum expansion bookkeeping for one variant."""

    def __init__(self, variant: DivVariant, n: int):
        self.variant = variant
        self.n = n
        p = variant.p
        if variant.kind == "plain":
            blocks = []
        elif variant.kind == "sym3":
            blocks = [("sym", (p - 3, p - 2, p - 1))]
        elif variant.kind == "skew":
            blocks = [("skew", tuple(range(p)))]
        else:
            blocks = [("sym", tuple(range(p)))]
        self.space = SlotSpace(n, (UP,) * p, blocks=blocks)
        self.words = self.space.basis_words()
        self.word_index = {w: i for i, w in enumerate(self.words)}
        self._stab = {w: self.space.stabilizer_order(w) for w in self.words}

    def expansion_coeff(self, canonical, explicit) -> int:
        """Component of the full group sum over ``canonical`` at ``explicit``."""
        c = self.space.canonicalize(explicit)
        if c is None or c[0] != canonical:
            return 0
        return c[1] * self._stab[canonical]

    def resolve(self, explicit):
        """(canonical word, sign) of an explicit word, or None if forced zero."""
        return self.space.canonicalize(explicit)

    def free_data(self):
        """Free (p-1)-letter word data of the defining equations.

        The equation word is ``free + (t,)`` with t the distinguished slot
        letter; for sym3 the distinguished slot is one of the symmetric
        three, so the free part is (plain prefix, sorted pair).
        """
        n, p, kind = self.n, self.variant.p, self.variant.kind
        rng1 = range(1, n + 1)
        if kind == "plain":
            yield from itertools.product(rng1, repeat=p - 1)
        elif kind == "sym3":
            for prefix in itertools.product(rng1, repeat=p - 3):
                for pair in itertools.combinations_with_replacement(rng1, 2):
                    yield prefix + pair
        elif kind == "skew":
            yield from itertools.combinations(rng1, p - 1)
        else:
            yield from itertools.combinations_with_replacement(rng1, p - 1)


@lru_cache(maxsize=32)
def cached_basis_n2(n: int) -> NormalTensorSpace:
    return basis_n2(n)


def _sum_multidegrees(*degrees):
    return tuple(sum(parts) for parts in zip(*degrees))


class DivProblem:
    """Ambient enumeration plus per-block equation generation."""

    def __init__(self, n: int, p: int, m: int, variant: DivVariant | None = None,
                 nspace: NormalTensorSpace | None = None):
        if variant is None:
            variant = DivVariant.plain(p)
        if variant.p != p:
            raise ValueError("variant.p disagrees with p")
        if m < 1:
            raise ValueError("m must be >= 1")
        self.n, self.p, self.m = n, p, m
        self.variant = variant
        self.nspace = nspace or cached_basis_n2(n)
        self.scheme = WordScheme(variant, n)

        labels = range(self.nspace.dim)
        self.multisets = list(itertools.combinations_with_replacement(labels, m))
        self.ms_index = {ms: i for i, ms in enumerate(self.multisets)}
        self._label_mdeg = [v.multidegree for v in self.nspace.vectors]
        self._ms_mdeg = [
            _sum_multidegrees(*(self._label_mdeg[b] for b in ms)) if ms else
            (0,) * n for ms in self.multisets]
        self._word_mdeg = {w: word_multidegree(w, n) for w in self.scheme.words}

        # quatern support: canonical 4-word -> [(label, component)]
        self.quat_support: dict[tuple, list] = {}
        for beta, vec in enumerate(self.nspace.vectors):
            for w4, val in vec.comps.items():
                self.quat_support.setdefault(w4, []).append((beta, val))

        nm = len(self.multisets)
        self.ambient_dim = len(self.scheme.words) * nm
        self.block_columns: dict[tuple, list[int]] = {}
        for wi, w in enumerate(self.scheme.words):
            wdeg = self._word_mdeg[w]
            for mi in range(nm):
                block = _sum_multidegrees(wdeg, self._ms_mdeg[mi])
                self.block_columns.setdefault(block, []).append(wi * nm + mi)

        self._block_free: dict[tuple, list] | None = None

    # -- coordinates --------------------------------------------------------

    def coord(self, word, multiset) -> int:
        return (self.scheme.word_index[word] * len(self.multisets)
                + self.ms_index[tuple(multiset)])

    def coord_pair(self, index: int):
        nm = len(self.multisets)
        return self.scheme.words[index // nm], self.multisets[index % nm]

    @property
    def blocks(self):
        return sorted(self.block_columns)

    def even_blocks(self):
        return [b for b in self.blocks if all(c % 2 == 0 for c in b)]

    # -- equation generation --------------------------------------------------

    def _free_lists(self):
        if getattr(self, "_lists_cache", None) is not None:
            return self._lists_cache
        n = self.n
        rng1 = range(1, n + 1)
        wfree_list = list(self.scheme.free_data())
        ab_list = list(itertools.combinations_with_replacement(rng1, 2))
        tau_list = list(itertools.combinations_with_replacement(rng1, 3))
        if self.m == 1:
            msp_list = [()]
        else:
            msp_list = list(itertools.combinations_with_replacement(
                range(self.nspace.dim), self.m - 1))
        self._lists_cache = (wfree_list, ab_list, tau_list, msp_list)
        return self._lists_cache

    def _free_data_by_block(self):
        """Bucket the free equation data by block, encoded as flat integers."""
        if self._block_free is not None:
            return self._block_free
        n = self.n
        wfree_list, ab_list, tau_list, msp_list = self._free_lists()
        msp_mdeg = []
        for msp in msp_list:
            msp_mdeg.append(_sum_multidegrees(
                *(self._label_mdeg[b] for b in msp)) if msp else (0,) * n)
        out: dict[tuple, list] = {}
        nab, ntau, nmsp = len(ab_list), len(tau_list), len(msp_list)
        for wi, wfree in enumerate(wfree_list):
            base = [0] * n
            for letter in wfree:
                base[letter - 1] += 1
            for ai, ab in enumerate(ab_list):
                for ti, tau in enumerate(tau_list):
                    deg = list(base)
                    for letter in ab + tau:
                        deg[letter - 1] += 1
                    code_head = ((wi * nab) + ai) * ntau + ti
                    for mi in range(nmsp):
                        block = _sum_multidegrees(tuple(deg), msp_mdeg[mi])
                        if block in self.block_columns:
                            out.setdefault(block, []).append(
                                code_head * nmsp + mi)
        self._block_free = out
        return out

    def _decode_free(self, code: int, lists):
        wfree_list, ab_list, tau_list, msp_list = lists
        code, mi = divmod(code, len(msp_list))
        code, ti = divmod(code, len(tau_list))
        wi, ai = divmod(code, len(ab_list))
        return wfree_list[wi], ab_list[ai], tau_list[ti], msp_list[mi]

    def expand_row(self, free) -> dict[int, F]:
        """One defining equation as {global column: coefficient}.

        The cyclic sum assigns each element of the sorted triple in turn to
        the distinguished slot, the remaining two forming the second pair of
        the exposed quatern.
        """
        wfree, ab, tau, msp = free
        row: dict[int, F] = {}
        nm = len(self.multisets)
        choices = ((tau[0], (tau[1], tau[2])),
                   (tau[1], (tau[0], tau[2])),
                   (tau[2], (tau[0], tau[1])))
        for t, cd in choices:
            resolved = self.scheme.resolve(wfree + (t,))
            if resolved is None:
                continue
            wcanon, sign = resolved
            wcoeff = sign * self.scheme._stab[wcanon]
            quat = ab + cd
            for beta, bval in self.quat_support.get(quat, ()):
                ms = tuple(sorted(msp + (beta,)))
                mult = msp.count(beta) + 1
                col = self.scheme.word_index[wcanon] * nm + self.ms_index[ms]
                val = row.get(col, ZERO) + wcoeff * mult * bval
                if val:
                    row[col] = val
                else:
                    row.pop(col, None)
        return row

    def rows_for_block(self, block):
        lists = self._free_lists()
        for code in self._free_data_by_block().get(block, []):
            row = self.expand_row(self._decode_free(code, lists))
            if row:
                yield row

    def all_rows(self):
        for block in self.blocks:
            yield from self.rows_for_block(block)

    # -- per-block kernels ----------------------------------------------------

    def block_kernel(self, block, verify: bool = True):
        """Exact kernel vectors of one block, as global-coordinate dicts."""
        cols = self.block_columns[block]
        local = {g: i for i, g in enumerate(cols)}
        ech = _Echelon(len(cols))
        raw = []
        for row in self.rows_for_block(block):
            lrow = {local[g]: v for g, v in row.items()}
            raw.append(lrow)
            ech.add_row(lrow)
        vecs = ech.kernel()
        if verify:
            for v in vecs:
                for lrow in raw:
                    s = sum(val * v.get(c, ZERO) for c, val in lrow.items())
                    if s:
                        raise InternalConsistencyError(
                            f"kernel vector violates an equation in block {block}")
        return [{cols[c]: val for c, val in v.items()} for v in vecs]

    def block_dim(self, block, policy: str = "exact", seed: int = 0):
        """Kernel dimension of one block under the requested rank policy."""
        cols = self.block_columns[block]
        ncols = len(cols)
        local = {g: i for i, g in enumerate(cols)}

        def local_rows():
            for row in self.rows_for_block(block):
                yield {local[g]: v for g, v in row.items()}

        if policy == "exact":
            ech = _Echelon(ncols)
            for lrow in local_rows():
                ech.add_row(lrow)
                if ech.rank == ncols:
                    break
            return ncols - ech.rank
        if policy == "two-prime":
            import random as _random
            rng = _random.Random(f"div:{self.n}:{self.p}:{self.m}:{seed}")
            rows = list(local_rows())
            p1 = random_prime_31bit(rng)
            r1 = rows_rank_mod_p(rows, ncols, p1, stop_at=ncols)
            if r1 == ncols:
                # full column rank mod one prime already certifies dim 0
                return 0
            p2 = random_prime_31bit(rng)
            r2 = rows_rank_mod_p(rows, ncols, p2, stop_at=ncols)
            if r1 == r2:
                return ncols - r1
            ech = _Echelon(ncols)
            for lrow in rows:
                ech.add_row(lrow)
            return ncols - ech.rank
        raise ValueError(f"unknown rank policy {policy!r}")


@dataclass
class DivSpace:
    n: int
    p: int
    m: int
    variant: DivVariant
    problem: DivProblem
    dim: int
    basis: SubspaceBasis | None
    block_dims: dict
    vector_blocks: list

    @property
    def ambient_dim(self) -> int:
        return self.problem.ambient_dim

    def summary(self, basis_ref: str | None = None) -> dict:
        return {"n": self.n, "p": self.p, "m": self.m,
                "variant": self.variant.kind, "ambient_dim": self.ambient_dim,
                "dim": self.dim, "basis_ref": basis_ref}


def div_equations(n: int, p: int, m: int,
                  variant: DivVariant | None = None) -> SparseMatrix:
    """The full defining system as a sparse matrix (deduplicated rows).

    Meant for moderate sizes; the block machinery in DivProblem is the
    production path for kernels.
    """
    problem = DivProblem(n, p, m, variant)
    seen = set()
    rows = []
    for row in problem.all_rows():
        key = _row_key(row)
        if key not in seen:
            seen.add(key)
            rows.append(row)
    return SparseMatrix.from_rows(rows, problem.ambient_dim)


def _row_key(row: dict[int, F]):
    items = sorted(row.items())
    lead = items[0][1]
    return tuple((c, v / lead) for c, v in items)


_WORKER_PROBLEM: DivProblem | None = None


def _parallel_block_task(args):
    block, with_basis, policy = args
    problem = _WORKER_PROBLEM
    if with_basis:
        return block, problem.block_kernel(block)
    return block, problem.block_dim(block, policy=policy)


def div_space(n: int, p: int, m: int, variant: DivVariant | None = None,
              policy: str = "exact", with_basis: bool = True,
              only_blocks=None, threads: int = 1) -> DivSpace:
    """Kernel of the divergence system, block by block.

    ``only_blocks`` restricts the computation (e.g. to the all-even blocks
    used by the invariant pipeline); the reported dimension then covers just
    those blocks.  ``threads`` > 1 forks workers over blocks; the block
    results are reassembled in canonical order, so the output is identical
    for any worker count.
    """
    if variant is None:
        variant = DivVariant.plain(p)
    problem = DivProblem(n, p, m, variant)
    blocks = problem.blocks if only_blocks is None else sorted(only_blocks)
    per_block: dict = {}
    if threads > 1 and len(blocks) > 1:
        problem._free_data_by_block()    # materialize before forking
        global _WORKER_PROBLEM
        _WORKER_PROBLEM = problem
        try:
            import multiprocessing as mp
            ctx = mp.get_context("fork")
            with ctx.Pool(processes=threads) as pool:
                tasks = [(b, with_basis, policy) for b in blocks]
                for block, result in pool.imap_unordered(
                        _parallel_block_task, tasks):
                    per_block[block] = result
        finally:
            _WORKER_PROBLEM = None
    else:
        for block in blocks:
            if with_basis:
                per_block[block] = problem.block_kernel(block)
            else:
                per_block[block] = problem.block_dim(block, policy=policy)
    block_dims = {}
    vectors = []
    vector_blocks = []
    for block in blocks:
        result = per_block[block]
        if with_basis:
            block_dims[block] = len(result)
            vectors.extend(result)
            vector_blocks.extend([block] * len(result))
        else:
            block_dims[block] = result
    dim = sum(block_dims.values())
    basis = SubspaceBasis(problem.ambient_dim, vectors) if with_basis else None
    return DivSpace(n=n, p=p, m=m, variant=variant, problem=problem, dim=dim,
                    basis=basis, block_dims=block_dims,
                    vector_blocks=vector_blocks)


# ---------------------------------------------------------------------------
# explicit components and derived symmetries
# ---------------------------------------------------------------------------

def explicit_component(problem: DivProblem, x: dict[int, F],
                       word, quaterns) -> F:
    """T^{word; q_1 ... q_m} of the ambient element with coordinates ``x``.

    ``quaterns`` is a tuple of m explicit 4-tuples; the multiset factor is
    the full sum over arrangements, so a label multiset {b, b} contributes
    both orderings.
    """
    nm = len(problem.multisets)
    total = ZERO
    for col, val in x.items():
        wcanon = problem.scheme.words[col // nm]
        ms = problem.multisets[col % nm]
        wc = problem.scheme.expansion_coeff(wcanon, word)
        if not wc:
            continue
        msum = ZERO
        for arrangement in set(itertools.permutations(ms)):
            mult = _arrangement_multiplicity(ms, arrangement)
            prod = F(mult)
            for beta, q in zip(arrangement, quaterns):
                comp = problem.nspace.vectors[beta].component(*q)
                if not comp:
                    prod = ZERO
                    break
                prod *= comp
            if prod:
                msum += prod
        if msum:
            total += val * wc * msum
    return total


def _arrangement_multiplicity(ms, arrangement) -> int:
    """How many of the m! list permutations produce this arrangement."""
    import math
    counts = {}
    for b in ms:
        counts[b] = counts.get(b, 0) + 1
    denom = 1
    for c in counts.values():
        denom *= math.factorial(c)
    return denom


def check_derived_symmetries(problem: DivProblem, x: dict[int, F],
                             samples: int = 150, seed: int = 0) -> dict:
    """Verify the cyclic-sum consequences on a kernel element, exactly.

    For every sampled component: the cyclic sums over (j_p, a_i, b_i) and
    over (j_p, c_i, d_i) vanish for each quatern slot i, components with
    three equal indices vanish, and for the sym3 variant the pair/triple
    exchange symmetry holds.  Violations raise InternalConsistencyError.
    """
    import random as _random
    n, p, m = problem.n, problem.p, problem.m
    rng = _random.Random(f"derived:{seed}")
    space_size = n ** (p + 4 * m)
    checked = 0

    def instances():
        if space_size <= 20000:
            words = itertools.product(range(1, n + 1), repeat=p)
            for w in words:
                for qs in itertools.product(
                        itertools.product(range(1, n + 1), repeat=4), repeat=m):
                    yield w, qs
        else:
            for _ in range(samples):
                w = tuple(rng.randint(1, n) for _ in range(p))
                qs = tuple(tuple(rng.randint(1, n) for _ in range(4))
                           for _ in range(m))
                yield w, qs

    def comp(word, qs):
        return explicit_component(problem, x, word, qs)

    for word, qs in instances():
        jp = word[-1]
        prefix = word[:-1]
        for i in range(m):
            a, b, c, d = qs[i]
            # cyclic sum over (j_p, c_i, d_i)
            s = comp(word, qs)
            qs_d = qs[:i] + ((a, b, jp, c),) + qs[i + 1:]
            s += comp(prefix + (d,), qs_d)
            qs_c = qs[:i] + ((a, b, d, jp),) + qs[i + 1:]
            s += comp(prefix + (c,), qs_c)
            if s:
                raise InternalConsistencyError(
                    f"cyclic (j,c,d) sum nonzero at {word} {qs} slot {i}")
            # cyclic sum over (j_p, a_i, b_i)
            s = comp(word, qs)
            qs_b = qs[:i] + ((jp, a, c, d),) + qs[i + 1:]
            s += comp(prefix + (b,), qs_b)
            qs_a = qs[:i] + ((b, jp, c, d),) + qs[i + 1:]
            s += comp(prefix + (a,), qs_a)
            if s:
                raise InternalConsistencyError(
                    f"cyclic (j,a,b) sum nonzero at {word} {qs} slot {i}")
            if jp == a == b and comp(word, qs):
                raise InternalConsistencyError(
                    f"triple-equal component nonzero at {word} {qs}")
        if problem.variant.kind == "sym3" and m >= 1:
            j1, j2, j3 = word[-3], word[-2], word[-1]
            a, b, c, d = qs[0]
            swapped_word = word[:-3] + (c, d, j3)
            swapped_qs = ((a, b, j1, j2),) + qs[1:]
            if comp(word, qs) != comp(swapped_word, swapped_qs):
                raise InternalConsistencyError(
                    f"pair/triple exchange fails at {word} {qs}")
        checked += 1
    return {"checked": checked, "ok": True}
