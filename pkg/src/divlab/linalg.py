"""Exact sparse linear algebra over the rationals and prime fields.

The exact scalar type is ``fractions.Fraction`` (arbitrary precision, always
reduced, positive denominator), so every invariant the code relies on —
no rounding, exact kernels — is inherited from the standard library.

Two elimination engines live here:

* a sparse, fraction-free (integer cross-multiplication) engine used for
  production kernel/rank computation, with Markowitz-style pivoting;
* a deliberately naive dense row-reduction used as an independent oracle.

Ranks can also be taken modulo random 31-bit primes.  A mod-p rank is a
lower bound for the exact rank, so full column rank mod a single prime
already certifies a zero kernel exactly; the two-prime policy accepts an
agreeing pair of random primes for other ranks and falls back to exact
arithmetic on disagreement.
"""

from __future__ import annotations

import json
import random
from fractions import Fraction
from math import gcd

import numpy as np

ZERO = Fraction(0)
ONE = Fraction(1)


class BadPrimeError(ValueError):
    """A stored denominator is divisible by the requested prime."""


# ---------------------------------------------------------------------------
# scalar helpers
# ---------------------------------------------------------------------------

def format_rational(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def parse_rational(s: str) -> Fraction:
    num, _, den = s.partition("/")
    return Fraction(int(num), int(den) if den else 1)


# ---------------------------------------------------------------------------
# sparse matrix / basis containers
# ---------------------------------------------------------------------------

class SparseMatrix:
    """Sparse rows x cols matrix of Fractions; no explicit zeros stored."""

    def __init__(self, rows: int, cols: int, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries: dict[tuple[int, int], Fraction] = {}
        if entries:
            items = entries.items() if isinstance(entries, dict) else entries
            for item in items:
                if isinstance(entries, dict):
                    (r, c), v = item
                else:
                    r, c, v = item
                if not 0 <= r < rows or not 0 <= c < cols:
                    raise ValueError(f"entry ({r},{c}) out of range")
                v = Fraction(v)
                if v:
                    self.entries[(r, c)] = v

    @classmethod
    def from_rows(cls, row_dicts: list[dict[int, Fraction]], cols: int) -> "SparseMatrix":
        m = cls(len(row_dicts), cols)
        for r, row in enumerate(row_dicts):
            for c, v in row.items():
                if v:
                    m.entries[(r, c)] = Fraction(v)
        return m

    def row_dicts(self) -> list[dict[int, Fraction]]:
        out: list[dict[int, Fraction]] = [dict() for _ in range(self.rows)]
        for (r, c), v in self.entries.items():
            out[r][c] = v
        return out

    def matvec(self, v: dict[int, Fraction]) -> dict[int, Fraction]:
        out: dict[int, Fraction] = {}
        for (r, c), a in self.entries.items():
            x = v.get(c)
            if x:
                s = out.get(r, ZERO) + a * x
                if s:
                    out[r] = s
                else:
                    out.pop(r, None)
        return out

    def to_json(self) -> dict:
        entries = sorted(((r, c, format_rational(v))
                          for (r, c), v in self.entries.items()),
                         key=lambda t: (t[0], t[1]))
        return {"version": 1, "rows": self.rows, "cols": self.cols,
                "entries": [[r, c, s] for r, c, s in entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "SparseMatrix":
        if obj.get("version") != 1:
            raise ValueError("unsupported matrix format version")
        m = cls(obj["rows"], obj["cols"])
        for r, c, s in obj["entries"]:
            m.entries[(r, c)] = parse_rational(s)
        return m

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, nnz={len(self.entries)})"


class SubspaceBasis:
    """Ordered list of sparse coordinate vectors spanning a subspace."""

    def __init__(self, ambient_dim: int, vectors: list[dict[int, Fraction]]):
        self.ambient_dim = ambient_dim
        self.vectors = []
        for v in vectors:
            for c in v:
                if not 0 <= c < ambient_dim:
                    raise ValueError(f"coordinate {c} out of range")
            self.vectors.append({c: Fraction(x) for c, x in v.items() if x})

    @property
    def dim(self) -> int:
        return len(self.vectors)

    def verify_independent(self) -> bool:
        return rank(SparseMatrix.from_rows(self.vectors, self.ambient_dim)) == self.dim

    def to_json(self) -> dict:
        entries = []
        for r, v in enumerate(self.vectors):
            for c in sorted(v):
                entries.append([r, c, format_rational(v[c])])
        return {"version": 1, "rows": self.dim, "cols": self.ambient_dim,
                "entries": entries}

    @classmethod
    def from_json(cls, obj: dict) -> "SubspaceBasis":
        if obj.get("version") != 1:
            raise ValueError("unsupported basis format version")
        vecs: list[dict[int, Fraction]] = [dict() for _ in range(obj["rows"])]
        for r, c, s in obj["entries"]:
            vecs[r][c] = parse_rational(s)
        return cls(obj["cols"], vecs)

    def __repr__(self):
        return f"SubspaceBasis(dim={self.dim}, ambient={self.ambient_dim})"


# ---------------------------------------------------------------------------
# fraction-free sparse elimination
# ---------------------------------------------------------------------------

def _primitive_int_row(row: dict[int, Fraction]) -> dict[int, int]:
    """Scale a rational row to a primitive integer row (content 1)."""
    if not row:
        return {}
    lcm = 1
    for v in row.values():
        d = v.denominator
        lcm = lcm // gcd(lcm, d) * d
    ints = {c: int(v * lcm) for c, v in row.items() if v}
    g = 0
    for v in ints.values():
        g = gcd(g, abs(v))
    if g > 1:
        ints = {c: v // g for c, v in ints.items()}
    return ints


class _Echelon:
    """Sparse fraction-free echelon form, incremental row feed.

    Every installed pivot row has its pivot at its minimum column, so the
    pivot rows form a column-triangular system: a pivot row for column c
    only touches columns >= c.  Rows are primitive integer vectors.
    """

    def __init__(self, cols: int):
        self.cols = cols
        self._by_col: dict[int, dict[int, int]] = {}   # pivot col -> row

    @property
    def rank(self) -> int:
        return len(self._by_col)

    def add_row(self, row: dict) -> bool:
        """Reduce a row against the pivots; returns True if it added rank."""
        work = _primitive_int_row({c: Fraction(v) for c, v in row.items() if v})
        while work:
            c = min(work)
            piv = self._by_col.get(c)
            if piv is None:
                self._by_col[c] = work
                return True
            a, b = piv[c], work[c]
            g = gcd(a, b)
            fa, fb = a // g, b // g
            # work := fa*work - fb*piv   (kills column c exactly)
            new: dict[int, int] = {cc: fa * vv for cc, vv in work.items()}
            for cc, vv in piv.items():
                s = new.get(cc, 0) - fb * vv
                if s:
                    new[cc] = s
                else:
                    new.pop(cc, None)
            g2 = 0
            for vv in new.values():
                g2 = gcd(g2, abs(vv))
            if g2 > 1:
                new = {cc: vv // g2 for cc, vv in new.items()}
            work = new
        return False

    def kernel(self) -> list[dict[int, Fraction]]:
        """Kernel basis, one vector per free column.

        Back-substitution runs over pivots in descending column order, which
        is valid because each pivot row only touches columns at or beyond
        its pivot.
        """
        free_cols = [c for c in range(self.cols) if c not in self._by_col]
        desc = sorted(self._by_col, reverse=True)
        basis = []
        for f in free_cols:
            x: dict[int, Fraction] = {f: ONE}
            for c in desc:
                if c > f:
                    continue    # row touches only columns >= c > f: no constraint
                row = self._by_col[c]
                s = ZERO
                for cc, vv in row.items():
                    if cc == c:
                        continue
                    xv = x.get(cc)
                    if xv:
                        s += vv * xv
                if s:
                    x[c] = -s / row[c]
            basis.append(x)
        return basis


def rank(matrix: SparseMatrix) -> int:
    ech = _Echelon(matrix.cols)
    for row in matrix.row_dicts():
        if row:
            ech.add_row(row)
    return ech.rank


def kernel_basis(matrix: SparseMatrix, check: bool = True) -> SubspaceBasis:
    """Exact basis of {v : Mv = 0}; dimension is cols - rank(M)."""
    ech = _Echelon(matrix.cols)
    for row in matrix.row_dicts():
        if row:
            ech.add_row(row)
    vecs = ech.kernel()
    if check:
        for v in vecs:
            if matrix.matvec(v):
                raise AssertionError("kernel vector fails Mv = 0; elimination bug")
    return SubspaceBasis(matrix.cols, vecs)


# ---------------------------------------------------------------------------
# independent dense oracle (kept naive on purpose)
# ---------------------------------------------------------------------------

def dense_rank_oracle(rows: list[list[Fraction]]) -> int:
    """Plain dense Gaussian elimination over Fraction, no pivoting tricks."""
    m = [list(map(Fraction, r)) for r in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    r = 0
    for c in range(n_cols):
        piv = None
        for i in range(r, n_rows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        for i in range(r + 1, n_rows):
            if m[i][c]:
                f = m[i][c] / pv
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        if r == n_rows:
            break
    return r


# ---------------------------------------------------------------------------
# modular ranks
# ---------------------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def random_prime_31bit(rng: random.Random) -> int:
    while True:
        cand = rng.randrange(1 << 30, 1 << 31) | 1
        if is_prime(cand):
            return cand


def _rows_mod_p(row_dicts, prime: int):
    out = []
    for row in row_dicts:
        red: dict[int, int] = {}
        for c, v in row.items():
            if isinstance(v, Fraction):
                if v.denominator % prime == 0:
                    raise BadPrimeError(f"denominator divisible by {prime}")
                x = v.numerator * pow(v.denominator, -1, prime) % prime
            else:
                x = v % prime
            if x:
                red[c] = x
        out.append(red)
    return out


def rank_mod_p(matrix: SparseMatrix, prime: int) -> int:
    """Rank of the matrix reduced mod an odd prime; never exceeds the exact rank."""
    if prime < 3 or not is_prime(prime):
        raise BadPrimeError(f"{prime} is not an odd prime")
    return rows_rank_mod_p(matrix.row_dicts(), matrix.cols, prime)


def rows_rank_mod_p(row_dicts, cols: int, prime: int,
                    stop_at: int | None = None) -> int:
    """Dense numpy elimination mod p over the given sparse rows.

    ``stop_at``: early exit once the rank reaches this value (used by the
    vanishing certificates, where full column rank is the expected outcome).
    """
    reduced = [r for r in _rows_mod_p(row_dicts, prime) if r]
    if not reduced or cols == 0:
        return 0
    # dedupe identical rows cheaply
    seen = set()
    uniq = []
    for r in reduced:
        key = tuple(sorted(r.items()))
        if key not in seen:
            seen.add(key)
            uniq.append(r)
    a = np.zeros((len(uniq), cols), dtype=np.int64)
    for i, r in enumerate(uniq):
        for c, v in r.items():
            a[i, c] = v
    return _numpy_rank_mod_p(a, prime, stop_at)


def _numpy_rank_mod_p(a: np.ndarray, p: int, stop_at: int | None = None) -> int:
    m, n = a.shape
    r = 0
    for c in range(n):
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv], :] = a[[piv, r], :]
        inv = pow(int(a[r, c]), -1, p)
        a[r, :] = a[r, :] * inv % p
        rest = np.nonzero(a[r + 1:, c])[0]
        if rest.size:
            idx = rest + r + 1
            a[idx, :] = (a[idx, :] - np.outer(a[idx, c], a[r, :])) % p
        r += 1
        if r == m or (stop_at is not None and r >= stop_at):
            break
    return r


def two_prime_rank(row_dicts, cols: int, seed: int = 0,
                   stop_at: int | None = None):
    """Rank via two independent random 31-bit primes.

    Returns (rank, agreed).  ``agreed`` False means the primes disagreed and
    the caller must fall back to exact arithmetic; a prime hitting a stored
    denominator is replaced by a fresh one.
    """
    rng = random.Random(f"two-prime:{seed}")
    ranks = []
    while len(ranks) < 2:
        p = random_prime_31bit(rng)
        try:
            ranks.append(rows_rank_mod_p(row_dicts, cols, p, stop_at))
        except BadPrimeError:
            continue
    return ranks[0], ranks[0] == ranks[1]
