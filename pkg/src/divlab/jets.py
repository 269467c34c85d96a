"""Truncated multivariate polynomial (jet) arithmetic over exact rationals.

A ``JetPoly`` is a Taylor polynomial in ``num_vars`` variables, truncated at
total degree ``order``.  Coefficients are ``fractions.Fraction``; no floating
point ever enters.  Monomials are keyed by exponent tuples and iterated in
graded lexicographic order so that serialized output is byte-stable.

The truncation order is part of the type: binary operations refuse to mix
orders, which turns the classic "silently dropped jet order" bug into an
immediate error.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

Exponent = tuple  # tuple[int, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class JetOrderError(ValueError):
    """Raised when jets of different num_vars/order meet in a binary op."""


class SingularJetError(ZeroDivisionError):
    """Raised when inverting a jet (or jet matrix) singular at the origin."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"exact scalar expected, got {type(x).__name__}")


def grlex_key(exponent: Exponent):
    """Sort key for graded lexicographic monomial order."""
    return (sum(exponent), exponent)


class JetPoly:
    """Polynomial in ``num_vars`` variables truncated at total degree ``order``."""

    __slots__ = ("num_vars", "order", "terms")

    def __init__(self, num_vars: int, order: int,
                 terms: Mapping[Exponent, Fraction] | None = None):
        if num_vars < 0 or order < 0:
            raise ValueError("num_vars and order must be non-negative")
        self.num_vars = num_vars
        self.order = order
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exp, coeff in terms.items():
                exp = tuple(exp)
                if len(exp) != num_vars:
                    raise ValueError(f"exponent {exp} has wrong arity")
                if sum(exp) > order:
                    continue
                c = _as_fraction(coeff)
                if c:
                    clean[exp] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value, num_vars: int, order: int) -> "JetPoly":
        c = _as_fraction(value)
        exp = (0,) * num_vars
        return cls(num_vars, order, {exp: c} if c else {})

    @classmethod
    def variable(cls, i: int, num_vars: int, order: int) -> "JetPoly":
        if not 0 <= i < num_vars:
            raise ValueError(f"variable index {i} out of range")
        exp = tuple(1 if j == i else 0 for j in range(num_vars))
        return cls(num_vars, order, {exp: ONE})

    # -- basic queries -----------------------------------------------------

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * self.num_vars, ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coefficient(self, exponent: Exponent) -> Fraction:
        return self.terms.get(tuple(exponent), ZERO)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    def _check_compatible(self, other: "JetPoly"):
        if self.num_vars != other.num_vars or self.order != other.order:
            raise JetOrderError(
                f"jet mismatch: ({self.num_vars} vars, order {self.order}) vs "
                f"({other.num_vars} vars, order {other.order})")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = JetPoly.constant(other, self.num_vars, self.order)
        if not isinstance(other, JetPoly):
            return NotImplemented
        self._check_compatible(other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp, ZERO) + c
            if s:
                terms[exp] = s
            else:
                terms.pop(exp, None)
        return JetPoly(self.num_vars, self.order, terms)

    __radd__ = __add__

    def __neg__(self):
        return JetPoly(self.num_vars, self.order,
                       {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = JetPoly.constant(other, self.num_vars, self.order)
        if not isinstance(other, JetPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if not c:
                return JetPoly(self.num_vars, self.order)
            return JetPoly(self.num_vars, self.order,
                           {e: c * v for e, v in self.terms.items()})
        if not isinstance(other, JetPoly):
            return NotImplemented
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            return self * (ONE / c)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = JetPoly.constant(other, self.num_vars, self.order)
        if not isinstance(other, JetPoly):
            return NotImplemented
        return (self.num_vars == other.num_vars and self.order == other.order
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.num_vars, self.order, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return "JetPoly(0)"
        bits = []
        for exp, c in self.sorted_terms():
            mono = "*".join(f"x{i}^{e}" if e > 1 else f"x{i}"
                            for i, e in enumerate(exp) if e)
            bits.append(f"{c}" + (f"*{mono}" if mono else ""))
        return "JetPoly(" + " + ".join(bits) + f"; order={self.order})"

    # -- truncation --------------------------------------------------------

    def truncate(self, order: int) -> "JetPoly":
        """Explicitly lower the truncation order (never raises it silently)."""
        if order > self.order:
            raise JetOrderError(
                f"cannot raise truncation order {self.order} -> {order}")
        return JetPoly(self.num_vars, order,
                       {e: c for e, c in self.terms.items() if sum(e) <= order})

    def eval_at_zero(self) -> Fraction:
        return self.constant_term()


def jet_mul(a: JetPoly, b: JetPoly) -> JetPoly:
    """Truncated product of two jets sharing num_vars and order."""
    a._check_compatible(b)
    order = a.order
    terms: dict[Exponent, Fraction] = {}
    # iterate the smaller factor on the outside
    if len(a.terms) > len(b.terms):
        a, b = b, a
    b_items = [(e, sum(e), c) for e, c in b.terms.items()]
    for ea, ca in a.terms.items():
        da = sum(ea)
        room = order - da
        for eb, db, cb in b_items:
            if db > room:
                continue
            exp = tuple(x + y for x, y in zip(ea, eb))
            s = terms.get(exp, ZERO) + ca * cb
            if s:
                terms[exp] = s
            else:
                del terms[exp]
    return JetPoly(a.num_vars, order, terms)


def jet_partial(f: JetPoly, var: int) -> JetPoly:
    """Formal partial derivative; the result carries order reduced by one."""
    if not 0 <= var < f.num_vars:
        raise ValueError(f"variable index {var} out of range for {f.num_vars} vars")
    new_order = max(f.order - 1, 0)
    terms: dict[Exponent, Fraction] = {}
    for exp, c in f.terms.items():
        k = exp[var]
        if k == 0:
            continue
        new = list(exp)
        new[var] = k - 1
        terms[tuple(new)] = c * k
    return JetPoly(f.num_vars, new_order, terms)


def jet_compose(f: JetPoly, subs: list[JetPoly]) -> JetPoly:
    """Substitute ``subs[i]`` for variable i of ``f``, truncated at f.order.

    Every substituted series must have zero constant term (the change of
    coordinates fixes the origin), the same number of variables among
    themselves, and order equal to ``f.order``.
    """
    if len(subs) != f.num_vars:
        raise ValueError(f"need {f.num_vars} substitutions, got {len(subs)}")
    order = f.order
    if f.num_vars == 0:
        return JetPoly(0, order, dict(f.terms))
    out_vars = subs[0].num_vars
    for s in subs:
        if s.num_vars != out_vars or s.order != order:
            raise JetOrderError("substituted jets must share num_vars and order")
        if s.constant_term():
            raise ValueError("invalid chart: substitution has nonzero constant term")
    one = JetPoly.constant(1, out_vars, order)
    # cached powers subs[i]^k, k = 0..order (degree > order vanishes anyway)
    powers: list[list[JetPoly]] = []
    for s in subs:
        ps = [one]
        for _ in range(order):
            ps.append(jet_mul(ps[-1], s))
        powers.append(ps)
    result = JetPoly(out_vars, order)
    for exp, c in f.terms.items():
        term = JetPoly.constant(c, out_vars, order)
        for i, e in enumerate(exp):
            if e:
                term = jet_mul(term, powers[i][e])
        result = result + term
    return result


def jet_scalar_inverse(f: JetPoly) -> JetPoly:
    """1/f as a jet; requires f(0) != 0.  Exact Neumann series.

    With u = f/f(0) - 1 (zero constant term, hence nilpotent modulo the
    truncation), 1/f = (1/f(0)) * sum_t (-u)^t.
    """
    c = f.constant_term()
    if not c:
        raise SingularJetError("jet has zero constant term")
    u = f * (ONE / c) - 1
    acc = JetPoly.constant(1, f.num_vars, f.order)
    power = JetPoly.constant(1, f.num_vars, f.order)
    for _ in range(f.order):
        power = jet_mul(power, -u)
        if power.is_zero():
            break
        acc = acc + power
    return acc * (ONE / c)


def jet_inverse_matrix(mat: list[list[JetPoly]]) -> list[list[JetPoly]]:
    """Inverse of a square matrix of jets, exact up to the truncation order.

    Splits M = M0 + N with M0 the constant-term matrix and N nilpotent
    (zero constant term), then expands (I + M0^-1 N)^-1 as a finite
    Neumann series.  Requires M0 invertible over the rationals.
    """
    n = len(mat)
    if any(len(row) != n for row in mat):
        raise ValueError("matrix must be square")
    if n == 0:
        return []
    nv, order = mat[0][0].num_vars, mat[0][0].order
    for row in mat:
        for f in row:
            if f.num_vars != nv or f.order != order:
                raise JetOrderError("matrix entries must share num_vars and order")
    m0 = [[mat[i][j].constant_term() for j in range(n)] for i in range(n)]
    m0_inv = _invert_rational_matrix(m0)
    if m0_inv is None:
        raise SingularJetError("matrix is singular at the origin")
    zero = JetPoly(nv, order)
    m0i_jet = [[JetPoly.constant(m0_inv[i][j], nv, order) for j in range(n)]
               for i in range(n)]
    # E = M0^-1 N = M0^-1 M - I ; has zero constant term
    e = _mat_mul(m0i_jet, mat, zero)
    for i in range(n):
        e[i][i] = e[i][i] - 1
    # (I + E)^-1 = sum_t (-E)^t, terminates since E is nilpotent mod order
    acc = [[JetPoly.constant(1 if i == j else 0, nv, order) for j in range(n)]
           for i in range(n)]
    power = [[JetPoly.constant(1 if i == j else 0, nv, order) for j in range(n)]
             for i in range(n)]
    for _ in range(order):
        power = _mat_mul(power, e, zero)
        power = [[-power[i][j] for j in range(n)] for i in range(n)]
        if all(power[i][j].is_zero() for i in range(n) for j in range(n)):
            break
        acc = [[acc[i][j] + power[i][j] for j in range(n)] for i in range(n)]
    return _mat_mul(acc, m0i_jet, zero)


def _mat_mul(a, b, zero: JetPoly):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            s = zero
            for k in range(n):
                if a[i][k].is_zero() or b[k][j].is_zero():
                    continue
                s = s + jet_mul(a[i][k], b[k][j])
            row.append(s)
        out.append(row)
    return out


def _invert_rational_matrix(m: list[list[Fraction]]):
    """Dense Gauss-Jordan over Fraction; returns None if singular."""
    n = len(m)
    aug = [[Fraction(m[i][j]) for j in range(n)]
           + [ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col]:
                piv = r
                break
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]
