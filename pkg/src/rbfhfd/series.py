"""Truncated power series in t = (eps*h)**2 with exact rational coefficients.

All symbolic weights in the package live in this ring.  A
:class:`TruncatedSeries` holds the coefficients of ``t**0 ... t**(N-1)``;
everything beyond is unknown and dropped by every operation.

Linear systems over the ring are solved by :func:`series_solve`, which runs
Gaussian elimination over truncated *Laurent* series and tracks how much
absolute precision each pivot consumes.  Collocation systems of RBF
formulas are singular at ``t = 0`` (every kernel tends to a constant), so
plain constant-term pivoting is not enough; the solution itself is still
analytic in ``t`` and comes out with a known number of exact terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

__all__ = [
    "Rational",
    "TruncatedSeries",
    "NotInvertible",
    "FlatLimitSingular",
    "series_exp_neg",
    "series_binomial",
    "series_sqrt_one_plus",
    "series_eval",
    "series_solve",
    "format_rational",
    "parse_rational",
]

Rational = Fraction
RationalLike = Union[int, Fraction]


class NotInvertible(ArithmeticError):
    """Series (or jet) with zero constant term passed to an inversion."""


class FlatLimitSingular(ArithmeticError):
    """Series linear system is singular, or its solution has a pole at t = 0."""


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def parse_rational(token: str) -> Fraction:
    return Fraction(token.strip())


@dataclass(frozen=True)
class TruncatedSeries:
    """Formal series ``sum(coeffs[n] * t**n) + O(t**N)``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(Fraction(c) for c in self.coeffs))
        if not self.coeffs:
            raise ValueError("a truncated series needs at least one coefficient")

    @classmethod
    def constant(cls, value: RationalLike, n: int) -> "TruncatedSeries":
        return cls((value,) + (0,) * (n - 1))

    @classmethod
    def monomial(cls, power: int, n: int, coeff: RationalLike = 1) -> "TruncatedSeries":
        c = [0] * n
        if power < n:
            c[power] = coeff
        return cls(c)

    @property
    def trunc_len(self) -> int:
        return len(self.coeffs)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int) -> Fraction:
        return self.coeffs[n]

    def _check(self, other: "TruncatedSeries") -> None:
        if other.trunc_len != self.trunc_len:
            raise ValueError(
                f"truncation mismatch: {self.trunc_len} vs {other.trunc_len}"
            )

    def __add__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return TruncatedSeries(a + b for a, b in zip(self.coeffs, other.coeffs))
        if isinstance(other, (int, Fraction)):
            return TruncatedSeries((self.coeffs[0] + other,) + self.coeffs[1:])
        return NotImplemented

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-a for a in self.coeffs)

    def __sub__(self, other):
        if isinstance(other, (TruncatedSeries, int, Fraction)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        self._check(other)
        return TruncatedSeries(_cauchy(self.coeffs, other.coeffs, self.trunc_len))

    __rmul__ = __mul__

    def scale(self, q: RationalLike) -> "TruncatedSeries":
        return TruncatedSeries(a * q for a in self.coeffs)

    def shift(self, k: int) -> "TruncatedSeries":
        """Multiply by ``t**k`` (k >= 0), keeping the truncation length."""
        n = self.trunc_len
        return TruncatedSeries(((0,) * k + self.coeffs)[:n])

    def invert(self) -> "TruncatedSeries":
        return TruncatedSeries(_inverse(self.coeffs, self.trunc_len))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        if isinstance(other, TruncatedSeries):
            return self * other.invert()
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        out = TruncatedSeries.constant(1, self.trunc_len)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def truncate(self, n: int) -> "TruncatedSeries":
        if n > self.trunc_len:
            raise ValueError("cannot extend a truncated series")
        return TruncatedSeries(self.coeffs[:n])

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __call__(self, t: float) -> float:
        return series_eval(self, t)

    def to_tokens(self) -> list[str]:
        return [format_rational(c) for c in self.coeffs]

    @classmethod
    def from_tokens(cls, tokens: Iterable[str]) -> "TruncatedSeries":
        return cls(parse_rational(s) for s in tokens)

    def __str__(self) -> str:
        return format_series(self)


def format_series(s: TruncatedSeries, var: str = "t", terms: int | None = None) -> str:
    """Human-readable ``a + b t + c t^2`` rendering (zero terms skipped)."""
    parts = []
    for n, c in enumerate(s.coeffs[: terms if terms is not None else None]):
        if c == 0:
            continue
        mag = abs(c)
        if n == 0:
            body = str(mag)
        elif mag == 1:
            body = var if n == 1 else f"{var}^{n}"
        else:
            body = f"{mag} {var}" if n == 1 else f"{mag} {var}^{n}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(("+ " if c > 0 else "- ") + body)
    return " ".join(parts) if parts else "0"


def _cauchy(a: Sequence, b: Sequence, n: int) -> list:
    out = [Fraction(0)] * n
    nz_b = [(j, bj) for j, bj in enumerate(b[:n]) if bj]
    for i, ai in enumerate(a[:n]):
        if not ai:
            continue
        lim = n - i
        for j, bj in nz_b:
            if j >= lim:
                break
            out[i + j] += ai * bj
    return out


def _inverse(a: Sequence, n: int) -> list:
    if not a[0]:
        raise NotInvertible("series with zero constant term has no inverse")
    inv0 = 1 / Fraction(a[0])
    r = [inv0]
    for k in range(1, n):
        acc = Fraction(0)
        for j in range(1, min(k, len(a) - 1) + 1):
            if a[j]:
                acc += a[j] * r[k - j]
        r.append(-acc * inv0)
    return r


def series_exp_neg(k: int, n: int) -> TruncatedSeries:
    """``exp(-k t)``: coefficient of ``t**j`` is ``(-k)**j / j!``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    c = [Fraction(1)]
    for j in range(1, n):
        c.append(c[-1] * Fraction(-k, j))
    return TruncatedSeries(c)


def series_binomial(k: int, a: RationalLike, n: int) -> TruncatedSeries:
    """``(1 + k t)**a`` for rational exponent ``a``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    a = Fraction(a)
    c = [Fraction(1)]
    for j in range(1, n):
        c.append(c[-1] * (a - j + 1) / j * k)
    return TruncatedSeries(c)


def series_sqrt_one_plus(k: int, n: int) -> TruncatedSeries:
    """``(1 + k t)**(1/2)``, the multiquadric profile at squared distance k."""
    return series_binomial(k, Fraction(1, 2), n)


def series_eval(a: TruncatedSeries, t: float):
    """Horner evaluation of the retained polynomial.

    Floats give a float result; an ``mpmath.mpf`` argument keeps the
    working precision of mpmath.
    """
    acc = 0
    for c in reversed(a.coeffs):
        acc = acc * t + (float(c) if isinstance(t, float) else _as_number(c, t))
    return acc


def _as_number(c: Fraction, like):
    if isinstance(like, int):
        return c
    try:
        import mpmath

        if isinstance(like, mpmath.mpf):
            return mpmath.mpf(c.numerator) / c.denominator
    except ImportError:  # pragma: no cover
        pass
    return float(c)


# ---------------------------------------------------------------------------
# Laurent elimination


class _Laurent:
    """``t**val * (c[0] + c[1] t + ...) + O(t**(val + len(c)))``.

    ``c[0]`` is nonzero unless the value is an unresolved zero, in which
    case ``c`` is empty and only the absolute precision ``prec`` is known.
    """

    __slots__ = ("val", "c", "prec")

    def __init__(self, val: int, c: list, prec: int | None = None):
        i = 0
        while i < len(c) and not c[i]:
            i += 1
        if i == len(c):
            self.val = None
            self.c = []
            self.prec = val + len(c) if prec is None else prec
        else:
            self.val = val + i
            self.c = c[i:]
            self.prec = val + len(c)

    @property
    def is_zero(self) -> bool:
        return self.val is None

    @classmethod
    def exact_zero(cls, prec: int) -> "_Laurent":
        return cls(0, [], prec)

    def __add__(self, o: "_Laurent") -> "_Laurent":
        prec = min(self.prec, o.prec)
        if self.is_zero and o.is_zero:
            return _Laurent.exact_zero(prec)
        lo = min(v for v in (self.val, o.val) if v is not None)
        if prec <= lo:
            return _Laurent.exact_zero(prec)
        out = [Fraction(0)] * (prec - lo)
        for x in (self, o):
            if x.is_zero:
                continue
            off = x.val - lo
            for j, cj in enumerate(x.c):
                if off + j >= len(out):
                    break
                out[off + j] += cj
        return _Laurent(lo, out)

    def __neg__(self) -> "_Laurent":
        if self.is_zero:
            return _Laurent.exact_zero(self.prec)
        return _Laurent(self.val, [-x for x in self.c])

    def __sub__(self, o: "_Laurent") -> "_Laurent":
        return self + (-o)

    def __mul__(self, o: "_Laurent") -> "_Laurent":
        if self.is_zero or o.is_zero:
            # 0 * x is known to t**(prec(0) + val(x)) at best.
            if self.is_zero and o.is_zero:
                return _Laurent.exact_zero(self.prec + o.prec)
            z, x = (self, o) if self.is_zero else (o, self)
            return _Laurent.exact_zero(z.prec + x.val)
        n = min(len(self.c), len(o.c))
        return _Laurent(self.val + o.val, _cauchy(self.c, o.c, n))

    def inverse(self) -> "_Laurent":
        if self.is_zero:
            raise FlatLimitSingular("pivot is zero to working precision")
        return _Laurent(-self.val, _inverse(self.c, len(self.c)))


# Absolute precision standing in for "known exactly".
_EXACT = 1 << 40


def _entry(e: TruncatedSeries) -> _Laurent:
    # All-zero inputs are structural zeros of the assembled systems.
    if e.is_zero():
        return _Laurent.exact_zero(_EXACT)
    return _Laurent(0, list(e.coeffs))


def series_solve(
    A: Sequence[Sequence[TruncatedSeries]], b: Sequence[TruncatedSeries]
) -> list[TruncatedSeries]:
    """Solve ``A x = b`` over truncated series.

    Elimination pivots on the entry of lowest t-valuation in the current
    column (ties broken by row order), so ``A(0)`` may be singular as long
    as ``A(t)`` is not.  Entries that are zero in every retained
    coefficient are taken to be exact zeros.  The returned series are exact in every retained
    coefficient; their common length is the input truncation minus the
    precision consumed by the pivots, so callers that need ``N`` terms must
    feed longer entries (see :func:`solve_to_length`).

    Raises
    ------
    FlatLimitSingular
        If no usable pivot exists at the working precision, or if the
        solution has a pole at ``t = 0``.
    """
    n = len(A)
    if any(len(row) != n for row in A) or len(b) != n:
        raise ValueError("series_solve needs a square system")
    N = b[0].trunc_len
    for row in A:
        for e in row:
            if e.trunc_len != N:
                raise ValueError("all entries must share trunc_len")
    M = [[_entry(e) for e in row] + [_entry(bi)] for row, bi in zip(A, b)]

    for col in range(n):
        best = None
        for r in range(col, n):
            e = M[r][col]
            if not e.is_zero and (best is None or e.val < M[best][col].val):
                best = r
        if best is None:
            raise FlatLimitSingular(f"no pivot available in column {col}")
        M[col], M[best] = M[best], M[col]
        inv = M[col][col].inverse()
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r == col:
                continue
            f = M[r][col]
            if f.is_zero and f.prec >= _EXACT:
                continue
            M[r] = [x - f * y for x, y in zip(M[r], M[col])]

    out = []
    prec = min(M[i][n].prec for i in range(n))
    for i in range(n):
        x = M[i][n]
        if not x.is_zero and x.val < 0:
            raise FlatLimitSingular(f"unknown {i} has a pole of order {-x.val} at t = 0")
    if prec <= 0:
        raise FlatLimitSingular("all precision consumed by pivots")
    for i in range(n):
        x = M[i][n]
        coeffs = [Fraction(0)] * prec
        if not x.is_zero:
            for j, cj in enumerate(x.c):
                if x.val + j < prec:
                    coeffs[x.val + j] = cj
        out.append(TruncatedSeries(coeffs))
    return out


def solve_to_length(build, n_terms: int, pad: int = 8, max_pad: int = 64):
    """Call ``build(N)`` for growing ``N`` until :func:`series_solve` yields
    ``n_terms`` exact coefficients; return the solution truncated to that.

    ``build`` returns ``(A, b)`` with entries of truncation ``N``.
    """
    while True:
        A, b = build(n_terms + pad)
        try:
            x = series_solve(A, b)
        except FlatLimitSingular:
            # may only be a truncation artefact; retry longer before giving up
            if pad >= max_pad:
                raise
            pad *= 2
            continue
        if x[0].trunc_len >= n_terms:
            return [xi.truncate(n_terms) for xi in x], pad
        lost = n_terms + pad - x[0].trunc_len
        if pad >= max_pad:
            raise FlatLimitSingular(f"precision loss exceeds {max_pad} terms")
        pad = max(pad * 2, lost + 2)


def factorial(n: int) -> int:
    return math.factorial(n)
