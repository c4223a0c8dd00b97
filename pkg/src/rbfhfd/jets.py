"""Truncated Taylor jets for exact high-order derivatives of the test functions.

A :class:`Jet1` holds ``c_k = u^(k)(x0) / k!`` for ``k <= K``; a :class:`Jet2`
holds ``c[i][j] = u^(i,j)(x0, y0) / (i! j!)`` for ``i + j <= K``.  Coefficients
are floats or ``mpmath.mpf``; the arithmetic is the same for both, the
backend (``math`` or ``mpmath``) is picked from the type of the centre.

Error model: each coefficient carries the rounding of the working precision
amplified by the recurrences, roughly ``K * eps_mach * max|c|`` for the
compositions used here.  With float64 that is ample for 12th derivatives of
the catalogued functions; the truncation-error analysis uses mpmath.

Extension point: a new test function is a builder ``f(X) -> jet`` written
with the jet operations, registered in ``_BUILDERS_1D``/``_BUILDERS_2D``
together with its default point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction

from .series import NotInvertible

__all__ = [
    "Jet1",
    "Jet2",
    "TestFunctionId",
    "OutOfOrder",
    "sin",
    "cos",
    "exp",
    "tanh",
    "power",
    "reciprocal",
    "testfn_jet1",
    "testfn_jet2",
    "testfn_jet",
    "derivative_from_jet",
    "default_point",
]


class OutOfOrder(IndexError):
    """Derivative requested beyond the jet's truncation order."""


def _backend(x):
    if type(x).__module__.startswith("mpmath"):
        import mpmath

        return mpmath
    return math


def _const(q, like):
    """Exact rational ``q`` in the number type of ``like``."""
    q = Fraction(q)
    m = _backend(like)
    if m is math:
        return q.numerator / q.denominator
    return m.mpf(q.numerator) / q.denominator


# ---------------------------------------------------------------------------
# univariate


@dataclass(frozen=True)
class Jet1:
    center: object
    coeffs: tuple

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def variable(cls, x0, K: int) -> "Jet1":
        zero = 0 * x0
        return cls(x0, (x0, zero + 1) + (zero,) * (K - 1) if K >= 1 else (x0,))

    @classmethod
    def constant(cls, c, x0, K: int) -> "Jet1":
        zero = 0 * x0
        return cls(x0, (zero + c,) + (zero,) * K)

    def _lift(self, o) -> "Jet1":
        if isinstance(o, Jet1):
            if o.K != self.K:
                raise ValueError("jets must share the truncation order")
            return o
        if isinstance(o, Fraction):
            o = _const(o, self.coeffs[0])
        return Jet1.constant(o, self.center, self.K)

    def __add__(self, o):
        o = self._lift(o)
        return Jet1(self.center, tuple(a + b for a, b in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Jet1(self.center, tuple(-a for a in self.coeffs))

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        if not isinstance(o, Jet1):
            if isinstance(o, Fraction):
                o = _const(o, self.coeffs[0])
            return Jet1(self.center, tuple(a * o for a in self.coeffs))
        o = self._lift(o)
        a, b = self.coeffs, o.coeffs
        out = [sum((a[i] * b[k - i] for i in range(k + 1)), 0 * a[0]) for k in range(len(a))]
        return Jet1(self.center, tuple(out))

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Jet1):
            return self * reciprocal(o)
        return self * (1 / (_const(o, self.coeffs[0]) if isinstance(o, Fraction) else o))

    def __rtruediv__(self, o):
        return reciprocal(self) * o

    def __pow__(self, n):
        if isinstance(n, int) and n >= 0:
            out = Jet1.constant(1, self.center, self.K)
            for _ in range(n):
                out = out * self
            return out
        return power(self, n)

    def derivative(self, k: int):
        return derivative_from_jet(self, k)


def _reciprocal1(a: tuple) -> list:
    if a[0] == 0:
        raise NotInvertible("reciprocal of a jet with zero constant term")
    r = [1 / a[0]]
    for k in range(1, len(a)):
        r.append(-sum((a[j] * r[k - j] for j in range(1, k + 1)), 0 * a[0]) / a[0])
    return r


def _exp1(a: tuple) -> list:
    m = _backend(a[0])
    b = [m.exp(a[0])]
    for k in range(1, len(a)):
        b.append(sum((j * a[j] * b[k - j] for j in range(1, k + 1)), 0 * a[0]) / k)
    return b


def _sincos1(a: tuple) -> tuple[list, list]:
    m = _backend(a[0])
    s, c = [m.sin(a[0])], [m.cos(a[0])]
    for k in range(1, len(a)):
        s.append(sum((j * a[j] * c[k - j] for j in range(1, k + 1)), 0 * a[0]) / k)
        c.append(-sum((j * a[j] * s[k - j] for j in range(1, k + 1)), 0 * a[0]) / k)
    return s, c


def _tanh1(a: tuple) -> list:
    # T' = (1 - T^2) a'
    m = _backend(a[0])
    T = [m.tanh(a[0])]
    W = [1 - T[0] * T[0]]
    for k in range(1, len(a)):
        T.append(sum((j * a[j] * W[k - j] for j in range(1, k + 1)), 0 * a[0]) / k)
        W.append(-sum((T[i] * T[k - i] for i in range(k + 1)), 0 * a[0]))
    return T


def _power1(a: tuple, r) -> list:
    # b = a^r: k a0 b_k = sum_j (r j - (k - j)) a_j b_{k-j}
    if a[0] == 0:
        raise NotInvertible("power of a jet with zero constant term")
    b = [a[0] ** r]
    for k in range(1, len(a)):
        acc = sum(((r * j - (k - j)) * a[j] * b[k - j] for j in range(1, k + 1)), 0 * a[0])
        b.append(acc / (k * a[0]))
    return b


# ---------------------------------------------------------------------------
# bivariate


@dataclass(frozen=True)
class Jet2:
    center: tuple
    coeffs: tuple  # coeffs[i][j], i + j <= K

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    @classmethod
    def _zeros(cls, like, K: int) -> list:
        zero = 0 * like
        return [[zero] * (K + 1 - i) for i in range(K + 1)]

    @classmethod
    def variable(cls, x0, y0, K: int, axis: int) -> "Jet2":
        c = cls._zeros(x0, K)
        c[0][0] = (x0, y0)[axis]
        if K >= 1:
            if axis == 0:
                c[1][0] = c[1][0] + 1
            else:
                c[0][1] = c[0][1] + 1
        return cls((x0, y0), tuple(tuple(r) for r in c))

    @classmethod
    def constant(cls, v, center, K: int) -> "Jet2":
        c = cls._zeros(center[0], K)
        c[0][0] = c[0][0] + v
        return cls(tuple(center), tuple(tuple(r) for r in c))

    @property
    def value(self):
        return self.coeffs[0][0]

    def _lift(self, o) -> "Jet2":
        if isinstance(o, Jet2):
            if o.K != self.K:
                raise ValueError("jets must share the truncation order")
            return o
        if isinstance(o, Fraction):
            o = _const(o, self.value)
        return Jet2.constant(o, self.center, self.K)

    def _map(self, f) -> "Jet2":
        return Jet2(self.center, tuple(tuple(f(v) for v in row) for row in self.coeffs))

    def __add__(self, o):
        o = self._lift(o)
        return Jet2(self.center, tuple(tuple(a + b for a, b in zip(r, s))
                                       for r, s in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return self._map(lambda v: -v)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        if not isinstance(o, Jet2):
            if isinstance(o, Fraction):
                o = _const(o, self.value)
            return self._map(lambda v: v * o)
        o = self._lift(o)
        K = self.K
        a, b = self.coeffs, o.coeffs
        # skip structural zeros; the variable jets are very sparse
        nz_a = [(i, j, v) for i, r in enumerate(a) for j, v in enumerate(r) if v != 0]
        nz_b = [(i, j, v) for i, r in enumerate(b) for j, v in enumerate(r) if v != 0]
        out = Jet2._zeros(self.value, K)
        for i1, j1, u in nz_a:
            for i2, j2, v in nz_b:
                if i1 + i2 + j1 + j2 <= K:
                    out[i1 + i2][j1 + j2] += u * v
        return Jet2(self.center, tuple(tuple(r) for r in out))

    __rmul__ = __mul__

    def __truediv__(self, o):
        if isinstance(o, Jet2):
            return self * reciprocal(o)
        return self * (1 / (_const(o, self.value) if isinstance(o, Fraction) else o))

    def __rtruediv__(self, o):
        return reciprocal(self) * o

    def __pow__(self, n):
        if isinstance(n, int) and n >= 0:
            out = Jet2.constant(1, self.center, self.K)
            for _ in range(n):
                out = out * self
            return out
        return power(self, n)

    def derivative(self, index):
        return derivative_from_jet(self, index)

    def laplacian(self):
        return derivative_from_jet(self, (2, 0)) + derivative_from_jet(self, (0, 2))


def _compose2(a: Jet2, g: list) -> Jet2:
    """``G(a)`` from the Taylor coefficients ``g`` of ``G`` at ``a``'s value."""
    K = a.K
    tail = a - a.value
    out = Jet2.constant(g[0], a.center, K)
    p = Jet2.constant(1, a.center, K)
    for n in range(1, K + 1):
        p = p * tail
        out = out + p * g[n]
    return out


def _univariate(a, rule):
    """Apply a univariate coefficient rule to a Jet1 or (by composition) a Jet2."""
    if isinstance(a, Jet1):
        return Jet1(a.center, tuple(rule(a.coeffs)))
    if isinstance(a, Jet2):
        x = Jet1.variable(a.value, a.K)
        return _compose2(a, rule(x.coeffs))
    raise TypeError(f"expected a jet, got {type(a).__name__}")


def reciprocal(a):
    return _univariate(a, _reciprocal1)


def exp(a):
    return _univariate(a, _exp1)


def sin(a):
    return _univariate(a, lambda c: _sincos1(c)[0])


def cos(a):
    return _univariate(a, lambda c: _sincos1(c)[1])


def tanh(a):
    return _univariate(a, _tanh1)


def power(a, r):
    return _univariate(a, lambda c: _power1(c, r))


def derivative_from_jet(jet, index):
    """``u^(k)`` (Jet1, integer ``k``) or ``u^(i,j)`` (Jet2, pair)."""
    if isinstance(jet, Jet1):
        k = int(index if not isinstance(index, tuple) else index[0])
        if k < 0 or k > jet.K:
            raise OutOfOrder(f"derivative {k} beyond jet order {jet.K}")
        return jet.coeffs[k] * math.factorial(k)
    i, j = index
    if i < 0 or j < 0 or i + j > jet.K:
        raise OutOfOrder(f"derivative ({i},{j}) beyond jet order {jet.K}")
    return jet.coeffs[i][j] * (math.factorial(i) * math.factorial(j))


# ---------------------------------------------------------------------------
# test functions


class TestFunctionId(enum.Enum):
    U1 = "u1"
    U2 = "u2"
    U4 = "u4"
    U5 = "u5"
    U6 = "u6"
    U7 = "u7"
    U8 = "u8"
    U9 = "u9"

    __test__ = False  # not a pytest class

    @classmethod
    def parse(cls, name: "str | TestFunctionId") -> "TestFunctionId":
        if isinstance(name, cls):
            return name
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ValueError(f"unknown test function {name!r}") from None

    @property
    def dim(self) -> int:
        return 1 if self in (TestFunctionId.U1, TestFunctionId.U2) else 2


Q = Fraction


def _u1(x):
    return sin(x * x)


def _u2(x):
    m = _backend(x.center)
    pi, e = m.pi, m.e
    return sin(x * pi) + (exp(x) - 1) / (e - 1)


def _u4(x, y):
    m = _backend(x.value)
    pi = m.pi
    dx, dy = x - Q(1, 4), y - Q(1, 2)
    return exp(-(dx * dx) - dy * dy) * sin(x * pi) * cos(y * (2 * pi))


def _u5(x, y):
    dx = x - Q(1, 5)
    return 25 / (dx * dx + y * y * 2 + 25)


def _u6(x, y):
    m = _backend(x.value)
    return exp(x) * tanh(y / m.sqrt(2))


def _u7(x, y):
    # Franke's function; the second exponent is linear in y as printed
    a, b = x * 9, y * 9
    t1 = exp(-((a - 2) ** 2 + (b - 2) ** 2) * Q(1, 4)) * Q(3, 4)
    t2 = exp(-((a + 1) ** 2) * Q(1, 49) - (b + 1) * Q(1, 10)) * Q(3, 4)
    t3 = exp(-((a - 7) ** 2 + (b - 3) ** 2) * Q(1, 4)) * Q(1, 2)
    t4 = exp(-((a - 4) ** 2) - (b - 7) ** 2) * Q(1, 5)
    return t1 + t2 + t3 - t4


def _u8(x, y):
    hx, hy = 1 - x * Q(1, 2), 1 - y * Q(1, 2)
    hx6, hy6 = hx ** 6, hy ** 6
    return (hx6 * hy6 + ((1 - x) * x * (1 - y) * y) ** 3 * 1000
            + y ** 6 * hx6 + x ** 6 * hy6)


def _u9(x, y):
    m = _backend(x.value)
    return sin(x * m.pi) * sin(y * m.pi)


_BUILDERS_1D = {TestFunctionId.U1: (_u1, 0.4), TestFunctionId.U2: (_u2, 0.25)}
_BUILDERS_2D = {
    TestFunctionId.U4: (_u4, (0.25, 0.25)),
    TestFunctionId.U5: (_u5, (0.0, 0.0)),
    TestFunctionId.U6: (_u6, (0.1, 0.2)),
    TestFunctionId.U7: (_u7, (0.1, 0.2)),
    TestFunctionId.U8: (_u8, (0.1, 0.2)),
    TestFunctionId.U9: (_u9, (0.1, 0.2)),
}


def default_point(fid) -> tuple:
    fid = TestFunctionId.parse(fid)
    if fid in _BUILDERS_1D:
        return (_BUILDERS_1D[fid][1],)
    return _BUILDERS_2D[fid][1]


def testfn_jet1(fid, x0, K: int) -> Jet1:
    fid = TestFunctionId.parse(fid)
    if fid not in _BUILDERS_1D:
        raise ValueError(f"{fid.value} is bivariate")
    return _BUILDERS_1D[fid][0](Jet1.variable(x0, K))


def testfn_jet2(fid, x0, y0, K: int) -> Jet2:
    fid = TestFunctionId.parse(fid)
    if fid not in _BUILDERS_2D:
        raise ValueError(f"{fid.value} is univariate")
    if _backend(y0) is not math and _backend(x0) is math:
        x0 = y0 * 0 + x0
    y0 = 0 * x0 + y0
    X = Jet2.variable(x0, y0, K, 0)
    Y = Jet2.variable(x0, y0, K, 1)
    return _BUILDERS_2D[fid][0](X, Y)


def testfn_jet(fid, point, K: int):
    """Jet at ``point`` (a scalar or 1-tuple in 1D, a pair in 2D)."""
    fid = TestFunctionId.parse(fid)
    if fid.dim == 1:
        x0 = point[0] if isinstance(point, (tuple, list)) else point
        return testfn_jet1(fid, x0, K)
    return testfn_jet2(fid, point[0], point[1], K)
