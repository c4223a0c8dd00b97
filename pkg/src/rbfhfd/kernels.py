"""Gaussian and multiquadric kernels and the operator-applied collocation blocks.

A block entry couples an evaluation node ``x`` and a kernel centre ``y`` on
a uniform grid, ``x - y = offset * h`` with an integer offset.  Every entry
is a short sum of radial-profile derivatives ``f^(j)(s)`` at ``s = |x - y|^2``
(``f(s) = exp(-eps^2 s)`` or ``sqrt(1 + eps^2 s)``), multiplied by an integer
polynomial in the offset.  That term table is written once and drives both
the floating point closed forms and the exact series in ``t = (eps*h)^2``.

Sign convention (the only place it is fixed): ``LI`` applies the operator to
the evaluation argument ``x``, ``IL`` to the centre argument ``y``, ``LL``
to both.  For the first derivative ``IL = -LI`` and ``LL = -F''``.
"""

from __future__ import annotations

import enum
import math
from fractions import Fraction
from functools import lru_cache

from .series import TruncatedSeries, series_binomial, series_exp_neg

__all__ = [
    "KernelKind",
    "OperatorKind",
    "BlockRole",
    "phi_numeric",
    "profile_derivative",
    "block_terms",
    "block_entry_numeric",
    "block_entry_series",
]


class KernelKind(enum.Enum):
    GAUSSIAN = "ga"
    MULTIQUADRIC = "mq"

    @classmethod
    def parse(cls, name: "str | KernelKind") -> "KernelKind":
        if isinstance(name, cls):
            return name
        key = name.strip().lower()
        aliases = {"ga": cls.GAUSSIAN, "gaussian": cls.GAUSSIAN,
                   "mq": cls.MULTIQUADRIC, "multiquadric": cls.MULTIQUADRIC}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown kernel {name!r}") from None


class OperatorKind(enum.Enum):
    IDENTITY = 0
    D1 = 1
    D2 = 2
    LAPLACIAN2D = 3

    @property
    def order(self) -> int:
        """Power of 1/h carried by the function-value weights."""
        return {0: 0, 1: 1, 2: 2, 3: 2}[self.value]

    @property
    def dim(self) -> int:
        return 2 if self is OperatorKind.LAPLACIAN2D else 1


class BlockRole(enum.Enum):
    II = "II"
    IL = "IL"
    LI = "LI"
    LL = "LL"


def _mq_coeff(j: int) -> Fraction:
    c = Fraction(1)
    for i in range(j):
        c *= Fraction(1, 2) - i
    return c


def _backend(x):
    """Math namespace matching the scalar type (float, mpmath, sympy)."""
    mod = type(x).__module__
    if mod.startswith("mpmath"):
        import mpmath

        return mpmath
    if mod.startswith("sympy"):
        import sympy

        return sympy
    return math


def profile_derivative(kind: KernelKind, j: int, s, eps):
    """``d^j/ds^j f(s)`` for the radial profile of ``kind``."""
    m = _backend(eps) if _backend(s) is math else _backend(s)
    e2 = eps * eps
    if kind is KernelKind.GAUSSIAN:
        return (-e2) ** j * m.exp(-e2 * s)
    c = _mq_coeff(j)
    base = 1 + e2 * s
    if m is math:
        return float(c) * e2 ** j * base ** (0.5 - j)
    if m.__name__ == "sympy":
        return m.Rational(c.numerator, c.denominator) * e2 ** j * m.sqrt(base) / base ** j
    return m.mpf(c.numerator) / c.denominator * e2 ** j * m.sqrt(base) / base ** j


def phi_numeric(kind: KernelKind, r2, eps):
    """Kernel value at squared distance ``r2``."""
    if r2 < 0 or eps < 0:
        raise ValueError("r2 and eps must be nonnegative")
    return profile_derivative(kind, 0, r2, eps)


def _as_offset(offset) -> tuple:
    if isinstance(offset, int):
        return (offset,)
    return tuple(int(o) for o in offset)


# Each entry: list of (integer coefficient, j) meaning coef * d^a * f^(j)
# with the h-power fixed per block; q is the power of 1/h of the entry.
def _radial_1d(n_deriv: int, o: int) -> list:
    # d^n/dd^n of f(d^2) at d = o*h, expressed through f^(j)(d^2)
    return {
        0: [(1, 0)],
        1: [(2 * o, 1)],
        2: [(2, 1), (4 * o * o, 2)],
        3: [(12 * o, 2), (8 * o ** 3, 3)],
        4: [(12, 2), (48 * o * o, 3), (16 * o ** 4, 4)],
    }[n_deriv]


def _radial_lap(n_apply: int, k: int) -> list:
    # Delta^n of f(|x|^2) in two dimensions at |x|^2 = k*h^2
    return {
        0: [(1, 0)],
        1: [(4, 1), (4 * k, 2)],
        2: [(32, 2), (64 * k, 3), (16 * k * k, 4)],
    }[n_apply]


@lru_cache(maxsize=None)
def block_terms(role: BlockRole, op: OperatorKind, offset) -> tuple[int, tuple]:
    """Return ``(q, terms)``: the entry is ``h^-q * sum(c * h^(2j) * f^(j)(s))``
    over ``terms = ((c, j), ...)``; offset is evaluation minus centre."""
    off = _as_offset(offset)
    if op is OperatorKind.LAPLACIAN2D:
        if len(off) != 2:
            raise ValueError("Laplacian blocks need a 2D offset")
        k = off[0] ** 2 + off[1] ** 2
        n = {BlockRole.II: 0, BlockRole.LI: 1, BlockRole.IL: 1, BlockRole.LL: 2}[role]
        return 2 * n, tuple(_radial_lap(n, k))
    if len(off) != 1:
        raise ValueError("1D operators need a scalar offset")
    o = off[0]
    if op is OperatorKind.IDENTITY:
        if role is not BlockRole.II:
            raise ValueError("identity operator only has the II block")
        return 0, tuple(_radial_1d(0, o))
    p = op.order
    if role is BlockRole.II:
        return 0, tuple(_radial_1d(0, o))
    if role is BlockRole.LI:
        return p, tuple(_radial_1d(p, o))
    if role is BlockRole.IL:
        sign = -1 if p % 2 else 1
        return p, tuple((sign * c, j) for c, j in _radial_1d(p, o))
    sign = -1 if p % 2 else 1
    return 2 * p, tuple((sign * c, j) for c, j in _radial_1d(2 * p, o))


def squared_distance(offset) -> int:
    return sum(o * o for o in _as_offset(offset))


def block_entry_numeric(kind: KernelKind, role: BlockRole, op: OperatorKind,
                        offset, eps, h):
    """Closed-form value of one collocation block entry."""
    q, terms = block_terms(role, op, _as_offset(offset))
    s = squared_distance(offset) * h * h
    total = 0
    for c, j in terms:
        total = total + c * h ** (2 * j) * profile_derivative(kind, j, s, eps)
    return total / h ** q


def _profile_series(kind: KernelKind, j: int, k: int, n: int) -> TruncatedSeries:
    # t^j * g_j(k t) with f^(j)(k h^2) = h^(-2j) t^j g_j(k t)
    if kind is KernelKind.GAUSSIAN:
        g = series_exp_neg(k, n)
        if j % 2:
            g = -g
    else:
        g = series_binomial(k, Fraction(1, 2) - j, n).scale(_mq_coeff(j))
    return g.shift(j)


@lru_cache(maxsize=4096)
def block_entry_series(kind: KernelKind, role: BlockRole, op: OperatorKind,
                       offset, n: int) -> tuple[int, TruncatedSeries]:
    """Nondimensional series of a block entry.

    Returns ``(q, S)`` with ``entry = h^-q * S(t)``, ``t = (eps*h)^2``.
    """
    off = _as_offset(offset)
    q, terms = block_terms(role, op, off)
    k = squared_distance(off)
    acc = TruncatedSeries.constant(0, n)
    for c, j in terms:
        if c:
            acc = acc + _profile_series(kind, j, k, n).scale(c)
    return q, acc
