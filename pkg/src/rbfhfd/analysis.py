"""Truncation errors, LTE polynomials, optimal shape parameters, sweeps.

``tau0 = sum(alpha_i u(x0 + i h)) + sum(beta_k (L u)(x0 + k h)) - (L u)(x0)``.
Its leading term is ``h^m P_n(z)`` with ``z = eps^2``.  ``P_n`` is obtained
two ways: from the printed table templates (:func:`lte_poly_template`) and
by expanding the exact series weights against Taylor jets
(:func:`lte_poly_derived`).

Numeric truncation errors cancel ``m + p`` powers of ``h`` between terms of
size ``u / h^p``, so :func:`lte_numeric` works in mpmath with a precision
picked from ``h`` and the formula order.
"""

from __future__ import annotations

import cmath
import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from .formulas import (
    FlatLimitMismatch,
    FormulaId,
    KernelKind,
    WeightSet,
    catalog,
    compare_flat,
    weights_auto,
    weights_flat,
    weights_series,
)
from .jets import TestFunctionId, default_point, derivative_from_jet, testfn_jet
from .kernels import OperatorKind

__all__ = [
    "LtePoly",
    "LteResult",
    "OptimalEpsResult",
    "NoOptimalEps",
    "apply_formula",
    "lte_numeric",
    "lte_poly_template",
    "lte_poly_derived",
    "optimal_eps",
    "real_roots",
    "sweep",
    "convergence",
    "flat_limit_report",
    "compare_kernels",
    "write_sweep_csv",
    "write_convergence_csv",
    "write_compare_csv",
    "SWEEP_HEADER",
    "CONVERGENCE_HEADER",
    "COMPARE_HEADER",
]

MACHINE_EPS = 2.220446049250313e-16
HP_TRUNC = 28  # series length for the high-precision weight path


class NoOptimalEps(ValueError):
    """The LTE polynomial has no positive root and no positive stationary point."""


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class LtePoly:
    """``P_n(z) = sum(a_i z^i)``; the ``h^m`` coefficient of ``tau0`` is ``scale * P_n``.

    Templates keep the printed prefactor in ``scale`` so that ``coeffs`` are
    the bracketed coefficients the worked examples quote.
    """

    formula: FormulaId
    h_order: int
    coeffs: tuple
    scale: Fraction = Fraction(1)
    source: str = "derived"
    testfn: TestFunctionId | None = None
    point: tuple = ()

    @property
    def n(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        acc = 0 * z
        for a in reversed(self.coeffs):
            acc = acc * z + a
        return acc

    def h_coeffs(self) -> tuple:
        s = float(self.scale)
        return tuple(s * a for a in self.coeffs)


@dataclass(frozen=True)
class OptimalEpsResult:
    eps_star: float
    z_c: float
    mechanism: str  # "polynomial-root" | "derivative-minimum"
    candidates: tuple  # real roots of P_n
    poly: LtePoly | None = None


@dataclass(frozen=True)
class LteResult:
    tau0: float
    formula: FormulaId
    testfn: TestFunctionId
    point: tuple
    eps: float
    h: float
    kernel: KernelKind
    path: str = ""


# ---------------------------------------------------------------------------
# applying a formula


def _point(f: TestFunctionId, point) -> tuple:
    if point is None:
        return default_point(f)
    if isinstance(point, (int, float)):
        return (float(point),)
    return tuple(point)


def _operator_value(op: OperatorKind, jet):
    if op is OperatorKind.LAPLACIAN2D:
        return jet.laplacian()
    return derivative_from_jet(jet, op.order)


def _node(point, offset, h):
    return tuple(c + o * h for c, o in zip(point, offset))


def _offset(key) -> tuple:
    return key if isinstance(key, tuple) else (key,)


def apply_formula(w: WeightSet, f, point=None, h=None):
    """``sum(alpha u) + sum(beta L u)`` with true weights ``alpha / h^p``.

    Values come from jets; the number type follows ``point``/``h`` (floats or
    mpmath scalars) and exact rational weights are converted to it.
    """
    f = TestFunctionId.parse(f)
    point = _point(f, point)
    h = w.h if h is None else h
    op = w.formula.operator
    if f.dim != op.dim:
        raise ValueError(f"{f.value} is {f.dim}D, {w.formula.value} needs {op.dim}D")
    conv = _converter(h)
    hp = h ** op.order
    total = 0 * h
    for k, a in w.alpha.items():
        jet = testfn_jet(f, _node(point, _offset(k), h), 0)
        total += conv(a) * jet_value(jet) / hp
    for k, b in w.beta.items():
        jet = testfn_jet(f, _node(point, _offset(k), h), op.order)
        total += conv(b) * _operator_value(op, jet)
    return total


def jet_value(jet):
    return derivative_from_jet(jet, 0 if not hasattr(jet, "laplacian") else (0, 0))


def _converter(like):
    if type(like).__module__.startswith("mpmath"):
        def conv(v):
            if isinstance(v, Fraction):
                return mpmath.mpf(v.numerator) / v.denominator
            return mpmath.mpf(v)
    else:
        def conv(v):
            return float(v)
    return conv


def _hp_digits(fid: FormulaId, h: float) -> int:
    m, p = fid.order, fid.operator.order
    return 30 + math.ceil((m + p + 2) * max(0.0, -math.log10(h)))


def _mpf(x):
    return mpmath.mpf(repr(float(x))) if not isinstance(x, mpmath.mpf) else x


@lru_cache(maxsize=256)
def _node_data(fid: FormulaId, f: TestFunctionId, point: tuple, h: float, dps: int):
    """Node values ``u``, ``L u`` and the exact ``L u(x0)`` at ``dps`` digits."""
    spec = catalog(fid)
    op = spec.operator
    with mpmath.workdps(dps):
        pt = tuple(_mpf(c) for c in point)
        hh = _mpf(h)
        u = {}
        for o in spec.s_offsets:
            jet = testfn_jet(f, _node(pt, o, hh), 0)
            u[o] = jet_value(jet)
        lu = {}
        for o in spec.mu_offsets:
            lu[o] = _operator_value(op, testfn_jet(f, _node(pt, o, hh), op.order))
        exact = _operator_value(op, testfn_jet(f, pt, op.order))
    return u, lu, exact


def _tau_from(w: WeightSet, data, h, dps) -> mpmath.mpf:
    u, lu, exact = data
    p = w.formula.operator.order
    with mpmath.workdps(dps):
        conv = _converter(mpmath.mpf(0))
        hp = _mpf(h) ** p
        acc = -exact
        for k, a in w.alpha.items():
            acc += conv(a) * u[_offset(k)] / hp
        for k, b in w.beta.items():
            acc += conv(b) * lu[_offset(k)]
        return +acc


def lte_numeric(fid, kernel, f, point=None, eps=0.0, h=0.01, dps: int | None = None,
                weights: WeightSet | None = None) -> LteResult:
    """``tau0`` evaluated directly, in mpmath at ``dps`` digits (auto by default)."""
    fid = FormulaId.parse(fid)
    kernel = KernelKind.parse(kernel)
    f = TestFunctionId.parse(f)
    point = _point(f, point)
    dps = dps or _hp_digits(fid, h)
    if weights is None:
        with mpmath.workdps(dps):
            weights = weights_auto(fid, kernel, _mpf(eps), _mpf(h), n=HP_TRUNC, dps=dps)
    data = _node_data(fid, f, point, float(h), dps)
    tau = _tau_from(weights, data, h, dps)
    return LteResult(float(tau), fid, f, point, float(eps), float(h), kernel, weights.path)


# ---------------------------------------------------------------------------
# LTE polynomials

# Printed table rows: (prefactor, [(coefficient, power of z, derivative)]).
# A 1D derivative is an order; a 2D one a list of summed multi-indices.
_Q = Fraction
_XX, _X4, _X6, _X8 = [(2, 0), (0, 2)], [(4, 0), (0, 4)], [(6, 0), (0, 6)], [(8, 0), (0, 8)]
_TEMPLATES = {
    FormulaId.D1_4: (_Q(1, 120), [(-60, 2, 1), (-20, 1, 3), (-1, 0, 5)]),
    FormulaId.D1_6: (_Q(1, 1260), [(840, 3, 1), (420, 2, 3), (42, 1, 5), (1, 0, 7)]),
    FormulaId.D1_8: (_Q(1), [(_Q(-2, 3), 4, 1), (_Q(-4, 9), 3, 3), (_Q(-1, 15), 2, 5),
                             (_Q(-1, 315), 1, 7), (_Q(-1, 22680), 0, 9)]),
    FormulaId.D1_10: (_Q(1), [(_Q(6, 5), 5, 1), (1, 4, 3), (_Q(55440, 277200), 3, 5),
                              (_Q(3960, 277200), 2, 7), (_Q(110, 277200), 1, 9),
                              (_Q(1, 277200), 0, 11)]),
    FormulaId.D2_4: (_Q(1, 200), [(-140, 2, 2), (-28, 1, 4), (-1, 0, 6)]),
    FormulaId.D2_6: (_Q(-23, 2520), [(2520, 3, 2), (756, 2, 4), (54, 1, 6), (1, 0, 8)]),
    FormulaId.D2_8: (_Q(-79, 2971080), [(55440, 4, 2), (22176, 3, 4), (2376, 2, 6),
                                        (88, 1, 8), (1, 0, 10)]),
    FormulaId.D2_10: (_Q(619, 29904360), [(1441440, 5, 2), (720720, 4, 4), (102960, 3, 6),
                                          (5720, 2, 8)]),
    FormulaId.LAP_2: (_Q(1), [(_Q(1, 12), 0, _X4), (9, 1, _XX)]),
    FormulaId.LAP_4: (_Q(1, 480), [(-240, 2, _XX), (-75, 1, _X4), (-3, 0, _X6),
                                   (5, 0, [(2, 4), (4, 2)]), (130, 1, [(2, 2)])]),
    FormulaId.LAP_6: (_Q(1, 3052560), [(-8605128, 3, _XX), (-1371468, 2, _X4), (1817, 0, _X8),
                                       (-123522, 1, [(2, 4), (4, 2)]),
                                       (-3318, 0, [(2, 6), (6, 2)]), (-13644, 2, [(2, 2)])]),
}


def lte_poly_template(fid, f, point=None) -> LtePoly:
    """The printed LTE row, with derivatives of ``f`` at ``point`` from jets."""
    fid = FormulaId.parse(fid)
    f = TestFunctionId.parse(f)
    point = _point(f, point)
    scale, terms = _TEMPLATES[fid]
    m = fid.order
    jet = testfn_jet(f, point, m + fid.operator.order + 2)
    a = [0.0] * (m // 2 + 1)
    for c, q, d in terms:
        if isinstance(d, int):
            v = derivative_from_jet(jet, d)
        else:
            v = sum(derivative_from_jet(jet, i) for i in d)
        a[q] += float(c) * v
    return LtePoly(fid, m, tuple(a), scale, "template", f, point)


def _taylor_coeff(offset: tuple, n: int, deriv) -> float:
    """``h^n`` coefficient of ``g(x0 + offset h)`` given ``deriv(index)`` of ``g``."""
    if len(offset) == 1:
        c = Fraction(offset[0] ** n, math.factorial(n))
        return float(c) * deriv(n) if c else 0.0
    total = 0.0
    for a in range(n + 1):
        b = n - a
        c = Fraction(offset[0] ** a * offset[1] ** b, math.factorial(a) * math.factorial(b))
        if c:
            total += float(c) * deriv((a, b))
    return total


def _h_power_coeffs(fid: FormulaId, sw, jet, j: int) -> list:
    """Coefficients in ``z`` of ``h^j`` in the expansion of ``tau0``."""
    op = fid.operator
    p = op.order
    d = lambda idx: derivative_from_jet(jet, idx)  # noqa: E731
    if op is OperatorKind.LAPLACIAN2D:
        def lder(idx):
            a, b = idx
            return d((a + 2, b)) + d((a, b + 2))
    else:
        def lder(idx):
            return d(idx + p)
    out = []
    for q in range(j // 2 + 1):
        acc = 0.0
        n = j + p - 2 * q
        for k, s in sw.alpha.items():
            if s.coeffs[q]:
                acc += float(s.coeffs[q]) * _taylor_coeff(_offset(k), n, d)
        n = j - 2 * q
        for k, s in sw.beta.items():
            if s.coeffs[q]:
                acc += float(s.coeffs[q]) * _taylor_coeff(_offset(k), n, lder)
        if j == 0 and q == 0:
            acc -= lder(0 if op.dim == 1 else (0, 0))
        out.append(acc)
    return out


class LowerOrderResidual(AssertionError):
    """A power of ``h`` below the nominal order did not cancel."""


def lte_poly_derived(fid, kernel, f, point=None, N: int | None = None,
                     check: bool = True) -> LtePoly:
    """``P_n`` from the exact series weights applied to Taylor expansions.

    With ``check`` every lower power of ``h`` is verified to cancel (to
    roundoff relative to the size of its terms).
    """
    fid = FormulaId.parse(fid)
    kernel = KernelKind.parse(kernel)
    f = TestFunctionId.parse(f)
    point = _point(f, point)
    m, p = fid.order, fid.operator.order
    N = N or (m // 2 + 1)
    if N < m // 2 + 1:
        raise ValueError(f"N must be at least {m // 2 + 1}")
    sw = weights_series(fid, kernel, N)
    jet = testfn_jet(f, point, m + p)
    if check:
        scale = max(abs(v) for r in ([jet.coeffs] if f.dim == 1 else jet.coeffs) for v in r)
        big = 1.0 + scale * sum(abs(float(c)) for s in sw.alpha.values() for c in s.coeffs)
        for j in range(m):
            res = _h_power_coeffs(fid, sw, jet, j)
            if any(abs(v) > 1e-9 * big * math.factorial(j + p) for v in res):
                raise LowerOrderResidual(f"{fid.value}: h^{j} term does not cancel: {res}")
    coeffs = _h_power_coeffs(fid, sw, jet, m)
    return LtePoly(fid, m, tuple(coeffs), Fraction(1), "derived", f, point)


# ---------------------------------------------------------------------------
# roots and the optimal shape parameter


def _trim(coeffs: Sequence[float]) -> list:
    c = [float(v) for v in coeffs]
    while c and c[-1] == 0:
        c.pop()
    return c


def _closed_form_roots(c: list) -> list:
    n = len(c) - 1
    if n == 1:
        return [complex(-c[0] / c[1])]
    if n == 2:
        a, b, cc = c[2], c[1], c[0]
        disc = cmath.sqrt(b * b - 4 * a * cc)
        # avoid cancellation: pair the larger-magnitude root with its product partner
        s = -(b + disc) / 2 if (b.real if isinstance(b, complex) else b) >= 0 else -(b - disc) / 2
        if s == 0:
            return [0j, 0j]
        return [s / a, cc / s]
    # cubic via Cardano on the depressed form
    a, b, cc, d = c[3], c[2], c[1], c[0]
    b, cc, d = b / a, cc / a, d / a
    p = cc - b * b / 3
    q = 2 * b ** 3 / 27 - b * cc / 3 + d
    disc = cmath.sqrt((q / 2) ** 2 + (p / 3) ** 3)
    u = (-q / 2 + disc) ** (1 / 3) if abs(-q / 2 + disc) >= abs(-q / 2 - disc) \
        else (-q / 2 - disc) ** (1 / 3)
    omega = complex(-0.5, math.sqrt(3) / 2)
    roots = []
    for k in range(3):
        uk = u * omega ** k
        vk = -p / (3 * uk) if uk != 0 else 0
        roots.append(uk + vk - b / 3)
    return roots


def _polish(c: list, z: complex) -> complex:
    # a few Newton steps against the original coefficients
    for _ in range(3):
        pv = dp = 0j
        for a in reversed(c):
            dp = dp * z + pv
            pv = pv * z + a
        if dp == 0:
            break
        z = z - pv / dp
    return z


def real_roots(coeffs: Sequence[float]) -> tuple[list, list]:
    """``(real, all)`` roots of ``sum(coeffs[i] z^i)``.

    Closed forms up to degree three, companion-matrix eigenvalues above;
    imaginary parts below ``1e-10`` times the spectral radius count as real.
    """
    c = _trim(coeffs)
    if len(c) <= 1:
        return [], []
    if len(c) <= 4:
        roots = [_polish(c, z) for z in _closed_form_roots(c)]
    else:
        import numpy as np

        n = len(c) - 1
        comp = np.zeros((n, n))
        comp[1:, :-1] = np.eye(n - 1)
        comp[:, -1] = [-v / c[-1] for v in c[:-1]]
        roots = [_polish(c, complex(z)) for z in np.linalg.eigvals(comp)]
    radius = max(abs(z) for z in roots)
    real = sorted(z.real for z in roots if abs(z.imag) <= 1e-10 * radius)
    return real, roots


def optimal_eps(p: "LtePoly | Sequence[float]") -> OptimalEpsResult:
    """``eps* = sqrt(z_c)``: smallest positive root of ``P_n``, else the
    positive stationary point of ``P_n`` with the smallest ``|P_n|``."""
    coeffs = p.coeffs if isinstance(p, LtePoly) else tuple(p)
    c = _trim(coeffs)
    if not c:
        raise NoOptimalEps("LTE polynomial is identically zero")
    real, _ = real_roots(c)
    positive = [z for z in real if z > 0]
    poly = p if isinstance(p, LtePoly) else None
    if positive:
        z = positive[0]
        return OptimalEpsResult(math.sqrt(z), z, "polynomial-root", tuple(real), poly)
    dc = [i * c[i] for i in range(1, len(c))]
    dreal, _ = real_roots(dc)
    stationary = [z for z in dreal if z > 0]
    if not stationary:
        raise NoOptimalEps("no positive root of P_n or of its derivative")

    def val(z):
        return abs(sum(a * z ** i for i, a in enumerate(c)))

    z = min(stationary, key=val)
    return OptimalEpsResult(math.sqrt(z), z, "derivative-minimum", tuple(real), poly)


# ---------------------------------------------------------------------------
# sweeps and studies

SWEEP_HEADER = ["formula", "kernel", "testfn", "x0", "y0", "eps", "h", "abs_tau0"]
CONVERGENCE_HEADER = ["formula", "kernel", "testfn", "eps", "h", "abs_tau0", "observed_order"]
COMPARE_HEADER = ["formula", "testfn", "eps", "h", "abs_tau0_ga", "abs_tau0_mq", "abs_tau0_fd"]


@dataclass
class SweepRow:
    formula: FormulaId
    kernel: KernelKind
    testfn: TestFunctionId
    point: tuple
    eps: float
    h: float
    abs_tau0: float


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    errors: list = field(default_factory=list)  # (eps, h, message)

    def argmin(self, h: float | None = None) -> float:
        rows = [r for r in self.rows if h is None or r.h == h]
        return min(rows, key=lambda r: r.abs_tau0).eps


def sweep(fid, kernel, f, point=None, eps_grid: Iterable[float] = (), h_set: Iterable[float] = (),
          dps: int | None = None) -> SweepResult:
    """``|tau0|`` over the grid; failed points are recorded, not raised."""
    fid = FormulaId.parse(fid)
    kernel = KernelKind.parse(kernel)
    f = TestFunctionId.parse(f)
    point = _point(f, point)
    eps_grid, h_set = list(eps_grid), list(h_set)
    if not eps_grid or not h_set:
        raise ValueError("sweep grids must be nonempty")
    out = SweepResult()
    for h in h_set:
        for eps in eps_grid:
            try:
                r = lte_numeric(fid, kernel, f, point, eps, h, dps=dps)
            except (ArithmeticError, ValueError) as exc:
                out.errors.append((eps, h, str(exc)))
                continue
            out.rows.append(SweepRow(fid, kernel, f, point, float(eps), float(h), abs(r.tau0)))
    return out


@dataclass
class ConvergenceRow:
    h: float
    abs_tau0: float
    observed_order: float | None  # against the previous kept level


def convergence(fid, kernel, f, point=None, eps: float = 0.5,
                h_sequence: Sequence[float] = (0.1, 0.05, 0.025, 0.0125)) -> list:
    """Observed orders ``log(|tau_k| / |tau_k+1|) / log(h_k / h_k+1)``.

    Levels with ``|tau0|`` below ``100`` times float64 machine epsilon are
    dropped, as double-precision data could not resolve them.
    """
    if len(h_sequence) < 4:
        raise ValueError("need at least four step sizes")
    rows = []
    prev = None
    for h in h_sequence:
        tau = abs(lte_numeric(fid, kernel, f, point, eps, h).tau0)
        if tau < 100 * MACHINE_EPS:
            continue
        order = None
        if prev is not None:
            order = math.log(prev[1] / tau) / math.log(prev[0] / h)
        rows.append(ConvergenceRow(float(h), tau, order))
        prev = (h, tau)
    return rows


@dataclass
class FlatReportLine:
    formula: FormulaId
    ok: bool
    message: str


def flat_limit_report() -> list:
    lines = []
    for fid in FormulaId:
        try:
            compare_flat(weights_flat(fid, check=False))
            lines.append(FlatReportLine(fid, True, "PASS"))
        except FlatLimitMismatch as exc:
            lines.append(FlatReportLine(fid, False, f"FAIL {exc}"))
    return lines


@dataclass
class CompareRow:
    eps: float
    h: float
    ga: float
    mq: float
    fd: float


def compare_kernels(fid, f, point=None, eps_grid: Iterable[float] = (), h: float = 0.01) -> list:
    """GA and MQ ``|tau0|`` over ``eps_grid``; FD from the flat rational weights."""
    fid = FormulaId.parse(fid)
    f = TestFunctionId.parse(f)
    point = _point(f, point)
    flat = weights_flat(fid, check=False)
    flat.h = h
    fd = abs(lte_numeric(fid, KernelKind.GAUSSIAN, f, point, 0.0, h, weights=flat).tau0)
    rows = []
    for eps in eps_grid:
        ga = abs(lte_numeric(fid, KernelKind.GAUSSIAN, f, point, eps, h).tau0)
        mq = abs(lte_numeric(fid, KernelKind.MULTIQUADRIC, f, point, eps, h).tau0)
        rows.append(CompareRow(float(eps), float(h), ga, mq, fd))
    return rows


# ---------------------------------------------------------------------------
# CSV


def _g(v) -> str:
    return "" if v is None else format(float(v), ".17g")


def write_sweep_csv(result: SweepResult, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in result.rows:
        y0 = r.point[1] if len(r.point) > 1 else None
        w.writerow([r.formula.value, r.kernel.value, r.testfn.value, _g(r.point[0]), _g(y0),
                    _g(r.eps), _g(r.h), _g(r.abs_tau0)])


def write_convergence_csv(fid, kernel, f, eps, rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CONVERGENCE_HEADER)
    for r in rows:
        w.writerow([FormulaId.parse(fid).value, KernelKind.parse(kernel).value,
                    TestFunctionId.parse(f).value, _g(eps), _g(r.h), _g(r.abs_tau0),
                    _g(r.observed_order)])


def write_compare_csv(fid, f, rows, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COMPARE_HEADER)
    for r in rows:
        w.writerow([FormulaId.parse(fid).value, TestFunctionId.parse(f).value, _g(r.eps),
                    _g(r.h), _g(r.ga), _g(r.mq), _g(r.fd)])
