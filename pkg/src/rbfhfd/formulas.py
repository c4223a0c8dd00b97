"""Stencil catalog, collocation assembly, and weight solvers.

A formula approximates ``L u(x0)`` by
``sum(alpha_i u(x0 + i h)) + sum(beta_k (L u)(x0 + k h))``.  Weights are
fixed by exactness on the kernel translates centred at the S nodes, on the
operator-applied translates centred at the mu nodes, and on the augmenting
polynomials.  Symmetry classes are folded in before solving, so each
unknown is one class weight.

Everything here is nondimensional: a class weight ``a`` on function values
stands for ``a / h^p`` (``p`` the operator order), weights on operator
values are dimensionless, and series weights are functions of
``t = (eps*h)^2`` only.
"""

from __future__ import annotations

import enum
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable

from . import linalg
from .kernels import (
    BlockRole,
    KernelKind,
    OperatorKind,
    block_entry_numeric,
    block_entry_series,
)
from .series import (
    FlatLimitSingular,
    TruncatedSeries,
    format_rational,
    series_eval,
    solve_to_length,
)

__all__ = [
    "FormulaId",
    "StencilSpec",
    "WeightSet",
    "SeriesWeightSet",
    "SingularAtFlatLimit",
    "FlatLimitMismatch",
    "catalog",
    "assemble_numeric",
    "assemble_series",
    "weights_numeric",
    "weights_series",
    "weights_flat",
    "weights_auto",
    "DEFAULT_N",
    "T_SWITCH",
    "COND_LIMIT",
    "series_tail",
]

DEFAULT_N = int(os.environ.get("RBFHFD_TRUNC", "14"))
T_SWITCH = 0.25
COND_LIMIT = 1e12


class SingularAtFlatLimit(ArithmeticError):
    """Numeric collocation requested at eps = 0, where the kernel matrix is flat."""


class FlatLimitMismatch(AssertionError):
    """Flat-limit weights disagree with the classical compact-FD table."""


class FormulaId(enum.Enum):
    D1_4 = "d1-4"
    D1_6 = "d1-6"
    D1_8 = "d1-8"
    D1_10 = "d1-10"
    D2_4 = "d2-4"
    D2_6 = "d2-6"
    D2_8 = "d2-8"
    D2_10 = "d2-10"
    LAP_2 = "lap-2"
    LAP_4 = "lap-4"
    LAP_6 = "lap-6"

    @classmethod
    def parse(cls, name: "str | FormulaId") -> "FormulaId":
        if isinstance(name, cls):
            return name
        key = name.strip().lower().replace("_", "-")
        for f in cls:
            if f.value == key:
                return f
        raise ValueError(f"unknown formula {name!r}")

    @property
    def operator(self) -> OperatorKind:
        if self.name.startswith("D1"):
            return OperatorKind.D1
        if self.name.startswith("D2"):
            return OperatorKind.D2
        return OperatorKind.LAPLACIAN2D

    @property
    def order(self) -> int:
        return int(self.name.rsplit("_", 1)[1])


# A class is a tuple of (offset, sign); the first member is the representative.
SymClass = tuple


@dataclass(frozen=True)
class StencilSpec:
    id: FormulaId
    operator: OperatorKind
    order: int
    s_classes: tuple
    mu_classes: tuple
    polys: tuple  # monomial exponent tuples, degree <= 1

    @property
    def dim(self) -> int:
        return self.operator.dim

    @property
    def s_offsets(self) -> list:
        return [o for c in self.s_classes for o, _ in c]

    @property
    def mu_offsets(self) -> list:
        return [o for c in self.mu_classes for o, _ in c]


def _pairs_1d(radius: int, odd: bool, with_zero: bool) -> tuple:
    classes = [((( -r,), 1), ((r,), -1 if odd else 1)) for r in range(radius, 0, -1)]
    if with_zero:
        classes.append((((0,), 1),))
    return tuple(classes)


def _d4_orbit(p: tuple) -> SymClass:
    x, y = p
    seen = []
    for q in [(x, y), (-y, x), (-x, -y), (y, -x), (y, x), (-x, y), (-y, -x), (x, -y)]:
        if q not in seen:
            seen.append(q)
    # counterclockwise listing starting at the given representative
    seen.sort(key=lambda q: _angle_index(q, p))
    return tuple((q, 1) for q in seen)


def _angle_index(q, rep):
    import math

    a = math.atan2(q[1], q[0]) - math.atan2(rep[1], rep[0])
    return a % (2 * math.pi)


_CONST_1D = ((0,),)
_AFFINE_2D = ((0, 0), (1, 0), (0, 1))


def _build_catalog() -> dict:
    cat = {}
    for op, odd, prefix in ((OperatorKind.D1, True, "D1"), (OperatorKind.D2, False, "D2")):
        layout = {4: (1, 1), 6: (2, 1), 8: (2, 2), 10: (3, 2)}
        for order, (rs, rm) in layout.items():
            fid = FormulaId[f"{prefix}_{order}"]
            mu = tuple((((-r,), 1), ((r,), 1)) for r in range(rm, 0, -1))
            cat[fid] = StencilSpec(fid, op, order, _pairs_1d(rs, odd, True), mu, _CONST_1D)
    center = ((((0, 0), 1),),)
    axis, diag, far = _d4_orbit((1, 0)), _d4_orbit((1, 1)), _d4_orbit((2, 0))
    lap = OperatorKind.LAPLACIAN2D
    cat[FormulaId.LAP_2] = StencilSpec(FormulaId.LAP_2, lap, 2, center + (axis,), (), _AFFINE_2D)
    cat[FormulaId.LAP_4] = StencilSpec(FormulaId.LAP_4, lap, 4, center + (axis, diag), (axis,),
                                       _AFFINE_2D)
    # One weight shared by the axis and diagonal neighbours; the collocation
    # row of the shared class is its axis representative.
    cat[FormulaId.LAP_6] = StencilSpec(FormulaId.LAP_6, lap, 6, center + (axis + diag, far),
                                       (axis, diag), _AFFINE_2D)
    return cat


_CATALOG = _build_catalog()


def catalog(fid: "FormulaId | str") -> StencilSpec:
    return _CATALOG[FormulaId.parse(fid)]


def class_label(kind: str, cls: SymClass) -> str:
    o = cls[0][0]
    return f"{kind}[{','.join(str(v) for v in o)}]"


# ---------------------------------------------------------------------------
# polynomial augmentation


def _mono(o: tuple, e: tuple) -> int:
    out = 1
    for oi, ei in zip(o, e):
        out *= oi ** ei
    return out


def _op_mono(op: OperatorKind, o: tuple, e: tuple) -> int:
    """Nondimensional operator applied to ``x^e`` at offset ``o``."""
    def deriv(e, axis, times):
        c = 1
        ee = list(e)
        for _ in range(times):
            c *= ee[axis]
            ee[axis] -= 1
            if c == 0:
                return 0, tuple(ee)
        return c, tuple(ee)

    if op is OperatorKind.IDENTITY:
        return _mono(o, e)
    if op in (OperatorKind.D1, OperatorKind.D2):
        c, ee = deriv(e, 0, op.order)
        return c * _mono(o, ee) if c else 0
    total = 0
    for axis in range(2):
        c, ee = deriv(e, axis, 2)
        if c:
            total += c * _mono(o, ee)
    return total


# ---------------------------------------------------------------------------
# assembly


@dataclass
class ReducedSystem:
    """Symmetry-reduced collocation system description (entries are callables)."""

    spec: StencilSpec
    columns: list  # ("alpha"|"beta", class) or ("gamma", exponent)
    rows: list  # ("S"|"mu", representative offset) or ("poly", exponent)


def _neg(o):
    return tuple(-v for v in o)


def _sub(a, b):
    return tuple(x - y for x, y in zip(a, b))


def _layout(spec: StencilSpec) -> ReducedSystem:
    cols = [("alpha", c) for c in spec.s_classes] + [("beta", c) for c in spec.mu_classes]
    rows = [("S", c[0][0]) for c in spec.s_classes] + [("mu", c[0][0]) for c in spec.mu_classes]
    for e in spec.polys:
        row = _poly_row(spec, e)
        if any(row):
            cols.append(("gamma", e))
            rows.append(("poly", e))
    return ReducedSystem(spec, cols, rows)


def _poly_row(spec: StencilSpec, e: tuple) -> list:
    op = spec.operator
    row = [sum(s * _mono(o, e) for o, s in c) for c in spec.s_classes]
    row += [sum(s * _op_mono(op, o, e) for o, s in c) for c in spec.mu_classes]
    return row


def _entry_generic(spec: StencilSpec, row, col, block: Callable, zero):
    """One reduced entry; ``block(role, offset)`` gives the nondimensional block."""
    rkind, rkey = row
    ckind, ckey = col
    op = spec.operator
    if rkind == "poly":
        if ckind == "gamma":
            return zero
        cls = ckey
        if ckind == "alpha":
            return zero + sum(s * _mono(o, rkey) for o, s in cls)
        return zero + sum(s * _op_mono(op, o, rkey) for o, s in cls)
    if ckind == "gamma":
        if rkind == "S":
            return zero + _mono(rkey, ckey)
        return zero + _op_mono(op, rkey, ckey)
    role = {("S", "alpha"): BlockRole.II, ("S", "beta"): BlockRole.IL,
            ("mu", "alpha"): BlockRole.LI, ("mu", "beta"): BlockRole.LL}[(rkind, ckind)]
    acc = zero
    for o, s in ckey:
        v = block(role, _sub(rkey, o))
        acc = acc + (v if s == 1 else -v)
    return acc


def _rhs_generic(spec: StencilSpec, row, block: Callable, zero):
    rkind, rkey = row
    if rkind == "poly":
        return zero + _op_mono(spec.operator, (0,) * spec.dim, rkey)
    role = BlockRole.LI if rkind == "S" else BlockRole.LL
    return block(role, _neg(rkey))


def assemble_series(fid, kernel, n: int = DEFAULT_N):
    """Nondimensional reduced system over truncated series in ``t``."""
    spec = catalog(fid)
    kernel = KernelKind.parse(kernel)
    lay = _layout(spec)
    op = spec.operator
    zero = TruncatedSeries.constant(0, n)

    def block(role, off):
        return block_entry_series(kernel, role, op, off, n)[1]

    A = [[_entry_generic(spec, r, c, block, zero) for c in lay.columns] for r in lay.rows]
    b = [_rhs_generic(spec, r, block, zero) for r in lay.rows]
    return A, b


def assemble_numeric(fid, kernel, eps, h, nondimensional: bool = False):
    """Reduced collocation system at fixed ``eps`` and ``h``.

    With ``nondimensional=False`` the entries carry their powers of ``h``
    (unknowns ordered alpha classes, beta classes, gamma), which for
    ``d1-6`` reproduces the printed order-6 system entry by entry.
    """
    spec = catalog(fid)
    kernel = KernelKind.parse(kernel)
    lay = _layout(spec)
    op = spec.operator
    p = op.order
    zero = 0 * eps * h

    def block(role, off):
        v = block_entry_numeric(kernel, role, op, off, eps, h)
        if nondimensional:
            q = {BlockRole.II: 0, BlockRole.IL: p, BlockRole.LI: p, BlockRole.LL: 2 * p}[role]
            v = v * h ** q
        return v

    def dim_block(role, off):
        return block(role, off)

    A = [[_entry_generic(spec, r, c, dim_block, zero) for c in lay.columns] for r in lay.rows]
    b = [_rhs_generic(spec, r, dim_block, zero) for r in lay.rows]
    if not nondimensional:
        # polynomial entries were built nondimensionally; restore h powers
        for i, r in enumerate(lay.rows):
            for j, c in enumerate(lay.columns):
                if r[0] == "poly" or c[0] == "gamma":
                    A[i][j] = A[i][j] * _poly_scale(spec, r, c, h)
            if r[0] == "poly":
                b[i] = b[i] * h ** (sum(r[1]) - p)
    return A, b


def _poly_scale(spec, row, col, h):
    p = spec.operator.order
    if row[0] == "poly":
        deg = sum(row[1])
        return h ** deg if col[0] == "alpha" else h ** (deg - p)
    deg = sum(col[1])
    return h ** deg if row[0] == "S" else h ** (deg - p)


# ---------------------------------------------------------------------------
# weight sets


def _expand(spec: StencilSpec, values: list):
    """Class values -> per-offset maps for alpha and beta, plus gamma."""
    lay = _layout(spec)
    alpha, beta, gamma = {}, {}, {}
    for (kind, key), v in zip(lay.columns, values):
        if kind == "gamma":
            gamma[key] = v
            continue
        target = alpha if kind == "alpha" else beta
        for o, s in key:
            target[_key(o)] = v if s == 1 else -v
    return alpha, beta, gamma


def _key(o: tuple):
    return o[0] if len(o) == 1 else o


@dataclass
class WeightSet:
    """Numeric weights; ``alpha`` values are nondimensional (true weight ``a / h^p``)."""

    formula: FormulaId
    kernel: KernelKind
    eps: float
    h: float
    alpha: dict
    beta: dict
    gamma: dict = field(default_factory=dict)
    cond: float | None = None
    ill_conditioned: bool = False
    path: str = "numeric"

    @property
    def spec(self) -> StencilSpec:
        return catalog(self.formula)

    def alpha_scaled(self) -> dict:
        p = self.formula.operator.order
        return {k: v / self.h ** p for k, v in self.alpha.items()}

    def to_dict(self) -> dict:
        def conv(v):
            return format_rational(v) if isinstance(v, Fraction) else float(v)

        return {
            "formula": self.formula.value,
            "kernel": self.kernel.value,
            "eps": float(self.eps),
            "h": float(self.h),
            "operator_order": self.formula.operator.order,
            "path": self.path,
            "alpha": {_fmt_key(k): conv(v) for k, v in self.alpha.items()},
            "beta": {_fmt_key(k): conv(v) for k, v in self.beta.items()},
            "gamma": {_fmt_key(k): conv(v) for k, v in self.gamma.items()},
            "cond": self.cond,
            "ill_conditioned": self.ill_conditioned,
        }


def _fmt_key(k) -> str:
    return str(k) if not isinstance(k, tuple) else ",".join(str(v) for v in k)


@dataclass
class SeriesWeightSet:
    formula: FormulaId
    kernel: KernelKind
    trunc_len: int
    alpha: dict
    beta: dict
    gamma: dict

    def evaluate(self, t):
        """Class-expanded weights at ``t`` (float or mpmath scalar)."""
        return ({k: series_eval(v, t) for k, v in self.alpha.items()},
                {k: series_eval(v, t) for k, v in self.beta.items()})

    def constant_terms(self):
        return ({k: v[0] for k, v in self.alpha.items()},
                {k: v[0] for k, v in self.beta.items()})

    def to_dict(self) -> dict:
        return {
            "formula": self.formula.value,
            "kernel": self.kernel.value,
            "trunc_len": self.trunc_len,
            "variable": "t = (eps*h)^2",
            "operator_order": self.formula.operator.order,
            "alpha": {_fmt_key(k): v.to_tokens() for k, v in self.alpha.items()},
            "beta": {_fmt_key(k): v.to_tokens() for k, v in self.beta.items()},
            "gamma": {_fmt_key(k): v.to_tokens() for k, v in self.gamma.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SeriesWeightSet":
        def key(s):
            parts = tuple(int(v) for v in s.split(","))
            return parts[0] if len(parts) == 1 else parts

        def series_map(m):
            return {key(k): TruncatedSeries.from_tokens(v) for k, v in m.items()}

        gamma = {tuple(int(v) for v in k.split(",")): TruncatedSeries.from_tokens(v)
                 for k, v in d.get("gamma", {}).items()}
        return cls(FormulaId.parse(d["formula"]), KernelKind.parse(d["kernel"]),
                   d["trunc_len"], series_map(d["alpha"]), series_map(d["beta"]), gamma)


@lru_cache(maxsize=None)
def _class_series(fid: FormulaId, kernel: KernelKind, n: int) -> tuple:
    solution, _ = solve_to_length(lambda m: assemble_series(fid, kernel, m), n)
    return tuple(solution)


def weights_series(fid, kernel=KernelKind.GAUSSIAN, n: int = DEFAULT_N) -> SeriesWeightSet:
    """Exact series weights, each correct in all ``n`` retained powers of t."""
    fid = FormulaId.parse(fid)
    kernel = KernelKind.parse(kernel)
    spec = catalog(fid)
    values = list(_class_series(fid, kernel, n))
    alpha, beta, gamma = _expand(spec, values)
    return SeriesWeightSet(fid, kernel, n, alpha, beta, gamma)


def weights_flat(fid, check: bool = True) -> WeightSet:
    """Flat-limit (eps -> 0) weights as exact rationals.

    The constant terms of the Gaussian series weights; with ``check`` they
    are compared against the classical compact finite-difference table.
    """
    fid = FormulaId.parse(fid)
    sw = weights_series(fid, KernelKind.GAUSSIAN, 2)
    alpha, beta = sw.constant_terms()
    ws = WeightSet(fid, KernelKind.GAUSSIAN, 0.0, 1.0, alpha, beta,
                   {k: v[0] for k, v in sw.gamma.items()}, path="flat")
    if check:
        compare_flat(ws)
    return ws


def compare_flat(ws: WeightSet) -> None:
    from .reference import FLAT_REFERENCE

    ref_alpha, ref_beta = FLAT_REFERENCE[ws.formula]
    for label, got, ref in (("alpha", ws.alpha, ref_alpha), ("beta", ws.beta, ref_beta)):
        if set(got) != set(ref):
            raise FlatLimitMismatch(f"{ws.formula.value}: {label} node sets differ")
        for k in ref:
            if got[k] != ref[k]:
                raise FlatLimitMismatch(
                    f"{ws.formula.value}: {label}[{_fmt_key(k)}] = {got[k]}, expected {ref[k]}"
                )


def weights_numeric(fid, kernel, eps, h, dps: int | None = None) -> WeightSet:
    """Direct solve of the collocation system.

    Dense LU with partial pivoting and one residual-refinement step on the
    nondimensional system.  ``dps`` switches to mpmath arithmetic at that
    many digits.
    """
    fid = FormulaId.parse(fid)
    kernel = KernelKind.parse(kernel)
    if eps == 0:
        raise SingularAtFlatLimit("the kernel matrix is all ones at eps = 0")
    if dps is not None:
        import mpmath

        with mpmath.workdps(dps):
            e, hh = mpmath.mpf(eps), mpmath.mpf(h)
            A, b = assemble_numeric(fid, kernel, e, hh, nondimensional=True)
            x, fac = linalg.solve(A, b)
            cond = linalg.cond1(A, fac)
            x = [+v for v in x]
        limit = COND_LIMIT * 10.0 ** (dps - 16)
    else:
        A, b = assemble_numeric(fid, kernel, float(eps), float(h), nondimensional=True)
        try:
            x, fac = linalg.solve(A, b)
        except linalg.SingularMatrix as exc:
            raise SingularAtFlatLimit(str(exc)) from exc
        cond = linalg.cond1(A, fac)
        limit = COND_LIMIT
    alpha, beta, gamma = _expand(catalog(fid), x)
    return WeightSet(fid, kernel, eps, h, alpha, beta, gamma, cond=cond,
                     ill_conditioned=cond > limit, path="numeric")


def series_tail(sw: SeriesWeightSet, t) -> float:
    """Size of the last retained term relative to the weight, maximised over weights.

    A cheap convergence check: the multiquadric series have a radius of
    convergence set by the widest node spacing, which can fall below
    ``t_switch``.
    """
    worst = 0.0
    n = sw.trunc_len
    t = float(t)
    for v in list(sw.alpha.values()) + list(sw.beta.values()):
        last = abs(float(v.coeffs[n - 1])) * t ** (n - 1)
        worst = max(worst, last / max(1.0, abs(series_eval(v, t))))
    return worst


TAIL_TOL = 1e-13
TARGET_ERR = 1e-10


def weights_auto(fid, kernel, eps, h, n: int = DEFAULT_N, t_switch: float = T_SWITCH,
                 dps: int | None = None) -> WeightSet:
    """Series evaluation for small ``t = (eps*h)^2``, direct solve otherwise.

    The series route is taken when ``t <= t_switch`` and the truncated tail
    is negligible (below ``TAIL_TOL``, or ``10^-(dps-6)`` with ``dps``).
    In float64 the direct solve is repeated in mpmath when its condition
    number implies an error above ``TARGET_ERR``; with ``dps`` it runs with
    guard digits matched to the condition number.
    """
    fid = FormulaId.parse(fid)
    kernel = KernelKind.parse(kernel)
    t = float((eps * h) ** 2)
    tol = TAIL_TOL if dps is None else 10.0 ** (6 - dps)
    if t <= t_switch:
        sw = weights_series(fid, kernel, n)
        if t == 0 or series_tail(sw, t) <= tol:
            if dps is not None:
                import mpmath

                with mpmath.workdps(dps):
                    tt = (mpmath.mpf(eps) * mpmath.mpf(h)) ** 2
                    alpha, beta = sw.evaluate(tt)
            else:
                alpha, beta = sw.evaluate(t)
            return WeightSet(fid, kernel, eps, h, alpha, beta, path="series")
    if dps is None:
        ws = weights_numeric(fid, kernel, eps, h)
        if ws.cond * 2.2e-16 <= TARGET_ERR:
            return ws
        return weights_numeric(fid, kernel, eps, h,
                               dps=20 + int(math.log10(ws.cond / TARGET_ERR)))
    ws = weights_numeric(fid, kernel, eps, h, dps=dps + 20)
    if ws.cond > 1e15:
        ws = weights_numeric(fid, kernel, eps, h, dps=dps + 10 + int(math.log10(ws.cond)))
    return ws
