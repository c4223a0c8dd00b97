import math

import pytest
import sympy as sp

from rbfhfd.formulas import assemble_numeric, assemble_series
from rbfhfd.kernels import (
    BlockRole,
    KernelKind,
    OperatorKind,
    block_entry_numeric,
    block_entry_series,
    phi_numeric,
)
from rbfhfd.series import series_eval, series_exp_neg, series_sqrt_one_plus

GA, MQ = KernelKind.GAUSSIAN, KernelKind.MULTIQUADRIC
II, IL, LI, LL = BlockRole.II, BlockRole.IL, BlockRole.LI, BlockRole.LL
D1, D2, LAP = OperatorKind.D1, OperatorKind.D2, OperatorKind.LAPLACIAN2D

x, y, xc, yc = sp.symbols("x y xc yc", real=True)
eps_s, h_s = sp.symbols("epsilon h", positive=True)


def _phi(kind, r2):
    return sp.exp(-eps_s ** 2 * r2) if kind is GA else sp.sqrt(1 + eps_s ** 2 * r2)


def _oracle(kind, role, op, off, eps, h):
    """Differentiate the kernel symbolically; x is the evaluation point, xc the centre."""
    if op is LAP:
        f = _phi(kind, (x - xc) ** 2 + (y - yc) ** 2)
        lx = lambda g: sp.diff(g, x, 2) + sp.diff(g, y, 2)  # noqa: E731
        lc = lambda g: sp.diff(g, xc, 2) + sp.diff(g, yc, 2)  # noqa: E731
        subs = {x: off[0] * h_s, y: off[1] * h_s, xc: 0, yc: 0}
    else:
        f = _phi(kind, (x - xc) ** 2)
        p = op.order
        lx = lambda g: sp.diff(g, x, p)  # noqa: E731
        lc = lambda g: sp.diff(g, xc, p)  # noqa: E731
        subs = {x: off[0] * h_s, xc: 0}
    g = {II: f, LI: lx(f), IL: lc(f), LL: lx(lc(f))}[role]
    return float(g.subs(subs).subs({eps_s: eps, h_s: h}))


CASES_1D = [(k, r, op, (o,)) for k in (GA, MQ) for r in (II, IL, LI, LL)
            for op in (D1, D2) for o in (-3, -1, 0, 2)]
CASES_2D = [(k, r, LAP, o) for k in (GA, MQ) for r in (II, IL, LI, LL)
            for o in ((0, 0), (1, 0), (1, 1), (0, 2))]


@pytest.mark.parametrize("kind,role,op,off", CASES_1D + CASES_2D)
def test_block_matches_symbolic(kind, role, op, off):
    eps, h = 0.9, 0.3
    want = _oracle(kind, role, op, off, eps, h)
    got = block_entry_numeric(kind, role, op, off, eps, h)
    assert got == pytest.approx(want, rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("kind,role,op,off", CASES_1D + CASES_2D)
@pytest.mark.parametrize("t", [1e-4, 0.01, 0.05])
def test_series_matches_numeric(kind, role, op, off, t):
    k = sum(o * o for o in off)
    if kind is MQ and k * t > 0.15:
        pytest.skip("outside the fast-convergence disc of sqrt(1 + k t)")
    h = 0.1
    eps = math.sqrt(t) / h
    q, s = block_entry_series(kind, role, op, off, 14)
    want = block_entry_numeric(kind, role, op, off, eps, h)
    got = series_eval(s, t) / h ** q
    assert got == pytest.approx(want, rel=1e-10, abs=1e-10 * abs(1 / h ** q))


def test_phi_examples():
    assert phi_numeric(GA, 0, 3.0) == 1
    assert phi_numeric(MQ, 0, 3.0) == 1
    assert phi_numeric(GA, 1, 1) == pytest.approx(0.3678794, abs=1e-7)
    assert phi_numeric(MQ, 3, 1) == 2


def test_entry_examples():
    e, h = 0.7, 0.2
    assert block_entry_numeric(GA, LI, D1, (-1,), e, h) == pytest.approx(
        2 * h * e * e * math.exp(-e * e * h * h), rel=1e-14)
    # beta class {-1, 1} collocated at node -1: offsets 0 and -2
    got = block_entry_numeric(GA, LL, D1, (0,), e, h) + block_entry_numeric(GA, LL, D1, (-2,), e, h)
    want = 2 * e * e + math.exp(-4 * e * e * h * h) * (-16 * e ** 4 * h * h + 2 * e * e)
    assert got == pytest.approx(want, rel=1e-14)


def test_series_examples():
    assert block_entry_series(GA, II, D1, (2,), 14) == (0, series_exp_neg(4, 14))
    assert block_entry_series(MQ, II, D1, (1,), 14) == (0, series_sqrt_one_plus(1, 14))
    for kind in (GA, MQ):
        for op, off in ((D1, (3,)), (D2, (1,)), (LAP, (1, 1))):
            assert block_entry_series(kind, II, op, off, 6)[1][0] == 1


@pytest.mark.parametrize("kind", [GA, MQ])
@pytest.mark.parametrize("o", [1, 2, 3])
def test_symmetry(kind, o):
    e, h = 1.3, 0.25
    assert block_entry_numeric(kind, II, D1, (o,), e, h) == block_entry_numeric(kind, II, D1, (-o,), e, h)
    for role in (LI, IL):
        assert block_entry_numeric(kind, role, D1, (o,), e, h) == pytest.approx(
            -block_entry_numeric(kind, role, D1, (-o,), e, h), rel=1e-15)
    assert block_entry_numeric(kind, LL, D1, (o,), e, h) == pytest.approx(
        block_entry_numeric(kind, LL, D1, (-o,), e, h), rel=1e-15)
    assert block_entry_numeric(kind, II, LAP, (o, 1), e, h) == pytest.approx(
        block_entry_numeric(kind, II, LAP, (1, o), e, h), rel=1e-15)


def test_order6_system_reproduced():
    e, h = sp.symbols("epsilon h", positive=True)
    E = sp.exp
    g = lambda k: E(-k * e ** 2 * h ** 2)  # noqa: E731
    printed = sp.Matrix([
        [1 - g(16), g(1) - g(9), g(4), -2 * h * e ** 2 * g(1) - 6 * h * e ** 2 * g(9), 1],
        [g(1) - g(9), 1 - g(4), g(1), -4 * h * e ** 2 * g(4), 1],
        [0, 0, 1, 0, 1],
        [-2 * h * e ** 2 * g(1) - 6 * h * e ** 2 * g(9), -4 * h * e ** 2 * g(4), 2 * h * e ** 2 * g(1),
         2 * e ** 2 + g(4) * (-16 * e ** 4 * h ** 2 + 2 * e ** 2), 0],
        [0, 0, 1, 0, 0],
    ])
    rhs = sp.Matrix([-4 * h * e ** 2 * g(4), -2 * h * e ** 2 * g(1), 0,
                     g(1) * (-4 * e ** 4 * h ** 2 + 2 * e ** 2), 0])
    A, b = assemble_numeric("d1-6", GA, e, h)
    assert sp.simplify(sp.Matrix(A) - printed) == sp.zeros(5, 5)
    assert sp.simplify(sp.Matrix(b) - rhs) == sp.zeros(5, 1)


def test_order6_series_entry():
    A, b = assemble_series("d1-6", GA, 8)
    assert A[0][0] == 1 - series_exp_neg(16, 8)
    assert b[0] == series_exp_neg(4, 8).scale(-4).shift(1)


def test_mq_series_radius():
    # sqrt(1 + k t) has its branch point at t = -1/k: the series diverges for k t > 1
    h, t, k = 0.1, 0.05, 36
    s = block_entry_series(MQ, II, D1, (6,), 14)[1]
    exact = block_entry_numeric(MQ, II, D1, (6,), math.sqrt(t) / h, h)
    assert abs(series_eval(s, t) - exact) > 1e-3
    assert k * t > 1
