import math
from fractions import Fraction as Q

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rbfhfd.jets import (
    Jet1,
    Jet2,
    OutOfOrder,
    TestFunctionId,
    default_point,
    derivative_from_jet,
    exp,
    reciprocal,
    sin,
    tanh,
    testfn_jet as jet_of,
    testfn_jet1 as jet1_of,
    testfn_jet2 as jet2_of,
)
from rbfhfd.series import NotInvertible

pi = math.pi

# closed forms for the finite-difference oracle
CLOSED = {
    "u1": lambda x: math.sin(x * x),
    "u2": lambda x: math.sin(pi * x) + (math.exp(x) - 1) / (math.e - 1),
    "u4": lambda x, y: math.exp(-(x - 0.25) ** 2 - (y - 0.5) ** 2) * math.sin(pi * x) * math.cos(2 * pi * y),
    "u5": lambda x, y: 25 / (25 + (x - 0.2) ** 2 + 2 * y * y),
    "u6": lambda x, y: math.exp(x) * math.tanh(y / math.sqrt(2)),
    "u7": lambda x, y: (0.75 * math.exp(-((9 * x - 2) ** 2 + (9 * y - 2) ** 2) / 4)
                        + 0.75 * math.exp(-(9 * x + 1) ** 2 / 49 - (9 * y + 1) / 10)
                        + 0.5 * math.exp(-((9 * x - 7) ** 2 + (9 * y - 3) ** 2) / 4)
                        - 0.2 * math.exp(-(9 * x - 4) ** 2 - (9 * y - 7) ** 2)),
    "u8": lambda x, y: ((1 - x / 2) ** 6 * (1 - y / 2) ** 6 + 1000 * ((1 - x) * x * (1 - y) * y) ** 3
                        + y ** 6 * (1 - x / 2) ** 6 + x ** 6 * (1 - y / 2) ** 6),
    "u9": lambda x, y: math.sin(pi * x) * math.sin(pi * y),
}

ints = st.integers(min_value=-20, max_value=20)


@settings(max_examples=50, deadline=None)
@given(st.lists(ints, min_size=7, max_size=7), st.lists(ints, min_size=7, max_size=7))
def test_leibniz_exact(a, b):
    ja = Jet1(Q(0), tuple(Q(v) for v in a))
    jb = Jet1(Q(0), tuple(Q(v) for v in b))
    prod = ja * jb
    for k in range(7):
        want = sum(math.comb(k, i) * derivative_from_jet(ja, i) * derivative_from_jet(jb, k - i)
                   for i in range(k + 1))
        assert derivative_from_jet(prod, k) == want


def test_mul_square():
    x = Jet1.variable(0.0, 3)
    assert (x * x).coeffs == (0, 0, 1, 0)


def test_sin_of_square():
    x = Jet1.variable(0.0, 7)
    c = sin(x * x).coeffs
    want = [0, 0, 1, 0, 0, 0, -1 / 6, 0]
    assert all(abs(u - v) < 1e-16 for u, v in zip(c, want))


def test_exp_of_zero():
    assert exp(Jet1.constant(0.0, 0.0, 4)).coeffs == (1.0, 0.0, 0.0, 0.0, 0.0)


def test_reciprocal_zero_constant():
    with pytest.raises(NotInvertible):
        reciprocal(Jet1.variable(0.0, 3))


@pytest.mark.parametrize("x0", [-0.7, 0.0, 0.3, 1.2])
def test_tanh_identity(x0):
    x = Jet1.variable(x0, 10)
    T = tanh(x * 1.7)
    # d/dx tanh(1.7 x) = 1.7 (1 - tanh^2)
    lhs = [(k + 1) * T.coeffs[k + 1] for k in range(10)]
    one_minus = (1 - T * T).coeffs
    rhs = [1.7 * v for v in one_minus[:10]]
    assert all(abs(u - v) <= 1e-13 * max(1.0, abs(v)) for u, v in zip(lhs, rhs))


def test_tanh_identity_2d():
    X = Jet2.variable(0.1, 0.2, 6, 0)
    Y = Jet2.variable(0.1, 0.2, 6, 1)
    T = tanh(X * 0.5 + Y)
    dT_dy = [[(j + 1) * T.coeffs[i][j + 1] for j in range(6 - i)] for i in range(6)]
    w = (1 - T * T).coeffs
    for i in range(6):
        for j in range(6 - i):
            assert dT_dy[i][j] == pytest.approx(w[i][j], rel=1e-12, abs=1e-14)


def test_u1_examples():
    j = jet1_of("u1", 0.4, 3)
    assert derivative_from_jet(j, 0) == pytest.approx(math.sin(0.16), rel=1e-15)
    assert derivative_from_jet(j, 1) == pytest.approx(0.8 * math.cos(0.16), rel=1e-15)
    j = jet1_of("u1", 0.0, 8)
    assert j.coeffs[2] == 1 and j.coeffs[6] == pytest.approx(-1 / 6, rel=1e-15)
    assert all(j.coeffs[k] == 0 for k in (1, 3, 5, 7))
    assert derivative_from_jet(jet1_of("u2", 0.0, 1), 0) == 0


@pytest.mark.parametrize("name", ["u1", "u2"])
@pytest.mark.parametrize("x0", [0.1, 0.25, 0.4, 0.9])
def test_finite_differences_1d(name, x0):
    f, d = CLOSED[name], 1e-5
    j = jet1_of(name, x0, 2)
    fd1 = (f(x0 + d) - f(x0 - d)) / (2 * d)
    fd2 = (f(x0 + d) - 2 * f(x0) + f(x0 - d)) / (d * d)
    assert derivative_from_jet(j, 1) == pytest.approx(fd1, rel=1e-6)
    assert derivative_from_jet(j, 2) == pytest.approx(fd2, rel=1e-4, abs=1e-4)


@pytest.mark.parametrize("name", ["u4", "u5", "u6", "u7", "u8", "u9"])
def test_finite_differences_2d(name):
    f, d = CLOSED[name], 1e-5
    x0, y0 = default_point(name)
    x0, y0 = x0 + 0.013, y0 + 0.021  # avoid accidental stationary points
    j = jet2_of(name, x0, y0, 2)
    assert derivative_from_jet(j, (0, 0)) == pytest.approx(f(x0, y0), rel=1e-14)
    fx = (f(x0 + d, y0) - f(x0 - d, y0)) / (2 * d)
    fy = (f(x0, y0 + d) - f(x0, y0 - d)) / (2 * d)
    fxx = (f(x0 + d, y0) - 2 * f(x0, y0) + f(x0 - d, y0)) / d ** 2
    fyy = (f(x0, y0 + d) - 2 * f(x0, y0) + f(x0, y0 - d)) / d ** 2
    fxy = (f(x0 + d, y0 + d) - f(x0 + d, y0 - d) - f(x0 - d, y0 + d) + f(x0 - d, y0 - d)) / (4 * d * d)
    scale1 = max(abs(fx), abs(fy), 1e-3)
    scale2 = max(abs(fxx), abs(fyy), abs(fxy), 1e-2)
    assert abs(derivative_from_jet(j, (1, 0)) - fx) <= 1e-6 * scale1
    assert abs(derivative_from_jet(j, (0, 1)) - fy) <= 1e-6 * scale1
    for idx, v in (((2, 0), fxx), ((0, 2), fyy), ((1, 1), fxy)):
        assert abs(derivative_from_jet(j, idx) - v) <= 1e-4 * scale2


POINTS = [(0.1, 0.2), (0.25, 0.25), (0.0, 0.0), (0.37, -0.6)]


@pytest.mark.parametrize("pt", POINTS)
def test_u9_laplacian(pt):
    j = jet2_of("u9", pt[0], pt[1], 8)
    u = j.value
    if u == 0:
        assert abs(j.laplacian()) < 1e-12
    else:
        assert j.laplacian() == pytest.approx(-2 * pi ** 2 * u, rel=1e-12)
    # also holds for higher derivatives of the identity
    for idx in ((2, 0), (1, 3)):
        a, b = idx
        lap = derivative_from_jet(j, (a + 2, b)) + derivative_from_jet(j, (a, b + 2))
        assert lap == pytest.approx(-2 * pi ** 2 * derivative_from_jet(j, idx), rel=1e-12, abs=1e-12)


def test_u9_closed_form_example():
    j = jet2_of("u9", 0.1, 0.2, 2)
    want = -2 * pi ** 2 * math.sin(0.1 * pi) * math.sin(0.2 * pi)
    assert j.laplacian() == pytest.approx(want, rel=1e-14)
    j = jet2_of("u9", 0.25, 0.25, 2)
    assert derivative_from_jet(j, (2, 0)) == pytest.approx(-pi ** 2 * math.sin(pi / 4) ** 2, rel=1e-14)


def test_u9_mpmath():
    with mpmath.workdps(40):
        j = jet2_of("u9", mpmath.mpf("0.1"), mpmath.mpf("0.2"), 4)
        assert abs(j.laplacian() + 2 * mpmath.pi ** 2 * j.value) < mpmath.mpf(10) ** -35


def test_u8_is_degree_12():
    j = jet2_of("u8", 0.1, 0.2, 15)
    for i in range(16):
        for k in range(16 - i):
            if i + k > 12:
                assert abs(j.coeffs[i][k]) < 1e-9


def test_u5_stationary():
    j = jet2_of("u5", 0.2, 0.0, 2)
    assert derivative_from_jet(j, (1, 0)) == 0


def test_derivative_index_rules():
    j = Jet1(0.0, (0.0, 0.0, 1.0))
    assert derivative_from_jet(j, 2) == 2
    assert derivative_from_jet(jet1_of("u1", 0.4, 2), 0) == pytest.approx(math.sin(0.16))
    with pytest.raises(OutOfOrder):
        derivative_from_jet(j, 3)
    with pytest.raises(OutOfOrder):
        derivative_from_jet(jet2_of("u9", 0.1, 0.2, 3), (2, 2))


def test_testfn_id():
    assert [f.value for f in TestFunctionId] == ["u1", "u2", "u4", "u5", "u6", "u7", "u8", "u9"]
    assert TestFunctionId.parse("U4").dim == 2
    with pytest.raises(ValueError):
        TestFunctionId.parse("u3")
    assert jet_of("u2", (0.25,), 3).K == 3
