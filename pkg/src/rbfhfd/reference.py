"""Classical compact finite-difference weights (the eps -> 0 limits).

Nondimensional: function-value weights are per ``h^p``.  1D tables are
written out for negative offsets and mirrored (antisymmetric for the first
derivative).  2D tables give one value per neighbour ring.
"""

from fractions import Fraction as Q

from .formulas import FormulaId, catalog


def _mirror(neg: dict, odd: bool) -> dict:
    out = dict(neg)
    for k, v in neg.items():
        if k < 0:
            out[-k] = -v if odd else v
    return out


_1D = {
    # (alpha for offsets <= 0, beta for negative offsets)
    FormulaId.D1_4: ({-1: Q(-3, 4), 0: Q(0)}, {-1: Q(-1, 4)}),
    FormulaId.D1_6: ({-2: Q(-1, 36), -1: Q(-7, 9), 0: Q(0)}, {-1: Q(-1, 3)}),
    FormulaId.D1_8: ({-2: Q(-25, 216), -1: Q(-20, 27), 0: Q(0)},
                     {-2: Q(-1, 36), -1: Q(-4, 9)}),
    FormulaId.D1_10: ({-3: Q(-1, 600), -2: Q(-101, 600), -1: Q(-17, 24), 0: Q(0)},
                      {-2: Q(-1, 20), -1: Q(-1, 2)}),
    FormulaId.D2_4: ({-1: Q(6, 5), 0: Q(-12, 5)}, {-1: Q(-1, 10)}),
    FormulaId.D2_6: ({-2: Q(3, 44), -1: Q(12, 11), 0: Q(-51, 22)}, {-1: Q(-2, 11)}),
    FormulaId.D2_8: ({-2: Q(155, 786), -1: Q(320, 393), 0: Q(-265, 131)},
                     {-2: Q(-23, 2358), -1: Q(-344, 1179)}),
    FormulaId.D2_10: ({-3: Q(79, 16182), -2: Q(519, 1798), -1: Q(1065, 1798),
                       0: Q(-14335, 8091)},
                      {-2: Q(-43, 1798), -1: Q(-334, 899)}),
}

# ring -> weight; rings: 0 centre, 1 axis, 2 diagonal, 3 far axis
_2D = {
    FormulaId.LAP_2: ({0: Q(-4), 1: Q(1)}, {}),
    FormulaId.LAP_4: ({0: Q(-5), 1: Q(1), 2: Q(1, 4)}, {1: Q(-1, 8)}),
    FormulaId.LAP_6: ({0: Q(-105, 23), 1: Q(12, 23), 2: Q(12, 23), 3: Q(9, 92)},
                      {1: Q(-5, 23), 2: Q(-1, 46)}),
}


def _ring(o) -> int:
    return {0: 0, 1: 1, 2: 2, 4: 3}[o[0] ** 2 + o[1] ** 2]


def _build():
    table = {}
    for fid, (a, b) in _1D.items():
        odd = fid.operator.order == 1
        table[fid] = (_mirror(a, odd), _mirror(b, False))
    for fid, (a, b) in _2D.items():
        spec = catalog(fid)
        table[fid] = ({o: a[_ring(o)] for o in spec.s_offsets},
                      {o: b[_ring(o)] for o in spec.mu_offsets})
    return table


FLAT_REFERENCE = _build()
