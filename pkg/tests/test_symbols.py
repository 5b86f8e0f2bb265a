"""Ellipticity certificates and order fitting."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from symstrat.dsl import BinOp, Num, SymbolExpr
from symstrat.errors import DegenerateFit, GridError
from symstrat.symbols import (FrequencyGridSpec, Symbol, check_ellipticity,
                              fit_order)

X0 = [[0.0, 0.0]]


def test_sqrt_symbol_elliptic_with_analytic_bounds():
    # (1+|xi|)/sqrt(2) <= (1+|xi|^2)^(1/2) <= 1+|xi| gives the constants
    s = Symbol.parse("(1+abs2(k))^(1/2)", 1.0, 2)
    rep = check_ellipticity(s, X0)
    assert rep.elliptic
    assert rep.c1 >= 1.0 / np.sqrt(2.0) - 1e-12
    assert rep.c2 <= 1.0 + 1e-12
    assert rep.c1 <= rep.c2


def test_constant_symbol():
    s = Symbol.parse("5", 0.0, 2)
    rep = check_ellipticity(s, X0)
    assert rep.elliptic
    assert rep.c1 == pytest.approx(5.0, abs=1e-12)
    assert rep.c2 == pytest.approx(5.0, abs=1e-12)


def test_degenerate_symbol_has_witness_on_axis():
    s = Symbol.parse("k1", 1.0, 2)
    rep = check_ellipticity(s, X0)
    assert not rep.elliptic
    assert rep.c1 is None and rep.c2 is None
    assert rep.witness is not None
    assert abs(rep.witness.xi[0]) < 1e-12


def test_grid_preconditions():
    s = Symbol.parse("1", 0.0, 2)
    with pytest.raises(GridError):
        check_ellipticity(s, X0, FrequencyGridSpec(points_per_axis=1))
    with pytest.raises(GridError):
        check_ellipticity(s, X0, FrequencyGridSpec(box_radius=2.0,
                                                   max_radius=5.0))
    with pytest.raises(GridError):
        check_ellipticity(s, [[0.0, 0.0, 0.0]])


def test_report_serializes():
    s = Symbol.parse("k1", 1.0, 2)
    rep = check_ellipticity(s, X0)
    blob = rep.to_json()
    assert '"elliptic": false' in blob
    assert '"witness"' in blob


@given(st.floats(min_value=0.1, max_value=50).map(float))
@settings(max_examples=20, deadline=None)
def test_scale_covariance(c):
    s = Symbol.parse("(1+abs2(k))^(1/2)", 1.0, 2)
    scaled = Symbol(SymbolExpr(BinOp("*", Num(complex(c)), s.expr.ast), 2),
                    1.0, 2)
    rep = check_ellipticity(s, X0)
    rep_scaled = check_ellipticity(scaled, X0)
    assert rep_scaled.c1 == pytest.approx(c * rep.c1, rel=1e-12)
    assert rep_scaled.c2 == pytest.approx(c * rep.c2, rel=1e-12)


def test_monotone_refinement():
    # nested grids: every coarse tensor node appears in the fine grid
    s = Symbol.parse("(2+abs2(k))^(1/2)*(1+normx2(x))", 1.0, 2)
    coarse = FrequencyGridSpec(points_per_axis=17, random_per_decade=16, seed=3)
    fine = FrequencyGridSpec(points_per_axis=33, random_per_decade=16, seed=3)
    pts_c = coarse.points(2)
    pts_f = fine.points(2)
    as_set = {tuple(p) for p in np.round(pts_f, 12)}
    assert all(tuple(p) in as_set for p in np.round(pts_c[:17 * 17], 12))
    x_samples = [[0.0, 0.0], [0.7, 0.3]]
    rep_c = check_ellipticity(s, x_samples, coarse)
    rep_f = check_ellipticity(s, x_samples, fine)
    assert rep_f.c1 <= rep_c.c1 + 1e-15
    assert rep_f.c2 >= rep_c.c2 - 1e-15


# --------------------------------------------------------------------------
# order fitting

RADII = np.logspace(1, 4, 12)


def test_fit_order_sqrt_symbol():
    s = Symbol.parse("(1+abs2(k))^(1/2)", 1.0, 2)
    assert fit_order(s, [1.0, 0.0], RADII) == pytest.approx(1.0, abs=0.05)


def test_fit_order_constant():
    s = Symbol.parse("1", 0.0, 2)
    assert fit_order(s, [0.6, 0.8], RADII) == pytest.approx(0.0, abs=1e-9)


def test_fit_order_quadratic():
    s = Symbol.parse("abs2(k)", 2.0, 2)
    assert fit_order(s, [0.6, 0.8], RADII) == pytest.approx(2.0, abs=0.05)


def test_fit_order_preconditions():
    s = Symbol.parse("1", 0.0, 2)
    with pytest.raises(GridError):
        fit_order(s, [1, 0], np.logspace(1, 4, 5))
    with pytest.raises(GridError):
        fit_order(s, [1, 0], np.linspace(1, 50, 12))
    with pytest.raises(GridError):
        fit_order(s, [0, 0], RADII)


def test_fit_order_degenerate_ray():
    s = Symbol.parse("k1", 1.0, 2)
    with pytest.raises(DegenerateFit):
        fit_order(s, [0.0, 1.0], RADII)


def test_fit_order_multiplicative():
    s1 = Symbol.parse("(1+abs2(k))^(1/2)", 1.0, 2)
    s2 = Symbol.parse("(2+abs2(k))", 2.0, 2)
    prod = Symbol(SymbolExpr(BinOp("*", s1.expr.ast, s2.expr.ast), 2), 3.0, 2)
    f1 = fit_order(s1, [1, 0], RADII)
    f2 = fit_order(s2, [1, 0], RADII)
    fp = fit_order(prod, [1, 0], RADII)
    assert fp == pytest.approx(f1 + f2, abs=0.1)
