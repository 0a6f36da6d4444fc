import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wptrace import fexpr
from wptrace import frfun as fr
from wptrace.fexpr import ExpPoly


def _fr(text, **kw):
    return fr.FRFunction.from_expr(text, h=1e-2, lmax=20.0, **kw)


def test_parse_exact_forms():
    assert fexpr.parse("sinh(x)") == ExpPoly({Fraction(1): (Fraction(1, 2),), Fraction(-1): (Fraction(-1, 2),)})
    assert fexpr.parse("x^2*exp(x)") == ExpPoly.monomial(2, 1)
    assert fexpr.parse("2*cosh(x/2) - exp(-x/2)") == ExpPoly.exp(Fraction(1, 2))
    assert fexpr.parse("(x+1)**2 - x*x - 2*x") == ExpPoly.const(1)


@pytest.mark.parametrize("bad, msg", [("log(x)", "unsupported"), ("y+1", "unknown name"),
                                      ("exp(x*x)", "c\\*x"), ("x**0.5", "integers"),
                                      ("1/0", "zero"), ("x +* 2", "syntax error")])
def test_parse_errors(bad, msg):
    with pytest.raises(fexpr.ExprError, match=msg):
        fexpr.parse(bad)


def test_numeric_evaluator():
    f = fexpr.numeric("x1*x2 + exp(-x1)^2 + sqrt(pi)", 2)
    x = np.array([[1.0, 2.0], [0.0, 3.0]])
    np.testing.assert_allclose(f(x), x[:, 0] * x[:, 1] + np.exp(-2 * x[:, 0]) + math.sqrt(math.pi))
    assert fexpr.numeric("x + 1", 1)(np.array([2.0])) == 3.0
    assert fexpr.numeric("2", 3)(np.zeros((4, 3))).shape == (4,)
    with pytest.raises(fexpr.ExprError, match="unknown name"):
        fexpr.numeric("x3", 2)


def test_P_and_L_on_exponentials():
    f = _fr("exp(x)")
    assert fr.apply_P(f).exact == fexpr.parse("exp(x) - 1")
    assert fr.apply_L(f).exact == ExpPoly.const(1)
    # L^2 (x e^x) = x
    assert fr.apply_op(_fr("x*exp(x)"), "LL").exact == ExpPoly.x()
    with pytest.raises(ValueError, match="unknown operator"):
        fr.apply_op(f, "Q")


def test_L_plus_P_is_identity_and_commute(rng):
    vals = rng.normal(size=2001)
    f = fr.FRFunction.from_samples(vals, 1e-2) + _fr("x^2*exp(x/2) + sinh(x)")
    total = fr.apply_L(f) + fr.apply_P(f)
    np.testing.assert_allclose(total.values(), f.values(), rtol=1e-12, atol=1e-9)
    lp, pl = fr.apply_op(f, "LP"), fr.apply_op(f, "PL")
    np.testing.assert_allclose(lp.values(), pl.values(), rtol=1e-12, atol=1e-9)


def test_convolution_closed_forms():
    one, e = _fr("1"), _fr("exp(x)")
    assert fr.convolve(one, one).exact == ExpPoly.x()
    assert fr.convolve(e, e).exact == ExpPoly.monomial(1, 1)
    assert fr.convolve(one, e).exact == fr.apply_P(e).exact


def test_convolution_with_one_is_P_on_samples(rng):
    f = fr.FRFunction.from_samples(np.cos(np.linspace(0, 20, 2001)), 1e-2)
    one = fr.FRFunction.from_samples(np.ones(2001), 1e-2)
    np.testing.assert_allclose(fr.convolve(f, one).values(), fr.apply_P(f).values(), atol=1e-12)


def test_grid_mismatch():
    with pytest.raises(fr.GridMismatch, match="grid mismatch"):
        _fr("1") + fr.FRFunction.from_expr("1", h=1e-3, lmax=20.0)


def test_construction_checks():
    with pytest.raises(ValueError):
        fr.FRFunction(ExpPoly(), h=0.0)
    with pytest.raises(ValueError):
        fr.FRFunction(ExpPoly(), h=0.3, lmax=10.0)
    with pytest.raises(ValueError):
        fr.FRFunction(ExpPoly(), h=1.0, lmax=10.0, rem=np.ones(3))


def test_norm_of_half_exponential():
    f = fr.FRFunction.from_expr("exp(x/2)", h=1e-3, lmax=40.0)
    assert fr.fr_norm(f, 0, 1) == pytest.approx(1.0, rel=1e-12)
    assert fr.weak_fr_norm(f, 0, 1) <= 2 * fr.fr_norm(f, 0, 1) * (1 + 1e-6)


def test_norm_counts_principal_part():
    f = _fr("3*exp(x) - 2*x*exp(x) + exp(x/2)")
    assert fr.fr_norm(f, 2, 1) == pytest.approx(3.0 + 1.0, rel=1e-12)


coef = st.integers(-5, 5)


@settings(max_examples=40, deadline=None)
@given(coef, coef, coef, coef)
def test_norm_triangle_inequality(a, b, c, d):
    f = _fr(f"{a}*exp(x) + {b}*exp(x/2)")
    g = _fr(f"{c}*x*exp(x) + {d}*cosh(x/3)")
    for K, N in ((1, 1), (2, 1), (2, 2)):
        assert fr.fr_norm(f + g, K, N) <= fr.fr_norm(f, K, N) + fr.fr_norm(g, K, N) + 1e-9


@pytest.mark.parametrize("K", [1, 2, 3])
def test_charFR_passes_for_members(K):
    poly = " + ".join(f"x^{k}" for k in range(K))
    f = fr.FRFunction.from_expr(f"({poly})*exp(x) + 3*exp(x/2) + 1", h=1e-3, lmax=40.0)
    rep = fr.check_charFR(f, K, 1)
    assert rep["passes"], rep
    assert rep["principal_of_LKf"] == []


def test_growth_slope_uses_polynomial_envelope():
    x = np.linspace(0, 40, 4001)
    y = (x + 1) ** 2 * np.exp(x / 2)
    assert abs(fr.growth_slope(x, y, 5.0, N=3)) < 1e-12
    assert fr.growth_slope(x, y, 5.0, N=1) > 0.05


def test_charFR_fails_for_high_degree():
    f = fr.FRFunction.from_expr("x^2*exp(x)", h=1e-3, lmax=40.0)
    rep = fr.check_charFR(f, 2, 1)
    assert not rep["passes"]
    assert rep["growth_slope"] > 0.3


def _sum_spec(n, phi=None, a=1.0):
    return fr.PseudoConvSpec(n, lambda x: float(np.sum(x)), phi or (lambda x: 1.0), a=a,
                             dh_dx1=lambda x: 1.0)


def test_pseudo_convolution_matches_convolution():
    f1, f2 = _fr("exp(x)"), _fr("x")
    ells = np.array([0.5, 1.0, 3.0, 6.0])
    got = fr.pseudo_convolve([f1, f2], _sum_spec(2), ells)
    np.testing.assert_allclose(got, fr.convolve(f1, f2).exact(ells), rtol=1e-9)
    three = fr.pseudo_convolve([_fr("1")] * 3, _sum_spec(3), [2.0])
    assert three[0] == pytest.approx(2.0, rel=1e-9)


def test_pseudo_convolution_linear_in_phi():
    fs = [_fr("exp(x/2)"), _fr("1")]
    ells = [1.0, 4.0]
    a = fr.pseudo_convolve(fs, _sum_spec(2, lambda x: 1.0 + x[1]), ells)
    b = fr.pseudo_convolve(fs, _sum_spec(2, lambda x: 3.0 + 3.0 * x[1]), ells)
    np.testing.assert_allclose(b, 3 * a, rtol=1e-10)


def test_pseudo_convolution_numeric_derivative():
    h = lambda x: float(x[0] + x[1] + 0.1 * math.exp(-x[1]))
    spec_fd = fr.PseudoConvSpec(2, h, lambda x: 1.0)
    spec_ex = fr.PseudoConvSpec(2, h, lambda x: 1.0, dh_dx1=lambda x: 1.0)
    fs = [_fr("1"), _fr("exp(x)")]
    np.testing.assert_allclose(fr.pseudo_convolve(fs, spec_fd, [3.0]),
                               fr.pseudo_convolve(fs, spec_ex, [3.0]), rtol=1e-7)


def test_pseudo_convolution_arity():
    with pytest.raises(ValueError, match="need 2"):
        fr.pseudo_convolve([_fr("1")], _sum_spec(2), [1.0])
    with pytest.raises(ValueError):
        fr.PseudoConvSpec(2, sum, sum, a=0.0)


def test_comparison_l0():
    assert fr.comparison_l0(_sum_spec(3)) == 0.0
    a = 1.5
    spec = fr.PseudoConvSpec(2, lambda x: float(np.sum(x) - math.exp(-x[0])), lambda x: 1.0, a=a)
    assert fr.comparison_l0(spec) == pytest.approx(math.exp(-a), rel=1e-12)


def test_class_E_constant_and_decaying():
    rep = fr.class_E_check(lambda x: 1.0, 2, 1.0, points=4)
    assert rep["passes"] and max(rep["sups"].values()) < 1e-8
    rep = fr.class_E_check(lambda x: math.exp(-x[0] - x[1]), 2, 1.0, bound=1.01, points=4)
    assert rep["passes"]
    assert rep["sups"]["11"] == pytest.approx(1.0, rel=1e-6)
    assert rep["sups"]["10"] == pytest.approx(math.exp(-1.0), rel=1e-6)


def test_class_E_linear_fails():
    rep = fr.class_E_check(lambda x: x[0], 1, 1.0, points=5)
    assert not rep["passes"]
    assert rep["sups"]["1"] == pytest.approx(math.exp(31.0), rel=1e-6)


def test_class_calE():
    rep = fr.class_calE_check(lambda x: float(np.sum(x) + math.exp(-x[0])), 2, 1.0, bound=1.01,
                               points=4, width=8.0)
    assert rep["passes"]
    with pytest.raises(ValueError, match="multi-index"):
        fr.class_E_check(lambda x: 1.0, 2, 1.0, alphas=[(0, 0)])


def _commutation_error(n):
    x = np.linspace(0, 20, n)
    h = 20 / (n - 1)
    f1 = fr.FRFunction.from_samples(np.exp(x) * (1 + 0.1 * np.cos(3 * x)), h, K=1)
    f2 = fr.FRFunction.from_samples(np.exp(x / 2) * np.sin(x) + x, h, K=0)
    lhs = fr.apply_op(fr.convolve(f1, f2), "L")
    rhs = fr.convolve(fr.apply_L(f1), f2)
    return np.max(np.abs(lhs.values() - rhs.values()) / (np.exp(x) + 1))


def test_convolution_commutation_on_samples():
    coarse, fine = _commutation_error(2001), _commutation_error(4001)
    assert coarse < 1e-4
    # trapezoid rules: second order in the step
    assert 3.5 < coarse / fine < 4.5


def test_pseudo_convolution_stability_for_remainders():
    # h - sum(x) and phi both in the class E; inputs in R^1 and R^2
    h = lambda x: float(x[0] + x[1] + 0.5 * math.exp(-x[0]))
    phi = lambda x: 1.0 + math.exp(-x[1])
    assert fr.class_calE_check(h, 2, 1.0, width=8.0, points=4)["passes"]
    assert fr.class_E_check(phi, 2, 1.0, width=8.0, points=4)["passes"]
    spec = fr.PseudoConvSpec(2, h, phi, dh_dx1=lambda x: 1.0 - 0.5 * math.exp(-x[0]))
    f1, f2 = _fr("exp(x/2)", N=1), _fr("x*exp(x/2)", N=2)
    step = 0.1
    ells = np.linspace(0.0, 20.0, 201)
    vals = fr.pseudo_convolve([f1, f2], spec, ells)
    g = fr.FRFunction.from_samples(vals, step, K=0, N=f1.N + f2.N + 2)
    rep = fr.check_charFR(g, 0, g.N)
    assert rep["passes"], rep
    # the same data is not a remainder at the smaller order N = 1
    assert not fr.check_charFR(g, 0, 1)["passes"]
