from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semiweyl.errors import CapabilityError, DomainError, FitError
from semiweyl.symbolfam import (
    BumpFunction,
    CutoffFamily,
    OrderFunction,
    deriv_sup_norm,
    estimate_class_exponents,
    make_window_family,
    plateau_bump,
    standard_bump,
)

# Sup norms of |chi^(j)| for the standard mollifier on the package's 4096-point
# support sample, frozen from an independent run of exact symbolic
# differentiation (sympy) evaluated on the identical grid.
MOLLIFIER_DERIV_SUPS = {
    0: 9.999999403662e-01,
    1: 2.170356388763e+00,
    2: 2.106577012035e+01,
    3: 5.066534359733e+02,
    4: 2.260229897664e+04,
    5: 1.620920125132e+06,
    6: 2.214705795864e+08,
    8: 8.963265690674e+12,
}


def central_fd(f, x, j, step=5e-3):
    """High-order central finite difference for the j-th derivative.

    Stencil weights on offsets -m..m solve the Taylor moment system, so the
    rule is exact on polynomials up to degree 2m (m = j//2 + 5).
    """
    if j == 0:
        return f(x)
    m = j // 2 + 5
    ks = np.arange(-m, m + 1)
    A = np.zeros((2 * m + 1, 2 * m + 1))
    for p in range(2 * m + 1):
        A[p] = (ks * step) ** p / factorial(p)
    b = np.zeros(2 * m + 1)
    b[j] = 1.0
    w = np.linalg.solve(A, b)
    return float(np.dot(w, np.array([f(x + k * step) for k in ks])))


class TestBumpFunction:
    def test_frozen_derivative_sup_norms(self):
        chi = standard_bump(max_derivative_order=8)
        fam = make_window_family(chi, E=0.0, delta=0.0, c=1.0)
        for j, expected in MOLLIFIER_DERIV_SUPS.items():
            got = deriv_sup_norm(fam, j, 1.0)
            assert got == pytest.approx(expected, rel=1e-8), f"order {j}"

    def test_agrees_with_central_differences(self):
        # the derivative evaluations must track high-order central FD at
        # interior points to 1e-6 relative
        chi = standard_bump(max_derivative_order=6)
        pts = np.array([-0.82, -0.5, -0.13, 0.2, 0.44, 0.71])
        for j in range(1, 7):
            exact = chi.derivative(pts, j)
            approx = np.array([central_fd(chi, float(x), j) for x in pts])
            scale = np.max(np.abs(exact))
            assert np.max(np.abs(exact - approx)) <= 1e-6 * scale, f"order {j}"

    def test_support_and_range(self):
        chi = standard_bump()
        xs = np.linspace(-3, 3, 1001)
        v = chi(xs)
        assert np.all(v >= 0) and np.all(v <= 1)
        assert np.all(v[np.abs(xs) >= 1] == 0)
        assert chi(1.0) == 0.0 and chi(-1.0) == 0.0  # endpoint tie policy
        assert chi(0.0) == pytest.approx(1.0, abs=1e-15)

    def test_plateau_bump(self):
        psi = plateau_bump(plateau=(-1.0, 1.0), support=(-2.0, 2.0),
                           max_derivative_order=4)
        xs = np.linspace(-2.5, 2.5, 2001)
        v = psi(xs)
        assert np.all(v >= 0) and np.all((v <= 1) | np.isclose(v, 1, atol=1e-12))
        assert np.all(v[np.abs(xs) <= 1.0] == 1.0)
        assert np.all(v[np.abs(xs) >= 2.0] == 0.0)
        # edges monotone (flat to round-off at the far tail), strictly
        # decreasing through the middle of the transition
        edge = xs[(xs > 1.0) & (xs < 2.0)]
        assert np.all(np.diff(psi(edge)) <= 0)
        mid = xs[(xs > 1.2) & (xs < 1.8)]
        assert np.all(np.diff(psi(mid)) < 0)

    def test_plateau_derivative_matches_fd(self):
        psi = plateau_bump(plateau=(-0.5, 0.5), support=(-1.5, 1.5),
                           max_derivative_order=4)
        pts = np.array([-1.2, -0.8, 0.9, 1.25])
        for j in (1, 2, 3):
            exact = psi.derivative(pts, j)
            approx = np.array([central_fd(psi, float(x), j) for x in pts])
            assert np.max(np.abs(exact - approx)) <= 1e-6 * max(np.max(np.abs(exact)), 1.0)

    def test_bad_construction(self):
        with pytest.raises(DomainError):
            BumpFunction("standard_mollifier", (1.0, -1.0))
        with pytest.raises(DomainError):
            BumpFunction("plateau", (-1.0, 1.0))  # plateau interval missing
        with pytest.raises(DomainError):
            BumpFunction("plateau", (-1.0, 1.0), plateau=(-2.0, 0.5))
        with pytest.raises(DomainError):
            BumpFunction("nope", (-1.0, 1.0))

    def test_derivative_capability_error(self):
        chi = standard_bump(max_derivative_order=3)
        with pytest.raises(CapabilityError):
            chi.derivative(0.3, 4)


class TestOrderFunction:
    def test_values(self):
        one = OrderFunction("one")
        jap = OrderFunction("jap_bracket_sq")
        eta = np.linspace(-4, 4, 101)
        assert np.all(one(eta) == 1.0)
        assert np.all(jap(eta) >= 1.0)
        assert jap(np.array([2.0])) == pytest.approx(5.0)
        with pytest.raises(DomainError):
            OrderFunction("weird")


class TestCutoffFamily:
    def test_window_rule_exact(self):
        chi = standard_bump()
        fam = make_window_family(chi, E=1.0, delta=0.25, c=1.0)
        for h in (1.0, 0.3, 0.04, 1e-3):
            for t in (-0.9, -0.3, 0.0, 0.5, 0.99):
                x = 1.0 + 1.0 * h ** 0.25 * t
                assert fam.value(x, h) == pytest.approx(chi(t), abs=1e-15)

    @settings(deadline=None, max_examples=60)
    @given(h=st.floats(1e-6, 1.0), t=st.floats(-1.2, 1.2),
           delta=st.floats(0.0, 0.49), c=st.floats(0.1, 5.0))
    def test_window_rule_property(self, h, t, delta, c):
        chi = standard_bump()
        fam = make_window_family(chi, E=0.3, delta=delta, c=c)
        x = 0.3 + c * h ** delta * t
        assert abs(fam.value(x, h) - chi(t)) <= 1e-12

    def test_support_shrinks_into_fixed_interval(self):
        fam = make_window_family(standard_bump(), E=0.0, delta=0.4, c=2.0)
        a1, b1 = fam.support(1.0)
        for h in (0.5, 0.1, 0.01):
            a, b = fam.support(h)
            assert a1 <= a < b <= b1

    def test_support_example(self):
        fam = make_window_family(standard_bump(), E=0.0, delta=0.4, c=2.0)
        a, b = fam.support(0.01)
        # 2 * 0.01^0.4 = 0.316979...
        assert a == pytest.approx(-0.3170, abs=5e-4)
        assert b == pytest.approx(0.3170, abs=5e-4)

    def test_domain_errors(self):
        with pytest.raises(DomainError, match="theory requires"):
            make_window_family(standard_bump(), E=1.0, delta=0.6, c=1.0)
        with pytest.raises(DomainError, match="theory requires"):
            make_window_family(standard_bump(), E=1.0, delta=-0.1, c=1.0)
        with pytest.raises(DomainError):
            make_window_family(standard_bump(), E=1.0, delta=0.2, c=0.0)


class TestDerivSupNorm:
    def test_delta_zero_h_independent(self):
        fam = make_window_family(standard_bump(), E=1.0, delta=0.0, c=1.0)
        vals = [deriv_sup_norm(fam, 3, h) for h in (1.0, 0.3, 0.05)]
        assert np.ptp(vals) <= 1e-12 * vals[0]
        assert vals[0] == pytest.approx(MOLLIFIER_DERIV_SUPS[3], rel=1e-8)

    def test_rescaled_sup(self):
        # delta=1/4, c=1, h=1e-4: (c h^delta)^{-2} = 0.1^{-2} = 100, confirmed
        # against the brute-force sampling oracle below
        fam = make_window_family(standard_bump(), E=0.0, delta=0.25, c=1.0)
        got = deriv_sup_norm(fam, 2, 1e-4)
        assert got == pytest.approx(100.0 * MOLLIFIER_DERIV_SUPS[2], rel=1e-9)
        # sampling oracle, independent of the chain rule inside derivative():
        # FD at the peak location reproduces the sup
        a, b = fam.support(1e-4)
        xs = np.linspace(a, b, 4096)
        peak = xs[np.argmax(np.abs(fam.derivative(xs, 1e-4, 2)))]
        brute = abs(central_fd(lambda y: fam.value(y, 1e-4), peak, 2, step=5e-4))
        assert got == pytest.approx(brute, rel=1e-6)

    def test_j0_is_one(self):
        fam = make_window_family(standard_bump(), E=2.0, delta=0.3, c=0.7)
        assert deriv_sup_norm(fam, 0, 0.2) == pytest.approx(1.0, abs=1e-6)

    def test_capability(self):
        fam = make_window_family(standard_bump(max_derivative_order=2), 0.0, 0.0, 1.0)
        with pytest.raises(CapabilityError):
            deriv_sup_norm(fam, 3, 0.5)


class TestClassExponents:
    H_GRID = np.geomspace(0.3, 0.003, 8)

    def test_delta_zero(self):
        fam = make_window_family(standard_bump(), E=1.0, delta=0.0, c=1.0)
        for j, slope in estimate_class_exponents(fam, 4, self.H_GRID):
            assert abs(slope) <= 0.02, f"order {j}"

    def test_delta_quarter(self):
        fam = make_window_family(standard_bump(), E=1.0, delta=0.25, c=1.0)
        exps = dict(estimate_class_exponents(fam, 4, self.H_GRID))
        assert exps[4] == pytest.approx(-1.0, abs=0.05)
        assert exps[1] == pytest.approx(-0.25, abs=0.02)

    def test_delta_tenth(self):
        fam = make_window_family(standard_bump(), E=1.0, delta=0.1, c=1.0)
        exps = dict(estimate_class_exponents(fam, 1, self.H_GRID))
        assert exps[1] == pytest.approx(-0.1, abs=0.02)

    def test_fit_error(self):
        fam = make_window_family(standard_bump(), E=1.0, delta=0.1, c=1.0)
        with pytest.raises(FitError):
            estimate_class_exponents(fam, 2, [0.1, 0.05])
