"""Composition algebra: exact polynomial identities and sampled convergence."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semiweyl.errors import DomainError
from semiweyl.moyal import (PolySymbol, moyal_compose, moyal_term,
                            polynomial_identity_residual, verify_composition)
from semiweyl.weylquant import GridSpec, sample_symbol, weyl_quantize_line

ETA = PolySymbol({(0, 1): 1.0})
Y = PolySymbol({(1, 0): 1.0})


def test_zeroth_term_is_the_product():
    s1 = PolySymbol({(2, 1): 1.0, (0, 0): -3.0})
    s2 = PolySymbol({(1, 1): 2.0, (3, 0): 0.5})
    assert moyal_term(s1, s2, 0, 0.3) == s1 * s2


def test_first_term_of_momentum_position_is_the_constant():
    h = 0.3
    term = moyal_term(ETA, Y, 1, h)
    assert term.coeffs == {(0, 0, 0): -1j * h / 2.0}


def test_first_term_vanishes_for_equal_symbols():
    s = PolySymbol({(2, 0): 1.0, (1, 1): -0.7, (0, 3): 2.0})
    assert moyal_term(s, s, 1, 0.2).coeffs == {}


def test_composition_with_unit_symbol_is_identity():
    one = PolySymbol({(0, 0): 1.0})
    s = PolySymbol({(2, 1): 1.5, (0, 2): -1.0, (1, 0): 0.25})
    for K in range(4):
        assert moyal_compose(s, one, K, 0.1) == s
        assert moyal_compose(one, s, K, 0.1) == s


def test_momentum_squared_after_position_terminates():
    h = 0.2
    comp = moyal_compose(PolySymbol({(0, 2): 1.0}), Y, 1, h)
    assert comp.coeffs == {(1, 2, 0): 1.0 + 0j, (0, 1, 0): -1j * h}
    # further terms vanish, the series has genuinely terminated
    assert moyal_term(PolySymbol({(0, 2): 1.0}), Y, 2, h).coeffs == {}


def test_commutator_of_quadratics():
    h = 0.4
    p2 = PolySymbol({(0, 2): 1.0})
    x2 = PolySymbol({(2, 0): 1.0})
    bracket = moyal_compose(p2, x2, 2, h) - moyal_compose(x2, p2, 2, h)
    assert bracket.coeffs == {(1, 1, 0): -4j * h}


@settings(max_examples=60, deadline=None)
@given(st.dictionaries(
           st.tuples(st.integers(0, 3), st.integers(0, 3)),
           st.integers(-3, 3).map(float), min_size=1, max_size=4),
       st.dictionaries(
           st.tuples(st.integers(0, 3), st.integers(0, 3)),
           st.integers(-3, 3).map(float), min_size=1, max_size=4),
       st.integers(0, 3))
def test_term_degree_and_h_power_bookkeeping(c1, c2, k):
    s1, s2 = PolySymbol(c1), PolySymbol(c2)
    h = 0.37
    term = moyal_term(s1, s2, k, h)
    if term.coeffs:
        # each expansion step trades one degree from each factor
        assert term.total_degree <= s1.total_degree + s2.total_degree - 2 * k
    # the k-th term carries exactly k powers of h
    ref = moyal_term(s1, s2, k, 1.0).scale(h ** k)
    ys = np.linspace(-2, 2, 5)[:, None]
    es = np.linspace(-1.5, 1.5, 5)[None, :]
    np.testing.assert_allclose(term.eval(ys, es), ref.eval(ys, es),
                               rtol=1e-12, atol=1e-12)


def test_first_order_constant_recovered_from_matrices():
    # fit the scalar t in Op(eta) Op(y) = Op(y eta) + t on smooth states
    grid = GridSpec()
    h = 0.1
    A = weyl_quantize_line(sample_symbol(lambda y, e: e + 0 * y, grid, h),
                           grid, h).entries
    B = weyl_quantize_line(sample_symbol(lambda y, e: y + 0 * e, grid, h),
                           grid, h).entries
    C = weyl_quantize_line(sample_symbol(lambda y, e: y * e, grid, h),
                           grid, h).entries
    for x0 in (-2.0, 0.0, 1.5):
        v = np.exp(-(grid.xs - x0) ** 2 / 2.0)
        t = np.vdot(v, A @ (B @ v) - C @ v) / np.vdot(v, v)
        assert abs(t - (-1j * h / 2.0)) <= 1e-10


@pytest.mark.parametrize("s1, s2", [
    (ETA, Y),
    (PolySymbol({(0, 2): 1.0}), PolySymbol({(2, 0): 1.0})),
    (PolySymbol({(0, 2): 1.0, (1, 1): 0.5, (0, 0): 1.0}),
     PolySymbol({(3, 0): 1.0, (1, 0): -2.0})),
    (PolySymbol({(1, 1): 1.0}), PolySymbol({(2, 0): 1.0})),
])
def test_polynomial_composition_identity_on_grid(s1, s2):
    assert polynomial_identity_residual(s1, s2, 0.1) <= 1e-8


def test_identity_check_rejects_momentum_in_second_factor():
    with pytest.raises(DomainError, match="position alone"):
        polynomial_identity_residual(Y, ETA, 0.1)


def _gauss_pair():
    g1 = lambda y, e: np.exp(-y ** 2 / 2.0 - e ** 2 / 1.5)
    g2 = lambda y, e: np.exp(-(y - 0.4) ** 2 / 1.8 - (e + 0.3) ** 2 / 2.2)
    return g1, g2


@pytest.mark.parametrize("K", [0, 1, 2])
def test_truncation_slope_for_gaussian_pair(K):
    g1, g2 = _gauss_pair()
    hs = np.geomspace(0.15, 0.02, 8)
    slope = verify_composition(g1, g2, K, hs)
    assert slope >= K + 1 - 0.3


def test_verifier_rejects_high_truncation_order():
    g1, g2 = _gauss_pair()
    with pytest.raises(DomainError, match="K <= 3"):
        verify_composition(g1, g2, 4, np.geomspace(0.15, 0.02, 4))


def test_negative_term_index_rejected():
    with pytest.raises(DomainError):
        moyal_term(ETA, Y, -1, 0.1)


def test_floor_flag_when_residual_vanishes():
    # a constant second factor quantizes to the identity, so every
    # truncation residual sits at round-off and the fit degenerates
    g1, _ = _gauss_pair()
    one = lambda y, e: 1.0 + 0 * y + 0 * e
    hs = np.geomspace(0.15, 0.02, 5)
    with pytest.warns(UserWarning, match="floor"):
        slope = verify_composition(g1, one, 1, hs)
    assert np.isnan(slope)
