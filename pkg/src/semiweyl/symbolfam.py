"""Base bumps, order functions, and h-indexed cutoff window families.

The window families rho_h(x) = chi((x - E)/(c h^delta)) are the basic
h-dependent symbols of the package: their derivative sup norms grow like
h^{-delta j}, which estimate_class_exponents verifies empirically.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import CapabilityError, DomainError, FitError
from .fitting import fit_loglog

# ---------------------------------------------------------------------------
# the standard mollifier chi(t) = exp(1 - 1/(1 - t^2)) on (-1, 1)

def _mollifier(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = np.abs(t) < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - t[m] ** 2))
    return out


@lru_cache(maxsize=None)
def _mollifier_poly(j):
    """Numerator polynomial of the j-th mollifier derivative.

    chi^(j)(t) = P_j(t) / (1 - t^2)^{2j} * chi(t); the P_j follow the
    recurrence P_{j+1} = P_j'(1-t^2)^2 + (4j t (1-t^2) - 2t) P_j with
    P_0 = 1, carried in exact rational arithmetic.
    """
    if j == 0:
        return np.polynomial.Polynomial([Fraction(1)])
    P = _mollifier_poly(j - 1)
    t = np.polynomial.Polynomial([Fraction(0), Fraction(1)])
    one_mt2 = np.polynomial.Polynomial([Fraction(1), Fraction(0), Fraction(-1)])
    k = j - 1
    return P.deriv() * one_mt2 ** 2 + (4 * k * t * one_mt2 - 2 * t) * P


@lru_cache(maxsize=None)
def _mollifier_poly_float(j):
    return np.polynomial.Polynomial([float(c) for c in _mollifier_poly(j).coef])


def _mollifier_deriv(t, j):
    if j == 0:
        return _mollifier(t)
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    # stay away from the support edge: chi and all derivatives vanish to
    # infinite order there, while the rational prefactor overflows
    m = np.abs(t) < 1.0 - 1e-7
    tm = t[m]
    out[m] = _mollifier_poly_float(j)(tm) / (1.0 - tm ** 2) ** (2 * j) * _mollifier(tm)
    return out


# cumulative integral of the mollifier, used to build plateau edges
_EDGE_GRID = np.linspace(-1.0, 1.0, 8193)
_EDGE_CUM = np.concatenate([[0.0], np.cumsum(
    (_mollifier(_EDGE_GRID)[1:] + _mollifier(_EDGE_GRID)[:-1]) / 2.0
)]) * (_EDGE_GRID[1] - _EDGE_GRID[0])
_MOLLIFIER_MASS = _EDGE_CUM[-1]
_EDGE_SPLINE = CubicSpline(_EDGE_GRID, _EDGE_CUM / _MOLLIFIER_MASS)


def _edge(u):
    """Rising edge: 0 at u<=0, 1 at u>=1, the normalized mollifier integral between."""
    u = np.asarray(u, dtype=float)
    # clip: the spline can over/undershoot [0,1] by interpolation round-off
    return np.clip(_EDGE_SPLINE(np.clip(2.0 * u - 1.0, -1.0, 1.0)), 0.0, 1.0)


def _edge_deriv(u, j):
    # d^j/du^j edge(u) = 2^j chi^{(j-1)}(2u - 1) / mass for j >= 1
    u = np.asarray(u, dtype=float)
    return 2.0 ** j * _mollifier_deriv(2.0 * u - 1.0, j - 1) / _MOLLIFIER_MASS


# ---------------------------------------------------------------------------

class BumpFunction:
    """A smooth compactly supported bump with evaluable derivatives.

    kind 'standard_mollifier': the rescaled mollifier on [a, b].
    kind 'plateau': identically 1 on the plateau sub-interval, smooth
    monotone edges built from the integrated mollifier (the smoothed
    indicator one gets by convolving an indicator with the mollifier).
    Values at the support endpoints are 0 by convention.
    """

    def __init__(self, kind, support, plateau=None, max_derivative_order=6):
        a, b = float(support[0]), float(support[1])
        if not a < b:
            raise DomainError("support must be a nondegenerate interval")
        if kind not in ("standard_mollifier", "plateau"):
            raise DomainError("unknown bump kind %r" % (kind,))
        if kind == "plateau":
            if plateau is None:
                raise DomainError("plateau kind needs a plateau sub-interval")
            p0, p1 = float(plateau[0]), float(plateau[1])
            if not (a < p0 <= p1 < b):
                raise DomainError("plateau must sit strictly inside the support")
            self.plateau = (p0, p1)
        else:
            if plateau is not None:
                raise DomainError("standard_mollifier has no plateau")
            self.plateau = None
        self.kind = kind
        self.support = (a, b)
        self.max_derivative_order = int(max_derivative_order)
        if self.max_derivative_order < 0:
            raise DomainError("max_derivative_order must be >= 0")

    def __call__(self, x):
        return self.derivative(x, 0)

    def derivative(self, x, j):
        if j > self.max_derivative_order:
            raise CapabilityError(
                "derivative order %d exceeds the declared maximum %d"
                % (j, self.max_derivative_order))
        if j < 0:
            raise DomainError("derivative order must be >= 0")
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x = np.atleast_1d(x)
        a, b = self.support
        if self.kind == "standard_mollifier":
            # t in [-1, 1] across the support
            w = (b - a) / 2.0
            t = (x - (a + b) / 2.0) / w
            out = _mollifier_deriv(t, j) / w ** j
        else:
            p0, p1 = self.plateau
            out = np.zeros_like(x)
            if j == 0:
                out[(x >= p0) & (x <= p1)] = 1.0
            lw, rw = p0 - a, b - p1
            left = (x > a) & (x < p0)
            right = (x > p1) & (x < b)
            if j == 0:
                out[left] = _edge((x[left] - a) / lw)
                out[right] = _edge((b - x[right]) / rw)
            else:
                out[left] = _edge_deriv((x[left] - a) / lw, j) / lw ** j
                out[right] = _edge_deriv((b - x[right]) / rw, j) * (-1.0 / rw) ** j
        return float(out[0]) if scalar else out


def standard_bump(support=(-1.0, 1.0), max_derivative_order=6):
    return BumpFunction("standard_mollifier", support,
                        max_derivative_order=max_derivative_order)


def plateau_bump(plateau=(-1.0, 1.0), support=(-2.0, 2.0), max_derivative_order=6):
    return BumpFunction("plateau", support, plateau=plateau,
                        max_derivative_order=max_derivative_order)


@dataclass(frozen=True)
class OrderFunction:
    """Weight grading symbol growth: the constant 1 or <eta>^2 = 1 + |eta|^2."""
    kind: str = "one"

    def __post_init__(self):
        if self.kind not in ("one", "jap_bracket_sq"):
            raise DomainError("unknown order function kind %r" % (self.kind,))

    def __call__(self, eta):
        eta = np.asarray(eta, dtype=float)
        if self.kind == "one":
            return np.ones(eta.shape[:-1] if eta.ndim > 1 else eta.shape)
        if eta.ndim > 1:
            return 1.0 + np.sum(eta ** 2, axis=-1)
        return 1.0 + eta ** 2


class CutoffFamily:
    """h-indexed windows rho_h(x) = chi((x - E)/(c h^delta)).

    All supports for h <= 1 sit inside the h = 1 support, so the family
    stays in one fixed compact interval; the window rule makes the
    rescaling exact rather than approximate.
    """

    def __init__(self, base, center, delta, width_scale):
        if not isinstance(base, BumpFunction):
            raise DomainError("base must be a BumpFunction")
        if not (0.0 <= delta < 0.5):
            raise DomainError("theory requires δ < 1/2 (and δ >= 0); got %r" % (delta,))
        if width_scale <= 0:
            raise DomainError("width_scale must be positive")
        self.base = base
        self.center = float(center)
        self.delta = float(delta)
        self.width_scale = float(width_scale)

    def width(self, h):
        if not (0.0 < h <= 1.0):
            raise DomainError("h must lie in (0, 1]")
        return self.width_scale * h ** self.delta

    def support(self, h):
        a, b = self.base.support
        w = self.width(h)
        return (self.center + w * a, self.center + w * b)

    def value(self, x, h):
        w = self.width(h)
        return self.base((np.asarray(x, dtype=float) - self.center) / w)

    def derivative(self, x, h, j):
        w = self.width(h)
        arg = (np.asarray(x, dtype=float) - self.center) / w
        return self.base.derivative(arg, j) / w ** j

    def __call__(self, x, h):
        return self.value(x, h)


def make_window_family(base, E, delta, c):
    """Concrete bounded-support window family at energy E."""
    if c <= 0:
        raise DomainError("width scale c must be positive")
    return CutoffFamily(base, E, delta, c)


_SUP_SAMPLES = 4096  # dense enough for mollifier derivative peaks up to order ~6


def deriv_sup_norm(fam, j, h):
    """Sup norm of the j-th window derivative over a dense support sample."""
    if j > fam.base.max_derivative_order:
        raise CapabilityError(
            "derivative order %d exceeds the base bump capability %d"
            % (j, fam.base.max_derivative_order))
    a, b = fam.support(h)
    xs = np.linspace(a, b, _SUP_SAMPLES)
    return float(np.max(np.abs(fam.derivative(xs, h, j))))


def estimate_class_exponents(fam, j_max, h_grid):
    """Fitted growth exponents of log ||rho_h^(j)||_inf against log h.

    Returns [(j, fitted_exponent)] for j = 0..j_max; the class prediction
    is exponent = -delta*j.
    """
    h_grid = np.asarray(h_grid, dtype=float)
    if h_grid.size < 3:
        raise FitError("need at least 3 h values to fit exponents")
    out = []
    for j in range(j_max + 1):
        sups = np.array([deriv_sup_norm(fam, j, h) for h in h_grid])
        out.append((j, fit_loglog(h_grid, sups).slope))
    return out
