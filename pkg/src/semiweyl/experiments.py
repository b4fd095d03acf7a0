"""Trace-formula and shrinking-window counting experiments on the flat torus.

Everything here drives the other modules: build the operator for each h,
apply the spectral window, and compare the quantum side against the
phase-space side.  The two experiment drivers return both a fitted decay
exponent and the per-h rows the CLI serializes.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import CapabilityError, DomainError, FitError, ResolutionError
from .fitting import RemainderFit, fit_loglog
from .schrodinger import (K_rule, assemble_torus_operator, eigensolve,
                          spectral_funcalc)
from .symbolfam import BumpFunction
from .weylquant import quantize_torus

__all__ = [
    "HGrid", "LocalizerSpec", "TraceFormulaRow", "WeylCountResult",
    "default_h_grid", "phase_space_integral", "liouville_volume",
    "run_trace_formula_experiment", "run_weyl_count_experiment",
    "fit_loglog", "RemainderFit",
]


@dataclass(frozen=True)
class HGrid:
    """Geometric grid h_i = h_max * ratio^i, i = 0..count-1."""
    h_max: float = 0.2
    ratio: float = (0.02 / 0.2) ** (1.0 / 9.0)
    count: int = 10

    def __post_init__(self):
        if not (0.0 < self.h_max <= 1.0):
            raise DomainError("h_max must lie in (0, 1]")
        if not (0.0 < self.ratio < 1.0):
            raise DomainError("ratio must lie in (0, 1)")
        if self.count < 6:
            raise DomainError("need at least 6 grid points for a stable fit")

    @classmethod
    def geometric(cls, h_max, h_min, count):
        if not (0.0 < h_min < h_max):
            raise DomainError("need 0 < h_min < h_max")
        return cls(h_max=h_max, ratio=(h_min / h_max) ** (1.0 / (count - 1)),
                   count=count)

    @property
    def values(self):
        return tuple(self.h_max * self.ratio ** i for i in range(self.count))


def default_h_grid():
    return HGrid.geometric(0.2, 0.02, 10)


@dataclass(frozen=True)
class LocalizerSpec:
    """Product localizer b(x, xi) = b_position(x) * b_momentum(xi).

    Either factor may be None, meaning the constant 1.  In two dimensions
    the momentum factor is read as a radial profile b_momentum(|xi|).
    Bump factors take values in [0, 1] by construction.
    """
    b_position: BumpFunction = None
    b_momentum: BumpFunction = None
    delta_b: float = 0.0

    def __post_init__(self):
        for f in (self.b_position, self.b_momentum):
            if f is not None and not isinstance(f, BumpFunction):
                raise DomainError("localizer factors must be BumpFunction or None")
        if not (0.0 <= self.delta_b < 0.5):
            raise DomainError("localizer class tag must lie in [0, 1/2)")

    @property
    def is_unit(self):
        return self.b_position is None and self.b_momentum is None

    @property
    def xi_bound(self):
        if self.b_momentum is None:
            return None
        a, b = self.b_momentum.support
        return max(abs(a), abs(b))

    def position_values(self, x):
        if self.b_position is None:
            return np.ones_like(np.asarray(x, dtype=float))
        return self.b_position(x)

    def momentum_values(self, xi):
        if self.b_momentum is None:
            return np.ones_like(np.asarray(xi, dtype=float))
        return self.b_momentum(xi)


UNIT_LOCALIZER = LocalizerSpec()


@dataclass(frozen=True)
class TraceFormulaRow:
    h: float
    lhs: float
    rhs: float
    remainder: float
    supp_volume: float
    slope_running: float


@dataclass(frozen=True)
class WeylCountResult:
    h: float
    count: int
    scaled: float
    liouville: float
    deviation: float
    boundary_flag: bool


def _require_window(fam):
    if not (hasattr(fam, "support") and hasattr(fam, "value")):
        raise DomainError(
            "need a window family exposing support(h) and value(x, h)")


def _xi_radius(b, fam, V, h):
    # the window support caps the classical energy, so |xi|^2 stays below
    # window top + sup|V|; the coefficient l1 norm bounds sup|V|
    top = max(fam.support(h))
    r2 = top + V.coeff_l1
    if r2 <= 0.0:
        return 0.0
    r = math.sqrt(r2)
    if b.xi_bound is not None:
        r = min(r, b.xi_bound)
    return r


def _tensor_integral_1d(b, fam, V, h, q, radius):
    xs = 2.0 * np.pi * np.arange(q) / q
    dxi = 2.0 * radius / q
    xis = -radius + dxi * (np.arange(q) + 0.5)
    vx = np.asarray(V.evaluate(xs), dtype=float)
    bx = b.position_values(xs)
    bxi = b.momentum_values(xis)
    block = max(1, 4_000_000 // q)  # row blocks keep memory bounded
    total = 0.0
    for i in range(0, q, block):
        rho = fam.value(vx[i:i + block, None] + xis[None, :] ** 2, h)
        total += float(bx[i:i + block] @ rho @ bxi)
    return total * (2.0 * np.pi / q) * dxi


def _tensor_integral_2d(b, fam, V, h, q, radius):
    # polar in momentum: the radial profile makes the angular integral 2 pi r
    xs = 2.0 * np.pi * np.arange(q) / q
    dr = radius / q
    rs = dr * (np.arange(q) + 0.5)
    ring = 2.0 * np.pi * rs * b.momentum_values(rs) * dr
    bpos = b.position_values(xs)
    dx2 = (2.0 * np.pi / q) ** 2
    total = 0.0
    for i in range(q):  # row blocks keep memory at O(q^2)
        vrow = np.asarray(V.evaluate(xs[i], xs), dtype=float)
        rho = fam.value(vrow[:, None] + rs[None, :] ** 2, h)
        total += bpos[i] * float((rho @ ring) @ bpos)
    return total * dx2


def phase_space_integral(b, fam, V, h, rel_tol=1e-8):
    """Integral of b * (rho_h of the classical energy) over phase space.

    Tensor rule: trapezoid in x (periodic, so spectrally accurate) and
    midpoint in xi over the momentum box the window support allows.  The
    node count doubles until two consecutive refinements agree to rel_tol.
    """
    _require_window(fam)
    if b is None:
        b = UNIT_LOCALIZER
    radius = _xi_radius(b, fam, V, h)
    if radius == 0.0:
        return 0.0
    n = V.dimension
    q, q_cap = (64, 16384) if n == 1 else (32, 512)
    rule = _tensor_integral_1d if n == 1 else _tensor_integral_2d
    prev = None
    while q <= q_cap:
        cur = rule(b, fam, V, h, q, radius)
        if prev is not None and abs(cur - prev) <= rel_tol * max(abs(cur), 1e-14):
            # a zero sum is only a result when the shell truly carries no
            # mass; a thin window can slip between nodes at every q so far
            if not (cur == 0.0 and _window_missed(b, fam, V, h)):
                return cur
        prev = cur
        q *= 2
    raise ResolutionError(
        "phase-space integrand not resolved at %d nodes per axis; "
        "the window is too thin for the refinement cap" % (q_cap,))


def _window_missed(b, fam, V, h):
    """True when the shell carries mass that a zero quadrature sum missed.

    Zero is only trusted when the family member itself vanishes or the
    energy window sits below the range of the classical energy.  With a
    nontrivial localizer a zero sum stays ambiguous and is trusted.
    """
    if not b.is_unit:
        return False
    lo, top = fam.support(h)
    if float(np.max(np.abs(fam.value(np.linspace(lo, top, 65), h)))) == 0.0:
        return False
    xs = 2.0 * np.pi * np.arange(256) / 256.0
    vx = np.asarray(V.evaluate(xs), dtype=float)
    return bool(np.any(vx < top))


# ---------------------------------------------------------------------------
# Liouville volume of an energy shell


_X_SAMPLES_1D = 1 << 19
_X_GRID_2D = 512


def _critical_values(V):
    """Values of V at its critical points, located by dense sampling.

    Each sampled extremum is sharpened with a parabolic pass through the
    three neighboring samples, which recovers smooth critical values far
    beyond the warning threshold.
    """
    if V.dimension == 1:
        xs = 2.0 * np.pi * np.arange(16384) / 16384.0
        v = np.asarray(V.evaluate(xs), dtype=float)
        left = np.roll(v, 1)
        right = np.roll(v, -1)
        ext = ((v - left) * (right - v) <= 0.0)
        vals = []
        for i in np.nonzero(ext)[0]:
            a, c, b = left[i], v[i], right[i]
            denom = a - 2.0 * c + b
            if denom != 0.0:
                vals.append(c - (b - a) ** 2 / (8.0 * denom))
            else:
                vals.append(c)
        return sorted(set(float(x) for x in vals))
    xs = 2.0 * np.pi * np.arange(256) / 256.0
    X1, X2 = np.meshgrid(xs, xs, indexing="ij")
    v = np.asarray(V.evaluate(X1, X2), dtype=float)
    ext = np.ones_like(v, dtype=bool)
    for axis in (0, 1):
        left = np.roll(v, 1, axis=axis)
        right = np.roll(v, -1, axis=axis)
        ext &= (v - left) * (right - v) <= 0.0
    return sorted(set(float(x) for x in v[ext]))


def _sublevel_volume(V, E, rng=None, samples=400_000):
    """Phase-space volume of {(x, xi): |xi|^2 + V(x) < E}."""
    n = V.dimension
    if n == 1:
        xs = 2.0 * np.pi * np.arange(_X_SAMPLES_1D) / _X_SAMPLES_1D
        v = np.asarray(V.evaluate(xs), dtype=float)
        return float(np.mean(2.0 * np.sqrt(np.maximum(E - v, 0.0)))) * 2.0 * np.pi
    if rng is not None:
        pts = rng.uniform(0.0, 2.0 * np.pi, size=(samples, 2))
        v = np.asarray(V.evaluate(pts[:, 0], pts[:, 1]), dtype=float)
    else:
        xs = 2.0 * np.pi * np.arange(_X_GRID_2D) / _X_GRID_2D
        X1, X2 = np.meshgrid(xs, xs, indexing="ij")
        v = np.asarray(V.evaluate(X1, X2), dtype=float)
    return float(np.mean(np.pi * np.maximum(E - v, 0.0))) * (2.0 * np.pi) ** 2


def _level_intervals(V, E):
    """Connected components of {x in [0, 2pi): V(x) < E} for n = 1."""
    m = 16384
    xs = 2.0 * np.pi * np.arange(m + 1) / m  # include the wrap point
    v = np.asarray(V.evaluate(xs), dtype=float) - E
    roots = []
    for i in range(m):
        if v[i] == 0.0:
            roots.append(xs[i])
        elif v[i] * v[i + 1] < 0.0:
            roots.append(brentq(lambda x: float(V.evaluate(x)) - E,
                                xs[i], xs[i + 1], xtol=1e-14))
    if not roots:
        return [(0.0, 2.0 * np.pi)] if v[0] < 0.0 else []
    roots = sorted(roots)
    out = []
    for i, lo in enumerate(roots):
        hi = roots[i + 1] if i + 1 < len(roots) else roots[0] + 2.0 * np.pi
        mid = 0.5 * (lo + hi)
        if float(V.evaluate(mid % (2.0 * np.pi))) < E:
            out.append((lo, hi))
    return out


def _liouville_quadrature_1d(V, E):
    total = 0.0
    for lo, hi in _level_intervals(V, E):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        if half <= 0.0:
            continue

        def integrand(t, mid=mid, half=half):
            # sine substitution flattens the inverse-sqrt turning points
            x = mid + half * np.sin(0.5 * np.pi * t)
            dx = half * 0.5 * np.pi * np.cos(0.5 * np.pi * t)
            gap = E - float(V.evaluate(x % (2.0 * np.pi)))
            if gap <= 0.0:
                return 0.0
            return dx / math.sqrt(gap)

        val, _ = quad(integrand, -1.0, 1.0, epsabs=1e-12, epsrel=1e-10,
                      limit=200)
        total += val
    return total


def _liouville_shell(V, E, rng, eps, samples=400_000):
    if V.dimension == 2 and rng is not None:
        # one fixed sample set for every energy: the finite difference of
        # two independent Monte Carlo sums would amplify the noise by 1/eps
        pts = rng.uniform(0.0, 2.0 * np.pi, size=(samples, 2))
        v = np.asarray(V.evaluate(pts[:, 0], pts[:, 1]), dtype=float)

        def vol(e):
            return float(np.mean(np.pi * np.maximum(e - v, 0.0))) * (2.0 * np.pi) ** 2
    else:
        def vol(e):
            return _sublevel_volume(V, e)

    def diff(e_step):
        return (vol(E + e_step) - vol(E - e_step)) / (2.0 * e_step)

    d1 = diff(eps)
    d2 = diff(0.5 * eps)
    return (4.0 * d2 - d1) / 3.0


def liouville_volume(V, E, method=None, rng=None, eps=None):
    """Liouville measure of the energy shell {|xi|^2 + V(x) = E}.

    n = 1 defaults to adaptive quadrature of dx / sqrt(E - V) with a
    turning-point substitution; n = 2 to a thin-shell derivative of the
    sublevel volume (Richardson extrapolated).  A seeded rng switches the
    2-d sublevel evaluation to Monte Carlo sampling.
    """
    n = V.dimension
    crit = _critical_values(V)
    if crit and min(abs(E - c) for c in crit) < 1e-6:
        warnings.warn(
            "E = %r is within 1e-6 of a critical value of V; the shell "
            "measure may be irregular" % (E,))
    min_v = crit[0] if crit else 0.0
    if E <= min_v:
        raise DomainError(
            "empty level set: E = %r does not exceed min V = %r" % (E, min_v))
    if method is None:
        method = "quadrature" if n == 1 else "shell"
    if method == "quadrature":
        if n != 1:
            raise CapabilityError(
                "closed-form quadrature is one-dimensional; use method='shell'")
        return _liouville_quadrature_1d(V, E)
    if method != "shell":
        raise DomainError("method must be 'quadrature' or 'shell'")
    if eps is None:
        eps = 5e-3 * max(1.0, abs(E))
    return _liouville_shell(V, E, rng, eps)


# ---------------------------------------------------------------------------
# Trace-formula experiment


def _is_free(V):
    return all(abs(c) == 0.0 for c in V.fourier_coeffs.values())


def _running_slope(hs, remainders):
    if len(hs) < 3:
        return float("nan")
    try:
        fit = fit_loglog(np.asarray(hs), np.abs(np.asarray(remainders)),
                         floor=1e-10)
    except FitError:
        return float("nan")
    return fit.slope


def _localizer_matrix(b, V, h, K):
    if V.dimension != 1:
        raise CapabilityError(
            "nontrivial localizers are quantized on the circle only")
    xi_cap = b.xi_bound

    def symbol(x, xi):
        return (b.position_values(x) + 0.0 * xi) * b.momentum_values(xi)

    return quantize_torus(symbol, K, h, xi_support=xi_cap)


def run_trace_formula_experiment(V, fam, b=None, h_grid=None,
                                 k_rule=K_rule, remainder_floor=1e-10):
    """Quantum trace against the phase-space integral over an h grid.

    Per h: LHS = (2 pi h)^n * trace(B f(P)), RHS = the phase-space
    integral, remainder = LHS - RHS.  Returns (fit of log|remainder|
    against log h, list of TraceFormulaRow).
    """
    _require_window(fam)
    if b is None:
        b = UNIT_LOCALIZER
    if not b.is_unit and V.dimension != 1:
        raise CapabilityError(
            "nontrivial localizers are quantized on the circle only")
    if h_grid is None:
        h_grid = default_h_grid()
    n = V.dimension
    rows = []
    hs, rems = [], []
    for h in h_grid.values:
        top = max(fam.support(h))
        lo = min(fam.support(h))
        K = k_rule(top, V, h)
        op = assemble_torus_operator(V, h, K, window_max=top)
        dec = eigensolve(op)
        if b.is_unit:
            lhs = float(np.sum(fam.value(dec.eigenvalues, h)))
        else:
            F = spectral_funcalc(dec, fam, h=h)
            B = _localizer_matrix(b, V, h, K)
            lhs = float(np.real(np.trace(B.entries @ F.entries)))
        lhs *= (2.0 * np.pi * h) ** n
        rhs = phase_space_integral(b, fam, V, h)
        rem = lhs - rhs
        supp_vol = _sublevel_volume(V, top) - _sublevel_volume(V, lo)
        hs.append(h)
        rems.append(rem)
        rows.append(TraceFormulaRow(
            h=h, lhs=lhs, rhs=rhs, remainder=rem, supp_volume=supp_vol,
            slope_running=_running_slope(hs, rems)))
    fit = fit_loglog(np.asarray(hs), np.abs(np.asarray(rems)),
                     floor=remainder_floor)
    return fit, rows


# ---------------------------------------------------------------------------
# Shrinking-window eigenvalue counting


def _lattice_count(V, E, top, h):
    """Exact count of h^2 |k|^2 in [E, top) for the free torus."""
    n = V.dimension
    flag = False
    count = 0
    r_hi = int(math.ceil(math.sqrt(top) / h)) + 2
    if n == 1:
        for k in range(-r_hi, r_hi + 1):
            ev = h * h * (k * k)
            if abs(ev - E) < 1e-12 or abs(ev - top) < 1e-12:
                flag = True
            if E <= ev < top:
                count += 1
        return count, flag
    k2 = np.arange(-r_hi, r_hi + 1)
    for k1 in range(-r_hi, r_hi + 1):
        ev = h * h * (k1 * k1 + k2 * k2)
        flag = flag or bool(np.any((np.abs(ev - E) < 1e-12)
                                   | (np.abs(ev - top) < 1e-12)))
        count += int(np.count_nonzero((ev >= E) & (ev < top)))
    return count, flag


def _matrix_count(V, E, top, h, k_rule):
    K = k_rule(top, V, h)
    op = assemble_torus_operator(V, h, K, window_max=top)
    evs = eigensolve(op).eigenvalues
    flag = bool(np.any((np.abs(evs - E) < 1e-12)
                       | (np.abs(evs - top) < 1e-12)))
    count = int(np.count_nonzero((evs >= E) & (evs < top)))
    return count, flag


def run_weyl_count_experiment(V, E, delta, h_grid=None, k_rule=K_rule,
                              rng=None):
    """Eigenvalue counts in the shrinking window [E, E + h^delta).

    The scaled count (2 pi)^n h^(n - delta) N(h) converges to the
    Liouville measure of the energy shell.  The free torus dispatches to
    exact lattice counting, so tiny h costs nothing.
    """
    if not (0.0 <= delta < 1.0 / 3.0):
        raise DomainError(
            "the shrinking-window law needs delta in [0, 1/3); got %r"
            % (delta,))
    if h_grid is None:
        h_grid = default_h_grid()
    n = V.dimension
    liou = liouville_volume(V, E, rng=rng)
    free = _is_free(V)
    out = []
    for h in h_grid.values:
        top = E + h ** delta
        if free:
            count, flag = _lattice_count(V, E, top, h)
        else:
            count, flag = _matrix_count(V, E, top, h, k_rule)
        scaled = (2.0 * np.pi) ** n * h ** (n - delta) * count
        out.append(WeylCountResult(
            h=h, count=count, scaled=scaled, liouville=liou,
            deviation=scaled - liou, boundary_flag=flag))
    return out
