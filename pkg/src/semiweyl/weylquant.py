"""Weyl quantization on a truncated line grid and Fourier quantization on T^1.

The line quantizer builds dense matrices A[i,j] = K(x_i, x_j) dx with

    K(x, y) = (2 pi h)^{-1} Int e^{i (x-y) eta / h} s((x+y)/2, eta) deta.

The dual grid is chosen FFT-native: eta_m = h * 2 pi m / (N dx), so the
oscillatory factor is exactly e^{2 pi i m (i-j) / N} and the eta-quadrature
per midpoint is one inverse FFT. With that choice the matrix trace and the
phase-space quadrature of the symbol agree to round-off, not merely to
quadrature order.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError, ResolutionError
from .fitting import fit_loglog


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L) with an FFT-native dual grid."""
    half_width: float = 8.0
    points: int = 1024

    def __post_init__(self):
        if self.points < 4 or (self.points & (self.points - 1)) != 0:
            raise DomainError("points must be a power of two >= 4")
        if self.half_width <= 0:
            raise DomainError("half_width must be positive")

    @property
    def spacing(self):
        return 2.0 * self.half_width / self.points

    @property
    def xs(self):
        return -self.half_width + self.spacing * np.arange(self.points)

    @property
    def midpoints(self):
        # all values (x_i + x_j)/2: the half-step lattice, 2N-1 points
        return -self.half_width + (self.spacing / 2.0) * np.arange(2 * self.points - 1)

    @property
    def dual_cutoff(self):
        # Xi = pi N / (2L): largest resolvable |omega|
        return np.pi * self.points / (2.0 * self.half_width)

    @property
    def omegas(self):
        # unscaled dual frequencies in FFT order; physical eta = h * omega
        return 2.0 * np.pi * np.fft.fftfreq(self.points, d=self.spacing)


@dataclass(frozen=True)
class ClassTag:
    """Claimed symbol class: order k, regularity delta, order function kind."""
    k: float = 0.0
    delta: float = 0.0
    order_function: str = "one"


@dataclass
class SymbolOnGrid:
    """Symbol sampled on the midpoint lattice times the h-scaled dual grid.

    values[q, m] = s(u_q, h*omega_m) with u_q the 2N-1 midpoints and omega_m
    in FFT order. eta_support, when known, enables the Nyquist containment
    check in weyl_quantize_line.
    """
    values: np.ndarray
    h: float
    grid: GridSpec
    klass: ClassTag | None = None
    eta_support: float | None = None

    def __post_init__(self):
        expected = (2 * self.grid.points - 1, self.grid.points)
        if self.values.shape != expected:
            raise DomainError("symbol samples must have shape %s" % (expected,))
        if not np.all(np.isfinite(self.values)):
            raise DomainError("symbol samples must be finite")

    @property
    def is_real(self):
        return not np.iscomplexobj(self.values) or np.all(self.values.imag == 0)


def sample_symbol(fn, grid, h, klass=None, eta_support=None):
    """Sample s(y, eta) on the quantization lattice for one h."""
    U = grid.midpoints[:, None]
    E = (h * grid.omegas)[None, :]
    vals = np.asarray(fn(U, E))
    vals = np.broadcast_to(vals, (U.shape[0], E.shape[1])).copy()
    return SymbolOnGrid(values=vals, h=float(h), grid=grid, klass=klass,
                        eta_support=eta_support)


@dataclass
class OperatorMatrix:
    """Dense matrix representation of a quantized operator."""
    entries: np.ndarray
    basis: str  # "position_grid" | "fourier_modes"
    h: float

    def __post_init__(self):
        if self.basis not in ("position_grid", "fourier_modes"):
            raise DomainError("unknown basis tag %r" % (self.basis,))

    @property
    def dim(self):
        return self.entries.shape[0]

    @property
    def hermitian(self):
        a = self.entries
        na = np.linalg.norm(a, "fro")
        if na == 0:
            return True
        return np.linalg.norm(a - a.conj().T, "fro") <= 1e-10 * na

    def trace(self):
        return complex(np.trace(self.entries))

    def interior(self, fraction=0.5):
        """Submatrix over the central `fraction` of the grid indices."""
        n = self.entries.shape[0]
        k = int(round(n * (1.0 - fraction) / 2.0))
        return self.entries[k:n - k, k:n - k]


def weyl_quantize_line(s, grid, h):
    """Dense Weyl quantization of a sampled symbol on the line grid."""
    if not (0.0 < h <= 1.0):
        raise DomainError("h must lie in (0, 1]")
    if s.grid != grid or s.h != h:
        raise DomainError("symbol was sampled for a different grid or h")
    if s.eta_support is not None and s.eta_support > h * grid.dual_cutoff:
        raise ResolutionError(
            "eta support %.3g exceeds the resolvable box h*Xi = %.3g; "
            "enlarge the grid or increase h" % (s.eta_support, h * grid.dual_cutoff))
    N = grid.points
    # per midpoint: (1/N) sum_m s(u_q, h w_m) e^{2 pi i m d / N} = ifft over m
    C = np.fft.ifft(s.values, axis=1)
    I = np.arange(N)
    entries = C[I[:, None] + I[None, :], (I[:, None] - I[None, :]) % N]
    return OperatorMatrix(entries=entries, basis="position_grid", h=float(h))


def quantize_torus(s, modes, h, xi_support=None):
    """Fourier quantization on T^1: A[k',k] = (1/2pi) Int e^{-i(k'-k)x} s(x, h k) dx.

    s is a callable s(x, xi), smooth and 2 pi periodic in x. When xi_support
    is given, the mode cutoff must contain it: h*modes >= xi_support.
    """
    K = int(modes)
    if K < 1:
        raise DomainError("need at least one mode")
    if xi_support is not None and h * K < xi_support:
        raise ResolutionError(
            "mode cutoff K=%d holds |xi| <= %.3g but the symbol needs %.3g; "
            "raise K" % (K, h * K, xi_support))
    M = 4 * K + 1  # resolves all coefficient indices k'-k in [-2K, 2K]
    xs = 2.0 * np.pi * np.arange(M) / M
    ks = np.arange(-K, K + 1)
    vals = np.asarray(s(xs[:, None], h * ks[None, :]), dtype=complex)
    vals = np.broadcast_to(vals, (M, 2 * K + 1))
    coeffs = np.fft.fft(vals, axis=0) / M  # coeffs[m, k] = (1/2pi) Int e^{-imx} s(x, hk) dx
    diff = (ks[:, None] - ks[None, :]) % M
    entries = coeffs[diff, np.broadcast_to(np.arange(2 * K + 1)[None, :], diff.shape)]
    return OperatorMatrix(entries=entries.copy(), basis="fourier_modes", h=float(h))


def trace_via_symbol(s, h):
    """Phase-space trace (2 pi h)^{-1} Int Int s dy deta on the sampling lattice."""
    grid = s.grid
    N = grid.points
    vals = s.values[::2, :]  # the grid-point rows of the midpoint lattice
    # boundary containment: warn with an estimated tail if mass touches the box edge
    interior_max = np.max(np.abs(vals))
    if interior_max > 0:
        edge = np.concatenate([
            np.abs(vals[0, :]), np.abs(vals[-1, :]),
            np.abs(vals[:, N // 2]),  # largest |omega| row in FFT order
        ])
        if np.max(edge) > 1e-9 * interior_max:
            dx = grid.spacing
            deta = h * 2.0 * np.pi / (N * dx)
            tail = float(np.sum(edge) * dx * deta / (2.0 * np.pi * h))
            warnings.warn(
                "symbol support touches the phase-space box; estimated tail %.3g" % tail)
    return float(np.real(np.sum(vals))) / N


def trace_norm(A):
    """Sum of singular values."""
    return float(np.sum(np.linalg.svd(np.asarray(A.entries), compute_uv=False)))


def operator_norm(A, interior_fraction=None):
    a = A.entries if interior_fraction is None else A.interior(interior_fraction)
    return float(np.linalg.norm(a, 2))


def op_norm_bound_check(symbol_family, h_grid, k, delta, grid=None):
    """Fitted exponent of log ||Op_h(s)||_2 against log h.

    symbol_family is a callable (y, eta, h) -> values. The class bound
    ||Op_h|| <= C h^{-k} predicts slope >= -k; the caller asserts
    slope >= -k - 0.1. Norms are taken over the interior half of the grid
    to keep boundary pollution out of the fit.
    """
    grid = grid or GridSpec()
    h_grid = np.asarray(h_grid, dtype=float)
    if h_grid.size < 3:
        raise FitError("need at least 3 h values")
    norms = []
    for h in h_grid:
        s = sample_symbol(lambda y, e: symbol_family(y, e, h), grid, h,
                          klass=ClassTag(k=k, delta=delta))
        A = weyl_quantize_line(s, grid, h)
        norms.append(operator_norm(A, interior_fraction=0.5))
    return fit_loglog(h_grid, np.asarray(norms)).slope
