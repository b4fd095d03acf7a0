"""Flat-torus Schrodinger operator in a truncated Fourier basis.

Assembly, diagonalization, and the spectral-theorem functional calculus
that serves as the exact oracle for every approximate calculus in the
package.  Supported dimensions are 1 and 2; modes are ordered
lexicographically in dimension 2 so exported quantities are reproducible.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError, TruncationError
from .weylquant import OperatorMatrix

_HERM_TOL = 1e-12


def _as_mode(key, n):
    if n == 1:
        if isinstance(key, (tuple, list)):
            if len(key) != 1:
                raise DomainError("dimension 1 modes are single integers")
            key = key[0]
        return (int(key),)
    if not isinstance(key, (tuple, list)) or len(key) != 2:
        raise DomainError("dimension 2 modes are integer pairs")
    return (int(key[0]), int(key[1]))


class TorusPotential:
    """Real trigonometric polynomial V(x) = sum_k vhat(k) e^{ik.x}."""

    def __init__(self, dimension, fourier_coeffs):
        if dimension not in (1, 2):
            raise DomainError("dimension must be 1 or 2")
        self.dimension = dimension
        coeffs = {}
        for key, c in fourier_coeffs.items():
            k = _as_mode(key, dimension)
            coeffs[k] = coeffs.get(k, 0.0) + complex(c)
        for k, c in coeffs.items():
            minus = tuple(-a for a in k)
            mirror = coeffs.get(minus, 0.0)
            if abs(mirror - c.conjugate()) > _HERM_TOL * max(1.0, abs(c)):
                raise DomainError(
                    "coefficients must satisfy vhat(-k) = conj(vhat(k)); "
                    "violated at k=%r" % (k,))
        self.fourier_coeffs = coeffs

    @property
    def coeff_l1(self):
        """Upper bound for the sup norm, exact for a single cosine."""
        return float(sum(abs(c) for c in self.fourier_coeffs.values()))

    def evaluate(self, *x):
        if len(x) != self.dimension:
            raise DomainError("expected %d coordinate arguments" % self.dimension)
        xs = [np.asarray(c, dtype=float) for c in x]
        out = np.zeros(np.broadcast_shapes(*(c.shape for c in xs)), dtype=complex)
        for k, c in self.fourier_coeffs.items():
            phase = sum(ki * xi for ki, xi in zip(k, xs))
            out = out + c * np.exp(1j * phase)
        if np.max(np.abs(out.imag), initial=0.0) > 1e-12 * max(1.0, self.coeff_l1):
            raise NumericalError("potential evaluated with a non-real part")
        return out.real if out.ndim else float(out.real)


def _mode_list(n, K):
    rng = range(-K, K + 1)
    if n == 1:
        return [(k,) for k in rng]
    return [(a, b) for a in rng for b in rng]


@dataclass(frozen=True)
class TorusOperator:
    h: float
    mode_cutoff: int
    matrix: np.ndarray
    basis: tuple  # Fourier modes, lexicographic
    dimension: int

    def __post_init__(self):
        m = self.matrix
        if np.linalg.norm(m - m.conj().T) > _HERM_TOL * max(1.0, np.linalg.norm(m)):
            raise NumericalError("assembled matrix lost Hermitian symmetry")

    @property
    def dim(self):
        return self.matrix.shape[0]


def assemble_torus_operator(V, h, K, window_max=None, margin=5.0):
    """Matrix of -h^2 Laplacian + V on modes |k|_inf <= K.

    When `window_max` (the top of the spectral window of interest) is
    given, containment h^2 K^2 >= window_max + ||V||_inf + margin is
    enforced so eigenvalues near the window are trustworthy.
    """
    if h <= 0:
        raise DomainError("h must be positive")
    K = int(K)
    if K < 1:
        raise DomainError("need at least one mode")
    if window_max is not None:
        need = window_max + V.coeff_l1 + margin
        if h * h * K * K < need:
            raise TruncationError(
                "mode cutoff too small: h^2 K^2 = %.6g < %.6g needed to "
                "contain the spectral window" % (h * h * K * K, need))
    modes = _mode_list(V.dimension, K)
    index = {k: i for i, k in enumerate(modes)}
    m = len(modes)
    A = np.zeros((m, m), dtype=complex)
    for k, i in index.items():
        A[i, i] = h * h * sum(a * a for a in k)
    for dk, c in V.fourier_coeffs.items():
        for k, j in index.items():
            kp = tuple(a + d for a, d in zip(k, dk))
            i = index.get(kp)
            if i is not None:
                A[i, j] += c
    return TorusOperator(h=h, mode_cutoff=K, matrix=A,
                         basis=tuple(modes), dimension=V.dimension)


def K_rule(E_max, V, h, margin=5.0):
    """Smallest cutoff meeting the containment precondition."""
    return int(math.ceil(math.sqrt(E_max + V.coeff_l1 + margin) / h))


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray  # ascending
    eigenvectors: np.ndarray  # unitary, columns
    h: float
    basis: tuple = ()

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def norm2(self):
        return float(max(abs(self.eigenvalues[0]), abs(self.eigenvalues[-1])))

    def clusters(self, tol=None):
        """Index ranges grouping numerically split degenerate eigenvalues."""
        if tol is None:
            tol = 1e-9 * max(self.norm2(), 1.0)
        E = self.eigenvalues
        groups, start = [], 0
        for j in range(1, len(E) + 1):
            if j == len(E) or E[j] - E[j - 1] > tol:
                groups.append((start, j))
                start = j
        return groups


def eigensolve(op):
    try:
        E, U = np.linalg.eigh(op.matrix)
    except np.linalg.LinAlgError as exc:
        scale = float(np.linalg.norm(op.matrix, 2))
        raise NumericalError(
            "eigensolver failed to converge (dim %d, 2-norm %.3g): %s"
            % (op.dim, scale, exc)) from exc
    scale = max(float(np.abs(E).max()), 1e-300)
    resid = np.linalg.norm(op.matrix @ U - U * E[None, :], 2)
    if resid > 1e-8 * scale:
        raise NumericalError("eigenpair residual %.3g exceeds tolerance" % resid)
    gram = np.linalg.norm(U.conj().T @ U - np.eye(op.dim), 2)
    if gram > 1e-8:
        raise NumericalError("eigenvector matrix departs from unitary by %.3g" % gram)
    return SpectralDecomposition(eigenvalues=E, eigenvectors=U, h=op.h,
                                 basis=op.basis)


def _window_values(fam, E, h):
    if hasattr(fam, "value"):
        return np.asarray(fam.value(E, h), dtype=float)
    return np.asarray(fam(E), dtype=float)


def spectral_funcalc(dec, fam, h=None):
    """Exact calculus sum_j rho_h(E_j) Pi_j via the eigendecomposition.

    Projections are built per eigenvalue cluster so degenerate pairs that
    split at round-off share one well-defined projection.
    """
    h = dec.h if h is None else h
    E, U = dec.eigenvalues, dec.eigenvectors
    out = np.zeros((dec.dim, dec.dim), dtype=complex)
    for a, b in dec.clusters():
        w = float(np.mean(_window_values(fam, E[a:b], h)))
        if w != 0.0:
            block = U[:, a:b]
            out += w * (block @ block.conj().T)
    return OperatorMatrix(entries=out, basis="fourier_modes", h=h)


def hamiltonian_eval(V, x, xi):
    """Symbol value |xi|^2 + V(x) of the Schrodinger operator."""
    if V.dimension == 1:
        return float(np.asarray(xi, dtype=float) ** 2 + V.evaluate(x))
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (2,):
        raise DomainError("dimension 2 needs a two-component covector")
    return float(xi @ xi + V.evaluate(x[0], x[1]))
