"""Cyclic Fourier analysis and synthesis of point-sampled closed curves.

Curves are parametrised over [-pi, pi) and sampled on a cyclic grid. The
standard grid has an odd number ``n`` of points

    theta_l = -(n + 1) pi / n + 2 pi l / n,    l = 1, ..., n

on which the Riemann-sum Fourier coefficients of any trigonometric polynomial
of order at most (n - 1) / 2 are exact. Every planar quantity is stored as a
numpy array whose last axis has length 2 (x, y).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi

# above this many samples the Riemann sums switch to compensated summation
FSUM_THRESHOLD = 10_000


class GridError(ValueError):
    pass


def wrap_angle(theta):
    """Reduce angles modulo 2 pi into [-pi, pi)."""
    return np.mod(np.asarray(theta, dtype=float) + np.pi, TWO_PI) - np.pi


@dataclass(frozen=True, eq=False)
class Grid:
    """Cyclic sample locations on [-pi, pi).

    ``standard`` is True only for the odd grid built by :func:`make_grid`;
    exactness of the discrete transform and trigonometric interpolation
    depend on it.
    """

    n: int
    theta: np.ndarray
    standard: bool = True

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.shape != (self.n,):
            raise GridError(f"grid has {theta.size} angles but n={self.n}")
        if not np.all(np.isfinite(theta)):
            raise GridError("grid angles must be finite")
        if self.n > 1 and np.any(np.diff(theta) <= 0):
            raise GridError("grid angles must be strictly increasing")
        if theta[-1] - theta[0] >= TWO_PI:
            raise GridError("grid must span less than one full turn")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)

    @property
    def max_order(self) -> int:
        """Largest order J for which the Fourier parameters are identifiable."""
        return (self.n - 1) // 2

    @property
    def weights(self) -> np.ndarray:
        """Cyclic trapezoid quadrature weights; 2 pi / n on the standard grid."""
        if self.standard:
            return np.full(self.n, TWO_PI / self.n)
        gaps = np.diff(np.append(self.theta, self.theta[0] + TWO_PI))
        return 0.5 * (gaps + np.roll(gaps, 1))

    def same_as(self, other: "Grid") -> bool:
        return (
            self.n == other.n
            and self.standard == other.standard
            and np.array_equal(self.theta, other.theta)
        )

    @classmethod
    def from_angles(cls, theta) -> "Grid":
        """Wrap an arbitrary strictly increasing list of angles.

        The result is flagged standard when it coincides with the odd grid
        of the same size.
        """
        theta = np.asarray(theta, dtype=float)
        n = theta.size
        if n >= 3 and n % 2 == 1:
            ref = make_grid(n)
            if np.allclose(theta, ref.theta, rtol=0, atol=1e-12):
                return ref
        logger.warning(
            "non-standard grid with %d points: discrete Fourier coefficients "
            "are approximate and trigonometric interpolation is unavailable", n
        )
        return cls(n=n, theta=theta, standard=False)


def make_grid(n: int) -> Grid:
    """Build the standard odd grid of size ``n``."""
    if isinstance(n, bool) or int(n) != n:
        raise GridError(f"n must be an integer, got {n!r}")
    n = int(n)
    if n < 3 or n % 2 == 0:
        raise GridError(
            f"n={n}: the grid needs an odd number of points n >= 3, otherwise "
            "the discrete Fourier coefficients are not exact (DFT exactness "
            "lemma requires odd n)"
        )
    l = np.arange(1, n + 1)
    theta = -(n + 1) * np.pi / n + TWO_PI * l / n
    return Grid(n=n, theta=theta, standard=True)


@dataclass(frozen=True, eq=False)
class ContourSamples:
    """One observed contour: ``points[l]`` is the planar sample at ``grid.theta[l]``."""

    grid: Grid
    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.shape != (self.grid.n, 2):
            raise ValueError(
                f"expected {self.grid.n} planar points, got array of shape {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("contour coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True, eq=False)
class FourierCoeffs:
    """Planar cosine/sine coefficients up to order ``J``.

    ``mu`` has shape (J + 1, 2) and holds mu_0 ... mu_J; ``nu`` has shape
    (J, 2) and holds nu_1 ... nu_J.
    """

    mu: np.ndarray
    nu: np.ndarray = field(default=None)

    def __post_init__(self):
        mu = np.array(self.mu, dtype=float).reshape(-1, 2)
        if mu.shape[0] < 1:
            raise ValueError("need at least the constant coefficient mu_0")
        nu = self.nu
        nu = np.zeros((mu.shape[0] - 1, 2)) if nu is None else np.array(nu, dtype=float).reshape(-1, 2)
        if nu.shape[0] != mu.shape[0] - 1:
            raise ValueError(
                f"mu has {mu.shape[0]} entries so nu needs {mu.shape[0] - 1}, got {nu.shape[0]}"
            )
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(nu))):
            raise ValueError("Fourier coefficients must be finite")
        mu.setflags(write=False)
        nu.setflags(write=False)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    @property
    def J(self) -> int:
        return self.mu.shape[0] - 1

    @classmethod
    def zeros(cls, J: int) -> "FourierCoeffs":
        return cls(np.zeros((J + 1, 2)), np.zeros((J, 2)))

    def resized(self, J: int) -> "FourierCoeffs":
        """Truncate or zero-pad to order ``J``."""
        mu = np.zeros((J + 1, 2))
        nu = np.zeros((J, 2))
        k = min(J, self.J)
        mu[: k + 1] = self.mu[: k + 1]
        nu[:k] = self.nu[:k]
        return FourierCoeffs(mu, nu)

    def allclose(self, other: "FourierCoeffs", atol: float = 1e-12) -> bool:
        J = max(self.J, other.J)
        a, b = self.resized(J), other.resized(J)
        return np.allclose(a.mu, b.mu, rtol=0, atol=atol) and np.allclose(
            a.nu, b.nu, rtol=0, atol=atol
        )

    def to_dict(self) -> dict:
        return {"J": self.J, "mu": self.mu.tolist(), "nu": self.nu.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "FourierCoeffs":
        mu = np.asarray(d["mu"], dtype=float).reshape(-1, 2)
        nu = np.asarray(d["nu"], dtype=float).reshape(-1, 2)
        out = cls(mu, nu)
        if "J" in d and int(d["J"]) != out.J:
            raise ValueError(f"declared J={d['J']} does not match {out.J} coefficients")
        return out


def trig_table(J: int, theta):
    """Return cos(j theta) and sin(j theta) for j = 0..J, shape (..., J + 1)."""
    theta = wrap_angle(theta)
    jt = np.multiply.outer(theta, np.arange(J + 1))
    return np.cos(jt), np.sin(jt)


def _check_order(J: int, grid: Grid) -> int:
    if J < 0:
        raise ValueError(f"order J must be non-negative, got {J}")
    if J > grid.max_order:
        logger.warning(
            "J=%d exceeds (n-1)/2=%d for n=%d; truncating to keep the Fourier "
            "parameters identifiable", J, grid.max_order, grid.n
        )
        return grid.max_order
    return J


def _weighted_sum(basis: np.ndarray, values: np.ndarray) -> np.ndarray:
    """sum_l basis[j, l] * values[..., l, :] -> (..., j, 2)."""
    if values.shape[-2] <= FSUM_THRESHOLD:
        return np.einsum("jl,...lc->...jc", basis, values)
    out = np.empty(values.shape[:-2] + (basis.shape[0], values.shape[-1]))
    for idx in np.ndindex(*values.shape[:-2]):
        v = values[idx]
        for j in range(basis.shape[0]):
            for c in range(v.shape[-1]):
                out[idx + (j, c)] = math.fsum(basis[j] * v[:, c])
    return out


def analyze_points(points, grid: Grid, J: int):
    """Riemann-sum Fourier coefficients of stacked samples.

    ``points`` has shape (..., n, 2). Returns ``(mu, nu)`` with shapes
    (..., J + 1, 2) and (..., J, 2). No order check is done here.
    """
    points = np.asarray(points, dtype=float)
    c, s = trig_table(J, grid.theta)
    w = grid.weights / np.pi
    cos_basis = c.T * w
    cos_basis[0] *= 0.5
    mu = _weighted_sum(cos_basis, points)
    nu = _weighted_sum(s.T[1:] * w, points)
    return mu, nu


def analyze(samples: ContourSamples, J: int) -> FourierCoeffs:
    """Fourier coefficients of order 0..J of a sampled contour.

    On the standard grid these are F_0 = (1/n) sum X^l,
    F_j = (2/n) sum X^l cos(j theta_l) and G_j = (2/n) sum X^l sin(j theta_l).
    """
    J = _check_order(J, samples.grid)
    mu, nu = analyze_points(samples.points, samples.grid, J)
    return FourierCoeffs(mu, nu)


def synthesize_arrays(mu, nu, theta):
    """Evaluate mu_0 + sum_j [mu_j cos(j theta) + nu_j sin(j theta)].

    ``mu`` (..., J + 1, 2), ``nu`` (..., J, 2). Shapes follow matmul
    broadcasting: a 1-d ``theta`` with a batch of coefficients gives
    (..., len(theta), 2), and per-batch angles (B, L) pair with (B, J + 1, 2).
    """
    mu = np.asarray(mu, dtype=float)
    nu = np.asarray(nu, dtype=float)
    c, s = trig_table(mu.shape[-2] - 1, theta)
    return c @ mu + s[..., 1:] @ nu


def synthesize(coeffs: FourierCoeffs, theta):
    """Evaluate the trigonometric polynomial with coefficients ``coeffs``.

    Returns a planar point for scalar ``theta``, else shape (len(theta), 2).
    """
    return synthesize_arrays(coeffs.mu, coeffs.nu, theta)


def differentiate(coeffs: FourierCoeffs) -> FourierCoeffs:
    """Coefficients of the term-wise derivative d/dtheta."""
    j = np.arange(1, coeffs.J + 1)[:, None]
    mu = np.zeros_like(coeffs.mu)
    mu[1:] = j * coeffs.nu
    return FourierCoeffs(mu, -j * coeffs.mu[1:])


def smoother_matrix(grid: Grid, J: int, theta) -> np.ndarray:
    """Smoothing weights S_l(theta) = 1/n + (2/n) sum_{j<=J} cos(j (theta - theta_l)).

    Returns shape (len(theta), n), or (n,) for scalar ``theta``.
    """
    d = np.subtract.outer(np.asarray(theta, dtype=float), grid.theta)
    c, _ = trig_table(J, d)
    return (2.0 * c.sum(axis=-1) - 1.0) / grid.n


def smoother_weight(grid: Grid, l: int, J: int, theta) -> float:
    """S_l(theta) for the zero-based sample index ``l``."""
    if not 0 <= l < grid.n:
        raise IndexError(f"sample index {l} outside 0..{grid.n - 1}")
    d = float(theta) - grid.theta[l]
    return 1.0 / grid.n + 2.0 / grid.n * sum(math.cos(j * d) for j in range(1, J + 1))


def _require_standard(grid: Grid):
    if not grid.standard:
        raise GridError(
            "trigonometric interpolation requires the standard odd grid "
            "theta_l = -(n+1)pi/n + 2 pi l/n"
        )


def interpolant(samples: ContourSamples) -> FourierCoeffs:
    """Coefficients of the unique order-(n-1)/2 trigonometric interpolant."""
    _require_standard(samples.grid)
    return analyze(samples, samples.grid.max_order)


def trig_interpolate(samples: ContourSamples, theta):
    """Value of the trigonometric interpolant of ``samples`` at ``theta``."""
    return synthesize(interpolant(samples), theta)


def trig_interpolate_deriv(samples: ContourSamples, theta):
    """Derivative in theta of the trigonometric interpolant."""
    return synthesize(differentiate(interpolant(samples)), theta)


def parseval_distance(a: FourierCoeffs, b: FourierCoeffs) -> float:
    """(1/pi) * integral over [-pi, pi] of the squared distance between two curves.

    By Parseval this is 2 |mu_0^a - mu_0^b|^2 plus the summed squared
    differences of all higher coefficients; the shorter list is zero-padded.
    """
    J = max(a.J, b.J)
    a, b = a.resized(J), b.resized(J)
    dmu = a.mu - b.mu
    dnu = a.nu - b.nu
    return float(2.0 * np.sum(dmu[0] ** 2) + np.sum(dmu[1:] ** 2) + np.sum(dnu**2))
