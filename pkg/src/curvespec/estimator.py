"""Maximum likelihood estimation of the spectral mean curve.

For T + 1 aligned contours with Fourier coefficients F_j^t, G_j^t the mean
coefficients are plain averages across contours, and the per-frequency noise
variances are the pooled squared deviations divided by 4(T + 1) (by
2(T + 1) at j = 0). The mean curve is the synthesis of the averaged
coefficients truncated at order J.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

from .noise import NoiseSpectrum, covariance
from .spectral import (
    ContourSamples,
    FourierCoeffs,
    Grid,
    _check_order,
    analyze_points,
    parseval_distance,
    smoother_matrix,
    synthesize,
    wrap_angle,
)


class InsufficientReplicatesError(ValueError):
    """Noise variances need at least two contours (T >= 1)."""


@dataclass(frozen=True, eq=False)
class ContourStack:
    """T + 1 contours sampled on one common grid; ``points`` is (T + 1, n, 2)."""

    grid: Grid
    points: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[1:] != (self.grid.n, 2) or pts.shape[0] < 1:
            raise ValueError(
                f"expected points of shape (T+1, {self.grid.n}, 2), got {pts.shape}"
            )
        if not np.all(np.isfinite(pts)):
            raise ValueError("contour coordinates must be finite")
        if self.labels is not None:
            labels = tuple(self.labels)
            if len(labels) != pts.shape[0]:
                raise ValueError("one label per contour required")
            object.__setattr__(self, "labels", labels)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def T(self) -> int:
        return self.points.shape[0] - 1

    @property
    def contours(self) -> list[ContourSamples]:
        return [ContourSamples(self.grid, p) for p in self.points]

    @classmethod
    def from_contours(cls, contours: Sequence[ContourSamples], labels=None) -> "ContourStack":
        if not contours:
            raise ValueError("need at least one contour")
        grid = contours[0].grid
        for c in contours[1:]:
            if not c.grid.same_as(grid):
                raise ValueError("all contours must share the same grid")
        return cls(grid, np.stack([c.points for c in contours]), labels)


@dataclass(frozen=True, eq=False)
class MleFit:
    """Estimated mean coefficients and noise variances.

    ``noise_var`` is None when the stack had a single contour.
    ``per_contour_mu``/``per_contour_nu`` hold F_j^t and G_j^t with shapes
    (T + 1, J + 1, 2) and (T + 1, J, 2).
    """

    mean_coeffs: FourierCoeffs
    noise_var: Optional[np.ndarray]
    T: int
    n: int
    per_contour_mu: np.ndarray
    per_contour_nu: np.ndarray

    @property
    def J(self) -> int:
        return self.mean_coeffs.J

    @property
    def per_contour_coeffs(self) -> list[FourierCoeffs]:
        return [FourierCoeffs(m, v) for m, v in zip(self.per_contour_mu, self.per_contour_nu)]

    def to_dict(self) -> dict:
        return {
            "J": self.J,
            "n": self.n,
            "T": self.T,
            "mean_coeffs": self.mean_coeffs.to_dict(),
            "noise_var": None if self.noise_var is None else self.noise_var.tolist(),
            "per_contour_coeffs": [
                {"mu": m.tolist(), "nu": v.tolist()}
                for m, v in zip(self.per_contour_mu, self.per_contour_nu)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MleFit":
        J = int(d["J"])
        per = d["per_contour_coeffs"]
        mu = np.asarray([p["mu"] for p in per], dtype=float).reshape(len(per), J + 1, 2)
        nu = np.asarray([p["nu"] for p in per], dtype=float).reshape(len(per), J, 2)
        var = d.get("noise_var")
        return cls(
            mean_coeffs=FourierCoeffs.from_dict(d["mean_coeffs"]),
            noise_var=None if var is None else np.asarray(var, dtype=float),
            T=int(d["T"]),
            n=int(d["n"]),
            per_contour_mu=mu,
            per_contour_nu=nu,
        )


def fit(stack: ContourStack, J: int, with_variance: Optional[bool] = None) -> MleFit:
    """Maximum likelihood fit of the mean coefficients and noise variances.

    ``with_variance=None`` estimates variances whenever T >= 1; ``True``
    demands them and raises :class:`InsufficientReplicatesError` for a single
    contour.
    """
    J = _check_order(J, stack.grid)
    T = stack.T
    if with_variance and T == 0:
        raise InsufficientReplicatesError(
            "insufficient replicates: noise variances need at least two contours (T >= 1)"
        )
    F, G = analyze_points(stack.points, stack.grid, J)
    mu_hat = F.mean(axis=0)
    nu_hat = G.mean(axis=0)
    var = None
    if T >= 1 and with_variance is not False:
        dev_f = np.sum((F - mu_hat) ** 2, axis=(0, 2))
        dev_g = np.sum((G - nu_hat) ** 2, axis=(0, 2))
        var = np.empty(J + 1)
        var[0] = dev_f[0] / (2 * (T + 1))
        var[1:] = (dev_f[1:] + dev_g) / (4 * (T + 1))
    return MleFit(
        mean_coeffs=FourierCoeffs(mu_hat, nu_hat),
        noise_var=var,
        T=T,
        n=stack.grid.n,
        per_contour_mu=F,
        per_contour_nu=G,
    )


def estimate_curve(fit: MleFit, theta):
    """Spectral mean curve at ``theta`` from the averaged coefficients."""
    return synthesize(fit.mean_coeffs, theta)


def smoothed_estimate(stack: ContourStack, J: int, theta):
    """The same estimate written as a kernel smoother of the raw samples.

    (1 / (T + 1)) sum_t sum_l X_t^l S_l(theta) with
    S_l(theta) = 1/n + (2/n) sum_{j<=J} cos(j (theta - theta_l)).
    """
    J = _check_order(J, stack.grid)
    S = smoother_matrix(stack.grid, J, wrap_angle(theta))
    if not stack.grid.standard:
        S = S * (stack.grid.weights * stack.grid.n / (2 * np.pi))
    return S @ stack.points.mean(axis=0)


def log_likelihood(mean_coeffs: FourierCoeffs, noise_var, stack: ContourStack) -> float:
    """Joint Fourier-domain log likelihood (up to constants) at given parameters.

    Uses the observed coefficients of every contour up to ``mean_coeffs.J``.
    """
    J = mean_coeffs.J
    s2 = np.asarray(noise_var, dtype=float)
    if s2.shape != (J + 1,):
        raise ValueError(f"need {J + 1} variances, got shape {s2.shape}")
    f, g = analyze_points(stack.points, stack.grid, J)
    n_rep = stack.T + 1
    ll = -n_rep * (np.log(s2[0]) + 2.0 * np.sum(np.log(s2[1:])))
    ll -= 0.5 * np.sum((f[:, 0] - mean_coeffs.mu[0]) ** 2) / s2[0]
    sq = np.sum((f[:, 1:] - mean_coeffs.mu[1:]) ** 2, axis=(0, 2))
    sq += np.sum((g - mean_coeffs.nu) ** 2, axis=(0, 2))
    ll -= 0.5 * np.sum(sq / s2[1:])
    return float(ll)


def tail_bias(true_coeffs: FourierCoeffs, J: int) -> float:
    """Energy of the true curve above order J: sum_{j>J} |mu_j|^2 + |nu_j|^2."""
    if true_coeffs.J <= J:
        return 0.0
    return float(np.sum(true_coeffs.mu[J + 1 :] ** 2) + np.sum(true_coeffs.nu[J:] ** 2))


def expected_ise(true_coeffs: FourierCoeffs, spec: NoiseSpectrum, J: int, T: int) -> float:
    """Expected integrated squared error: tail bias + 4 / (T + 1) * sum_{j<=J} sigma2_j."""
    return tail_bias(true_coeffs, J) + 4.0 / (T + 1) * float(np.sum(spec.truncated(J)))


def emse_curve(true_coeffs: FourierCoeffs, spec: NoiseSpectrum, T: int, orders) -> dict:
    """Bias and variance parts of the expected ISE over a range of orders J."""
    orders = [int(J) for J in orders]
    bias = np.array([tail_bias(true_coeffs, J) for J in orders])
    var = np.array([4.0 / (T + 1) * np.sum(spec.truncated(J)) for J in orders])
    return {"J": orders, "tail_bias": bias, "variance": var, "total": bias + var}


def realized_ise(fit: MleFit, true_coeffs: FourierCoeffs) -> float:
    """(1/pi) * integral of |estimate - truth|^2 over the circle."""
    return parseval_distance(fit.mean_coeffs, true_coeffs)


@dataclass(frozen=True, eq=False)
class IseBudget:
    """Decomposition of the integrated squared error.

    ``per_frequency[j]`` is |mu_hat_j - mu_j|^2 + |nu_hat_j - nu_j|^2 for
    j <= J (only the mu part at j = 0), so
    variance_term = 2 * per_frequency[0] + sum(per_frequency[1:]).
    """

    tail_bias: float
    variance_term: float
    per_frequency: np.ndarray
    expected_variance_term: Optional[float] = None
    discretization_offsets: Optional[np.ndarray] = None
    sigma2_n: Optional[np.ndarray] = None

    @property
    def total(self) -> float:
        return self.tail_bias + self.variance_term

    def to_dict(self) -> dict:
        d = {
            "tail_bias": self.tail_bias,
            "variance_term": self.variance_term,
            "realized_ise": self.total,
            "per_frequency": self.per_frequency.tolist(),
            "expected_variance_term": self.expected_variance_term,
            "expected_ise": None
            if self.expected_variance_term is None
            else self.tail_bias + self.expected_variance_term,
            "discretization_offsets": None
            if self.discretization_offsets is None
            else self.discretization_offsets.tolist(),
            "sigma2_n": None if self.sigma2_n is None else self.sigma2_n.tolist(),
        }
        return d


def ise_budget(
    fit: MleFit,
    true_coeffs: FourierCoeffs,
    spec: Optional[NoiseSpectrum] = None,
    offsets: Optional["DiscreteOffsets"] = None,
) -> IseBudget:
    J = fit.J
    est = fit.mean_coeffs
    ref = true_coeffs.resized(J)
    per = np.empty(J + 1)
    per[0] = np.sum((est.mu[0] - ref.mu[0]) ** 2)
    per[1:] = np.sum((est.mu[1:] - ref.mu[1:]) ** 2, axis=1) + np.sum(
        (est.nu - ref.nu) ** 2, axis=1
    )
    z = float(2.0 * per[0] + per[1:].sum())
    exp_var = None if spec is None else 4.0 / (fit.T + 1) * float(np.sum(spec.truncated(J)))
    return IseBudget(
        tail_bias=tail_bias(true_coeffs, J),
        variance_term=z,
        per_frequency=per,
        expected_variance_term=exp_var,
        discretization_offsets=None if offsets is None else offsets.c,
        sigma2_n=None if offsets is None else offsets.sigma2_n,
    )


def true_coefficients(curve: Callable, J: int, tol: float = 1e-10) -> FourierCoeffs:
    """Continuous Fourier coefficients of ``curve`` by adaptive quadrature.

    ``curve(theta)`` must return a planar point for scalar ``theta``.
    """
    mu = np.zeros((J + 1, 2))
    nu = np.zeros((J, 2))
    opts = dict(epsabs=tol, epsrel=tol, limit=500)
    for i in range(2):
        f = lambda x, i=i: float(curve(x)[i])  # noqa: E731
        mu[0, i] = integrate.quad(f, -np.pi, np.pi, **opts)[0] / (2 * np.pi)
        for j in range(1, J + 1):
            mu[j, i] = integrate.quad(f, -np.pi, np.pi, weight="cos", wvar=j, **opts)[0] / np.pi
            nu[j - 1, i] = (
                integrate.quad(f, -np.pi, np.pi, weight="sin", wvar=j, **opts)[0] / np.pi
            )
    return FourierCoeffs(mu, nu)


@dataclass(frozen=True, eq=False)
class DiscreteOffsets:
    """Discretisation effects of Riemann-sum estimation on a finite grid.

    ``c[j]`` is |mu_{j,n} - mu_j|^2 + |nu_{j,n} - nu_j|^2 (mu part only at
    j = 0); ``sigma2_n`` are the Riemann approximations of the spectral
    variances.
    """

    c: np.ndarray
    sigma2_n: np.ndarray
    riemann: FourierCoeffs
    exact: FourierCoeffs

    @property
    def limit(self) -> float:
        """Almost-sure limit of the variance term as T grows."""
        return float(2.0 * self.c[0] + self.c[1:].sum())


def discrete_offsets(
    true_curve, spec: NoiseSpectrum, grid: Grid, J: int, tol: float = 1e-10
) -> DiscreteOffsets:
    """Riemann-sum offsets c_{j,n} and variances sigma2_{j,n} on ``grid``.

    ``true_curve`` is either a callable theta -> planar point, whose exact
    coefficients are then found by quadrature, or a :class:`FourierCoeffs`.
    """
    J = _check_order(J, grid)
    if isinstance(true_curve, FourierCoeffs):
        exact = true_curve.resized(J)
        pts = synthesize(true_curve, grid.theta)
    else:
        exact = true_coefficients(true_curve, J, tol=tol)
        pts = np.array([np.asarray(true_curve(t), dtype=float) for t in grid.theta])
    mu_n, nu_n = analyze_points(pts, grid, J)
    c = np.empty(J + 1)
    c[0] = np.sum((mu_n[0] - exact.mu[0]) ** 2)
    c[1:] = np.sum((mu_n[1:] - exact.mu[1:]) ** 2, axis=1) + np.sum(
        (nu_n - exact.nu) ** 2, axis=1
    )
    # Riemann coefficients of rho, which is even so only cosines contribute
    rho = covariance(spec, grid.theta)
    s2n, _ = analyze_points(np.stack([rho, np.zeros_like(rho)], axis=-1), grid, J)
    return DiscreteOffsets(
        c=c, sigma2_n=s2n[:, 0], riemann=FourierCoeffs(mu_n, nu_n), exact=exact
    )
