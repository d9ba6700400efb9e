"""Stationary cyclic Gaussian noise defined by its spectral variances.

A planar noise process N = (N_1, N_2) is built as the random Fourier series

    N_i(theta) = sum_j [A_{j,i} cos(j theta) + B_{j,i} sin(j theta)]

with independent A_{j,i}, B_{j,i} ~ Normal(0, sigma2_j). Its covariance
function is rho(theta) = sum_j sigma2_j cos(j theta).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import Grid, trig_table

GENERATOR_NAME = "numpy.random.Generator(PCG64)"


def generator_metadata() -> dict:
    """Identify the pseudo-random generator so experiments can be replayed."""
    return {"generator": GENERATOR_NAME, "numpy": np.__version__}


def spawn_seeds(seed: int, count: int) -> list[np.random.SeedSequence]:
    """Independent child seeds for parallel or repeated draws.

    Child ``k`` is ``SeedSequence(seed).spawn(count)[k]``; the split depends
    only on ``seed`` and ``k``, never on execution order.
    """
    return np.random.SeedSequence(seed).spawn(count)


@dataclass(frozen=True, eq=False)
class NoiseSpectrum:
    """Per-frequency variances sigma2_j for j = 0..J_max."""

    sigma2: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma2, dtype=float).reshape(-1)
        if s.size == 0:
            raise ValueError("spectrum needs at least sigma2_0")
        if not np.all(np.isfinite(s)) or np.any(s < 0):
            raise ValueError("spectral variances must be finite and non-negative")
        s.setflags(write=False)
        object.__setattr__(self, "sigma2", s)

    @property
    def J_max(self) -> int:
        return self.sigma2.size - 1

    def truncated(self, J: int) -> np.ndarray:
        """sigma2_0..sigma2_J, zero-padded beyond J_max."""
        out = np.zeros(J + 1)
        k = min(J, self.J_max)
        out[: k + 1] = self.sigma2[: k + 1]
        return out

    def smoothness(self, eps: float = 1e-3) -> dict:
        """Heuristic check of sum_j j^(2k+eps) sigma2_j < inf for k = 0, 1.

        A finitely supported spectrum is always smooth. Otherwise the decay
        exponent s in sigma2_j ~ j^(-s) is fitted on the upper half of the
        positive entries and the sum is judged convergent when
        s > 2k + 1 + eps. Informational only.
        """
        j = np.arange(self.sigma2.size)
        pos = (j >= 1) & (self.sigma2 > 0)
        if not np.any(pos):
            return {"decay_exponent": None, "continuous": True, "differentiable": True}
        jj = j[pos]
        tail = jj >= max(1, jj[-1] // 2)
        if tail.sum() < 3:
            return {"decay_exponent": None, "continuous": True, "differentiable": True}
        slope = np.polyfit(np.log(jj[tail]), np.log(self.sigma2[pos][tail]), 1)[0]
        s = float(-slope)
        return {
            "decay_exponent": s,
            "continuous": s > 1 + eps,
            "differentiable": s > 3 + eps,
        }

    def to_dict(self) -> dict:
        return {"sigma2": self.sigma2.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSpectrum":
        if "sigma2" in d:
            return cls(d["sigma2"])
        if d.get("model") == "p-order":
            return p_order_spectrum(d["alpha"], d["beta"], d["p"], d["J_max"])
        raise ValueError("noise spectrum needs 'sigma2' or model 'p-order'")


def p_order_spectrum(alpha: float, beta: float, p: float, J_max: int) -> NoiseSpectrum:
    """Generalised p-order model: 1 / sigma2_j = alpha + beta * j^(2p).

    The formula is applied for every j >= 1, and sigma2_0 = 1 / alpha.
    """
    for name, v in (("alpha", alpha), ("beta", beta), ("p", p)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    if J_max < 0:
        raise ValueError(f"J_max must be non-negative, got {J_max}")
    j = np.arange(J_max + 1, dtype=float)
    inv = alpha + beta * j ** (2.0 * p)
    inv[0] = alpha
    return NoiseSpectrum(1.0 / inv)


def covariance(spec: NoiseSpectrum, theta):
    """rho(theta) = sum_j sigma2_j cos(j theta)."""
    c, _ = trig_table(spec.J_max, theta)
    return c @ spec.sigma2


@dataclass(frozen=True, eq=False)
class GpSample:
    """A realisation of planar cyclic noise on a grid.

    ``A`` and ``B`` have shape (J_max + 1, 2); ``B[0]`` is always zero since
    sin(0 theta) vanishes.
    """

    grid: Grid
    values: np.ndarray
    A: np.ndarray
    B: np.ndarray

    def evaluate(self, theta):
        """The same realisation at arbitrary angles."""
        return evaluate_series(self.A, self.B, theta)


def evaluate_series(A, B, theta):
    """sum_j [A_j cos(j theta) + B_j sin(j theta)] for stacked amplitudes.

    ``A``/``B`` have shape (..., J + 1, 2); broadcasting follows matmul.
    """
    A = np.asarray(A)
    c, s = trig_table(A.shape[-2] - 1, theta)
    return c @ A + s @ np.asarray(B)


def draw_amplitudes(spec: NoiseSpectrum, rng: np.random.Generator, size=()):
    """Independent Fourier amplitudes, each of shape size + (J_max + 1, 2)."""
    shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
    sd = np.sqrt(spec.sigma2)[:, None]
    A = rng.standard_normal(shape + (spec.J_max + 1, 2)) * sd
    B = rng.standard_normal(shape + (spec.J_max + 1, 2)) * sd
    B[..., 0, :] = 0.0
    return A, B


def sample_gp(spec: NoiseSpectrum, grid: Grid, rng_seed: int) -> GpSample:
    """Draw one planar noise realisation on ``grid``; deterministic in ``rng_seed``."""
    rng = np.random.default_rng(rng_seed)
    A, B = draw_amplitudes(spec, rng)
    return GpSample(grid=grid, values=evaluate_series(A, B, grid.theta), A=A, B=B)
