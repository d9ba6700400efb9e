"""Diffeomorphisms of the parameter circle as time-1 flows of x' = f_w(x).

The velocity field f_w is the trigonometric polynomial of order m taking the
value w_j at the equidistant knot x_j = -pi + 2 pi j / (2m + 1),
j = 0..2m, written in the trigonometric cardinal basis

    t_j(x) = prod_{k != j} sin((x - x_k) / 2) / prod_{k != j} sin((x_j - x_k) / 2).

The weight at x_0 = -pi is pinned to zero, so f_w(-pi) = f_w(pi) = 0 and the
flow fixes the endpoints. Flows are integrated with fixed-step classical
Runge-Kutta; sensitivities with respect to the weights are integrated jointly
with the state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import wrap_angle


class FlowError(RuntimeError):
    pass


def make_knots(m: int) -> np.ndarray:
    K = 2 * m + 1
    return -np.pi + 2.0 * np.pi * np.arange(K) / K


@dataclass(frozen=True, eq=False)
class DiffeoSpec:
    """Weights w_1..w_2m of the velocity field; the knots are implied by m."""

    m: int
    w: np.ndarray = None

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"m must be non-negative, got {self.m}")
        w = np.zeros(2 * self.m) if self.w is None else np.array(self.w, dtype=float).reshape(-1)
        if w.shape != (2 * self.m,):
            raise ValueError(f"m={self.m} needs {2 * self.m} weights, got {w.size}")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        object.__setattr__(self, "w", w)

    @property
    def knots(self) -> np.ndarray:
        return make_knots(self.m)

    @property
    def full_weights(self) -> np.ndarray:
        """w_0..w_2m with the pinned w_0 = 0."""
        return np.concatenate([[0.0], self.w])

    def negated(self) -> "DiffeoSpec":
        return DiffeoSpec(self.m, -self.w)

    def to_dict(self) -> dict:
        return {"m": self.m, "w": self.w.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "DiffeoSpec":
        return cls(int(d["m"]), d.get("w"))


@dataclass(frozen=True)
class FlowConfig:
    steps: int = 100
    method: str = "rk4"

    def __post_init__(self):
        if int(self.steps) < 1:
            raise ValueError("the integrator needs at least one step")
        if self.method != "rk4":
            raise ValueError(f"unknown integration method {self.method!r}")


def _denominators(knots: np.ndarray) -> np.ndarray:
    d = np.sin(np.subtract.outer(knots, knots) / 2.0)
    np.fill_diagonal(d, 1.0)
    return d.prod(axis=1)


def cardinal_basis(knots, j: int, x):
    """t_j(x) evaluated by the product formula."""
    knots = np.asarray(knots, dtype=float)
    others = np.delete(knots, j)
    num = np.prod(np.sin(np.subtract.outer(np.asarray(x, dtype=float), others) / 2.0), axis=-1)
    return num / np.prod(np.sin((knots[j] - others) / 2.0))


def cardinal_basis_deriv(knots, j: int, x):
    """t_j'(x) = sum_{k != j} cos((x - x_k)/2) prod_{i != j,k} sin((x - x_i)/2) / (2 D_j)."""
    knots = np.asarray(knots, dtype=float)
    x = np.asarray(x, dtype=float)
    others = np.delete(knots, j)
    half = np.subtract.outer(x, others) / 2.0
    s, c = np.sin(half), np.cos(half)
    total = np.zeros(x.shape)
    for k in range(others.size):
        total = total + c[..., k] * np.prod(np.delete(s, k, axis=-1), axis=-1)
    return total / (2.0 * np.prod(np.sin((knots[j] - others) / 2.0)))


def _leave_one_out_prod(s: np.ndarray) -> np.ndarray:
    ones = np.ones(s.shape[:-1] + (1,))
    left = np.cumprod(np.concatenate([ones, s[..., :-1]], axis=-1), axis=-1)
    right = np.cumprod(np.concatenate([ones, s[..., :0:-1]], axis=-1), axis=-1)[..., ::-1]
    return left * right


def basis_matrix(knots, x) -> np.ndarray:
    """All cardinal functions at once, shape x.shape + (2m + 1,)."""
    knots = np.asarray(knots, dtype=float)
    s = np.sin(np.subtract.outer(np.asarray(x, dtype=float), knots) / 2.0)
    return _leave_one_out_prod(s) / _denominators(knots)


def basis_deriv_matrix(knots, x) -> np.ndarray:
    """All t_j'(x), shape x.shape + (2m + 1,)."""
    knots = np.asarray(knots, dtype=float)
    half = np.subtract.outer(np.asarray(x, dtype=float), knots) / 2.0
    s, c = np.sin(half), np.cos(half)
    K = knots.size
    total = np.zeros(s.shape)
    for k in range(K):
        s_k = s.copy()
        s_k[..., k] = c[..., k]
        loo = _leave_one_out_prod(s_k)
        loo[..., k] = 0.0
        total += loo
    return total / (2.0 * _denominators(knots))


def velocity(spec: DiffeoSpec, x):
    """f_w(x) = sum_j w_j t_j(x)."""
    return basis_matrix(spec.knots, x) @ spec.full_weights


def velocity_deriv(spec: DiffeoSpec, x):
    return basis_deriv_matrix(spec.knots, x) @ spec.full_weights


def _fourier_form(weights: np.ndarray, m: int):
    """Cosine/sine coefficients of f_w from its knot values.

    ``weights`` is (B, 2m); returns a (B, m + 1) and b (B, m + 1) with
    b[:, 0] = 0. Exact because the 2m + 1 knots are equidistant.
    """
    K = 2 * m + 1
    full = np.concatenate([np.zeros(weights.shape[:-1] + (1,)), weights], axis=-1)
    kx = np.outer(make_knots(m), np.arange(m + 1))
    a = 2.0 / K * full @ np.cos(kx)
    b = 2.0 / K * full @ np.sin(kx)
    a[..., 0] *= 0.5
    return a, b


def _field(x, a, b, deriv: bool):
    k = np.arange(a.shape[-1])
    kx = x[..., None] * k
    c, s = np.cos(kx), np.sin(kx)
    f = np.einsum("bnk,bk->bn", c, a) + np.einsum("bnk,bk->bn", s, b)
    if not deriv:
        return f, None
    df = np.einsum("bnk,bk->bn", c, b * k) - np.einsum("bnk,bk->bn", s, a * k)
    return f, df


def integrate_flows(weights, m: int, theta, cfg: FlowConfig = FlowConfig(), sensitivities=False):
    """Time-1 flows for a batch of weight vectors.

    ``weights`` (B, 2m); ``theta`` (N,) shared or (B, N). Returns positions
    (B, N) and, with ``sensitivities``, d phi / d w_i of shape (B, N, 2m)
    from the variational equation u' = f'(x) u + t_i(x), u(0) = 0.
    """
    weights = np.atleast_2d(np.asarray(weights, dtype=float))
    B = weights.shape[0]
    x = np.broadcast_to(np.asarray(theta, dtype=float), (B, np.shape(theta)[-1])).copy()
    if m == 0:
        return (x, np.zeros(x.shape + (0,))) if sensitivities else x
    a, b = _fourier_form(weights, m)
    knots = make_knots(m)
    h = 1.0 / cfg.steps

    if not sensitivities:
        for _ in range(cfg.steps):
            k1 = _field(x, a, b, False)[0]
            k2 = _field(x + 0.5 * h * k1, a, b, False)[0]
            k3 = _field(x + 0.5 * h * k2, a, b, False)[0]
            k4 = _field(x + h * k3, a, b, False)[0]
            x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        return x

    def rhs(x, u):
        f, df = _field(x, a, b, True)
        return f, df[..., None] * u + basis_matrix(knots, x)[..., 1:]

    u = np.zeros(x.shape + (2 * m,))
    for _ in range(cfg.steps):
        k1x, k1u = rhs(x, u)
        k2x, k2u = rhs(x + 0.5 * h * k1x, u + 0.5 * h * k1u)
        k3x, k3u = rhs(x + 0.5 * h * k2x, u + 0.5 * h * k2u)
        k4x, k4u = rhs(x + h * k3x, u + h * k3u)
        x = x + h / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
        u = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u)
    return x, u


def _prepare_angles(theta):
    theta = np.asarray(theta, dtype=float)
    return np.where(np.abs(theta) <= np.pi, theta, wrap_angle(theta))


def _check_monotone(theta, out, cfg: FlowConfig):
    if theta.size < 2:
        return
    order = np.argsort(theta, kind="stable")
    t, y = theta[order], out[order]
    bad = (np.diff(y) <= 0) & (np.diff(t) > 0)
    if np.any(bad):
        raise FlowError(
            f"flow is not monotone with {cfg.steps} integration steps; "
            "increase FlowConfig.steps or reduce the weights"
        )


def flow(spec: DiffeoSpec, cfg: FlowConfig, theta):
    """phi_w(theta): position at time 1 of the particle started at ``theta``."""
    t = _prepare_angles(theta)
    flat = np.atleast_1d(t).ravel()
    out = integrate_flows(spec.w[None, :], spec.m, flat, cfg)[0]
    _check_monotone(flat, out, cfg)
    return out.reshape(np.shape(t)) if np.ndim(t) else float(out[0])


def inverse_flow(spec: DiffeoSpec, cfg: FlowConfig, theta):
    """phi_{-w}(theta), the inverse of :func:`flow` by time reversal."""
    return flow(spec.negated(), cfg, theta)


def inverse_flow_jacobian(weights, m: int, theta, cfg: FlowConfig = FlowConfig()):
    """phi_{-w}(theta) and its derivatives with respect to w for a batch of weights.

    Returns positions (B, N) and d phi_{-w} / d w_i of shape (B, N, 2m).
    """
    x, u = integrate_flows(-np.atleast_2d(weights), m, _prepare_angles(theta), cfg, True)
    return x, -u


def flow_sensitivity(spec: DiffeoSpec, cfg: FlowConfig, theta, i: int):
    """d phi_{-w}(theta) / d w_i for the knot index ``i`` in 1..2m."""
    if not 1 <= i <= 2 * spec.m:
        raise IndexError(f"weight index {i} outside 1..{2 * spec.m}")
    t = _prepare_angles(theta)
    _, jac = inverse_flow_jacobian(spec.w[None, :], spec.m, np.atleast_1d(t).ravel(), cfg)
    out = jac[0, :, i - 1]
    return out.reshape(np.shape(t)) if np.ndim(t) else float(out[0])
