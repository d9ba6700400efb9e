"""Joint alignment of contours by root shifts and circle diffeomorphisms.

Contour t is read back through its alignment as X_t(phi_{-w_t}(theta_k) + alpha_t),
with X_t extended off the grid by trigonometric interpolation, then smoothed
to order J:

    Gamma_t(theta) = sum_k X_t(phi_{-w_t}(theta_k) + alpha_t) S_k(theta).

The alignment objective is M = sum_t sum_l |Gamma_t(theta_l) - mean_s Gamma_s(theta_l)|^2,
minimised by gradient descent with Armijo backtracking using the analytic
gradient. Shifting every contour by the same angle leaves M unchanged, so
alpha_0 is pinned to zero; the weights are pinned either by w_0 = 0
("w0-zero") or by sum_t w_t = 0 ("mean-zero").
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .diffeo import FlowConfig, integrate_flows, inverse_flow_jacobian
from .estimator import ContourStack
from .spectral import (
    _check_order,
    _require_standard,
    analyze_points,
    smoother_matrix,
    synthesize_arrays,
    wrap_angle,
)

logger = logging.getLogger(__name__)

MODES = ("w0-zero", "mean-zero")


@dataclass(frozen=True, eq=False)
class AlignmentParams:
    """Per-contour shifts ``alphas`` (T + 1,) and diffeo weights ``weights`` (T + 1, 2m)."""

    alphas: np.ndarray
    weights: np.ndarray
    mode: str = "w0-zero"

    def __post_init__(self):
        a = np.array(self.alphas, dtype=float).reshape(-1)
        w = np.array(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != a.size or w.shape[1] % 2:
            raise ValueError(f"weights must have shape ({a.size}, 2m), got {w.shape}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        a.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "alphas", a)
        object.__setattr__(self, "weights", w)

    @property
    def m(self) -> int:
        return self.weights.shape[1] // 2

    @classmethod
    def identity(cls, n_contours: int, m: int, mode: str = "w0-zero") -> "AlignmentParams":
        return cls(np.zeros(n_contours), np.zeros((n_contours, 2 * m)), mode)

    def check_constraints(self, atol: float = 0.0) -> None:
        if self.alphas[0] != 0.0:
            raise ValueError("alpha_0 must be 0")
        if np.any(self.alphas < -np.pi) or np.any(self.alphas >= np.pi):
            raise ValueError("shifts must lie in [-pi, pi)")
        if self.mode == "w0-zero" and np.any(self.weights[0] != 0.0):
            raise ValueError("w0-zero mode requires w_0 = 0")
        if self.mode == "mean-zero" and np.any(np.abs(self.weights.sum(axis=0)) > atol + 1e-12):
            raise ValueError("mean-zero mode requires the weights to sum to zero")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "m": self.m,
            "alphas": self.alphas.tolist(),
            "weights": self.weights.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AlignmentParams":
        a = np.asarray(d["alphas"], dtype=float)
        m = int(d.get("m", 0))
        w = np.asarray(d.get("weights", np.zeros((a.size, 2 * m))), dtype=float).reshape(a.size, -1)
        return cls(a, w, d.get("mode", "w0-zero"))


@dataclass(frozen=True)
class AlignOptions:
    mode: str = "w0-zero"
    max_iter: int = 500
    tol: float = 1e-6
    initial_step: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    grid_search_shifts: bool = False
    grid_size: int = 36
    flow: FlowConfig = field(default_factory=FlowConfig)


@dataclass(eq=False)
class AlignmentResult:
    params: AlignmentParams
    objective: float
    trace: list
    aligned: ContourStack
    status: str
    iterations: int
    J: int
    initial_objective: float

    @property
    def average_error(self) -> float:
        return average_error(self.objective, self.aligned.T + 1, self.aligned.grid.n)

    def to_dict(self) -> dict:
        return {
            "alphas": self.params.alphas.tolist(),
            "weights": self.params.weights.tolist(),
            "m": self.params.m,
            "mode": self.params.mode,
            "J": self.J,
            "M": self.objective,
            "initial_M": self.initial_objective,
            "average_error": self.average_error,
            "average_error_display": format_average_error(self.average_error),
            "iterations": self.iterations,
            "status": self.status,
            "trace": list(self.trace),
        }


def average_error(M: float, n_contours: int, n: int) -> float:
    """Root mean squared distance per aligned point: sqrt(M / ((T + 1) n))."""
    return float(np.sqrt(M / (n_contours * n)))


def format_average_error(value: float) -> str:
    return f"{value:.2f}"


class _Problem:
    """Caches what stays fixed while the alignment parameters change."""

    def __init__(self, stack: ContourStack, J: int, flow: FlowConfig):
        _require_standard(stack.grid)
        self.stack = stack
        self.grid = stack.grid
        self.J = _check_order(J, stack.grid)
        self.flow = flow
        K = stack.grid.max_order
        self.mu, self.nu = analyze_points(stack.points, stack.grid, K)
        j = np.arange(1, K + 1)[:, None]
        self.dmu = np.zeros_like(self.mu)
        self.dmu[:, 1:] = j * self.nu
        self.dnu = -j * self.mu[:, 1:]
        # S[l, k] = S_k(theta_l)
        self.S = smoother_matrix(self.grid, self.J, self.grid.theta)

    def positions(self, params: AlignmentParams, jacobian: bool):
        theta = self.grid.theta
        B = self.stack.T + 1
        if params.m == 0:
            phi = np.broadcast_to(theta, (B, theta.size))
            jac = np.zeros((B, theta.size, 0))
        elif jacobian:
            phi, jac = inverse_flow_jacobian(params.weights, params.m, theta, self.flow)
        else:
            phi = integrate_flows(-params.weights, params.m, theta, self.flow)
            jac = None
        return wrap_angle(phi + params.alphas[:, None]), jac

    def smoothed(self, pos):
        X = synthesize_arrays(self.mu, self.nu, pos)
        return self.S @ X

    def objective(self, params: AlignmentParams) -> float:
        pos, _ = self.positions(params, False)
        G = self.smoothed(pos)
        return float(np.sum((G - G.mean(axis=0)) ** 2))

    def gradient(self, params: AlignmentParams):
        pos, jac = self.positions(params, True)
        G = self.smoothed(pos)
        R = G - G.mean(axis=0)
        M = float(np.sum(R**2))
        Xp = synthesize_arrays(self.dmu, self.dnu, pos)
        q = np.sum((self.S.T @ R) * Xp, axis=-1)
        g_alpha = 2.0 * q.sum(axis=1)
        g_w = 2.0 * np.einsum("tk,tki->ti", q, jac)
        return M, g_alpha, g_w


def _project(g_alpha, g_w, mode):
    g_alpha = g_alpha.copy()
    g_w = g_w.copy()
    g_alpha[0] = 0.0
    if mode == "w0-zero":
        g_w[0] = 0.0
    else:
        g_w -= g_w.mean(axis=0)
    return g_alpha, g_w


def smoothed_curve_t(stack: ContourStack, params: AlignmentParams, t: int, theta, J: int,
                     flow: FlowConfig = FlowConfig()):
    """Order-J smoother of the t-th contour read through its alignment."""
    prob = _Problem(stack, J, flow)
    pos, _ = prob.positions(params, False)
    X = synthesize_arrays(prob.mu[t], prob.nu[t], pos[t])
    S = smoother_matrix(stack.grid, prob.J, wrap_angle(theta))
    return S @ X


def objective(stack: ContourStack, params: AlignmentParams, J: int,
              flow: FlowConfig = FlowConfig()) -> float:
    """Alignment objective M (sum of squared deviations from the mean smoother)."""
    return _Problem(stack, J, flow).objective(params)


def gradient(stack: ContourStack, params: AlignmentParams, J: int,
             flow: FlowConfig = FlowConfig(), project: bool = True):
    """Analytic gradient of M as ``(M, d/d alpha (T + 1,), d/d w (T + 1, 2m))``.

    With ``project`` the constrained coordinates are projected out.
    """
    M, g_alpha, g_w = _Problem(stack, J, flow).gradient(params)
    if project:
        g_alpha, g_w = _project(g_alpha, g_w, params.mode)
    return M, g_alpha, g_w


def _grid_search_shifts(prob: _Problem, params: AlignmentParams, K: int, M: float):
    candidates = -np.pi + 2.0 * np.pi * np.arange(K) / K
    for _ in range(3):
        changed = False
        for t in range(1, prob.stack.T + 1):
            best_a, best_M = params.alphas[t], M
            for a in candidates:
                alphas = params.alphas.copy()
                alphas[t] = a
                trial = prob.objective(replace(params, alphas=alphas))
                if trial < best_M:
                    best_a, best_M = a, trial
            if best_M < M:
                alphas = params.alphas.copy()
                alphas[t] = best_a
                params, M, changed = replace(params, alphas=alphas), best_M, True
        if not changed:
            break
    return params, M


def transform_contours(stack: ContourStack, params: AlignmentParams,
                       flow: FlowConfig = FlowConfig()) -> ContourStack:
    """Resample each contour on the grid at phi_{-w_t}(theta_l) + alpha_t."""
    prob = _Problem(stack, stack.grid.max_order, flow)
    pos, _ = prob.positions(params, False)
    return ContourStack(stack.grid, synthesize_arrays(prob.mu, prob.nu, pos), stack.labels)


def align(stack: ContourStack, J: int, m: int, opts: Optional[AlignOptions] = None) -> AlignmentResult:
    """Estimate shifts and diffeo weights by minimising M.

    Gradient descent from the identity (optionally after a coarse per-contour
    grid search over shifts) with Armijo backtracking. The first line search
    starts at ``opts.initial_step``, later ones at twice the previously
    accepted step. Iteration stops when the
    projected gradient norm falls below ``opts.tol`` or after
    ``opts.max_iter`` iterations.
    """
    opts = opts or AlignOptions()
    if stack.T < 1:
        raise ValueError("alignment needs at least two contours")
    prob = _Problem(stack, J, opts.flow)
    params = AlignmentParams.identity(stack.T + 1, m, opts.mode)
    M = prob.objective(params)
    initial = M
    trace = [M]
    if opts.grid_search_shifts:
        params, M = _grid_search_shifts(prob, params, opts.grid_size, M)
        trace.append(M)

    status = "max-iterations"
    it = 0
    step = opts.initial_step
    while True:
        M, g_alpha, g_w = prob.gradient(params)
        g_alpha, g_w = _project(g_alpha, g_w, params.mode)
        gnorm2 = float(np.sum(g_alpha**2) + np.sum(g_w**2))
        if np.sqrt(gnorm2) < opts.tol:
            status = "converged"
            break
        if it >= opts.max_iter:
            break
        # warm start from the last accepted step, allowing it to grow again
        step = opts.initial_step if it == 0 else step / opts.shrink
        while True:
            alphas = wrap_angle(params.alphas - step * g_alpha)
            alphas[0] = 0.0
            weights = params.weights - step * g_w
            if params.mode == "w0-zero":
                weights[0] = 0.0
            else:
                weights -= weights.mean(axis=0)
            trial = replace(params, alphas=alphas, weights=weights)
            M_new = prob.objective(trial)
            if np.isfinite(M_new) and M_new <= M - opts.armijo * step * gnorm2:
                break
            step *= opts.shrink
            if step * np.sqrt(gnorm2) < 1e-14:
                M_new = None
                break
        if M_new is None:
            status = "stalled"
            break
        params, M = trial, M_new
        trace.append(M)
        it += 1

    if status != "converged":
        logger.warning("alignment stopped with status %s after %d iterations", status, it)
    return AlignmentResult(
        params=params,
        objective=trace[-1],
        trace=trace,
        aligned=transform_contours(stack, params, opts.flow),
        status=status,
        iterations=it,
        J=prob.J,
        initial_objective=initial,
    )
