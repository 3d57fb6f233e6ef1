"""Root-finding kernels for the implicit time-stepping schemes.

Two workhorses:

* a safeguarded Newton solver for the strictly increasing cubic
  ``a3*x**3 + a1*x = rhs`` (a3 > 0, a1 >= 0), which every implicit penalty
  step reduces to, one equation per coordinate;
* a damped (backtracking) Newton solver for the coupled half-step system
  ``V + tau*grad Pi(V) = U`` of the splitting scheme.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "MonotoneCubic",
    "NewtonConfig",
    "HalfStepError",
    "solve_cubic",
    "solve_cubic_batch",
    "solve_coupled",
]

CUBIC_TOL = 1e-12
CUBIC_MAX_ITERS = 200


@dataclass(frozen=True)
class MonotoneCubic:
    """Coefficients of ``a3*x**3 + a1*x = rhs`` with a unique real root."""

    a3: float
    a1: float
    rhs: float


@dataclass(frozen=True)
class NewtonConfig:
    """Damped Newton settings for the coupled half-step solve."""

    tol_residual: float = 1e-10
    max_iters: int = 50
    max_halvings: int = 30

    def __post_init__(self) -> None:
        if self.tol_residual <= 0:
            raise ValueError("tol_residual must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


class HalfStepError(RuntimeError):
    """Raised when the coupled half-step solve fails to reach tolerance."""

    def __init__(self, message: str, best: np.ndarray, residual: float):
        super().__init__(message)
        self.best = best
        self.residual = residual


def solve_cubic_batch(
    a3: np.ndarray,
    a1: np.ndarray,
    rhs: np.ndarray,
    init: np.ndarray,
    condition: str = "a1 >= 0",
) -> np.ndarray:
    """Solve ``a3*x**3 + a1*x = rhs`` element-wise by safeguarded Newton.

    The function is strictly increasing for a3 > 0, a1 >= 0, so each equation
    has exactly one real root, bracketed between 0 and
    ``b = max(|rhs|/max(a1, a3), cbrt(|rhs|/a3)) + 1`` on the side of rhs.
    Newton steps that leave the bracket (or hit a flat derivative) fall back
    to bisection, so convergence is unconditional.

    Residuals meet ``|f(x)| <= 1e-12 * max(1, |rhs|)``.
    """
    a3 = np.asarray(a3, dtype=np.float64)
    a1 = np.asarray(a1, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    init = np.asarray(init, dtype=np.float64)
    if np.any(a3 <= 0):
        raise ValueError("cubic coefficient a3 must be positive")
    if np.any(a1 < 0):
        raise ValueError(f"uniqueness condition violated: {condition}")

    b = np.maximum(np.abs(rhs) / np.maximum(a1, a3), np.cbrt(np.abs(rhs) / a3)) + 1.0
    lo = np.where(rhs >= 0, 0.0, -b)
    hi = np.where(rhs >= 0, b, 0.0)
    x = np.where(rhs == 0.0, 0.0, np.clip(init, lo, hi))  # odd function: rhs 0 -> root 0
    tol = CUBIC_TOL * np.maximum(1.0, np.abs(rhs))
    done = rhs == 0.0

    for _ in range(CUBIC_MAX_ITERS):
        f = a3 * x * x * x + a1 * x - rhs
        done |= np.abs(f) <= tol
        if done.all():
            break
        pos = (f > 0) & ~done
        neg = (f < 0) & ~done
        hi = np.where(pos, np.minimum(hi, x), hi)
        lo = np.where(neg, np.maximum(lo, x), lo)
        fp = 3.0 * a3 * x * x + a1
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            newton = x - f / fp
        bad = ~np.isfinite(newton) | (newton <= lo) | (newton >= hi) | (newton == x)
        x_next = np.where(bad, 0.5 * (lo + hi), newton)
        x = np.where(done, x, x_next)
    return x


def solve_cubic(cubic: MonotoneCubic, init: float = 0.0) -> float:
    """Scalar convenience wrapper around :func:`solve_cubic_batch`."""
    out = solve_cubic_batch(
        np.array([cubic.a3]), np.array([cubic.a1]), np.array([cubic.rhs]), np.array([init])
    )
    return float(out[0])


def solve_coupled(
    F: Callable[[np.ndarray], np.ndarray],
    J: Callable[[np.ndarray], np.ndarray],
    init: Sequence[float],
    cfg: NewtonConfig = NewtonConfig(),
) -> np.ndarray:
    """Solve F(V) = 0 by Newton with exact Jacobian and backtracking damping.

    The step is halved (at most ``cfg.max_halvings`` times) until the squared
    residual norm decreases; a singular Jacobian falls back to a steepest
    descent step on ||F||^2.  Raises :class:`HalfStepError` if the infinity
    norm of F is still above ``cfg.tol_residual`` after ``cfg.max_iters``
    iterations.
    """
    x = np.array(init, dtype=np.float64)
    f = F(x)
    best_x = x.copy()
    best_norm = float(np.max(np.abs(f)))
    for _ in range(cfg.max_iters):
        norm_inf = float(np.max(np.abs(f)))
        if norm_inf < best_norm:
            best_x, best_norm = x.copy(), norm_inf
        if norm_inf <= cfg.tol_residual:
            return x
        jac = J(x)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = -(jac.T @ f)  # descent direction for ||F||^2 / 2
        sq = float(f @ f)
        lam = 1.0
        trial, f_trial = x, f
        for _ in range(cfg.max_halvings + 1):
            trial = x + lam * step
            f_trial = F(trial)
            if np.all(np.isfinite(f_trial)) and float(f_trial @ f_trial) < sq:
                break
            lam *= 0.5
        # Exhausting the halvings accepts the last (tiny) trial; stagnation
        # then surfaces through max_iters below.
        x, f = trial, f_trial
    norm_inf = float(np.max(np.abs(f)))
    if norm_inf <= cfg.tol_residual:
        return x
    if norm_inf < best_norm:
        best_x, best_norm = x, norm_inf
    raise HalfStepError(
        f"half-step did not converge: residual {best_norm:.3e} after {cfg.max_iters} iterations",
        best_x,
        best_norm,
    )
