"""Time-stepping schemes that drive the penalty flow to a steady state.

Three schemes share one report format:

* ``houbolt_solve`` -- second-order accurate semi-implicit multistep scheme
  for the damped heavy-ball dynamics m*u'' + gamma*u' + grad J(u) = 0.  After
  a closed-form startup step, every update solves n independent strictly
  monotone cubics.
* ``lie_solve`` -- first-order Marchuk-Yanenko operator splitting of the
  gradient flow u' + grad J(u) = 0: an implicit half step for the objective
  gradient (damped Newton on a coupled system) followed by an implicit step
  for the separable penalty+regularization operator (n uncoupled cubics).
* ``rk45_solve`` -- adaptive explicit Dormand-Prince RK(4,5) on the
  first-order form of the heavy-ball system, integrated to a fixed horizon.

The implicit schemes stop when the step norm stays below tolerance for three
consecutive iterations; all schemes bail out early on divergence.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .model import PenaltyModel
from .oracle import delta as distance_to_signs
from .oracle import round_to_signs
from .scalar_solvers import NewtonConfig, solve_coupled, solve_cubic_batch
from .seeding import derive_rng
from .validation import check_finite

__all__ = [
    "SolveStatus",
    "SchemeParams",
    "Trajectory",
    "SolveReport",
    "MultistartError",
    "houbolt_solve",
    "lie_solve",
    "rk45_solve",
    "rk45_integrate",
    "rk45_step",
    "multistart",
    "SCHEMES",
    "RK_RTOL",
    "RK_ATOL",
]

# Fixed tolerances of the RK(4,5) scheme (classic ode45 defaults).
RK_RTOL = 1e-3
RK_ATOL = 1e-6

CONSECUTIVE_SMALL_STEPS = 3

# Relative slack when checking the cubic-uniqueness step conditions, so that
# boundary choices like tau = eps/(1 - eps*c) (exactly zero linear coefficient
# in real arithmetic) survive float rounding.
_COND_SLACK = 64.0 * np.finfo(float).eps


class SolveStatus(str, Enum):
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DIVERGED = "Diverged"
    STEP_CONDITION_VIOLATED = "StepConditionViolated"


@dataclass(frozen=True)
class SchemeParams:
    """Scheme parameters: mass, damping, step schedule, stopping controls."""

    m: float = 1.0
    gamma: float = 50.0
    tau0: float | None = None  # None -> scheme default (see each solver)
    theta: float = 0.8
    tau_star: float | None = None  # None -> tau0 / 100
    tau_mode: str = "fixed"  # "fixed" | "variable" (Lie scheme only)
    t_final: float = 1.0
    tol_step: float = 1e-6
    max_iters: int = 100_000
    diverge_radius: float | None = None  # None -> 10 * model.r

    def __post_init__(self) -> None:
        if self.m <= 0 or self.gamma <= 0:
            raise ValueError("m and gamma must be positive")
        if not (0.0 < self.theta < 1.0):
            raise ValueError("theta must lie in (0, 1)")
        if self.tau0 is not None and self.tau0 <= 0:
            raise ValueError("tau0 must be positive")
        if self.tau_star is not None and self.tau_star <= 0:
            raise ValueError("tau_star must be positive")
        if self.tau0 is not None and self.tau_star is not None and self.tau_star > self.tau0:
            raise ValueError("tau_star must not exceed tau0")
        if self.tau_mode not in ("fixed", "variable"):
            raise ValueError("tau_mode must be 'fixed' or 'variable'")
        if self.t_final <= 0:
            raise ValueError("t_final must be positive")
        if self.tol_step <= 0:
            raise ValueError("tol_step must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.diverge_radius is not None and self.diverge_radius <= 0:
            raise ValueError("diverge_radius must be positive")


class Trajectory:
    """Per-step record of one solve: index, time, step, residual, state."""

    def __init__(self, n: int, with_velocity: bool = False):
        self.n = n
        self.k: list[int] = []
        self.t: list[float] = []
        self.tau: list[float] = []
        self.residual: list[float] = []
        self.states: list[np.ndarray] = []
        self.velocities: list[np.ndarray] | None = [] if with_velocity else None

    def append(
        self,
        k: int,
        t: float,
        tau: float,
        residual: float,
        u: np.ndarray,
        v: np.ndarray | None = None,
    ) -> None:
        self.k.append(k)
        self.t.append(t)
        self.tau.append(tau)
        self.residual.append(residual)
        self.states.append(np.array(u))
        if self.velocities is not None:
            self.velocities.append(np.array(v) if v is not None else np.zeros(self.n))

    def __len__(self) -> int:
        return len(self.k)

    def csv_header(self) -> str:
        return "k,t,tau,residual," + ",".join(f"u_{i}" for i in range(self.n))

    def to_csv(self, path: str | Path) -> None:
        lines = [self.csv_header()]
        for i in range(len(self.k)):
            row = [
                str(int(self.k[i])),
                repr(float(self.t[i])),
                repr(float(self.tau[i])),
                repr(float(self.residual[i])),
            ]
            row.extend(repr(float(x)) for x in self.states[i])
            lines.append(",".join(row))
        Path(path).write_text("\n".join(lines) + "\n")

    def to_json_dict(self) -> dict:
        out = {
            "k": [int(k) for k in self.k],
            "t": [float(t) for t in self.t],
            "tau": [float(t) for t in self.tau],
            "residual": [float(r) for r in self.residual],
            "u": [list(map(float, s)) for s in self.states],
        }
        if self.velocities is not None:
            out["v"] = [list(map(float, s)) for s in self.velocities]
        return out

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict()) + "\n")


@dataclass
class SolveReport:
    """Outcome of one solve: final iterate, rounding, metrics, bookkeeping."""

    scheme: str
    status: SolveStatus
    u: np.ndarray
    rounded: np.ndarray
    delta: float
    objective: float  # objective value at the rounded sign vector
    pi_value: float  # objective value at the raw final iterate
    j_eps: float
    residual: float
    iterations: int
    rejected_steps: int = 0
    wall_time: float = 0.0
    start_index: int | None = None
    trajectory: Trajectory | None = None

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.j_eps))


class MultistartError(RuntimeError):
    """Raised when every start diverged; carries all per-start reports."""

    def __init__(self, reports: list[SolveReport]):
        super().__init__(f"all {len(reports)} starts diverged")
        self.reports = reports


def _finish(
    model: PenaltyModel,
    scheme: str,
    status: SolveStatus,
    u: np.ndarray,
    iterations: int,
    t_start: float,
    trajectory: Trajectory | None,
    rejected_steps: int = 0,
    start_index: int | None = None,
) -> SolveReport:
    finite = bool(np.all(np.isfinite(u)))
    if finite:
        rounded = round_to_signs(u)
        dlt = distance_to_signs(u)
        objective = model.pi.eval(rounded)
        pi_value = model.pi.eval(u)
        j_eps = model.penalty_value(u)
        residual = model.residual_norm(u)
    else:
        rounded = round_to_signs(np.nan_to_num(u))
        dlt = math.inf
        objective = math.nan
        pi_value = math.nan
        j_eps = math.inf
        residual = math.inf
    return SolveReport(
        scheme=scheme,
        status=status,
        u=u,
        rounded=rounded,
        delta=dlt,
        objective=objective,
        pi_value=pi_value,
        j_eps=j_eps,
        residual=residual,
        iterations=iterations,
        rejected_steps=rejected_steps,
        wall_time=time.perf_counter() - t_start,
        start_index=start_index,
        trajectory=trajectory,
    )


def _diverged(u: np.ndarray, radius: float) -> bool:
    return not np.all(np.isfinite(u)) or float(np.max(np.abs(u))) > radius


class _StepMonitor:
    """Stopping rule: step norm below tolerance for 3 consecutive iterations."""

    def __init__(self, tol_step: float):
        self.tol = tol_step
        self.hits = 0

    def update(self, u_new: np.ndarray, u_old: np.ndarray) -> bool:
        bound = self.tol * max(1.0, float(np.max(np.abs(u_old))))
        if float(np.max(np.abs(u_new - u_old))) <= bound:
            self.hits += 1
        else:
            self.hits = 0
        return self.hits >= CONSECUTIVE_SMALL_STEPS


def houbolt_solve(
    model: PenaltyModel,
    params: SchemeParams,
    U0: Sequence[float],
    V0: Sequence[float] | None = None,
    record_trajectory: bool = True,
    start_index: int | None = None,
) -> SolveReport:
    """Damped second-order dynamics discretized by the Houbolt multistep scheme.

    The default step tau = sqrt(2*m*eps) automatically satisfies the cubic
    uniqueness condition 2m/tau^2 + 3*gamma/(2*tau) >= 1/eps; an overridden
    tau is checked against it and rejected (status StepConditionViolated)
    when it fails.  The startup step for U^1 is closed-form; each later step
    solves one monotone cubic per coordinate, coupled only through the
    objective gradient at the extrapolated point 2*U^k - U^{k-1}.
    """
    t_start = time.perf_counter()
    n = model.n
    eps, c = model.epsilon, model.c
    m, gamma = params.m, params.gamma
    u0 = check_finite(U0, n, "U0")
    v0 = np.zeros(n) if V0 is None else check_finite(V0, n, "V0")
    tau = params.tau0 if params.tau0 is not None else math.sqrt(2.0 * m * eps)
    radius = params.diverge_radius if params.diverge_radius is not None else 10.0 * model.r

    traj = Trajectory(n, with_velocity=False) if record_trajectory else None
    if traj is not None:
        traj.append(0, 0.0, 0.0, model.residual_norm(u0), u0)

    a3 = 1.0 / eps
    a1 = 2.0 * m / tau**2 + 1.5 * gamma / tau - 1.0 / eps
    slack = _COND_SLACK * (2.0 * m / tau**2 + 1.5 * gamma / tau + 1.0 / eps)
    if a1 < -slack:
        return _finish(model, "houbolt", SolveStatus.STEP_CONDITION_VIOLATED, u0, 0, t_start, traj,
                       start_index=start_index)
    a1 = max(a1, 0.0)
    a3_vec = np.full(n, a3)
    a1_vec = np.full(n, a1)

    # Startup: closed-form U^1, then U^{-1} = U^1 - 2*tau*V0 seeds the history.
    coef = tau**2 / (2.0 * m)
    u1 = (
        (tau - coef * gamma) * v0
        + (1.0 + coef * (1.0 / eps - c)) * u0
        - (coef / eps) * u0**3
        - coef * model.pi.grad_eval(u0)
    )
    if traj is not None:
        res = model.residual_norm(u1) if np.all(np.isfinite(u1)) else math.inf
        traj.append(1, tau, tau, res, u1)
    if _diverged(u1, radius):
        return _finish(model, "houbolt", SolveStatus.DIVERGED, u1, 1, t_start, traj,
                       start_index=start_index)
    um1 = u1 - 2.0 * tau * v0

    monitor = _StepMonitor(params.tol_step)
    monitor.update(u1, u0)  # the startup step counts toward the stopping rule

    u_km2, u_km1, u_k = um1, u0, u1
    k = 1
    status = SolveStatus.MAX_ITERS
    while k < params.max_iters:
        ext = 2.0 * u_k - u_km1
        rhs = (
            (m / tau**2) * (5.0 * u_k - 4.0 * u_km1 + u_km2)
            + (gamma / (2.0 * tau)) * (4.0 * u_k - u_km1)
            - c * ext
            - model.pi.grad_eval(ext)
        )
        u_next = solve_cubic_batch(
            a3_vec, a1_vec, rhs, init=ext,
            condition="Houbolt step condition 2m/tau^2 + 3*gamma/(2*tau) >= 1/eps",
        )
        k += 1
        if _diverged(u_next, radius):
            u_k = u_next
            status = SolveStatus.DIVERGED
            if traj is not None:
                traj.append(k, k * tau, tau, math.inf, u_next)
            break
        if traj is not None:
            traj.append(k, k * tau, tau, model.residual_norm(u_next), u_next)
        done = monitor.update(u_next, u_k)
        u_km2, u_km1, u_k = u_km1, u_k, u_next
        if done:
            status = SolveStatus.CONVERGED
            break
    return _finish(model, "houbolt", status, u_k, k, t_start, traj, start_index=start_index)


def lie_solve(
    model: PenaltyModel,
    params: SchemeParams,
    U0: Sequence[float],
    V0: Sequence[float] | None = None,
    record_trajectory: bool = True,
    start_index: int | None = None,
    newton: NewtonConfig = NewtonConfig(),
) -> SolveReport:
    """Marchuk-Yanenko splitting of the penalty gradient flow.

    Each step first solves the coupled implicit system
    ``U' + tau * grad Pi(U') = U^k`` by damped Newton (initialized at U^k),
    then one uncoupled monotone cubic per coordinate,
    ``(tau/eps) x^3 + (1 + c*tau - tau/eps) x = u'_i``.  The default
    tau0 = min(eps/(1 - eps*c), 0.1) sits exactly on the uniqueness boundary
    c + 1/tau >= 1/eps; with ``tau_mode="variable"`` the step contracts by
    ``theta`` each iteration until it reaches the floor ``tau_star``.

    ``V0`` is accepted for signature uniformity and ignored (first-order flow).
    """
    del V0
    t_start = time.perf_counter()
    n = model.n
    eps, c = model.epsilon, model.c
    u0 = check_finite(U0, n, "U0")
    radius = params.diverge_radius if params.diverge_radius is not None else 10.0 * model.r

    if params.tau0 is not None:
        tau = params.tau0
    elif eps * c >= 1.0:
        # eps/(1 - eps*c) is undefined here; fall back to the cap.
        tau = 0.1
    else:
        tau = min(eps / (1.0 - eps * c), 0.1)
    tau_star = params.tau_star if params.tau_star is not None else tau / 100.0

    traj = Trajectory(n) if record_trajectory else None
    if traj is not None:
        traj.append(0, 0.0, 0.0, model.residual_norm(u0), u0)

    def cubic_a1(tau_k: float) -> float:
        raw = 1.0 + c * tau_k - tau_k / eps
        slack = _COND_SLACK * (1.0 + c * tau_k + tau_k / eps)
        return max(raw, 0.0) if raw >= -slack else raw

    if cubic_a1(tau) < 0.0:
        return _finish(model, "lie", SolveStatus.STEP_CONDITION_VIOLATED, u0, 0, t_start, traj,
                       start_index=start_index)

    identity = np.eye(n)
    u_k = u0
    t_now = 0.0
    k = 0
    status = SolveStatus.MAX_ITERS
    monitor = _StepMonitor(params.tol_step)
    while k < params.max_iters:
        tau_k = tau
        a1 = cubic_a1(tau_k)
        if a1 < 0.0:
            status = SolveStatus.STEP_CONDITION_VIOLATED
            break
        u_half = solve_coupled(
            lambda V, _u=u_k, _t=tau_k: V + _t * model.pi.grad_eval(V) - _u,
            lambda V, _t=tau_k: identity + _t * model.pi.hessian_eval(V),
            init=u_k,
            cfg=newton,
        )
        u_next = solve_cubic_batch(
            np.full(n, tau_k / eps),
            np.full(n, a1),
            u_half,
            init=u_half,
            condition="Lie step condition c + 1/tau >= 1/eps",
        )
        k += 1
        t_now += tau_k
        if _diverged(u_next, radius):
            u_k = u_next
            status = SolveStatus.DIVERGED
            if traj is not None:
                traj.append(k, t_now, tau_k, math.inf, u_next)
            break
        if traj is not None:
            traj.append(k, t_now, tau_k, model.residual_norm(u_next), u_next)
        done = monitor.update(u_next, u_k)
        u_k = u_next
        if done:
            status = SolveStatus.CONVERGED
            break
        if params.tau_mode == "variable" and tau >= tau_star:
            tau = params.theta * tau
    return _finish(model, "lie", status, u_k, k, t_start, traj, start_index=start_index)


# -- Dormand-Prince RK(4,5) ----------------------------------------------------

_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# b5 - b4: coefficients of the embedded error estimate.
_DP_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)


def rk45_step(
    f: Callable[[float, np.ndarray], np.ndarray], t: float, y: np.ndarray, h: float
) -> tuple[np.ndarray, np.ndarray]:
    """One Dormand-Prince step: the 5th-order update and the embedded
    4th/5th-order error estimate."""
    ks = [f(t, y)]
    for i in range(1, 7):
        yi = y + h * sum(a * ks[j] for j, a in enumerate(_DP_A[i]))
        ks.append(f(t + _DP_C[i] * h, yi))
    y_new = y + h * sum(b * ks[i] for i, b in enumerate(_DP_B5) if b != 0.0)
    err_vec = h * sum(e * ks[i] for i, e in enumerate(_DP_E) if e != 0.0)
    return y_new, err_vec


def rk45_integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0: Sequence[float],
    t_final: float,
    rtol: float = RK_RTOL,
    atol: float = RK_ATOL,
    max_steps: int = 10_000_000,
    observer: Callable[[float, np.ndarray, float], None] | None = None,
) -> tuple[np.ndarray, int, int, str]:
    """Adaptive Dormand-Prince RK(4,5) kernel with ode45-style step control.

    A step is accepted when the mixed error norm

        max_i |err_i| / max(rtol * max(|y_i|, |y_new_i|), atol)

    is at most one.  On acceptance after a clean attempt the step grows by
    ``min(5, 0.8 / err_norm**(1/5))``; the first rejection of an attempt
    shrinks by ``max(0.1, 0.8 / err_norm**(1/5))`` and later rejections
    halve.  Steps are capped at one tenth of the span.

    Returns ``(y(t_final), accepted, rejected, status)`` with status "ok",
    "underflow" (step driven below 1e-14 * span), "nonfinite" or "maxsteps".
    The observer, when given, fires after every accepted step with
    ``(t, y, h_used)``.
    """
    y = np.array(y0, dtype=np.float64)
    t = float(t0)
    span = float(t_final) - t
    if span <= 0:
        raise ValueError("t_final must exceed t0")
    h_min = 1e-14 * span
    h_max = 0.1 * span

    f0 = f(t, y)
    if not np.all(np.isfinite(f0)):
        return y, 0, 0, "nonfinite"
    rh = float(np.max(np.abs(f0) / np.maximum(np.abs(y), atol / rtol))) / (0.8 * rtol**0.2)
    h = h_max if rh == 0.0 or h_max * rh <= 1.0 else 1.0 / rh
    h = max(h, h_min)

    accepted = 0
    rejected = 0
    while t_final - t > h_min:
        # A remaining sliver below h_min is rounding noise from t += h.
        h = min(h, h_max, t_final - t)
        nofailed = True
        while True:
            y_new, err_vec = rk45_step(f, t, y, h)
            if not (np.all(np.isfinite(y_new)) and np.all(np.isfinite(err_vec))):
                return y, accepted, rejected, "nonfinite"
            scale = np.maximum(rtol * np.maximum(np.abs(y), np.abs(y_new)), atol)
            err_norm = float(np.max(np.abs(err_vec) / scale))
            if err_norm <= 1.0:
                break
            rejected += 1
            if nofailed:
                nofailed = False
                h *= max(0.1, 0.8 * err_norm**-0.2)
            else:
                h *= 0.5
            if h < h_min:
                return y, accepted, rejected, "underflow"
        t += h
        y = y_new
        accepted += 1
        if observer is not None:
            observer(t, y, h)
        if accepted >= max_steps:
            return y, accepted, rejected, "maxsteps"
        if nofailed:
            temp = 1.25 * err_norm**0.2
            h = h / temp if temp > 0.2 else 5.0 * h
    return y, accepted, rejected, "ok"


def rk45_solve(
    model: PenaltyModel,
    params: SchemeParams,
    U0: Sequence[float],
    V0: Sequence[float] | None = None,
    record_trajectory: bool = True,
    start_index: int | None = None,
) -> SolveReport:
    """Integrate the first-order heavy-ball system over [0, t_final].

    State is (U, V) with U' = V and m V' = -(gamma V + (1/eps)(U*U-1)*U
    + c U + grad Pi(U)); the report takes U at the final time.  Tolerances
    are fixed at rtol=1e-3, atol=1e-6; accepted and rejected step counts are
    reported separately.
    """
    t_start = time.perf_counter()
    n = model.n
    eps, c = model.epsilon, model.c
    m, gamma = params.m, params.gamma
    u0 = check_finite(U0, n, "U0")
    v0 = np.zeros(n) if V0 is None else check_finite(V0, n, "V0")
    radius = params.diverge_radius if params.diverge_radius is not None else 10.0 * model.r

    def rhs(_t: float, y: np.ndarray) -> np.ndarray:
        u, v = y[:n], y[n:]
        # Overflow here just surfaces as a non-finite state, handled below.
        with np.errstate(over="ignore", invalid="ignore"):
            du = v
            dv = -(gamma * v + (u * u - 1.0) * u / eps + c * u + model.pi.grad_eval(u)) / m
            return np.concatenate([du, dv])

    traj = Trajectory(n, with_velocity=True) if record_trajectory else None
    if traj is not None:
        traj.append(0, 0.0, 0.0, model.residual_norm(u0), u0, v0)

    blown = False

    def observe(t: float, y: np.ndarray, h: float) -> None:
        nonlocal blown
        u = y[:n]
        if traj is not None:
            res = model.residual_norm(u) if np.all(np.isfinite(u)) else math.inf
            traj.append(len(traj.k), t, h, res, u, y[n:])
        if _diverged(u, radius):
            blown = True

    y0 = np.concatenate([u0, v0])
    y, acc, rej, status_str = rk45_integrate(
        rhs, 0.0, y0, params.t_final, rtol=RK_RTOL, atol=RK_ATOL,
        max_steps=params.max_iters, observer=observe,
    )
    u_final = y[:n]
    if status_str == "maxsteps":
        status = SolveStatus.MAX_ITERS
    elif status_str != "ok" or blown or _diverged(u_final, radius):
        status = SolveStatus.DIVERGED
    else:
        status = SolveStatus.CONVERGED
    return _finish(
        model, "rk45", status, u_final, acc, t_start, traj,
        rejected_steps=rej, start_index=start_index,
    )


SCHEMES: dict[str, Callable[..., SolveReport]] = {
    "houbolt": houbolt_solve,
    "lie": lie_solve,
    "rk45": rk45_solve,
}


def multistart(
    scheme: str,
    model: PenaltyModel,
    params: SchemeParams,
    n_starts: int,
    seed: int,
    record_trajectory: bool = False,
) -> tuple[SolveReport, list[SolveReport]]:
    """Run ``n_starts`` independent solves from uniform starts in [-1, 1]^n.

    Start i draws its initial point from the deterministic stream (seed, i)
    with V0 = 0, so the set of runs is independent of execution order.  The
    winner is the non-diverged report with the smallest finite penalty value,
    ties broken by the lowest start index.  Raises :class:`MultistartError`
    when every start diverged.
    """
    if n_starts < 1:
        raise ValueError("n_starts must be >= 1")
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {sorted(SCHEMES)}")
    solver = SCHEMES[scheme]
    reports: list[SolveReport] = []
    for i in range(n_starts):
        rng = derive_rng(seed, i)
        u0 = rng.uniform(-1.0, 1.0, model.n)
        reports.append(
            solver(model, params, u0, None, record_trajectory=record_trajectory, start_index=i)
        )
    eligible = [
        r for r in reports if r.status != SolveStatus.DIVERGED and r.is_finite()
    ]
    if not eligible:
        raise MultistartError(reports)
    best = min(eligible, key=lambda r: (r.j_eps, r.start_index))
    return best, reports
