"""sklearn-style front end so the solvers compose with the wider ecosystem.

The estimator owns hyperparameters only (sklearn contract: ``__init__`` just
stores them, ``get_params``/``set_params`` come from ``BaseEstimator``);
``fit`` builds the penalty model, runs the requested scheme (optionally
multi-start) and exposes the solution through trailing-underscore attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from .integrators import SCHEMES, SchemeParams, multistart
from .model import BooleanProblem, PenaltyModel, recover_x
from .polynomial import SparsePoly

__all__ = ["BooleanPolynomialMinimizer"]


class BooleanPolynomialMinimizer(BaseEstimator):
    """Minimize a polynomial over binary or sign variables.

    Parameters
    ----------
    scheme : {"houbolt", "lie", "rk45"}
        Time-stepping scheme driving the penalty flow.
    domain : {"binary", "pm1"}
        Variable domain of the polynomial handed to :meth:`fit`: ``"binary"``
        for {0,1} objectives (transformed internally), ``"pm1"`` for
        objectives already over sign variables.
    epsilon : float
        Penalty parameter; smaller values pull iterates closer to signs.
    c : float
        Convexifying quadratic weight.
    m, gamma : float
        Mass and damping of the second-order dynamics (houbolt/rk45).
    tau : float or None
        Time step; None selects each scheme's default.
    tau_mode : {"fixed", "variable"}
        Step schedule of the Lie scheme.
    theta, tau_star : float
        Reduction ratio and floor of the variable step schedule.
    t_final : float
        Integration horizon of the RK scheme.
    tol_step, max_iters : stopping controls of the implicit schemes.
    n_starts : int
        Independent multi-starts; the best finite result wins.  With
        ``n_starts=1`` and no ``random_state`` the start is the zero vector.
    random_state : int or None
        Seed for multi-start initial points.

    Attributes
    ----------
    u_ : ndarray
        Final continuous iterate.
    x_ : ndarray
        Recovered binary solution (from the rounded iterate).
    signs_ : ndarray
        Rounded sign vector.
    objective_ : float
        Objective value at the rounded solution, in the domain of ``fit``'s
        polynomial.
    delta_ : float
        Distance from ``u_`` to the nearest sign vector.
    n_iter_ : int
        Iterations (accepted steps for rk45) of the winning run.
    status_ : str
        Solve status of the winning run.
    report_ : SolveReport
        Full report of the winning run.
    reports_ : list[SolveReport]
        All per-start reports.
    """

    def __init__(
        self,
        scheme: str = "houbolt",
        domain: str = "binary",
        epsilon: float = 1e-4,
        c: float = 100.0,
        m: float = 1.0,
        gamma: float = 50.0,
        tau: float | None = None,
        tau_mode: str = "fixed",
        theta: float = 0.8,
        tau_star: float | None = None,
        t_final: float = 1.0,
        tol_step: float = 1e-6,
        max_iters: int = 100_000,
        n_starts: int = 1,
        random_state: int | None = None,
    ):
        self.scheme = scheme
        self.domain = domain
        self.epsilon = epsilon
        self.c = c
        self.m = m
        self.gamma = gamma
        self.tau = tau
        self.tau_mode = tau_mode
        self.theta = theta
        self.tau_star = tau_star
        self.t_final = t_final
        self.tol_step = tol_step
        self.max_iters = max_iters
        self.n_starts = n_starts
        self.random_state = random_state

    def _build(self, P: SparsePoly) -> tuple[PenaltyModel, SchemeParams]:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if self.domain not in ("binary", "pm1"):
            raise ValueError("domain must be 'binary' or 'pm1'")
        problem = (
            BooleanProblem.from_binary(P)
            if self.domain == "binary"
            else BooleanProblem.from_pm1(P)
        )
        model = PenaltyModel(problem, epsilon=self.epsilon, c=self.c)
        params = SchemeParams(
            m=self.m,
            gamma=self.gamma,
            tau0=self.tau,
            theta=self.theta,
            tau_star=self.tau_star,
            tau_mode=self.tau_mode,
            t_final=self.t_final,
            tol_step=self.tol_step,
            max_iters=self.max_iters,
        )
        return model, params

    def fit(self, P: SparsePoly, y: None = None) -> BooleanPolynomialMinimizer:
        """Minimize ``P`` and store the solution on the instance."""
        del y
        if not isinstance(P, SparsePoly):
            raise TypeError("fit expects a SparsePoly")
        model, params = self._build(P)
        if self.n_starts == 1 and self.random_state is None:
            solver = SCHEMES[self.scheme]
            report = solver(model, params, np.zeros(model.n), None, record_trajectory=False)
            reports = [report]
        else:
            seed = 0 if self.random_state is None else int(self.random_state)
            report, reports = multistart(self.scheme, model, params, self.n_starts, seed)
        self.model_ = model
        self.report_ = report
        self.reports_ = reports
        self.u_ = report.u
        self.signs_ = report.rounded
        self.x_ = recover_x(report.rounded)
        self.delta_ = report.delta
        self.n_iter_ = report.iterations
        self.status_ = report.status.value
        if self.domain == "binary":
            self.objective_ = model.problem.P.eval(self.x_)
        else:
            self.objective_ = report.objective
        return self

    def predict(self) -> np.ndarray:
        """Return the fitted solution in the input domain."""
        if not hasattr(self, "report_"):
            raise RuntimeError("call fit before predict")
        return self.x_ if self.domain == "binary" else self.signs_
