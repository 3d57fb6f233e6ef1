"""Boolean problem representation and the quartic penalty functional.

The {0,1} objective P and its {-1,1} counterpart Pi are linked by the affine
change of variables v = 2y - 1, so Pi(V) = P((1 + V)/2) and minimizing P over
the binary cube is the same problem as minimizing Pi over sign vectors.

The penalty functional relaxes the sign constraint:

    J(V) = (1/4 eps) * sum((v_i^2 - 1)^2) + (c/2) * ||V||^2 + Pi(V)

Its stationary points satisfy (1/eps)(V*V - 1)*V + c V + grad Pi(V) = 0; the
integrators drive damped flows of this system to a steady state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .polynomial import SparsePoly
from .validation import check_point, check_sign_vector

__all__ = ["BooleanProblem", "PenaltyModel", "to_pm1", "recover_x", "suggest_c"]


@dataclass(frozen=True, eq=False)
class BooleanProblem:
    """A binary objective P and its sign-variable form Pi, kept in sync."""

    P: SparsePoly
    Pi: SparsePoly

    def __post_init__(self) -> None:
        if self.P.nvars != self.Pi.nvars:
            raise ValueError("P and Pi must have the same number of variables")

    @property
    def n(self) -> int:
        return self.Pi.nvars

    @property
    def d(self) -> int:
        return self.Pi.degree()

    @classmethod
    def from_binary(cls, P: SparsePoly) -> BooleanProblem:
        """Build from the {0,1}-variable objective."""
        return cls(P=P, Pi=P.compose_affine(0.5, 0.5))

    @classmethod
    def from_pm1(cls, Pi: SparsePoly) -> BooleanProblem:
        """Build from the {-1,1}-variable objective (the generator's output)."""
        return cls(P=Pi.compose_affine(2.0, -1.0), Pi=Pi)


def to_pm1(P: SparsePoly) -> BooleanProblem:
    """Reformulate a {0,1} objective over sign variables via v = 2y - 1."""
    return BooleanProblem.from_binary(P)


def recover_x(U: Sequence[float]) -> np.ndarray:
    """Map a sign vector back to binary variables, x_i = (1 + u_i)/2."""
    arr = np.asarray(U, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("sign vector must be one-dimensional")
    u = check_sign_vector(arr, arr.shape[0])
    return (1.0 + u) / 2.0


def suggest_c(problem: BooleanProblem, r: float) -> float:
    """Convexifying weight: an upper bound on the Hessian infinity norm of Pi
    over the ball of radius r.  Taking c at or above this value makes
    (c/2)||V||^2 + Pi(V) convex there.  Advisory only; large c is known to
    wash out the objective."""
    if r <= math.sqrt(problem.n):
        raise ValueError("r must exceed sqrt(n)")
    return problem.Pi.hessian_infnorm_bound(r)


@dataclass(frozen=True, eq=False)
class PenaltyModel:
    """Pi plus penalty weight 1/(4 eps), regularization c and bound radius r.

    ``r`` enters only bound computations (suggest_c, error certificates); the
    flow itself is unconstrained.
    """

    problem: BooleanProblem
    epsilon: float
    c: float = 0.0
    r: float | None = None

    def __post_init__(self) -> None:
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.c < 0:
            raise ValueError("c must be nonnegative")
        if self.r is None:
            object.__setattr__(self, "r", 1.5 * math.sqrt(self.problem.n))
        if self.r <= math.sqrt(self.problem.n):
            raise ValueError("r must exceed sqrt(n)")

    @property
    def n(self) -> int:
        return self.problem.n

    @cached_property
    def pi(self) -> SparsePoly:
        return self.problem.Pi

    def penalty_value(self, V: Sequence[float]) -> float:
        v = check_point(V, self.n)
        quartic = float(np.sum((v * v - 1.0) ** 2)) / (4.0 * self.epsilon)
        return quartic + 0.5 * self.c * float(v @ v) + self.pi.eval(v)

    def penalty_gradient(self, V: Sequence[float]) -> np.ndarray:
        v = check_point(V, self.n)
        return (v * v - 1.0) * v / self.epsilon + self.c * v + self.pi.grad_eval(v)

    def residual_norm(self, V: Sequence[float]) -> float:
        """Infinity norm of the stationarity residual; 0 exactly at critical points."""
        return float(np.max(np.abs(self.penalty_gradient(V)))) if self.n else 0.0
