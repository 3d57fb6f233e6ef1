"""Exhaustive ground truth, rounding metrics and error-bound certificates.

The exhaustive solver enumerates all 2^n sign vectors (guarded by default at
n <= 24), so solver output can be scored exactly on small instances.  The
certificate implements the O(eps) distance bound

    delta_bar = (4 eps / (1 + 2 c eps)) * (c sqrt(n) + G),

where G bounds the gradient 2-norm of the objective over the ball of radius
r, together with its simpler variant 4 (c + l_r) sqrt(n) eps, l_r = G/sqrt(n).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .model import PenaltyModel
from .polynomial import SparsePoly
from .validation import check_finite

__all__ = [
    "OracleResult",
    "BoundCertificate",
    "exhaustive_min",
    "round_to_signs",
    "delta",
    "errobj",
    "bound_certificate",
    "sign_alignment_check",
    "DEFAULT_ORACLE_MAX_N",
]

DEFAULT_ORACLE_MAX_N = 24

# Sign vectors per evaluation block during enumeration (memory bound).
_ENUM_CHUNK = 1 << 14


@dataclass(frozen=True)
class OracleResult:
    """Exact minimum of an objective over all sign vectors."""

    u_star: np.ndarray
    value: float
    count: int
    size: int

    def contains(self, poly: SparsePoly, u: Sequence[float]) -> bool:
        """Whether ``u`` attains the optimal value (exact comparison)."""
        return float(poly.eval(np.asarray(u, dtype=np.float64))) == self.value


def _signs_for_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Map enumeration indices to sign vectors; index order is lexicographic
    with coordinate 0 most significant and -1 < +1."""
    shifts = np.arange(n - 1, -1, -1, dtype=np.uint64)
    bits = (idx[:, None] >> shifts[None, :]) & 1
    return 2.0 * bits.astype(np.float64) - 1.0


def exhaustive_min(poly: SparsePoly, max_n: int = DEFAULT_ORACLE_MAX_N) -> OracleResult:
    """Exact minimum of ``poly`` over the sign cube by full enumeration.

    Returns the lexicographically smallest optimal vector and the count of
    optima (ties decided by exact float equality, which is sound for
    integer-coefficient instances).
    """
    n = poly.nvars
    if n > max_n:
        raise ValueError(
            f"exhaustive enumeration rejected: n={n} means 2^{n} = {2**n} points "
            f"(guard is n <= {max_n})"
        )
    size = 1 << n
    best_val = math.inf
    best_idx = -1
    count = 0
    for start in range(0, size, _ENUM_CHUNK):
        idx = np.arange(start, min(start + _ENUM_CHUNK, size), dtype=np.uint64)
        vals = poly.eval_many(_signs_for_indices(idx, n))
        lo = float(vals.min())
        if lo < best_val:
            best_val = lo
            best_idx = int(idx[int(np.argmin(vals))])
            count = int(np.count_nonzero(vals == lo))
        elif lo == best_val:
            count += int(np.count_nonzero(vals == lo))
    u_star = _signs_for_indices(np.array([best_idx], dtype=np.uint64), n)[0]
    return OracleResult(u_star=u_star, value=best_val, count=count, size=size)


def round_to_signs(U: Sequence[float]) -> np.ndarray:
    """Nearest sign vector, with the tie u_i = 0 mapped to +1."""
    arr = np.asarray(U, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError("iterate must be one-dimensional")
    u = check_finite(arr, arr.shape[0], "iterate")
    return np.where(u >= 0.0, 1.0, -1.0)


def delta(U: Sequence[float]) -> float:
    """Euclidean distance from ``U`` to its nearest sign vector."""
    u = np.asarray(U, dtype=np.float64)
    return float(np.linalg.norm(u - round_to_signs(u)))


def errobj(poly: SparsePoly, U_eps: Sequence[float], oracle: OracleResult) -> float:
    """Relative objective gap of the rounded iterate against the exact optimum:
    |Pi(round(U)) - Pi(U*)| / (1 + |Pi(U*)|)."""
    rounded = round_to_signs(U_eps)
    val = poly.eval(rounded)
    return abs(val - oracle.value) / (1.0 + abs(oracle.value))


@dataclass(frozen=True)
class BoundCertificate:
    """O(eps) distance-to-signs bound for local minimizers of the penalty.

    ``delta_bar`` is the sharp form, ``simplified_bound`` the weaker
    4 (c + l_r) sqrt(n) eps form.  Both assume the computed point is a local
    minimizer with a sign vector inside its locality ball, which a single
    iterate cannot certify; violations are therefore reported, not asserted.
    """

    epsilon: float
    c: float
    n: int
    r: float
    grad_bound: float
    delta_bar: float
    lipschitz: float
    simplified_bound: float

    def check(self, measured_delta: float) -> bool:
        return measured_delta <= self.delta_bar


def bound_certificate(model: PenaltyModel) -> BoundCertificate:
    """Build the distance certificate for a penalty model."""
    n = model.n
    G = model.pi.grad_norm_bound(model.r)
    sqrt_n = math.sqrt(n)
    delta_bar = (4.0 * model.epsilon / (1.0 + 2.0 * model.c * model.epsilon)) * (
        model.c * sqrt_n + G
    )
    l_r = G / sqrt_n
    simplified = 4.0 * (model.c + l_r) * sqrt_n * model.epsilon
    return BoundCertificate(
        epsilon=model.epsilon,
        c=model.c,
        n=n,
        r=model.r,
        grad_bound=G,
        delta_bar=delta_bar,
        lipschitz=l_r,
        simplified_bound=simplified,
    )


def sign_alignment_check(U_eps: Sequence[float]) -> bool | None:
    """Component-wise alignment of the iterate with its nearest sign vector.

    Returns True when ``round_to_signs(U) * U >= 0`` everywhere, None when a
    coordinate is exactly 0 (tie: the nearest sign vector is not unique, so
    the check is inconclusive).
    """
    u = np.asarray(U_eps, dtype=np.float64)
    if np.any(u == 0.0):
        return None
    return bool(np.all(round_to_signs(u) * u >= 0.0))
