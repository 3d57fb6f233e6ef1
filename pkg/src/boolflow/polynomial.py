"""Sparse multivariate polynomials with evaluation, calculus and seeded generation.

A polynomial is a canonical, immutable collection of monomials.  Exponents are
stored sparsely as ``(variable_index, power)`` pairs with strictly increasing
indices and strictly positive powers; terms are sorted by (total degree,
exponent pattern) and never share a pattern or carry a zero coefficient.  The
zero polynomial has no terms.

Coefficients are 64-bit floats.  Generated instances use integer coefficients,
which are exact in this representation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .seeding import derive_rng

__all__ = [
    "Monomial",
    "SparsePoly",
    "InstanceSpec",
    "random_poly",
    "save_instance",
    "load_instance",
    "INSTANCE_FORMAT_VERSION",
]

INSTANCE_FORMAT_VERSION = 1

# Candidate monomial pools larger than this are subsampled rather than
# enumerated (keeps generation memory bounded for large n, d).
POOL_CAP = 100_000

# Exponent patterns are tuples of (index, power) pairs.
ExpPattern = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class Monomial:
    """One term: ``coef * prod_i v_i**power_i`` with sparse exponents."""

    exps: ExpPattern
    coef: float

    def degree(self) -> int:
        return sum(p for _, p in self.exps)


def _validate_pattern(exps: ExpPattern, nvars: int) -> None:
    last = -1
    for i, p in exps:
        if not (0 <= i < nvars):
            raise ValueError(f"variable index {i} out of range for nvars={nvars}")
        if i <= last:
            raise ValueError("exponent indices must be strictly increasing")
        if p <= 0:
            raise ValueError("stored exponents must be positive")
        last = i


def _sort_key(m: Monomial) -> tuple:
    return (m.degree(), m.exps)


@dataclass(frozen=True, eq=False)
class SparsePoly:
    """Canonical sparse polynomial in ``nvars`` real variables.

    Instances are immutable and safe to share across threads; evaluation
    tables are cached lazily on first use.
    """

    nvars: int
    terms: tuple[Monomial, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.nvars < 1:
            raise ValueError("nvars must be >= 1")
        seen: set[ExpPattern] = set()
        prev_key = None
        for m in self.terms:
            _validate_pattern(m.exps, self.nvars)
            if m.coef == 0.0:
                raise ValueError("canonical polynomials store no zero terms")
            if m.exps in seen:
                raise ValueError(f"duplicate exponent pattern {m.exps}")
            seen.add(m.exps)
            key = _sort_key(m)
            if prev_key is not None and key < prev_key:
                raise ValueError("terms are not in canonical order")
            prev_key = key

    # -- construction -----------------------------------------------------

    @classmethod
    def from_terms(
        cls, nvars: int, items: Iterable[tuple[ExpPattern, float]] | Mapping[ExpPattern, float]
    ) -> SparsePoly:
        """Build a canonical polynomial, merging duplicates and dropping zeros."""
        if isinstance(items, Mapping):
            items = items.items()
        acc: dict[ExpPattern, float] = {}
        for exps, coef in items:
            exps = tuple((int(i), int(p)) for i, p in exps)
            acc[exps] = acc.get(exps, 0.0) + float(coef)
        terms = tuple(
            sorted(
                (Monomial(e, c) for e, c in acc.items() if c != 0.0),
                key=_sort_key,
            )
        )
        return cls(nvars, terms)

    @classmethod
    def zero(cls, nvars: int) -> SparsePoly:
        return cls(nvars, ())

    @classmethod
    def constant(cls, nvars: int, value: float) -> SparsePoly:
        return cls.from_terms(nvars, [((), value)])

    @classmethod
    def variable(cls, nvars: int, index: int) -> SparsePoly:
        return cls.from_terms(nvars, [(((index, 1),), 1.0)])

    # -- basic queries -----------------------------------------------------

    def degree(self) -> int:
        """Maximum total degree over terms; 0 for the zero polynomial."""
        return max((m.degree() for m in self.terms), default=0)

    def num_terms(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.nvars, self.terms))

    def __repr__(self) -> str:
        return f"SparsePoly(nvars={self.nvars}, terms={len(self.terms)}, degree={self.degree()})"

    # -- cached dense tables ------------------------------------------------

    @cached_property
    def _exp_matrix(self) -> np.ndarray:
        """Dense (num_terms, nvars) integer exponent matrix."""
        E = np.zeros((len(self.terms), self.nvars), dtype=np.int64)
        for t, m in enumerate(self.terms):
            for i, p in m.exps:
                E[t, i] = p
        return E

    @cached_property
    def _coef_vector(self) -> np.ndarray:
        return np.array([m.coef for m in self.terms], dtype=np.float64)

    @cached_property
    def _gradient_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Fused first-derivative table: unique patterns ``E`` (K, nvars) and
        weights ``W`` (nvars, K) with grad(v) = W @ prod(v**E, axis=1)."""
        n = self.nvars
        E = self._exp_matrix
        c = self._coef_vector
        pat_rows: list[np.ndarray] = []
        weights: list[np.ndarray] = []
        entries: list[np.ndarray] = []
        for i in range(n):
            mask = E[:, i] >= 1
            if not np.any(mask):
                continue
            pats = E[mask].copy()
            pats[:, i] -= 1
            pat_rows.append(pats)
            weights.append(c[mask] * E[mask, i])
            entries.append(np.full(int(mask.sum()), i, dtype=np.int64))
        if not pat_rows:
            return np.zeros((0, n), dtype=np.int64), np.zeros((n, 0))
        all_pats = np.concatenate(pat_rows, axis=0)
        uniq, inverse = np.unique(all_pats, axis=0, return_inverse=True)
        W = np.zeros((n, uniq.shape[0]))
        np.add.at(W, (np.concatenate(entries), inverse), np.concatenate(weights))
        return uniq, W

    @cached_property
    def _hessian_table(self) -> tuple[np.ndarray, np.ndarray]:
        """Fused second-derivative evaluation table.

        Second derivatives of all terms share few distinct exponent patterns,
        so the table stores the unique patterns ``E`` (K, nvars) plus a dense
        weight matrix ``W`` (nvars**2, K) mapping their values to the
        flattened Hessian.  One matrix-vector product per evaluation.
        """
        n = self.nvars
        E = self._exp_matrix
        c = self._coef_vector
        pat_rows: list[np.ndarray] = []
        weights: list[np.ndarray] = []
        entries: list[np.ndarray] = []
        for i in range(n):
            ei = E[:, i]
            for j in range(i, n):
                if i == j:
                    mask = ei >= 2
                    w = c[mask] * ei[mask] * (ei[mask] - 1)
                else:
                    mask = (ei >= 1) & (E[:, j] >= 1)
                    w = c[mask] * ei[mask] * E[mask, j]
                if not np.any(mask):
                    continue
                pats = E[mask].copy()
                pats[:, i] -= 1
                pats[:, j] -= 1
                pat_rows.append(pats)
                weights.append(w)
                entries.append(np.full(w.shape[0], i * n + j, dtype=np.int64))
        if not pat_rows:
            return np.zeros((0, n), dtype=np.int64), np.zeros((n * n, 0))
        all_pats = np.concatenate(pat_rows, axis=0)
        all_w = np.concatenate(weights)
        all_entries = np.concatenate(entries)
        uniq, inverse = np.unique(all_pats, axis=0, return_inverse=True)
        W = np.zeros((n * n, uniq.shape[0]))
        np.add.at(W, (all_entries, inverse), all_w)
        # Mirror the strict upper triangle onto the lower one.
        for i in range(n):
            for j in range(i + 1, n):
                W[j * n + i] = W[i * n + j]
        return uniq, W

    # -- evaluation ----------------------------------------------------------

    def _check_point(self, v: Sequence[float]) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        if v.shape != (self.nvars,):
            raise ValueError(f"point has shape {v.shape}, expected ({self.nvars},)")
        return v

    def eval(self, v: Sequence[float]) -> float:
        """Evaluate at one point (exact 0.0 for the zero polynomial)."""
        v = self._check_point(v)
        if not self.terms:
            return 0.0
        powers = v[None, :] ** self._exp_matrix
        return float(self._coef_vector @ np.prod(powers, axis=1))

    def eval_many(self, V: np.ndarray, max_block: int = 1 << 22) -> np.ndarray:
        """Evaluate at the rows of ``V`` (shape (m, nvars)), chunked for memory."""
        V = np.asarray(V, dtype=np.float64)
        if V.ndim != 2 or V.shape[1] != self.nvars:
            raise ValueError(f"points have shape {V.shape}, expected (m, {self.nvars})")
        m = V.shape[0]
        if not self.terms:
            return np.zeros(m)
        E = self._exp_matrix
        c = self._coef_vector
        chunk = max(1, max_block // max(1, E.size))
        out = np.empty(m)
        for s in range(0, m, chunk):
            block = V[s : s + chunk]
            powers = block[:, None, :] ** E[None, :, :]
            out[s : s + chunk] = np.prod(powers, axis=2) @ c
        return out

    def grad_eval(self, v: Sequence[float]) -> np.ndarray:
        """Gradient at one point via the fused derivative table (no symbolic
        differentiation, no divisions, exact at zero coordinates)."""
        v = self._check_point(v)
        E, W = self._gradient_table
        if not E.size:
            return np.zeros(self.nvars)
        vals = np.prod(v[None, :] ** E, axis=1)
        return W @ vals

    def hessian_eval(self, v: Sequence[float]) -> np.ndarray:
        """Dense symmetric Hessian matrix at one point."""
        v = self._check_point(v)
        E, W = self._hessian_table
        if not E.size:
            return np.zeros((self.nvars, self.nvars))
        vals = np.prod(v[None, :] ** E, axis=1)
        return (W @ vals).reshape(self.nvars, self.nvars)

    # -- arithmetic ------------------------------------------------------------

    def _as_dict(self) -> dict[ExpPattern, float]:
        return {m.exps: m.coef for m in self.terms}

    def __add__(self, other: SparsePoly) -> SparsePoly:
        if not isinstance(other, SparsePoly):
            return NotImplemented
        if other.nvars != self.nvars:
            raise ValueError("nvars mismatch")
        acc = self._as_dict()
        for m in other.terms:
            acc[m.exps] = acc.get(m.exps, 0.0) + m.coef
        return SparsePoly.from_terms(self.nvars, acc)

    def __sub__(self, other: SparsePoly) -> SparsePoly:
        return self + (-1.0) * other

    def __rmul__(self, scalar: float) -> SparsePoly:
        return SparsePoly.from_terms(
            self.nvars, [(m.exps, scalar * m.coef) for m in self.terms]
        )

    def __mul__(self, other: SparsePoly | float) -> SparsePoly:
        if isinstance(other, (int, float)):
            return self.__rmul__(float(other))
        if not isinstance(other, SparsePoly):
            return NotImplemented
        if other.nvars != self.nvars:
            raise ValueError("nvars mismatch")
        acc: dict[ExpPattern, float] = {}
        for ma in self.terms:
            ea = dict(ma.exps)
            for mb in other.terms:
                e = dict(ea)
                for i, p in mb.exps:
                    e[i] = e.get(i, 0) + p
                pat = tuple(sorted(e.items()))
                acc[pat] = acc.get(pat, 0.0) + ma.coef * mb.coef
        return SparsePoly.from_terms(self.nvars, acc)

    def __neg__(self) -> SparsePoly:
        return (-1.0) * self

    # -- calculus ---------------------------------------------------------------

    def diff(self, index: int) -> SparsePoly:
        """Partial derivative with respect to variable ``index``."""
        if not (0 <= index < self.nvars):
            raise ValueError(f"variable index {index} out of range")
        acc: dict[ExpPattern, float] = {}
        for m in self.terms:
            e = dict(m.exps)
            p = e.get(index, 0)
            if p == 0:
                continue
            if p == 1:
                del e[index]
            else:
                e[index] = p - 1
            pat = tuple(sorted(e.items()))
            acc[pat] = acc.get(pat, 0.0) + m.coef * p
        return SparsePoly.from_terms(self.nvars, acc)

    def grad(self) -> tuple[SparsePoly, ...]:
        """All first partial derivatives as canonical polynomials."""
        return tuple(self.diff(i) for i in range(self.nvars))

    def hessian(self) -> tuple[tuple[SparsePoly, ...], ...]:
        """Matrix of second partial derivatives (symmetric entry-wise)."""
        g = self.grad()
        return tuple(tuple(g[i].diff(j) for j in range(self.nvars)) for i in range(self.nvars))

    def compose_affine(self, scale: float, shift: float) -> SparsePoly:
        """Expand ``p(scale*v + shift*1)`` to canonical form.

        Each variable power expands binomially; duplicate patterns merge.
        """
        acc: dict[ExpPattern, float] = {}
        for m in self.terms:
            partial: dict[ExpPattern, float] = {(): m.coef}
            for i, p in m.exps:
                weights = [
                    math.comb(p, j) * scale**j * shift ** (p - j) for j in range(p + 1)
                ]
                nxt: dict[ExpPattern, float] = {}
                for pat, c in partial.items():
                    for j, w in enumerate(weights):
                        if w == 0.0:
                            continue
                        new_pat = pat if j == 0 else pat + ((i, j),)
                        nxt[new_pat] = nxt.get(new_pat, 0.0) + c * w
                partial = nxt
            for pat, c in partial.items():
                acc[pat] = acc.get(pat, 0.0) + c
        return SparsePoly.from_terms(self.nvars, acc)

    # -- norm bounds -------------------------------------------------------------

    def grad_norm_bound(self, r: float) -> float:
        """Upper bound on the gradient 2-norm over the ball of radius ``r``.

        Per coordinate, each term contributes ``|coef| * power * r**(deg-1)``
        (every ``|v_j| <= r`` on the ball); the bound is the 2-norm of the
        per-coordinate sums.
        """
        if r <= 0:
            raise ValueError("r must be positive")
        bounds = np.zeros(self.nvars)
        for m in self.terms:
            d = m.degree()
            for i, p in m.exps:
                bounds[i] += abs(m.coef) * p * r ** (d - 1)
        return float(np.linalg.norm(bounds))

    def hessian_infnorm_bound(self, r: float) -> float:
        """Upper bound on the Hessian infinity norm over the ball of radius ``r``.

        Each entry polynomial is bounded term-wise by ``|coef| * r**deg``; the
        result is the maximum row sum, which dominates the spectral radius
        everywhere on the ball.
        """
        if r <= 0:
            raise ValueError("r must be positive")
        H = self.hessian()
        best = 0.0
        for i in range(self.nvars):
            row = 0.0
            for j in range(self.nvars):
                row += sum(abs(m.coef) * r ** m.degree() for m in H[i][j].terms)
            best = max(best, row)
        return best

    # -- serialization --------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": INSTANCE_FORMAT_VERSION,
            "nvars": self.nvars,
            "degree": self.degree(),
            "terms": [
                {"coef": m.coef, "exps": [[i, p] for i, p in m.exps]} for m in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> SparsePoly:
        if data.get("format") != INSTANCE_FORMAT_VERSION:
            raise ValueError(f"unsupported instance format: {data.get('format')!r}")
        poly = cls.from_terms(
            int(data["nvars"]),
            [
                (tuple((int(i), int(p)) for i, p in t["exps"]), float(t["coef"]))
                for t in data["terms"]
            ],
        )
        if "degree" in data and poly.degree() != int(data["degree"]):
            raise ValueError("declared degree does not match terms")
        return poly


# -- random generation -----------------------------------------------------------


@dataclass(frozen=True)
class InstanceSpec:
    """Recipe for one seeded random instance.

    ``sparsity`` is the independent retention probability of each candidate
    monomial of total degree <= d (see :func:`random_poly`).
    """

    n: int
    d: int
    coeff_lo: int = -10
    coeff_hi: int = 10
    sparsity: float = 1.0
    seed: int = 0

    def validate(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.coeff_lo > self.coeff_hi:
            raise ValueError("coeff_lo must be <= coeff_hi")
        if self.coeff_lo == 0 and self.coeff_hi == 0:
            raise ValueError("coefficient range {0} admits no nonzero coefficients")
        if not (0.0 < self.sparsity <= 1.0):
            raise ValueError("sparsity must lie in (0, 1]")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "coeff_lo": self.coeff_lo,
            "coeff_hi": self.coeff_hi,
            "sparsity": self.sparsity,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> InstanceSpec:
        return cls(
            n=int(data["n"]),
            d=int(data["d"]),
            coeff_lo=int(data["coeff_lo"]),
            coeff_hi=int(data["coeff_hi"]),
            sparsity=float(data["sparsity"]),
            seed=int(data["seed"]),
        )


def _num_monomials_upto(n: int, d: int) -> int:
    """Count exponent vectors in n variables with total degree <= d."""
    return math.comb(n + d, d)


def _unrank_upto(rank: int, n: int, d: int) -> ExpPattern:
    """Rank -> exponent vector of total degree <= d, lexicographic order."""
    exps: list[tuple[int, int]] = []
    budget = d
    for i in range(n):
        rest = n - i - 1
        e = 0
        while True:
            count = math.comb(rest + budget - e, rest)
            if rank < count:
                break
            rank -= count
            e += 1
        if e > 0:
            exps.append((i, e))
            budget -= e
    return tuple(exps)


def _unrank_exact(rank: int, n: int, d: int) -> ExpPattern:
    """Rank -> exponent vector of total degree exactly d, lexicographic order."""
    exps: list[tuple[int, int]] = []
    budget = d
    for i in range(n - 1):
        rest = n - i - 1
        e = 0
        while True:
            count = math.comb(rest + budget - e - 1, rest - 1)
            if rank < count:
                break
            rank -= count
            e += 1
        if e > 0:
            exps.append((i, e))
            budget -= e
    if budget > 0:
        exps.append((n - 1, budget))
    return tuple(exps)


def random_poly(spec: InstanceSpec) -> SparsePoly:
    """Draw a seeded random polynomial.

    The candidate pool is every monomial of total degree <= d (subsampled to
    ``POOL_CAP`` distinct monomials when the full pool is larger).  Each
    candidate is retained independently with probability ``spec.sparsity``;
    retained monomials get integer coefficients drawn uniformly from
    ``[coeff_lo, coeff_hi]`` and redrawn while zero.  One monomial of degree
    exactly d is forced in so the generated degree is exactly d.

    Identical specs always produce identical polynomials (PCG64 stream seeded
    by ``spec.seed`` alone).
    """
    spec.validate()
    n, d = spec.n, spec.d
    pool_size = _num_monomials_upto(n, d)
    if pool_size >= 2**62:
        raise ValueError(f"candidate pool of size C({n + d},{d}) is too large to rank")
    rng = derive_rng(spec.seed)

    if pool_size <= POOL_CAP:
        ranks = np.arange(pool_size, dtype=np.int64)
    else:
        chosen: set[int] = set()
        while len(chosen) < POOL_CAP:
            draw = rng.integers(0, pool_size, size=POOL_CAP - len(chosen) + 64, dtype=np.int64)
            chosen.update(int(x) for x in draw)
        ranks = np.array(sorted(chosen)[:POOL_CAP], dtype=np.int64)

    keep = rng.random(len(ranks)) < spec.sparsity
    patterns = [_unrank_upto(int(r), n, d) for r in ranks[keep]]

    if not any(sum(p for _, p in pat) == d for pat in patterns):
        exact_count = math.comb(n + d - 1, n - 1)
        pat = _unrank_exact(int(rng.integers(0, exact_count)), n, d)
        patterns.append(pat)

    patterns = sorted(set(patterns), key=lambda pat: (sum(p for _, p in pat), pat))
    terms = []
    for pat in patterns:
        coef = 0
        while coef == 0:
            coef = int(rng.integers(spec.coeff_lo, spec.coeff_hi + 1))
        terms.append((pat, float(coef)))
    return SparsePoly.from_terms(n, terms)


# -- instance files ------------------------------------------------------------------


def save_instance(
    path: str | Path,
    poly: SparsePoly,
    spec: InstanceSpec | None = None,
    penalty: Mapping[str, float] | None = None,
) -> None:
    """Write the versioned instance JSON (byte-deterministic for fixed inputs)."""
    data = poly.to_dict()
    if spec is not None:
        data["spec"] = spec.to_dict()
    if penalty is not None:
        data["penalty"] = {k: float(penalty[k]) for k in ("epsilon", "c", "r")}
    Path(path).write_text(json.dumps(data, indent=2) + "\n")


def load_instance(path: str | Path) -> tuple[SparsePoly, InstanceSpec | None, dict | None]:
    """Read an instance file; returns (poly, spec echo or None, penalty block or None)."""
    data = json.loads(Path(path).read_text())
    poly = SparsePoly.from_dict(data)
    spec = InstanceSpec.from_dict(data["spec"]) if "spec" in data else None
    penalty = dict(data["penalty"]) if "penalty" in data else None
    return poly, spec, penalty
