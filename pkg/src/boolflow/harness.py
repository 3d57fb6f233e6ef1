"""Experiment driver: seeded grids, multi-start sweeps, run logs and tables.

A run is a pure function of its :class:`ExperimentConfig`: instance seeds
derive from (master_seed, n, d), start points from the instance seed, and
results merge in deterministic task order, so serial and parallel executions
write byte-identical logs.  Wall-clock fields are the one exception and are
zeroed when ``record_timing`` is off (solver time excludes instance
generation and oracle time either way).
"""

from __future__ import annotations

import hashlib
import json
import math
import statistics
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .integrators import MultistartError, SchemeParams, SolveStatus, Trajectory, multistart
from .model import BooleanProblem, PenaltyModel
from .oracle import bound_certificate, errobj, exhaustive_min
from .polynomial import InstanceSpec, SparsePoly, random_poly
from .seeding import derive_rng, derive_seed_sequence

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "run_experiment",
    "parameter_sweep",
    "emit_table",
    "dump_trajectory",
    "write_run_log",
    "read_run_log",
    "instance_seed_for_cell",
    "TABLE_LAYOUTS",
]

# Stream ids hung off the per-cell seed.
_SPARSITY_STREAM = 1

TABLE_LAYOUTS = ("table1", "table3", "table4")

_SCHEME_ORDER = ("houbolt", "lie", "rk45")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full recipe for one experiment sweep."""

    grid: tuple[tuple[int, int], ...]
    schemes: tuple[str, ...] = ("houbolt", "lie", "rk45")
    eps_list: tuple[float, ...] = (1e-4,)
    m: float = 1.0
    gamma: float = 50.0
    c: float = 100.0
    tau0: float | None = None
    tau_mode: str = "fixed"
    theta: float = 0.8
    tau_star: float | None = None
    t_final: float = 1.0
    tol_step: float = 1e-6
    max_iters: int = 100_000
    n_starts: int = 1
    master_seed: int = 0
    coeff_lo: int = -10
    coeff_hi: int = 10
    sparsity: float | None = None  # None -> draw uniformly in [0.5, 1] per cell
    oracle_max_n: int = 12
    keep_trajectories: bool = False
    workers: int = 1  # 0 -> one per CPU
    record_timing: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "grid", tuple((int(n), int(d)) for n, d in self.grid))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        object.__setattr__(self, "eps_list", tuple(float(e) for e in self.eps_list))
        if not self.grid:
            raise ValueError("grid must be non-empty")
        if not self.schemes:
            raise ValueError("schemes must be non-empty")
        if any(e <= 0 for e in self.eps_list):
            raise ValueError("every epsilon must be positive")
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")

    def to_dict(self) -> dict:
        return {
            "grid": [list(cell) for cell in self.grid],
            "schemes": list(self.schemes),
            "eps_list": list(self.eps_list),
            "m": self.m,
            "gamma": self.gamma,
            "c": self.c,
            "tau0": self.tau0,
            "tau_mode": self.tau_mode,
            "theta": self.theta,
            "tau_star": self.tau_star,
            "t_final": self.t_final,
            "tol_step": self.tol_step,
            "max_iters": self.max_iters,
            "n_starts": self.n_starts,
            "master_seed": self.master_seed,
            "coeff_lo": self.coeff_lo,
            "coeff_hi": self.coeff_hi,
            "sparsity": self.sparsity,
            "oracle_max_n": self.oracle_max_n,
            "keep_trajectories": self.keep_trajectories,
            "workers": self.workers,
            "record_timing": self.record_timing,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> ExperimentConfig:
        known = {f for f in cls.__dataclass_fields__}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown config keys: {sorted(extra)}")
        kwargs = dict(data)
        kwargs["grid"] = tuple(tuple(cell) for cell in kwargs["grid"])
        return cls(**kwargs)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> ExperimentConfig:
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass
class RunRecord:
    """One (cell, scheme, epsilon) result row of a sweep."""

    n: int
    d: int
    scheme: str
    epsilon: float
    instance_seed: int
    sparsity: float
    content_hash: str
    n_starts: int
    status: str
    objective: float | None
    pi_value: float | None
    j_eps: float | None
    delta: float | None
    residual: float | None
    iterations: int
    avg_iterations: float
    rejected_steps: int
    start_index: int
    u: list[float]
    rounded: list[int]
    wall_time: float
    total_time: float
    oracle_value: float | None = None
    oracle_count: int | None = None
    errobj: float | None = None
    cert_delta_bar: float | None = None
    cert_simplified: float | None = None
    cert_ok: bool | None = None
    error: str | None = None
    timestamp: str | None = None
    trajectory: Trajectory | None = None  # retained only when configured; not serialized

    def to_dict(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k != "trajectory"}
        for k, v in out.items():
            if isinstance(v, float) and not math.isfinite(v):
                out[k] = None
        return out

    @classmethod
    def from_dict(cls, data: Mapping) -> RunRecord:
        return cls(trajectory=None, **data)


def instance_seed_for_cell(master_seed: int, n: int, d: int) -> int:
    """Stable per-cell seed: adding grid cells never perturbs existing ones."""
    return int(derive_seed_sequence(master_seed, n, d).generate_state(1, dtype=np.uint64)[0])


def _cell_spec(cfg: ExperimentConfig, n: int, d: int) -> InstanceSpec:
    seed = instance_seed_for_cell(cfg.master_seed, n, d)
    if cfg.sparsity is not None:
        sparsity = cfg.sparsity
    else:
        sparsity = 0.5 + 0.5 * float(derive_rng(seed, _SPARSITY_STREAM).random())
    return InstanceSpec(
        n=n, d=d, coeff_lo=cfg.coeff_lo, coeff_hi=cfg.coeff_hi, sparsity=sparsity, seed=seed
    )


@lru_cache(maxsize=64)
def _cached_instance(spec: InstanceSpec) -> SparsePoly:
    return random_poly(spec)


def _content_hash(poly: SparsePoly) -> str:
    blob = json.dumps(poly.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def _scheme_params(cfg: ExperimentConfig) -> SchemeParams:
    return SchemeParams(
        m=cfg.m,
        gamma=cfg.gamma,
        tau0=cfg.tau0,
        theta=cfg.theta,
        tau_star=cfg.tau_star,
        tau_mode=cfg.tau_mode,
        t_final=cfg.t_final,
        tol_step=cfg.tol_step,
        max_iters=cfg.max_iters,
    )


def _run_task(cfg: ExperimentConfig, n: int, d: int, scheme: str, eps: float) -> RunRecord:
    spec = _cell_spec(cfg, n, d)
    pi = _cached_instance(spec)
    problem = BooleanProblem.from_pm1(pi)
    model = PenaltyModel(problem, epsilon=eps, c=cfg.c)
    params = _scheme_params(cfg)

    base = dict(
        n=n,
        d=d,
        scheme=scheme,
        epsilon=eps,
        instance_seed=spec.seed,
        sparsity=spec.sparsity,
        content_hash=_content_hash(pi),
        n_starts=cfg.n_starts,
    )
    try:
        best, reports = multistart(
            scheme, model, params, cfg.n_starts, spec.seed,
            record_trajectory=cfg.keep_trajectories,
        )
    except MultistartError as exc:
        reports = exc.reports
        rec = RunRecord(
            **base,
            status=SolveStatus.DIVERGED.value,
            objective=None,
            pi_value=None,
            j_eps=None,
            delta=None,
            residual=None,
            iterations=max(r.iterations for r in reports),
            avg_iterations=statistics.mean(r.iterations for r in reports),
            rejected_steps=0,
            start_index=-1,
            u=[],
            rounded=[],
            wall_time=0.0,
            total_time=sum(r.wall_time for r in reports) if cfg.record_timing else 0.0,
            error="all starts diverged",
        )
        _stamp(rec, cfg)
        return rec

    rec = RunRecord(
        **base,
        status=best.status.value,
        objective=float(best.objective),
        pi_value=float(best.pi_value),
        j_eps=float(best.j_eps),
        delta=float(best.delta),
        residual=float(best.residual),
        iterations=best.iterations,
        avg_iterations=statistics.mean(r.iterations for r in reports),
        rejected_steps=best.rejected_steps,
        start_index=best.start_index if best.start_index is not None else 0,
        u=[float(x) for x in best.u],
        rounded=[int(x) for x in best.rounded],
        wall_time=best.wall_time if cfg.record_timing else 0.0,
        total_time=sum(r.wall_time for r in reports) if cfg.record_timing else 0.0,
        trajectory=best.trajectory,
    )
    if n <= cfg.oracle_max_n:
        oracle = exhaustive_min(pi)
        rec.oracle_value = float(oracle.value)
        rec.oracle_count = oracle.count
        if rec.status != SolveStatus.DIVERGED.value and rec.u:
            rec.errobj = float(errobj(pi, np.array(rec.u), oracle))
    cert = bound_certificate(model)
    rec.cert_delta_bar = cert.delta_bar
    rec.cert_simplified = cert.simplified_bound
    if rec.delta is not None and math.isfinite(rec.delta):
        rec.cert_ok = rec.delta <= cert.delta_bar
    _stamp(rec, cfg)
    return rec


def _stamp(rec: RunRecord, cfg: ExperimentConfig) -> None:
    if cfg.record_timing:
        rec.timestamp = datetime.now(timezone.utc).isoformat()


def _task_runner(args: tuple) -> RunRecord:
    cfg_dict, n, d, scheme, eps = args
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return _run_task(cfg, n, d, scheme, eps)


def run_experiment(cfg: ExperimentConfig) -> list[RunRecord]:
    """Run the full (cell, scheme, epsilon) grid of ``cfg``.

    Individual failures become records with an ``error`` field; they never
    abort the sweep.  Results are ordered by task construction order
    regardless of worker count.
    """
    tasks = [
        (n, d, scheme, eps)
        for (n, d) in cfg.grid
        for scheme in cfg.schemes
        for eps in cfg.eps_list
    ]
    workers = cfg.workers
    if workers == 0:
        import os

        workers = os.cpu_count() or 1
    if workers <= 1 or len(tasks) <= 1:
        return [_safe_run(cfg, *t) for t in tasks]
    cfg_dict = cfg.to_dict()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_task_runner, [(cfg_dict, *t) for t in tasks]))


def _safe_run(cfg: ExperimentConfig, n: int, d: int, scheme: str, eps: float) -> RunRecord:
    try:
        return _run_task(cfg, n, d, scheme, eps)
    except Exception as exc:  # crash isolation; the record carries the reason
        spec = _cell_spec(cfg, n, d)
        rec = RunRecord(
            n=n, d=d, scheme=scheme, epsilon=eps,
            instance_seed=spec.seed, sparsity=spec.sparsity, content_hash="",
            n_starts=cfg.n_starts, status="Failed",
            objective=None, pi_value=None, j_eps=None, delta=None, residual=None,
            iterations=0, avg_iterations=0.0, rejected_steps=0, start_index=-1,
            u=[], rounded=[], wall_time=0.0, total_time=0.0,
            error=f"{type(exc).__name__}: {exc}",
        )
        _stamp(rec, cfg)
        return rec


def parameter_sweep(
    cfg: ExperimentConfig, axis: str, values: Sequence[float]
) -> tuple[list[RunRecord], dict]:
    """Vary one of {epsilon, gamma, m, c, tau} and collect per-value diagnostics."""
    if axis not in ("epsilon", "gamma", "m", "c", "tau"):
        raise ValueError(f"unknown sweep axis {axis!r}")
    if not values:
        raise ValueError("sweep values must be non-empty")
    all_records: list[RunRecord] = []
    per_value: list[dict] = []
    for v in values:
        if axis == "epsilon":
            sub = replace(cfg, eps_list=(float(v),))
        elif axis == "tau":
            sub = replace(cfg, tau0=float(v))
        else:
            sub = replace(cfg, **{axis: float(v)})
        records = run_experiment(sub)
        all_records.extend(records)
        deltas = [r.delta for r in records if r.delta is not None and math.isfinite(r.delta)]
        iters = [r.iterations for r in records]
        per_value.append(
            {
                "value": float(v),
                "median_delta": statistics.median(deltas) if deltas else None,
                "mean_delta": statistics.mean(deltas) if deltas else None,
                "mean_iterations": statistics.mean(iters) if iters else None,
                "statuses": {
                    s: sum(1 for r in records if r.status == s)
                    for s in sorted({r.status for r in records})
                },
            }
        )
    med = [pv["median_delta"] for pv in per_value]
    summary = {
        "axis": axis,
        "values": [float(v) for v in values],
        "per_value": per_value,
        "median_delta_decreasing": all(
            a is not None and b is not None and b < a for a, b in zip(med, med[1:])
        ),
    }
    return all_records, summary


# -- persistence -----------------------------------------------------------------


def write_run_log(records: Iterable[RunRecord], path: str | Path) -> None:
    """Append-only JSON-lines log, one canonical record per line."""
    lines = [json.dumps(r.to_dict(), sort_keys=True) for r in records]
    Path(path).write_text("\n".join(lines) + "\n")


def read_run_log(path: str | Path) -> list[RunRecord]:
    records = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            records.append(RunRecord.from_dict(json.loads(line)))
    return records


# -- tables ---------------------------------------------------------------------


def _fmt(x: float | int | None) -> str:
    if x is None:
        return ""
    if isinstance(x, float) and not math.isfinite(x):
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def emit_table(records: Sequence[RunRecord], layout: str) -> str:
    """Render records as a CSV summary table.

    ``table1``: per scheme obj/iter/time/delta.  ``table3``: per scheme
    obj/avgiter/tt/delta plus the exhaustive optimum.  ``table4``: per scheme
    errobj.  One row per (n, d) plus a trailing arithmetic-mean row over the
    numeric quality columns (obj columns stay blank in the average row).
    """
    if layout not in TABLE_LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; choose from {TABLE_LAYOUTS}")
    schemes = [s for s in _SCHEME_ORDER if any(r.scheme == s for r in records)]
    if layout == "table1":
        fields = [("obj", "objective"), ("iter", "iterations"), ("time", "wall_time"), ("delta", "delta")]
    elif layout == "table3":
        fields = [("obj", "objective"), ("avgiter", "avg_iterations"), ("tt", "total_time"), ("delta", "delta")]
    else:
        fields = [("errobj", "errobj")]
    avg_fields = {name for name, _ in fields if name != "obj"}

    cells = sorted({(r.n, r.d) for r in records})
    by_key = {}
    for r in records:
        by_key[(r.n, r.d, r.scheme)] = r

    header_cols = ["n", "d"]
    for s in schemes:
        header_cols.extend(f"{s}_{name}" for name, _ in fields)
    if layout == "table3":
        header_cols.append("exhaustive_obj")
    lines = [f"# boolflow table layout={layout} format=1", ",".join(header_cols)]

    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for n, d in cells:
        row = [str(n), str(d)]
        for s in schemes:
            rec = by_key.get((n, d, s))
            if rec is None:
                warnings.warn(f"missing record for cell (n={n}, d={d}, scheme={s})")
                row.extend("" for _ in fields)
                continue
            for name, attr in fields:
                val = getattr(rec, attr)
                row.append(_fmt(val))
                if name in avg_fields and val is not None and math.isfinite(float(val)):
                    col = f"{s}_{name}"
                    sums[col] = sums.get(col, 0.0) + float(val)
                    counts[col] = counts.get(col, 0) + 1
        if layout == "table3":
            oracle_vals = [
                by_key[(n, d, s)].oracle_value
                for s in schemes
                if (n, d, s) in by_key and by_key[(n, d, s)].oracle_value is not None
            ]
            row.append(_fmt(oracle_vals[0]) if oracle_vals else "")
        lines.append(",".join(row))

    avg_row = ["average", ""]
    for s in schemes:
        for name, _ in fields:
            col = f"{s}_{name}"
            if name in avg_fields and counts.get(col):
                avg_row.append(_fmt(sums[col] / counts[col]))
            else:
                avg_row.append("")
    if layout == "table3":
        avg_row.append("")
    lines.append(",".join(avg_row))
    return "\n".join(lines) + "\n"


def dump_trajectory(record: RunRecord, path: str | Path) -> None:
    """Write the retained trajectory of a record as CSV."""
    if record.trajectory is None:
        raise ValueError(
            "trajectory was not retained for this run; "
            "re-run with keep_trajectories=True (CLI: --dump-traj)"
        )
    record.trajectory.to_csv(path)
