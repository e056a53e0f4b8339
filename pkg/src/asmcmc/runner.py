"""Execute configured runs and sweeps, writing traces and summaries."""

from __future__ import annotations

import csv
import itertools
import json
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .adapt import TraceBlock, TraceRecorder, run_am_asm, run_asm
from .analysis.stats import batch_means_se, mann_kendall, stability_report
from .config import RunConfig
from .report import _jsonable
from .rng import ChainStream

JOBS_ENV = "ASMCMC_JOBS"


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def replica_stream(seed: int, replica: int) -> ChainStream:
    """Random stream of replica ``k``: a pure function of (seed, k)."""
    return ChainStream(seed, replica)


class CsvTraceSink:
    """Writes every ``thin``-th record as CSV with round-trip float formatting."""

    def __init__(self, path, dim: int, thin: int = 1):
        self.path = Path(path)
        self.thin = thin
        self.rows = 0
        self._fh = open(self.path, "w", encoding="utf-8", newline="")
        cols = ["n"] + [f"x{i + 1}" for i in range(dim)] + ["s", "theta", "alpha", "accepted", "eta"]
        self._fh.write(",".join(cols) + "\n")

    def __call__(self, block: TraceBlock):
        keep = np.flatnonzero((block.n - 1) % self.thin == 0)
        lines = []
        for i in keep:
            vals = [str(int(block.n[i]))]
            vals += [repr(float(v)) for v in block.x[i]]
            vals += [repr(float(block.s[i])), repr(float(block.theta[i])),
                     repr(float(block.alpha[i])), str(int(block.accepted[i])),
                     repr(float(block.eta[i]))]
            lines.append(",".join(vals))
        if lines:
            self._fh.write("\n".join(lines) + "\n")
        self.rows += len(lines)

    def close(self):
        self._fh.close()


def trace_statistics(trace: TraceBlock, cfg: RunConfig) -> dict:
    """Summary statistics computed from the full (unthinned) trace."""
    S = trace.s
    n = trace.n.astype(float)
    half = len(S) // 2
    tail = S[half:]
    tau, p = mann_kendall(tail)
    funcs = {}
    for fn in cfg.build_functionals():
        vals = np.asarray(fn.f(trace.x), dtype=float)
        funcs[fn.name] = {"average": float(vals.mean()),
                          "se": batch_means_se(vals) if len(vals) >= 4 else None}
    acc = trace.accepted.astype(float)
    return {
        "final_x": trace.x[-1].tolist(),
        "final_s": float(S[-1]),
        "final_theta": float(trace.theta[-1]),
        "acceptance_rate": float(acc.mean()),
        "acceptance_rate_last_half": float(acc[half:].mean()),
        "mean_alpha": float(trace.alpha.mean()),
        "ergodic_averages": funcs,
        "stability": {
            "s_min": float(S.min()),
            "s_max": float(S.max()),
            "s_range_last_half": float(tail.max() - tail.min()),
            "mann_kendall_tau": tau,
            "mann_kendall_p": p,
            "theta_min": float(trace.theta.min()),
            "max_theta_over_n_beta": float(np.max(trace.theta / n ** cfg.beta)),
            "beta": cfg.beta,
        },
    }


def run_replica(cfg: RunConfig, replica: int, write: bool = True) -> dict:
    """Run one replica; returns its summary (also written as JSON)."""
    target = cfg.build_target()
    model = cfg.build_model(target.dim)
    stream = replica_stream(cfg.seed, replica)
    out = Path(cfg.out_dir)
    stem = f"{cfg.prefix}_r{replica}"
    sinks = []
    csv_sink = None
    if write:
        out.mkdir(parents=True, exist_ok=True)
        if cfg.write_trace:
            csv_sink = CsvTraceSink(out / f"{stem}.csv", target.dim, cfg.thin)
            sinks.append(csv_sink)
    rec = TraceRecorder()
    sinks.append(rec)
    extra = {}
    try:
        if cfg.adapt.am_within_asm:
            state, trace = run_am_asm(target, model, cfg.adapt.build_am(), stream)
            for sink in sinks:
                sink(trace)
            extra["learned_shape"] = state.shape.tolist()
        else:
            summary = run_asm(target, model, cfg.adapt.build(), stream, sinks=sinks,
                              restriction=cfg.build_restriction(model))
            extra["max_increment_ratio"] = summary.max_increment_ratio
            extra["stream_position"] = list(summary.stream_position)
    finally:
        if csv_sink is not None:
            csv_sink.close()
    trace = rec.trace()
    result = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "replica": replica,
        "n_steps": cfg.adapt.n_steps,
        "thin": cfg.thin,
        "trace_rows": csv_sink.rows if csv_sink is not None else 0,
        "target": cfg.target.name,
        "dim": target.dim,
        "alpha_star": cfg.adapt.alpha_star,
        "theory_safe": cfg.adapt.alpha_star < 0.5,
    }
    result.update(trace_statistics(trace, cfg))
    result.update(extra)
    result = _jsonable(result)
    if write:
        with open(out / f"{stem}.summary.json", "w", encoding="utf-8") as fh:
            json.dump(result, fh, sort_keys=True, indent=2)
            fh.write("\n")
    result["_s_trace"] = trace.s
    return result


def _run_one(args):
    cfg, k, write = args
    return run_replica(cfg, k, write)


def _map(func, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [func(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(func, items))


def run_config(cfg: RunConfig, jobs: int = 1) -> list[dict]:
    """All replicas of ``cfg``, in replica order."""
    res = _map(_run_one, [(cfg, k, True) for k in range(cfg.replicas)], jobs)
    for r in res:
        r.pop("_s_trace", None)
    return res


def sweep_cells(cfg: RunConfig) -> list[dict]:
    """Cross product of the sweep axes as a list of override maps."""
    if not cfg.sweep:
        return []
    keys = [k for k, _ in cfg.sweep]
    values = [v for _, v in cfg.sweep]
    if any(len(v) == 0 for v in values):
        return []
    return [dict(zip(keys, combo)) for combo in itertools.product(*values)]


def _run_cell(args):
    cfg, idx, overrides = args
    rows = []
    try:
        cell = cfg.with_overrides(overrides)
        cell = cell.__class__(**{**cell.__dict__, "prefix": f"{cfg.prefix}_cell{idx}",
                                 "sweep": ()})
        traces = []
        for k in range(cell.replicas):
            r = run_replica(cell, k, write=True)
            traces.append(r.pop("_s_trace"))
            rows.append({"cell": idx, **overrides, "replica": k, "status": "ok",
                         "acceptance_rate_last_half": r["acceptance_rate_last_half"],
                         "final_theta": r["final_theta"],
                         "s_range_last_half": r["stability"]["s_range_last_half"],
                         "mann_kendall_p": r["stability"]["mann_kendall_p"],
                         "max_theta_over_n_beta": r["stability"]["max_theta_over_n_beta"]})
        stab = None
        if len(traces) >= 8:
            stab = stability_report(traces, beta=cell.beta).to_dict()
            stab["params"]["cell"] = idx
            stab["params"]["overrides"] = overrides
        return rows, stab, None
    except Exception as exc:  # recorded per cell
        rows.append({"cell": idx, **overrides, "replica": "", "status": f"error: {exc}"})
        return rows, None, str(exc)


def run_sweep(cfg: RunConfig, jobs: int = 1) -> tuple[Path | None, int]:
    """Run every sweep cell; returns (combined CSV path, number of failed cells)."""
    cells = sweep_cells(cfg)
    if not cells:
        return None, 0
    results = _map(_run_cell, [(cfg, i, ov) for i, ov in enumerate(cells)], jobs)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{cfg.prefix}_sweep.csv"
    axis = [k for k, _ in cfg.sweep]
    cols = ["cell"] + axis + ["replica", "status", "acceptance_rate_last_half", "final_theta",
                              "s_range_last_half", "mann_kendall_p", "max_theta_over_n_beta"]
    failed = 0
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for rows, _, err in results:
            failed += err is not None
            for row in rows:
                w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    stabs = [s for _, s, _ in results if s is not None]
    if stabs:
        with open(out / f"{cfg.prefix}_sweep_stability.jsonl", "w", encoding="utf-8") as fh:
            for s in stabs:
                fh.write(json.dumps(s, sort_keys=True) + "\n")
    return path, failed
