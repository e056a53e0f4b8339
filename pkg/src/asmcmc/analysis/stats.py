"""Ergodic-average and stability diagnostics for chain traces."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import stats

from ..proposal import ScalingFunction
from ..report import BoundReport


def batch_means_se(values, n_batches: int | None = None) -> float:
    """Standard error of the mean from non-overlapping batch means.

    Defaults to about sqrt(N) batches of equal size; trailing values that do
    not fill a batch are dropped from the variance estimate only.
    """
    v = np.asarray(values, dtype=float)
    n = len(v)
    if n < 4:
        raise ValueError("need at least 4 values for batch means")
    if n_batches is None:
        n_batches = int(math.isqrt(n))
    n_batches = max(2, min(n_batches, n // 2))
    size = n // n_batches
    means = v[: size * n_batches].reshape(n_batches, size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(n_batches))


def mann_kendall(series, n_blocks: int | None = 8) -> tuple[float, float]:
    """Kendall tau of the series against time and its two-sided p-value.

    With ``n_blocks`` set, the test runs on that many consecutive block means.
    Blocks must be long compared with the correlation time of the series, or
    the test rejects far more often than its nominal level.
    """
    y = np.asarray(series, dtype=float)
    if n_blocks is not None and len(y) >= 2 * n_blocks:
        size = len(y) // n_blocks
        y = y[: size * n_blocks].reshape(n_blocks, size).mean(axis=1)
    if len(y) < 3 or np.ptp(y) == 0.0:
        return 0.0, 1.0
    res = stats.kendalltau(np.arange(len(y)), y)
    return float(res.statistic), float(res.pvalue)


@dataclass(frozen=True)
class Functional:
    """A test function with its declared growth class.

    ``growth`` is "bounded" (|f| <= bound) or "subexponential"
    (|f(x)| <= bound * max(1, exp(xi |x|))).
    """

    name: str
    f: Callable[[np.ndarray], np.ndarray]
    growth: str = "bounded"
    bound: float | None = None
    xi: float = 0.0

    def check_growth(self, X: np.ndarray, values: np.ndarray) -> bool:
        if self.bound is None:
            return True
        if self.growth == "bounded":
            return bool(np.all(np.abs(values) <= self.bound))
        r = np.linalg.norm(X.reshape(len(values), -1), axis=1)
        return bool(np.all(np.abs(values) <= self.bound * np.maximum(1.0, np.exp(self.xi * r))))


def slln_report(trace_x, functionals: Sequence[Functional], truths: Mapping[str, float],
                z_tol: float = 4.0, n_batches: int | None = None) -> BoundReport:
    """Ergodic averages against known integrals.

    For each functional: average, batch-means SE and z-score; passes when
    every |z| <= ``z_tol``.
    """
    X = np.asarray(trace_x, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    names, zs, fitted, notes = [], [], {}, []
    for fn in functionals:
        vals = np.asarray(fn.f(X), dtype=float)
        if not fn.check_growth(X, vals):
            msg = f"{fn.name} exceeds its declared {fn.growth} growth bound on the trace"
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)
        avg = float(vals.mean())
        se = batch_means_se(vals, n_batches)
        diff = avg - float(truths[fn.name])
        if se > 0.0:
            z = diff / se
        else:
            z = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        names.append(fn.name)
        zs.append(z)
        fitted[fn.name] = {"average": avg, "se": se, "truth": float(truths[fn.name]), "z": z}
    return BoundReport(
        name="slln",
        quantity="(average - truth) / batch-means SE",
        grid=names,
        values=zs,
        threshold=z_tol,
        passed=all(abs(z) <= z_tol for z in zs),
        fitted=fitted,
        params={"n": len(X), "n_batches": n_batches or int(math.isqrt(len(X)))},
        notes=notes,
    )


def stability_report(traces: Sequence[np.ndarray], beta: float = 0.1,
                     scaling: ScalingFunction | None = None, band: float | None = None,
                     mk_level: float = 0.01, mk_blocks: int = 8,
                     min_pass_fraction: float = 31 / 32, growth_cap: float | None = None,
                     restriction_bounds: tuple[float, float] | None = None,
                     theta_floor: float | None = None, growth_ratio_cap: float | None = None,
                     min_traces: int = 8) -> BoundReport:
    """Per-seed stability statistics of scale-parameter traces.

    ``traces`` are s-trajectories S_2, S_3, ... (index 0 is n = 2).  Reported
    per seed: min/max of s, range over the last half, Mann-Kendall p-value on
    the last half, min phi(S_n) and max phi(S_n) / n**beta.  The aggregate
    passes when every last-half range is within ``band`` (if given), at
    least ``min_pass_fraction`` of seeds show no significant drift, every
    max phi / n**beta is below ``growth_cap``, every min phi is above
    ``theta_floor``, no second-half maximum of phi exceeds ``growth_ratio_cap``
    times the first-half maximum, and every trace stays inside
    ``restriction_bounds`` (each only if given).
    """
    if len(traces) < min_traces:
        raise ValueError(f"need at least {min_traces} independent traces")
    scaling = scaling or ScalingFunction()
    rows = []
    for S in traces:
        S = np.asarray(S, dtype=float)
        n = np.arange(2, len(S) + 2, dtype=float)
        tail = S[len(S) // 2:]
        theta = scaling.evaluate(S)
        tau, p = mann_kendall(tail, mk_blocks)
        half = len(S) // 2
        rows.append({
            "s_min": float(S.min()), "s_max": float(S.max()),
            "range_last_half": float(tail.max() - tail.min()),
            "mk_tau": tau, "mk_p": p,
            "theta_min": float(theta.min()),
            "max_theta_over_n_beta": float(np.max(theta / n ** beta)),
            "growth_ratio": float(theta[half:].max() / theta[:half].max()) if half else 1.0,
        })
    k = len(rows)
    mk_ok = sum(r["mk_p"] >= mk_level for r in rows)
    need = math.ceil(min_pass_fraction * k - 1e-12)
    checks = {"mk": mk_ok >= need}
    if band is not None:
        checks["band"] = all(r["range_last_half"] <= band for r in rows)
    if growth_cap is not None:
        checks["growth_cap"] = all(r["max_theta_over_n_beta"] <= growth_cap for r in rows)
    if theta_floor is not None:
        checks["theta_floor"] = all(r["theta_min"] >= theta_floor for r in rows)
    if growth_ratio_cap is not None:
        checks["growth_ratio"] = all(r["growth_ratio"] <= growth_ratio_cap for r in rows)
    if restriction_bounds is not None:
        a1, a2 = restriction_bounds
        checks["restriction"] = all(a1 <= r["s_min"] and r["s_max"] <= a2 for r in rows)
    return BoundReport(
        name="stability",
        quantity="per-seed s statistics",
        grid=list(range(k)),
        values=rows,
        threshold={"band": band, "mk_level": mk_level, "growth_cap": growth_cap,
                   "theta_floor": theta_floor, "growth_ratio_cap": growth_ratio_cap},
        passed=all(checks.values()),
        fitted={"mk_non_significant": mk_ok, "mk_required": need,
                "max_range": max(r["range_last_half"] for r in rows),
                "min_theta": min(r["theta_min"] for r in rows),
                "max_theta_over_n_beta": max(r["max_theta_over_n_beta"] for r in rows),
                "max_growth_ratio": max(r["growth_ratio"] for r in rows),
                "checks": checks},
        params={"beta": beta, "n_traces": k, "mk_blocks": mk_blocks},
    )
