"""Drift, minorisation and proposal-continuity checks for fixed-scale kernels."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from ..errors import NumericalError, UnsupportedTargetError
from ..kernel import _template_draws, ray_quadrature
from ..proposal import ProposalModel
from ..report import BoundReport
from ..targets import SupportKind, TargetDensity


@dataclass(frozen=True)
class DriftFunction:
    """V(x) = c_V pi(x)^(-1/2) with c_V = sup pi^(1/2), so V >= 1."""

    target: TargetDensity

    @property
    def log_c(self) -> float:
        return 0.5 * self.target.log_sup_density

    def log_value(self, x) -> float:
        return self.log_c - 0.5 * self.target.log_density(x)

    def log_value_batch(self, X) -> np.ndarray:
        return self.log_c - 0.5 * self.target.log_density_batch(X)

    def __call__(self, x) -> float:
        return math.exp(self.log_value(x))


def _drift_integrand(lx: float, ly: float) -> float:
    # V(y)/V(x) alpha(x, y) + 1 - alpha(x, y) - 1, with Delta = log pi(y) - log pi(x)
    v = ly - lx
    if v == -math.inf:
        return 0.0
    return math.exp(-0.5 * abs(v)) - math.exp(min(v, 0.0))


def drift_ratio(target: TargetDensity, model: ProposalModel, x, s: float, method: str = "auto",
                n_mc: int = 100_000, rng=None) -> tuple[float, float]:
    """P_s V(x) / V(x) and an error estimate (quadrature error or MC SE).

    Uses ``1 + int q_s(z) (exp(-|D|/2) - min(1, exp(D))) dz`` with
    ``D = log pi(x + z) - log pi(x)``; the integrand lies in [-1, 1] so the
    ratio stays finite however small pi(x) is.
    """
    if method == "auto":
        method = "quadrature" if target.dim <= 2 else "mc"
    x = target._check_point(x)
    if method == "quadrature":
        val, err = ray_quadrature(target, model, x, s, _drift_integrand, epsabs=1e-11)
        r = 1.0 + val
    else:
        rng = np.random.default_rng(rng)
        lx = target.log_density(x)
        Z = float(model.scaling.evaluate(s)) * _template_draws(model, (n_mc,), rng)
        D = target.log_density_batch(x[None, :] + Z) - lx
        with np.errstate(invalid="ignore"):
            g = np.where(np.isneginf(D), 0.0, np.exp(-0.5 * np.abs(D)) - np.exp(np.minimum(D, 0.0)))
        r = 1.0 + float(g.mean())
        err = float(g.std(ddof=1) / math.sqrt(n_mc))
    if not math.isfinite(r):
        raise NumericalError(f"drift ratio is not finite at x = {x!r}")
    return r, err


def estimate_drift(target: TargetDensity, model: ProposalModel, s: float, x_grid,
                   n_mc: int = 100_000, rng=None, theta1: float | None = None,
                   method: str = "auto", n_se: float = 3.0) -> BoundReport:
    """Drift condition P_s V <= lambda_s V + b 1_C on a grid of states.

    The compact set C is the ball of the smallest grid radius R such that
    the ratio stays below one for every grid point with |x| >= R.  Reported
    constants: lambda_s (largest ratio outside C), b (largest
    P_s V(x) - V(x) inside C) and R.
    """
    if target.support_kind is not SupportKind.SUPER_EXPONENTIAL:
        raise UnsupportedTargetError("the drift check targets unbounded supports")
    theta = model.phi(s)
    xs = [np.atleast_1d(np.asarray(x, dtype=float)) for x in x_grid]
    norms = [float(np.linalg.norm(x - (target.symmetric_about if target.symmetric_about is not None
                                       else 0.0))) for x in xs]
    params = {"target": target.name, "s": s, "theta": theta, "method": method}
    if theta1 is not None and theta < theta1:
        return BoundReport(name="drift", quantity="P_s V(x) / V(x)", grid=norms, values=[],
                           threshold=1.0, passed=True, gated=False, params=params,
                           notes=[f"skipped: theta = {theta:.4g} is below theta1 = {theta1:.4g}"])
    V = DriftFunction(target)
    rng = np.random.default_rng(rng)
    ratios, errs, logv = [], [], []
    for x in xs:
        r, e = drift_ratio(target, model, x, s, method, n_mc, rng)
        ratios.append(r)
        errs.append(e)
        logv.append(V.log_value(x))
    tol = [n_se * e if method != "quadrature" else 0.0 for e in errs]
    order = np.argsort(norms)
    radius = None
    for i in range(len(order)):
        if all(ratios[j] + tol[j] < 1.0 for j in order[i:]):
            radius = norms[order[i]]
            break
    outside = [ratios[j] for j in range(len(xs)) if radius is not None and norms[j] >= radius]
    inside = [j for j in range(len(xs)) if radius is None or norms[j] < radius]
    lam = max(outside) if outside else None
    b = 0.0
    for j in inside:
        b = max(b, (ratios[j] - 1.0) * math.exp(logv[j]))
    passed = radius is not None and math.isfinite(b) and lam is not None and lam < 1.0
    return BoundReport(
        name="drift",
        quantity="P_s V(x) / V(x)",
        grid=norms,
        values=ratios,
        threshold=1.0,
        passed=bool(passed),
        fitted={"lambda_s": lam, "b": b, "C_radius": radius, "errors": errs, "log_V": logv},
        params=params,
    )


def _radial_l1(model: ProposalModel, t1: float, t2: float) -> float:
    """int |p(r/t1)/t1 - p(r/t2)/t2| dr for the radial law p of the template."""
    if t1 == t2:
        return 0.0
    pdf = model.profile.radial_pdf

    def diff(r):
        return float(pdf(r / t1)) / t1 - float(pdf(r / t2)) / t2

    hi = max(t1, t2)
    rs = np.concatenate([np.linspace(0.0, 10.0 * hi, 4001)[1:], np.geomspace(10.0 * hi, 1e4 * hi, 400)])
    vals = pdf(rs / t1) / t1 - pdf(rs / t2) / t2
    edges = [0.0]
    for i in np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0):
        edges.append(optimize.brentq(diff, rs[i], rs[i + 1], xtol=1e-14))
    edges.append(math.inf)
    total = 0.0
    for a, b in zip(edges, edges[1:]):
        v, _ = integrate.quad(diff, a, b, epsabs=1e-13, epsrel=1e-11, limit=200)
        total += abs(v)
    return total


def proposal_tv_lipschitz(model: ProposalModel, s_pairs, halvings: int = 3,
                          rel_tol: float = 0.2) -> BoundReport:
    """L1 distance between q_s and q_s' against the scale-matrix difference.

    Both proposals are phi(.) Sigma times the same template, so their L1
    distance equals that of the radial laws, which is integrated exactly.
    For every pair the ratio L1 / ||Delta||_F is recomputed with the
    difference halved ``halvings`` times; the check passes when each pair's
    ratios stay within ``rel_tol`` of the finest one and equal pairs give 0.
    """
    fro = model.shape.frobenius
    d = model.dim
    rows, stable = [], []
    c1 = 0.0
    for s, s2 in s_pairs:
        t1 = model.phi(s)
        if s == s2:
            tv = _radial_l1(model, t1, t1)
            rows.append({"s": s, "s2": s2, "l1": tv, "ratios": []})
            stable.append(tv == 0.0)
            continue
        ratios = []
        for k in range(halvings + 1):
            sk = s + (s2 - s) / 2 ** k
            t2 = model.phi(sk)
            delta = abs(t2 - t1) * fro
            tv = _radial_l1(model, t1, t2)
            ratios.append(tv / delta)
            c1 = max(c1, tv / delta / (max(t1, t2) * fro) ** (d + 1))
        rows.append({"s": s, "s2": s2, "l1": _radial_l1(model, t1, model.phi(s2)), "ratios": ratios})
        ref = ratios[-1]
        stable.append(all(abs(r - ref) <= rel_tol * ref for r in ratios))
    return BoundReport(
        name="tv_lipschitz",
        quantity="L1(q_s, q_s') / ||phi(s) Sigma - phi(s') Sigma||_F",
        grid=[[float(a), float(b)] for a, b in s_pairs],
        values=rows,
        threshold=rel_tol,
        passed=all(stable),
        fitted={"c1": c1},
        params={"profile": model.profile.kind, "gamma": model.profile.gamma, "dim": d,
                "halvings": halvings},
    )


def overlap_report(target: TargetDensity, model: ProposalModel, s_values, c_radius: float,
                   n_x: int = 41, n_y: int = 4001) -> BoundReport:
    """Minorisation overlap for d = 1 (informational, not gated).

    delta_s = int min_{x in C} alpha(x, y) q_s(y - x) dy over C = [-R, R]
    around the centre, by a grid minimum and trapezoidal integration.  The
    exponent of delta_s against theta is fitted in log-log scale.
    """
    if target.dim != 1:
        raise UnsupportedTargetError("the overlap report is one-dimensional")
    c = float(target.symmetric_about[0]) if target.symmetric_about is not None else 0.0
    xs = np.linspace(c - c_radius, c + c_radius, n_x)
    lx = target.log_density_batch(xs[:, None])
    deltas, thetas = [], []
    for s in s_values:
        theta = model.phi(s)
        span = c_radius + 12.0 * theta
        ys = np.linspace(c - span, c + span, n_y)
        ly = target.log_density_batch(ys[:, None])
        with np.errstate(invalid="ignore"):
            a = np.exp(np.minimum(0.0, ly[None, :] - lx[:, None]))
        q = np.exp(model.log_density_batch(s, (ys[None, :] - xs[:, None]).reshape(-1, 1)))
        dens = (a * q.reshape(a.shape)).min(axis=0)
        deltas.append(float(integrate.trapezoid(dens, ys)))
        thetas.append(theta)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pos = [(t, dl) for t, dl in zip(thetas, deltas) if dl > 0]
        slope = (float(np.polyfit(np.log([p[0] for p in pos]), np.log([p[1] for p in pos]), 1)[0])
                 if len(pos) >= 2 else None)
    return BoundReport(
        name="overlap",
        quantity="delta_s",
        grid=thetas,
        values=deltas,
        threshold=0.0,
        passed=all(dl > 0 for dl in deltas),
        fitted={"log_log_slope": slope},
        params={"target": target.name, "C_radius": c_radius},
        gated=False,
    )
