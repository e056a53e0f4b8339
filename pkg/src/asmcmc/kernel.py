"""Fixed-scale symmetric Metropolis kernel.

Acceptance probability, single transitions, fixed-scale chains, and the
expected acceptance rate ``acc(x, s)`` (Monte Carlo and deterministic
quadrature) together with its average ``acc(s)`` under the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import _core
from .errors import ConfigError, InvalidStateError, UnsupportedDimensionError
from .proposal import ProposalModel
from .rng import ChainStream
from .targets import TargetDensity


@dataclass
class StepOutcome:
    y: np.ndarray
    alpha: float
    accepted: bool
    next_x: np.ndarray


def _log_density_checked(target: TargetDensity, x) -> float:
    lx = target.log_density(x)
    if not math.isfinite(lx):
        raise InvalidStateError("current state lies outside the target support")
    return lx


def _alpha(lx: float, ly: float) -> float:
    v = ly - lx
    return math.exp(v if v < 0.0 else 0.0)


def acceptance_prob(target: TargetDensity, x, y) -> float:
    """min{1, pi(y)/pi(x)} evaluated in the log domain; 0 outside the support."""
    lx = _log_density_checked(target, x)
    return _alpha(lx, target.log_density(y))


def step_from_increment(target: TargetDensity, x: np.ndarray, lx: float, theta: float,
                        w: np.ndarray, u: float) -> tuple[StepOutcome, float]:
    """One transition given a unit-scale increment ``w`` and uniform ``u``.

    Returns the outcome and the log-density at the next state.
    """
    y = x + theta * w
    ly = target.log_density(y)
    a = _alpha(lx, ly)
    accepted = u <= a
    if accepted:
        return StepOutcome(y, a, True, y), ly
    return StepOutcome(y, a, False, x), lx


def metropolis_step(target: TargetDensity, model: ProposalModel, s: float, x,
                    rng: ChainStream) -> StepOutcome:
    """Propose y = x + phi(s) Sigma u and accept with probability alpha(x, y).

    Consumes one increment and then one uniform from ``rng``.
    """
    x = target._check_point(x)
    lx = _log_density_checked(target, x)
    w = model.unit_increments(rng, 1)[0]
    u = float(rng.uniforms(1)[0])
    out, _ = step_from_increment(target, x, lx, model.phi(s), w, u)
    return out


def advance(target: TargetDensity, model: ProposalModel, x, s: float, W: np.ndarray,
            U: np.ndarray, eta: np.ndarray | None = None, alpha_star: float = 0.0,
            binary: bool = False, lo: np.ndarray | None = None, hi: np.ndarray | None = None,
            backend: str | None = None):
    """Run the chain kernel over a block of pre-drawn randomness.

    With ``eta`` None the scale stays fixed.  Returns the final state and
    per-step arrays ``(x, s, X, S, A, ACC)``.
    """
    n, d = W.shape
    x = np.array(x, dtype=float)
    if x.shape != (d,):
        raise ValueError("state and increments disagree in dimension")
    _log_density_checked(target, x)
    adapt = eta is not None
    eta_arr = np.ascontiguousarray(eta if adapt else np.zeros(0), dtype=float)
    X = np.empty((n, d))
    S = np.empty(n)
    A = np.empty(n)
    ACC = np.empty(n, dtype=np.int8)
    if target.kernel_code is None:
        kern = _core.python_backend
        params = np.zeros(1)
        log_density = target.log_density
    else:
        kern = _core.get_backend(backend)
        params = np.ascontiguousarray(target.kernel_params, dtype=float)
        log_density = None
    if lo is not None:
        lo = np.ascontiguousarray(lo, dtype=float)
        hi = np.ascontiguousarray(hi, dtype=float)
    s = kern.run_chain(target.kernel_code if target.kernel_code is not None else -1, params, x,
                       float(s), np.ascontiguousarray(W, dtype=float),
                       np.ascontiguousarray(U, dtype=float), eta_arr, float(alpha_star),
                       adapt, bool(binary), lo, hi, model.scaling.kernel_code,
                       float(model.scaling.power), X, S, A, ACC, log_density=log_density)
    return x, float(s), X, S, A, ACC


@dataclass
class FixedScaleChain:
    x: np.ndarray        # (n, d) states X_2..X_{n+1}
    alpha: np.ndarray    # acceptance probabilities
    accepted: np.ndarray


def run_fixed_scale(target: TargetDensity, model: ProposalModel, s: float, x0, n_steps: int,
                    rng: ChainStream, block: int = 1 << 16) -> FixedScaleChain:
    """Plain random-walk Metropolis at fixed scale parameter ``s``."""
    x = np.array(x0, dtype=float)
    xs, al, ac = [], [], []
    done = 0
    while done < n_steps:
        k = min(block, n_steps - done)
        W = model.unit_increments(rng, k)
        U = rng.uniforms(k)
        x, _, X, _, A, ACC = advance(target, model, x, s, W, U)
        xs.append(X)
        al.append(A)
        ac.append(ACC)
        done += k
    return FixedScaleChain(np.concatenate(xs), np.concatenate(al), np.concatenate(ac).astype(bool))


def expected_acc_at(target: TargetDensity, model: ProposalModel, x, s: float, n_mc: int,
                    rng) -> tuple[float, float]:
    """Monte Carlo estimate of acc(x, s) and its standard error."""
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    rng = np.random.default_rng(rng)
    x = target._check_point(x)
    lx = _log_density_checked(target, x)
    alphas = _alpha_batch(target, model, x[None, :], np.array([lx]), s, n_mc, rng)[0]
    se = float(alphas.std(ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else float("nan")
    return float(alphas.mean()), se


def _template_draws(model: ProposalModel, shape: tuple, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal(shape + (model.dim,))
    if model.profile.kind == "student":
        g = g / np.sqrt(rng.chisquare(2.0 * model.profile.gamma, size=shape))[..., None]
    return g @ model.shape.matrix.T


def _alpha_batch(target, model, X, LX, s, n_inner, rng) -> np.ndarray:
    theta = float(model.scaling.evaluate(s))
    Z = theta * _template_draws(model, (X.shape[0], n_inner), rng)
    Y = X[:, None, :] + Z
    LY = target.log_density_batch(Y.reshape(-1, model.dim)).reshape(X.shape[0], n_inner)
    with np.errstate(invalid="ignore"):
        return np.exp(np.minimum(0.0, LY - LX[:, None]))


def ray_quadrature(target: TargetDensity, model: ProposalModel, x, s: float,
                   integrand: Callable[[float, float], float], epsabs: float = 1e-10):
    """int g(log pi(x), log pi(x + z)) q_s(z) dz for d <= 2, with an error estimate.

    Integrates along rays from ``x``: the increment is ``phi(s) Sigma r w``
    with ``w`` uniform on the unit sphere and ``r`` following the radial law
    of the profile.  Each ray is split at the target's support crossings and
    at the level set of pi(x), where acceptance-type integrands are not smooth.
    """
    d = target.dim
    if d > 2:
        raise UnsupportedDimensionError("ray quadrature is limited to d <= 2")
    x = target._check_point(x)
    lx = _log_density_checked(target, x)
    theta = float(model.scaling.evaluate(s))
    prof = model.profile
    sigma = model.shape.matrix

    def ray(w: np.ndarray) -> tuple[float, float]:
        v = theta * (sigma @ w)
        breaks = sorted(t for t in target.ray_breaks(x, v) if t > 0.0)

        def f(r):
            return integrand(lx, target.log_density(x + r * v)) * float(prof.radial_pdf(r))

        edges = [0.0] + breaks + [math.inf]
        val = err = 0.0
        for a, b in zip(edges, edges[1:]):
            if b <= a:
                continue
            p, e = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-10, limit=200)
            val += p
            err += e
        return val, err

    if d == 1:
        v1, e1 = ray(np.array([1.0]))
        v2, e2 = ray(np.array([-1.0]))
        return 0.5 * (v1 + v2), 0.5 * (e1 + e2)
    inner_err = [0.0]

    def g(psi):
        v, e = ray(np.array([math.cos(psi), math.sin(psi)]))
        inner_err[0] = max(inner_err[0], e)
        return v

    val, err = integrate.quad(g, 0.0, 2.0 * math.pi, epsabs=epsabs * 2 * math.pi,
                              epsrel=1e-10, limit=200)
    return val / (2.0 * math.pi), err / (2.0 * math.pi) + inner_err[0]


def expected_acc_quadrature(target: TargetDensity, model: ProposalModel, x, s: float,
                            epsabs: float = 1e-10, return_error: bool = False):
    """Deterministic acc(x, s) for d <= 2 (see :func:`ray_quadrature`)."""
    if target.dim > 2:
        raise UnsupportedDimensionError("quadrature of acc(x, s) is limited to d <= 2")
    val, err = ray_quadrature(target, model, x, s, _alpha, epsabs)
    val = min(1.0, max(0.0, val))
    return (val, err) if return_error else val


def mean_acc(target: TargetDensity, model: ProposalModel, s: float, n_outer: int, n_inner: int,
             rng, pi_sampler: Callable | None = None) -> tuple[float, float]:
    """Nested Monte Carlo estimate of acc(s) = int acc(x, s) pi(dx).

    States are drawn from ``pi_sampler(n, rng)`` if given, otherwise from the
    target's direct sampler.  The standard error is that of the mean of the
    per-state inner averages, which accounts for both levels of sampling.
    """
    rng = np.random.default_rng(rng)
    if pi_sampler is None:
        if not target.has_sampler:
            raise ConfigError(f"target {target.name!r} has no direct sampler; pass pi_sampler")
        pi_sampler = target.sample
    X = np.asarray(pi_sampler(n_outer, rng), dtype=float).reshape(n_outer, target.dim)
    LX = target.log_density_batch(X)
    inner = np.empty(n_outer)
    chunk = max(1, 200_000 // max(1, n_inner))
    for i in range(0, n_outer, chunk):
        inner[i:i + chunk] = _alpha_batch(target, model, X[i:i + chunk], LX[i:i + chunk],
                                          s, n_inner, rng).mean(axis=1)
    se = float(inner.std(ddof=1) / math.sqrt(n_outer)) if n_outer > 1 else float("nan")
    return float(inner.mean()), se


def pilot_chain_sampler(target: TargetDensity, model: ProposalModel, s: float, x0,
                        burn_in: int = 10_000, thin: int = 10, seed: int = 0) -> Callable:
    """A stationary-law sampler built from a burned-in fixed-scale chain."""

    def sampler(n, rng=None):
        chain = run_fixed_scale(target, model, s, x0, burn_in + n * thin, ChainStream(seed))
        return chain.x[burn_in::thin][:n]

    return sampler


def mean_acc_quadrature(target: TargetDensity, model: ProposalModel, s: float,
                        epsabs: float = 1e-9) -> float:
    """acc(s) by nested adaptive quadrature (one-dimensional targets only)."""
    if target.dim != 1:
        raise UnsupportedDimensionError("quadrature of acc(s) is implemented for d = 1")
    lo, hi = target.bounding_box()
    lo, hi = float(lo[0]), float(hi[0])

    def f(x):
        lp = target.log_density(np.array([x]))
        if not math.isfinite(lp):
            return 0.0
        return math.exp(lp) * expected_acc_quadrature(target, model, np.array([x]), s,
                                                      epsabs=epsabs * 1e-1)

    pts = []
    if target.symmetric_about is not None and lo < float(target.symmetric_about[0]) < hi:
        pts = [float(target.symmetric_about[0])]
    val, _ = integrate.quad(f, lo, hi, points=pts or None, epsabs=epsabs, epsrel=1e-10, limit=200)
    return val


def log_offdiag_density(target: TargetDensity, model: ProposalModel, s: float, x, y) -> float:
    """log of pi(x) alpha(x, y) q_s(y - x), the off-diagonal kernel density times pi(x)."""
    lx = target.log_density(x)
    ly = target.log_density(y)
    v = ly - lx
    return lx + (v if v < 0.0 else 0.0) + model.log_density(s, np.asarray(y) - np.asarray(x))
