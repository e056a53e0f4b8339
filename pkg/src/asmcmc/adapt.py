"""Adaptive scaling recursion.

The chain proposes ``Y_{n+1} = X_n + phi(S_n) Sigma U``, accepts with
probability ``alpha_{n+1}`` and then moves the scale parameter by
``S_{n+1} = S_n + eta_{n+1} (alpha_{n+1} - alpha*)``.  This module holds the
gain schedules, the plain and truncated recursions, the coupling of the two,
and a variant that also learns the proposal shape from the chain history.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, CouplingError, InvariantViolation, NumericalError, SinkError
from .kernel import StepOutcome, _log_density_checked, advance, step_from_increment
from .proposal import ProposalModel, ScalingFunction, apply_matrix_rows
from .rng import ChainStream
from .targets import TargetDensity


# ---------------------------------------------------------------------------
# gain schedules

@dataclass(frozen=True)
class StepSchedule:
    """Gains eta_n = c * n**(-gamma) for n >= 2.

    gamma must lie in (1/2, 1], which makes the gains sum to infinity while
    their squares stay summable.  ``permissive=True`` accepts any
    square-summable power (gamma > 1/2); such schedules are flagged with
    ``in_theorem_range = False``.
    """

    c: float = 1.0
    gamma: float = 0.66
    permissive: bool = False

    def __post_init__(self):
        if not (self.c > 0.0 and math.isfinite(self.c)):
            raise ConfigError("schedule constant c must be positive and finite")
        if not self.gamma > 0.5:
            raise ConfigError("gamma must exceed 1/2 for square-summable gains")
        if self.gamma > 1.0 and not self.permissive:
            raise ConfigError("gamma must lie in (1/2, 1]; pass permissive=True to go beyond")

    @property
    def in_theorem_range(self) -> bool:
        return 0.5 < self.gamma <= 1.0

    def etas(self, start: int, count: int) -> np.ndarray:
        """eta_n for n = start, ..., start + count - 1."""
        if start < 1:
            raise ValueError("gain index must be >= 1")
        n = np.arange(start, start + count, dtype=float)
        return self.c * n ** (-self.gamma)

    def eta(self, n: int) -> float:
        return float(self.etas(n, 1)[0])

    def sum_squares_bound(self) -> float:
        """c^2 (zeta(2 gamma) - 1), an upper bound for sum_{n>=2} eta_n^2."""
        from scipy.special import zeta

        return self.c ** 2 * (float(zeta(2.0 * self.gamma)) - 1.0)

    def sum_lower_bound(self, n_max: int) -> float:
        """Integral lower bound for sum_{n=2}^{n_max} eta_n."""
        a, b = 2.0, float(n_max) + 1.0
        if self.gamma == 1.0:
            return self.c * math.log(b / a)
        e = 1.0 - self.gamma
        return self.c * (b ** e - a ** e) / e


# ---------------------------------------------------------------------------
# configuration and state

def default_initial_s(scaling: ScalingFunction, dim: int) -> float:
    """Starting parameter with phi(s) = 2.38 / sqrt(d), a common heuristic."""
    return float(scaling.inverse(2.38 / math.sqrt(dim)))


@dataclass
class AdaptConfig:
    alpha_star: float = 0.234
    schedule: StepSchedule = field(default_factory=StepSchedule)
    x0: np.ndarray | None = None
    s0: float | None = None
    n_steps: int = 1000
    binary: bool = False  # adapt on the accept indicator instead of alpha

    def __post_init__(self):
        if not 0.0 < self.alpha_star < 1.0:
            raise ConfigError("alpha_star must lie in (0, 1)")
        if self.n_steps < 1:
            raise ConfigError("n_steps must be >= 1")
        if self.x0 is not None:
            self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if not self.theory_safe:
            warnings.warn(f"alpha_star = {self.alpha_star} >= 1/2 is outside the range covered "
                          "by the stability results", stacklevel=2)

    @property
    def theory_safe(self) -> bool:
        return self.alpha_star < 0.5

    def initial_state(self, target: TargetDensity, model: ProposalModel) -> "AdaptState":
        x = np.zeros(target.dim) if self.x0 is None else self.x0.copy()
        if not math.isfinite(target.log_density(x)):
            try:
                x = np.array(target.mode, dtype=float)
            except Exception:
                raise ConfigError("initial state lies outside the target support") from None
        s = default_initial_s(model.scaling, target.dim) if self.s0 is None else float(self.s0)
        return AdaptState(x, s, 1)


@dataclass
class AdaptState:
    x: np.ndarray
    s: float
    n: int = 1

    def __post_init__(self):
        self.x = np.atleast_1d(np.asarray(self.x, dtype=float))
        if not math.isfinite(self.s):
            raise ValueError("adaptation parameter must be finite")
        if self.n < 1:
            raise ValueError("step index must be >= 1")


def _h(outcome: StepOutcome, alpha_star: float, binary: bool) -> float:
    if binary:
        return (1.0 if outcome.accepted else 0.0) - alpha_star
    return outcome.alpha - alpha_star


def asm_step(target: TargetDensity, model: ProposalModel, state: AdaptState, config: AdaptConfig,
             rng: ChainStream) -> tuple[AdaptState, StepOutcome]:
    """One Metropolis move at scale phi(s_n) followed by the scale update."""
    x = target._check_point(state.x)
    lx = _log_density_checked(target, x)
    w = model.unit_increments(rng, 1)[0]
    u = float(rng.uniforms(1)[0])
    out, _ = step_from_increment(target, x, lx, model.phi(state.s), w, u)
    eta = config.schedule.eta(state.n + 1)
    s = state.s + eta * _h(out, config.alpha_star, config.binary)
    return AdaptState(out.next_x, s, state.n + 1), out


# ---------------------------------------------------------------------------
# restriction sets

class RestrictionSchedule:
    """Nested intervals K_n = [a1, a2(n)] with a2 non-decreasing."""

    a1: float

    def upper(self, n: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def bounds(self, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
        """(lower, upper) of K_n for n = start, ..., start + count - 1."""
        n = np.arange(start, start + count)
        hi = np.asarray(self.upper(n), dtype=float)
        return np.full(count, float(self.a1)), hi

    def contains(self, n: int, s: float) -> bool:
        lo, hi = self.bounds(n, 1)
        return bool(lo[0] <= s <= hi[0])

    def to_spec(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Fixed(RestrictionSchedule):
    a1: float
    a2: float

    def __post_init__(self):
        if not self.a1 <= self.a2:
            raise ConfigError("restriction interval must satisfy a1 <= a2")

    def upper(self, n):
        return np.full(np.shape(n), float(self.a2))

    def to_spec(self) -> str:
        return f"fixed({self.a1!r}, {self.a2!r})"


@dataclass(frozen=True)
class PolyGrowth(RestrictionSchedule):
    """K_n = [phi^-1(theta1), phi^-1(theta2 * n**beta)]."""

    theta1: float
    theta2: float
    beta: float
    scaling: ScalingFunction = field(default_factory=ScalingFunction)

    def __post_init__(self):
        if not (0.0 < self.theta1 <= self.theta2) or self.beta < 0.0:
            raise ConfigError("poly restriction needs 0 < theta1 <= theta2 and beta >= 0")

    @property
    def a1(self) -> float:
        return float(self.scaling.inverse(self.theta1))

    def upper(self, n):
        return self.scaling.inverse(self.theta2 * np.asarray(n, dtype=float) ** self.beta)

    def to_spec(self) -> str:
        return f"poly({self.theta1!r}, {self.theta2!r}, {self.beta!r})"


def truncated_step(target: TargetDensity, model: ProposalModel, state: AdaptState,
                   config: AdaptConfig, rng: ChainStream,
                   restriction: RestrictionSchedule) -> tuple[AdaptState, StepOutcome]:
    """Scale update kept only if it lands in K_{n+1}; otherwise s is unchanged."""
    if not restriction.contains(state.n, state.s):
        raise InvariantViolation(f"s = {state.s!r} is outside K_{state.n}")
    new, out = asm_step(target, model, state, config, rng)
    if not restriction.contains(new.n, new.s):
        new.s = state.s
    return new, out


# ---------------------------------------------------------------------------
# long runs

@dataclass
class TraceBlock:
    """Consecutive per-step records; row i describes step index n[i]."""

    n: np.ndarray
    x: np.ndarray
    s: np.ndarray
    theta: np.ndarray
    alpha: np.ndarray
    accepted: np.ndarray
    eta: np.ndarray

    def __len__(self):
        return len(self.n)


class TraceRecorder:
    """In-memory sink keeping every ``thin``-th record."""

    def __init__(self, thin: int = 1):
        if thin < 1:
            raise ValueError("thin must be >= 1")
        self.thin = thin
        self._blocks: list[TraceBlock] = []

    def __call__(self, block: TraceBlock):
        keep = (block.n - 1) % self.thin == 0 if self.thin > 1 else slice(None)
        self._blocks.append(TraceBlock(*(np.asarray(getattr(block, f))[keep] for f in
                                         ("n", "x", "s", "theta", "alpha", "accepted", "eta"))))

    def trace(self) -> TraceBlock:
        if not self._blocks:
            raise ValueError("no records")
        return TraceBlock(*(np.concatenate([getattr(b, f) for b in self._blocks]) for f in
                            ("n", "x", "s", "theta", "alpha", "accepted", "eta")))


@dataclass
class RunSummary:
    n_steps: int
    final_x: np.ndarray
    final_s: float
    final_theta: float
    acceptance_rate: float
    acceptance_rate_last_half: float
    mean_alpha: float
    mean_alpha_last_half: float
    s_min: float
    s_max: float
    s_range_last_half: float
    theta_min: float
    max_theta_over_power: float | None
    averages: dict
    max_increment_ratio: float
    stream_position: tuple
    theory_safe: bool

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["final_x"] = [float(v) for v in self.final_x]
        d["stream_position"] = list(self.stream_position)
        return d


def increment_ratio(s_prev: float, S: np.ndarray, eta: np.ndarray, alpha_star: float) -> np.ndarray:
    """|S_{n+1} - S_n| / (eta_{n+1} max(alpha*, 1 - alpha*)) along a trace."""
    prev = np.concatenate([[s_prev], S[:-1]])
    return np.abs(S - prev) / (eta * max(alpha_star, 1.0 - alpha_star))


def _increment_slack(s_prev: float, S: np.ndarray) -> float:
    # rounding of s + eta*h can add half an ulp of each operand
    prev = np.concatenate([[s_prev], S[:-1]])
    return float(np.max(np.spacing(np.maximum(np.abs(prev), np.abs(S)))))


def run_asm(target: TargetDensity, model: ProposalModel, config: AdaptConfig, rng: ChainStream,
            sinks: Sequence[Callable[[TraceBlock], None]] = (),
            restriction: RestrictionSchedule | None = None,
            functionals: Mapping[str, Callable[[np.ndarray], np.ndarray]] | None = None,
            beta: float | None = None, block: int = 1 << 16,
            backend: str | None = None) -> RunSummary:
    """Run N adaptive steps, streaming records to ``sinks``.

    Each sink is called with a :class:`TraceBlock`.  ``functionals`` map names
    to vectorised ``f(X) -> values``; their ergodic averages over all steps
    land in the summary.  With ``beta`` set the summary also reports
    ``max_n phi(S_n) / n**beta``.  Increments are checked against the
    bounded-increment inequality on every step.
    """
    state = config.initial_state(target, model)
    x, s = state.x, state.s
    if restriction is not None and not restriction.contains(1, s):
        raise InvariantViolation("initial s is outside K_1")
    N = config.n_steps
    half = N // 2
    functionals = dict(functionals or {})
    sums = {k: 0.0 for k in functionals}
    acc_sum = acc_half = a_sum = a_half = 0.0
    s_min = s_max = s
    s_lo_half, s_hi_half = math.inf, -math.inf
    theta_min = model.phi(s)
    max_ratio = 0.0
    max_tp = -math.inf
    done = 0
    while done < N:
        k = min(block, N - done)
        n0 = done + 2
        W = model.unit_increments(rng, k)
        U = rng.uniforms(k)
        eta = config.schedule.etas(n0, k)
        lo = hi = None
        if restriction is not None:
            lo, hi = restriction.bounds(n0, k)
        s_prev = s
        x, s, X, S, A, ACC = advance(target, model, x, s, W, U, eta, config.alpha_star,
                                     config.binary, lo, hi, backend=backend)
        if not np.all(np.isfinite(S)):
            raise NumericalError(f"non-finite scale parameter near step {n0}")
        bound = eta * max(config.alpha_star, 1.0 - config.alpha_star)
        delta = np.abs(S - np.concatenate([[s_prev], S[:-1]]))
        if np.any(delta > bound + _increment_slack(s_prev, S)):
            bad = int(np.argmax(delta > bound + _increment_slack(s_prev, S)))
            raise InvariantViolation(f"bounded-increment inequality fails at step {n0 + bad}")
        max_ratio = max(max_ratio, float(np.max(delta / bound)))
        theta = model.scaling.evaluate(S)
        idx = np.arange(n0, n0 + k)
        acc_f = ACC.astype(float)
        acc_sum += acc_f.sum()
        a_sum += A.sum()
        tail = idx - 1 > half  # steps in the last half
        acc_half += acc_f[tail].sum()
        a_half += A[tail].sum()
        s_min = min(s_min, float(S.min()))
        s_max = max(s_max, float(S.max()))
        if tail.any():
            s_lo_half = min(s_lo_half, float(S[tail].min()))
            s_hi_half = max(s_hi_half, float(S[tail].max()))
        theta_min = min(theta_min, float(theta.min()))
        if beta is not None:
            max_tp = max(max_tp, float(np.max(theta / idx.astype(float) ** beta)))
        for name, f in functionals.items():
            sums[name] += float(np.sum(f(X)))
        if sinks:
            rec = TraceBlock(idx, X, S, theta, A, ACC, eta)
            for sink in sinks:
                try:
                    sink(rec)
                except OSError as exc:
                    raise SinkError(f"sink failed while writing steps {n0}..{n0 + k - 1}: {exc}",
                                    step=n0) from exc
        done += k
    n_tail = N - half
    return RunSummary(
        n_steps=N,
        final_x=np.array(x),
        final_s=float(s),
        final_theta=model.phi(s),
        acceptance_rate=acc_sum / N,
        acceptance_rate_last_half=acc_half / n_tail,
        mean_alpha=a_sum / N,
        mean_alpha_last_half=a_half / n_tail,
        s_min=s_min,
        s_max=s_max,
        s_range_last_half=s_hi_half - s_lo_half,
        theta_min=theta_min,
        max_theta_over_power=max_tp if beta is not None else None,
        averages={k: v / N for k, v in sums.items()},
        max_increment_ratio=max_ratio,
        stream_position=rng.position,
        theory_safe=config.theory_safe,
    )


def run_asm_trace(target, model, config, rng, restriction=None, backend=None, **kw):
    """Convenience wrapper returning ``(summary, trace)`` with every record kept."""
    rec = TraceRecorder()
    summary = run_asm(target, model, config, rng, sinks=[rec], restriction=restriction,
                      backend=backend, **kw)
    return summary, rec.trace()


# ---------------------------------------------------------------------------
# coupling

@dataclass
class CouplingReport:
    divergence_index: float      # first n whose record differs; inf if none
    first_violation: float       # first n with the unconstrained S_n outside K_n
    prefix_identical: bool
    truncated_in_restriction: bool
    n_steps: int

    @property
    def passed(self) -> bool:
        return (self.prefix_identical and self.truncated_in_restriction
                and self.divergence_index == self.first_violation)


def run_coupled(target: TargetDensity, model: ProposalModel, config: AdaptConfig,
                restriction: RestrictionSchedule, rng: ChainStream, block: int = 1 << 16,
                backend: str | None = None) -> CouplingReport:
    """Drive the unconstrained and the truncated recursion with the same draws.

    Both processes consume the same increment and uniform at every step, so
    they agree bit for bit until the first step at which the unconstrained
    parameter leaves the restriction set.
    """
    state = config.initial_state(target, model)
    if not restriction.contains(1, state.s):
        raise InvariantViolation("initial s is outside K_1")
    xa, sa = state.x.copy(), state.s
    xb, sb = state.x.copy(), state.s
    N = config.n_steps
    divergence = math.inf
    violation = math.inf
    in_k = True
    done = 0
    while done < N:
        k = min(block, N - done)
        n0 = done + 2
        W = model.unit_increments(rng, k)
        U = rng.uniforms(k)
        eta = config.schedule.etas(n0, k)
        lo, hi = restriction.bounds(n0, k)
        xa, sa, Xa, Sa, Aa, Ca = advance(target, model, xa, sa, W, U, eta, config.alpha_star,
                                         config.binary, backend=backend)
        xb, sb, Xb, Sb, Ab, Cb = advance(target, model, xb, sb, W, U, eta, config.alpha_star,
                                         config.binary, lo, hi, backend=backend)
        in_k = in_k and bool(np.all((lo <= Sb) & (Sb <= hi)))
        if violation == math.inf:
            out = np.flatnonzero((Sa < lo) | (Sa > hi))
            if out.size:
                violation = n0 + int(out[0])
        if divergence == math.inf:
            same = (Sa == Sb) & np.all(Xa == Xb, axis=1) & (Aa == Ab) & (Ca == Cb)
            diff = np.flatnonzero(~same)
            if diff.size:
                divergence = n0 + int(diff[0])
        done += k
    prefix_ok = divergence >= violation
    report = CouplingReport(divergence, violation, prefix_ok, in_k, N)
    if divergence < violation:
        raise CouplingError(f"processes diverged at step {divergence} before the first "
                            f"restriction violation at {violation}")
    return report


# ---------------------------------------------------------------------------
# scale adaptation combined with covariance learning

@dataclass
class AmAsmConfig:
    adapt: AdaptConfig
    lam_min: float = 0.1
    lam_max: float = 10.0
    weighting: str = "eta"  # or "inverse_n"

    def __post_init__(self):
        if not 0.0 < self.lam_min <= self.lam_max:
            raise ConfigError("eigenvalue clamps need 0 < lam_min <= lam_max")
        if self.weighting not in ("eta", "inverse_n"):
            raise ConfigError("weighting must be 'eta' or 'inverse_n'")


@dataclass
class AmAsmState:
    x: np.ndarray
    s: float
    n: int
    mean: np.ndarray
    cov: np.ndarray
    shape: np.ndarray

    @property
    def adapt_state(self) -> AdaptState:
        return AdaptState(self.x, self.s, self.n)


def clamped_shape(cov: np.ndarray, lam_min: float, lam_max: float) -> np.ndarray:
    """Symmetric square root of ``cov`` with eigenvalues clipped to [lam_min, lam_max]."""
    d = cov.shape[0]
    if lam_min == lam_max:
        return lam_min * np.eye(d)
    w, V = np.linalg.eigh(0.5 * (cov + cov.T))
    r = np.clip(np.sqrt(np.maximum(w, 0.0)), lam_min, lam_max)
    m = (V * r) @ V.T
    return 0.5 * (m + m.T)


def am_asm_init(target: TargetDensity, model: ProposalModel, config: AmAsmConfig) -> AmAsmState:
    st = config.adapt.initial_state(target, model)
    d = target.dim
    cov = np.eye(d)
    return AmAsmState(st.x, st.s, 1, st.x.copy(), cov,
                      clamped_shape(cov, config.lam_min, config.lam_max))


def am_asm_step(target: TargetDensity, model: ProposalModel, state: AmAsmState,
                config: AmAsmConfig, rng: ChainStream) -> tuple[AmAsmState, StepOutcome]:
    """Scale step as in :func:`asm_step` using the learned shape, then update
    the running mean and covariance and re-clamp the shape."""
    ac = config.adapt
    x = target._check_point(state.x)
    lx = _log_density_checked(target, x)
    u = model.profile.draw(rng, 1)
    w = apply_matrix_rows(state.shape, u)[0]
    v = float(rng.uniforms(1)[0])
    out, _ = step_from_increment(target, x, lx, model.phi(state.s), w, v)
    n1 = state.n + 1
    eta = ac.schedule.eta(n1)
    s = state.s + eta * _h(out, ac.alpha_star, ac.binary)
    wgt = min(1.0, eta if config.weighting == "eta" else 1.0 / n1)
    dx = out.next_x - state.mean
    mean = state.mean + wgt * dx
    cov = state.cov + wgt * (np.outer(dx, dx) - state.cov)
    if not (np.all(np.isfinite(cov)) and np.all(np.isfinite(mean)) and math.isfinite(s)):
        raise NumericalError(f"non-finite adaptation state at step {n1}: x={out.next_x!r}, "
                             f"s={s!r}, mean={mean!r}, cov={cov!r}")
    shape = clamped_shape(cov, config.lam_min, config.lam_max)
    return AmAsmState(out.next_x, s, n1, mean, cov, shape), out


def run_am_asm(target: TargetDensity, model: ProposalModel, config: AmAsmConfig,
               rng: ChainStream) -> tuple[AmAsmState, TraceBlock]:
    """Pure-Python AM-within-ASM run; returns the final state and full trace."""
    st = am_asm_init(target, model, config)
    N = config.adapt.n_steps
    d = target.dim
    X = np.empty((N, d))
    S = np.empty(N)
    A = np.empty(N)
    C = np.empty(N, dtype=np.int8)
    for i in range(N):
        st, out = am_asm_step(target, model, st, config, rng)
        X[i] = st.x
        S[i] = st.s
        A[i] = out.alpha
        C[i] = out.accepted
    n = np.arange(2, N + 2)
    return st, TraceBlock(n, X, S, model.scaling.evaluate(S), A, C,
                          config.adapt.schedule.etas(2, N))

