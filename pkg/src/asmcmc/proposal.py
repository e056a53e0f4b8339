"""Scaled, elliptically symmetric random-walk proposals.

The proposal increment at adaptation parameter ``s`` is
``z = phi(s) * Sigma @ u`` where ``u`` has density proportional to
``qhat(||u||)``.  Two radial profiles are provided:

* gaussian: ``qhat(r) = exp(-r**2 / 2)``
* student:  ``qhat(r) = (1 + r**2) ** (-d/2 - gamma)``

The Student profile is used exactly as written; its sampler is
``u = g / sqrt(w)`` with ``g`` standard normal and ``w ~ chi2(2 gamma)``,
which is a multivariate t with ``2 gamma`` degrees of freedom rescaled by
``1/sqrt(2 gamma)``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from . import _core
from .errors import DimensionError, ProfileError
from .report import BoundReport
from .rng import ChainStream
from .targets import log_sphere_area


@dataclass(frozen=True)
class RadialProfile:
    kind: str = "gaussian"
    gamma: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("gaussian", "student"):
            raise ValueError(f"unknown profile {self.kind!r}")
        if self.kind == "student" and not self.gamma > 0.0:
            raise ValueError("student profile needs gamma > 0")
        if self.dim < 1:
            raise ValueError("dimension must be positive")

    @classmethod
    def gaussian(cls, dim: int = 1) -> "RadialProfile":
        return cls("gaussian", 1.0, dim)

    @classmethod
    def student(cls, gamma: float, dim: int = 1) -> "RadialProfile":
        return cls("student", float(gamma), dim)

    @property
    def _power(self) -> float:
        return 0.5 * self.dim + self.gamma

    def value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return np.exp(-0.5 * r * r)
        return (1.0 + r * r) ** (-self._power)

    def log_value(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return -0.5 * r * r
        return -self._power * np.log1p(r * r)

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "gaussian":
            return -r * np.exp(-0.5 * r * r)
        return -2.0 * self._power * r * (1.0 + r * r) ** (-self._power - 1.0)

    @property
    def radial_integral(self) -> float:
        """int_0^inf r^(d-1) qhat(r) dr, by quadrature (cached)."""
        return _radial_integral(self.kind, self.gamma, self.dim)

    @property
    def log_normalizer(self) -> float:
        """log of int_{R^d} qhat(||u||) du."""
        return log_sphere_area(self.dim) + math.log(self.radial_integral)

    def radial_pdf(self, r):
        r = np.asarray(r, dtype=float)
        return r ** (self.dim - 1) * self.value(r) / self.radial_integral

    def radial_cdf(self, r):
        """CDF of ||u|| interpolated from a cached quadrature table (abs. error < 1e-7)."""
        grid, cdf = _radial_cdf_table(self.kind, self.gamma, self.dim)
        r = np.asarray(r, dtype=float)
        t = r / (1.0 + r)
        return np.interp(t, grid, cdf)

    def radial_quantile(self, p: float) -> float:
        return float(optimize.brentq(lambda r: float(self.radial_cdf(r)) - p, 0.0, 1e8, xtol=1e-13))

    def draw(self, stream: ChainStream, k: int) -> np.ndarray:
        g = stream.normals(k, self.dim)
        if self.kind == "gaussian":
            return g
        w = stream.chisquare(k, 2.0 * self.gamma)
        return g / np.sqrt(w)[:, None]


@functools.lru_cache(maxsize=None)
def _radial_integral(kind: str, gamma: float, dim: int) -> float:
    prof = RadialProfile(kind, gamma, dim)
    f = lambda r: r ** (dim - 1) * float(prof.value(r))
    a, _ = integrate.quad(f, 0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200)
    b, _ = integrate.quad(f, 1.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
    return a + b


@functools.lru_cache(maxsize=None)
def _radial_cdf_table(kind: str, gamma: float, dim: int, n: int = 8001):
    prof = RadialProfile(kind, gamma, dim)
    # composite Gauss-Legendre in t = r/(1+r), so the table covers [0, inf)
    t = np.linspace(0.0, 1.0, n)
    nodes, weights = np.polynomial.legendre.leggauss(16)
    left, right = t[:-1, None], t[1:, None]
    tt = 0.5 * (right - left) * nodes[None, :] + 0.5 * (right + left)
    r = tt / (1.0 - tt)
    dens = r ** (dim - 1) * prof.value(r) / (1.0 - tt) ** 2
    pieces = 0.5 * (right - left)[:, 0] * (dens @ weights)
    cdf = np.concatenate([[0.0], np.cumsum(pieces)]) / prof.radial_integral
    return t, np.minimum(cdf, 1.0)


class ShapeMatrix:
    """Symmetric positive-definite shape matrix Sigma of the template proposal."""

    def __init__(self, matrix):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError("shape matrix must be square")
        if not np.allclose(m, m.T, rtol=0.0, atol=1e-12):
            raise ValueError("shape matrix must be symmetric")
        m = 0.5 * (m + m.T)
        eig = np.linalg.eigvalsh(m)
        if eig[0] <= 0.0:
            raise ValueError("shape matrix must be positive definite")
        self.matrix = m
        self.dim = m.shape[0]
        self.chol = np.linalg.cholesky(m)
        self.kappa = float(eig[0])
        self.logdet = float(np.sum(np.log(eig)))
        self.is_identity = bool(np.array_equal(m, np.eye(self.dim)))

    @classmethod
    def identity(cls, d: int) -> "ShapeMatrix":
        return cls(np.eye(d))

    @classmethod
    def diagonal(cls, values) -> "ShapeMatrix":
        return cls(np.diag(np.asarray(values, dtype=float)))

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def apply_rows(self, U: np.ndarray) -> np.ndarray:
        """Rows of ``U @ Sigma.T`` with a fixed summation order.

        Plain elementwise accumulation rather than BLAS, so a block of rows
        and the same rows one at a time give identical bits.
        """
        return apply_matrix_rows(self.matrix, U)

    def solve(self, z: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.matrix, np.asarray(z, dtype=float).T).T


def apply_matrix_rows(M: np.ndarray, U: np.ndarray) -> np.ndarray:
    W = U[:, 0:1] * M[:, 0][None, :]
    for j in range(1, M.shape[1]):
        W = W + U[:, j:j + 1] * M[:, j][None, :]
    return W


@dataclass(frozen=True)
class ScalingFunction:
    """Increasing surjection phi: R -> (0, inf) from parameter to scale.

    ``exp`` gives phi(s) = e^s, so s is the log of the proposal scale.
    ``softplus_power`` gives phi(s) = log(1 + e^s) ** power (power >= 1).
    """

    kind: str = "exp"
    power: float = 1.0

    def __post_init__(self):
        if self.kind not in ("exp", "softplus_power"):
            raise ValueError(f"unknown scaling function {self.kind!r}")
        if self.kind == "softplus_power" and self.power < 1.0:
            raise ValueError("softplus_power needs power >= 1")

    @property
    def kernel_code(self) -> int:
        return _core.PHI_EXP if self.kind == "exp" else _core.PHI_SOFTPLUS_POWER

    def evaluate(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "exp":
            return np.exp(s)
        return np.logaddexp(0.0, s) ** self.power

    def __call__(self, s: float) -> float:
        """Scalar evaluation matching the chain kernels bit for bit."""
        return _core.python_backend.phi(self.kernel_code, self.power, float(s))

    def inverse(self, theta):
        theta = np.asarray(theta, dtype=float)
        if self.kind == "exp":
            return np.log(theta)
        y = theta ** (1.0 / self.power)
        return y + np.log(-np.expm1(-y))

    def derivative(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "exp":
            return np.exp(s)
        sp = np.logaddexp(0.0, s)
        return self.power * sp ** (self.power - 1.0) / (1.0 + np.exp(-s))

    def growth_constants(self, h: float = 1.0) -> tuple[float, float, float]:
        """Declared (h, c, kappa) with phi'(x + xi) <= c max(1, phi(x)**kappa)."""
        if self.kind == "exp":
            return h, math.exp(h), 1.0
        return h, self.power * (1.0 + h) ** (self.power - 1.0), 1.0

    def check_growth(self, grid, h: float = 1.0, n_xi: int = 11) -> BoundReport:
        h, c, kappa = self.growth_constants(h)
        grid = np.asarray(grid, dtype=float)
        worst = []
        for x in grid:
            xi = np.linspace(0.0, h, n_xi)
            lhs = self.derivative(x + xi)
            rhs = c * max(1.0, float(self.evaluate(x)) ** kappa)
            worst.append(float(np.max(lhs) / rhs))
        increasing = bool(np.all(np.diff(self.evaluate(np.sort(grid))) > 0))
        return BoundReport(
            name="scaling_growth",
            quantity="max_xi phi'(x+xi) / (c max(1, phi(x)^kappa))",
            grid=grid.tolist(), values=worst, threshold=1.0,
            passed=increasing and max(worst) <= 1.0 + 1e-12,
            fitted={"h": h, "c": c, "kappa": kappa},
            params={"kind": self.kind, "power": self.power},
        )


class ProposalModel:
    """Template profile + shape matrix + scaling function."""

    def __init__(self, profile: RadialProfile | None = None, shape: ShapeMatrix | None = None,
                 scaling: ScalingFunction | None = None, dim: int | None = None):
        if dim is None:
            dim = shape.dim if shape is not None else (profile.dim if profile is not None else 1)
        if profile is None:
            profile = RadialProfile.gaussian(dim)
        if shape is None:
            shape = ShapeMatrix.identity(dim)
        if scaling is None:
            scaling = ScalingFunction()
        if shape.dim != dim or profile.dim != dim:
            raise DimensionError("profile, shape and dimension disagree")
        self.profile = profile
        self.shape = shape
        self.scaling = scaling
        self.dim = dim

    @classmethod
    def gaussian(cls, dim: int = 1, sigma=None) -> "ProposalModel":
        shape = ShapeMatrix.identity(dim) if sigma is None else ShapeMatrix(sigma)
        return cls(RadialProfile.gaussian(dim), shape, ScalingFunction(), dim)

    @classmethod
    def student(cls, gamma: float, dim: int = 1, sigma=None) -> "ProposalModel":
        shape = ShapeMatrix.identity(dim) if sigma is None else ShapeMatrix(sigma)
        return cls(RadialProfile.student(gamma, dim), shape, ScalingFunction(), dim)

    def phi(self, s: float) -> float:
        return self.scaling(s)

    def unit_increments(self, stream: ChainStream, k: int) -> np.ndarray:
        """k increments at unit scale, i.e. draws of Sigma @ u."""
        return self.shape.apply_rows(self.profile.draw(stream, k))

    def sample_increment(self, s: float, stream: ChainStream) -> np.ndarray:
        w = self.unit_increments(stream, 1)[0]
        return self.phi(s) * w

    def log_density(self, s: float, z) -> float:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise DimensionError(f"expected an increment of dimension {self.dim}")
        return float(self.log_density_batch(s, z[None, :])[0])

    def log_density_batch(self, s: float, Z) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        theta = float(self.scaling.evaluate(s))
        y = self.shape.solve(Z)
        r = np.sqrt(np.sum(y * y, axis=1))
        return (-self.dim * math.log(theta) - self.shape.logdet
                + self.profile.log_value(r / theta) - self.profile.log_normalizer)


def sample_increment(model: ProposalModel, s: float, stream: ChainStream) -> np.ndarray:
    return model.sample_increment(s, stream)


def log_proposal_density(model: ProposalModel, s: float, z) -> float:
    return model.log_density(s, z)


def _negative_part_integral(f, x_max: float) -> float:
    """int_0^inf min(0, f(x)) dx for f positive beyond the scanned range."""
    xs = np.unique(np.concatenate([np.linspace(0.0, 20.0, 4001), np.geomspace(20.0, x_max, 2000)]))
    vals = np.array([f(x) for x in xs])
    if not np.all(np.isfinite(vals)):
        raise ProfileError("non-finite derivative evaluation")
    total = 0.0
    neg = vals < 0.0
    i = 0
    while i < len(xs):
        if not neg[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(xs) and neg[j + 1]:
            j += 1
        lo = xs[i - 1] if i > 0 else xs[i]
        hi = xs[j + 1] if j + 1 < len(xs) else xs[j]
        if i > 0:
            lo = optimize.brentq(f, xs[i - 1], xs[i]) if vals[i - 1] > 0 else xs[i - 1]
        if j + 1 < len(xs):
            hi = optimize.brentq(f, xs[j], xs[j + 1]) if vals[j + 1] > 0 else xs[j + 1]
        part, _ = integrate.quad(lambda x: min(0.0, f(x)), lo, hi, epsabs=1e-300, epsrel=1e-10, limit=200)
        total += part
        i = j + 1
    return total


def check_profile_derivative_conditions(profile: RadialProfile, eps_grid=(0.25, 0.1, 0.05, 0.01),
                                        interval=(0.5, 1.5), n_scan: int = 2001) -> BoundReport:
    """Scan the two derivative conditions on the radial profile.

    For each eps: (i) the minimum over ``interval`` of
    ``qhat'(x) - 2 qhat'(x + eps)``, which must be positive; (ii) the
    integral of its negative part over [0, inf), whose magnitude must shrink
    at least exponentially in 1/eps.  Fitted constants c1 (min of (i)),
    c2 and c3 (bound c2 exp(-c3/eps) on (ii)) are reported.
    """
    eps_grid = [float(e) for e in eps_grid]
    a, b = interval
    xs = np.linspace(a, b, n_scan)
    mins, integrals = [], []
    for eps in eps_grid:
        vals = profile.derivative(xs) - 2.0 * profile.derivative(xs + eps)
        if not np.all(np.isfinite(vals)):
            raise ProfileError("non-finite derivative evaluation")
        mins.append(float(np.min(vals)))

        def f(x, eps=eps):
            return float(profile.derivative(x) - 2.0 * profile.derivative(x + eps))

        x_max = 40.0 if profile.kind == "gaussian" else 1e6
        integrals.append(_negative_part_integral(f, x_max))
    cond_i = all(m > 0.0 for m in mins)

    mags = [abs(v) for v in integrals]
    order = np.argsort(eps_grid)[::-1]  # decreasing eps
    seq = [mags[i] for i in order]
    nonincreasing = all(m2 <= m1 for m1, m2 in zip(seq, seq[1:]))
    pts = [(1.0 / eps_grid[i], math.log(mags[i])) for i in range(len(eps_grid))
           if mags[i] > 0.0 and eps_grid[i] > 0.0]
    c2 = c3 = None
    if len(pts) >= 2:
        inv, lm = np.array(pts).T
        slope, _ = np.polyfit(inv, lm, 1)
        c3 = float(-slope)
        c2 = float(np.max(np.exp(lm + c3 * inv)))
        cond_ii = nonincreasing and c3 > 0.0
    else:
        # at most one non-zero magnitude: the bound holds with any c3 > 0
        cond_ii = nonincreasing
    return BoundReport(
        name="profile_derivative",
        quantity="min_[a,b] qhat'(x) - 2 qhat'(x+eps) ; int min(0, .)",
        grid=eps_grid,
        values=[mins, integrals],
        threshold=0.0,
        passed=cond_i and cond_ii,
        fitted={"a": a, "b": b, "c1": min(mins), "c2": c2, "c3": c3},
        params={"kind": profile.kind, "gamma": profile.gamma, "dim": profile.dim},
    )
