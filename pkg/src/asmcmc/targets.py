"""Target densities.

Densities are exposed only through their logarithm.  Every builtin target
carries a closed-form normaliser, a direct sampler (used as the
stationary-law sampler by the acceptance-rate estimators), the supremum of
its density (for drift functions) and a tail/support classification.

Single-point evaluation goes through the same scalar routine that the
pure-Python chain kernel uses, so a chain advanced step by step through the
public API reproduces the bulk kernels bit for bit.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import gammaln

from . import _core
from ._core import _pykernel
from .errors import DimensionError, UnsupportedTargetError
from .report import BoundReport


class SupportKind(enum.Enum):
    COMPACT_REGULAR = "compact_regular"
    SUPER_EXPONENTIAL = "super_exponential"
    IRREGULAR = "irregular"


def log_sphere_area(d: int) -> float:
    """log of the surface area of the unit sphere in R^d (2 for d=1)."""
    return math.log(2.0) + 0.5 * d * math.log(math.pi) - gammaln(0.5 * d)


def log_ball_volume(d: int, radius: float = 1.0) -> float:
    return 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0) + d * math.log(radius)


def _uniform_directions(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _positive_roots_sphere(xc: np.ndarray, v: np.ndarray, r2: float) -> list[float]:
    """Positive t with ||xc + t v||^2 = r2."""
    a = float(v @ v)
    b = 2.0 * float(xc @ v)
    c = float(xc @ xc) - r2
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    sq = math.sqrt(disc)
    return [t for t in ((-b - sq) / (2 * a), (-b + sq) / (2 * a)) if t > 0.0]


def _level_crossing(xc: np.ndarray, v: np.ndarray) -> list[float]:
    """Positive t != 0 with ||xc + t v|| = ||xc||."""
    t = -2.0 * float(xc @ v) / float(v @ v)
    return [t] if t > 0.0 else []


@dataclass(frozen=True, eq=False)
class TargetDensity:
    """Base class for target densities.

    Subclasses set ``dim`` and ``support_kind`` and implement
    ``log_density_batch``.  Builtins also fill ``kernel_code`` and
    ``kernel_params`` so the compiled chain kernel can evaluate them.
    """

    dim: int
    support_kind: SupportKind
    name: str = "custom"
    uniformly_continuous_normals: bool = True
    analytic_moments: dict = field(default_factory=dict)
    kernel_code: int | None = None
    kernel_params: np.ndarray | None = None

    # -- evaluation ------------------------------------------------------
    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.dim:
            raise DimensionError(f"expected a point of dimension {self.dim}, got shape {x.shape}")
        return x

    def log_density(self, x) -> float:
        """log pi(x), or -inf outside the support."""
        x = self._check_point(x)
        if self.kernel_code is not None:
            return _pykernel.logpdf(self.kernel_code, self._plist, x.tolist(), self.dim)
        return float(self.log_density_batch(x[None, :])[0])

    def log_density_batch(self, X) -> np.ndarray:
        raise NotImplementedError

    def _points(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[-1] != self.dim:
            raise DimensionError(f"expected points of dimension {self.dim}, got shape {X.shape}")
        return X

    @property
    def _plist(self) -> list:
        cached = self.__dict__.get("_plist_cache")
        if cached is None:
            cached = [float(v) for v in self.kernel_params]
            object.__setattr__(self, "_plist_cache", cached)
        return cached

    def in_support(self, x) -> bool:
        return math.isfinite(self.log_density(x))

    # -- optional capabilities ---------------------------------------------
    has_gradient = False
    has_sampler = False

    def grad_log_density(self, x) -> np.ndarray:
        raise UnsupportedTargetError(f"target {self.name!r} has no gradient")

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        raise UnsupportedTargetError(f"target {self.name!r} has no direct sampler")

    @property
    def log_sup_density(self) -> float:
        """log of sup_x pi(x); analytic for builtins."""
        raise UnsupportedTargetError(f"target {self.name!r} does not declare its maximum")

    @property
    def mode(self) -> np.ndarray:
        raise UnsupportedTargetError(f"target {self.name!r} does not declare a mode")

    def ray_breaks(self, x: np.ndarray, v: np.ndarray) -> list[float]:
        """Distances t > 0 along x + t v where the acceptance probability from x
        has a kink or jump (support boundary, level set of pi(x))."""
        return []

    def boundary_points(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        """Points on the support boundary and their outward unit normals."""
        raise UnsupportedTargetError(f"target {self.name!r} has no boundary")

    @property
    def diameter(self) -> float:
        raise UnsupportedTargetError(f"target {self.name!r} is not compactly supported")

    @property
    def symmetric_about(self) -> np.ndarray | None:
        """Centre of point symmetry, if the density is symmetric."""
        return None

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise UnsupportedTargetError(f"target {self.name!r} has no bounding box")

    @property
    def tail_rho(self) -> float:
        raise UnsupportedTargetError(f"target {self.name!r} has no declared tail exponent")


class CustomTarget(TargetDensity):
    """Wrap a user log-density (vectorised over rows) as a target.

    Custom targets run through the pure-Python kernel only.
    """

    def __init__(self, dim: int, log_density: Callable[[np.ndarray], np.ndarray],
                 support_kind: SupportKind = SupportKind.IRREGULAR,
                 grad_log_density: Callable | None = None, name: str = "custom"):
        super().__init__(dim=dim, support_kind=support_kind, name=name,
                         uniformly_continuous_normals=False)
        object.__setattr__(self, "_fn", log_density)
        object.__setattr__(self, "_grad", grad_log_density)

    def log_density_batch(self, X) -> np.ndarray:
        X = self._points(X)
        return np.asarray([float(self._fn(row)) for row in X])

    @property
    def has_gradient(self):
        return self._grad is not None

    def grad_log_density(self, x):
        if self._grad is None:
            return super().grad_log_density(x)
        return np.asarray(self._grad(self._check_point(x)), dtype=float)


class Gaussian(TargetDensity):
    """Multivariate normal N(mean, cov)."""

    has_gradient = True
    has_sampler = True

    def __init__(self, mean, cov=None, rho: float = 1.5):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        d = mean.shape[0]
        cov = np.eye(d) if cov is None else np.atleast_2d(np.asarray(cov, dtype=float))
        if cov.shape != (d, d):
            raise DimensionError("covariance shape does not match the mean")
        if not np.allclose(cov, cov.T):
            raise ValueError("covariance must be symmetric")
        chol = np.linalg.cholesky(cov)
        const = -0.5 * d * math.log(2 * math.pi) - float(np.sum(np.log(np.diag(chol))))
        params = np.concatenate([[const], mean, chol.ravel()])
        moments = {
            "mean": mean.copy(),
            "second_moment": cov + np.outer(mean, mean),
            "x2": float(cov[0, 0] + mean[0] ** 2),
        }
        if np.all(mean == 0.0):
            moments["indicator_x1_pos"] = 0.5
        super().__init__(dim=d, support_kind=SupportKind.SUPER_EXPONENTIAL,
                         name="gaussian", analytic_moments=moments,
                         kernel_code=_core.GAUSSIAN, kernel_params=params)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)
        object.__setattr__(self, "precision", np.linalg.inv(cov))
        object.__setattr__(self, "_const", const)
        if not 1.0 < rho < 2.0:
            raise ValueError("a Gaussian satisfies the tail condition for rho in (1, 2)")
        object.__setattr__(self, "_rho", float(rho))

    def log_density_batch(self, X):
        X = self._points(X)
        w = np.linalg.solve(self.chol, (X - self.mean).T).T
        return self._const - 0.5 * np.sum(w * w, axis=1)

    def grad_log_density(self, x):
        x = self._check_point(x)
        return -self.precision @ (x - self.mean)

    def sample(self, n, rng):
        return self.mean + rng.standard_normal((n, self.dim)) @ self.chol.T

    @property
    def log_sup_density(self):
        return self._const

    @property
    def mode(self):
        return self.mean.copy()

    @property
    def symmetric_about(self):
        return self.mean

    @property
    def tail_rho(self):
        return self._rho

    def ray_breaks(self, x, v):
        r = x - self.mean
        pv = self.precision @ v
        t = -2.0 * float(r @ pv) / float(v @ pv)
        return [t] if t > 0.0 else []

    def bounding_box(self, width: float = 12.0):
        sd = np.sqrt(np.diag(self.cov))
        return self.mean - width * sd, self.mean + width * sd


class ExponentialPower(TargetDensity):
    """pi(x) proportional to exp(-(||x||/scale)**power), power > 1."""

    has_gradient = True
    has_sampler = True

    def __init__(self, power: float = 4.0, scale: float = 1.0, dim: int = 1, rho: float | None = None):
        if power <= 1.0:
            raise ValueError("power must exceed 1 for super-exponential tails")
        if scale <= 0.0:
            raise ValueError("scale must be positive")
        d = int(dim)
        log_z = log_sphere_area(d) + d * math.log(scale) + gammaln(d / power) - math.log(power)
        const = -log_z
        rho = 0.5 * (1.0 + power) if rho is None else float(rho)
        if not 1.0 < rho < power:
            raise ValueError("rho must lie in (1, power)")
        # E||x||^2 = scale^2 Gamma((d+2)/p) / Gamma(d/p); per coordinate divide by d
        r2 = scale ** 2 * math.exp(gammaln((d + 2) / power) - gammaln(d / power))
        moments = {"x2": r2 / d, "norm2": r2, "mean": np.zeros(d)}
        moments["indicator_x1_pos"] = 0.5
        super().__init__(dim=d, support_kind=SupportKind.SUPER_EXPONENTIAL,
                         name="exponential_power", analytic_moments=moments,
                         kernel_code=_core.EXPONENTIAL_POWER,
                         kernel_params=np.array([const, float(power), float(scale)]))
        object.__setattr__(self, "power", float(power))
        object.__setattr__(self, "scale", float(scale))
        object.__setattr__(self, "_const", const)
        object.__setattr__(self, "_rho", rho)

    def log_density_batch(self, X):
        X = self._points(X)
        r = np.sqrt(np.sum(X * X, axis=1))
        return self._const - (r / self.scale) ** self.power

    def grad_log_density(self, x):
        x = self._check_point(x)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return np.zeros(self.dim)
        return -(self.power / self.scale ** self.power) * r ** (self.power - 2.0) * x

    def sample(self, n, rng):
        # (r/scale)^p ~ Gamma(d/p, 1)
        g = rng.gamma(self.dim / self.power, 1.0, size=n)
        r = self.scale * g ** (1.0 / self.power)
        return r[:, None] * _uniform_directions(n, self.dim, rng)

    @property
    def log_sup_density(self):
        return self._const

    @property
    def mode(self):
        return np.zeros(self.dim)

    @property
    def symmetric_about(self):
        return np.zeros(self.dim)

    @property
    def tail_rho(self):
        return self._rho

    def ray_breaks(self, x, v):
        return _level_crossing(x, v)

    def bounding_box(self, width: float = 8.0):
        half = self.scale * width ** (2.0 / self.power) * 3.0
        return -half * np.ones(self.dim), half * np.ones(self.dim)


class UniformBall(TargetDensity):
    """Uniform density on a closed Euclidean ball."""

    has_sampler = True

    def __init__(self, center=0.0, radius: float = 1.0, dim: int | None = None):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if dim is not None and center.shape[0] != dim:
            center = np.full(int(dim), float(center[0]))
        if radius <= 0.0:
            raise ValueError("radius must be positive")
        d = center.shape[0]
        const = -log_ball_volume(d, radius)
        params = np.concatenate([[const, float(radius) ** 2], center])
        moments = {"mean": center.copy(), "x2": radius ** 2 / (d + 2) + center[0] ** 2}
        super().__init__(dim=d, support_kind=SupportKind.COMPACT_REGULAR, name="uniform_ball",
                         analytic_moments=moments, kernel_code=_core.UNIFORM_BALL,
                         kernel_params=params)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "_const", const)

    def log_density_batch(self, X):
        X = self._points(X)
        r2 = np.sum((X - self.center) ** 2, axis=1)
        return np.where(r2 <= self.radius ** 2, self._const, -np.inf)

    def sample(self, n, rng):
        u = rng.random(n) ** (1.0 / self.dim)
        return self.center + self.radius * u[:, None] * _uniform_directions(n, self.dim, rng)

    @property
    def log_sup_density(self):
        return self._const

    @property
    def mode(self):
        return self.center.copy()

    @property
    def symmetric_about(self):
        return self.center

    @property
    def diameter(self):
        return 2.0 * self.radius

    def ray_breaks(self, x, v):
        return _positive_roots_sphere(x - self.center, v, self.radius ** 2)

    def boundary_points(self, n, rng):
        normals = _uniform_directions(n, self.dim, rng)
        return self.center + self.radius * normals, normals

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


class UniformBox(TargetDensity):
    """Uniform density on an axis-aligned box.

    Tagged ``IRREGULAR`` for d >= 2: corners break the boundary-regularity
    hypothesis, so theory checks skip it.  In one dimension the box is an
    interval and its boundary is regular.
    """

    has_sampler = True

    def __init__(self, lower=0.0, upper=1.0):
        lo = np.atleast_1d(np.asarray(lower, dtype=float))
        hi = np.atleast_1d(np.asarray(upper, dtype=float))
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise ValueError("box needs lower < upper componentwise")
        d = lo.shape[0]
        const = -float(np.sum(np.log(hi - lo)))
        kind = SupportKind.COMPACT_REGULAR if d == 1 else SupportKind.IRREGULAR
        mid = 0.5 * (lo + hi)
        moments = {"mean": mid, "x2": float((hi[0] ** 3 - lo[0] ** 3) / (3 * (hi[0] - lo[0])))}
        super().__init__(dim=d, support_kind=kind, name="uniform_box",
                         uniformly_continuous_normals=(d == 1), analytic_moments=moments,
                         kernel_code=_core.UNIFORM_BOX,
                         kernel_params=np.concatenate([[const], lo, hi]))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        object.__setattr__(self, "_const", const)

    def log_density_batch(self, X):
        X = self._points(X)
        inside = np.all((X >= self.lower) & (X <= self.upper), axis=1)
        return np.where(inside, self._const, -np.inf)

    def sample(self, n, rng):
        return self.lower + (self.upper - self.lower) * rng.random((n, self.dim))

    @property
    def log_sup_density(self):
        return self._const

    @property
    def mode(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def symmetric_about(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def diameter(self):
        return float(np.linalg.norm(self.upper - self.lower))

    def ray_breaks(self, x, v):
        ts = []
        for i in range(self.dim):
            if v[i] > 0.0:
                ts.append((self.upper[i] - x[i]) / v[i])
            elif v[i] < 0.0:
                ts.append((self.lower[i] - x[i]) / v[i])
        ts = [t for t in ts if t > 0.0]
        return [min(ts)] if ts else []

    def boundary_points(self, n, rng):
        pts = self.sample(n, rng)
        normals = np.zeros((n, self.dim))
        axis = rng.integers(0, self.dim, size=n)
        side = rng.integers(0, 2, size=n)
        for k in range(n):
            i, up = axis[k], side[k]
            pts[k, i] = self.upper[i] if up else self.lower[i]
            normals[k, i] = 1.0 if up else -1.0
        return pts, normals

    def bounding_box(self):
        return self.lower.copy(), self.upper.copy()


class SmoothBump(TargetDensity):
    """Continuous density on a ball, bounded away from zero on its support.

    pi(x) proportional to floor + (1 - floor) (1 - ||x - c||^2 / R^2)^2 for
    ||x - c|| <= R.  ``floor`` is the density at the boundary relative to the
    centre and must be at least 1e-8.
    """

    has_sampler = True

    def __init__(self, center=0.0, radius: float = 1.0, floor: float = 0.1, dim: int | None = None):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if dim is not None and center.shape[0] != dim:
            center = np.full(int(dim), float(center[0]))
        if not 1e-8 <= floor <= 1.0:
            raise ValueError("floor must lie in [1e-8, 1]")
        d = center.shape[0]
        shape_integral = 1.0 / d - 2.0 / (d + 2) + 1.0 / (d + 4)
        z = math.exp(log_ball_volume(d, radius)) * floor + (1.0 - floor) * math.exp(
            log_sphere_area(d) + d * math.log(radius)) * shape_integral
        const = -math.log(z)
        params = np.concatenate([[const, float(radius) ** 2, float(floor)], center])
        super().__init__(dim=d, support_kind=SupportKind.COMPACT_REGULAR, name="smooth_bump",
                         analytic_moments={"mean": center.copy()},
                         kernel_code=_core.SMOOTH_BUMP, kernel_params=params)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(radius))
        object.__setattr__(self, "floor", float(floor))
        object.__setattr__(self, "_const", const)

    def log_density_batch(self, X):
        X = self._points(X)
        t = np.sum((X - self.center) ** 2, axis=1) / self.radius ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            u = 1.0 - t
            val = self._const + np.log(self.floor + (1.0 - self.floor) * u * u)
        return np.where(t <= 1.0, val, -np.inf)

    def sample(self, n, rng):
        out = np.empty((0, self.dim))
        ball = UniformBall(self.center, self.radius)
        while out.shape[0] < n:
            cand = ball.sample(2 * (n - out.shape[0]) + 16, rng)
            keep = rng.random(cand.shape[0]) < np.exp(self.log_density_batch(cand) - self._const)
            out = np.vstack([out, cand[keep]])
        return out[:n]

    @property
    def log_sup_density(self):
        return self._const

    @property
    def mode(self):
        return self.center.copy()

    @property
    def symmetric_about(self):
        return self.center

    @property
    def diameter(self):
        return 2.0 * self.radius

    def ray_breaks(self, x, v):
        xc = x - self.center
        return sorted(_level_crossing(xc, v) + _positive_roots_sphere(xc, v, self.radius ** 2))

    def boundary_points(self, n, rng):
        normals = _uniform_directions(n, self.dim, rng)
        return self.center + self.radius * normals, normals

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius


BUILTIN_TARGETS = {
    "gaussian": Gaussian,
    "exponential_power": ExponentialPower,
    "uniform_ball": UniformBall,
    "uniform_box": UniformBox,
    "smooth_bump": SmoothBump,
}


def log_density(target: TargetDensity, x) -> float:
    return target.log_density(x)


def check_assumption1(target: TargetDensity, radii, directions=None, rho: float | None = None,
                      n_directions: int = 64, rng: np.random.Generator | None = None,
                      threshold: float = 0.0) -> BoundReport:
    """Probe the super-exponential tail and contour-normal conditions.

    For each radius r, reports the supremum over sampled unit directions u of
    ``(x/||x||^rho) . grad log pi(x)`` and of ``(x/||x||) . grad pi / ||grad pi||``
    at x = r u.  Passes when the first sequence is strictly decreasing and
    ends below ``threshold``, and the second is negative from some fitted
    radius r0 onwards.
    """
    if target.support_kind is not SupportKind.SUPER_EXPONENTIAL or not target.has_gradient:
        raise UnsupportedTargetError(f"target {target.name!r} is not a super-exponential target with a gradient")
    rho = target.tail_rho if rho is None else float(rho)
    if directions is None:
        rng = np.random.default_rng(0) if rng is None else rng
        directions = _uniform_directions(n_directions, target.dim, rng)
        if target.dim == 1:
            directions = np.array([[1.0], [-1.0]])
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    center = target.symmetric_about if target.symmetric_about is not None else np.zeros(target.dim)
    radii = [float(r) for r in radii]
    decay, contour = [], []
    for r in radii:
        dvals, cvals = [], []
        for u in directions:
            x = center + r * u
            g = target.grad_log_density(x)
            nx = float(np.linalg.norm(x))
            dvals.append(float(x @ g) / nx ** rho)
            gn = float(np.linalg.norm(g))
            cvals.append(float(x @ g) / (nx * gn) if gn > 0 else 0.0)
        decay.append(max(dvals))
        contour.append(max(cvals))
    decreasing = all(b < a for a, b in zip(decay, decay[1:]))
    r0 = None
    for i in range(len(radii)):
        if all(c < 0.0 for c in contour[i:]):
            r0 = radii[i]
            break
    passed = decreasing and decay[-1] < threshold and r0 is not None
    return BoundReport(
        name="assumption1",
        quantity="sup_u (x/|x|^rho).grad log pi ; sup_u (x/|x|).grad pi/|grad pi|",
        grid=radii,
        values=[decay, contour],
        threshold=threshold,
        passed=passed,
        fitted={"rho": rho, "r0": r0},
        params={"target": target.name, "n_directions": len(directions)},
    )
