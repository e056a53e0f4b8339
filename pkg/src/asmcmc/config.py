"""Run configuration: a flat INI file with typed sections.

Example::

    [target]
    name = gaussian
    dim = 1

    [proposal]
    profile = gaussian          ; or student(1.0)
    shape = identity            ; or diagonal(1, 2) or matrix(1, 0.5 | 0.5, 1)
    scaling = exp               ; or softplus_power(2)

    [adapt]
    alpha_star = 0.234
    gamma = 0.66
    c = 1.0
    n_steps = 100000

    [restriction]
    kind = none                 ; or fixed(-1, 1) or poly(0.1, 10, 0.1)

    [output]
    dir = out
    prefix = run
    thin = 1

    [run]
    seed = 1
    replicas = 1
    functionals = x1_sq, x1_pos

A run is a pure function of the parsed configuration and the seed.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import math
import re
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .adapt import AdaptConfig, AmAsmConfig, Fixed, PolyGrowth, RestrictionSchedule, StepSchedule
from .analysis.stats import Functional
from .errors import ConfigError
from .proposal import ProposalModel, RadialProfile, ScalingFunction, ShapeMatrix
from .targets import BUILTIN_TARGETS, TargetDensity

_CALL = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


def parse_call(text: str) -> tuple[str, list[str]]:
    """``name(a, b)`` -> ("name", ["a", "b"])."""
    m = _CALL.match(text)
    if not m:
        raise ValueError(f"cannot parse {text!r}")
    args = m.group(2)
    if args is None or not args.strip():
        return m.group(1), []
    return m.group(1), [a.strip() for a in args.split(",")]


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(",", " ").split()]


def _fmt(v: float) -> str:
    return repr(float(v))


def _fmt_list(vals) -> str:
    return ", ".join(_fmt(v) for v in vals)


# ---------------------------------------------------------------------------
# registered functionals (vectorised over rows of X)

FUNCTIONALS = {
    "one": Functional("one", lambda X: np.ones(len(X)), "bounded", 1.0),
    "x1": Functional("x1", lambda X: X[:, 0], "subexponential", 1.0, 1.0),
    "x1_sq": Functional("x1_sq", lambda X: X[:, 0] ** 2, "subexponential", 1.0, 1.0),
    "norm_sq": Functional("norm_sq", lambda X: np.sum(X * X, axis=1), "subexponential", 1.0, 1.0),
    "x1_pos": Functional("x1_pos", lambda X: (X[:, 0] > 0).astype(float), "bounded", 1.0),
}


# ---------------------------------------------------------------------------
# sections

@dataclass(frozen=True)
class TargetSpec:
    name: str = "gaussian"
    dim: int = 1
    params: tuple = ()  # sorted (key, value-string) pairs

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def build(self) -> TargetDensity:
        p = dict(self.params)
        d = self.dim
        try:
            if self.name == "gaussian":
                mean = _floats(p.get("mean", "0")) if "mean" in p else [0.0] * d
                if len(mean) == 1 and d > 1:
                    mean = mean * d
                cov = None
                if "cov" in p:
                    cov = np.array([_floats(row) for row in p["cov"].split("|")])
                return BUILTIN_TARGETS["gaussian"](mean, cov)
            if self.name == "exponential_power":
                return BUILTIN_TARGETS["exponential_power"](float(p.get("power", 4.0)),
                                                            float(p.get("scale", 1.0)), d)
            if self.name in ("uniform_ball", "smooth_bump"):
                center = _floats(p.get("center", "0"))
                if len(center) == 1:
                    center = center * d
                kw = {"floor": float(p["floor"])} if "floor" in p and self.name == "smooth_bump" else {}
                return BUILTIN_TARGETS[self.name](center, float(p.get("radius", 1.0)), dim=d, **kw)
            if self.name == "uniform_box":
                lo = _floats(p.get("lower", "0"))
                hi = _floats(p.get("upper", "1"))
                if len(lo) == 1:
                    lo = lo * d
                if len(hi) == 1:
                    hi = hi * d
                return BUILTIN_TARGETS["uniform_box"](lo, hi)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[target] invalid parameters for {self.name!r}: {exc}") from None
        raise ConfigError(f"[target] unknown target {self.name!r}; "
                          f"choose from {', '.join(sorted(BUILTIN_TARGETS))}")


@dataclass(frozen=True)
class ProposalSpec:
    profile: str = "gaussian"
    gamma: float = 1.0
    shape: str = "identity"
    shape_values: tuple = ()
    scaling: str = "exp"
    power: float = 1.0

    def build(self, dim: int) -> ProposalModel:
        if self.profile == "gaussian":
            prof = RadialProfile.gaussian(dim)
        else:
            prof = RadialProfile.student(self.gamma, dim)
        if self.shape == "identity":
            sh = ShapeMatrix.identity(dim)
        elif self.shape == "diagonal":
            sh = ShapeMatrix.diagonal(self.shape_values)
        else:
            sh = ShapeMatrix(np.array(self.shape_values, dtype=float).reshape(dim, dim))
        if sh.dim != dim:
            raise ConfigError("[proposal] shape dimension does not match the target")
        return ProposalModel(prof, sh, ScalingFunction(self.scaling, self.power), dim)

    def to_items(self) -> dict:
        prof = "gaussian" if self.profile == "gaussian" else f"student({_fmt(self.gamma)})"
        if self.shape == "identity":
            shape = "identity"
        elif self.shape == "diagonal":
            shape = f"diagonal({_fmt_list(self.shape_values)})"
        else:
            k = int(round(math.sqrt(len(self.shape_values))))
            rows = ["  ".join(_fmt(v) for v in self.shape_values[i * k:(i + 1) * k]) for i in range(k)]
            shape = f"matrix({' | '.join(rows)})"
        scaling = "exp" if self.scaling == "exp" else f"softplus_power({_fmt(self.power)})"
        return {"profile": prof, "shape": shape, "scaling": scaling}


@dataclass(frozen=True)
class AdaptSpec:
    alpha_star: float = 0.234
    gamma: float = 0.66
    c: float = 1.0
    n_steps: int = 10_000
    s0: float | None = None
    x0: tuple | None = None
    binary: bool = False
    am_within_asm: bool = False
    lam_min: float = 0.1
    lam_max: float = 10.0
    am_weighting: str = "eta"

    def build(self) -> AdaptConfig:
        sched = StepSchedule(self.c, self.gamma)
        x0 = None if self.x0 is None else np.array(self.x0, dtype=float)
        return AdaptConfig(self.alpha_star, sched, x0, self.s0, self.n_steps, self.binary)

    def build_am(self) -> AmAsmConfig:
        return AmAsmConfig(self.build(), self.lam_min, self.lam_max, self.am_weighting)


@dataclass(frozen=True)
class RunConfig:
    target: TargetSpec = field(default_factory=TargetSpec)
    proposal: ProposalSpec = field(default_factory=ProposalSpec)
    adapt: AdaptSpec = field(default_factory=AdaptSpec)
    restriction: str = "none"
    restriction_values: tuple = ()
    out_dir: str = "."
    prefix: str = "run"
    thin: int = 1
    write_trace: bool = True
    seed: int = 0
    replicas: int = 1
    functionals: tuple = ()
    beta: float = 0.1
    sweep: tuple = ()  # (("adapt.alpha_star", (values...)), ...)

    # -- builders ----------------------------------------------------------
    def build_target(self) -> TargetDensity:
        return self.target.build()

    def build_model(self, dim: int | None = None) -> ProposalModel:
        return self.proposal.build(self.target.dim if dim is None else dim)

    def build_restriction(self, model: ProposalModel) -> RestrictionSchedule | None:
        if self.restriction == "none":
            return None
        if self.restriction == "fixed":
            return Fixed(*self.restriction_values)
        t1, t2, b = self.restriction_values
        return PolyGrowth(t1, t2, b, model.scaling)

    def build_functionals(self) -> list[Functional]:
        return [FUNCTIONALS[name] for name in self.functionals]

    # -- serialisation -------------------------------------------------------
    def to_text(self) -> str:
        cp = configparser.ConfigParser(interpolation=None)
        t = {"name": self.target.name, "dim": str(self.target.dim)}
        t.update({k: v for k, v in self.target.params})
        cp["target"] = t
        cp["proposal"] = self.proposal.to_items()
        a = self.adapt
        ad = {"alpha_star": _fmt(a.alpha_star), "gamma": _fmt(a.gamma), "c": _fmt(a.c),
              "n_steps": str(a.n_steps), "binary": "on" if a.binary else "off",
              "am_within_asm": "on" if a.am_within_asm else "off"}
        if a.s0 is not None:
            ad["s0"] = _fmt(a.s0)
        if a.x0 is not None:
            ad["x0"] = _fmt_list(a.x0)
        if a.am_within_asm:
            ad.update(lam_min=_fmt(a.lam_min), lam_max=_fmt(a.lam_max), am_weighting=a.am_weighting)
        cp["adapt"] = ad
        kind = "none" if self.restriction == "none" else \
            f"{self.restriction if self.restriction == 'fixed' else 'poly'}({_fmt_list(self.restriction_values)})"
        cp["restriction"] = {"kind": kind}
        cp["output"] = {"dir": self.out_dir, "prefix": self.prefix, "thin": str(self.thin),
                        "trace": "on" if self.write_trace else "off"}
        cp["run"] = {"seed": str(self.seed), "replicas": str(self.replicas),
                     "functionals": ", ".join(self.functionals), "beta": _fmt(self.beta)}
        if self.sweep:
            cp["sweep"] = {k: ", ".join(v) for k, v in self.sweep}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    def config_hash(self) -> str:
        """Hash of the canonical text without seed, sweep grid and output location."""
        base = replace(self, seed=0, sweep=(), out_dir=".", prefix="run")
        return hashlib.sha256(base.to_text().encode()).hexdigest()[:16]

    def with_overrides(self, overrides: dict) -> "RunConfig":
        """Apply ``{"section.key": "value"}`` overrides by re-parsing."""
        cp = configparser.ConfigParser(interpolation=None)
        cp.read_string(self.to_text())
        for dotted, value in overrides.items():
            section, _, key = dotted.partition(".")
            if not key:
                section, key = "adapt", section
            if not cp.has_section(section):
                cp.add_section(section)
            cp[section][key] = str(value)
        buf = io.StringIO()
        cp.write(buf)
        return parse_config(buf.getvalue())


# ---------------------------------------------------------------------------
# parsing

_KNOWN = {
    "target": None,  # free-form parameters
    "proposal": {"profile", "shape", "scaling"},
    "adapt": {f.name for f in fields(AdaptSpec)},
    "restriction": {"kind"},
    "output": {"dir", "prefix", "thin", "trace"},
    "run": {"seed", "replicas", "functionals", "beta"},
    "sweep": None,
}
_TARGET_KEYS = {"name", "dim", "mean", "cov", "power", "scale", "center", "radius", "floor",
                "lower", "upper"}
_BOOL = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False,
         "1": True, "0": False}


def _line_of(text: str, section: str, key: str | None) -> int | None:
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip()
            if key is None and current == section:
                return i
            continue
        if current == section and key is not None:
            k = re.split(r"[=:]", s, maxsplit=1)[0].strip().lower()
            if k == key:
                return i
    return None


def parse_config(text: str) -> RunConfig:
    """Parse INI text into a :class:`RunConfig`; errors name the line and key."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None

    def fail(section, key, msg):
        line = _line_of(text, section, key)
        where = f"line {line}: " if line else ""
        raise ConfigError(f"{where}[{section}] {key}: {msg}")

    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(f"line {_line_of(text, section, None)}: unknown section [{section}]")
        allowed = _TARGET_KEYS if section == "target" else _KNOWN[section]
        if allowed is not None:
            for key in cp[section]:
                if key not in allowed:
                    fail(section, key, "unknown key")

    def get(section, key, conv, default):
        if not cp.has_option(section, key):
            return default
        raw = cp.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            fail(section, key, f"invalid value {raw!r} ({exc})")

    def to_bool(raw):
        if raw.lower() not in _BOOL:
            raise ValueError("expected on/off")
        return _BOOL[raw.lower()]

    # target
    if not cp.has_section("target"):
        raise ConfigError("missing [target] section")
    name = get("target", "name", str, "gaussian")
    dim = get("target", "dim", int, 1)
    if dim < 1:
        fail("target", "dim", "must be >= 1")
    params = tuple(sorted((k, " ".join(cp["target"][k].split())) for k in cp["target"]
                          if k not in ("name", "dim")))
    target = TargetSpec(name, dim, params)

    # proposal
    def prof(raw):
        n, args = parse_call(raw)
        if n == "gaussian" and not args:
            return "gaussian", 1.0
        if n == "student" and len(args) == 1:
            g = float(args[0])
            if g <= 0:
                raise ValueError("student gamma must be positive")
            return "student", g
        raise ValueError("expected gaussian or student(gamma)")

    def shape(raw):
        n, args = parse_call(raw)
        if n == "identity" and not args:
            return "identity", ()
        if n == "diagonal" and args:
            return "diagonal", tuple(float(a) for a in args)
        if n == "matrix" and args:
            rows = [_floats(r) for r in ",".join(args).split("|")]
            k = len(rows)
            if any(len(r) != k for r in rows):
                raise ValueError("matrix rows must form a square")
            return "matrix", tuple(v for r in rows for v in r)
        raise ValueError("expected identity, diagonal(...) or matrix(...)")

    def scaling(raw):
        n, args = parse_call(raw)
        if n == "exp" and not args:
            return "exp", 1.0
        if n == "softplus_power" and len(args) == 1:
            return "softplus_power", float(args[0])
        raise ValueError("expected exp or softplus_power(p)")

    pk, pg = get("proposal", "profile", prof, ("gaussian", 1.0))
    sk, sv = get("proposal", "shape", shape, ("identity", ()))
    fk, fp = get("proposal", "scaling", scaling, ("exp", 1.0))
    proposal = ProposalSpec(pk, pg, sk, sv, fk, fp)

    # adapt
    d = AdaptSpec()
    x0 = get("adapt", "x0", lambda r: tuple(_floats(r)), None)
    adapt = AdaptSpec(
        alpha_star=get("adapt", "alpha_star", float, d.alpha_star),
        gamma=get("adapt", "gamma", float, d.gamma),
        c=get("adapt", "c", float, d.c),
        n_steps=get("adapt", "n_steps", int, d.n_steps),
        s0=get("adapt", "s0", float, None),
        x0=x0,
        binary=get("adapt", "binary", to_bool, False),
        am_within_asm=get("adapt", "am_within_asm", to_bool, False),
        lam_min=get("adapt", "lam_min", float, d.lam_min),
        lam_max=get("adapt", "lam_max", float, d.lam_max),
        am_weighting=get("adapt", "am_weighting", str, d.am_weighting),
    )
    if not 0.0 < adapt.alpha_star < 1.0:
        fail("adapt", "alpha_star", "must lie in (0, 1)")
    if not 0.5 < adapt.gamma <= 1.0:
        fail("adapt", "gamma", "must lie in (1/2, 1]")
    if not adapt.c > 0.0:
        fail("adapt", "c", "must be positive")
    if adapt.n_steps < 1:
        fail("adapt", "n_steps", "must be >= 1")
    if x0 is not None and len(x0) != dim:
        fail("adapt", "x0", f"expected {dim} values")

    # restriction
    def restr(raw):
        n, args = parse_call(raw)
        if n == "none" and not args:
            return "none", ()
        if n == "fixed" and len(args) == 2:
            return "fixed", tuple(float(a) for a in args)
        if n == "poly" and len(args) == 3:
            return "poly", tuple(float(a) for a in args)
        raise ValueError("expected none, fixed(a1, a2) or poly(theta1, theta2, beta)")

    rk, rv = get("restriction", "kind", restr, ("none", ()))

    # output / run
    thin = get("output", "thin", int, 1)
    if thin < 1:
        fail("output", "thin", "must be >= 1")
    replicas = get("run", "replicas", int, 1)
    if replicas < 1:
        fail("run", "replicas", "must be >= 1")
    seed = get("run", "seed", int, 0)
    if not 0 <= seed < 2 ** 64:
        fail("run", "seed", "must be a 64-bit unsigned integer")
    funcs = get("run", "functionals",
                lambda r: tuple(s.strip() for s in r.split(",") if s.strip()), ())
    for fn in funcs:
        if fn not in FUNCTIONALS:
            fail("run", "functionals", f"unknown functional {fn!r}; "
                 f"choose from {', '.join(sorted(FUNCTIONALS))}")

    sweep = ()
    if cp.has_section("sweep"):
        axes = []
        for key in cp["sweep"]:
            vals = tuple(v.strip() for v in cp["sweep"][key].split(",") if v.strip())
            section, _, k = key.partition(".")
            if not k:
                section, k = "adapt", section
            if section not in ("adapt", "target") or (section == "adapt" and k not in _KNOWN["adapt"]):
                fail("sweep", key, "axes must name adapt.<key> or target.<key>")
            axes.append((f"{section}.{k}", vals))
        sweep = tuple(axes)

    cfg = RunConfig(
        target=target, proposal=proposal, adapt=adapt, restriction=rk, restriction_values=rv,
        out_dir=get("output", "dir", str, "."), prefix=get("output", "prefix", str, "run"),
        thin=thin, write_trace=get("output", "trace", to_bool, True), seed=seed,
        replicas=replicas, functionals=funcs, beta=get("run", "beta", float, 0.1), sweep=sweep,
    )
    # surface construction errors with their section
    try:
        t = cfg.build_target()
    except ConfigError as exc:
        raise ConfigError(f"line {_line_of(text, 'target', 'name')}: {exc}") from None
    except Exception as exc:
        raise ConfigError(f"line {_line_of(text, 'target', None)}: [target] {exc}") from None
    try:
        cfg.build_model(t.dim)
    except Exception as exc:
        raise ConfigError(f"line {_line_of(text, 'proposal', None)}: [proposal] {exc}") from None
    if rk == "fixed" and not rv[0] <= rv[1]:
        fail("restriction", "kind", "fixed(a1, a2) needs a1 <= a2")
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)
