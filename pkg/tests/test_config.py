import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asmcmc.config import RunConfig, load_config, parse_config, parse_call
from asmcmc.errors import ConfigError
from asmcmc.targets import ExponentialPower, Gaussian, UniformBall

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """
[target]
name = gaussian
dim = 2
mean = 1, -1
cov = 2, 0.5 | 0.5, 1     ; rows separated by |

[proposal]
profile = student(1.5)
shape = matrix(1, 0.2 | 0.2, 2)
scaling = softplus_power(2)

[adapt]
alpha_star = 0.3
gamma = 0.7
c = 0.5
n_steps = 1234
binary = on

[restriction]
kind = fixed(-1, 2)

[run]
seed = 18446744073709551615
replicas = 3
functionals = x1_sq, norm_sq
"""


def test_parse_full_config():
    cfg = parse_config(BASE)
    t = cfg.build_target()
    assert isinstance(t, Gaussian)
    np.testing.assert_allclose(t.cov, [[2.0, 0.5], [0.5, 1.0]])
    m = cfg.build_model()
    assert m.profile.kind == "student" and m.profile.gamma == 1.5
    np.testing.assert_allclose(m.shape.matrix, [[1.0, 0.2], [0.2, 2.0]])
    assert m.scaling.kind == "softplus_power" and m.scaling.power == 2.0
    assert cfg.adapt.binary and cfg.adapt.n_steps == 1234
    assert cfg.build_restriction(m).a2 == 2.0
    assert cfg.seed == 2 ** 64 - 1
    assert [f.name for f in cfg.build_functionals()] == ["x1_sq", "norm_sq"]


def test_round_trip():
    cfg = parse_config(BASE)
    again = parse_config(cfg.to_text())
    assert again == cfg
    assert again.config_hash() == cfg.config_hash()


def test_hash_ignores_seed_but_not_parameters():
    cfg = parse_config(BASE)
    assert cfg.with_overrides({"run.seed": "5"}).config_hash() == cfg.config_hash()
    assert cfg.with_overrides({"alpha_star": "0.2"}).config_hash() != cfg.config_hash()


@pytest.mark.parametrize("text,needle", [
    ("[target]\nname = gaussian\n[adapt]\ngamma = 0.4\n", "line 4: [adapt] gamma"),
    ("[target]\nname = nope\n", "unknown target"),
    ("[target]\nname = gaussian\n[adapt]\nbogus = 1\n", "[adapt] bogus: unknown key"),
    ("[target]\nname = gaussian\n[weird]\n", "unknown section"),
    ("[target]\nname = gaussian\n[proposal]\nprofile = cauchy\n", "[proposal] profile"),
    ("[target]\nname = gaussian\n[run]\nseed = -1\n", "64-bit"),
    ("[target]\nname = gaussian\n[run]\nfunctionals = x9\n", "unknown functional"),
    ("[target]\nname = gaussian\n[restriction]\nkind = fixed(2, 1)\n", "a1 <= a2"),
    ("[adapt]\nn_steps = 5\n", "missing [target]"),
    ("[target]\nname = gaussian\ndim = 2\n[adapt]\nx0 = 1\n", "expected 2 values"),
])
def test_errors_name_line_and_key(text, needle):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert needle in str(exc.value)


def test_builtin_targets_from_config():
    ep = parse_config("[target]\nname = exponential_power\npower = 3\nscale = 2\n").build_target()
    assert isinstance(ep, ExponentialPower) and ep.power == 3.0 and ep.scale == 2.0
    ball = parse_config("[target]\nname = uniform_ball\ndim = 3\nradius = 2\n").build_target()
    assert isinstance(ball, UniformBall) and ball.dim == 3


def test_sweep_axes():
    cfg = parse_config("[target]\nname = gaussian\n[sweep]\nalpha_star = 0.1, 0.2\n"
                       "target.dim = 1, 2\n")
    assert cfg.sweep == (("adapt.alpha_star", ("0.1", "0.2")), ("target.dim", ("1", "2")))
    with pytest.raises(ConfigError):
        parse_config("[target]\nname = gaussian\n[sweep]\nrun.seed = 1, 2\n")


def test_shipped_configs_parse():
    for path in CONFIGS.glob("*.ini"):
        cfg = load_config(path)
        assert cfg.build_target().dim == cfg.target.dim


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/run.ini")


def test_parse_call():
    assert parse_call("student(1.5)") == ("student", ["1.5"])
    assert parse_call("exp") == ("exp", [])
    with pytest.raises(ValueError):
        parse_call("1bad(")


@settings(max_examples=40, deadline=None)
@given(a=st.floats(0.01, 0.99), g=st.floats(0.501, 1.0), c=st.floats(1e-3, 10.0),
       n=st.integers(1, 10 ** 7), seed=st.integers(0, 2 ** 64 - 1),
       thin=st.integers(1, 100))
def test_round_trip_property(a, g, c, n, seed, thin):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        cfg = parse_config("[target]\nname = gaussian\n").with_overrides(
            {"adapt.alpha_star": repr(a), "adapt.gamma": repr(g), "adapt.c": repr(c),
             "adapt.n_steps": str(n), "run.seed": str(seed), "output.thin": str(thin)})
        assert parse_config(cfg.to_text()) == cfg
    assert isinstance(cfg, RunConfig)
