import numpy as np
import pytest

from asmcmc import _core
from asmcmc.adapt import AdaptConfig, Fixed, StepSchedule, run_asm_trace
from asmcmc.kernel import advance
from asmcmc.proposal import ProposalModel, ScalingFunction
from asmcmc.rng import ChainStream
from asmcmc.targets import ExponentialPower, Gaussian, SmoothBump, UniformBall, UniformBox

needs_compiled = pytest.mark.skipif(_core.compiled_backend is None,
                                    reason="compiled kernel not built")

TARGETS = [Gaussian([0.3]), Gaussian([0.0, 1.0], [[1.0, 0.5], [0.5, 2.0]]),
           ExponentialPower(4.0, 1.0, 1), ExponentialPower(3.0, 0.5, 3),
           UniformBall([0.0, 0.0, 0.0], 1.0), UniformBox([0.0, -1.0], [1.0, 1.0]),
           SmoothBump([0.0, 0.0], 1.0, 0.1)]


def _blocks(model, seed, n):
    st = ChainStream(seed)
    return model.unit_increments(st, n), st.uniforms(n)


@needs_compiled
@pytest.mark.parametrize("target", TARGETS, ids=lambda t: f"{t.name}-{t.dim}")
@pytest.mark.parametrize("scaling", [ScalingFunction(), ScalingFunction("softplus_power", 2.0)],
                         ids=["exp", "softplus"])
def test_backends_bit_identical(target, scaling):
    m = ProposalModel(None, None, scaling, target.dim)
    W, U = _blocks(m, 1, 3000)
    eta = StepSchedule(1.0, 0.66).etas(2, 3000)
    lo, hi = Fixed(-2.0, 2.5).bounds(2, 3000)
    for kwargs in ({}, {"eta": eta, "alpha_star": 0.234},
                   {"eta": eta, "alpha_star": 0.1, "binary": True},
                   {"eta": eta, "alpha_star": 0.234, "lo": lo, "hi": hi}):
        a = advance(target, m, target.mode, 0.1, W, U, backend="compiled", **kwargs)
        b = advance(target, m, target.mode, 0.1, W, U, backend="python", **kwargs)
        assert a[1] == b[1]
        for u, v in zip(a[2:], b[2:]):
            assert np.array_equal(u, v)


@needs_compiled
def test_full_run_identical_across_backends():
    cfg = AdaptConfig(0.234, n_steps=20_000)
    t, m = Gaussian([0.0]), ProposalModel.gaussian(1)
    a = run_asm_trace(t, m, cfg, ChainStream(8), backend="compiled")[1]
    b = run_asm_trace(t, m, cfg, ChainStream(8), backend="python")[1]
    assert np.array_equal(a.s, b.s) and np.array_equal(a.x, b.x)


def test_python_logpdf_matches_numpy():
    rng = np.random.default_rng(0)
    for t in TARGETS:
        X = t.sample(50, rng)
        ref = t.log_density_batch(X)
        got = np.array([t.log_density(x) for x in X])
        np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        _core.get_backend("fortran")
    assert _core.get_backend("python") is _core.python_backend


@needs_compiled
def test_benchmark_script_runs():
    import subprocess
    import sys
    from pathlib import Path

    script = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_backends.py"
    res = subprocess.run([sys.executable, str(script), "--steps", "2000", "--repeat", "1"],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "False" not in res.stdout
