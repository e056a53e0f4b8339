import math
import warnings

import numpy as np
import pytest
from scipy.special import zeta

from asmcmc.adapt import (AdaptConfig, AdaptState, AmAsmConfig, Fixed, PolyGrowth, StepSchedule,
                          TraceRecorder, asm_step, clamped_shape, default_initial_s, run_am_asm,
                          run_asm, run_asm_trace, run_coupled, truncated_step)
from asmcmc.errors import ConfigError, InvariantViolation, SinkError
from asmcmc.proposal import ProposalModel, ScalingFunction
from asmcmc.rng import ChainStream
from asmcmc.targets import ExponentialPower, Gaussian, UniformBall

G1 = Gaussian([0.0])
M1 = ProposalModel.gaussian(1)


def test_schedule_values_and_validation():
    sch = StepSchedule(2.0, 0.75)
    np.testing.assert_allclose(sch.etas(2, 3), 2.0 * np.array([2.0, 3.0, 4.0]) ** -0.75)
    assert sch.sum_squares_bound() == pytest.approx(4.0 * (zeta(1.5) - 1.0))
    with pytest.raises(ConfigError):
        StepSchedule(1.0, 0.5)
    with pytest.raises(ConfigError):
        StepSchedule(1.0, 1.2)
    assert not StepSchedule(1.0, 1.2, permissive=True).in_theorem_range
    with pytest.raises(ConfigError):
        StepSchedule(0.0, 0.7)


def test_default_initial_scale():
    assert math.exp(default_initial_s(ScalingFunction(), 4)) == pytest.approx(2.38 / 2)


def test_alpha_star_above_half_warns():
    with pytest.warns(UserWarning):
        cfg = AdaptConfig(0.6)
    assert not cfg.theory_safe


def test_asm_step_update_rule():
    cfg = AdaptConfig(0.234, StepSchedule(1.0, 0.66))
    st = AdaptState(np.zeros(1), 0.5, 1)
    new, out = asm_step(G1, M1, st, cfg, ChainStream(3))
    assert new.n == 2
    assert new.s == pytest.approx(0.5 + 2.0 ** -0.66 * (out.alpha - 0.234), abs=1e-15)


def test_binary_adaptation_uses_indicator():
    cfg = AdaptConfig(0.234, binary=True)
    new, out = asm_step(G1, M1, AdaptState(np.zeros(1), 0.5, 1), cfg, ChainStream(3))
    h = (1.0 if out.accepted else 0.0) - 0.234
    assert new.s == pytest.approx(0.5 + cfg.schedule.eta(2) * h, abs=1e-15)


def test_stepwise_and_block_runs_agree():
    cfg = AdaptConfig(0.3, StepSchedule(1.0, 0.7), n_steps=300)
    summ, tr = run_asm_trace(Gaussian([0.0, 0.0]), ProposalModel.gaussian(2), cfg, ChainStream(9))
    st = cfg.initial_state(Gaussian([0.0, 0.0]), ProposalModel.gaussian(2))
    rng = ChainStream(9)
    S = []
    for _ in range(300):
        st, _ = asm_step(Gaussian([0.0, 0.0]), ProposalModel.gaussian(2), st, cfg, rng)
        S.append(st.s)
    np.testing.assert_array_equal(tr.s, S)
    np.testing.assert_array_equal(tr.n, np.arange(2, 302))
    assert summ.final_s == S[-1]


def test_run_is_reproducible_and_block_size_invariant():
    cfg = AdaptConfig(0.234, n_steps=5000)
    a = run_asm_trace(G1, M1, cfg, ChainStream(1))[1]
    b = run_asm_trace(G1, M1, cfg, ChainStream(1), block=777)[1]
    np.testing.assert_array_equal(a.s, b.s)
    np.testing.assert_array_equal(a.x, b.x)


def test_gaussian_run_reaches_target_rate():
    summ = run_asm(G1, M1, AdaptConfig(0.234, n_steps=200_000), ChainStream(12))
    assert summ.acceptance_rate_last_half == pytest.approx(0.234, abs=0.02)
    assert summ.final_theta == pytest.approx(5.1939, rel=0.15)
    assert summ.max_increment_ratio <= 1.0 + 1e-9


def test_restriction_sets():
    f = Fixed(-1.0, 2.0)
    assert f.contains(5, 0.0) and not f.contains(5, 2.5)
    p = PolyGrowth(0.5, 2.0, 0.1)
    lo, hi = p.bounds(1, 100)
    assert np.all(lo == math.log(0.5))
    assert np.all(np.diff(hi) > 0)
    assert hi[-1] == pytest.approx(math.log(2.0 * 100 ** 0.1))
    with pytest.raises(ConfigError):
        Fixed(1.0, 0.0)


def test_truncated_step_keeps_old_value_outside():
    r = Fixed(0.0, 0.5)
    cfg = AdaptConfig(0.01)  # alpha > alpha* pushes s upwards
    st = AdaptState(np.zeros(1), 0.5, 1)
    new, _ = truncated_step(G1, M1, st, cfg, ChainStream(0), r)
    assert new.s == 0.5
    with pytest.raises(InvariantViolation):
        truncated_step(G1, M1, AdaptState(np.zeros(1), 0.9, 1), cfg, ChainStream(0), r)


def test_truncated_run_stays_in_restriction():
    r = PolyGrowth(0.5, 3.0, 0.1)
    _, tr = run_asm_trace(G1, M1, AdaptConfig(0.234, n_steps=20_000), ChainStream(4), restriction=r)
    lo, hi = r.bounds(2, 20_000)
    assert np.all((lo <= tr.s) & (tr.s <= hi))


def test_coupling_prefix_identity():
    r = Fixed(0.5, 1.2)
    rep = run_coupled(G1, M1, AdaptConfig(0.234, n_steps=10_000), r, ChainStream(7))
    assert rep.passed
    assert rep.divergence_index == rep.first_violation < math.inf
    wide = run_coupled(G1, M1, AdaptConfig(0.234, n_steps=10_000), Fixed(-9, 9), ChainStream(7))
    assert wide.divergence_index == math.inf and wide.passed


def test_recorder_thinning_and_sink_errors():
    rec = TraceRecorder(thin=10)
    run_asm(G1, M1, AdaptConfig(n_steps=100), ChainStream(0), sinks=[rec])
    assert list(rec.trace().n) == list(range(11, 102, 10))

    def broken(block):
        raise OSError("disk full")

    with pytest.raises(SinkError):
        run_asm(G1, M1, AdaptConfig(n_steps=100), ChainStream(0), sinks=[broken])


def test_functional_averages_in_summary():
    summ = run_asm(ExponentialPower(4.0, 1.0, 1), M1, AdaptConfig(n_steps=100_000), ChainStream(2),
                   functionals={"x2": lambda X: X[:, 0] ** 2})
    assert summ.averages["x2"] == pytest.approx(0.33799, abs=0.02)


def test_clamped_shape():
    # eigenvalues of the square root are clipped: sqrt(9) -> 2, sqrt(1e-4) -> 0.1
    cov = np.array([[9.0, 0.0], [0.0, 1e-4]])
    sh = clamped_shape(cov, 0.1, 2.0)
    np.testing.assert_allclose(sh, np.diag([2.0, 0.1]), rtol=1e-12)
    inner = np.array([[1.0, 0.5], [0.5, 1.0]])
    np.testing.assert_allclose(clamped_shape(inner, 0.1, 2.0) @ clamped_shape(inner, 0.1, 2.0),
                               inner, rtol=1e-12)
    np.testing.assert_array_equal(clamped_shape(cov, 1.5, 1.5), 1.5 * np.eye(2))


def test_am_within_asm_learns_correlation():
    t = Gaussian([0.0, 0.0], [[1.0, 0.9], [0.9, 1.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        st, tr = run_am_asm(t, ProposalModel.gaussian(2),
                            AmAsmConfig(AdaptConfig(0.234, n_steps=20_000), 0.05, 20.0),
                            ChainStream(5))
    cov = st.shape @ st.shape
    assert cov[0, 1] / math.sqrt(cov[0, 0] * cov[1, 1]) == pytest.approx(0.9, abs=0.1)
    assert len(tr) == 20_000


def test_am_config_validation():
    with pytest.raises(ConfigError):
        AmAsmConfig(AdaptConfig(), 2.0, 1.0)
    with pytest.raises(ConfigError):
        AmAsmConfig(AdaptConfig(), weighting="bogus")


def test_initial_state_falls_back_to_mode():
    cfg = AdaptConfig(x0=[5.0])
    st = cfg.initial_state(UniformBall(0.0, 1.0, dim=1), M1)
    assert st.x[0] == 0.0
