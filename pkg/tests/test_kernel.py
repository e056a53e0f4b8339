import math

import numpy as np
import pytest
from scipy import integrate, optimize, stats

from asmcmc.adapt import StepSchedule
from asmcmc.errors import ConfigError, InvalidStateError, UnsupportedDimensionError
from asmcmc.kernel import (acceptance_prob, advance, expected_acc_at, expected_acc_quadrature,
                           mean_acc, mean_acc_quadrature, metropolis_step, run_fixed_scale)
from asmcmc.proposal import ProposalModel
from asmcmc.rng import ChainStream
from asmcmc.targets import CustomTarget, Gaussian, UniformBall, UniformBox


def gaussian_mean_acc(theta):
    # 1-d standard normal target, normal increments of sd theta
    return 2.0 / math.pi * math.atan(2.0 / theta)


def test_acceptance_prob_is_ratio():
    t = Gaussian([0.0])
    assert acceptance_prob(t, [1.0], [0.5]) == 1.0
    assert acceptance_prob(t, [0.5], [1.0]) == pytest.approx(math.exp(-0.5 * (1.0 - 0.25)))
    assert acceptance_prob(UniformBall(0.0, 1.0, dim=1), [0.0], [2.0]) == 0.0


def test_metropolis_step_consumes_one_draw_each():
    st = ChainStream(5)
    out = metropolis_step(Gaussian([0.0]), ProposalModel.gaussian(1), 0.0, [0.0], st)
    assert st.position == (1, 1)
    assert out.next_x.shape == (1,)
    assert (out.next_x == out.y).all() == out.accepted


def test_metropolis_step_rejects_outside_support():
    with pytest.raises(InvalidStateError):
        metropolis_step(UniformBall(0.0, 1.0, dim=1), ProposalModel.gaussian(1), 0.0, [3.0],
                        ChainStream(0))


@pytest.mark.parametrize("theta", [0.1, 1.0, 3.0])
def test_quadrature_acc_at_mode(theta):
    # [DERIVED] at x = 0: E exp(-Y^2/2) with Y ~ N(0, theta^2) = 1/sqrt(1 + theta^2)
    v = expected_acc_quadrature(Gaussian([0.0]), ProposalModel.gaussian(1), [0.0], math.log(theta))
    assert v == pytest.approx(1.0 / math.sqrt(1.0 + theta * theta), abs=1e-9)


def test_quadrature_acc_box_centre():
    # [DERIVED] uniform box, x = 0.5, theta = 0.5: P(|Z| <= 1) = 0.682689...
    v = expected_acc_quadrature(UniformBox(0.0, 1.0), ProposalModel.gaussian(1), [0.5],
                                math.log(0.5))
    assert v == pytest.approx(2 * stats.norm.cdf(1.0) - 1.0, abs=1e-9)
    assert v == pytest.approx(0.6826894921370859, abs=1e-12)


def test_quadrature_limited_to_two_dims():
    with pytest.raises(UnsupportedDimensionError):
        expected_acc_quadrature(Gaussian([0.0] * 3), ProposalModel.gaussian(3), [0.0] * 3, 0.0)


def test_mean_acc_quadrature_gaussian():
    # [DERIVED] (2/pi) atan(2/theta); at theta = 2.4 this is 0.4422841...
    v = mean_acc_quadrature(Gaussian([0.0]), ProposalModel.gaussian(1), math.log(2.4))
    assert v == pytest.approx(gaussian_mean_acc(2.4), abs=1e-9)
    assert v == pytest.approx(0.4422841, abs=1e-7)


def test_optimal_gaussian_scale_oracle():
    # [DERIVED] theta* solving (2/pi) atan(2/theta) = 0.234
    theta_star = optimize.brentq(lambda t: gaussian_mean_acc(t) - 0.234, 0.1, 100.0)
    assert theta_star == pytest.approx(5.1939, abs=1e-4)
    assert math.log(theta_star) == pytest.approx(1.64749, abs=1e-5)


def test_mean_acc_uniform_interval_oracle():
    # [DERIVED] uniform [0,1]: acc(theta) = E max(0, 1 - theta |Z|), computed directly
    def direct(theta):
        v, _ = integrate.quad(lambda z: 2 * (1 - theta * z) * stats.norm.pdf(z), 0, 1 / theta)
        return v

    t = UniformBox(0.0, 1.0)
    for theta in (0.3, 1.65484, 4.0):
        assert mean_acc_quadrature(t, ProposalModel.gaussian(1), math.log(theta)) == \
            pytest.approx(direct(theta), abs=1e-8)
    assert direct(1.65484) == pytest.approx(0.234, abs=1e-5)


def test_mc_acc_agrees_with_quadrature():
    t = Gaussian([0.5, -0.5], [[1.0, 0.6], [0.6, 2.0]])
    m = ProposalModel.student(1.0, 2)
    x = np.array([1.0, 0.3])
    q = expected_acc_quadrature(t, m, x, 0.2)
    est, se = expected_acc_at(t, m, x, 0.2, 50_000, 0)
    assert abs(est - q) <= 4 * se


def test_mean_acc_mc_and_missing_sampler():
    est, se = mean_acc(Gaussian([0.0]), ProposalModel.gaussian(1), math.log(2.4), 4000, 64, 1)
    assert abs(est - gaussian_mean_acc(2.4)) <= 4 * se
    t = CustomTarget(1, lambda x: -0.5 * float(x[0]) ** 2)
    with pytest.raises(ConfigError):
        mean_acc(t, ProposalModel.gaussian(1), 0.0, 10, 10, 0)


def test_fixed_scale_chain_moments():
    chain = run_fixed_scale(Gaussian([0.0]), ProposalModel.gaussian(1), math.log(2.4), [0.0],
                            200_000, ChainStream(11))
    assert chain.x.shape == (200_000, 1)
    assert np.mean(chain.x[:, 0] ** 2) == pytest.approx(1.0, abs=0.05)
    assert np.mean(chain.accepted) == pytest.approx(gaussian_mean_acc(2.4), abs=0.01)


def test_custom_target_runs_python_kernel():
    custom = CustomTarget(1, lambda x: -0.5 * float(x[0]) ** 2)
    builtin = Gaussian([0.0])
    m = ProposalModel.gaussian(1)
    st = ChainStream(2)
    W = m.unit_increments(st, 500)
    U = st.uniforms(500)
    eta = StepSchedule().etas(2, 500)
    a = advance(custom, m, [0.0], 0.5, W, U, eta, 0.234)
    b = advance(builtin, m, [0.0], 0.5, W, U, eta, 0.234)
    # same chain up to the additive constant of the log-density
    assert np.array_equal(a[3], b[3]) or np.max(np.abs(a[3] - b[3])) < 1e-12
    assert np.array_equal(a[5], b[5])


def test_advance_fixed_scale_keeps_s():
    m = ProposalModel.gaussian(1)
    st = ChainStream(0)
    W = m.unit_increments(st, 100)
    U = st.uniforms(100)
    x, s, X, S, A, ACC = advance(Gaussian([0.0]), m, [0.0], 0.3, W, U)
    assert s == 0.3 and np.all(S == 0.3)
    assert np.all((A >= 0) & (A <= 1))
