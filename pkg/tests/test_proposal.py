import math

import numpy as np
import pytest
from scipy import stats

from asmcmc.errors import DimensionError
from asmcmc.proposal import (ProposalModel, RadialProfile, ScalingFunction, ShapeMatrix,
                             check_profile_derivative_conditions)
from asmcmc.rng import ChainStream


def test_gaussian_proposal_density_matches_scipy():
    sigma = np.array([[1.0, 0.3], [0.3, 2.0]])
    m = ProposalModel.gaussian(2, sigma)
    s = 0.4
    theta = math.exp(s)
    Z = np.random.default_rng(0).standard_normal((40, 2))
    ref = stats.multivariate_normal(np.zeros(2), theta ** 2 * sigma @ sigma.T).logpdf(Z)
    np.testing.assert_allclose(m.log_density_batch(s, Z), ref, rtol=1e-11)


@pytest.mark.parametrize("gamma,dim", [(1.0, 1), (0.7, 2), (2.5, 3)])
def test_student_proposal_density_matches_scipy(gamma, dim):
    # u = g / sqrt(chi2_{2 gamma}) is a multivariate t with 2 gamma dof scaled by 1/sqrt(2 gamma)
    m = ProposalModel.student(gamma, dim)
    s = -0.3
    theta = math.exp(s)
    nu = 2.0 * gamma
    Z = np.random.default_rng(1).standard_normal((40, dim)) * 2.0
    ref = stats.multivariate_t(np.zeros(dim), theta ** 2 / nu * np.eye(dim), df=nu).logpdf(Z)
    np.testing.assert_allclose(m.log_density_batch(s, Z), ref, rtol=1e-9)


def test_radial_quantile_matches_chi():
    for d in (1, 2, 5):
        prof = RadialProfile.gaussian(d)
        for p in (0.05, 0.117, 0.5):
            assert prof.radial_quantile(p) == pytest.approx(stats.chi(d).ppf(p), abs=1e-6)


def test_student_draws_have_the_declared_law():
    m = ProposalModel.student(1.0, 1)
    W = m.unit_increments(ChainStream(3), 100_000)[:, 0]
    nu = 2.0
    ks = stats.kstest(W * math.sqrt(nu), stats.t(df=nu).cdf)
    assert ks.pvalue > 1e-3


def test_shape_matrix_validation():
    with pytest.raises(ValueError):
        ShapeMatrix([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError):
        ShapeMatrix([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DimensionError):
        ShapeMatrix(np.ones((2, 3)))
    sh = ShapeMatrix([[2.0, 0.5], [0.5, 1.0]])
    assert sh.kappa == pytest.approx(np.linalg.eigvalsh(sh.matrix)[0])


def test_apply_rows_is_rowwise_stable():
    sh = ShapeMatrix([[2.0, 0.5, 0.1], [0.5, 1.0, 0.2], [0.1, 0.2, 3.0]])
    U = np.random.default_rng(4).standard_normal((257, 3))
    block = sh.apply_rows(U)
    single = np.vstack([sh.apply_rows(U[i:i + 1]) for i in range(len(U))])
    assert np.array_equal(block, single)
    np.testing.assert_allclose(block, U @ sh.matrix.T, rtol=1e-14)


@pytest.mark.parametrize("kind,power", [("exp", 1.0), ("softplus_power", 1.0), ("softplus_power", 2.5)])
def test_scaling_inverse_roundtrip(kind, power):
    f = ScalingFunction(kind, power)
    s = np.linspace(-5, 5, 21)
    np.testing.assert_allclose(f.inverse(f.evaluate(s)), s, atol=1e-10)
    assert np.all(np.diff(f.evaluate(s)) > 0)
    assert f(1.3) == pytest.approx(float(f.evaluate(1.3)), rel=1e-15)


@pytest.mark.parametrize("kind,power", [("exp", 1.0), ("softplus_power", 2.0)])
def test_scaling_growth_condition(kind, power):
    assert ScalingFunction(kind, power).check_growth(np.linspace(-10, 10, 41)).passed


def test_scaling_rejects_bad_input():
    with pytest.raises(ValueError):
        ScalingFunction("cube")
    with pytest.raises(ValueError):
        ScalingFunction("softplus_power", 0.5)


@pytest.mark.parametrize("profile", [RadialProfile.gaussian(1), RadialProfile.student(1.0, 1)])
def test_profile_derivative_conditions(profile):
    rep = check_profile_derivative_conditions(profile)
    assert rep.passed
    assert rep.fitted["c1"] > 0


def test_profile_derivative_matches_finite_difference():
    for prof in (RadialProfile.gaussian(2), RadialProfile.student(0.8, 2)):
        r = np.linspace(0.1, 4.0, 9)
        h = 1e-6
        fd = (prof.value(r + h) - prof.value(r - h)) / (2 * h)
        np.testing.assert_allclose(prof.derivative(r), fd, rtol=1e-6, atol=1e-10)


def test_model_dimension_checks():
    with pytest.raises(DimensionError):
        ProposalModel(RadialProfile.gaussian(2), ShapeMatrix.identity(3))
    with pytest.raises(DimensionError):
        ProposalModel.gaussian(2).log_density(0.0, [1.0])
