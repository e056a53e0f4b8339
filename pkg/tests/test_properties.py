"""Property-based checks of the algorithmic invariants."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from asmcmc.adapt import AdaptConfig, Fixed, PolyGrowth, StepSchedule, run_asm_trace, run_coupled
from asmcmc.kernel import log_offdiag_density
from asmcmc.proposal import ProposalModel
from asmcmc.rng import ChainStream
from asmcmc.targets import ExponentialPower, Gaussian, UniformBall

seeds = st.integers(min_value=0, max_value=2 ** 63)
alphas = st.floats(min_value=0.05, max_value=0.45)
gammas = st.floats(min_value=0.51, max_value=1.0)
cs = st.floats(min_value=0.05, max_value=5.0)
coords = st.floats(min_value=-4.0, max_value=4.0)
svals = st.floats(min_value=-3.0, max_value=3.0)


@settings(max_examples=40, deadline=None)
@given(seed=seeds, a=alphas, g=gammas, c=cs, binary=st.booleans())
def test_increments_bounded(seed, a, g, c, binary):
    cfg = AdaptConfig(a, StepSchedule(c, g), n_steps=500, binary=binary)
    t, m = Gaussian([0.0]), ProposalModel.gaussian(1)
    _, tr = run_asm_trace(t, m, cfg, ChainStream(seed))
    prev = np.concatenate([[cfg.initial_state(t, m).s], tr.s[:-1]])
    slack = np.spacing(np.maximum(np.abs(prev), np.abs(tr.s)))
    assert np.all(np.abs(tr.s - prev) <= tr.eta * max(a, 1 - a) + slack)


@settings(max_examples=40, deadline=None)
@given(x=st.tuples(coords, coords), y=st.tuples(coords, coords), s=svals,
       which=st.sampled_from(["gauss", "student"]))
def test_detailed_balance(x, y, s, which):
    t = Gaussian([0.2, -0.1], [[1.0, 0.4], [0.4, 1.5]])
    m = ProposalModel.gaussian(2) if which == "gauss" else ProposalModel.student(1.2, 2)
    lhs = log_offdiag_density(t, m, s, np.array(x), np.array(y))
    rhs = log_offdiag_density(t, m, s, np.array(y), np.array(x))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


@settings(max_examples=30, deadline=None)
@given(z=st.lists(coords, min_size=3, max_size=3), s=svals, g=st.floats(0.2, 5.0))
def test_proposal_symmetric(z, s, g):
    m = ProposalModel.student(g, 3, np.diag([1.0, 2.0, 0.5]))
    z = np.array(z)
    assert m.log_density(s, z) == m.log_density(s, -z)


@settings(max_examples=25, deadline=None)
@given(seed=seeds, lo=st.floats(-1.0, 1.0), width=st.floats(0.0, 1.5))
def test_truncation_stays_in_set(seed, lo, width):
    r = Fixed(lo, lo + width)
    cfg = AdaptConfig(0.234, n_steps=400, s0=lo + 0.5 * width)
    _, tr = run_asm_trace(UniformBall([0.0, 0.0], 1.0), ProposalModel.gaussian(2), cfg,
                          ChainStream(seed), restriction=r)
    assert np.all((tr.s >= lo) & (tr.s <= lo + width))


@settings(max_examples=25, deadline=None)
@given(seed=seeds, t1=st.floats(0.2, 1.0), t2=st.floats(1.0, 6.0), beta=st.floats(0.0, 0.5))
def test_coupling_identical_until_first_violation(seed, t1, t2, beta):
    r = PolyGrowth(t1, t2, beta)
    cfg = AdaptConfig(0.234, n_steps=600, s0=math.log(math.sqrt(t1 * t2)))
    rep = run_coupled(ExponentialPower(4.0, 1.0, 1), ProposalModel.gaussian(1), cfg, r,
                      ChainStream(seed))
    assert rep.passed


@settings(max_examples=30, deadline=None)
@given(seed=seeds, k=st.integers(1, 50))
def test_streams_depend_only_on_seed_and_replica(seed, k):
    a = ChainStream(seed, k)
    b = ChainStream(seed, k)
    assert np.array_equal(a.normals(4, 2), b.normals(4, 2))
    assert np.array_equal(a.uniforms(3), b.uniforms(3))
    assert not np.array_equal(ChainStream(seed, k).uniforms(3), ChainStream(seed, k + 1).uniforms(3))


@settings(max_examples=30, deadline=None)
@given(c=cs, g=gammas, start=st.integers(2, 10_000))
def test_gains_positive_decreasing(c, g, start):
    e = StepSchedule(c, g).etas(start, 100)
    assert np.all(e > 0) and np.all(np.diff(e) < 0)
