import numpy as np
import pytest

from pycomposite.models.constraints import (
    chain_matrix,
    constraint_closure_nullity,
    drift_report,
    example_chain_residual,
    pbar_residual,
    primary_residual,
    project_initial,
    secondary_residual,
    state_report,
)
from pycomposite.models.dynamics import PhaseState
from pycomposite.models.integrator import IntegratorOptions, simulate
from pycomposite.models.model import DimensionMismatch, compose
from pycomposite.models.oracles import (
    Family,
    ThreeOscParams,
    TwoOscConstants,
    TwoOscParams,
    mode_count,
    three_osc_constrained_state,
    two_osc_constrained_constants,
    two_osc_state,
)
from pycomposite.models.trajectory import Trajectory

from .conftest import random_rule, random_workhorse


def test_primary_residual_examples():
    rule = TwoOscParams().rule()

    np.testing.assert_allclose(primary_residual(rule, [0.7], [0.7, -3.0]), [0.0, 0.0])
    np.testing.assert_allclose(primary_residual(rule, [0.5], [0.7, 0.2]), [0.2, 0.0])


def test_primary_residual_vanishes_on_composed_points(rng):
    rule = random_rule(rng, 4, 2)
    qbar, v = rng.uniform(-1, 1, (2, 2))
    q = compose(rule, qbar, v)
    np.testing.assert_allclose(primary_residual(rule, qbar, q), np.zeros(4), atol=1e-12)


def test_secondary_residual_examples():
    params = TwoOscParams()
    model, rule = params.model(), params.rule()

    s = PhaseState(0.0, [1.0], [1.0, 1.0], [0.0], [0.5, 7.0])
    np.testing.assert_allclose(secondary_residual(model, rule, s), [0.5, 0.0])

    # p1 = (m / lam) (q2 - q1) with q1 = qbar1
    s = PhaseState(0.0, [0.3], [0.3, 1.1], [0.0], [0.8, -2.0])
    np.testing.assert_allclose(
        secondary_residual(model, rule, s), [0.0, 0.0], atol=1e-15
    )


def test_secondary_residual_at_rest():
    params = ThreeOscParams()
    rule = params.rule()
    qbar = np.array([0.4, -0.2])
    s = PhaseState(0.0, qbar, rule.alpha(qbar), [0.0, 0.0], [0.0, 0.0, 0.0])
    assert not np.any(secondary_residual(params.model(), rule, s))


def test_pbar_residual():
    zero = [0.0, 0.0]
    assert pbar_residual(PhaseState(0.0, zero, zero, zero, zero)) == 0
    assert pbar_residual(
        PhaseState(0.0, [0.0, 0.0], [0.0, 0.0], [3.0, 4.0], [0.0, 0.0])
    ) == pytest.approx(5.0)


def test_project_initial():
    rule = TwoOscParams().rule()
    raw = PhaseState(0.0, [0.5], [0.7, 0.2], [0.1], [1.0, 2.0])

    projected = project_initial(rule, raw)
    np.testing.assert_allclose(projected.q, [0.5, 0.2])
    np.testing.assert_array_equal(projected.p, raw.p)
    np.testing.assert_array_equal(projected.pbar, raw.pbar)

    again = project_initial(rule, projected)
    np.testing.assert_array_equal(again.q, projected.q)

    zeroed = project_initial(rule, raw, zero_pbar=True)
    assert not np.any(zeroed.pbar)


def test_project_initial_keeps_surface_states(rng):
    rule = random_rule(rng, 5, 3)
    qbar, v = rng.uniform(-1, 1, (2, 3))
    raw = PhaseState(0.0, qbar, compose(rule, qbar, v), np.zeros(3), np.zeros(5))
    np.testing.assert_allclose(project_initial(rule, raw).q, raw.q, atol=1e-12)


def test_state_report_of_random_pair(rng):
    model, rule = random_workhorse(rng, 3), random_rule(rng, 3, 2)
    s = PhaseState(0.0, [0.1, 0.2], [0.3, 0.4, 0.5], [3.0, 4.0], [0.0, 0.0, 0.0])
    report = state_report(model, rule, s)
    assert report.max_pbar == pytest.approx(5.0)
    assert report.primary_norm.shape == (1,)


def test_two_oscillator_chain_from_the_closed_form():
    params = TwoOscParams()
    consts = two_osc_constrained_constants(params, 1.0, 0.0)
    assert (consts.c1, consts.c1p) == pytest.approx((0.5, 0.5))

    s = two_osc_state(params, consts, 0.0)
    assert np.max(np.abs(example_chain_residual(Family.TWO_OSC, params, s))) <= 1e-12


def test_chains_vanish_along_oracle_families(rng):
    two = TwoOscParams(m=1.3, h1=0.7, h2=0.7, lam=0.8)
    three = ThreeOscParams(m=0.9, h=1.4, lam=1.7)

    for t in np.linspace(0.0, 10.0, 50):
        c = rng.uniform(-1, 1, 4)
        s = two_osc_state(two, two_osc_constrained_constants(two, c[0], c[1]), t)
        residual = example_chain_residual(Family.TWO_OSC, two, s)
        assert np.max(np.abs(residual)) <= 1e-12

        s = three_osc_constrained_state(three, *c, t)
        residual = example_chain_residual(Family.THREE_OSC, three, s)
        assert np.max(np.abs(residual)) <= 1e-12


def test_chain_of_zero_state_is_zero():
    s = PhaseState(0.0, [0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0], [0.0, 0.0, 0.0])
    assert not np.any(example_chain_residual(Family.THREE_OSC, ThreeOscParams(), s))


def test_chain_rejects_wrong_dimensions():
    s = PhaseState(0.0, [0.0], [0.0, 0.0], [0.0], [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        example_chain_residual(Family.THREE_OSC, ThreeOscParams(), s)


def test_unequal_springs_leave_only_the_trivial_solution():
    params = TwoOscParams(h1=1.0, h2=2.0)
    assert np.linalg.matrix_rank(chain_matrix(Family.TWO_OSC, params)) == 4
    assert constraint_closure_nullity(params.model(), params.rule()) == 0


@pytest.mark.parametrize(
    "family, params",
    [
        (Family.TWO_OSC, TwoOscParams()),
        (Family.TWO_OSC, TwoOscParams(m=2.0, h1=3.0, h2=3.0, lam=0.5)),
        (Family.TWO_OSC, TwoOscParams(h1=1.0, h2=2.0)),
        (Family.THREE_OSC, ThreeOscParams()),
        (Family.THREE_OSC, ThreeOscParams(m=0.5, h=2.0, lam=1.5)),
    ],
)
def test_mode_count_matches_brute_force(family, params):
    assert constraint_closure_nullity(params.model(), params.rule()) == mode_count(
        family, params
    )


def test_constrained_run_keeps_every_constraint():
    params = TwoOscParams()
    s0 = two_osc_state(params, two_osc_constrained_constants(params, 1.0, 0.0), 0.0)
    opts = IntegratorOptions(t_span=(0.0, 10.0))
    traj = simulate(params.model(), params.rule(), s0, opts)

    report = traj.report
    assert report.max_primary <= 1e-7
    assert report.max_secondary <= 1e-7
    assert report.max_pbar <= 1e-7


@pytest.mark.parametrize(
    "family, params, start",
    [
        (
            Family.THREE_OSC,
            ThreeOscParams(),
            lambda p: three_osc_constrained_state(p, 1.0, 0.0, 1.0, 0.0, 0.0),
        ),
        (
            Family.TWO_OSC,
            TwoOscParams(),
            lambda p: two_osc_state(p, two_osc_constrained_constants(p, 1.0, 0.0), 0.0),
        ),
    ],
)
def test_canonical_flow_keeps_the_full_chain(family, params, start):
    opts = IntegratorOptions(t_span=(0.0, 10.0), sample_step=0.1)
    traj = simulate(params.model(), params.rule(), start(params), opts)

    assert traj.t[-1] == 10.0
    assert traj.report.max_primary <= 1e-7
    assert traj.report.max_secondary <= 1e-7
    assert traj.report.max_pbar <= 1e-7
    worst = max(
        np.max(np.abs(example_chain_residual(family, params, s))) for s in traj.samples
    )
    assert worst <= 1e-10


def test_unconstrained_run_grows_pbar():
    params = TwoOscParams()
    s0 = two_osc_state(params, TwoOscConstants(c2=1.0, cbar=1e-6), 0.0)
    traj = simulate(
        params.model(),
        params.rule(),
        s0,
        IntegratorOptions(t_span=(0.0, 10.0), sample_step=0.5),
    )

    np.testing.assert_allclose(traj.report.pbar_norm, 1e-6 * np.exp(traj.t), rtol=1e-6)


def test_drift_report_of_zero_trajectory():
    params = ThreeOscParams()
    zero = PhaseState(0.0, [0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0], [0.0, 0.0, 0.0])
    later = PhaseState(1.0, zero.qbar, zero.q, zero.pbar, zero.p)
    traj = Trajectory.from_states([zero, later])

    report = drift_report(params.model(), params.rule(), traj)
    assert report.summary() == {
        "primary_norm": 0.0,
        "secondary_norm": 0.0,
        "pbar_norm": 0.0,
    }
