import numpy as np
import pytest

from pycomposite.models.dynamics import canonical_field
from pycomposite.models.integrator import IntegratorOptions, simulate
from pycomposite.models.numeric import central_difference, relative_error
from pycomposite.models.oracles import (
    Family,
    ThreeOscParams,
    TwoOscConstants,
    TwoOscParams,
    mode_count,
    oscillator_state,
    three_osc_constrained_state,
    two_osc_constrained_constants,
    two_osc_match,
    two_osc_state,
)


def test_two_oscillator_state_examples():
    params = TwoOscParams()

    s = two_osc_state(params, TwoOscConstants(c2=1.0), 0.0)
    np.testing.assert_allclose(
        s.to_vector(), [0.5, 0.0, 1.0, 0.0, 0.0, 0.0], atol=1e-15
    )

    s = two_osc_state(params, TwoOscConstants(cbar=1.0), 0.0)
    np.testing.assert_allclose(s.qbar, [-0.25])
    np.testing.assert_allclose(s.q, [0.0, -0.5])
    np.testing.assert_allclose(s.p, [0.0, -0.5])
    np.testing.assert_allclose(s.pbar, [1.0])


@pytest.mark.parametrize(
    "params",
    [
        TwoOscParams(),
        TwoOscParams(m=1.5, h1=0.5, h2=2.0, lam=0.7),
        TwoOscParams(lam=-1.2),
    ],
)
def test_two_oscillator_closed_form_solves_the_canonical_equations(params, rng):
    model, rule = params.model(), params.rule()

    for _ in range(20):
        consts = TwoOscConstants(*rng.uniform(-1, 1, 6))
        t = float(rng.uniform(0, 3))
        derivative = central_difference(
            lambda x: two_osc_state(params, consts, x[0]).to_vector(), np.array([t])
        )[:, 0]
        field = canonical_field(model, rule, two_osc_state(params, consts, t))
        assert relative_error(field.to_vector(), derivative) <= 1e-6


def test_two_oscillator_match():
    params = TwoOscParams()
    assert two_osc_match(params, 1.0, 0.0) == pytest.approx((0.5, 0.5))
    assert two_osc_match(params, 0.0, 0.0) == (0.0, 0.0)


def test_matched_constants_keep_the_primary_constraint():
    params = TwoOscParams(m=2.0, h1=0.5, h2=0.5, lam=1.3)
    consts = two_osc_constrained_constants(params, 0.8, -0.3)

    for t in np.linspace(0.0, 20.0, 50):
        s = two_osc_state(params, consts, t)
        assert abs(s.q[0] - s.qbar[0]) <= 1e-12


def test_three_oscillator_state_at_start():
    s = three_osc_constrained_state(ThreeOscParams(), 1.0, 0.0, 1.0, 0.0, 0.0)
    np.testing.assert_allclose(s.q, [1.0, 1.0, 1.0])
    np.testing.assert_allclose(s.qbar, [1.0, 1.0])
    assert not np.any(s.pbar)

    zero = three_osc_constrained_state(ThreeOscParams(), 0.0, 0.0, 0.0, 0.0, 2.0)
    assert not np.any(zero.to_vector())


def test_three_oscillator_state_follows_the_flow():
    params = ThreeOscParams(m=1.2, h=0.8, lam=0.6)
    c = (0.3, -0.5, 0.7, 0.2)
    s0 = three_osc_constrained_state(params, *c, 1.0)

    opts = IntegratorOptions(t_span=(1.0, 1.1))
    traj = simulate(params.model(), params.rule(), s0, opts)

    expected = three_osc_constrained_state(params, *c, 1.1).to_vector()
    np.testing.assert_allclose(traj.final.to_vector(), expected, atol=1e-8)


def test_oscillator_state():
    q, p = oscillator_state(1.0, 1.0, 1.0, 0.0, 10.0)
    assert q == pytest.approx(np.cos(10.0))
    assert p == pytest.approx(-np.sin(10.0))

    q, p = oscillator_state(4.0, 1.0, 0.0, 2.0, 0.0)
    assert (q, p) == pytest.approx((0.0, 4.0))


def test_mode_count():
    assert mode_count(Family.TWO_OSC, TwoOscParams(h1=1.0, h2=1.0)) == 2
    assert mode_count(Family.TWO_OSC, TwoOscParams(h1=1.0, h2=2.0)) == 0
    assert mode_count(Family.THREE_OSC, ThreeOscParams()) == 4
    assert mode_count("three_osc", ThreeOscParams()) == 4


@pytest.mark.parametrize(
    "kwargs", [{"m": 0.0}, {"lam": 0.0}, {"h1": -1.0}]
)
def test_invalid_two_oscillator_params(kwargs):
    with pytest.raises(ValueError):
        TwoOscParams(**kwargs)
