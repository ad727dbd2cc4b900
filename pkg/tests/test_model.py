import numpy as np
import pytest

from pycomposite.models.model import (
    CompositionRule,
    DimensionMismatch,
    NonFiniteInput,
    PolynomialMatrix,
    WorkhorseModel,
    affine_rule,
    as_vector,
    compose,
    composed_velocity,
    composite_lagrangian,
    conjugate_momentum,
    omega,
    oscillator_workhorse,
    polynomial_rule,
    sample_points,
    validate,
    workhorse_lagrangian,
)
from pycomposite.models.oracles import ThreeOscParams, TwoOscParams

from .conftest import random_rule, random_workhorse


def test_workhorse_lagrangian_examples():
    two = oscillator_workhorse(1.0, [1.0, 1.0])
    three = oscillator_workhorse(1.0, [1.0, 1.0, 1.0])

    assert workhorse_lagrangian(two, [1.0, 0.0], [0.0, 1.0]) == pytest.approx(0.0)
    assert workhorse_lagrangian(two, [0.0, 0.0], [0.0, 0.0]) == 0.0
    value = workhorse_lagrangian(three, [1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
    assert value == pytest.approx(-1.5)


def test_workhorse_lagrangian_rejects_wrong_length():
    with pytest.raises(DimensionMismatch):
        workhorse_lagrangian(oscillator_workhorse(1.0, [1.0, 1.0]), [1.0], [0.0, 0.0])


def test_compose_examples():
    two = TwoOscParams(lam=1.0).rule()
    three = ThreeOscParams(lam=2.0).rule()

    np.testing.assert_allclose(compose(two, [0.5], [0.3]), [0.5, 0.8])
    np.testing.assert_allclose(compose(three, [1.0, 1.0], [0.5, 0.25]), [1.5, 1.0, 1.0])


def test_compose_without_velocity_is_alpha(rng):
    rule = random_rule(rng, 4, 2)
    qbar = rng.uniform(-1, 1, 2)
    np.testing.assert_array_equal(compose(rule, qbar, np.zeros(2)), rule.alpha(qbar))


def test_composite_lagrangian_examples():
    params = TwoOscParams()
    assert composite_lagrangian(
        params.model(), params.rule(), [1.0], [0.0], [1.0]
    ) == pytest.approx(-0.5)

    model = oscillator_workhorse(1.0, [1.0, 2.0, 3.0])
    rule = affine_rule(np.eye(3)[:, :2], [0.1, 0.2, 0.3], np.eye(3)[:, 1:], 1.5)
    qbar = np.array([0.4, -0.7])
    value = composite_lagrangian(model, rule, qbar, [0.0, 0.0], [0.0, 0.0])
    assert value == pytest.approx(
        workhorse_lagrangian(model, rule.alpha(qbar), np.zeros(3))
    )


def test_composed_velocity_matches_path_derivative(rng):
    rule = random_rule(rng, 4, 2)
    a, b = rng.uniform(-0.5, 0.5, (2, 2))

    def path(t):
        return a * np.sin(t) + b * np.cos(2 * t)

    def velocity(t):
        return a * np.cos(t) - 2 * b * np.sin(2 * t)

    def acceleration(t):
        return -a * np.sin(t) - 4 * b * np.cos(2 * t)

    for t in np.linspace(0.0, 2.0, 9):
        step = 1e-6
        numeric = (
            compose(rule, path(t + step), velocity(t + step))
            - compose(rule, path(t - step), velocity(t - step))
        ) / (2 * step)
        analytic = composed_velocity(rule, path(t), velocity(t), acceleration(t))
        np.testing.assert_allclose(analytic, numeric, atol=1e-8)


def test_composite_lagrangian_follows_the_composed_path(rng):
    model = random_workhorse(rng, 3)
    rule = random_rule(rng, 3, 2)
    a = rng.uniform(-0.5, 0.5, 2)

    for t in np.linspace(0.0, 1.0, 5):
        qbar, v, acc = a * np.sin(t), a * np.cos(t), -a * np.sin(t)
        step = 1e-6
        qdot = (
            compose(rule, a * np.sin(t + step), a * np.cos(t + step))
            - compose(rule, a * np.sin(t - step), a * np.cos(t - step))
        ) / (2 * step)
        expected = workhorse_lagrangian(model, compose(rule, qbar, v), qdot)
        assert composite_lagrangian(model, rule, qbar, v, acc) == pytest.approx(
            expected, abs=1e-8
        )


def test_omega():
    assert not np.any(omega(oscillator_workhorse(1.0, [1.0, 1.0]), [0.3, 0.4]))

    rotating = oscillator_workhorse(1.0, [1.0, 1.0], [[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_array_equal(
        omega(rotating, [0.3, 0.4]), [[0.0, -2.0], [2.0, 0.0]]
    )


def test_omega_is_antisymmetric(rng):
    model = random_workhorse(rng, 4)
    w = omega(model, rng.uniform(-1, 1, 4))
    np.testing.assert_array_equal(w + w.T, np.zeros((4, 4)))


def test_conjugate_momentum():
    model = oscillator_workhorse(2.0, [1.0, 1.0], [[0.0, -1.0], [1.0, 0.0]])
    np.testing.assert_allclose(
        conjugate_momentum(model, [1.0, 2.0], [0.5, 0.0]), [-1.0, 1.0]
    )


def test_rule_with_more_fundamental_variables_is_rejected():
    with pytest.raises(DimensionMismatch):
        affine_rule([[1.0, 0.0]], [0.0], [[1.0, 1.0]])


def test_as_vector_rejects_non_finite():
    with pytest.raises(NonFiniteInput):
        as_vector([1.0, np.nan], 2, "q")


def test_polynomial_matrix_value_and_derivative():
    # beta = [[1 + x1 x2], [x1^2]]
    poly = PolynomialMatrix.from_nested(
        [[[[1.0, 0, 0], [1.0, 1, 1]]], [[[1.0, 2, 0]]]]
    )
    x = np.array([0.5, -2.0])

    np.testing.assert_allclose(poly.value(x), [[0.0], [0.25]])
    np.testing.assert_allclose(poly.derivative(x)[:, 0, :], [[-2.0, 0.5], [1.0, 0.0]])
    assert PolynomialMatrix.from_nested(poly.to_nested()).shape == (2, 1)


def test_validate_accepts_oscillator_specs(rng):
    for params in (TwoOscParams(lam=0.5), ThreeOscParams(lam=2.0)):
        rule = params.rule()
        points = sample_points(rng, rule.dim_i, rule.dim_k, n=20)
        report = validate(params.model(), rule, points)
        assert report.passed, report.failures()


def test_validate_accepts_random_nonlinear_pairs(model_and_rule, rng):
    model, rule = model_and_rule
    report = validate(model, rule, sample_points(rng, rule.dim_i, rule.dim_k, n=20))
    assert report.passed, report.failures()


def test_validate_flags_duplicated_beta_column(rng):
    beta = [[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]]
    rule = affine_rule(np.eye(3)[:, :2], np.zeros(3), beta)
    report = validate(
        oscillator_workhorse(1.0, [1.0, 1.0, 1.0]), rule, sample_points(rng, 3, 2, n=10)
    )

    assert not report.passed
    assert [c.name for c in report.failures()] == ["rank"]


def test_validate_flags_perturbed_jacobian(rng):
    good = oscillator_workhorse(1.0, [1.0, 2.0])
    model = WorkhorseModel(
        dim_i=2,
        mass=1.0,
        u=good.u,
        du_dq=good.du_dq,
        V=good.V,
        dV_dq=lambda q: good.dV_dq(q) + 1e-3,
    )
    report = validate(model, TwoOscParams().rule(), sample_points(rng, 2, 1, n=10))

    assert [c.name for c in report.failures()] == ["dV_dq"]


def test_validate_reports_failing_callables(rng):
    rule = TwoOscParams().rule()
    broken = CompositionRule(
        dim_i=2,
        dim_k=1,
        alpha=rule.alpha,
        beta=rule.beta,
        dalpha=lambda qbar: np.zeros((3, 3)),
        dbeta=rule.dbeta,
    )
    report = validate(TwoOscParams().model(), broken, sample_points(rng, 2, 1, n=5))

    assert [c.name for c in report.failures()] == ["dalpha"]


def test_polynomial_rule_scales_beta():
    poly = PolynomialMatrix.from_nested([[[[1.0, 0]]], [[[2.0, 1]]]])
    rule = polynomial_rule([[1.0], [0.0]], [0.0, 0.0], poly, lam=3.0)
    np.testing.assert_allclose(rule.beta(np.array([0.5])), [[3.0], [3.0]])
    np.testing.assert_allclose(rule.dbeta(np.array([0.5]))[:, 0, 0], [0.0, 6.0])


def test_polynomial_rule_needs_one_exponent_per_fundamental_variable():
    poly = PolynomialMatrix.from_nested([[[[1.0, 0, 0]]], [[[1.0, 1, 0]]]])
    with pytest.raises(DimensionMismatch):
        polynomial_rule([[1.0], [1.0]], [0.0, 0.0], poly)
