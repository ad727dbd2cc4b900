from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import polars as pl

from ..models.constraints import (
    constraint_closure_nullity,
    example_chain_residual,
)
from ..models.dynamics import PhaseState, canonical_field, symplectic_gradient
from ..models.model import (
    DERIVATIVE_TOLERANCE,
    CheckResult,
    CompositionRule,
    WorkhorseModel,
    sample_points,
    validate,
)
from ..models.numeric import central_difference, relative_error
from ..models.oracles import (
    Family,
    FamilyParams,
    TwoOscConstants,
    mode_count,
    three_osc_constrained_state,
    two_osc_constrained_constants,
    two_osc_state,
)
from ..models.projection import bundle_at, projector_derivative
from ..models.spec import SpecError, load_spec
from ..views.run_view import RunView
from .simulation_controller import EXIT_CONFIG_ERROR, EXIT_FAILED_CHECK, EXIT_OK

PROJECTION_TOLERANCE = 1e-10
CHAIN_TOLERANCE = 1e-12
ORACLE_FLOW_TOLERANCE = 1e-6


@dataclass
class VerifyOptions:
    config_path: Optional[Union[Path, str]] = None
    output_path: Optional[Union[Path, str]] = None
    seed: int = 0
    samples: int = 100
    states: int = 20


def _run_check(
    name: str, tolerance: float, measure: Callable[[], float]
) -> CheckResult:
    try:
        worst = float(measure())
    except (ArithmeticError, ValueError) as e:
        return CheckResult(name, False, float("inf"), tolerance, str(e))
    return CheckResult(name, worst <= tolerance, worst, tolerance)


class VerifyController:
    """Runs the numerical checks against one model/rule pair.

    ``model``, ``rule`` and ``family`` may be injected directly instead of
    being read from ``options.config_path``.
    """

    def __init__(
        self,
        options: VerifyOptions,
        model: Optional[WorkhorseModel] = None,
        rule: Optional[CompositionRule] = None,
        family: Optional[tuple[Family, FamilyParams]] = None,
        view: Optional[RunView] = None,
    ) -> None:
        self.options = options
        self.model = model
        self.rule = rule
        self.family = family
        self.view = view
        self.rng = np.random.default_rng(options.seed)

    def _random_states(self, qbars: np.ndarray) -> list[PhaseState]:
        dim_i, dim_k = self.rule.dim_i, self.rule.dim_k
        return [
            PhaseState(
                t=0.0,
                qbar=qbar,
                q=self.rng.uniform(-1, 1, dim_i),
                pbar=self.rng.standard_normal(dim_k),
                p=self.rng.standard_normal(dim_i),
            )
            for qbar in qbars[: self.options.states]
        ]

    def _projection_identities(self, qbars: np.ndarray) -> float:
        return max(
            max(bundle_at(self.rule, x).identity_errors().values()) for x in qbars
        )

    def _projector_derivative(self, qbars: np.ndarray) -> float:
        return max(
            relative_error(
                projector_derivative(self.rule, x),
                central_difference(lambda y: bundle_at(self.rule, y).P, x),
            )
            for x in qbars
        )

    def _symplectic_gradient(self, states: list[PhaseState]) -> float:
        return max(
            relative_error(
                canonical_field(self.model, self.rule, s).to_vector(),
                symplectic_gradient(self.model, self.rule, s).to_vector(),
            )
            for s in states
        )

    def _oracle_flow(self, params) -> float:
        """Time derivative of the closed form against the canonical field."""
        worst = 0.0
        for _ in range(self.options.states):
            consts = TwoOscConstants(*self.rng.uniform(-1, 1, 6))
            t = float(self.rng.uniform(0, 2))
            derivative = central_difference(
                lambda x: two_osc_state(params, consts, x[0]).to_vector(),
                np.array([t]),
            )[:, 0]
            state = two_osc_state(params, consts, t)
            field = canonical_field(self.model, self.rule, state)
            worst = max(worst, relative_error(field.to_vector(), derivative))
        return worst

    def _chain(self, family: Family, params) -> float:
        worst = 0.0
        for t in np.linspace(0.0, 10.0, 50):
            c = self.rng.uniform(-1, 1, 4)
            if family is Family.TWO_OSC:
                consts = two_osc_constrained_constants(params, *c[2:])
                state = two_osc_state(params, consts, t)
            else:
                state = three_osc_constrained_state(params, *c, t)
            residual = example_chain_residual(family, params, state)
            worst = max(worst, float(np.max(np.abs(residual))))
        return worst

    def _oracle_checks(self, family: Family, params) -> list[CheckResult]:
        checks = []
        if family is Family.TWO_OSC:
            checks.append(
                _run_check(
                    "oracle flow",
                    ORACLE_FLOW_TOLERANCE,
                    lambda: self._oracle_flow(params),
                )
            )
        if family is Family.THREE_OSC or params.equal_springs:
            checks.append(
                _run_check(
                    "constraint chain",
                    CHAIN_TOLERANCE,
                    lambda: self._chain(family, params),
                )
            )

        checks.append(
            _run_check("mode count", 0.0, lambda: self._mode_gap(family, params))
        )
        return checks

    def _mode_gap(self, family: Family, params) -> int:
        nullity = constraint_closure_nullity(self.model, self.rule)
        return abs(nullity - mode_count(family, params))

    def _write(self, checks: list[CheckResult]) -> None:
        pl.DataFrame(
            {
                "check": [c.name for c in checks],
                "passed": [c.passed for c in checks],
                "worst": [c.worst for c in checks],
                "tolerance": [c.tolerance for c in checks],
                "detail": [c.detail for c in checks],
            }
        ).write_csv(self.options.output_path)
        self.view.display_written(self.options.output_path)

    def verify(self) -> int:
        self.view = self.view or RunView("Verify")

        if self.model is None or self.rule is None:
            try:
                spec = load_spec(self.options.config_path)
                self.model, self.rule = spec.build()
                self.family = spec.family_params()
            except SpecError as e:
                self.view.display_config_error(e)
                return EXIT_CONFIG_ERROR

        points = sample_points(
            self.rng, self.rule.dim_i, self.rule.dim_k, n=self.options.samples
        )
        checks = list(validate(self.model, self.rule, points).checks)
        checks.append(
            _run_check(
                "projection identities",
                PROJECTION_TOLERANCE,
                lambda: self._projection_identities(points.qbar),
            )
        )
        checks.append(
            _run_check(
                "projector derivative",
                DERIVATIVE_TOLERANCE,
                lambda: self._projector_derivative(points.qbar),
            )
        )
        checks.append(
            _run_check(
                "symplectic gradient",
                DERIVATIVE_TOLERANCE,
                lambda: self._symplectic_gradient(self._random_states(points.qbar)),
            )
        )
        if self.family is not None:
            checks.extend(self._oracle_checks(*self.family))

        self.view.display_checks(checks)
        if self.options.output_path is not None:
            Path(self.options.output_path).parent.mkdir(parents=True, exist_ok=True)
            self._write(checks)

        if all(c.passed for c in checks):
            self.view.display_result_success("All checks passed!")
            return EXIT_OK

        self.view.display_result_failure(
            f"{sum(not c.passed for c in checks)} check(s) failed!"
        )
        return EXIT_FAILED_CHECK
