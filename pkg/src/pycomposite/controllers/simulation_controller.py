import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from ..models.constraints import project_initial
from ..models.dynamics import PhaseState
from ..models.integrator import (
    IntegrationError,
    IntegratorOptions,
    InvalidOptions,
    consistency_check,
    simulate,
    two_step_solve,
)
from ..models.model import CompositionRule, NonFiniteInput, WorkhorseModel
from ..models.projection import RankDeficient
from ..models.spec import SpecError, load_spec
from ..models.trajectory import Trajectory
from ..views.run_view import RunView

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONFIG_ERROR = 2
EXIT_INTEGRATION_ERROR = 3


@dataclass
class SimulationOptions:
    config_path: Union[Path, str]
    output_path: Optional[Union[Path, str]] = None
    method: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    step: float = 1e-3
    t_end: float = 10.0
    max_steps: int = 2_000_000
    sample_step: Optional[float] = None
    pbar_zero: bool = False
    project_primary: bool = False
    pass_tolerance: float = 1e-6


class SimulationController:
    def __init__(
        self, options: SimulationOptions, view: Optional[RunView] = None
    ) -> None:
        self.options = options
        self.view = view

    def _load(
        self,
    ) -> tuple[WorkhorseModel, CompositionRule, PhaseState, IntegratorOptions]:
        spec = load_spec(self.options.config_path)
        model, rule = spec.build()
        s0 = spec.initial_state()
        if s0.dim_i != model.dim_i or s0.dim_k != rule.dim_k:
            raise SpecError(
                f"initial state has I={s0.dim_i}, K={s0.dim_k} but the model has "
                f"I={model.dim_i}, K={rule.dim_k}"
            )

        opts = IntegratorOptions(
            method=self.options.method,
            t_span=(s0.t, self.options.t_end),
            step=self.options.step,
            rtol=self.options.rtol,
            atol=self.options.atol,
            max_steps=self.options.max_steps,
            sample_step=self.options.sample_step,
        )
        return model, rule, s0, opts

    def _prepare(self, rule: CompositionRule, s0: PhaseState) -> PhaseState:
        if self.options.project_primary:
            return project_initial(rule, s0, zero_pbar=self.options.pbar_zero)
        if self.options.pbar_zero:
            return dataclasses.replace(s0, pbar=np.zeros_like(s0.pbar))
        return s0

    def _write(self, traj: Trajectory) -> None:
        if self.options.output_path is None:
            return
        traj.write_csv(self.options.output_path)
        self.view.display_written(self.options.output_path)

    def simulate(self) -> int:
        """Canonical run on the enlarged phase space."""
        self.view = self.view or RunView("Simulate")

        try:
            model, rule, s0, opts = self._load()
        except (SpecError, InvalidOptions) as e:
            self.view.display_config_error(e)
            return EXIT_CONFIG_ERROR

        try:
            s0 = self._prepare(rule, s0)
            traj = simulate(model, rule, s0, opts)
        except (IntegrationError, RankDeficient, NonFiniteInput) as e:
            self.view.display_integration_error(e)
            return EXIT_INTEGRATION_ERROR

        self._write(traj)
        self.view.display_drift(traj)
        self.view.display_result_success("Simulation completed!")
        return EXIT_OK

    def two_step(self) -> int:
        """Workhorse run followed by post-processing of ``qbar``."""
        self.view = self.view or RunView("Two-step")

        try:
            model, rule, s0, opts = self._load()
        except (SpecError, InvalidOptions) as e:
            self.view.display_config_error(e)
            return EXIT_CONFIG_ERROR

        try:
            s0 = self._prepare(rule, s0)
            if np.any(s0.pbar):
                logger.info("two-step run ignores the nonzero initial pbar")
            traj = two_step_solve(model, rule, s0.q, s0.p, s0.qbar, opts)
        except (IntegrationError, RankDeficient, NonFiniteInput) as e:
            self.view.display_integration_error(e)
            return EXIT_INTEGRATION_ERROR

        self._write(traj)
        self.view.display_drift(traj)

        result = consistency_check(rule, traj, self.options.pass_tolerance)
        self.view.display_consistency(result)
        return EXIT_OK if result.passed else EXIT_FAILED_CHECK
