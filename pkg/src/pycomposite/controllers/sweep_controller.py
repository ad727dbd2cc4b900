import logging
import multiprocessing
import queue
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import polars as pl

from ..models.dynamics import canonical_field
from ..models.integrator import (
    IntegrationError,
    IntegratorOptions,
    InvalidOptions,
    growth_rate,
    integrate,
)
from ..models.model import NonFiniteInput
from ..models.oracles import Family, TwoOscConstants, TwoOscParams, two_osc_state
from ..models.projection import RankDeficient
from ..models.spec import SpecError, SweepSpec, load_spec
from ..views.sweep_view import SweepMessageType, SweepView
from .simulation_controller import (
    EXIT_CONFIG_ERROR,
    EXIT_INTEGRATION_ERROR,
    EXIT_OK,
)

logger = logging.getLogger(__name__)


@dataclass
class SweepOptions:
    config_path: Union[Path, str]
    output_path: Optional[Union[Path, str]] = None
    method: str = "rk45"
    rtol: float = 1e-10
    atol: float = 1e-12
    step: float = 1e-3
    t_end: float = 10.0
    max_steps: int = 2_000_000
    sample_step: Optional[float] = 0.01
    workers: int = multiprocessing.cpu_count()
    lambdas: Optional[Sequence[float]] = None
    epsilons: Optional[Sequence[float]] = None


@dataclass(frozen=True)
class CellResult:
    index: int
    lam: float
    epsilon: float
    rate: Optional[float] = None
    error: Optional[str] = None

    @property
    def expected_rate(self) -> float:
        return 1.0 / self.lam

    @property
    def relative_error(self) -> Optional[float]:
        if self.rate is None:
            return None
        return abs(self.rate - self.expected_rate) / abs(self.expected_rate)

    @property
    def status(self) -> str:
        if self.error is not None:
            return "failed"
        return "n/a" if self.rate is None else "ok"


class SweepController:
    """Growth of the ``pbar_1`` mode of the two-oscillator system over (lambda, eps)."""

    def __init__(self, options: SweepOptions, view: Optional[SweepView] = None) -> None:
        self.options = options
        self.message_queue = queue.Queue()
        self.stop_event = threading.Event()
        self.view = view

    def _grid(self) -> tuple[TwoOscParams, float, list[tuple[float, float]]]:
        spec = load_spec(self.options.config_path)
        known = spec.family_params()
        if known is None or known[0] is not Family.TWO_OSC:
            raise SpecError("sweeps need a two-oscillator model")
        params = known[1]

        sweep = spec.sweep or SweepSpec()
        lambdas = list(self.options.lambdas or sweep.lambdas)
        epsilons = list(self.options.epsilons or sweep.epsilons)
        if not lambdas or not epsilons or any(lam == 0 for lam in lambdas):
            raise SpecError("sweep needs non-zero lambdas and at least one epsilon")

        grid = [(lam, eps) for lam in lambdas for eps in epsilons]
        return params, sweep.background, grid

    def _integrator_options(self) -> IntegratorOptions:
        return IntegratorOptions(
            method=self.options.method,
            t_span=(0.0, self.options.t_end),
            step=self.options.step,
            rtol=self.options.rtol,
            atol=self.options.atol,
            max_steps=self.options.max_steps,
            sample_step=self.options.sample_step,
        )

    def run_cell(
        self,
        index: int,
        base: TwoOscParams,
        background: float,
        lam: float,
        epsilon: float,
        opts: IntegratorOptions,
    ) -> CellResult:
        if self.stop_event.is_set():
            return CellResult(index, lam, epsilon, error="cancelled")

        try:
            params = TwoOscParams(m=base.m, h1=base.h1, h2=base.h2, lam=lam)
            model, rule = params.model(), params.rule()
            consts = TwoOscConstants(c2=background, cbar=epsilon)
            s0 = two_osc_state(params, consts, 0.0)
            traj = integrate(lambda s: canonical_field(model, rule, s), s0, opts)
            rate = growth_rate(traj.t, traj.pbar[:, 0])
        except (IntegrationError, RankDeficient, NonFiniteInput) as e:
            return self._failed_cell(index, lam, epsilon, e)
        except Exception as e:
            logger.exception("sweep cell lambda=%g, eps=%g raised", lam, epsilon)
            return self._failed_cell(index, lam, epsilon, e)

        self.message_queue.put((SweepMessageType.CELL_DONE, 1))
        return CellResult(index, lam, epsilon, rate=rate)

    def _failed_cell(
        self, index: int, lam: float, epsilon: float, error: Exception
    ) -> CellResult:
        self.message_queue.put(
            (
                SweepMessageType.CELL_FAILED,
                f"Cell lambda={lam:g}, eps={epsilon:g} failed: {error}",
            )
        )
        self.message_queue.put((SweepMessageType.CELL_DONE, 1))
        return CellResult(index, lam, epsilon, error=str(error) or type(error).__name__)

    def summary(self, results: Sequence[CellResult]) -> pl.DataFrame:
        def fmt(value: Optional[float]) -> str:
            return "n/a" if value is None else f"{value:.17g}"

        ordered = sorted(results, key=lambda r: r.index)
        return pl.DataFrame(
            {
                "lambda": [f"{r.lam:.17g}" for r in ordered],
                "epsilon": [f"{r.epsilon:.17g}" for r in ordered],
                "expected_rate": [f"{r.expected_rate:.17g}" for r in ordered],
                "fitted_rate": [fmt(r.rate) for r in ordered],
                "relative_error": [fmt(r.relative_error) for r in ordered],
                "status": [r.status for r in ordered],
            }
        )

    def sweep(self) -> int:
        self.view = self.view or SweepView()
        cancelled = False

        try:
            params, background, grid = self._grid()
            opts = self._integrator_options()
        except (SpecError, InvalidOptions) as e:
            self.view.display_config_error(e)
            return EXIT_CONFIG_ERROR

        self.view.set_progress_total_and_start(total=len(grid))

        with ThreadPoolExecutor(max_workers=max(1, self.options.workers)) as executor:
            futures = [
                executor.submit(self.run_cell, i, params, background, lam, eps, opts)
                for i, (lam, eps) in enumerate(grid)
            ]

            while (
                any(not future.done() for future in futures)
                or not self.message_queue.empty()
            ):
                try:
                    message = self.message_queue.get(timeout=0.01)
                    self.view.process_message(message)
                except queue.Empty:
                    continue
                except KeyboardInterrupt:
                    self.stop_event.set()
                    cancelled = True

            results = [future.result() for future in futures]

        if cancelled:
            self.view.display_result_cancelled()
            return EXIT_INTEGRATION_ERROR

        summary = self.summary(results)
        self.view.display_summary(summary)
        if self.options.output_path is not None:
            Path(self.options.output_path).parent.mkdir(parents=True, exist_ok=True)
            summary.write_csv(self.options.output_path)

        failed = sum(r.status == "failed" for r in results)
        if failed:
            self.view.display_result_error(failed)
            return EXIT_INTEGRATION_ERROR

        self.view.display_result_success()
        return EXIT_OK
