from typing import List, Optional

import typer
from typing_extensions import Annotated

from ..config.config import resolve_defaults
from ..controllers.sweep_controller import SweepController, SweepOptions
from .options import Atol, ConfigPath, Method, OutPath, Rtol, SampleStep, Step, TEnd


def validate_lambdas(values: Optional[List[float]]):
    if values and any(value == 0 for value in values):
        raise typer.BadParameter("lambda must be non-zero.")
    return values


def sweep(
    config_path: ConfigPath,
    out: OutPath = None,
    lambdas: Annotated[
        Optional[List[float]],
        typer.Option(
            "--lambda",
            "-l",
            callback=validate_lambdas,
            help="Composition scale to sweep; repeat for several.",
        ),
    ] = None,
    epsilons: Annotated[
        Optional[List[float]],
        typer.Option(
            "--epsilon", "-e", help="Initial pbar amplitude; repeat for several."
        ),
    ] = None,
    method: Method = None,
    rtol: Rtol = None,
    atol: Atol = None,
    step: Step = None,
    t_end: TEnd = None,
    sample_step: SampleStep = 0.01,
    workers: Annotated[
        Optional[int], typer.Option("--workers", "-w", min=1, help="Concurrent cells.")
    ] = None,
) -> None:
    """Fit the growth rate of the pbar mode over a grid of (lambda, epsilon)."""
    settings = resolve_defaults(
        method=method, rtol=rtol, atol=atol, step=step, t_end=t_end, workers=workers
    )
    options = SweepOptions(
        config_path=config_path,
        output_path=out,
        method=settings["method"],
        rtol=settings["rtol"],
        atol=settings["atol"],
        step=settings["step"],
        t_end=settings["t_end"],
        max_steps=settings["max_steps"],
        sample_step=sample_step,
        workers=settings["workers"],
        lambdas=lambdas,
        epsilons=epsilons,
    )
    raise typer.Exit(code=SweepController(options).sweep())
