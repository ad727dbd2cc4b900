import typer
from typing_extensions import Annotated

from ..config.config import resolve_defaults
from ..controllers.simulation_controller import SimulationController, SimulationOptions
from .options import Atol, ConfigPath, Method, OutPath, Rtol, SampleStep, Step, TEnd

PbarZero = Annotated[
    bool,
    typer.Option("--pbar-zero", help="Set the initial pbar to zero."),
]
ProjectPrimary = Annotated[
    bool,
    typer.Option(
        "--project-primary",
        help="Project the initial q onto the primary constraint surface.",
    ),
]


def _options(
    config_path,
    out,
    method,
    rtol,
    atol,
    step,
    t_end,
    sample_step,
    pbar_zero,
    project_primary,
) -> SimulationOptions:
    settings = resolve_defaults(
        method=method, rtol=rtol, atol=atol, step=step, t_end=t_end
    )
    return SimulationOptions(
        config_path=config_path,
        output_path=out,
        method=settings["method"],
        rtol=settings["rtol"],
        atol=settings["atol"],
        step=settings["step"],
        t_end=settings["t_end"],
        max_steps=settings["max_steps"],
        sample_step=sample_step,
        pbar_zero=pbar_zero,
        project_primary=project_primary,
        pass_tolerance=settings["pass_tolerance"],
    )


def simulate(
    config_path: ConfigPath,
    out: OutPath = None,
    method: Method = None,
    rtol: Rtol = None,
    atol: Atol = None,
    step: Step = None,
    t_end: TEnd = None,
    sample_step: SampleStep = None,
    pbar_zero: PbarZero = False,
    project_primary: ProjectPrimary = False,
) -> None:
    """Integrate the canonical equations on the enlarged phase space."""
    options = _options(
        config_path,
        out,
        method,
        rtol,
        atol,
        step,
        t_end,
        sample_step,
        pbar_zero,
        project_primary,
    )
    raise typer.Exit(code=SimulationController(options).simulate())


def two_step(
    config_path: ConfigPath,
    out: OutPath = None,
    method: Method = None,
    rtol: Rtol = None,
    atol: Atol = None,
    step: Step = None,
    t_end: TEnd = None,
    sample_step: SampleStep = None,
    project_primary: ProjectPrimary = False,
) -> None:
    """Solve the workhorse, then recover qbar by post-processing."""
    options = _options(
        config_path,
        out,
        method,
        rtol,
        atol,
        step,
        t_end,
        sample_step,
        False,
        project_primary,
    )
    raise typer.Exit(code=SimulationController(options).two_step())
