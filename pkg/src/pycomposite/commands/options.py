from pathlib import Path
from typing import Optional

import typer
from typing_extensions import Annotated


def validate_method(choice: Optional[str]):
    if choice is not None and choice not in ["rk4", "rk45"]:
        raise typer.BadParameter("Parameter value for method must be rk4 or rk45.")
    return choice


def validate_positive(value: Optional[float]):
    if value is not None and not value > 0:
        raise typer.BadParameter("Value must be positive.")
    return value


ConfigPath = Annotated[
    Path,
    typer.Option(
        "--config",
        "-c",
        dir_okay=False,
        show_default=False,
        help="TOML model specification.",
    ),
]
OutPath = Annotated[
    Optional[Path],
    typer.Option("--out", "-o", dir_okay=False, help="CSV file to be written to."),
]
Method = Annotated[
    Optional[str],
    typer.Option(
        "--method",
        "-m",
        callback=validate_method,
        help="Integrator: rk4 (fixed step) or rk45 (adaptive).",
    ),
]
Rtol = Annotated[
    Optional[float],
    typer.Option(
        "--rtol", callback=validate_positive, help="Relative tolerance (rk45)."
    ),
]
Atol = Annotated[
    Optional[float],
    typer.Option(
        "--atol", callback=validate_positive, help="Absolute tolerance (rk45)."
    ),
]
Step = Annotated[
    Optional[float],
    typer.Option("--step", callback=validate_positive, help="Fixed step size (rk4)."),
]
TEnd = Annotated[
    Optional[float], typer.Option("--t-end", help="End of the integration interval.")
]
SampleStep = Annotated[
    Optional[float],
    typer.Option(
        "--sample-step",
        callback=validate_positive,
        help="Uniform output spacing for rk45; every accepted step otherwise.",
    ),
]
