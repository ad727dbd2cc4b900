import typer
from typing_extensions import Annotated

from ..controllers.verify_controller import VerifyController, VerifyOptions
from .options import ConfigPath, OutPath


def verify(
    config_path: ConfigPath,
    out: OutPath = None,
    seed: Annotated[
        int, typer.Option("--seed", "-s", help="Seed for the random sample points.")
    ] = 0,
    samples: Annotated[
        int,
        typer.Option("--samples", min=1, help="Points for derivative and rank checks."),
    ] = 100,
    states: Annotated[
        int,
        typer.Option("--states", min=1, help="Random phase states for field checks."),
    ] = 20,
) -> None:
    """Check derivatives, projection algebra, the canonical field and known oracles."""
    options = VerifyOptions(
        config_path=config_path,
        output_path=out,
        seed=seed,
        samples=samples,
        states=states,
    )
    raise typer.Exit(code=VerifyController(options).verify())
