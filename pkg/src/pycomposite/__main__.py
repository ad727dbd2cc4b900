import logging

import typer
from rich.logging import RichHandler
from typing_extensions import Annotated

from .commands import config, simulate, sweep, verify

app = typer.Typer(no_args_is_help=True)


@app.callback()
def main(
    verbose: Annotated[
        bool, typer.Option("--verbose", "-v", help="Show debug logging.")
    ] = False,
) -> None:
    """Constrained Hamiltonian dynamics of composite higher derivative theories."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(rich_tracebacks=True, show_path=False)],
        force=True,
    )


app.command(no_args_is_help=True)(simulate.simulate)
app.command("two-step", no_args_is_help=True)(simulate.two_step)
app.command(no_args_is_help=True)(verify.verify)
app.command(no_args_is_help=True)(sweep.sweep)
app.command()(config.config)

if __name__ == "__main__":
    app()
