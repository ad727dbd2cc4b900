from typing import Any

import typer
from rich.console import Console
from typing_extensions import Annotated

from ..config.config import InvalidConfigValue, coerce_value, load_config, write_config

console = Console()


def config(
    key: Annotated[str, typer.Argument(show_default=False)] = None,
    value: Annotated[str, typer.Argument(show_default=False)] = None,
) -> None:
    """Show the persisted run defaults, or set KEY to VALUE."""
    config: dict[str, Any] = load_config()

    if not key and not value:
        console.print(config)
        return

    if key not in config.keys():
        console.print(
            f"{key} is not a valid configuration option, "
            f"type pycomposite config to see a list of available options",
            style="bold red",
        )
        raise typer.Exit(code=2)

    if value is None:
        console.print(f"{key} = {config[key]!r}")
        return

    try:
        config[key] = coerce_value(key, value)
    except InvalidConfigValue as e:
        console.print(str(e), style="bold red")
        raise typer.Exit(code=2)

    write_config(config)
    console.print(f"{key} has been set to '{config[key]}'", style="bold green")
