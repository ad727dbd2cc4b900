from enum import Enum
from typing import Optional, Union

import polars as pl
from rich.console import Console
from rich.markup import escape
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
)
from rich.table import Table
from rich.text import Text


class SweepMessageType(Enum):
    CELL_FAILED = 1
    CELL_DONE = 2


class SweepView:
    def __init__(
        self, task_description: str = "Sweeping", console: Optional[Console] = None
    ) -> None:
        self.console = console or Console(log_path=False)
        self.progress = Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TextColumn("cells •"),
            TimeElapsedColumn(),
            transient=True,
            console=self.console,
        )
        self.task_id = self.progress.add_task(description=task_description)
        self.display_start()

    def set_progress_total_and_start(self, total: int) -> None:
        self.progress.update(self.task_id, total=total)
        self.progress.start()

    def process_message(
        self, message: tuple[SweepMessageType, Union[int, str]]
    ) -> None:
        kind, payload = message
        if kind is SweepMessageType.CELL_FAILED:
            self.progress.console.log(f"[bright_red italic]{escape(payload)}")
        elif kind is SweepMessageType.CELL_DONE:
            self.progress.update(self.task_id, advance=payload)

    def display_start(self) -> None:
        title = Text("PyComposite", style="magenta bold")
        caption = Text("Sweep", style="bright_black italic")

        self.console.print(title, caption, "\n")

    def display_config_error(self, error: Exception) -> None:
        message = escape(str(error))
        self.console.print(f"\n[red bold]Configuration error:[/] {message}\n")

    def display_summary(self, summary: pl.DataFrame) -> None:
        table = Table(title="Growth rates of |pbar_1|", title_justify="left")
        for name in summary.columns:
            table.add_column(name, justify="right")
        for row in summary.iter_rows():
            table.add_row(*(str(value) for value in row))

        self.console.print(table)

    def display_result_cancelled(self) -> None:
        self.progress.stop()
        self.console.print("\n\n[yellow bold]Sweep cancelled! 🚫")

    def display_result_error(self, failed: int) -> None:
        self.progress.stop()
        self.console.print(
            f"\n[red bold]Sweep finished with {failed} failed cell(s)! 💥\n"
        )

    def display_result_success(self) -> None:
        self.progress.stop()
        elapsed = self.progress.tasks[self.task_id].elapsed or 0.0
        self.console.print(f"\n[green bold]Sweep completed in {elapsed:.2f}s! 🚀\n")
