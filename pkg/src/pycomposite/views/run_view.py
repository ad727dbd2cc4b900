from typing import Optional, Sequence

from rich.console import Console
from rich.markup import escape
from rich.table import Table
from rich.text import Text

from ..models.integrator import ConsistencyResult, IntegrationError
from ..models.model import CheckResult
from ..models.trajectory import Trajectory


def _number(value: float) -> str:
    return f"{value:.3e}"


class RunView:
    def __init__(self, caption: str, console: Optional[Console] = None) -> None:
        self.console = console or Console(log_path=False)
        self.caption = caption
        self.display_start()

    def display_start(self) -> None:
        title = Text("PyComposite", style="magenta bold")
        caption = Text(self.caption, style="bright_black italic")

        self.console.print(title, caption, "\n")

    def display_drift(self, traj: Trajectory) -> None:
        table = Table(title="Constraint drift", title_justify="left")
        table.add_column("quantity")
        table.add_column("max over run", justify="right")

        if traj.report is not None:
            for name, value in traj.report.summary().items():
                table.add_row(name, _number(value))
        if traj.energy is not None:
            drift = abs(traj.energy[-1] - traj.energy[0])
            table.add_row("H drift", _number(drift))
            table.add_row("final H", f"{traj.energy[-1]:.17g}")
        table.add_row("samples", str(len(traj)))

        self.console.print(table)

    def display_consistency(self, result: ConsistencyResult) -> None:
        verdict = "[green bold]PASS" if result.passed else "[red bold]FAIL"
        self.console.print(
            f"\n{verdict}[/] max primary residual {_number(result.max_residual)} "
            f"(tolerance {_number(result.tolerance)})"
        )

    def display_checks(self, checks: Sequence[CheckResult]) -> None:
        table = Table(title="Verification", title_justify="left")
        table.add_column("check")
        table.add_column("status")
        table.add_column("worst", justify="right")
        table.add_column("tolerance", justify="right")
        table.add_column("detail", style="bright_black")

        for check in checks:
            table.add_row(
                check.name,
                "[green]PASS" if check.passed else "[red]FAIL",
                _number(check.worst),
                _number(check.tolerance),
                escape(check.detail),
            )

        self.console.print(table)

    def display_written(self, path) -> None:
        self.console.print(f"[bright_black italic]Wrote {escape(str(path))}")

    def display_config_error(self, error: Exception) -> None:
        message = escape(str(error))
        self.console.print(f"\n[red bold]Configuration error:[/] {message}\n")

    def display_integration_error(self, error: Exception) -> None:
        if isinstance(error, IntegrationError):
            where = f"at t={error.t:.17g}"
        else:
            where = "before the first step"
        self.console.print(
            f"\n[red bold]Integration failed {where}:[/] {escape(str(error))}\n"
        )

    def display_result_success(self, message: str) -> None:
        self.console.print(f"\n[green bold]{message} 🚀\n")

    def display_result_failure(self, message: str) -> None:
        self.console.print(f"\n[red bold]{message} 💥\n")
