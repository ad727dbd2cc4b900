from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Optional, Sequence, Union

import numpy as np
import polars as pl

from .constraints import ConstraintReport
from .dynamics import PhaseState

DIAGNOSTIC_COLUMNS = ("H", "primary_norm", "secondary_norm", "pbar_norm")


@dataclass
class Trajectory:
    """Samples of the phase state stored column-wise, one row per time."""

    t: np.ndarray
    qbar: np.ndarray
    q: np.ndarray
    pbar: np.ndarray
    p: np.ndarray
    step: Optional[float] = None
    accepted_steps: Optional[np.ndarray] = None
    energy: Optional[np.ndarray] = None
    report: Optional[ConstraintReport] = None

    def __post_init__(self) -> None:
        self.t = np.asarray(self.t, dtype=float).reshape(-1)
        n = self.t.size
        for name in ("qbar", "q", "pbar", "p"):
            values = np.asarray(getattr(self, name), dtype=float)
            setattr(self, name, values.reshape(n, -1))

        if n and np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        columns = (self.t, self.qbar, self.q, self.pbar, self.p)
        if not all(np.all(np.isfinite(a)) for a in columns):
            raise ValueError("trajectory samples must be finite")

    @classmethod
    def from_states(cls, states: Sequence[PhaseState], **kwargs) -> "Trajectory":
        return cls(
            t=np.array([s.t for s in states]),
            qbar=np.array([s.qbar for s in states]),
            q=np.array([s.q for s in states]),
            pbar=np.array([s.pbar for s in states]),
            p=np.array([s.p for s in states]),
            **kwargs,
        )

    def __len__(self) -> int:
        return self.t.size

    @property
    def dim_k(self) -> int:
        return self.qbar.shape[1]

    @property
    def dim_i(self) -> int:
        return self.q.shape[1]

    def state(self, index: int) -> PhaseState:
        return PhaseState(
            t=self.t[index],
            qbar=self.qbar[index],
            q=self.q[index],
            pbar=self.pbar[index],
            p=self.p[index],
        )

    @property
    def samples(self) -> Iterator[PhaseState]:
        return (self.state(i) for i in range(len(self)))

    @property
    def final(self) -> PhaseState:
        return self.state(len(self) - 1)

    def vectors(self) -> np.ndarray:
        return np.hstack([self.qbar, self.q, self.pbar, self.p])

    def to_frame(self) -> pl.DataFrame:
        """All columns rendered with 17 significant digits."""
        n = len(self)
        columns: dict[str, np.ndarray] = {"t": self.t}

        for name, values in (
            ("qbar", self.qbar),
            ("q", self.q),
            ("pbar", self.pbar),
            ("p", self.p),
        ):
            for j in range(values.shape[1]):
                columns[f"{name}_{j + 1}"] = values[:, j]

        missing = np.full(n, np.nan)
        columns["H"] = self.energy if self.energy is not None else missing
        if self.report is not None:
            columns["primary_norm"] = self.report.primary_norm
            columns["secondary_norm"] = self.report.secondary_norm
            columns["pbar_norm"] = self.report.pbar_norm
        else:
            for name in DIAGNOSTIC_COLUMNS[1:]:
                columns[name] = missing

        return pl.DataFrame(
            {
                name: np.char.mod("%.17g", np.asarray(values, dtype=float))
                for name, values in columns.items()
            }
        )

    def write_csv(self, path: Union[Path, str]) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().write_csv(path)


def read_trajectory_csv(path: Union[Path, str]) -> Trajectory:
    df = pl.read_csv(path, infer_schema_length=0)

    def block(name: str) -> np.ndarray:
        names = df.select(pl.col(rf"^{name}_\d+$")).columns
        return np.array(
            [[float(v) for v in df[c].to_list()] for c in names], dtype=float
        ).T.reshape(df.height, len(names))

    def column(name: str) -> Optional[np.ndarray]:
        if name not in df.columns:
            return None
        values = np.array([float(v) for v in df[name].to_list()])
        return None if np.all(np.isnan(values)) else values

    energy = column("H")
    norms = [column(name) for name in DIAGNOSTIC_COLUMNS[1:]]
    report = ConstraintReport(*norms) if all(v is not None for v in norms) else None

    return Trajectory(
        t=column("t"),
        qbar=block("qbar"),
        q=block("q"),
        pbar=block("pbar"),
        p=block("p"),
        energy=energy,
        report=report,
    )
