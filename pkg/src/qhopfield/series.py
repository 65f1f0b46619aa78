"""Time-series containers and their CSV formats.

All CSVs are written with 17 significant digits so values round-trip
exactly through text.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import UsageError

FLOAT_FMT = "%.17g"


def format_float(x: float) -> str:
    return FLOAT_FMT % x


def write_csv(path, header: list[str], columns: list[np.ndarray]) -> None:
    """Write columns under the given header, one row per sample."""
    if len(header) != len(columns):
        raise UsageError("header and column counts differ")
    n = len(columns[0])
    for col in columns:
        if len(col) != n:
            raise UsageError("columns have unequal lengths")
    lines = [",".join(header)]
    for k in range(n):
        lines.append(",".join(format_float(float(col[k])) for col in columns))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Read a CSV written by :func:`write_csv`; returns (header, columns)."""
    text = Path(path).read_text().strip().split("\n")
    header = text[0].split(",")
    data = np.array(
        [[float(v) for v in line.split(",")] for line in text[1:]], dtype=np.float64
    )
    if data.size == 0:
        data = data.reshape(0, len(header))
    return header, [data[:, j] for j in range(len(header))]


@dataclass
class ObservableSeries:
    """A time grid plus named expectation-value columns."""

    t: np.ndarray
    values: dict[str, np.ndarray] = field(default_factory=dict)
    time_label: str = "t"

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=np.float64)
        for name, col in self.values.items():
            col = np.asarray(col, dtype=np.float64)
            if col.shape != self.t.shape:
                raise UsageError(f"column {name!r} length differs from time grid")
            self.values[name] = col

    @property
    def names(self) -> list[str]:
        return list(self.values)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]

    def write_csv(self, path) -> None:
        write_csv(
            path,
            [self.time_label, *self.values],
            [self.t, *self.values.values()],
        )

    @classmethod
    def from_csv(cls, path, time_label: str | None = None) -> "ObservableSeries":
        header, cols = read_csv(path)
        label = header[0] if time_label is None else time_label
        return cls(
            t=cols[0],
            values={name: col for name, col in zip(header[1:], cols[1:])},
            time_label=label,
        )


@dataclass
class BatchSeries:
    """Trajectory-ensemble mean and standard error per observable.

    The standard error is the sample standard deviation (ddof=1) across
    trajectories divided by sqrt(n_traj); it is reported as 0 for a batch
    of one.
    """

    t: np.ndarray
    means: dict[str, np.ndarray]
    stderrs: dict[str, np.ndarray]
    n_traj: int

    def write_csv(self, path) -> None:
        header = ["t"]
        columns = [self.t]
        for name in self.means:
            header += [f"{name}_mean", f"{name}_stderr"]
            columns += [self.means[name], self.stderrs[name]]
        write_csv(path, header, columns)
