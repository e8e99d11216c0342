from dataclasses import dataclass
from enum import Enum
from pathlib import Path as FilePath

import numpy as np

from scripts.common.errors import GridMismatchError
from scripts.common.tables import read_csv


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid t_k = k T / K on [0, T]."""
    T: float
    K: int

    def __post_init__(self):
        if not (self.T > 0 and np.isfinite(self.T)):
            raise ValueError(f"Grid horizon must be positive and finite, got {self.T}")
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"Grid step count must be a positive integer, got {self.K}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "K", int(self.K))

    @property
    def dt(self) -> float:
        return self.T / self.K

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.K + 1)

    def refined(self, factor: int = 2) -> "TimeGrid":
        return TimeGrid(self.T, self.K * factor)


def require_same_grid(a: TimeGrid, b: TimeGrid) -> None:
    if a != b:
        raise GridMismatchError(f"Grid mismatch: (T={a.T}, K={a.K}) vs (T={b.T}, K={b.K})")


class PathLabel(Enum):
    SDE = "sde"
    SKELETON = "skeleton"
    CONTROLLED = "controlled"


@dataclass(frozen=True, eq=False)
class Control:
    """Piecewise-constant control, ``values[k]`` held on [t_k, t_{k+1}).

    Attributes:
        grid: Time grid.
        values: Array of shape (K, m).
        bound: Optional energy bound N; the control must lie in S^N.
    """
    grid: TimeGrid
    values: np.ndarray
    bound: float | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != self.grid.K:
            raise GridMismatchError(f"Control needs {self.grid.K} rows, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("Control values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.bound is not None and self.energy > self.bound:
            raise ValueError(f"Control energy {self.energy:g} exceeds its bound {self.bound:g}")

    @property
    def m(self) -> int:
        return self.values.shape[1]

    @property
    def energy(self) -> float:
        return float(np.sum(self.values ** 2) * self.grid.dt)

    @classmethod
    def zero(cls, grid: TimeGrid, m: int) -> "Control":
        return cls(grid, np.zeros((grid.K, m)))

    @classmethod
    def constant(cls, grid: TimeGrid, value) -> "Control":
        value = np.atleast_1d(np.asarray(value, dtype=float))
        return cls(grid, np.tile(value, (grid.K, 1)))

    @classmethod
    def sinusoid(cls, grid: TimeGrid, n: int, direction) -> "Control":
        """h(t) = sin(2 pi n t) v sampled at left nodes."""
        direction = np.atleast_1d(np.asarray(direction, dtype=float))
        phase = np.sin(2.0 * np.pi * n * grid.nodes[:-1])
        return cls(grid, phase[:, None] * direction[None, :])

    def with_bound(self, bound: float) -> "Control":
        return Control(self.grid, self.values, bound)


def resample(control: Control, grid: TimeGrid) -> Control:
    """Re-grids a control by evaluating the piecewise-constant function at the new left nodes."""
    if not np.isclose(control.grid.T, grid.T, rtol=0.0, atol=1e-12 * grid.T):
        raise GridMismatchError(f"Cannot resample from horizon {control.grid.T} to {grid.T}")
    left = grid.nodes[:-1]
    index = np.minimum(np.floor(left / control.grid.dt + 1e-9).astype(int), control.grid.K - 1)
    return Control(grid, control.values[index], control.bound)


@dataclass(frozen=True, eq=False)
class Path:
    """State trajectory of shape (K+1, d) on a time grid."""
    grid: TimeGrid
    states: np.ndarray
    label: PathLabel

    def __post_init__(self):
        states = np.asarray(self.states, dtype=float)
        if states.ndim != 2 or states.shape[0] != self.grid.K + 1:
            raise GridMismatchError(f"Path needs {self.grid.K + 1} rows, got shape {states.shape}")
        object.__setattr__(self, "states", states)

    @property
    def d(self) -> int:
        return self.states.shape[1]

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]


def uniform_distance(p: Path, q: Path) -> float:
    """max_k |p_k - q_k|.

    Raises:
        GridMismatchError: If the paths live on different grids.
    """
    require_same_grid(p.grid, q.grid)
    if p.d != q.d:
        raise GridMismatchError(f"Dimension mismatch: {p.d} vs {q.d}")
    return float(np.max(np.linalg.norm(p.states - q.states, axis=-1)))


def path_columns(d: int) -> list[str]:
    return ["t"] + [f"x{i + 1}" for i in range(d)]


def control_columns(m: int) -> list[str]:
    return ["t"] + [f"h{i + 1}" for i in range(m)]


def path_rows(path: Path) -> list[dict]:
    columns = path_columns(path.d)
    return [dict(zip(columns, [float(t), *map(float, x)])) for t, x in zip(path.grid.nodes, path.states)]


def control_rows(control: Control) -> list[dict]:
    """One row per node; the final node closes the last interval and carries no value."""
    columns = control_columns(control.m)
    nodes = control.grid.nodes
    rows = [dict(zip(columns, [float(t), *map(float, h)])) for t, h in zip(nodes[:-1], control.values)]
    rows.append({"t": float(nodes[-1])})
    return rows


def read_control(filename: str | FilePath) -> Control:
    """Reads a control written with control_columns / control_rows; the grid comes from the t column."""
    columns, rows = read_csv(filename)
    if len(rows) < 2:
        raise ValueError(f"{filename}: need at least two time nodes to recover a grid")
    table = np.array([[np.nan if row.get(c) is None else row[c] for c in columns] for row in rows], dtype=float)
    return Control(TimeGrid(table[-1, 0], len(rows) - 1), table[:-1, 1:])
