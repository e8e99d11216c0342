from dataclasses import dataclass
from enum import Enum

import numpy as np

from scripts.common.action.target import TargetSpec


class EventKind(Enum):
    ENDPOINT_HALFSPACE = "endpoint_halfspace"
    EXIT_BALL = "exit_ball"


@dataclass(frozen=True, eq=False)
class EventSpec:
    """Path event {<a, x(T)> >= c} or {sup_t |x(t)| >= R}."""
    kind: EventKind
    normal: np.ndarray | None = None
    offset: float = 0.0
    radius: float | None = None

    def __post_init__(self):
        if self.kind is EventKind.ENDPOINT_HALFSPACE:
            if self.normal is None:
                raise ValueError("Half-space event needs a normal vector")
            object.__setattr__(self, "normal", np.atleast_1d(np.asarray(self.normal, dtype=float)))
            object.__setattr__(self, "offset", float(self.offset))
        elif self.radius is None or not self.radius > 0:
            raise ValueError(f"Exit-ball event needs a positive radius, got {self.radius}")

    @classmethod
    def endpoint_halfspace(cls, a, c: float) -> "EventSpec":
        return cls(EventKind.ENDPOINT_HALFSPACE, normal=a, offset=c)

    @classmethod
    def exit_ball(cls, R: float) -> "EventSpec":
        return cls(EventKind.EXIT_BALL, radius=float(R))

    def hits(self, states: np.ndarray) -> np.ndarray:
        """Predicate over a batch of paths (n, K+1, d) or a single path (K+1, d)."""
        states = np.asarray(states, dtype=float)
        if self.kind is EventKind.ENDPOINT_HALFSPACE:
            return states[..., -1, :] @ self.normal >= self.offset
        return np.max(np.linalg.norm(states, axis=-1), axis=-1) >= self.radius

    def as_target(self, tolerance: float) -> TargetSpec:
        """The terminal constraint whose minimum action is the rate of this event."""
        if self.kind is not EventKind.ENDPOINT_HALFSPACE:
            raise ValueError("Only endpoint half-space events map to a terminal target")
        return TargetSpec.endpoint_halfspace(self.normal, self.offset, tolerance)

    def __str__(self):
        if self.kind is EventKind.ENDPOINT_HALFSPACE:
            return f"<{self.normal.tolist()}, x(T)> >= {self.offset:g}"
        return f"sup |x(t)| >= {self.radius:g}"


def first_passage(values: np.ndarray, level: float) -> np.ndarray:
    """First node index with values >= level along the last axis, or -1."""
    reached = values >= level
    return np.where(reached.any(axis=-1), reached.argmax(axis=-1), -1)
