from dataclasses import dataclass
from enum import Enum

import numpy as np

DEFAULT_TOLERANCE = 1e-4


class TargetKind(Enum):
    POINT = "point"
    HALFSPACE = "halfspace"


@dataclass(frozen=True, eq=False)
class TargetSpec:
    """Terminal constraint x(T) = z, or <a, x(T)> >= c.

    Attributes:
        kind: POINT or HALFSPACE.
        point: z for POINT targets.
        normal: a for HALFSPACE targets.
        offset: c for HALFSPACE targets.
        tolerance: Feasibility radius, positive.
    """
    kind: TargetKind
    point: np.ndarray | None = None
    normal: np.ndarray | None = None
    offset: float = 0.0
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"Target tolerance must be positive, got {self.tolerance}")
        if self.kind is TargetKind.POINT:
            if self.point is None:
                raise ValueError("Point target needs a point")
            object.__setattr__(self, "point", np.atleast_1d(np.asarray(self.point, dtype=float)))
        else:
            normal = np.atleast_1d(np.asarray(self.normal, dtype=float)) if self.normal is not None else None
            if normal is None or not np.any(normal):
                raise ValueError("Half-space target needs a nonzero normal")
            object.__setattr__(self, "normal", normal)
            object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def endpoint_point(cls, z, tolerance: float = DEFAULT_TOLERANCE) -> "TargetSpec":
        return cls(TargetKind.POINT, point=z, tolerance=tolerance)

    @classmethod
    def endpoint_halfspace(cls, a, c: float, tolerance: float = DEFAULT_TOLERANCE) -> "TargetSpec":
        return cls(TargetKind.HALFSPACE, normal=a, offset=c, tolerance=tolerance)

    @property
    def dim(self) -> int:
        return (self.point if self.kind is TargetKind.POINT else self.normal).size

    def distance(self, x) -> np.ndarray:
        """Euclidean distance from x (..., d) to the target set."""
        x = np.asarray(x, dtype=float)
        if self.kind is TargetKind.POINT:
            return np.linalg.norm(x - self.point, axis=-1)
        gap = self.offset - x @ self.normal
        return np.maximum(gap, 0.0) / np.linalg.norm(self.normal)

    def distance_sq_gradient(self, x) -> np.ndarray:
        """Gradient of distance(x)^2 with respect to x."""
        x = np.asarray(x, dtype=float)
        if self.kind is TargetKind.POINT:
            return 2.0 * (x - self.point)
        gap = np.maximum(self.offset - x @ self.normal, 0.0)
        return -2.0 * np.asarray(gap)[..., None] * self.normal / float(self.normal @ self.normal)

    def nearest(self, x) -> np.ndarray:
        """Closest point of the target set to x."""
        x = np.asarray(x, dtype=float)
        if self.kind is TargetKind.POINT:
            return self.point.copy()
        gap = max(self.offset - float(x @ self.normal), 0.0)
        return x + gap * self.normal / float(self.normal @ self.normal)

    def __str__(self):
        if self.kind is TargetKind.POINT:
            return f"x(T) = {self.point.tolist()}"
        return f"<{self.normal.tolist()}, x(T)> >= {self.offset:g}"
