from dataclasses import dataclass, field
from enum import Enum
import math

import numpy as np
from colorama import Fore, Style


class Assumption(Enum):
    INTEGRABILITY = "integrability"
    MONOTONICITY = "monotonicity"
    LYAPUNOV = "lyapunov"
    TRACE_NONNEG = "trace_nonneg"
    RATIO_ETA = "ratio_eta"
    RATIO_GAMMA = "ratio_gamma"
    OSGOOD_ETA = "osgood_eta"
    OSGOOD_GAMMA = "osgood_gamma"
    COERCIVITY = "coercivity"


@dataclass(frozen=True, eq=False)
class AuditReport:
    """Outcome of one sampled inequality check.

    Attributes:
        assumption: Which inequality was checked.
        samples: Number of evaluated points.
        worst_margin: Max of LHS - RHS; the audit passes iff it is <= tolerance.
        worst_point: Sampled input achieving ``worst_margin`` (layout depends on the audit).
        tolerance: Pass threshold.
        passed: ``worst_margin <= tolerance``.
        excluded: Points dropped as singular.
        value: Audit-specific scalar (quadrature value, ratio supremum, ...).
    """
    assumption: Assumption
    samples: int
    worst_margin: float
    worst_point: np.ndarray
    tolerance: float
    excluded: int = 0
    value: float | None = None
    passed: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "worst_point", np.atleast_1d(np.asarray(self.worst_point, dtype=float)))
        margin = self.worst_margin
        object.__setattr__(self, "passed", bool(not math.isnan(margin) and margin <= self.tolerance))

    def row(self, width: int) -> dict:
        """CSV row; ``width`` pads worst_point to a common number of columns."""
        row = {
            "assumption": self.assumption.value,
            "samples": self.samples,
            "worst_margin": float(self.worst_margin),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
            "excluded": self.excluded,
            "value": None if self.value is None else float(self.value),
        }
        for i in range(width):
            row[f"p{i + 1}"] = float(self.worst_point[i]) if i < self.worst_point.size else None
        return row

    def summary(self) -> str:
        verdict = f"{Fore.GREEN}PASS" if self.passed else f"{Fore.RED}FAIL"
        extra = f", excluded {self.excluded}" if self.excluded else ""
        value = "" if self.value is None else f", value {self.value:.6g}"
        return (f"{verdict}{Style.RESET_ALL} {self.assumption.value:<14} worst margin {self.worst_margin:+.3e} "
                f"(tol {self.tolerance:g}) over {self.samples} samples{value}{extra}")


REPORT_COLUMNS = ["assumption", "samples", "worst_margin", "tolerance", "passed", "excluded", "value"]


def report_table(reports: list[AuditReport]) -> tuple[list[str], list[dict]]:
    width = max((r.worst_point.size for r in reports), default=0)
    columns = REPORT_COLUMNS + [f"p{i + 1}" for i in range(width)]
    return columns, [r.row(width) for r in reports]
