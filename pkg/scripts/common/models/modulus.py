"""Moduli of continuity used by the monotonicity and Lyapunov conditions."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable
import math

import numpy as np
import sympy

INV_E = math.exp(-1.0)


class ModulusKind(Enum):
    """Families of moduli.

    Attributes:
        LINEAR: s -> c*s.
        XLOG1OVERX: s -> c*s*log(1/s), 0 at s=0, held at c/e beyond s=1/e.
        XLOGX_PLUS1: s -> 1 on [0, 1], s*log(s) + 1 beyond.
        CUSTOM: user expression in the variable ``s``.
    """
    LINEAR = "linear"
    XLOG1OVERX = "xlog1overx"
    XLOGX_PLUS1 = "xlogx_plus1"
    CUSTOM = "custom"


@dataclass(frozen=True)
class ModulusSpec:
    """An increasing, continuous, nonnegative function on [0, inf).

    Attributes:
        kind: Family tag.
        c: Scale parameter (LINEAR and XLOG1OVERX).
        expression: Source text for CUSTOM moduli.
    """
    kind: ModulusKind
    c: float = 1.0
    expression: str | None = None
    _func: Callable | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.c < 0 or not math.isfinite(self.c):
            raise ValueError(f"Modulus scale must be finite and nonnegative, got {self.c}")
        if self.kind is ModulusKind.CUSTOM:
            if not self.expression:
                raise ValueError("CUSTOM modulus needs an expression in s")
            s = sympy.Symbol("s", nonnegative=True)
            try:
                expr = sympy.sympify(self.expression, locals={"s": s})
            except (sympy.SympifyError, SyntaxError) as e:
                raise ValueError(f"Cannot parse modulus expression '{self.expression}': {e}") from e
            if expr.free_symbols - {s}:
                raise ValueError(f"Modulus expression may only use 's', got {expr.free_symbols}")
            object.__setattr__(self, "_func", sympy.lambdify(s, expr, "numpy"))

    @classmethod
    def linear(cls, c: float = 1.0) -> "ModulusSpec":
        return cls(ModulusKind.LINEAR, c)

    @classmethod
    def xlog1overx(cls, c: float = 1.0) -> "ModulusSpec":
        return cls(ModulusKind.XLOG1OVERX, c)

    @classmethod
    def xlogx_plus1(cls) -> "ModulusSpec":
        return cls(ModulusKind.XLOGX_PLUS1)

    @classmethod
    def custom(cls, expression: str) -> "ModulusSpec":
        return cls(ModulusKind.CUSTOM, expression=expression)

    @classmethod
    def parse(cls, text: str) -> "ModulusSpec":
        """Parses ``kind`` or ``kind:argument``, e.g. ``linear:2`` or ``custom:s*log(1+s)``.

        Args:
            text: Modulus description.

        Returns:
            ModulusSpec: The parsed modulus.

        Raises:
            ValueError: If the kind is unknown or the argument is malformed.
        """
        name, _, arg = text.strip().partition(":")
        try:
            kind = ModulusKind(name.strip().lower())
        except ValueError:
            raise ValueError(f"Unknown modulus kind '{name}', expected one of "
                             f"{[k.value for k in ModulusKind]}") from None
        if kind is ModulusKind.CUSTOM:
            return cls.custom(arg.strip())
        if kind is ModulusKind.XLOGX_PLUS1:
            return cls.xlogx_plus1()
        return cls(kind, float(arg) if arg.strip() else 1.0)

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind is ModulusKind.LINEAR:
            return self.c * s
        if self.kind is ModulusKind.XLOG1OVERX:
            safe = np.where(s > 0, s, 1.0)
            inner = np.where(s > 0, safe * np.log(1.0 / safe), 0.0)
            return self.c * np.where(s < INV_E, inner, INV_E)
        if self.kind is ModulusKind.XLOGX_PLUS1:
            safe = np.where(s > 1.0, s, 1.0)
            return np.where(s > 1.0, safe * np.log(safe) + 1.0, 1.0)
        with np.errstate(all="ignore"):
            out = self._func(s)
        return np.broadcast_to(np.asarray(out, dtype=float), s.shape).copy()

    def __str__(self):
        if self.kind is ModulusKind.CUSTOM:
            return f"custom:{self.expression}"
        if self.kind is ModulusKind.XLOGX_PLUS1:
            return self.kind.value
        return f"{self.kind.value}:{self.c:g}"
