class FwldpError(Exception):
    """Base class for all toolkit errors."""


class ModelConfigError(FwldpError, ValueError):
    """Unknown model name or a parameter outside its documented range."""


class BlowUpError(FwldpError):
    """A solver produced a non-finite state.

    Attributes:
        step: Index of the first grid node holding a non-finite state.
    """
    def __init__(self, step: int, message: str | None = None):
        self.step = step
        super().__init__(message or f"Non-finite state at step {step}")


class SingularQuotientError(FwldpError):
    """V(x) = 0 while the diffusion pairing <sigma, V_x> is nonzero."""


class GridMismatchError(FwldpError, ValueError):
    """Two paths or a path and a control live on different time grids."""


class EmptyRegionError(FwldpError, ValueError):
    """An audit was asked to sample an empty region."""


class NonFiniteSampleError(FwldpError):
    """A coefficient returned a non-finite value at a sampled point.

    Attributes:
        s: Sampled time.
        x: Sampled state.
    """
    def __init__(self, s: float, x, message: str | None = None):
        self.s = s
        self.x = x
        super().__init__(message or f"Non-finite coefficient at s={s}, x={list(x)}")


class ConfigError(FwldpError):
    """Malformed run configuration."""


class OutputExistsError(FwldpError):
    """Refusing to overwrite an output file without --force."""
