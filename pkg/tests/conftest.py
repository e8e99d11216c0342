from pathlib import Path
from textwrap import dedent

import numpy as np
import pytest

from scripts.common.models.model import LyapunovBundle, ModelSpec, MonotonicityBundle, constant_weight
from scripts.common.models.modulus import ModulusSpec


def make_model(drift=None, diffusion=None, d=1, m=1, x0=None, T=1.0, **kwargs) -> ModelSpec:
    """A throwaway model; zero drift and zero diffusion unless given."""
    if drift is None:
        def drift(t, x):
            return np.zeros(np.shape(x))
    if diffusion is None:
        def diffusion(t, x):
            return np.zeros(np.shape(x)[:-1] + (d, m))
    return ModelSpec("test", d, m, np.zeros(d) if x0 is None else x0, T, drift, diffusion, **kwargs)


def norm_sq_bundle(d: int, V=None, V_x=None) -> LyapunovBundle:
    return LyapunovBundle(
        V=V or (lambda x: np.sum(np.asarray(x) ** 2, axis=-1)),
        V_x=V_x or (lambda x: 2.0 * np.asarray(x, dtype=float)),
        V_xx=lambda x: np.broadcast_to(2.0 * np.eye(d), np.shape(x)[:-1] + (d, d)),
        delta=1.0,
        eta=1.0,
        f_weight=constant_weight(1.0),
        gamma=ModulusSpec.linear(1.0),
    )


def linear_monotonicity() -> MonotonicityBundle:
    return MonotonicityBundle(eps0=0.5, g_weight=constant_weight(1.0), eta=ModulusSpec.linear)


@pytest.fixture
def zero_model() -> ModelSpec:
    return make_model(lyapunov=norm_sq_bundle(1), monotonicity=linear_monotonicity())


@pytest.fixture
def write_config(tmp_path: Path):
    """Writes INI text to tmp_path and returns its path; ``{out}`` expands to an output prefix there."""
    def write(text: str, name: str = "run.ini") -> Path:
        path = tmp_path / name
        path.write_text(dedent(text).format(out=tmp_path / "out"))
        return path
    return write
