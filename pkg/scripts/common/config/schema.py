"""Run configuration: an INI file, one section per concern, validated with pydantic."""

from configparser import ConfigParser, Error as IniError
from pathlib import Path
from typing import Annotated, Literal

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, ValidationError

from scripts.common.errors import ConfigError

Command = Literal["simulate", "skeleton", "rate", "verify", "mc-ldp", "converge-i", "converge-ii"]


def _split(value):
    if isinstance(value, str):
        return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]
    return value


# comma-separated lists in INI values
FloatList = Annotated[list[float], BeforeValidator(_split)]
IntList = Annotated[list[int], BeforeValidator(_split)]


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RunSection(Section):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    command: Command | None = Field(None, description="Operation to run; set by the subcommand when omitted")
    output: str = Field("fwldp", description="Output path prefix")
    seed: int = Field(0, ge=0, description="Root seed of all random streams")
    as_json: bool = Field(False, alias="json", description="Also emit JSON records")
    threads: int = Field(1, ge=1, description="Worker threads")


class ModelSection(BaseModel):
    """Model name, optional horizon and initial state; any other key overrides a parameter."""
    model_config = ConfigDict(extra="allow")

    name: str = Field(..., description="Registered model name")
    T: float | None = Field(None, gt=0, description="Horizon")
    x0: FloatList | None = Field(None, description="Initial state, comma separated")

    @property
    def overrides(self) -> dict[str, str]:
        return dict(self.model_extra or {})


class GridSection(Section):
    K: int = Field(1024, ge=1, description="Number of time steps")


class ControlSection(Section):
    kind: Literal["zero", "constant", "sinusoid", "file"] = "zero"
    value: FloatList | None = None
    n: int = Field(1, ge=1)
    direction: FloatList | None = None
    file: str | None = None
    bound: float | None = Field(None, gt=0)


class TargetSection(Section):
    kind: Literal["point", "halfspace"] = "point"
    z: FloatList | None = None
    a: FloatList | None = None
    c: float = 0.0
    tolerance: float = Field(1e-4, gt=0)


class EventSection(Section):
    kind: Literal["endpoint_halfspace", "exit_ball"] = "endpoint_halfspace"
    a: FloatList | None = None
    c: float = 0.0
    R: float | None = Field(None, gt=0)


class OptimizerSection(Section):
    gtol: float = Field(1e-8, ge=0)
    max_iter: int = Field(500, ge=1)
    memory: int = Field(10, ge=1)
    mu_max: float = Field(1e8, gt=0)
    refine: bool = False


class SimulateSection(Section):
    epsilon: float = Field(0.1, ge=0)
    sample: int = Field(0, ge=0)
    controlled: bool = False


class VerifySection(Section):
    R: float = Field(5.0, gt=0, description="Monotonicity ball radius")
    n_pairs: int = Field(16384, ge=1)
    region_radius: float = Field(10.0, gt=0)
    n_points: int = Field(16384, ge=1)
    tol: float = Field(1e-9, ge=0)
    eps0: float | None = Field(None, gt=0, lt=1)
    n_t: int = Field(129, ge=2)
    n_x: int = Field(1024, ge=1)
    ratio_n_c: int = Field(64, ge=2)
    ratio_n_s: int = Field(4096, ge=2)
    gamma_cap: float = Field(1e6, gt=0)
    osgood: bool = True
    coercivity: bool = False
    modulus: str | None = Field(None, description="Extra modulus to ratio-audit, e.g. xlogx_plus1")
    modulus_cap: float = Field(1e6, gt=0)


class MCSection(Section):
    eps: FloatList = Field(default_factory=lambda: [0.4, 0.2, 0.1])
    n: int = Field(10000, ge=1)
    rate: float | None = Field(None, ge=0, description="Rate of the event; solved for when omitted")
    exact: Literal["brownian", "ou"] | None = None


class ConvergeSection(Section):
    eps: FloatList = Field(default_factory=lambda: [0.1, 0.01, 0.001])
    delta: float = Field(0.25, gt=0)
    n: int = Field(10000, ge=1)
    R: float = Field(10.0, gt=0)
    p: float | None = Field(None, gt=0)


class WeakSection(Section):
    ns: IntList = Field(default_factory=lambda: [1, 2, 4, 8, 16])
    direction: FloatList | None = None


class RunConfig(Section):
    run: RunSection
    model: ModelSection
    grid: GridSection = Field(default_factory=GridSection)
    control: ControlSection = Field(default_factory=ControlSection)
    target: TargetSection = Field(default_factory=TargetSection)
    event: EventSection = Field(default_factory=EventSection)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    simulate: SimulateSection = Field(default_factory=SimulateSection)
    verify: VerifySection = Field(default_factory=VerifySection)
    mc: MCSection = Field(default_factory=MCSection)
    converge: ConvergeSection = Field(default_factory=ConvergeSection)
    weak: WeakSection = Field(default_factory=WeakSection)


def format_validation_error(e: ValidationError) -> str:
    lines = []
    for err in e.errors():
        where = ".".join(str(part) for part in err["loc"])
        lines.append(f"{where}: {err['msg']}")
    return "; ".join(lines)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parses and validates INI text.

    Raises:
        ConfigError: On INI syntax errors (with line number) or failed validation
            (with section.field).
    """
    parser = ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except IniError as e:
        line = getattr(e, "lineno", None)
        if line is None and getattr(e, "errors", None):
            line = e.errors[0][0]
        where = f"{source}, line {line}" if line is not None else source
        raise ConfigError(f"{where}: {e.message if hasattr(e, 'message') else e}") from e
    data = {name: dict(parser.items(name)) for name in parser.sections()}
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"{source}: {format_validation_error(e)}") from e


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    return parse_config(text, str(path))
