import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

from dotenv import find_dotenv, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from app.exceptions import ConfigError
from app.schema import DriftKind, StudyKind


def get_project_root() -> Path:
    """Get the project root directory"""
    return Path(__file__).resolve().parent.parent


PROJECT_ROOT = get_project_root()
OUTPUT_DIR_ENV = "SBBM_OUTPUT_DIR"
# where and how a run executes; never changes its numbers
EXECUTION_KEYS = ("study.workers", "output.dir")

load_dotenv(find_dotenv(usecwd=True))


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SchemeSettings(_Section):
    T: float = Field(1.0, gt=0, description="Final time")
    N: int = Field(100, ge=0, description="Number of time steps")
    n_cells: int = Field(64, ge=2, description="Number of mesh cells on (0,1)")
    f: DriftKind = Field(DriftKind.IDENTITY, description="Drift f(u)")
    v0_modes: List[Tuple[int, float]] = Field(
        default_factory=lambda: [(2, 1.0)],
        description="Initial datum as (m, a) pairs of a*sin(m*pi*x)",
    )
    v0_expression: Optional[str] = Field(
        None, description="Named initial datum; overrides v0_modes when set"
    )
    record_path: bool = Field(False, description="Keep every V^n, U^n")

    @field_validator("v0_modes")
    @classmethod
    def _positive_modes(cls, value):
        for mode, _ in value:
            if mode < 1:
                raise ValueError(f"sine mode index must be >= 1, got {mode}")
        return value


class NoiseSettings(_Section):
    enabled: bool = Field(True, description="Drive the scheme with Q-Wiener noise")
    s: float = Field(0.5005, ge=0, description="Covariance exponent, Q = A^{-s}")
    J: Optional[int] = Field(
        None, ge=1, description="Karhunen-Loeve truncation; default is finest interior node count"
    )
    seed: int = Field(20240611, ge=0, lt=2**64, description="Root seed")


class StudySettings(_Section):
    beta: float = Field(1.0, ge=0, description="Target regularity")
    resolutions: List[int] = Field(
        default_factory=lambda: [8, 16, 32, 64, 128],
        description="n_cells ladder (spatial) or N ladder (temporal)",
    )
    reference: int = Field(1024, description="Reference n_cells (spatial) or N (temporal)")
    fixed_step: float = Field(0.01, gt=0, description="Time step k held fixed in a spatial study")
    fixed_cells: int = Field(64, ge=2, description="n_cells held fixed in a temporal study")
    samples: int = Field(1000, ge=1, description="Monte Carlo sample count")
    workers: int = Field(1, ge=1, description="Worker processes")
    batch_size: int = Field(25, ge=1, description="Samples advanced together per work unit")
    coupled: bool = Field(True, description="Share Brownian paths across resolutions")
    error_history: bool = Field(False, description="Record strong error at every coarse step")
    gamma_margin: float = Field(0.05, gt=0, description="gamma = beta - margin for temporal targets")


class OutputSettings(_Section):
    dir: str = Field("results", description="Directory receiving output files")
    timing: bool = Field(False, description="Embed wall-clock timing in envelopes")


class RunConfig(_Section):
    scheme: SchemeSettings = Field(default_factory=SchemeSettings)
    noise: NoiseSettings = Field(default_factory=NoiseSettings)
    study: StudySettings = Field(default_factory=StudySettings)
    output: OutputSettings = Field(default_factory=OutputSettings)

    def flatten(self) -> Dict[str, Any]:
        """Dotted-key view of the resolved configuration."""
        flat = {}
        for section, values in self.model_dump(mode="json").items():
            for key, value in values.items():
                flat[f"{section}.{key}"] = value
        return flat

    def echo(self) -> Dict[str, Any]:
        """Resolved configuration as embedded in result files."""
        return {key: value for key, value in self.flatten().items() if key not in EXECUTION_KEYS}


def _get_config_path() -> Path:
    root = PROJECT_ROOT
    config_path = root / "config" / "config.toml"
    if config_path.exists():
        return config_path
    example_path = root / "config" / "config.example.toml"
    if example_path.exists():
        return example_path
    raise ConfigError("No configuration file found in config directory")


def _parse_value(raw: str) -> Any:
    try:
        return tomllib.loads(f"value = {raw}")["value"]
    except tomllib.TOMLDecodeError:
        return raw


def parse_override(item: str) -> Tuple[str, Any]:
    """Split a ``section.key=value`` override into its dotted key and value."""
    if "=" not in item:
        raise ConfigError(f"Override '{item}' is not of the form key=value")
    key, raw = item.split("=", 1)
    key = key.strip()
    if key.count(".") != 1:
        raise ConfigError(f"Override key '{key}' must be a dotted section.key")
    return key, _parse_value(raw.strip())


def _apply_overrides(raw: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    loose = [key for key, values in raw.items() if not isinstance(values, dict)]
    if loose:
        raise ConfigError(
            f"Top-level keys must be [section] tables, got: {', '.join(sorted(loose))}"
        )
    merged = {section: dict(values) for section, values in raw.items()}
    for dotted, value in overrides.items():
        section, key = dotted.split(".", 1)
        merged.setdefault(section, {})[key] = value
    return merged


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None,
    env: Optional[Dict[str, str]] = None,
) -> RunConfig:
    """Read the TOML config, apply dotted overrides, then validate.

    The output directory is taken from, in decreasing priority, an
    ``output.dir`` override, the ``SBBM_OUTPUT_DIR`` environment variable and
    the file.
    """
    config_path = Path(path) if path is not None else _get_config_path()
    try:
        with config_path.open("rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError:
        raise ConfigError(f"Configuration file {config_path} not found")
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"Configuration file {config_path} is not valid TOML: {e}")

    overrides = dict(overrides or {})
    env = os.environ if env is None else env
    if "output.dir" not in overrides and env.get(OUTPUT_DIR_ENV):
        overrides["output.dir"] = env[OUTPUT_DIR_ENV]

    return build_run_config(_apply_overrides(raw, overrides))


def build_run_config(raw: Dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(f"Invalid configuration: {problems}")


def collect_overrides(items: Iterable[str]) -> Dict[str, Any]:
    return dict(parse_override(item) for item in items)
