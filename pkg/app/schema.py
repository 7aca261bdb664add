from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field


SCHEMA_VERSION = "1"


class StudyKind(str, Enum):
    """Convergence study options"""

    SPATIAL = "spatial"
    TEMPORAL = "temporal"


class DriftKind(str, Enum):
    """Drift options for f(u)"""

    ZERO = "zero"
    IDENTITY = "identity"
    SINE = "sine"
    TANH = "tanh"


class CheckStatus(str, Enum):
    """Validation check outcomes"""

    PASSED = "passed"
    FAILED = "failed"


class ErrorRow(BaseModel):
    """Strong error at one resolution of a convergence study"""

    resolution: int
    h_or_k: float
    strong_error: float
    stderr: float
    history: Optional[List[float]] = Field(
        default=None, description="Strong error at every coarse time point"
    )


class RateReport(BaseModel):
    kind: StudyKind
    rows: List[ErrorRow]
    slope: float
    intercept: float
    residual: float
    samples: int
    expected_rate: float = Field(..., description="Theoretical exponent of the study")
    ladder_is_default: bool = Field(
        False, description="The ladder is the built-in choice, not taken from a source"
    )

    def confidence_band(self) -> float:
        """Largest relative half-width (one standard error) over the ladder."""
        return max(row.stderr / row.strong_error for row in self.rows)


class NormRecord(BaseModel):
    n: int
    t: float
    norm_V: float
    norm_U: float


class TrajectorySummary(BaseModel):
    n_cells: int
    steps: int
    final_time: float
    nodes: List[float]
    final_V: List[float]
    final_U: List[float]
    history: List[NormRecord]


class CheckResult(BaseModel):
    """Outcome of one oracle check"""

    name: str
    status: CheckStatus
    measured: Dict[str, Any] = Field(default_factory=dict)
    detail: Optional[str] = Field(default=None)

    def __bool__(self):
        return self.status == CheckStatus.PASSED


class ResultEnvelope(BaseModel):
    schema_version: str = SCHEMA_VERSION
    version: str
    command: str
    config: Dict[str, Any]
    timing: Optional[Dict[str, float]] = None
    rate: Optional[RateReport] = None
    trajectory: Optional[TrajectorySummary] = None
    checks: Optional[List[CheckResult]] = None
