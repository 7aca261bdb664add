"""Resolution ladder and sampling parameters of one convergence study."""
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.schema import DriftKind, StudyKind


class StudyPlan(BaseModel):
    """Everything a convergence study needs; one plan gives one RateReport."""

    model_config = ConfigDict(frozen=True)

    kind: StudyKind
    resolutions: Tuple[int, ...] = Field(..., description="n_cells (spatial) or N (temporal)")
    reference: int = Field(..., description="Reference n_cells (spatial) or N (temporal)")
    fixed_step: float = Field(0.01, gt=0, description="k of a spatial study")
    fixed_cells: int = Field(64, ge=2, description="n_cells of a temporal study")
    T: float = Field(1.0, gt=0)
    beta: float = Field(1.0, ge=0)
    s: float = Field(0.5005, ge=0)
    J: Optional[int] = Field(None, ge=1)
    noise_enabled: bool = True
    drift: DriftKind = DriftKind.IDENTITY
    v0_modes: Tuple[Tuple[int, float], ...] = ((2, 1.0),)
    v0_expression: Optional[str] = None
    samples: int = Field(1000, ge=1)
    seed: int = Field(0, ge=0)
    workers: int = Field(1, ge=1)
    batch_size: int = Field(25, ge=1)
    coupled: bool = True
    error_history: bool = False
    gamma_margin: float = Field(0.05, gt=0)
    ladder_is_default: bool = False
