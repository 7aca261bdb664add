from app.flow.base import BaseStudy
from app.flow.flow_factory import StudyFactory
from app.flow.plan import StudyPlan
from app.flow.spatial import SpatialStudy, run_spatial_study
from app.flow.statistics import RateFit, StrongError, fit_rate, mc_error, summarize_squared_errors
from app.flow.temporal import TemporalStudy, run_temporal_study


__all__ = [
    "BaseStudy",
    "RateFit",
    "SpatialStudy",
    "StrongError",
    "StudyFactory",
    "StudyPlan",
    "TemporalStudy",
    "fit_rate",
    "mc_error",
    "run_spatial_study",
    "run_temporal_study",
    "summarize_squared_errors",
]
