from app.exceptions import ConfigError
from app.flow.base import BaseStudy
from app.flow.plan import StudyPlan
from app.flow.spatial import SpatialStudy
from app.flow.temporal import TemporalStudy
from app.schema import StudyKind


class StudyFactory:
    """Factory for creating convergence studies from a plan"""

    @staticmethod
    def create_study(plan: StudyPlan) -> BaseStudy:
        studies = {
            StudyKind.SPATIAL: SpatialStudy,
            StudyKind.TEMPORAL: TemporalStudy,
        }

        study_class = studies.get(plan.kind)
        if not study_class:
            raise ConfigError(f"Unknown study kind: {plan.kind}")

        return study_class(plan=plan)
