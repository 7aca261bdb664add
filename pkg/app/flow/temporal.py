from typing import List, Tuple

from app.exceptions import ConfigError
from app.flow.base import BaseStudy
from app.flow.plan import StudyPlan
from app.flow.runner import Level
from app.schema import RateReport, StudyKind


class TemporalStudy(BaseStudy):
    """Strong error in k on a fixed mesh; every ladder step sums reference-grid increments."""

    def fine_steps(self) -> int:
        return self.plan.reference

    def levels(self) -> Tuple[Level, List[Level]]:
        plan = self.plan

        def level(steps: int) -> Level:
            return Level(
                n_cells=plan.fixed_cells,
                fine_per_step=plan.reference // steps,
                resolution=steps,
                parameter=plan.T / steps,
            )

        return level(plan.reference), [level(N) for N in plan.resolutions]

    def expected_rate(self) -> float:
        # gamma/2 with gamma strictly below beta
        return max(self.plan.beta - self.plan.gamma_margin, 0.0) / 2.0


def run_temporal_study(plan: StudyPlan) -> RateReport:
    if plan.kind != StudyKind.TEMPORAL:
        raise ConfigError(f"Expected a temporal plan, got {plan.kind.value}")
    return TemporalStudy(plan=plan).execute()
