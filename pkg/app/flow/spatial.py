from typing import List, Tuple

from app.exceptions import ConfigError
from app.flow.base import BaseStudy
from app.flow.plan import StudyPlan
from app.flow.runner import Level
from app.schema import RateReport, StudyKind


class SpatialStudy(BaseStudy):
    """Strong error in h at a fixed time step against a fine reference mesh."""

    def fine_steps(self) -> int:
        plan = self.plan
        steps = int(round(plan.T / plan.fixed_step))
        if steps < 1 or abs(steps * plan.fixed_step - plan.T) > 1e-9 * plan.T:
            raise ConfigError(f"Time step {plan.fixed_step} does not divide T={plan.T}")
        return steps

    def levels(self) -> Tuple[Level, List[Level]]:
        def level(n_cells: int) -> Level:
            return Level(n_cells=n_cells, fine_per_step=1, resolution=n_cells, parameter=1.0 / n_cells)

        return level(self.plan.reference), [level(r) for r in self.plan.resolutions]

    def expected_rate(self) -> float:
        return self.plan.beta


def run_spatial_study(plan: StudyPlan) -> RateReport:
    if plan.kind != StudyKind.SPATIAL:
        raise ConfigError(f"Expected a spatial plan, got {plan.kind.value}")
    return SpatialStudy(plan=plan).execute()
