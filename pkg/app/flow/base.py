from abc import ABC, abstractmethod
from typing import List, Tuple

from pydantic import BaseModel

from app.exceptions import ConfigError
from app.flow.plan import StudyPlan
from app.flow.runner import Level, StudyRun, run_levels
from app.flow.statistics import fit_rate, summarize_squared_errors
from app.logger import logger
from app.schema import ErrorRow, RateReport
from app.spectral import check_admissibility


def _is_power_of_two(value: int) -> bool:
    return value > 0 and value & (value - 1) == 0


class BaseStudy(BaseModel, ABC):
    """Base class for Monte Carlo strong-error studies over a resolution ladder"""

    plan: StudyPlan

    @abstractmethod
    def levels(self) -> Tuple[Level, List[Level]]:
        """Reference level and ladder levels, coarsest first."""

    @abstractmethod
    def expected_rate(self) -> float:
        """Theoretical order the fitted slope should approach."""

    @abstractmethod
    def fine_steps(self) -> int:
        """Number of steps of the common fine time grid."""

    def validate_plan(self) -> None:
        plan = self.plan
        if not plan.resolutions:
            raise ConfigError("Study ladder is empty")
        if list(plan.resolutions) != sorted(set(plan.resolutions)):
            raise ConfigError(f"Ladder {list(plan.resolutions)} must be strictly increasing")
        for r in plan.resolutions:
            if r >= plan.reference:
                raise ConfigError(f"Resolution {r} is not coarser than the reference {plan.reference}")
            if plan.reference % r or not _is_power_of_two(plan.reference // r):
                raise ConfigError(
                    f"Resolution {r} is not dyadically nested in the reference {plan.reference}"
                )
        if plan.noise_enabled:
            report = check_admissibility(plan.beta, plan.s)
            if not report.admissible:
                raise ConfigError(f"Inadmissible noise regularity: {report.describe()}")

    def execute(self) -> RateReport:
        self.validate_plan()
        plan = self.plan
        reference, ladder = self.levels()
        logger.info(
            f"Running {plan.kind.value} study: {len(ladder)} levels against reference "
            f"{reference.label}, {plan.samples} samples"
        )
        run = StudyRun(plan=plan, reference=reference, ladder=ladder, n_fine=self.fine_steps())
        squared, histories = run_levels(run)

        rows = []
        for index, level in enumerate(ladder):
            strong = summarize_squared_errors(squared[index])
            history = None
            if histories is not None:
                history = [
                    summarize_squared_errors(point).error for point in histories[index]
                ]
            rows.append(
                ErrorRow(
                    resolution=level.resolution,
                    h_or_k=level.parameter,
                    strong_error=strong.error,
                    stderr=strong.stderr,
                    history=history,
                )
            )
            logger.info(
                f"{level.label}: strong error {strong.error:.6e} +/- {strong.stderr:.2e}"
            )

        fit = fit_rate([(row.h_or_k, row.strong_error) for row in rows])
        logger.info(f"Fitted {plan.kind.value} rate {fit.slope:.4f} (expected {self.expected_rate():.4f})")
        return RateReport(
            kind=plan.kind,
            rows=rows,
            slope=fit.slope,
            intercept=fit.intercept,
            residual=fit.residual,
            samples=plan.samples,
            expected_rate=self.expected_rate(),
            ladder_is_default=plan.ladder_is_default,
        )
