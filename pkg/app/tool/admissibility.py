from typing import List, Tuple

from pydantic import Field

from app.schema import CheckResult
from app.spectral import check_admissibility
from app.tool.base import BaseCheck


REFERENCE_CASES: List[Tuple[float, float, bool]] = [
    (1.0, 0.5005, True),
    (0.5, 0.0005, True),
    (1.0, 0.5, False),
]


class AdmissibilityCheck(BaseCheck):
    name: str = "admissibility"
    description: str = "beta < s + 1 - d/2 on the reference cases and on the configured (beta, s)."

    beta: float = Field(..., ge=0)
    s: float = Field(..., ge=0)

    async def execute(self) -> CheckResult:
        measured = {}
        for beta, s, expected in REFERENCE_CASES:
            report = check_admissibility(beta, s)
            measured[f"beta={beta},s={s}"] = report.admissible
            if report.admissible != expected:
                return self.failed(measured, f"reference case misclassified: {report.describe()}")

        report = check_admissibility(self.beta, self.s)
        measured["configured"] = report.admissible
        measured["hs_norm_sq"] = report.hs_norm_sq
        return self.verdict(report.admissible, measured, report.describe())
