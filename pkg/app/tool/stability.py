import numpy as np
from pydantic import Field

from app.fem.mesh import Mesh1D
from app.fem.operators import assemble
from app.noise import NoiseModel
from app.schema import CheckResult, DriftKind
from app.stepper import SchemeConfig, stability_profile
from app.tool.base import BaseCheck


class MeanSquareStabilityCheck(BaseCheck):
    """Running maximum of E||V^n||^2 under step doubling.

    From the default datum the maximum sits at n = 0, so the same comparison
    is repeated from v0 = 0 where it is set by the noise alone. Both runs of
    that pair share one Brownian grid of 2N steps.
    """

    name: str = "mean_square_stability"
    description: str = "max_n E||V^n||^2 does not grow when the number of steps doubles."

    s: float = Field(..., ge=0)
    n_cells: int = 64
    T: float = 1.0
    steps: int = 100
    samples: int = 200
    seed: int = 0
    drift: DriftKind = DriftKind.IDENTITY
    tolerance: float = 0.05

    async def execute(self) -> CheckResult:
        ops = assemble(Mesh1D(n_cells=self.n_cells))
        model = NoiseModel(s=self.s, J=ops.size)
        indices = range(self.samples)
        doubled = 2 * self.steps

        cfg = SchemeConfig(T=self.T, N=self.steps, drift=self.drift)
        coarse = float(np.max(stability_profile(ops, cfg, model, self.seed, indices)))
        fine = float(np.max(stability_profile(ops, cfg.with_steps(doubled), model, self.seed, indices)))
        change = abs(fine - coarse) / coarse

        quiet = cfg.model_copy(update={"v0_expression": "zero"})
        driven = stability_profile(ops, quiet, model, self.seed, indices, n_fine=doubled)
        driven_doubled = stability_profile(
            ops, quiet.with_steps(doubled), model, self.seed, indices, n_fine=doubled
        )
        driven_max = float(np.max(driven[1:]))
        driven_max_doubled = float(np.max(driven_doubled[1:]))
        growth = (driven_max_doubled - driven_max) / driven_max if driven_max > 0 else 0.0

        return self.verdict(
            bool(change < self.tolerance and growth < self.tolerance and np.isfinite(driven_max_doubled)),
            {
                "max_second_moment": coarse,
                "max_second_moment_doubled": fine,
                "relative_change": change,
                "noise_driven_max": driven_max,
                "noise_driven_max_doubled": driven_max_doubled,
                "noise_driven_growth": growth,
            },
        )
