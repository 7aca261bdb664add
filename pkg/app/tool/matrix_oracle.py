from typing import Callable, List

import numpy as np
from pydantic import Field

from app.fem.mesh import Mesh1D
from app.fem.operators import FemOperators, assemble
from app.schema import CheckResult
from app.tool.base import BaseCheck


def _relative_gap(actual: np.ndarray, expected: float) -> float:
    return float(np.max(np.abs(actual - expected)) / abs(expected)) if actual.size else 0.0


class MatrixOracle(BaseCheck):
    name: str = "matrix_oracle"
    description: str = "Assembled mass and stiffness entries against 2h/3, h/6, 2/h and -1/h."

    sizes: List[int] = Field(default_factory=lambda: [2, 4, 64, 1024])
    tolerance: float = 1e-14
    assembler: Callable[[Mesh1D], FemOperators] = assemble

    async def execute(self) -> CheckResult:
        worst = 0.0
        measured = {}
        for n_cells in self.sizes:
            ops = self.assembler(Mesh1D(n_cells=n_cells))
            h = ops.mesh.h
            gap = max(
                _relative_gap(ops.mass_diag, 2.0 * h / 3.0),
                _relative_gap(ops.mass_off, h / 6.0),
                _relative_gap(ops.stiff_diag, 2.0 / h),
                _relative_gap(ops.stiff_off, -1.0 / h),
            )
            measured[f"n_cells={n_cells}"] = gap
            worst = max(worst, gap)
        return self.verdict(
            worst <= self.tolerance,
            measured,
            f"largest relative deviation {worst:.3e} (tolerance {self.tolerance:.0e})",
        )
