from typing import Tuple

import numpy as np

from app.fem.mesh import Mesh1D
from app.fem.operators import ScalarFunction, assemble, l2_error
from app.schema import CheckResult, DriftKind
from app.stepper import SchemeConfig, run_trajectory
from app.tool.base import BaseCheck


LAMBDA_2 = (2.0 * np.pi) ** 2


def exact_u(t: float) -> ScalarFunction:
    """u(t,x) for v0 = sin(2 pi x), f(u) = u and no noise."""
    rate = -LAMBDA_2 + 1.0 / (1.0 + LAMBDA_2)
    scale = np.exp(rate * t) / (1.0 + LAMBDA_2)
    return lambda x: scale * np.sin(2.0 * np.pi * np.asarray(x, dtype=float))


def relative_error(n_cells: int, steps: int, T: float) -> float:
    ops = assemble(Mesh1D(n_cells=n_cells))
    cfg = SchemeConfig(T=T, N=steps, drift=DriftKind.IDENTITY, v0_modes=((2, 1.0),))
    final = run_trajectory(ops, cfg).final.U
    u = exact_u(T)
    # ||u(T)|| is the amplitude over sqrt(2)
    norm = abs(float(u(0.25))) / np.sqrt(2.0)
    return l2_error(ops, final, u) / norm


class ExactSolutionCheck(BaseCheck):
    name: str = "exact_solution"
    description: str = "Noise-free scheme against the closed-form solution: h^2 and k error reduction."

    T: float = 0.05
    coarse_cells: int = 8
    tiny_step_count: int = 5000
    fine_cells: int = 256
    coarse_steps: int = 50
    h_band: Tuple[float, float] = (3.4, 4.6)
    k_band: Tuple[float, float] = (1.8, 2.2)

    async def execute(self) -> CheckResult:
        h_ratio = relative_error(self.coarse_cells, self.tiny_step_count, self.T) / relative_error(
            2 * self.coarse_cells, self.tiny_step_count, self.T
        )
        k_ratio = relative_error(self.fine_cells, self.coarse_steps, self.T) / relative_error(
            self.fine_cells, 2 * self.coarse_steps, self.T
        )
        ok = self.h_band[0] <= h_ratio <= self.h_band[1] and self.k_band[0] <= k_ratio <= self.k_band[1]
        return self.verdict(
            ok,
            {"h_halving_ratio": h_ratio, "k_halving_ratio": k_ratio},
            f"h-halving {h_ratio:.3f} in {list(self.h_band)}, k-halving {k_ratio:.3f} in {list(self.k_band)}",
        )
