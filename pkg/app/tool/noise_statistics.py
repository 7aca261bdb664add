import numpy as np
from pydantic import Field

from app.fem.mesh import Mesh1D
from app.fem.operators import assemble
from app.noise import BrownianTable, NoiseModel, hat_projection, sample_increment, wiener_norm_check
from app.schema import CheckResult, DriftKind
from app.spectral import make_basis, ou_moments
from app.stepper import advance, get_drift
from app.tool.base import BaseCheck


class ItoIsometryCheck(BaseCheck):
    name: str = "ito_isometry"
    description: str = "E||W(T)||^2 against T * Tr_J(Q) over independent samples."

    s: float = Field(..., ge=0)
    J: int = Field(16, ge=1)
    T: float = 1.0
    samples: int = 10_000
    seed: int = 0
    n_stderr: float = 3.0

    async def execute(self) -> CheckResult:
        statistic = wiener_norm_check(NoiseModel(s=self.s, J=self.J), self.T, self.samples, self.seed)
        measured = {
            "mean": statistic.mean,
            "expected": statistic.expected,
            "stderr": statistic.stderr,
            "ratio": statistic.ratio,
        }
        return self.verdict(
            statistic.within(self.n_stderr),
            measured,
            f"E||W({self.T})||^2 = {statistic.mean:.6g} vs {statistic.expected:.6g}",
        )


class OUMomentsCheck(BaseCheck):
    """Zero drift, zero initial datum: low FEM modes follow the implicit Euler OU recursion."""

    name: str = "ou_moments"
    description: str = "Per-mode variance of the FEM solution against the discrete OU variance."

    s: float = 4.0
    J: int = 16
    n_cells: int = 64
    T: float = 0.1
    steps: int = 100
    modes: int = 3
    samples: int = 10_000
    batch_size: int = 1000
    seed: int = 0
    n_stderr: float = 3.0

    async def execute(self) -> CheckResult:
        ops = assemble(Mesh1D(n_cells=self.n_cells))
        model = NoiseModel(s=self.s, J=self.J)
        projection = hat_projection(ops, self.J)
        drift = get_drift(DriftKind.ZERO)
        sqrt_gamma = np.sqrt(model.gamma)
        k = self.T / self.steps

        coeffs = np.empty((self.modes, self.samples))
        for start in range(0, self.samples, self.batch_size):
            stop = min(start + self.batch_size, self.samples)
            increments = sqrt_gamma * np.stack(
                [
                    BrownianTable(seed=self.seed, sample_index=i, J=self.J, n_fine=self.steps, T=self.T)
                    .fine_increments(0, self.steps)
                    for i in range(start, stop)
                ]
            )
            V = np.zeros((ops.size, stop - start))
            U = np.zeros_like(V)
            for m in range(self.steps):
                V, U = advance(ops, k, drift, V, U, projection @ increments[:, m, :].T)
            coeffs[:, start:stop] = projection[:, : self.modes].T @ V

        expected = ou_moments(make_basis(self.J), model, self.T, time_step=k).variance[: self.modes]
        squares = coeffs**2
        empirical = squares.mean(axis=1)
        stderr = squares.std(axis=1, ddof=1) / np.sqrt(self.samples)
        ok = bool(np.all(np.abs(empirical - expected) <= self.n_stderr * stderr))
        measured = {
            "empirical": empirical.tolist(),
            "expected": expected.tolist(),
            "stderr": stderr.tolist(),
        }
        return self.verdict(ok, measured)


class BrownianRefinementCheck(BaseCheck):
    name: str = "brownian_refinement"
    description: str = "Coarse increments equal sums of fine increments, bit for bit, and tables regenerate exactly."

    J: int = 8
    n_fine: int = 1024
    seed: int = 0

    async def execute(self) -> CheckResult:
        table = BrownianTable(seed=self.seed, sample_index=3, J=self.J, n_fine=self.n_fine, T=1.0)
        fine = table.fine_increments(0, self.n_fine)
        twin = BrownianTable(seed=self.seed, sample_index=3, J=self.J, n_fine=self.n_fine, T=1.0)
        if not np.array_equal(fine, twin.fine_increments(0, self.n_fine)):
            return self.failed({}, "regenerated table differs")

        mismatched = []
        c = 2
        while c <= self.n_fine:
            summed = fine[0::c].copy()
            for r in range(1, c):
                summed += fine[r::c]
            if not np.array_equal(summed, table.coarse_increments(c, 0, self.n_fine // c)):
                mismatched.append(c)
            c *= 2

        model = NoiseModel(s=1.0, J=self.J)
        last = sample_increment(table, model, 2, 0.5)
        expected_last = np.sqrt(model.gamma) * table.coarse_increments(self.n_fine // 2, 1, 1)[0]
        if not np.array_equal(last, expected_last):
            mismatched.append("sample_increment")
        return self.verdict(not mismatched, {"mismatched": mismatched})
