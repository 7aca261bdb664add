"""Semi-implicit Euler-Maruyama finite element scheme.

Per step n >= 1:

    (M + k K) V^n = M V^{n-1} + k M f(U^{n-1}) + b^n
    (M + K) U^n  = M V^n

where b^n is the load of P_h (W(t_n) - W(t_{n-1})). Diffusion is implicit,
the drift explicit. Coefficient arrays may carry Monte Carlo samples along
a second axis; columns never interact.
"""
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.exceptions import ConfigError, NumericalError
from app.fem.mesh import FemFunction, ensure_same_mesh
from app.fem.operators import (
    FemOperators,
    ScalarFunction,
    SineSeries,
    elliptic_recover_coeffs,
    l2_project,
    mass_norm_sq,
)
from app.logger import logger
from app.noise import BrownianTable, NoiseModel, noise_load_vector, sample_increment
from app.schema import DriftKind, NormRecord


RECOVERY_RESIDUAL_TOLERANCE = 1e-12


class Drift(BaseModel):
    """Nodal drift f with its global Lipschitz constant K_f."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: DriftKind
    lipschitz: float = Field(..., ge=0, description="K_f in ||f(a)-f(b)|| <= K_f ||a-b||")
    func: Callable[[np.ndarray], np.ndarray]

    def __call__(self, u: np.ndarray) -> np.ndarray:
        values = self.func(u)
        if not np.all(np.isfinite(values)):
            raise NumericalError(f"Drift '{self.kind.value}' produced non-finite values")
        return values


DRIFTS: Dict[DriftKind, Drift] = {
    DriftKind.ZERO: Drift(kind=DriftKind.ZERO, lipschitz=0.0, func=np.zeros_like),
    DriftKind.IDENTITY: Drift(kind=DriftKind.IDENTITY, lipschitz=1.0, func=lambda u: u),
    DriftKind.SINE: Drift(kind=DriftKind.SINE, lipschitz=1.0, func=np.sin),
    DriftKind.TANH: Drift(kind=DriftKind.TANH, lipschitz=1.0, func=np.tanh),
}


def get_drift(kind: Union[DriftKind, str]) -> Drift:
    try:
        return DRIFTS[DriftKind(kind)]
    except ValueError:
        raise ConfigError(
            f"Unknown drift '{kind}'. Available: {', '.join(k.value for k in DriftKind)}"
        )


def check_lipschitz(drift: Drift, trials: int = 200, size: int = 32, seed: int = 0) -> float:
    """Largest observed ||f(a)-f(b)|| / ||a-b|| over random nodal vectors."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        a = rng.normal(scale=3.0, size=size)
        b = rng.normal(scale=3.0, size=size)
        gap = np.linalg.norm(a - b)
        if gap > 0:
            worst = max(worst, float(np.linalg.norm(drift(a) - drift(b)) / gap))
    return worst


INITIAL_DATA: Dict[str, ScalarFunction] = {
    "zero": lambda x: np.zeros_like(x),
    "parabola": lambda x: 4.0 * x * (1.0 - x),
}


class SchemeConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    T: float = Field(..., gt=0)
    N: int = Field(..., ge=0)
    drift: DriftKind = DriftKind.IDENTITY
    v0_modes: Tuple[Tuple[int, float], ...] = ((2, 1.0),)
    v0_expression: Optional[str] = None

    @property
    def k(self) -> float:
        return self.T / self.N if self.N else 0.0

    def time(self, n: int) -> float:
        return n * self.k

    def initial_datum(self) -> Union[SineSeries, ScalarFunction]:
        if self.v0_expression is not None:
            try:
                return INITIAL_DATA[self.v0_expression]
            except KeyError:
                raise ConfigError(
                    f"Unknown initial datum '{self.v0_expression}'. "
                    f"Available: {', '.join(INITIAL_DATA)}"
                )
        return SineSeries.of(self.v0_modes)

    def with_steps(self, N: int) -> "SchemeConfig":
        return self.model_copy(update={"N": N})


class TrajectoryState(BaseModel):
    """V^n and U^n; coefficient arrays may hold one sample per column."""

    n: int
    V: FemFunction
    U: FemFunction


class NoiseSource(BaseModel):
    """A Brownian table paired with the covariance it is scaled by."""

    table: BrownianTable
    model: NoiseModel


class Trajectory(BaseModel):
    final: TrajectoryState
    history: List[NormRecord] = Field(default_factory=list)
    path: Optional[List[TrajectoryState]] = None


def init(ops: FemOperators, cfg: SchemeConfig) -> TrajectoryState:
    """V^0 = P_h v_0, U^0 = (P_h + A_h)^{-1} V^0."""
    V0 = l2_project(ops, cfg.initial_datum())
    U0 = elliptic_recover_coeffs(ops, V0.coeffs)
    return TrajectoryState(n=0, V=V0, U=FemFunction(mesh=ops.mesh, coeffs=U0))


def init_batch(ops: FemOperators, cfg: SchemeConfig, batch: int) -> TrajectoryState:
    state = init(ops, cfg)
    return TrajectoryState(
        n=0,
        V=FemFunction(mesh=ops.mesh, coeffs=np.repeat(state.V.coeffs[:, None], batch, axis=1)),
        U=FemFunction(mesh=ops.mesh, coeffs=np.repeat(state.U.coeffs[:, None], batch, axis=1)),
    )


def advance(
    ops: FemOperators,
    k: float,
    drift: Drift,
    V: np.ndarray,
    U: np.ndarray,
    noise_load: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """One step on raw coefficient arrays; returns (V^n, U^n)."""
    if k <= 0:
        raise ConfigError(f"Time step must be positive, got {k}")
    rhs = ops.mass_matvec(V)
    if drift.kind != DriftKind.ZERO:
        rhs += k * ops.mass_matvec(drift(U))
    if noise_load is not None:
        rhs += noise_load
    V_next = ops.solve(k, rhs)
    return V_next, elliptic_recover_coeffs(ops, V_next)


def step(
    ops: FemOperators,
    cfg: SchemeConfig,
    state: TrajectoryState,
    noise_load: Optional[np.ndarray] = None,
) -> TrajectoryState:
    ensure_same_mesh(ops.mesh, state.V.mesh)
    V, U = advance(ops, cfg.k, get_drift(cfg.drift), state.V.coeffs, state.U.coeffs, noise_load)
    return TrajectoryState(
        n=state.n + 1,
        V=FemFunction(mesh=ops.mesh, coeffs=V),
        U=FemFunction(mesh=ops.mesh, coeffs=U),
    )


def recovery_residual(ops: FemOperators, state: TrajectoryState) -> float:
    """Normwise backward error ||r|| / (||M + K|| ||U|| + ||M V||) of (M + K) U = M V."""
    U, V = state.U.coeffs, state.V.coeffs
    lhs = ops.mass_matvec(U) + ops.stiffness_matvec(U)
    rhs = ops.mass_matvec(V)
    scale = ops.shifted_norm(1.0) * np.linalg.norm(U) + np.linalg.norm(rhs)
    return float(np.linalg.norm(lhs - rhs) / scale) if scale > 0 else 0.0


def _norm_record(ops: FemOperators, cfg: SchemeConfig, state: TrajectoryState) -> NormRecord:
    return NormRecord(
        n=state.n,
        t=cfg.time(state.n),
        norm_V=float(np.sqrt(mass_norm_sq(ops, state.V.coeffs))),
        norm_U=float(np.sqrt(mass_norm_sq(ops, state.U.coeffs))),
    )


def run_trajectory(
    ops: FemOperators,
    cfg: SchemeConfig,
    noise: Optional[NoiseSource] = None,
    record_path: bool = False,
    check_residual: bool = False,
) -> Trajectory:
    """Apply ``step`` N times from ``init``; noise=None is the deterministic scheme."""
    state = init(ops, cfg)
    history = [_norm_record(ops, cfg, state)]
    path = [state] if record_path else None

    for n in range(1, cfg.N + 1):
        load = None
        if noise is not None and noise.model.enabled:
            increment = sample_increment(noise.table, noise.model, n, cfg.k)
            load = noise_load_vector(ops, noise.model, increment)
        state = step(ops, cfg, state, load)
        if check_residual:
            residual = recovery_residual(ops, state)
            if residual > RECOVERY_RESIDUAL_TOLERANCE:
                raise NumericalError(f"Recovery residual {residual:.3e} at step {n}")
        history.append(_norm_record(ops, cfg, state))
        if path is not None:
            path.append(state)

    logger.debug(
        f"Trajectory on {ops.mesh.n_cells} cells: {cfg.N} steps, final ||V|| {history[-1].norm_V:.6g}"
    )
    return Trajectory(final=state, history=history, path=path)


def stability_profile(
    ops: FemOperators,
    cfg: SchemeConfig,
    model: NoiseModel,
    seed: int,
    samples: Sequence[int],
    n_fine: Optional[int] = None,
) -> np.ndarray:
    """Empirical E||V^n||^2 for n = 0..N over the given sample indices.

    ``n_fine`` (a multiple of N) sets the Brownian grid; profiles sharing it
    see the same paths.
    """
    second_moment = np.zeros(cfg.N + 1)
    n_fine = n_fine or max(cfg.N, 1)
    for i in samples:
        source = NoiseSource(
            table=BrownianTable(seed=seed, sample_index=i, J=model.J, n_fine=n_fine, T=cfg.T),
            model=model,
        )
        trajectory = run_trajectory(ops, cfg, source)
        second_moment += np.array([record.norm_V**2 for record in trajectory.history])
    return second_moment / len(samples)
