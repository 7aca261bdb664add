"""Monte Carlo execution of a convergence study.

Samples are split into fixed chunks of ``batch_size`` consecutive sample
indices. A chunk advances every level of the study together, one column per
sample, so all levels see the same Brownian increments (summed from the
common fine grid). Chunks are independent work units; results are gathered
in ascending sample order, so the output does not depend on the number of
workers.
"""
from concurrent.futures import ProcessPoolExecutor
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from app.fem.mesh import Mesh1D
from app.fem.operators import FemOperators, assemble, mass_norm_sq, prolong_coeffs
from app.flow.plan import StudyPlan
from app.logger import logger
from app.noise import BrownianTable, NoiseModel, hat_projection
from app.stepper import SchemeConfig, advance, get_drift, init_batch


WINDOW_FINE_STEPS = 1024


class Level(BaseModel):
    """One discretization of a study: a mesh and a time step (c fine steps)."""

    model_config = ConfigDict(frozen=True)

    n_cells: int
    fine_per_step: int
    resolution: int
    parameter: float

    @property
    def label(self) -> str:
        return f"resolution {self.resolution} (n_cells={self.n_cells}, {self.fine_per_step} fine steps per step)"


class StudyRun(BaseModel):
    model_config = ConfigDict(frozen=True)

    plan: StudyPlan
    reference: Level
    ladder: List[Level]
    n_fine: int

    @property
    def levels(self) -> List[Level]:
        return [self.reference] + list(self.ladder)

    @property
    def J(self) -> int:
        if self.plan.J is not None:
            return self.plan.J
        return max(level.n_cells for level in self.levels) - 1

    @property
    def noise_model(self) -> NoiseModel:
        return NoiseModel(s=self.plan.s, J=self.J, enabled=self.plan.noise_enabled)

    @property
    def history_stride(self) -> int:
        """Fine steps between error-history points: one step of the coarsest level."""
        return max(level.fine_per_step for level in self.levels)

    def scheme_for(self, level: Level) -> SchemeConfig:
        plan = self.plan
        return SchemeConfig(
            T=plan.T,
            N=self.n_fine // level.fine_per_step,
            drift=plan.drift,
            v0_modes=plan.v0_modes,
            v0_expression=plan.v0_expression,
        )


@lru_cache(maxsize=16)
def _operators(n_cells: int) -> FemOperators:
    return assemble(Mesh1D(n_cells=n_cells))


def _chunk_bounds(samples: int, batch_size: int) -> List[Tuple[int, int]]:
    return [(start, min(start + batch_size, samples)) for start in range(0, samples, batch_size)]


def _sample_index(run: StudyRun, level_index: int, sample: int) -> int:
    # decoupled mode: every level draws from its own range of streams
    if run.plan.coupled or level_index == 0:
        return sample
    return sample + level_index * run.plan.samples


def _fine_window(tables: List[BrownianTable], start: int, stop: int) -> np.ndarray:
    return np.stack([table.fine_increments(start, stop) for table in tables])


def run_chunk(
    run: StudyRun, start: int, stop: int
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Squared L2 errors of samples start..stop-1, shape (levels, batch).

    With error history, also (levels, points, batch) at every step of the
    coarsest level.
    """
    plan = run.plan
    batch = stop - start
    model = run.noise_model
    sqrt_gamma = np.sqrt(model.gamma)
    drift = get_drift(plan.drift)
    levels = run.levels
    stride = run.history_stride
    keep_history = plan.error_history

    ops = [_operators(level.n_cells) for level in levels]
    schemes = [run.scheme_for(level) for level in levels]
    projections = [hat_projection(o, model.J) for o in ops]
    states = []
    for o, cfg in zip(ops, schemes):
        initial = init_batch(o, cfg, batch)
        states.append([initial.V.coeffs, initial.U.coeffs])
    snapshots: List[List[np.ndarray]] = [[] for _ in levels]

    tables: List[List[BrownianTable]] = []
    if model.enabled:
        distinct = 1 if plan.coupled else len(levels)
        for level_index in range(distinct):
            tables.append(
                [
                    BrownianTable(
                        seed=plan.seed,
                        sample_index=_sample_index(run, level_index, sample),
                        J=model.J,
                        n_fine=run.n_fine,
                        T=plan.T,
                    )
                    for sample in range(start, stop)
                ]
            )

    window = stride * max(1, -(-WINDOW_FINE_STEPS // stride))
    for w0 in range(0, run.n_fine, window):
        w1 = min(w0 + window, run.n_fine)
        shared = _fine_window(tables[0], w0, w1) if model.enabled and plan.coupled else None
        for index, (level, o, cfg) in enumerate(zip(levels, ops, schemes)):
            c = level.fine_per_step
            steps = (w1 - w0) // c
            increments = None
            if model.enabled:
                fine = shared if plan.coupled else _fine_window(tables[index], w0, w1)
                coarse = fine if c == 1 else fine.reshape(batch, steps, c, model.J).sum(axis=2)
                increments = coarse * sqrt_gamma
            V, U = states[index]
            for m in range(steps):
                load = None
                if increments is not None:
                    load = projections[index] @ increments[:, m, :].T
                V, U = advance(o, cfg.k, drift, V, U, load)
                if keep_history and (w0 + (m + 1) * c) % stride == 0:
                    snapshots[index].append(U)
            states[index] = [V, U]

    reference_ops = ops[0]
    reference_mesh = reference_ops.mesh

    def squared_error(level_index: int, U: np.ndarray, U_ref: np.ndarray) -> np.ndarray:
        fine = prolong_coeffs(reference_mesh, ops[level_index].mesh, U)
        return mass_norm_sq(reference_ops, fine - U_ref)

    final = np.array(
        [squared_error(i, states[i][1], states[0][1]) for i in range(1, len(levels))]
    )
    history = None
    if keep_history:
        history = np.array(
            [
                [squared_error(i, U, U_ref) for U, U_ref in zip(snapshots[i], snapshots[0])]
                for i in range(1, len(levels))
            ]
        )
    logger.debug(f"Finished samples {start}..{stop - 1}")
    return final, history


def run_levels(run: StudyRun) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Per-sample squared errors of every ladder level, samples in ascending order."""
    plan = run.plan
    chunks = _chunk_bounds(plan.samples, plan.batch_size)
    if plan.workers == 1:
        results = [run_chunk(run, start, stop) for start, stop in chunks]
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as executor:
            results = list(
                executor.map(
                    run_chunk,
                    [run] * len(chunks),
                    [start for start, _ in chunks],
                    [stop for _, stop in chunks],
                )
            )
    squared = np.concatenate([final for final, _ in results], axis=-1)
    histories = None
    if plan.error_history:
        histories = np.concatenate([history for _, history in results], axis=-1)
    return squared, histories
