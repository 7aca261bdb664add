"""Truncated Q-Wiener process W(t) = sum_j gamma_j^{1/2} beta_j(t) e_j with Q = A^{-s}.

Brownian increments live on the finest time grid of a study. Each sample
owns a counter-based stream: the standard normals of fine steps
[b*BLOCK_STEPS, (b+1)*BLOCK_STEPS) come from a Philox generator keyed by
SeedSequence(root seed, spawn_key=(sample index, b)), drawn as a
(BLOCK_STEPS, J) array in C order with numpy's standard_normal. Any block
can therefore be regenerated on its own, on any worker, bit for bit.
"""
from collections import OrderedDict
from functools import lru_cache

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr

from app.exceptions import ConfigError
from app.fem.mesh import Mesh1D
from app.fem.operators import FemOperators, sine_hat_integrals
from app.logger import logger
from app.spectral import SQRT2, SpectralBasis, make_basis


BLOCK_STEPS = 256
_BLOCK_CACHE_SIZE = 2


class NoiseModel(BaseModel):
    """Q = A^{-s} truncated to J modes; ``enabled=False`` runs the same code with zero noise."""

    model_config = ConfigDict(frozen=True)

    s: float = Field(..., ge=0)
    J: int = Field(..., ge=1)
    enabled: bool = True

    @property
    def basis(self) -> SpectralBasis:
        return make_basis(self.J)

    @property
    def gamma(self) -> np.ndarray:
        return self.basis.lambdas ** (-self.s)

    @property
    def trace(self) -> float:
        """Tr_J(Q) = sum of gamma_j over the retained modes."""
        return float(np.sum(self.gamma))


class BrownianTable(BaseModel):
    """Standard Brownian increments of J independent modes on a fine uniform grid of [0,T]."""

    model_config = ConfigDict(frozen=True)

    seed: int = Field(..., ge=0)
    sample_index: int = Field(..., ge=0)
    J: int = Field(..., ge=1)
    n_fine: int = Field(..., ge=1)
    T: float = Field(..., ge=0)

    _blocks: "OrderedDict[int, np.ndarray]" = PrivateAttr(default_factory=OrderedDict)

    @property
    def k_fine(self) -> float:
        return self.T / self.n_fine

    def _block(self, b: int) -> np.ndarray:
        block = self._blocks.get(b)
        if block is not None:
            self._blocks.move_to_end(b)
            return block
        sequence = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.sample_index, b))
        rng = np.random.Generator(np.random.Philox(sequence))
        block = np.sqrt(self.k_fine) * rng.standard_normal((BLOCK_STEPS, self.J))
        self._blocks[b] = block
        if len(self._blocks) > _BLOCK_CACHE_SIZE:
            self._blocks.popitem(last=False)
        return block

    def fine_increments(self, start: int, stop: int) -> np.ndarray:
        """beta_j(t_{i+1}) - beta_j(t_i) for fine steps start <= i < stop, shape (stop-start, J)."""
        if not 0 <= start <= stop <= self.n_fine:
            raise ConfigError(f"Fine steps [{start}, {stop}) outside [0, {self.n_fine})")
        first, last = start // BLOCK_STEPS, (stop - 1) // BLOCK_STEPS
        if stop == start:
            return np.zeros((0, self.J))
        rows = np.concatenate([self._block(b) for b in range(first, last + 1)], axis=0)
        offset = first * BLOCK_STEPS
        return rows[start - offset : stop - offset]

    def coarse_factor(self, k: float) -> int:
        """Number of fine steps in one coarse step k."""
        if self.T == 0:
            return 1
        ratio = k / self.k_fine
        c = int(round(ratio))
        if c < 1 or abs(ratio - c) > 1e-9 * max(1.0, ratio) or self.n_fine % c:
            raise ConfigError(
                f"Step {k} is not an integer multiple of the fine step {self.k_fine} "
                f"dividing {self.n_fine} fine steps"
            )
        return c

    def coarse_increments(self, c: int, first: int, count: int) -> np.ndarray:
        """Brownian increments over coarse steps first..first+count-1 (0-based), shape (count, J).

        Each coarse increment is the sum of its c fine increments.
        """
        rows = self.fine_increments(first * c, (first + count) * c)
        if c == 1:
            return rows
        return rows.reshape(count, c, self.J).sum(axis=1)


def sample_increment(table: BrownianTable, model: NoiseModel, n: int, k: float) -> np.ndarray:
    """Modal increment Delta W_j = gamma_j^{1/2} (beta_j(t_n) - beta_j(t_{n-1})), n >= 1."""
    if table.J != model.J:
        raise ConfigError(f"Table has {table.J} modes, noise model {model.J}")
    c = table.coarse_factor(k)
    steps = table.n_fine // c
    if not 1 <= n <= steps:
        raise ConfigError(f"Step index {n} outside 1..{steps}")
    if not model.enabled:
        return np.zeros(model.J)
    return np.sqrt(model.gamma) * table.coarse_increments(c, n - 1, 1)[0]


@lru_cache(maxsize=32)
def _hat_projection(n_cells: int, J: int) -> np.ndarray:
    modes = np.arange(1, J + 1)
    projection = SQRT2 * sine_hat_integrals(Mesh1D(n_cells=n_cells), modes)
    projection.setflags(write=False)
    return projection


def hat_projection(ops: FemOperators, J: int) -> np.ndarray:
    """Matrix with entries (e_j, phi_i); rows interior nodes, columns modes."""
    return _hat_projection(ops.mesh.n_cells, J)


def noise_load_vector(
    ops: FemOperators, model: NoiseModel, modal_increment: np.ndarray
) -> np.ndarray:
    """Right-hand side b_i = sum_j Delta W_j (e_j, phi_i) of P_h Delta W.

    ``modal_increment`` may carry samples along a second axis.
    """
    modal_increment = np.asarray(modal_increment, dtype=float)
    if modal_increment.shape[0] != model.J:
        raise ConfigError(
            f"Modal increment has {modal_increment.shape[0]} modes, model has {model.J}"
        )
    if not model.enabled:
        return np.zeros((ops.size,) + modal_increment.shape[1:])
    return hat_projection(ops, model.J) @ modal_increment


class WienerNormStatistic(BaseModel):
    mean: float
    expected: float
    stderr: float
    samples: int

    @property
    def ratio(self) -> float:
        return self.mean / self.expected if self.expected else 0.0

    def within(self, n_stderr: float = 3.0) -> bool:
        return abs(self.mean - self.expected) <= n_stderr * self.stderr


def wiener_norm_check(
    model: NoiseModel, T: float, n_samples: int, seed: int = 0
) -> WienerNormStatistic:
    """Monte Carlo estimate of E||W(T)||^2 against T * Tr_J(Q)."""
    if n_samples < 1:
        raise ConfigError("Need at least one sample")
    gamma = model.gamma
    values = np.empty(n_samples)
    for i in range(n_samples):
        table = BrownianTable(seed=seed, sample_index=i, J=model.J, n_fine=1, T=T)
        w_final = np.sqrt(gamma) * table.fine_increments(0, 1)[0]
        values[i] = np.dot(w_final, w_final)
    expected = T * model.trace if model.enabled else 0.0
    if not model.enabled:
        values[:] = 0.0
    stderr = float(np.std(values, ddof=1) / np.sqrt(n_samples)) if n_samples > 1 else 0.0
    logger.debug(f"E||W({T})||^2 estimate {values.mean()} vs {expected} over {n_samples} samples")
    return WienerNormStatistic(
        mean=float(values.mean()), expected=expected, stderr=stderr, samples=n_samples
    )
