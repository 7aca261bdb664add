"""Piecewise-linear finite element operators on a uniform mesh of (0,1).

Coefficient arrays are indexed by interior node along axis 0. A second axis,
when present, holds independent columns (Monte Carlo samples) which every
operation treats one column at a time.
"""
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr
from scipy.linalg import LinAlgError, cho_solve_banded, cholesky_banded, eigh

from app.exceptions import ConfigError, NumericalError
from app.fem.mesh import FemFunction, Mesh1D, ensure_same_mesh
from app.logger import logger


ScalarFunction = Callable[[np.ndarray], np.ndarray]

PROJECTION_GAUSS_POINTS = 3
ERROR_GAUSS_POINTS = 5


class SineSeries(BaseModel):
    """g(x) = sum of a_m sin(m pi x); load integrals against hats are closed-form."""

    model_config = ConfigDict(frozen=True)

    terms: Tuple[Tuple[int, float], ...]

    @classmethod
    def of(cls, terms: Sequence[Sequence[float]]) -> "SineSeries":
        return cls(terms=tuple((int(m), float(a)) for m, a in terms))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for m, a in self.terms:
            total = total + a * np.sin(m * np.pi * x)
        return total


class FemOperators(BaseModel):
    """Tridiagonal mass M and stiffness K with cached banded Cholesky factors.

    Only the main and first upper diagonals are stored. Factors of M + shift*K
    are computed on first use and reused; shift 0 is M, shift 1 is M + K and
    shift k is the implicit Euler matrix.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mesh: Mesh1D
    mass_diag: np.ndarray
    mass_off: np.ndarray
    stiff_diag: np.ndarray
    stiff_off: np.ndarray

    _factors: Dict[float, np.ndarray] = PrivateAttr(default_factory=dict)

    @property
    def size(self) -> int:
        return self.mesh.interior_nodes

    def _band(self, diag: np.ndarray, off: np.ndarray) -> np.ndarray:
        ab = np.zeros((2, self.size))
        ab[0, 1:] = off
        ab[1, :] = diag
        return ab

    def factor(self, shift: float) -> np.ndarray:
        """Upper banded Cholesky factor of M + shift*K."""
        shift = float(shift)
        cached = self._factors.get(shift)
        if cached is not None:
            return cached
        if shift < 0:
            raise ConfigError(f"Shift must be nonnegative, got {shift}")
        ab = self._band(
            self.mass_diag + shift * self.stiff_diag,
            self.mass_off + shift * self.stiff_off,
        )
        try:
            chol = cholesky_banded(ab, lower=False)
        except LinAlgError as e:
            raise NumericalError(f"M + {shift}*K is not positive definite: {e}")
        logger.debug(f"Factored M + {shift}*K on {self.mesh.n_cells} cells")
        self._factors[shift] = chol
        return chol

    def solve(self, shift: float, rhs: np.ndarray) -> np.ndarray:
        """Solve (M + shift*K) x = rhs column by column."""
        return cho_solve_banded((self.factor(shift), False), rhs, check_finite=False)

    def shifted_norm(self, shift: float) -> float:
        """Largest absolute row sum of M + shift*K, an upper bound on its 2-norm."""
        row = np.abs(self.mass_diag + shift * self.stiff_diag)
        off = np.abs(self.mass_off + shift * self.stiff_off)
        row[:-1] += off
        row[1:] += off
        return float(np.max(row))

    @staticmethod
    def _tridiag_matvec(diag: np.ndarray, off: np.ndarray, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        shape = (-1,) + (1,) * (x.ndim - 1)
        diag = diag.reshape(shape)
        off = off.reshape(shape)
        y = diag * x
        y[:-1] += off * x[1:]
        y[1:] += off * x[:-1]
        return y

    def mass_matvec(self, x: np.ndarray) -> np.ndarray:
        return self._tridiag_matvec(self.mass_diag, self.mass_off, x)

    def stiffness_matvec(self, x: np.ndarray) -> np.ndarray:
        return self._tridiag_matvec(self.stiff_diag, self.stiff_off, x)

    def dense_mass(self) -> np.ndarray:
        return (
            np.diag(self.mass_diag)
            + np.diag(self.mass_off, 1)
            + np.diag(self.mass_off, -1)
        )

    def dense_stiffness(self) -> np.ndarray:
        return (
            np.diag(self.stiff_diag)
            + np.diag(self.stiff_off, 1)
            + np.diag(self.stiff_off, -1)
        )

    def generalized_eigenpairs(self) -> Tuple[np.ndarray, np.ndarray]:
        """Eigenpairs of K c = mu M c, eigenvectors M-orthonormal, mu ascending."""
        return eigh(self.dense_stiffness(), self.dense_mass())

    def generalized_eigenvalues(self, count: Optional[int] = None) -> np.ndarray:
        values = eigh(self.dense_stiffness(), self.dense_mass(), eigvals_only=True)
        return values if count is None else values[:count]


def assemble(mesh: Mesh1D) -> FemOperators:
    """Mass and stiffness matrices of the hat basis on a uniform mesh."""
    if mesh.n_cells < 2:
        raise ConfigError(f"Need n_cells >= 2 for interior nodes, got {mesh.n_cells}")
    n, h = mesh.interior_nodes, mesh.h
    ops = FemOperators(
        mesh=mesh,
        mass_diag=np.full(n, 2.0 * h / 3.0),
        mass_off=np.full(n - 1, h / 6.0),
        stiff_diag=np.full(n, 2.0 / h),
        stiff_off=np.full(n - 1, -1.0 / h),
    )
    ops.factor(0.0)
    ops.factor(1.0)
    return ops


def sine_hat_integrals(mesh: Mesh1D, modes: np.ndarray) -> np.ndarray:
    """Matrix of integrals of phi_i(x) sin(j pi x) over (0,1).

    Row i is the interior node, column the entry of ``modes``; closed form
    4 / (h (j pi)^2) sin(j pi x_i) sin^2(j pi h / 2).
    """
    h = mesh.h
    freq = np.asarray(modes, dtype=float) * np.pi
    nodal = np.sin(np.outer(mesh.nodes(), freq))
    factor = 4.0 / (h * freq**2) * np.sin(freq * h / 2.0) ** 2
    return nodal * factor


def _gauss_rule(mesh: Mesh1D, points: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Quadrature points per cell (cells x points), weights, and local hat values."""
    xi, w = np.polynomial.legendre.leggauss(points)
    local = (xi + 1.0) / 2.0
    left = mesh.all_nodes()[:-1]
    x = left[:, None] + mesh.h * local[None, :]
    return x, w * mesh.h / 2.0, local


def _evaluate(g: ScalarFunction, x: np.ndarray) -> np.ndarray:
    values = np.asarray(g(x), dtype=float)
    if values.shape != x.shape:
        values = np.broadcast_to(values, x.shape)
    if not np.all(np.isfinite(values)):
        raise ConfigError("Function returned non-finite values at quadrature points")
    return values


def load_vector(mesh: Mesh1D, g: Union[SineSeries, ScalarFunction]) -> np.ndarray:
    """Entries (g, phi_i) for every interior node i."""
    if isinstance(g, SineSeries):
        if not g.terms:
            return np.zeros(mesh.interior_nodes)
        modes = np.array([m for m, _ in g.terms])
        amps = np.array([a for _, a in g.terms])
        return sine_hat_integrals(mesh, modes) @ amps

    x, w, local = _gauss_rule(mesh, PROJECTION_GAUSS_POINTS)
    weighted = _evaluate(g, x) * w[None, :]
    # cell c spans nodes c (falling hat) and c+1 (rising hat)
    from_left = weighted @ (1.0 - local)
    from_right = weighted @ local
    return from_left[1:] + from_right[:-1]


def l2_project(ops: FemOperators, g: Union[SineSeries, ScalarFunction]) -> FemFunction:
    """P_h g: solve M c = (g, phi_i)."""
    coeffs = ops.solve(0.0, load_vector(ops.mesh, g))
    return FemFunction(mesh=ops.mesh, coeffs=coeffs)


def elliptic_recover_coeffs(ops: FemOperators, v: np.ndarray) -> np.ndarray:
    """Coefficients of (P_h + A_h)^{-1} v, i.e. (M + K) u = M v."""
    return ops.solve(1.0, ops.mass_matvec(v))


def elliptic_recover(ops: FemOperators, v: FemFunction) -> FemFunction:
    ensure_same_mesh(ops.mesh, v.mesh)
    return FemFunction(mesh=ops.mesh, coeffs=elliptic_recover_coeffs(ops, v.coeffs))


def mass_norm_sq(ops: FemOperators, coeffs: np.ndarray) -> np.ndarray:
    """c^T M c, per column when coeffs is two-dimensional."""
    return np.sum(coeffs * ops.mass_matvec(coeffs), axis=0)


def l2_norm(ops: FemOperators, f: FemFunction) -> Union[float, np.ndarray]:
    """Mass norm of f; one norm per column for batched coefficients."""
    ensure_same_mesh(ops.mesh, f.mesh)
    norms = np.sqrt(np.maximum(mass_norm_sq(ops, f.coeffs), 0.0))
    return float(norms) if norms.ndim == 0 else norms


def l2_error(ops: FemOperators, f: FemFunction, g: ScalarFunction) -> float:
    """L2(0,1) distance between the reconstruction of f and g."""
    ensure_same_mesh(ops.mesh, f.mesh)
    x, w, local = _gauss_rule(ops.mesh, ERROR_GAUSS_POINTS)
    nodal = f.with_boundary()
    recon = nodal[:-1, None] * (1.0 - local)[None, :] + nodal[1:, None] * local[None, :]
    diff = recon - _evaluate(g, x)
    return float(np.sqrt(np.sum(diff**2 * w[None, :])))


def prolong_coeffs(fine_mesh: Mesh1D, coarse_mesh: Mesh1D, coeffs: np.ndarray) -> np.ndarray:
    """Fine-mesh nodal values of a coarse piecewise-linear function (exact)."""
    ratio = fine_mesh.refinement_factor(coarse_mesh)
    if ratio == 1:
        return np.array(coeffs, dtype=float, copy=True)
    pad = [(1, 1)] + [(0, 0)] * (np.ndim(coeffs) - 1)
    padded = np.pad(np.asarray(coeffs, dtype=float), pad)
    index = np.arange(1, fine_mesh.n_cells)
    cell = index // ratio
    t = (index % ratio) / ratio
    shape = (-1,) + (1,) * (padded.ndim - 1)
    return (1.0 - t).reshape(shape) * padded[cell] + t.reshape(shape) * padded[cell + 1]


def prolong(fine_mesh: Mesh1D, coarse: FemFunction) -> FemFunction:
    return FemFunction(
        mesh=fine_mesh, coeffs=prolong_coeffs(fine_mesh, coarse.mesh, coarse.coeffs)
    )
