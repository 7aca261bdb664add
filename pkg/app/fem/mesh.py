import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.exceptions import ConfigError, MeshMismatchError


class Mesh1D(BaseModel):
    """Uniform partition of (0,1); boundary nodes carry no degrees of freedom."""

    model_config = ConfigDict(frozen=True)

    n_cells: int = Field(..., ge=1, description="Number of cells")

    @property
    def h(self) -> float:
        return 1.0 / self.n_cells

    @property
    def interior_nodes(self) -> int:
        return self.n_cells - 1

    def nodes(self) -> np.ndarray:
        """Interior node coordinates x_i = i*h, i = 1..n_cells-1."""
        return np.arange(1, self.n_cells, dtype=float) / self.n_cells

    def all_nodes(self) -> np.ndarray:
        return np.arange(self.n_cells + 1, dtype=float) / self.n_cells

    def refinement_factor(self, coarse: "Mesh1D") -> int:
        if self.n_cells % coarse.n_cells != 0:
            raise ConfigError(
                f"Mesh with {coarse.n_cells} cells is not nested in mesh with {self.n_cells} cells"
            )
        return self.n_cells // coarse.n_cells


class FemFunction(BaseModel):
    """Element of V_h stored as nodal values at the interior nodes."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    mesh: Mesh1D
    coeffs: np.ndarray

    def model_post_init(self, __context) -> None:
        coeffs = np.asarray(self.coeffs, dtype=float)
        if coeffs.shape[0] != self.mesh.interior_nodes:
            raise MeshMismatchError(
                f"Expected {self.mesh.interior_nodes} coefficients, got {coeffs.shape[0]}"
            )
        self.coeffs = coeffs

    @classmethod
    def zeros(cls, mesh: Mesh1D) -> "FemFunction":
        return cls(mesh=mesh, coeffs=np.zeros(mesh.interior_nodes))

    def with_boundary(self) -> np.ndarray:
        """Nodal values including the zero Dirichlet values at x=0 and x=1."""
        pad = [(1, 1)] + [(0, 0)] * (self.coeffs.ndim - 1)
        return np.pad(self.coeffs, pad)

    def __call__(self, x) -> np.ndarray:
        """Evaluate the piecewise-linear reconstruction."""
        return np.interp(x, self.mesh.all_nodes(), self.with_boundary())


def ensure_same_mesh(expected: Mesh1D, actual: Mesh1D) -> None:
    if expected.n_cells != actual.n_cells:
        raise MeshMismatchError(
            f"Operands live on different meshes ({expected.n_cells} vs {actual.n_cells} cells)"
        )
