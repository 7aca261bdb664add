"""Eigenbasis of the Dirichlet Laplacian on (0,1) and closed-form oracles.

A has eigenpairs lambda_j = (j pi)^2, e_j(x) = sqrt(2) sin(j pi x). With
Q = A^{-s} the noise is diagonal in the same basis, so the linear problems
below decouple into scalar equations per mode.
"""
from typing import TYPE_CHECKING, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.exceptions import ConfigError
from app.fem.operators import FemOperators, SineSeries
from app.logger import logger
from app.schema import DriftKind


if TYPE_CHECKING:
    from app.noise import NoiseModel


DEFAULT_DIAGNOSTIC_MODES = 10_000
SQRT2 = np.sqrt(2.0)


class SpectralBasis(BaseModel):
    model_config = ConfigDict(frozen=True)

    J: int = Field(..., ge=1, description="Number of modes")

    @property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.J + 1, dtype=float)

    @property
    def lambdas(self) -> np.ndarray:
        return (self.modes * np.pi) ** 2

    def evaluate(self, coeffs: np.ndarray, x) -> np.ndarray:
        """Sum of coeffs_j e_j(x)."""
        x = np.asarray(x, dtype=float)
        return SQRT2 * np.sin(np.multiply.outer(x, self.modes * np.pi)) @ coeffs


class ModalState(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    coeffs: np.ndarray
    t: float

    def l2_norm(self) -> float:
        # Parseval in the orthonormal basis
        return float(np.linalg.norm(self.coeffs))


class AdmissibilityReport(BaseModel):
    beta: float
    s: float
    d: int = 1
    J: int
    hs_norm_sq: float = Field(..., description="Truncated sum of lambda_j^(beta-s-1)")
    divergent: bool = Field(..., description="The untruncated sum is infinite")
    admissible: bool

    @property
    def bound(self) -> float:
        return self.s + 1.0 - self.d / 2.0

    def describe(self) -> str:
        relation = "<" if self.admissible else ">="
        return f"beta={self.beta} {relation} s+1-d/2={self.bound}"


class OUMoments(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mean: np.ndarray
    variance: np.ndarray


def make_basis(J: int) -> SpectralBasis:
    if J < 1:
        raise ConfigError(f"Spectral basis needs at least one mode, got J={J}")
    return SpectralBasis(J=J)


def check_admissibility(
    beta: float, s: float, J: int = DEFAULT_DIAGNOSTIC_MODES, d: int = 1
) -> AdmissibilityReport:
    """||A^{(beta-1)/2} Q^{1/2}||_HS^2 for Q = A^{-s}; finite iff beta < s + 1 - d/2.

    The boolean comes from the exponent inequality; the truncated sum is a
    diagnostic only and converges slowly near the boundary.
    """
    if J < 1:
        raise ConfigError(f"Truncation must be positive, got J={J}")
    admissible = beta < s + 1.0 - d / 2.0
    lambdas = make_basis(J).lambdas
    hs_norm_sq = float(np.sum(lambdas ** (beta - s - 1.0)))
    if not admissible:
        logger.debug(f"Hilbert-Schmidt sum diverges for beta={beta}, s={s}, d={d}")
    return AdmissibilityReport(
        beta=beta,
        s=s,
        d=d,
        J=J,
        hs_norm_sq=hs_norm_sq,
        divergent=not admissible,
        admissible=admissible,
    )


def modal_coefficients(basis: SpectralBasis, series: SineSeries) -> np.ndarray:
    """Coefficients (g, e_j) of a sine series; sin(m pi x) = e_m / sqrt(2)."""
    coeffs = np.zeros(basis.J)
    for m, a in series.terms:
        if m > basis.J:
            logger.warning(f"Mode {m} lies beyond the basis truncation J={basis.J}; dropped")
            continue
        coeffs[m - 1] += a / SQRT2
    return coeffs


def growth_rates(basis: SpectralBasis, drift: DriftKind = DriftKind.IDENTITY) -> np.ndarray:
    """a_j = -lambda_j + 1/(1+lambda_j) for f(u)=u, -lambda_j for f=0."""
    lambdas = basis.lambdas
    if drift == DriftKind.IDENTITY:
        return -lambdas + 1.0 / (1.0 + lambdas)
    if drift == DriftKind.ZERO:
        return -lambdas
    raise ConfigError(f"No closed-form modal solution for drift '{drift.value}'")


def exact_linear_deterministic(
    basis: SpectralBasis,
    v0_modes: np.ndarray,
    t: float,
    drift: DriftKind = DriftKind.IDENTITY,
) -> ModalState:
    """Mild solution of dv - Delta v dt = f(u) dt with u = (I+A)^{-1} v, no noise."""
    v0_modes = np.asarray(v0_modes, dtype=float)
    if v0_modes.shape != (basis.J,):
        raise ConfigError(f"Expected {basis.J} modal coefficients, got {v0_modes.shape}")
    return ModalState(coeffs=np.exp(growth_rates(basis, drift) * t) * v0_modes, t=t)


def recover_modes(basis: SpectralBasis, v_modes: np.ndarray) -> np.ndarray:
    """Modal form of (I+A)^{-1}: division by 1 + lambda_j."""
    return np.asarray(v_modes) / (1.0 + basis.lambdas)


def ou_moments(
    basis: SpectralBasis,
    noise: "NoiseModel",
    t: float,
    v0_modes: Optional[np.ndarray] = None,
    time_step: Optional[float] = None,
) -> OUMoments:
    """Per-mode mean and variance of dv_j = -lambda_j v_j dt + gamma_j^{1/2} d beta_j.

    With ``time_step`` the moments of the implicit Euler recursion
    v^n = R(k lambda)(v^{n-1} + xi), xi ~ N(0, gamma k), are returned instead.
    """
    lambdas = basis.lambdas
    gamma = noise.gamma[: basis.J]
    v0 = np.zeros(basis.J) if v0_modes is None else np.asarray(v0_modes, dtype=float)
    if time_step is None:
        mean = np.exp(-lambdas * t) * v0
        variance = gamma * (1.0 - np.exp(-2.0 * lambdas * t)) / (2.0 * lambdas)
        return OUMoments(mean=mean, variance=variance)

    steps = int(round(t / time_step))
    r = 1.0 / (1.0 + time_step * lambdas)
    r2 = r**2
    variance = gamma * time_step * r2 * (1.0 - r2**steps) / (1.0 - r2)
    return OUMoments(mean=r**steps * v0, variance=variance)


def fractional_norm(basis: SpectralBasis, coeffs: np.ndarray, beta: float) -> float:
    """|v|_beta = ||A^{beta/2} v||, the norm of the fractional space of order beta."""
    coeffs = np.asarray(coeffs, dtype=float)
    return float(np.sqrt(np.sum(basis.lambdas[: coeffs.shape[0]] ** beta * coeffs**2)))


def discrete_semigroup(
    ops: FemOperators,
    coeffs: np.ndarray,
    t: float,
    drift: DriftKind = DriftKind.IDENTITY,
) -> np.ndarray:
    """Exact-in-time semidiscrete FEM solution for a linear drift.

    Propagates v_h' + A_h v_h = P_h f(u_h) through the M-orthonormal
    eigenvectors of (K, M), so only the spatial discretization error remains.
    """
    mu, vectors = ops.generalized_eigenpairs()
    if drift == DriftKind.IDENTITY:
        rates = -mu + 1.0 / (1.0 + mu)
    elif drift == DriftKind.ZERO:
        rates = -mu
    else:
        raise ConfigError(f"No semidiscrete closed form for drift '{drift.value}'")
    alpha = vectors.T @ ops.mass_matvec(coeffs)
    return vectors @ (np.exp(rates * t) * alpha)
