from typing import Sequence, Tuple

import numpy as np
from pydantic import BaseModel

from app.exceptions import ConfigError
from app.fem.mesh import FemFunction, ensure_same_mesh
from app.fem.operators import FemOperators, mass_norm_sq


class RateFit(BaseModel):
    slope: float
    intercept: float
    residual: float


class StrongError(BaseModel):
    error: float
    stderr: float
    samples: int


def fit_rate(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least squares line through (log2 step, log2 error); slope is the observed order."""
    if len(points) < 2:
        raise ConfigError(f"Need at least two points to fit a rate, got {len(points)}")
    steps = np.array([p[0] for p in points], dtype=float)
    errors = np.array([p[1] for p in points], dtype=float)
    if np.any(errors <= 0) or np.any(steps <= 0):
        raise ConfigError("Rate fit needs positive steps and errors")
    x, y = np.log2(steps), np.log2(errors)
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return RateFit(slope=float(slope), intercept=float(intercept), residual=residual)


def summarize_squared_errors(squared: np.ndarray) -> StrongError:
    """sqrt(mean) of per-sample squared errors with its delta-method standard error.

    Samples are reduced in the order given, which callers keep ascending by
    sample index.
    """
    squared = np.asarray(squared, dtype=float)
    if squared.size == 0:
        raise ConfigError("No samples to estimate a strong error from")
    mean_sq = float(np.mean(squared))
    error = float(np.sqrt(mean_sq))
    if squared.size < 2 or error == 0.0:
        return StrongError(error=error, stderr=0.0, samples=int(squared.size))
    stderr_sq = float(np.std(squared, ddof=1) / np.sqrt(squared.size))
    return StrongError(error=error, stderr=stderr_sq / (2.0 * error), samples=int(squared.size))


def mc_error(
    pairs: Sequence[Tuple[FemFunction, FemFunction]], fine_ops: FemOperators
) -> StrongError:
    """Strong L2 error over paired (approximation, reference) final states on the fine mesh."""
    if not pairs:
        raise ConfigError("No samples to estimate a strong error from")
    squared = []
    for approx, reference in pairs:
        ensure_same_mesh(fine_ops.mesh, approx.mesh)
        ensure_same_mesh(fine_ops.mesh, reference.mesh)
        squared.append(float(mass_norm_sq(fine_ops, approx.coeffs - reference.coeffs)))
    return summarize_squared_errors(np.array(squared))
