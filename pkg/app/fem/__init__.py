from app.fem.mesh import FemFunction, Mesh1D, ensure_same_mesh
from app.fem.operators import (
    FemOperators,
    SineSeries,
    assemble,
    elliptic_recover,
    elliptic_recover_coeffs,
    l2_error,
    l2_norm,
    l2_project,
    load_vector,
    mass_norm_sq,
    prolong,
    prolong_coeffs,
    sine_hat_integrals,
)


__all__ = [
    "FemFunction",
    "FemOperators",
    "Mesh1D",
    "SineSeries",
    "assemble",
    "elliptic_recover",
    "elliptic_recover_coeffs",
    "ensure_same_mesh",
    "l2_error",
    "l2_norm",
    "l2_project",
    "load_vector",
    "mass_norm_sq",
    "prolong",
    "prolong_coeffs",
    "sine_hat_integrals",
]
