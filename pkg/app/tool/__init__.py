from app.tool.admissibility import AdmissibilityCheck
from app.tool.base import BaseCheck
from app.tool.check_collection import CheckCollection
from app.tool.exact_solution import ExactSolutionCheck
from app.tool.matrix_oracle import MatrixOracle
from app.tool.noise_statistics import BrownianRefinementCheck, ItoIsometryCheck, OUMomentsCheck
from app.tool.stability import MeanSquareStabilityCheck
from app.tool.suite import build_validation_suite


__all__ = [
    "AdmissibilityCheck",
    "BaseCheck",
    "BrownianRefinementCheck",
    "CheckCollection",
    "ExactSolutionCheck",
    "ItoIsometryCheck",
    "MatrixOracle",
    "MeanSquareStabilityCheck",
    "OUMomentsCheck",
    "build_validation_suite",
]
