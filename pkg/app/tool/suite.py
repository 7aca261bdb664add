from app.config import RunConfig
from app.tool.admissibility import AdmissibilityCheck
from app.tool.check_collection import CheckCollection
from app.tool.exact_solution import ExactSolutionCheck
from app.tool.matrix_oracle import MatrixOracle
from app.tool.noise_statistics import BrownianRefinementCheck, ItoIsometryCheck, OUMomentsCheck
from app.tool.stability import MeanSquareStabilityCheck


def build_validation_suite(config: RunConfig) -> CheckCollection:
    """Oracle suite for ``validate``; randomness derives from the configured seed."""
    seed = config.noise.seed
    return CheckCollection(
        MatrixOracle(),
        AdmissibilityCheck(beta=config.study.beta, s=config.noise.s),
        ItoIsometryCheck(s=config.noise.s, seed=seed),
        OUMomentsCheck(seed=seed),
        BrownianRefinementCheck(seed=seed),
        ExactSolutionCheck(),
        MeanSquareStabilityCheck(
            s=config.noise.s,
            n_cells=config.scheme.n_cells,
            T=config.scheme.T,
            drift=config.scheme.f,
            seed=seed,
        ),
    )
