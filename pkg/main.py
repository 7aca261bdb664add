"""
Stochastic BBM finite element solver

Usage:
    python3 main.py simulate --config config/config.toml
    python3 main.py convergence-space --samples 200 --workers 4
    python3 main.py convergence-time --set study.reference=4096 --out results/time
    python3 main.py validate
"""
import argparse
import asyncio
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

from app import __version__
from app.config import RunConfig, StudySettings, collect_overrides, load_run_config
from app.exceptions import VALIDATION_FAILED_EXIT_CODE, SolverError
from app.fem import Mesh1D, assemble
from app.flow import StudyFactory, StudyPlan
from app.logger import define_log_level, logger
from app.noise import BrownianTable, NoiseModel
from app.schema import ResultEnvelope, StudyKind, TrajectorySummary
from app.stepper import NoiseSource, SchemeConfig, run_trajectory
from app.tool import build_validation_suite
from app.writer import ResultWriter


def plan_from_config(config: RunConfig, kind: StudyKind) -> StudyPlan:
    scheme, noise, study = config.scheme, config.noise, config.study
    return StudyPlan(
        kind=kind,
        resolutions=tuple(study.resolutions),
        reference=study.reference,
        fixed_step=study.fixed_step,
        fixed_cells=study.fixed_cells,
        T=scheme.T,
        beta=study.beta,
        s=noise.s,
        J=noise.J,
        noise_enabled=noise.enabled,
        drift=scheme.f,
        v0_modes=tuple(tuple(term) for term in scheme.v0_modes),
        v0_expression=scheme.v0_expression,
        samples=study.samples,
        seed=noise.seed,
        workers=study.workers,
        batch_size=study.batch_size,
        coupled=study.coupled,
        error_history=study.error_history,
        gamma_margin=study.gamma_margin,
        ladder_is_default=list(study.resolutions) == StudySettings().resolutions,
    )


class SolverCLI:
    """Runs one subcommand against a resolved configuration"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.writer = ResultWriter(Path(config.output.dir))

    def _envelope(self, command: str, started: float, **results) -> ResultEnvelope:
        timing = None
        if self.config.output.timing:
            timing = {"wall_seconds": time.perf_counter() - started}
        return ResultEnvelope(
            version=__version__,
            command=command,
            config=self.config.echo(),
            timing=timing,
            **results,
        )

    async def simulate(self) -> int:
        """Single trajectory; sample index 0 of the configured seed."""
        started = time.perf_counter()
        scheme, noise = self.config.scheme, self.config.noise
        ops = assemble(Mesh1D(n_cells=scheme.n_cells))
        cfg = SchemeConfig(
            T=scheme.T,
            N=scheme.N,
            drift=scheme.f,
            v0_modes=tuple(tuple(term) for term in scheme.v0_modes),
            v0_expression=scheme.v0_expression,
        )
        source = None
        if noise.enabled:
            model = NoiseModel(s=noise.s, J=noise.J or ops.size)
            table = BrownianTable(
                seed=noise.seed, sample_index=0, J=model.J, n_fine=max(scheme.N, 1), T=scheme.T
            )
            source = NoiseSource(table=table, model=model)

        trajectory = run_trajectory(
            ops, cfg, source, record_path=scheme.record_path, check_residual=True
        )
        final = trajectory.final
        summary = TrajectorySummary(
            n_cells=scheme.n_cells,
            steps=scheme.N,
            final_time=cfg.time(final.n),
            nodes=ops.mesh.all_nodes().tolist(),
            final_V=final.V.with_boundary().tolist(),
            final_U=final.U.with_boundary().tolist(),
            history=trajectory.history,
        )
        envelope = self._envelope("simulate", started, trajectory=summary)
        paths = await self.writer.write_trajectory(summary, envelope)
        if trajectory.path is not None:
            paths.append(await self.writer.write_path(trajectory.path, cfg))
        logger.info(f"Final ||V|| = {summary.history[-1].norm_V:.6g}, wrote {len(paths)} files")
        return 0

    async def convergence(self, kind: StudyKind) -> int:
        started = time.perf_counter()
        plan = plan_from_config(self.config, kind)
        report = StudyFactory.create_study(plan).execute()
        if report.ladder_is_default:
            logger.warning("Using the built-in resolution ladder")
        command = "convergence-space" if kind == StudyKind.SPATIAL else "convergence-time"
        envelope = self._envelope(command, started, rate=report)
        await self.writer.write_rate(report, envelope, plan.T)
        logger.info(
            f"Observed rate {report.slope:.4f} (theory {report.expected_rate:.4f}), "
            f"relative stderr up to {report.confidence_band():.2%}"
        )
        return 0

    async def validate(self) -> int:
        started = time.perf_counter()
        results = await build_validation_suite(self.config).execute_all()
        envelope = self._envelope("validate", started, checks=results)
        await self.writer.write_checks(envelope)
        failed = [result.name for result in results if not result]
        if failed:
            logger.error(f"Failed checks: {', '.join(failed)}")
            return VALIDATION_FAILED_EXIT_CODE
        logger.info(f"All {len(results)} checks passed")
        return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML configuration file")
    common.add_argument("--seed", type=int, help="Root seed (noise.seed)")
    common.add_argument("--samples", type=int, help="Monte Carlo samples (study.samples)")
    common.add_argument("--out", help="Output directory (output.dir)")
    common.add_argument("--workers", type=int, help="Worker processes (study.workers)")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a dotted config key, e.g. study.samples=200",
    )
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")

    parser = argparse.ArgumentParser(
        description="Stochastic BBM finite element solver",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python3 main.py simulate --set scheme.N=200
  python3 main.py convergence-space --samples 100 --workers 4
  python3 main.py convergence-time --config config/temporal.example.toml
  python3 main.py validate --out results/validation
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    subparsers.add_parser("simulate", parents=[common], help="Run one trajectory")
    subparsers.add_parser("convergence-space", parents=[common], help="Strong error in h")
    subparsers.add_parser("convergence-time", parents=[common], help="Strong error in k")
    subparsers.add_parser("validate", parents=[common], help="Run the oracle suite")
    return parser


def _flag_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    flags = {
        "noise.seed": args.seed,
        "study.samples": args.samples,
        "output.dir": args.out,
        "study.workers": args.workers,
    }
    return {key: value for key, value in flags.items() if value is not None}


async def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 0

    if args.verbose:
        define_log_level(print_level="DEBUG")

    try:
        overrides = collect_overrides(args.overrides)
        overrides.update(_flag_overrides(args))
        config = load_run_config(args.config, overrides)
        cli = SolverCLI(config)
        if args.command == "simulate":
            return await cli.simulate()
        if args.command == "convergence-space":
            return await cli.convergence(StudyKind.SPATIAL)
        if args.command == "convergence-time":
            return await cli.convergence(StudyKind.TEMPORAL)
        return await cli.validate()
    except SolverError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Operation interrupted.")
        return 130


def main(argv: Optional[List[str]] = None) -> int:
    return asyncio.run(run(argv))


if __name__ == "__main__":
    sys.exit(main())
