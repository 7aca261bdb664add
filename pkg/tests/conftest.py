import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from app.config import OUTPUT_DIR_ENV  # noqa: E402
from app.fem import Mesh1D, assemble  # noqa: E402
from app.flow import StudyPlan  # noqa: E402
from app.schema import StudyKind  # noqa: E402


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


@pytest.fixture
def ops64():
    return assemble(Mesh1D(n_cells=64))


@pytest.fixture
def small_spatial_plan():
    """A stochastic spatial study that runs in well under a second."""
    return StudyPlan(
        kind=StudyKind.SPATIAL,
        resolutions=(4, 8),
        reference=16,
        fixed_step=0.01,
        T=0.1,
        samples=8,
        batch_size=4,
        seed=11,
    )


@pytest.fixture
def write_config(tmp_path):
    """Write a TOML config into tmp_path; output goes to tmp_path/out unless set."""

    def _write(body: str = "", name: str = "config.toml") -> Path:
        text = body
        if "[output]" not in body:
            text += f'\n[output]\ndir = "{(tmp_path / "out").as_posix()}"\n'
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return _write
