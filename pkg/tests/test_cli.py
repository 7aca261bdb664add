import json

import numpy as np
import pytest

import main
from app import stepper
from app.schema import DriftKind, ResultEnvelope
from app.stepper import Drift

SMALL_STUDY = """
[scheme]
T = 0.1

[noise]
s = 0.5005
seed = 3

[study]
resolutions = [4, 8]
reference = 16
fixed_step = 0.01
samples = 4
batch_size = 2
"""


def _lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def test_simulate_writes_trajectory_files(write_config, tmp_path):
    config = write_config("[scheme]\nN = 20\nn_cells = 16\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    out = tmp_path / "out"
    assert _lines(out / "trajectory.csv")[0] == "n,t,norm_V,norm_U"
    assert len(_lines(out / "trajectory.csv")) == 22
    assert _lines(out / "final_state.csv")[0] == "x,V,U"
    assert len(_lines(out / "final_state.csv")) == 18
    assert b"\r\n" not in (out / "trajectory.csv").read_bytes()


def test_zero_steps_emit_the_initial_row(write_config, tmp_path):
    config = write_config("[scheme]\nN = 0\n[noise]\nenabled = false\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    rows = _lines(tmp_path / "out" / "trajectory.csv")
    assert len(rows) == 2
    assert rows[1].startswith("0,0.0,")


def test_noise_free_norms_decrease_in_the_csv(write_config, tmp_path):
    config = write_config("[noise]\nenabled = false\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    norms = [float(row.split(",")[2]) for row in _lines(tmp_path / "out" / "trajectory.csv")[1:]]
    assert all(later < earlier for earlier, later in zip(norms, norms[1:]))


def test_simulate_reruns_are_byte_identical(write_config, tmp_path):
    config = write_config("[scheme]\nN = 10\nn_cells = 32\n")
    assert main.main(["simulate", "--config", str(config), "--out", str(tmp_path / "a")]) == 0
    assert main.main(["simulate", "--config", str(config), "--out", str(tmp_path / "b")]) == 0
    for name in ("trajectory.csv", "final_state.csv", "envelope.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_envelope_round_trips(write_config, tmp_path):
    config = write_config("[scheme]\nN = 5\nn_cells = 8\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    text = (tmp_path / "out" / "envelope.json").read_text(encoding="utf-8")
    envelope = ResultEnvelope.model_validate_json(text)
    assert envelope.model_dump_json(indent=2) + "\n" == text
    assert envelope.command == "simulate"
    assert envelope.timing is None


def test_record_path_writes_every_state(write_config, tmp_path):
    config = write_config("[scheme]\nN = 3\nn_cells = 4\nrecord_path = true\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    rows = _lines(tmp_path / "out" / "path.csv")
    assert rows[0] == "n,t,x,V,U"
    assert len(rows) == 1 + 4 * 5


def test_convergence_space_files(write_config, tmp_path):
    config = write_config(SMALL_STUDY)
    assert main.main(["convergence-space", "--config", str(config)]) == 0
    out = tmp_path / "out"
    assert _lines(out / "errors.csv")[0] == "resolution,h_or_k,strong_error,stderr"
    assert [row.split(",")[0] for row in _lines(out / "errors.csv")[1:]] == ["4", "8"]
    rate = json.loads((out / "rate.json").read_text(encoding="utf-8"))
    assert set(rate) >= {"slope", "intercept", "residual", "config"}
    assert rate["config"]["study.reference"] == 16
    assert rate["ladder_is_default"] is False


def test_convergence_output_ignores_worker_count(write_config, tmp_path):
    config = write_config(SMALL_STUDY)
    args = ["convergence-space", "--config", str(config)]
    assert main.main(args + ["--out", str(tmp_path / "one"), "--workers", "1"]) == 0
    assert main.main(args + ["--out", str(tmp_path / "two"), "--workers", "2"]) == 0
    for name in ("errors.csv", "rate.json", "envelope.json"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_convergence_time_with_history(write_config, tmp_path):
    config = write_config(
        "[noise]\ns = 1.0\n[study]\nresolutions = [8, 16]\nreference = 32\n"
        "fixed_cells = 8\nsamples = 2\nerror_history = true\n"
    )
    assert main.main(["convergence-time", "--config", str(config)]) == 0
    rows = _lines(tmp_path / "out" / "error_history.csv")
    assert rows[0] == "resolution,point,t,strong_error"
    assert len(rows) == 1 + 2 * 8


def test_seed_and_samples_flags_override_the_file(write_config, tmp_path):
    config = write_config(SMALL_STUDY)
    assert main.main(["convergence-space", "--config", str(config), "--seed", "99", "--samples", "2"]) == 0
    rate = json.loads((tmp_path / "out" / "rate.json").read_text(encoding="utf-8"))
    assert rate["config"]["noise.seed"] == 99
    assert rate["samples"] == 2


def test_config_errors_exit_with_their_code(write_config):
    config = write_config()
    assert main.main(["simulate", "--config", str(config), "--set", "scheme.bogus=1"]) == 2
    assert main.main(["convergence-space", "--config", str(config), "--set", "noise.s=0.5"]) == 2


def test_numerical_errors_exit_with_their_code(write_config, monkeypatch):
    exploding = Drift(kind=DriftKind.TANH, lipschitz=1.0, func=lambda u: u * np.inf)
    monkeypatch.setitem(stepper.DRIFTS, DriftKind.TANH, exploding)
    config = write_config('[scheme]\nN = 2\nf = "tanh"\n[noise]\nenabled = false\n')
    assert main.main(["simulate", "--config", str(config)]) == 3


def test_output_errors_exit_with_their_code(write_config, tmp_path):
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    config = write_config("[scheme]\nN = 1\nn_cells = 4\n")
    assert main.main(["simulate", "--config", str(config), "--out", str(blocker / "sub")]) == 4


def test_timing_is_opt_in(write_config, tmp_path):
    config = write_config("[scheme]\nN = 1\nn_cells = 4\n")
    assert main.main(["simulate", "--config", str(config), "--set", "output.timing=true"]) == 0
    envelope = json.loads((tmp_path / "out" / "envelope.json").read_text(encoding="utf-8"))
    assert envelope["timing"]["wall_seconds"] >= 0


@pytest.mark.slow
def test_validate_passes_on_the_default_config(write_config, tmp_path):
    assert main.main(["validate", "--config", str(write_config())]) == 0
    report = json.loads((tmp_path / "out" / "validation.json").read_text(encoding="utf-8"))
    assert all(check["status"] == "passed" for check in report["checks"])


@pytest.mark.slow
def test_validate_fails_on_the_admissibility_boundary(write_config):
    config = write_config("[noise]\ns = 0.5\n")
    assert main.main(["validate", "--config", str(config)]) == 5


RATE_KEYS = [
    "schema_version",
    "kind",
    "slope",
    "intercept",
    "residual",
    "expected_rate",
    "samples",
    "ladder_is_default",
    "config",
]
ENVELOPE_KEYS = [
    "schema_version",
    "version",
    "command",
    "config",
    "timing",
    "rate",
    "trajectory",
    "checks",
]
REPORT_KEYS = [
    "kind",
    "rows",
    "slope",
    "intercept",
    "residual",
    "samples",
    "expected_rate",
    "ladder_is_default",
]
ROW_KEYS = ["resolution", "h_or_k", "strong_error", "stderr", "history"]
SUMMARY_KEYS = ["n_cells", "steps", "final_time", "nodes", "final_V", "final_U", "history"]


def test_simulate_on_the_reference_mesh(write_config, tmp_path):
    config = write_config("[scheme]\nN = 20\nn_cells = 1024\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    assert len(_lines(tmp_path / "out" / "final_state.csv")) == 1 + 1025


def test_top_level_scalars_exit_with_the_config_code(write_config):
    config = write_config('title = "run"\n[scheme]\nN = 2\n')
    assert main.main(["simulate", "--config", str(config)]) == 2


def test_convergence_json_keys_are_pinned(write_config, tmp_path):
    config = write_config(SMALL_STUDY)
    assert main.main(["convergence-space", "--config", str(config)]) == 0
    out = tmp_path / "out"
    rate = json.loads((out / "rate.json").read_text(encoding="utf-8"))
    assert list(rate) == RATE_KEYS
    envelope = json.loads((out / "envelope.json").read_text(encoding="utf-8"))
    assert list(envelope) == ENVELOPE_KEYS
    assert envelope["schema_version"] == rate["schema_version"] == "1"
    assert list(envelope["rate"]) == REPORT_KEYS
    assert all(list(row) == ROW_KEYS for row in envelope["rate"]["rows"])


def test_simulate_envelope_keys_are_pinned(write_config, tmp_path):
    config = write_config("[scheme]\nN = 2\nn_cells = 8\n")
    assert main.main(["simulate", "--config", str(config)]) == 0
    envelope = json.loads((tmp_path / "out" / "envelope.json").read_text(encoding="utf-8"))
    assert list(envelope) == ENVELOPE_KEYS
    assert list(envelope["trajectory"]) == SUMMARY_KEYS
    assert list(envelope["trajectory"]["history"][0]) == ["n", "t", "norm_V", "norm_U"]
