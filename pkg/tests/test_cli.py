"""End-to-end tests for the command-line interface (in-process main)."""

import json

import pytest

from speedsched.cli import main
from speedsched.gen import Dist, SyntheticConfig, gen_prop1_instance, gen_synthetic
from speedsched.harness import ExperimentConfig, rows_to_csv, run_experiment
from speedsched.model import (
    Instance,
    instance_from_json,
    load_instance,
    load_partition,
    save_instance,
    save_partition,
    Partition,
)


@pytest.fixture(autouse=True)
def clean_seed_env(monkeypatch):
    monkeypatch.delenv("SPEEDSCHED_SEED", raising=False)


def write_instance(tmp_path, name, jobs, true_speeds, predicted_speeds):
    inst = Instance(
        jobs=tuple(jobs),
        true_speeds=tuple(true_speeds),
        predicted_speeds=tuple(predicted_speeds),
        name=name,
    )
    path = tmp_path / f"{name}.json"
    save_instance(inst, str(path))
    return path


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def test_gen_synthetic_to_file(tmp_path):
    out = tmp_path / "inst.json"
    assert main(["gen", "--kind", "synthetic", "--n", "4", "--m", "2", "--seed", "5",
                 "--out", str(out)]) == 0
    assert load_instance(str(out)) == gen_synthetic(SyntheticConfig(n=4, m=2, seed=5))


def test_gen_synthetic_to_stdout(capsys):
    assert main(["gen", "--n", "3", "--m", "2", "--seed", "1"]) == 0
    inst = instance_from_json(capsys.readouterr().out)
    assert inst == gen_synthetic(SyntheticConfig(n=3, m=2, seed=1))


def test_gen_respects_distribution_flags(tmp_path):
    out = tmp_path / "inst.json"
    assert main(["gen", "--n", "5", "--m", "2", "--job-dist", "normal(50,5)",
                 "--speed-dist", "normal(20,4)", "--err-sigma", "3.5",
                 "--seed", "2", "--out", str(out)]) == 0
    expected = gen_synthetic(
        SyntheticConfig(
            n=5, m=2,
            job_dist=Dist.normal(50.0, 5.0),
            speed_dist=Dist.normal(20.0, 4.0),
            err_sigma=3.5,
            seed=2,
        )
    )
    assert load_instance(str(out)) == expected


def test_gen_adversarial_kinds(tmp_path, capsys):
    assert main(["gen", "--kind", "prop1", "--n", "10", "--m", "2"]) == 0
    assert instance_from_json(capsys.readouterr().out) == gen_prop1_instance(10, 2)

    assert main(["gen", "--kind", "tradeoff", "--m", "3"]) == 0
    inst = instance_from_json(capsys.readouterr().out)
    assert inst.name == "tradeoff-m3"

    assert main(["gen", "--kind", "binary-lb", "--k", "1"]) == 0
    inst = instance_from_json(capsys.readouterr().out)
    assert inst.name == "binary-lb-k1"


def test_gen_count_writes_seed_template(tmp_path, capsys):
    template = str(tmp_path / "inst-{seed}.json")
    assert main(["gen", "--n", "4", "--m", "2", "--seed", "10", "--count", "3",
                 "--out", template]) == 0
    paths = capsys.readouterr().out.strip().split("\n")
    assert len(paths) == 3
    for seed in (10, 11, 12):
        inst = load_instance(str(tmp_path / f"inst-{seed}.json"))
        assert inst.seed == seed


def test_gen_count_requires_template(tmp_path, capsys):
    assert main(["gen", "--count", "2", "--out", str(tmp_path / "x.json")]) == 2
    assert "error:" in capsys.readouterr().err


def test_gen_count_only_for_synthetic(capsys):
    assert main(["gen", "--kind", "prop1", "--count", "2"]) == 2
    assert "error:" in capsys.readouterr().err


def test_gen_rejects_bad_distribution(capsys):
    assert main(["gen", "--job-dist", "poisson(3)"]) == 2
    assert "error:" in capsys.readouterr().err


def test_gen_rejects_bad_family_shape(capsys):
    assert main(["gen", "--kind", "prop1", "--n", "2", "--m", "2"]) == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# seed resolution
# ---------------------------------------------------------------------------


def test_seed_env_var_used_when_flag_absent(tmp_path, monkeypatch):
    monkeypatch.setenv("SPEEDSCHED_SEED", "9")
    out = tmp_path / "env.json"
    assert main(["gen", "--n", "3", "--m", "2", "--out", str(out)]) == 0
    assert load_instance(str(out)).seed == 9


def test_seed_flag_beats_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("SPEEDSCHED_SEED", "9")
    out = tmp_path / "flag.json"
    assert main(["gen", "--n", "3", "--m", "2", "--seed", "3", "--out", str(out)]) == 0
    assert load_instance(str(out)).seed == 3


def test_seed_defaults_to_zero(tmp_path):
    out = tmp_path / "zero.json"
    assert main(["gen", "--n", "3", "--m", "2", "--out", str(out)]) == 0
    assert load_instance(str(out)).seed == 0


def test_bad_seed_env_var_is_usage_error(monkeypatch, capsys):
    monkeypatch.setenv("SPEEDSCHED_SEED", "not-a-number")
    assert main(["gen", "--n", "3", "--m", "2"]) == 2
    assert "SPEEDSCHED_SEED" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# partition / schedule
# ---------------------------------------------------------------------------


def test_partition_ipr_on_skewed_prediction(tmp_path):
    inst = write_instance(tmp_path, "nine", [1.0] * 9, [1.0, 1.0], [8.0, 1.0])
    out = tmp_path / "part.json"
    assert main(["partition", "--in", str(inst), "--algo", "ipr", "--alpha", "0.5",
                 "--out", str(out)]) == 0
    assert load_partition(str(out)).bags == ((0, 2, 4, 6, 8), (1, 3, 5, 7))


def test_partition_one_consistent_trusts_prediction(tmp_path, capsys):
    inst = write_instance(tmp_path, "nine", [1.0] * 9, [1.0, 1.0], [8.0, 1.0])
    assert main(["partition", "--in", str(inst), "--algo", "one-consistent"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert sorted(len(b) for b in doc["bags"]) == [1, 8]


def test_schedule_round_trip(tmp_path, capsys):
    inst = write_instance(tmp_path, "abc", [4.0, 3.0, 2.0], [2.0, 1.0], [2.0, 1.0])
    part_path = tmp_path / "part.json"
    save_partition(Partition(bags=((0,), (1, 2))), str(part_path))
    assert main(["schedule", "--in", str(inst), "--partition", str(part_path)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["makespan"] == 4.0
    assert doc["bag_to_machine"] == [1, 0]
    assert doc["optimal"] is True


def test_schedule_lpt_variant(tmp_path, capsys):
    inst = write_instance(tmp_path, "abc", [4.0, 3.0, 2.0], [2.0, 1.0], [2.0, 1.0])
    part_path = tmp_path / "part.json"
    save_partition(Partition(bags=((0,), (1, 2))), str(part_path))
    assert main(["schedule", "--in", str(inst), "--partition", str(part_path),
                 "--scheduler", "lpt"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["optimal"] is False
    assert doc["makespan"] >= 4.0


def test_schedule_rejects_mismatched_partition(tmp_path, capsys):
    inst = write_instance(tmp_path, "abc", [4.0, 3.0, 2.0], [2.0, 1.0], [2.0, 1.0])
    part_path = tmp_path / "part.json"
    save_partition(Partition(bags=((0, 1, 2),)), str(part_path))
    assert main(["schedule", "--in", str(inst), "--partition", str(part_path)]) == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------


def test_evaluate_bare_ratio(tmp_path, capsys):
    inst = write_instance(tmp_path, "trap", [1.0] * 10, [1.0, 1.0], [9.0, 1.0])
    assert main(["evaluate", "--in", str(inst), "--algo", "one-consistent"]) == 0
    assert capsys.readouterr().out == "1.8\n"


def test_evaluate_json_format(tmp_path, capsys):
    inst = write_instance(tmp_path, "trap", [1.0] * 10, [1.0, 1.0], [9.0, 1.0])
    assert main(["evaluate", "--in", str(inst), "--algo", "ipr", "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["instance"] == "trap"
    assert doc["algorithm"] == "ipr(alpha=0.5,rho=4)"
    assert doc["oracle_kind"] == "exact"
    assert doc["ratio"] == pytest.approx(1.0)


def test_evaluate_csv_format(tmp_path, capsys):
    inst = write_instance(tmp_path, "trap", [1.0] * 10, [1.0, 1.0], [9.0, 1.0])
    assert main(["evaluate", "--in", str(inst), "--algo", "lpt", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0] == "instance,algorithm,scheduler,oracle_kind,ratio"
    assert lines[1] == "trap,lpt,exact,exact,1.0"


def test_evaluate_lower_bound_oracle(tmp_path, capsys):
    inst = write_instance(tmp_path, "lb", [3.0, 2.0, 2.0], [2.0, 1.0], [2.0, 1.0])
    assert main(["evaluate", "--in", str(inst), "--algo", "one-consistent",
                 "--oracle", "lower_bound"]) == 0
    ratio = float(capsys.readouterr().out)
    assert ratio == pytest.approx(2.5 / (7.0 / 3.0))


def test_evaluate_writes_file(tmp_path):
    inst = write_instance(tmp_path, "trap", [1.0] * 10, [1.0, 1.0], [9.0, 1.0])
    out = tmp_path / "ratio.txt"
    assert main(["evaluate", "--in", str(inst), "--algo", "one-consistent",
                 "--out", str(out)]) == 0
    assert out.read_text() == "1.8\n"


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------


def experiment_config_file(tmp_path, **overrides):
    doc = {"n": 6, "m": 2, "instances_per_point": 5, "sweep_values": [0.0, 10.0]}
    doc.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return path


def test_experiment_csv_matches_library(tmp_path):
    cfg_path = experiment_config_file(tmp_path)
    out = tmp_path / "rows.csv"
    assert main(["experiment", "--config", str(cfg_path), "--out", str(out)]) == 0
    expected = rows_to_csv(
        run_experiment(
            ExperimentConfig(n=6, m=2, instances_per_point=5, sweep_values=(0.0, 10.0))
        )
    )
    assert out.read_text() == expected


def test_experiment_seed_override(tmp_path):
    cfg_path = experiment_config_file(tmp_path)
    out = tmp_path / "rows.csv"
    assert main(["experiment", "--config", str(cfg_path), "--seed", "7",
                 "--out", str(out)]) == 0
    expected = rows_to_csv(
        run_experiment(
            ExperimentConfig(n=6, m=2, instances_per_point=5, sweep_values=(0.0, 10.0), seed=7)
        )
    )
    assert out.read_text() == expected


def test_experiment_json_format(tmp_path, capsys):
    cfg_path = experiment_config_file(tmp_path, instances_per_point=2, sweep_values=[0.0])
    assert main(["experiment", "--config", str(cfg_path), "--format", "json"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc) == 3
    assert doc[0]["sweep_param"] == "err_sigma"
    assert doc[0]["n_instances"] == 2


def test_experiment_runs_are_reproducible(tmp_path):
    cfg_path = experiment_config_file(tmp_path)
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    assert main(["experiment", "--config", str(cfg_path), "--out", str(out1)]) == 0
    assert main(["experiment", "--config", str(cfg_path), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_experiment_rejects_bad_config(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"bogus": 1}))
    assert main(["experiment", "--config", str(path)]) == 2
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# verify / curves
# ---------------------------------------------------------------------------


def test_verify_small_run_passes(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["verify", "--trials", "3", "--seed", "0", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "PASS gen-valid-instances (3/3)" in text
    assert "23/23 properties passed" in text
    doc = json.loads(out.read_text())
    assert doc["all_passed"] is True
    assert len(doc["properties"]) == 23


def test_curves_default_grid(capsys):
    assert main(["curves"]) == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert lines[0].startswith("alpha,consistency")
    assert len(lines) == 10  # header + nine alphas


def test_curves_single_alpha(capsys):
    assert main(["curves", "--alphas", "0.5"]) == 0
    assert "0.5,1.5,6.0,4.0,3.0" in capsys.readouterr().out


def test_curves_rejects_bad_alphas(capsys):
    assert main(["curves", "--alphas", "abc"]) == 2
    capsys.readouterr()
    assert main(["curves", "--alphas", "1.5"]) == 2
    capsys.readouterr()
    assert main(["curves", "--alphas", ""]) == 2


# ---------------------------------------------------------------------------
# exit codes
# ---------------------------------------------------------------------------


def test_unknown_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["frobnicate"])
    assert excinfo.value.code == 2


def test_missing_required_flag_is_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main(["evaluate", "--algo", "lpt"])
    assert excinfo.value.code == 2


def test_missing_input_file_is_usage_error(tmp_path, capsys):
    assert main(["evaluate", "--in", str(tmp_path / "nope.json"), "--algo", "lpt"]) == 2
    assert "error:" in capsys.readouterr().err


def test_budget_exhaustion_exit_code(tmp_path, capsys):
    inst = write_instance(tmp_path, "budget", [3.0, 2.0, 2.0], [2.0, 1.0], [2.0, 1.0])
    assert main(["evaluate", "--in", str(inst), "--algo", "one-consistent",
                 "--node-budget", "1"]) == 3
    assert "error:" in capsys.readouterr().err
