import json
from pathlib import Path

import pytest

from edbench.cli import main
from edbench.cli.main import EXIT_DATA, EXIT_OK, EXIT_USAGE, load_config, parse_arguments
from edbench.cli.pipeline import (
    CHECKPOINT_FILE,
    MANIFEST_FILE,
    compare_reports,
    evaluate_checkpoint,
    load_build,
    prepare_splits,
    run_build,
    run_dir,
    train_scenario,
)
from edbench.config import ExperimentConfig, SynthConfig
from edbench.errors import ConfigError, DataError
from edbench.models import get_scenario


def _write_config(config: ExperimentConfig, path: Path) -> str:
    path.write_text(json.dumps(config.to_dict(), indent=2), encoding="utf-8")
    return str(path)


def test_synth_command_writes_a_data_root(tmp_path):
    config = ExperimentConfig.build(data_root=tmp_path / "data", synth={"n_patients": 5, "seed": 2})
    assert main(["synth", "--config", _write_config(config, tmp_path / "config.json")]) == EXIT_OK
    assert (tmp_path / "data" / "edstays.csv").is_file()
    assert (tmp_path / "data" / "waveforms").is_dir()


def test_build_manifest_hashes_every_artifact(built_config):
    manifest = json.loads((built_config.build_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert set(manifest["artifacts"]) == {"sample_index", "features", "labels", "folds"}
    assert set(manifest["artifacts"]["labels"]) == {
        "labels_diagnoses.csv",
        "label_space_diagnoses.json",
        "labels_deterioration.csv",
        "label_space_deterioration.json",
    }
    assert manifest["folds"] == {"n_folds": 5, "val_fold": 3, "test_fold": 4}

    build = load_build(built_config, "deterioration")
    assert len(build.samples) == manifest["n_samples"]
    assert len(build.space) == 15


def test_rebuild_is_identical(built_config, tmp_path):
    again = run_build(built_config.model_copy(update={"output_dir": tmp_path / "again"}))
    first = json.loads((built_config.build_dir / MANIFEST_FILE).read_text(encoding="utf-8"))
    assert json.loads(again.read_text(encoding="utf-8")) == first


def test_missing_table_exits_with_data_error(copy_root, tmp_path, capsys):
    (copy_root / "labevents.csv").unlink()
    config = ExperimentConfig.build(data_root=copy_root, output_dir=tmp_path / "outputs")
    code = main(["build", "--config", _write_config(config, tmp_path / "config.json")])
    assert code == EXIT_DATA
    err = capsys.readouterr().err
    assert "labevents" in err
    assert "ingest" in err


def test_invalid_config_is_a_usage_error(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"scenario": "routine_tree", "unknown_key": 1}), encoding="utf-8")
    assert main(["build", "--config", str(path)]) == EXIT_USAGE
    assert main(["build", "--config", str(tmp_path / "absent.json")]) == EXIT_USAGE


def test_unknown_scenario_is_rejected_by_the_parser():
    with pytest.raises(SystemExit) as excinfo:
        parse_arguments(["train", "--scenario", "wave_tree"])
    assert excinfo.value.code == 2


def test_published_size_profile_is_selectable():
    args = parse_arguments(["train", "--profile", "paper", "--scenario", "wave_deep"])
    deep = load_config(args).deep_config()
    assert (deep.n_blocks, deep.d_model, deep.d_state, deep.epochs, deep.batch_size) == (4, 512, 8, 20, 64)
    assert deep.lr == deep.weight_decay == 0.001
    with pytest.raises(SystemExit):
        parse_arguments(["train", "--profile", "huge"])


def test_train_eval_report_through_the_command_line(built_config, tmp_path, capsys):
    config_path = _write_config(built_config, tmp_path / "config.json")
    assert main(["train", "--config", config_path, "--scenario", "routine_tree"]) == EXIT_OK
    checkpoint = run_dir(built_config, "routine_tree") / CHECKPOINT_FILE
    assert checkpoint.is_file()
    assert (checkpoint.parent / "train.log").is_file()

    assert main(["eval", "--config", config_path, "--scenario", "routine_tree"]) == EXIT_OK
    report_path = checkpoint.parent / "eval_report.json"
    report = json.loads(report_path.read_text(encoding="utf-8"))
    assert report["scenario"] == "routine_tree"
    assert report["task"] == "diagnoses"
    assert report["macro"][1] <= report["macro"][0] <= report["macro"][2]
    assert f"{report['macro'][0]:.4f}" in capsys.readouterr().out

    out = tmp_path / "comparison.txt"
    assert main(["report", str(report_path), "--out", str(out)]) == EXIT_OK
    assert "routine_tree" in out.read_text(encoding="utf-8")


def test_evaluation_refuses_a_tampered_build(built_config, tmp_path):
    config = built_config.model_copy(update={"output_dir": tmp_path / "outputs"})
    run_build(config)
    checkpoint = train_scenario(config, "ecgfeat_tree")
    labels = config.build_dir / "labels_diagnoses.csv"
    labels.write_text(labels.read_text(encoding="utf-8") + "0,I21,1\n", encoding="utf-8")
    with pytest.raises(DataError):
        evaluate_checkpoint(config, checkpoint)


def test_report_pairs_must_name_known_scenarios(built_config, tmp_path):
    config = built_config.model_copy(update={"output_dir": tmp_path / "outputs"})
    run_build(config)
    paths = []
    for scenario in ("routine_tree", "ecgfeat_routine_tree"):
        evaluate_checkpoint(config, train_scenario(config, scenario))
        paths.append(run_dir(config, scenario) / "eval_report.json")

    text = compare_reports(paths)
    assert "Relative improvement (%): routine_tree vs ecgfeat_routine_tree" in text
    text = compare_reports(paths, pair=("ecgfeat_routine_tree", "routine_tree"))
    assert "ecgfeat_routine_tree vs routine_tree" in text
    with pytest.raises(DataError):
        compare_reports(paths, pair=("wave_deep", "routine_tree"))
    with pytest.raises(ConfigError, match="routine_tree"):
        compare_reports(paths + paths[:1])
    assert main(["report", str(paths[0]), str(paths[0])]) == EXIT_USAGE


def test_training_rows_follow_the_config(built_config):
    build = load_build(built_config)
    _, all_rows = prepare_splits(build, get_scenario("routine_tree"), built_config)
    first_only = built_config.model_copy(update={"train_on_all_ecgs": False})
    _, first_rows = prepare_splits(build, get_scenario("routine_tree"), first_only)
    assert first_rows["train"].first_of_visit.all()
    assert len(first_rows["train"]) <= len(all_rows["train"])
    assert len(first_rows["test"]) == len(all_rows["test"])


def _large_build(tmp_path_factory, seed: int) -> ExperimentConfig:
    """A larger fixture so planted effects are learnable."""
    from edbench.synth import generate_fixture

    root = generate_fixture(SynthConfig(n_patients=400, seed=seed), tmp_path_factory.mktemp(f"large-{seed}"))
    config = ExperimentConfig.build(
        data_root=root,
        output_dir=tmp_path_factory.mktemp(f"large-{seed}-outputs"),
        task="diagnoses",
        splits={"n_folds": 5, "val_fold": 3, "test_fold": 4, "seed": 0},
        tree={"n_estimators": 100, "max_depth": 3},
        deep={"n_blocks": 1, "d_model": 32, "d_state": 8, "epochs": 8, "batch_size": 32},
        bootstrap={"n_iter": 200},
    )
    run_build(config)
    return config


@pytest.fixture(scope="module")
def large_config(tmp_path_factory):
    return _large_build(tmp_path_factory, 21)


@pytest.fixture(scope="module", params=[21, 34, 55])
def seeded_config(request, tmp_path_factory):
    return _large_build(tmp_path_factory, request.param)


@pytest.mark.slow
def test_each_modality_finds_its_planted_label(seeded_config):
    reports = {}
    for scenario in ("routine_tree", "wave_deep", "wave_routine_deep"):
        reports[scenario] = evaluate_checkpoint(seeded_config, train_scenario(seeded_config, scenario)).label_aurocs()
    assert reports["wave_deep"]["I48"] > reports["routine_tree"]["I48"] + 0.05
    assert reports["routine_tree"]["N17"] > reports["wave_deep"]["N17"] + 0.05
    assert reports["wave_routine_deep"]["I21"] >= max(reports["wave_deep"]["I21"], reports["routine_tree"]["I21"]) - 0.02


@pytest.mark.slow
def test_missingness_columns_carry_informative_gaps(large_config, tmp_path):
    aurocs = {}
    for mask_columns in (True, False):
        config = large_config.model_copy(
            update={
                "splits": large_config.splits.model_copy(update={"mask_columns": mask_columns}),
                "tree": large_config.tree.model_copy(update={"use_imputed": True}),
                "output_dir": tmp_path / f"mask-{mask_columns}",
            }
        )
        run_build(config)
        aurocs[mask_columns] = evaluate_checkpoint(config, train_scenario(config, "routine_tree")).label_aurocs()["E87"]
    assert aurocs[True] > aurocs[False]
