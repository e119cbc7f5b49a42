import shutil

import numpy as np
import pytest

from edbench.cohort.samples import WINDOW_SECONDS, Sample
from edbench.config import ExperimentConfig, SynthConfig
from edbench.ingest.records import parse_timestamp
from edbench.synth import generate_fixture

ARRIVAL = parse_timestamp("2150-01-01 10:00:00")


@pytest.fixture
def arrival():
    return ARRIVAL


@pytest.fixture
def make_sample():
    """Factory of samples arriving at ``ARRIVAL`` unless told otherwise."""

    def factory(sample_id=0, subject_id="10000001", stay_id="30000001", hadm_id="20000001", arrival=ARRIVAL, **kwargs):
        values = dict(
            sample_id=sample_id,
            subject_id=subject_id,
            stay_id=stay_id,
            hadm_id=hadm_id,
            record_id=f"r{sample_id}",
            ecg_time=arrival + 600,
            arrival=arrival,
            window_end=arrival + WINDOW_SECONDS,
            is_first_of_visit=True,
            gender="F",
            race="WHITE",
            age=60,
            acuity=3,
        )
        values.update(kwargs)
        return Sample(**values)

    return factory


@pytest.fixture(scope="session")
def synth_config():
    return SynthConfig(n_patients=60, seed=7)


@pytest.fixture(scope="session")
def fixture_root(tmp_path_factory, synth_config):
    """Synthetic data root shared by the whole session; tests must not modify it."""
    return generate_fixture(synth_config, tmp_path_factory.mktemp("fixture"))


@pytest.fixture
def tiny_deep():
    return {"n_blocks": 1, "d_model": 8, "d_state": 4, "epochs": 2, "batch_size": 32}


@pytest.fixture
def experiment_config(fixture_root, tmp_path, tiny_deep):
    """Five-fold experiment on the shared fixture, writing into a fresh output directory."""
    return ExperimentConfig.build(
        data_root=fixture_root,
        output_dir=tmp_path / "outputs",
        task="diagnoses",
        scenario="routine_tree",
        splits={"n_folds": 5, "val_fold": 3, "test_fold": 4, "seed": 1},
        tree={"n_estimators": 10, "max_depth": 3},
        deep=tiny_deep,
        bootstrap={"n_iter": 50, "seed": 0},
    )


@pytest.fixture(scope="session")
def built_config(fixture_root, tmp_path_factory):
    """Experiment config whose build directory is populated once per session."""
    from edbench.cli.pipeline import run_build

    config = ExperimentConfig.build(
        data_root=fixture_root,
        output_dir=tmp_path_factory.mktemp("built"),
        task="diagnoses",
        scenario="routine_tree",
        splits={"n_folds": 5, "val_fold": 3, "test_fold": 4, "seed": 1},
        tree={"n_estimators": 10, "max_depth": 3},
        deep={"n_blocks": 1, "d_model": 8, "d_state": 4, "epochs": 2, "batch_size": 32},
        bootstrap={"n_iter": 50, "seed": 0},
    )
    run_build(config)
    return config


@pytest.fixture
def copy_root(fixture_root, tmp_path):
    """A private, modifiable copy of the synthetic data root."""
    target = tmp_path / "data"
    shutil.copytree(fixture_root, target)
    return target


@pytest.fixture
def rng():
    return np.random.default_rng(0)
