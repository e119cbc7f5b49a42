"""
Pipeline stages behind the command-line interface.

Each stage reads its inputs from disk and writes its outputs under the experiment's
output directory, so the stages can run as separate processes.
"""

import hashlib
import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..cohort.samples import Sample, link_ecg_to_stays, read_sample_index, write_sample_index
from ..cohort.stats import cohort_stats, format_cohort_stats
from ..config import ExperimentConfig
from ..errors import ConfigError, DataError, EdbenchError, EmptyCohortError
from ..evaluation.reports import EvalReport, comparison_table, format_table, improvement_table, per_label_report
from ..features.assemble import FeatureMatrix, build_feature_matrix, read_feature_matrix, write_feature_matrix
from ..ingest.registry import VariableRegistry
from ..ingest.tables import load_sources, load_table
from ..ingest.waveforms import WaveformStore
from ..labels.codes import load_icd9_map, read_vocab_file
from ..labels.deterioration import build_deterioration_matrix, load_deterioration_spec
from ..labels.diagnoses import build_diagnosis_matrix
from ..labels.space import LabelMatrix, LabelSpace, read_label_triplets, write_label_triplets
from ..models.checkpoint import Checkpoint, make_checkpoint, restore_model
from ..models.data import InputPreprocessor, ModelInputs, load_waveform_array
from ..models.deep_model import DeepModel
from ..models.scenarios import ScenarioSpec, get_scenario
from ..models.tree import TreeBaseline
from ..splits.folds import FoldAssignment, assign_folds, read_fold_file, write_fold_file
from ..synth.generator import generate_fixture

logger = logging.getLogger(__name__)

TASKS = ("diagnoses", "deterioration")
MANIFEST_FILE = "manifest.json"
ICD9_MAP_FILE = "icd9_to_icd10.csv"
CHECKPOINT_FILE = "checkpoint.pt"


@contextmanager
def stage(name: str):
    """Tag edbench errors raised inside the block with the pipeline stage."""
    try:
        yield
    except EdbenchError as exc:
        if not hasattr(exc, "stage"):
            exc.stage = name
        raise


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def artifact_files(task: str = None) -> Dict[str, List[str]]:
    """Build artifacts and the files each consists of, relative to the build directory."""
    tasks = TASKS if task is None else (task,)
    return {
        "sample_index": ["samples.csv"],
        "features": ["features.csv", "features.json"],
        "labels": [name for t in tasks for name in (f"labels_{t}.csv", f"label_space_{t}.json")],
        "folds": ["folds.csv"],
    }


@dataclass
class BuildArtifacts:
    samples: List[Sample]
    features: FeatureMatrix
    labels: LabelMatrix
    folds: FoldAssignment
    manifest: dict

    @property
    def space(self) -> LabelSpace:
        return self.labels.space


def run_synth(config: ExperimentConfig) -> Path:
    """Write the synthetic fixture to the experiment's data root."""
    with stage("synth"):
        return generate_fixture(config.synth, config.data_root)


def _icd9_map_path(config: ExperimentConfig) -> Optional[Path]:
    if config.labels.icd9_map is not None:
        return config.labels.icd9_map
    local = Path(config.data_root) / ICD9_MAP_FILE
    return local if local.is_file() else None


def run_build(config: ExperimentConfig) -> Path:
    """
    Build the dataset: sample index, feature matrix, labels of both tasks and folds.

    Every written file is recorded with its SHA-256 in ``manifest.json``.

    Args:
        config (ExperimentConfig): Experiment settings

    Returns:
        Path: The build manifest
    """
    root = Path(config.data_root)
    out = config.build_dir
    registry = VariableRegistry.load()

    with stage("ingest"):
        sources = load_sources(root, registry)
        store = WaveformStore(root, sources.ecg_manifest)
    with stage("cohort"):
        samples = link_ecg_to_stays(sources.stays, sources.ecg_manifest)
        if not samples:
            raise EmptyCohortError(f"no ECG within 90 minutes of an adult ED arrival under {root}")
        print(format_cohort_stats(cohort_stats(samples)))
    with stage("labels"):
        vocab = read_vocab_file(config.labels.vocab_file) if config.labels.vocab_file else None
        diagnoses, _ = build_diagnosis_matrix(
            samples,
            sources,
            min_count=config.labels.min_count,
            vocab=vocab,
            icd9_map=load_icd9_map(_icd9_map_path(config)),
        )
        spec = load_deterioration_spec(config.labels.deterioration_spec)
        deterioration = build_deterioration_matrix(samples, sources, spec, registry)
    with stage("features"):
        features = build_feature_matrix(samples, sources, registry, store)
    with stage("splits"):
        split = config.splits
        folds = assign_folds(
            samples,
            diagnoses,
            n_folds=split.n_folds,
            val_fold=split.val_fold,
            test_fold=split.test_fold,
            seed=split.seed,
            fold_file=split.fold_file,
        )

    with stage("write"):
        write_sample_index(samples, out / "samples.csv", folds.folds)
        write_feature_matrix(features, out / "features.csv")
        for task, matrix in (("diagnoses", diagnoses), ("deterioration", deterioration)):
            write_label_triplets(matrix, out / f"labels_{task}.csv")
            matrix.space.to_json(out / f"label_space_{task}.json")
        write_fold_file(folds, out / "folds.csv")

        manifest = {
            "artifacts": {
                name: {f: file_sha256(out / f) for f in files} for name, files in artifact_files().items()
            },
            "registry_hash": registry.hash,
            "label_space_hashes": {"diagnoses": diagnoses.space.hash, "deterioration": deterioration.space.hash},
            "n_samples": len(samples),
            "n_subjects": len(folds.folds),
            "folds": {"n_folds": folds.n_folds, "val_fold": folds.val_fold, "test_fold": folds.test_fold},
        }
        path = out / MANIFEST_FILE
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, indent=2, sort_keys=True)
    logger.info(f"Build written to {out}: {len(samples)} samples, {len(diagnoses.space)} diagnosis labels")
    return path


def load_build(config: ExperimentConfig, task: Optional[str] = None) -> BuildArtifacts:
    """
    Read a build for one task and check every file against the manifest hashes.

    Args:
        config (ExperimentConfig): Experiment settings
        task (str, optional): Label task; ``config.task`` by default

    Returns:
        BuildArtifacts: Samples, features, labels and folds
    """
    task = task or config.task
    out = config.build_dir
    path = out / MANIFEST_FILE
    if not path.is_file():
        raise DataError(f"no build manifest at {path}; run the build command first")
    with open(path, "r", encoding="utf-8") as handle:
        manifest = json.load(handle)
    for name, files in artifact_files(task).items():
        for f in files:
            expected = manifest["artifacts"][name].get(f)
            if expected is None or not (out / f).is_file() or file_sha256(out / f) != expected:
                raise DataError(f"build artifact {f} is missing or differs from the manifest")

    samples = read_sample_index(out / "samples.csv")
    space = LabelSpace.from_json(out / f"label_space_{task}.json")
    labels = read_label_triplets(out / f"labels_{task}.csv", space, [s.sample_id for s in samples])
    info = manifest["folds"]
    folds = FoldAssignment(
        folds=read_fold_file(out / "folds.csv"),
        n_folds=info["n_folds"],
        val_fold=info["val_fold"],
        test_fold=info["test_fold"],
    )
    return BuildArtifacts(
        samples=samples, features=read_feature_matrix(out / "features.csv"), labels=labels, folds=folds, manifest=manifest
    )


def waveform_store(config: ExperimentConfig) -> WaveformStore:
    root = Path(config.data_root)
    return WaveformStore(root, load_table(root / "ecg_manifest.csv", "ecg_manifest").records)


def split_rows(build: BuildArtifacts, config: ExperimentConfig) -> Dict[str, List[Sample]]:
    """Train/val/test samples; training keeps every ECG unless configured otherwise."""
    split = build.folds.split_samples(build.samples)
    if not config.train_on_all_ecgs:
        split["train"] = [s for s in split["train"] if s.is_first_of_visit]
    return split


def _waveforms(scenario: ScenarioSpec, rows: Sequence[Sample], store: WaveformStore, rate: int) -> Optional[np.ndarray]:
    return load_waveform_array(rows, store, rate) if scenario.waveform else None


def prepare_splits(
    build: BuildArtifacts, scenario: ScenarioSpec, config: ExperimentConfig, store: Optional[WaveformStore] = None
) -> Tuple[InputPreprocessor, Dict[str, ModelInputs]]:
    """
    Fit preprocessing on the training rows and build the inputs of every split.

    Args:
        build (BuildArtifacts): Loaded build
        scenario (ScenarioSpec): Scenario to prepare for
        config (ExperimentConfig): Experiment settings
        store (WaveformStore, optional): Waveform source; read from the data root when needed

    Returns:
        Tuple[InputPreprocessor, Dict[str, ModelInputs]]: Fitted preprocessing and role -> inputs
    """
    if scenario.waveform and store is None:
        store = waveform_store(config)
    rate = config.deep_config().sampling_rate_target
    split = split_rows(build, config)
    waveforms = {role: _waveforms(scenario, rows, store, rate) for role, rows in split.items()}

    impute = config.tree.use_imputed if scenario.family == "tree" else None
    preprocessor = InputPreprocessor(scenario, mask_columns=config.splits.mask_columns, impute=impute)
    train_ids = [s.sample_id for s in split["train"]]
    preprocessor.fit(build.features.subset(train_ids), waveforms["train"])
    inputs = {
        role: preprocessor.transform(rows, build.features, build.labels, waveforms[role]) for role, rows in split.items()
    }
    return preprocessor, inputs


def run_dir(config: ExperimentConfig, scenario: Optional[str] = None) -> Path:
    name = scenario or config.scenario
    return Path(config.output_dir) / "runs" / f"{config.task}-{name}-seed{config.seed}"


def train_scenario(config: ExperimentConfig, scenario: Optional[str] = None) -> Path:
    """
    Train one scenario and save its checkpoint and training summary.

    Args:
        config (ExperimentConfig): Experiment settings
        scenario (str, optional): Scenario name, e.g. an ablation; ``config.scenario`` by default

    Returns:
        Path: The checkpoint
    """
    with stage("config"):
        spec = get_scenario(scenario or config.scenario)
    with stage("load"):
        build = load_build(config)
    with stage("preprocess"):
        preprocessor, inputs = prepare_splits(build, spec, config)

    with stage("train"):
        if spec.family == "tree":
            model = TreeBaseline(spec, build.space, config.tree_config())
        else:
            model = DeepModel(spec, build.space, config.deep_config(), preprocessor.vocab_sizes())
        results = model.run_training(inputs["train"], inputs["val"])

    out = run_dir(config, spec.name)
    checkpoint = make_checkpoint(model, preprocessor, build.features.registry_hash, experiment=config.to_dict())
    path = checkpoint.save(out / CHECKPOINT_FILE)
    with open(out / "training.json", "w", encoding="utf-8") as handle:
        json.dump(results, handle, indent=2, default=str)
    logger.info(f"{spec.name}: trained in {results['timing_info']['execution_time']:.1f} s")
    return path


def evaluate_checkpoint(
    config: ExperimentConfig, checkpoint_path: Optional[Path] = None, scenario: Optional[str] = None
) -> EvalReport:
    """
    Score the test fold with a checkpoint and write JSON and text reports next to it.

    Only the first ECG of each visit is scored unless configured otherwise.

    Args:
        config (ExperimentConfig): Experiment settings
        checkpoint_path (Path, optional): Checkpoint to evaluate; the scenario's run directory by default
        scenario (str, optional): Scenario whose run directory holds the checkpoint

    Returns:
        EvalReport: The report
    """
    path = Path(checkpoint_path) if checkpoint_path else run_dir(config, scenario) / CHECKPOINT_FILE
    with stage("load"):
        checkpoint = Checkpoint.load(path)
        build = load_build(config, checkpoint.task)
        checkpoint.verify(build.space, build.features.registry_hash)
        model, preprocessor = restore_model(checkpoint)

    with stage("evaluate"):
        test = build.folds.split_samples(build.samples)["test"]
        if config.evaluate_first_only:
            test = [s for s in test if s.is_first_of_visit]
        store = waveform_store(config) if model.scenario.waveform else None
        rate = checkpoint.model_config.get("sampling_rate_target", 100)
        inputs = preprocessor.transform(test, build.features, build.labels, _waveforms(model.scenario, test, store, rate))
        scores = model.predict_proba(inputs)
        report = per_label_report(scores, inputs.labels, build.space, scenario=checkpoint.scenario, bootstrap=config.bootstrap)

    report.to_json(path.parent / "eval_report.json")
    with open(path.parent / "eval_report.txt", "w", encoding="utf-8") as handle:
        handle.write(report.to_text())
    logger.info(f"{checkpoint.scenario}: test macro AUROC {report.macro[0]:.4f} on {report.n_rows} rows")
    return report


def compare_reports(report_paths: Sequence[Path], pair: Optional[Tuple[str, str]] = None, out_path: Optional[Path] = None) -> str:
    """
    Comparison table of several evaluation reports, plus an improvement table for one pair.

    Args:
        report_paths (Sequence[Path]): ``eval_report.json`` files
        pair (Tuple[str, str], optional): Scenarios (candidate, reference); the first two reports by default
        out_path (Path, optional): File receiving the text

    Returns:
        str: The tables as aligned text
    """
    with stage("report"):
        reports: Dict[str, EvalReport] = {}
        for p in report_paths:
            loaded = EvalReport.from_json(p)
            name = loaded.scenario or Path(p).parent.name
            if name in reports:
                raise ConfigError(f"two reports for scenario {name}; compare one run per scenario")
            reports[name] = loaded
        if not reports:
            raise DataError("no evaluation reports given")
        names = list(reports)
        text = format_table(comparison_table(reports), "Macro AUROC by scenario")
        if pair is None and len(names) >= 2:
            pair = (names[0], names[1])
        if pair is not None:
            a, b = pair
            for name in pair:
                if name not in reports:
                    raise DataError(f"no report for scenario {name} (have {', '.join(names)})")
            text += "\n" + format_table(
                improvement_table(reports[a], reports[b]).set_index("name"), f"Relative improvement (%): {a} vs {b}"
            )
    if out_path is not None:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(text, encoding="utf-8")
    return text
