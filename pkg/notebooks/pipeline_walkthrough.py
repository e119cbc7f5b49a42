# Cell 1 - Imports and Setup
import sys
import os
from pathlib import Path

# Get the absolute path to the project root directory
project_root = os.path.dirname(os.getcwd())
sys.path.append(project_root)

from edbench.cli.pipeline import load_build, prepare_splits, run_build
from edbench.config import ExperimentConfig, SynthConfig
from edbench.evaluation import AurocAnalysis, format_table, comparison_table
from edbench.logging_utils import configure_logging
from edbench.models import DeepModel, TreeBaseline, get_scenario
from edbench.synth import PLANTED_CODES, generate_fixture

configure_logging(level="WARNING")

# Cell 2 - Generate a Synthetic Data Root
# Small fixture with the default planted effects (waveform, routine, both, missingness)
data_root = generate_fixture(SynthConfig(n_patients=300, seed=7), Path("walkthrough_data"))
print(f"Fixture written to {data_root}")
print("Planted labels:", PLANTED_CODES)

# Cell 3 - Build Samples, Features, Labels and Folds
config = ExperimentConfig.build(
    data_root=data_root,
    output_dir=Path("walkthrough_outputs"),
    task="diagnoses",
    splits={"n_folds": 5, "val_fold": 3, "test_fold": 4, "seed": 0},
    bootstrap={"n_iter": 200},
)
manifest = run_build(config)  # prints cohort statistics
build = load_build(config)
print(f"\nManifest: {manifest}")
print(f"{len(build.samples)} samples, {len(build.space)} diagnosis labels")
print(build.features.numeric.describe().T.head(10))

# Cell 4 - Train a Routine-Data Tree Baseline
# The analyzer receives validation and test scores from run_training
spec = get_scenario("routine_tree")
preprocessor, inputs = prepare_splits(build, spec, config)
tree = TreeBaseline(spec, build.space, config.tree_config())
tree.add_analyzer(AurocAnalysis(build.space, spec.name, config.bootstrap))
results = tree.run_training(inputs["train"], inputs["val"], inputs["test"])
print(f"Trained {results['model_metrics']['n_models']} label models in {results['timing_info']['execution_time']:.1f} s")
print(f"Skipped labels: {results['results_metrics']['skipped_labels']}")

# Cell 5 - Train the Fused Waveform + Routine Model
spec = get_scenario("wave_routine_deep")
preprocessor, inputs = prepare_splits(build, spec, config)
deep = DeepModel(spec, build.space, config.deep_config(), preprocessor.vocab_sizes())
deep.add_analyzer(AurocAnalysis(build.space, spec.name, config.bootstrap))
results = deep.run_training(inputs["train"], inputs["val"], inputs["test"])
print(f"Best epoch: {results['results_metrics']['best_epoch']}")

# Cell 6 - Compare Test AUROCs
reports = {}
for model in (tree, deep):
    analysis = model.run_analysis(split="test")["analyzer_0"]
    reports[model.scenario.name] = analysis["report"]
    print(f"{model.scenario.name}: macro AUROC {analysis['macro_auroc']:.4f} [{analysis['ci_lo']:.4f}, {analysis['ci_hi']:.4f}]")
print(format_table(comparison_table(reports), "Macro AUROC by scenario"))

planted = [PLANTED_CODES[k] for k in ("L_wave", "L_tab", "L_both", "L_miss")]
for name, report in reports.items():
    aurocs = report.label_aurocs()
    print(name, {code: round(aurocs.get(code, float("nan")), 4) for code in planted})

# Cell 7 - Plot Bootstrap Distributions
deep.plot_analysis(split="test")

# Cell 8 - Export Results
print("\nExporting results...")
deep.analyzers[0].export_results("wave_routine_deep_scores.csv")
reports["wave_routine_deep"].to_json(Path("walkthrough_outputs") / "wave_routine_deep_report.json")
