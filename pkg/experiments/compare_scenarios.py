#!/usr/bin/env python3
"""
Scenario comparison on the synthetic fixture

Trains the five benchmark scenarios over several seeds and compares the median test
AUROC of the planted labels. The fused waveform + routine model should beat both
unimodal models on the label that needs both modalities.
"""

import argparse
import statistics
import sys
from pathlib import Path
from typing import Dict, List

import matplotlib.pyplot as plt
import numpy as np

sys.path.append(str(Path(__file__).resolve().parents[1]))

from edbench.cli.pipeline import compare_reports, evaluate_checkpoint, run_build, run_dir, run_synth, train_scenario
from edbench.config import SCENARIO_NAMES, ExperimentConfig
from edbench.logging_utils import configure_logging
from edbench.synth import PLANTED_CODES

DEFAULT_CONFIG = Path(__file__).parent / "configs" / "desk.json"


def run_seed(config: ExperimentConfig, scenarios: List[str]) -> Dict[str, Dict[str, float]]:
    """
    Build and evaluate every scenario for one seed.

    Args:
        config: Experiment settings for the seed
        scenarios: Scenario names to train

    Returns:
        Scenario -> label -> test AUROC
    """
    print(f"\nSeed {config.seed}: building {config.data_root}")
    run_synth(config)
    run_build(config)

    aurocs = {}
    for scenario in scenarios:
        print(f"  training {scenario}...")
        report = evaluate_checkpoint(config, train_scenario(config, scenario))
        aurocs[scenario] = report.label_aurocs()
        aurocs[scenario]["macro"] = report.macro[0]
        print(f"  {scenario}: macro AUROC {report.macro[0]:.4f}")
    print(compare_reports([run_dir(config, s) / "eval_report.json" for s in scenarios]))
    return aurocs


def summarize(per_seed: List[Dict[str, Dict[str, float]]], scenarios: List[str]) -> Dict[str, Dict[str, float]]:
    """Median AUROC over seeds for each scenario and planted label."""
    names = [PLANTED_CODES[k] for k in ("L_wave", "L_tab", "L_both", "L_miss")] + ["macro"]
    medians = {
        s: {name: statistics.median(run[s].get(name, np.nan) for run in per_seed) for name in names} for s in scenarios
    }

    print("\n" + "=" * 80)
    print("Median test AUROC over seeds")
    print("=" * 80)
    print(f"{'Scenario':<24}" + "".join(f"{n:>10}" for n in names))
    print("-" * 80)
    for s in scenarios:
        print(f"{s:<24}" + "".join(f"{medians[s][n]:>10.4f}" for n in names))
    print("=" * 80)

    both = PLANTED_CODES["L_both"]
    if {"wave_routine_deep", "wave_deep", "routine_tree"} <= set(scenarios):
        fused = medians["wave_routine_deep"][both]
        margin = fused - max(medians["wave_deep"][both], medians["routine_tree"][both])
        print(f"Fusion margin on {both}: {margin:+.4f}")
    return medians


def plot_medians(medians: Dict[str, Dict[str, float]], filename: str = "scenario_comparison.png"):
    scenarios = list(medians)
    names = list(next(iter(medians.values())))
    index = np.arange(len(names))
    width = 0.8 / len(scenarios)

    plt.figure(figsize=(12, 7))
    for i, s in enumerate(scenarios):
        plt.bar(index + i * width, [medians[s][n] for n in names], width, label=s, alpha=0.7)
    plt.axhline(y=0.5, color="r", linestyle="--", alpha=0.5, label="Chance")
    plt.xlabel("Label")
    plt.ylabel("Median test AUROC")
    plt.title("Planted labels by scenario")
    plt.xticks(index + 0.4 - width / 2, names)
    plt.ylim(0.4, 1.0)
    plt.legend()
    plt.grid(axis="y", linestyle="--", alpha=0.7)
    plt.tight_layout()
    plt.savefig(filename)
    plt.show()


def main():
    parser = argparse.ArgumentParser(description="Compare benchmark scenarios on the synthetic fixture")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG), help="Base experiment config")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2], help="Seeds to run")
    parser.add_argument("--task", default="diagnoses", choices=["diagnoses", "deterioration"])
    parser.add_argument("--no-plot", action="store_true", help="Skip the bar chart")
    args = parser.parse_args()

    configure_logging(level="WARNING")
    base = ExperimentConfig.from_json(args.config, task=args.task)
    scenarios = list(SCENARIO_NAMES)

    per_seed = []
    for seed in args.seeds:
        config = base.model_copy(
            update={
                "seed": seed,
                "data_root": Path(base.data_root) / f"seed{seed}",
                "output_dir": Path(base.output_dir) / f"seed{seed}",
                "synth": base.synth.model_copy(update={"seed": base.synth.seed + seed}),
            }
        )
        per_seed.append(run_seed(config, scenarios))

    medians = summarize(per_seed, scenarios)
    if not args.no_plot:
        plot_medians(medians)


if __name__ == "__main__":
    main()
