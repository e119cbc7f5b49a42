#!/usr/bin/env python3
"""
Missingness-mask ablation

Trains the routine-data models with and without the binary missingness columns
that accompany median imputation. With informative missingness in the fixture,
dropping the mask should cost AUROC on the label whose signal is which tests
were ordered.
"""

import argparse
import statistics
import sys
from pathlib import Path
from typing import Dict, List

sys.path.append(str(Path(__file__).resolve().parents[1]))

from edbench.cli.pipeline import evaluate_checkpoint, run_build, run_synth, train_scenario
from edbench.config import ExperimentConfig
from edbench.logging_utils import configure_logging
from edbench.synth import PLANTED_CODES

DEFAULT_CONFIG = Path(__file__).parent / "configs" / "desk.json"


def run_ablation(base: ExperimentConfig, seed: int, scenario: str) -> Dict[bool, Dict[str, float]]:
    """
    Evaluate one scenario with and without mask columns.

    Args:
        base: Base experiment settings
        seed: Seed for the fixture, folds and model
        scenario: ``routine_tree`` (imputed inputs) or ``routine_deep``

    Returns:
        mask_columns -> {"macro", label code -> AUROC}
    """
    root = Path(base.data_root) / f"seed{seed}"
    results = {}
    for mask_columns in (True, False):
        config = base.model_copy(
            update={
                "seed": seed,
                "data_root": root,
                "output_dir": Path(base.output_dir) / f"mask-{mask_columns}" / f"seed{seed}",
                "splits": base.splits.model_copy(update={"mask_columns": mask_columns}),
                "tree": base.tree.model_copy(update={"use_imputed": True}),
                "synth": base.synth.model_copy(update={"seed": base.synth.seed + seed, "missingness": "informative"}),
            }
        )
        if mask_columns:
            run_synth(config)
        run_build(config)
        report = evaluate_checkpoint(config, train_scenario(config, scenario))
        results[mask_columns] = {"macro": report.macro[0], **report.label_aurocs()}
        print(f"  seed {seed}, mask_columns={mask_columns}: macro AUROC {report.macro[0]:.4f}")
    return results


def main():
    parser = argparse.ArgumentParser(description="Missingness-mask ablation")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG), help="Base experiment config")
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.add_argument("--scenario", default="routine_tree", choices=["routine_tree", "routine_deep"])
    args = parser.parse_args()

    configure_logging(level="WARNING")
    base = ExperimentConfig.from_json(args.config, task="diagnoses")
    miss = PLANTED_CODES["L_miss"]

    runs: List[Dict[bool, Dict[str, float]]] = []
    for seed in args.seeds:
        print(f"Running seed {seed}...")
        runs.append(run_ablation(base, seed, args.scenario))

    print("\n" + "=" * 80)
    print(f"Mask ablation: {args.scenario}, median over {len(runs)} seeds")
    print("=" * 80)
    for name in ("macro", miss):
        with_mask = statistics.median(r[True][name] for r in runs)
        without = statistics.median(r[False][name] for r in runs)
        print(f"{name:<10} with mask: {with_mask:.4f}  without: {without:.4f}  difference: {with_mask - without:+.4f}")
    print("=" * 80)


if __name__ == "__main__":
    main()
