#!/usr/bin/env python3
"""
Desk-scale pipeline run

Runs synth, build, train, eval and report for every scenario, twice, and checks
that both passes produce the same build manifest and the same report numbers.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import List

sys.path.append(str(Path(__file__).resolve().parents[1]))

from edbench.cli.pipeline import (
    MANIFEST_FILE,
    compare_reports,
    evaluate_checkpoint,
    run_build,
    run_dir,
    run_synth,
    train_scenario,
)
from edbench.config import SCENARIO_NAMES, ExperimentConfig
from edbench.logging_utils import configure_logging

DEFAULT_CONFIG = Path(__file__).parent / "configs" / "desk.json"


def run_once(config: ExperimentConfig, scenarios: List[str], label: str):
    """
    One full pipeline pass.

    Returns:
        The build manifest and scenario -> report dictionary
    """
    print(f"\n[{label}] synth -> {config.data_root}")
    run_synth(config)
    print(f"[{label}] build -> {config.build_dir}")
    manifest = json.loads(run_build(config).read_text(encoding="utf-8"))

    reports = {}
    for scenario in scenarios:
        print(f"[{label}] train {scenario} ({config.task})")
        reports[scenario] = evaluate_checkpoint(config, train_scenario(config, scenario)).to_dict()
    print(compare_reports([run_dir(config, s) / "eval_report.json" for s in scenarios]))
    return manifest, reports


def main():
    parser = argparse.ArgumentParser(description="Run the desk-scale pipeline twice and compare")
    parser.add_argument("--config", default=str(DEFAULT_CONFIG))
    parser.add_argument("--scenarios", nargs="+", default=list(SCENARIO_NAMES), choices=list(SCENARIO_NAMES))
    parser.add_argument("--task", default=None, choices=["diagnoses", "deterioration"])
    args = parser.parse_args()

    configure_logging(level="INFO")
    base = ExperimentConfig.from_json(args.config, **({"task": args.task} if args.task else {}))

    runs = []
    for label in ("first", "second"):
        config = base.model_copy(
            update={"data_root": Path(base.data_root) / label, "output_dir": Path(base.output_dir) / label}
        )
        runs.append(run_once(config, args.scenarios, label))

    (first_manifest, first_reports), (second_manifest, second_reports) = runs
    same_manifest = first_manifest == second_manifest

    print("\n" + "=" * 80)
    print("Determinism check")
    print("=" * 80)
    print(f"{MANIFEST_FILE:<24} {'identical' if same_manifest else 'DIFFERENT'}")
    same_reports = True
    for scenario in args.scenarios:
        same = first_reports[scenario] == second_reports[scenario]
        same_reports &= same
        print(f"{scenario:<24} {'identical' if same else 'DIFFERENT'}")
    print("=" * 80)
    sys.exit(0 if same_manifest and same_reports else 1)


if __name__ == "__main__":
    main()
