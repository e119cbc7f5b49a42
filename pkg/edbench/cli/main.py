"""
Command-line entry point: ``edbench synth|build|train|eval|report``.

Example call:

    python -m edbench synth --config experiments/configs/desk.json --seed 7
    python -m edbench build --config experiments/configs/desk.json
    python -m edbench train --config experiments/configs/desk.json --scenario wave_routine_deep
    python -m edbench eval --config experiments/configs/desk.json --scenario wave_routine_deep
    python -m edbench report outputs/runs/*/eval_report.json --pair wave_routine_deep routine_tree
"""

import argparse
import logging
import sys
from typing import Callable, Dict, List, Optional

from ..config import MODEL_PROFILES, ExperimentConfig
from ..errors import ConfigError, EdbenchError, TrainingDivergenceError
from ..logging_utils import configure_logging
from ..models.scenarios import ABLATION_SCENARIOS, SCENARIOS
from .pipeline import TASKS, compare_reports, evaluate_checkpoint, run_build, run_dir, run_synth, train_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_DIVERGENCE = 4


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """
    Parse arguments

    Args:
        argv (List[str], optional): Arguments without the program name; ``sys.argv`` by default

    Returns:
        argparse.Namespace: Parsed arguments
    """
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Experiment config (JSON). Defaults apply when omitted")
    common.add_argument("--seed", type=int, help="Seed replacing the config's")
    common.add_argument("--profile", choices=sorted(MODEL_PROFILES), help="Deep model size profile")
    common.add_argument("--log-level", type=str, default="INFO", help="Logging level")

    scenario_names = list(SCENARIOS) + list(ABLATION_SCENARIOS)
    parser = argparse.ArgumentParser(prog="edbench", description="Multimodal emergency-department benchmark")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("synth", parents=[common], help="Write the synthetic fixture to the data root")
    commands.add_parser("build", parents=[common], help="Build samples, features, labels and folds")

    train = commands.add_parser("train", parents=[common], help="Train one scenario")
    train.add_argument("--scenario", choices=scenario_names, help="Scenario replacing the config's")
    train.add_argument("--task", choices=TASKS, help="Label task replacing the config's")

    evaluate = commands.add_parser("eval", parents=[common], help="Evaluate a checkpoint on the test fold")
    evaluate.add_argument("--scenario", choices=scenario_names, help="Scenario whose run directory holds the checkpoint")
    evaluate.add_argument("--task", choices=TASKS, help="Label task replacing the config's")
    evaluate.add_argument("--checkpoint", type=str, help="Checkpoint file; the scenario's run directory by default")

    report = commands.add_parser("report", parents=[common], help="Compare evaluation reports")
    report.add_argument("reports", nargs="+", help="eval_report.json files")
    report.add_argument("--pair", nargs=2, metavar=("A", "B"), help="Scenarios of the improvement table (A vs B)")
    report.add_argument("--out", type=str, help="Text file receiving the tables")

    return parser.parse_args(argv)


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {"seed": args.seed, "profile": args.profile, "task": getattr(args, "task", None)}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        return ExperimentConfig.from_json(args.config, **overrides)
    return ExperimentConfig.build(**overrides)


def cmd_synth(args: argparse.Namespace, config: ExperimentConfig) -> int:
    path = run_synth(config)
    print(f"Synthetic fixture written to {path}")
    return EXIT_OK


def cmd_build(args: argparse.Namespace, config: ExperimentConfig) -> int:
    path = run_build(config)
    print(f"Build manifest: {path}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace, config: ExperimentConfig) -> int:
    path = train_scenario(config, args.scenario)
    print(f"Checkpoint: {path}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace, config: ExperimentConfig) -> int:
    report = evaluate_checkpoint(config, args.checkpoint, args.scenario)
    print(report.to_text())
    return EXIT_OK


def cmd_report(args: argparse.Namespace, config: ExperimentConfig) -> int:
    print(compare_reports(args.reports, tuple(args.pair) if args.pair else None, args.out))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace, ExperimentConfig], int]] = {
    "synth": cmd_synth,
    "build": cmd_build,
    "train": cmd_train,
    "eval": cmd_eval,
    "report": cmd_report,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and map failures to exit codes.

    Returns:
        int: 0 on success, 2 for usage or config errors, 3 for data errors, 4 when training diverges
    """
    args = parse_arguments(argv)
    try:
        config = load_config(args)
        log_file = None
        if args.command == "train":
            log_file = run_dir(config, args.scenario) / "train.log"
        configure_logging(log_file=log_file, level=args.log_level)
        return COMMANDS[args.command](args, config)
    except ConfigError as exc:
        print(f"edbench {args.command}: config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDivergenceError as exc:
        print(f"edbench {args.command}: {getattr(exc, 'stage', 'train')}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (EdbenchError, OSError) as exc:
        print(f"edbench {args.command}: {getattr(exc, 'stage', args.command)}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
