from .main import EXIT_DATA, EXIT_DIVERGENCE, EXIT_OK, EXIT_USAGE, main, parse_arguments
from .pipeline import (
    BuildArtifacts,
    compare_reports,
    evaluate_checkpoint,
    file_sha256,
    load_build,
    prepare_splits,
    run_build,
    run_dir,
    run_synth,
    stage,
    train_scenario,
)

__all__ = [
    "EXIT_DATA",
    "EXIT_DIVERGENCE",
    "EXIT_OK",
    "EXIT_USAGE",
    "main",
    "parse_arguments",
    "BuildArtifacts",
    "compare_reports",
    "evaluate_checkpoint",
    "file_sha256",
    "load_build",
    "prepare_splits",
    "run_build",
    "run_dir",
    "run_synth",
    "stage",
    "train_scenario",
]
