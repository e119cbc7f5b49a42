from typing import Dict, Mapping, Optional

from ..ingest.records import MACHINE_FEATURES


def extract_ecg_features(meta: Mapping) -> Dict[str, Optional[float]]:
    """
    Machine measurements of one ECG, copied through; absent keys are missing.

    Args:
        meta (Mapping): A sidecar dict (with a ``machine_features`` entry) or the measurements themselves

    Returns:
        Dict[str, Optional[float]]: One entry per machine feature name
    """
    measurements = meta.get("machine_features", meta)
    return {name: (None if measurements.get(name) is None else float(measurements[name])) for name in MACHINE_FEATURES}
