"""
Binary waveform store: one little-endian int16 file per record (lead-major) plus a JSON sidecar.
"""

import json
import logging
from math import gcd
from pathlib import Path
from typing import Dict, Iterable, Optional

import numpy as np
from scipy.signal import resample_poly

from ..errors import DataError, WaveformFormatError
from .records import N_LEADS, EcgManifestRecord, WaveformRecord, format_timestamp, parse_timestamp

logger = logging.getLogger(__name__)

SAMPLE_DTYPE = np.dtype("<i2")
DEFAULT_GAIN = 1000.0
DEFAULT_BASELINE = 0


class WaveformStore:
    """
    Resolves record ids to signal/sidecar files through the ECG manifest.

    Paths in the manifest are relative to ``root``.
    """

    def __init__(self, root: Path, manifest: Iterable[EcgManifestRecord]):
        self.root = Path(root)
        self.manifest: Dict[str, EcgManifestRecord] = {m.record_id: m for m in manifest}

    def __contains__(self, record_id: str) -> bool:
        return record_id in self.manifest

    def __len__(self) -> int:
        return len(self.manifest)

    def entry(self, record_id: str) -> EcgManifestRecord:
        if record_id not in self.manifest:
            raise DataError(f"record {record_id} not in waveform manifest")
        return self.manifest[record_id]

    def read_sidecar(self, record_id: str) -> dict:
        with open(self.root / self.entry(record_id).sidecar_path, "r", encoding="utf-8") as handle:
            return json.load(handle)

    def load(self, record_id: str) -> WaveformRecord:
        return load_waveform(record_id, self)


def load_waveform(record_id: str, store: WaveformStore) -> WaveformRecord:
    """
    Read one record in physical units: ``(raw - baseline) / gain``.

    Args:
        record_id (str): Manifest key
        store (WaveformStore): The waveform store

    Returns:
        WaveformRecord: 12 x L samples with machine features from the sidecar
    """
    entry = store.entry(record_id)
    sidecar = store.read_sidecar(record_id)
    n_leads = int(sidecar["n_leads"])
    n_samples = int(sidecar["n_samples"])
    if n_leads != N_LEADS:
        raise WaveformFormatError(f"record {record_id}: expected {N_LEADS} leads, sidecar declares {n_leads}")

    raw = np.fromfile(store.root / entry.signal_path, dtype=SAMPLE_DTYPE)
    if raw.size != n_leads * n_samples:
        raise WaveformFormatError(
            f"record {record_id}: {raw.size} stored samples, sidecar declares {n_leads} x {n_samples}"
        )
    gain = float(sidecar.get("gain", DEFAULT_GAIN))
    baseline = float(sidecar.get("baseline", DEFAULT_BASELINE))
    samples = (raw.reshape(n_leads, n_samples).astype(np.float64) - baseline) / gain
    return WaveformRecord(
        record_id=record_id,
        subject_id=entry.subject_id,
        ecg_time=parse_timestamp(sidecar.get("ecg_time", entry.ecg_time)),
        sampling_rate=int(sidecar["sampling_rate"]),
        samples=samples,
        machine_features={k: float(v) for k, v in sidecar.get("machine_features", {}).items() if v is not None},
    )


def quantize(samples: np.ndarray, gain: float = DEFAULT_GAIN, baseline: int = DEFAULT_BASELINE) -> np.ndarray:
    """Snap physical samples to the values the store can represent exactly."""
    raw = np.rint(np.asarray(samples, dtype=np.float64) * gain + baseline)
    info = np.iinfo(SAMPLE_DTYPE)
    if raw.min(initial=0) < info.min or raw.max(initial=0) > info.max:
        raise WaveformFormatError("samples exceed the 16-bit range at this gain")
    return (raw - baseline) / gain


def write_waveform(
    record: WaveformRecord,
    store_dir: Path,
    gain: float = DEFAULT_GAIN,
    baseline: int = DEFAULT_BASELINE,
    relative_to: Optional[Path] = None,
) -> EcgManifestRecord:
    """
    Write a record as ``<record_id>.dat`` + ``<record_id>.json``.

    Args:
        record (WaveformRecord): Record to store
        store_dir (Path): Directory receiving the two files
        gain (float): Integer units per physical unit
        baseline (int): Integer value of physical zero
        relative_to (Path, optional): Root the manifest paths are relative to; ``store_dir``'s parent by default

    Returns:
        EcgManifestRecord: Manifest entry of the written record
    """
    store_dir = Path(store_dir)
    store_dir.mkdir(parents=True, exist_ok=True)
    root = Path(relative_to) if relative_to is not None else store_dir.parent

    raw = np.rint(record.samples * gain + baseline)
    info = np.iinfo(SAMPLE_DTYPE)
    if raw.min() < info.min or raw.max() > info.max:
        raise WaveformFormatError(f"record {record.record_id}: samples exceed the 16-bit range at gain {gain}")
    signal_path = store_dir / f"{record.record_id}.dat"
    sidecar_path = store_dir / f"{record.record_id}.json"
    raw.astype(SAMPLE_DTYPE).tofile(signal_path)

    sidecar = {
        "record_id": record.record_id,
        "subject_id": record.subject_id,
        "ecg_time": format_timestamp(record.ecg_time),
        "sampling_rate": record.sampling_rate,
        "gain": gain,
        "baseline": baseline,
        "n_leads": record.samples.shape[0],
        "n_samples": record.samples.shape[1],
        "machine_features": record.machine_features,
    }
    with open(sidecar_path, "w", encoding="utf-8") as handle:
        json.dump(sidecar, handle, indent=2, sort_keys=True)

    return EcgManifestRecord(
        record_id=record.record_id,
        subject_id=record.subject_id,
        ecg_time=record.ecg_time,
        signal_path=signal_path.relative_to(root).as_posix(),
        sidecar_path=sidecar_path.relative_to(root).as_posix(),
    )


def resample_waveform(samples: np.ndarray, rate: int, target_rate: int) -> np.ndarray:
    """
    Anti-aliased polyphase resampling along the time axis.

    Args:
        samples (np.ndarray): leads x L matrix
        rate (int): Source sampling rate in Hz
        target_rate (int): Target sampling rate in Hz

    Returns:
        np.ndarray: leads x (L * target_rate / rate) matrix
    """
    samples = np.asarray(samples, dtype=np.float64)
    if rate == target_rate:
        return samples.copy()
    divisor = gcd(int(rate), int(target_rate))
    return resample_poly(samples, target_rate // divisor, rate // divisor, axis=-1)
