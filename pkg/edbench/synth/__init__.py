from .generator import (
    BACKGROUND_CODES,
    BOTH_FREQUENCY,
    BOTH_LAB,
    MISS_LAB,
    PLANTED_CODES,
    TAB_LAB,
    WAVE_FREQUENCY,
    generate_fixture,
    generate_waveform,
)

__all__ = [
    "BACKGROUND_CODES",
    "BOTH_FREQUENCY",
    "BOTH_LAB",
    "MISS_LAB",
    "PLANTED_CODES",
    "TAB_LAB",
    "WAVE_FREQUENCY",
    "generate_fixture",
    "generate_waveform",
]
