"""One-bit blind null-space learning: learners, exact reference, bounds and link simulator."""

from .cjt import cjt_diagonalize, exact_rotation_angles
from .feedback import (
    ContinuousPowerControl,
    FeedbackOracle,
    Ideal,
    IncrementalPowerControl,
    NoisyPower,
    QuantizedSinr,
)
from .obnsla import (
    Observer,
    extract_precoder,
    run_bnsla_surrogate,
    run_modified_obnsla,
    run_obnsla,
)

__all__ = [
    "ContinuousPowerControl",
    "FeedbackOracle",
    "Ideal",
    "IncrementalPowerControl",
    "NoisyPower",
    "Observer",
    "QuantizedSinr",
    "cjt_diagonalize",
    "exact_rotation_angles",
    "extract_precoder",
    "run_bnsla_surrogate",
    "run_modified_obnsla",
    "run_obnsla",
]
