"""Association mining of annotation tables with the maximal information coefficient."""

__version__ = "0.1.0"

from .mic import MicConfig, PairedSample, approx_mic, brute_force_mic, iamic, mic_score
from .pipeline import PipelineConfig, run_pipeline
from .similarity import MeasureKind, score

__all__ = [
    "MeasureKind", "MicConfig", "PairedSample", "PipelineConfig", "__version__",
    "approx_mic", "brute_force_mic", "iamic", "mic_score", "run_pipeline", "score",
]
