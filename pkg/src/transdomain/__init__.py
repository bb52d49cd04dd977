"""Transform-domain sampling for analysis-sparse signals.

Measure with ``M = A Omega`` (optionally stacked with direct rows ``B``),
recover ``Omega x`` with any synthesis solver, then map back to ``x``.
"""

from .operators import (AnalysisOperator, bivariate_haar, dif_2d, dif_Ld, frame_bounds, partial_frame_check,
                        random_tight_frame, split_frame)
from .schemes import (AnalysisL1Recovery, FrameSchemeRecovery, SchemeResult, TwoStageRecovery,
                      recover_analysis_baseline, recover_dif_scheme, recover_frame_scheme, recover_general_scheme)
from .sensing import compose_frame_ensemble, compose_stacked_ensemble, gaussian_matrix, measure, plain_ensemble
from .signals import NoiseModel, SignalInstance, gen_cosparse, gen_piecewise_image
from .solvers import SynthesisProgramSpec, run_program

__version__ = "0.1.0"

__all__ = [
    "AnalysisL1Recovery", "AnalysisOperator", "FrameSchemeRecovery", "NoiseModel", "SchemeResult",
    "SignalInstance", "SynthesisProgramSpec", "TwoStageRecovery", "bivariate_haar", "compose_frame_ensemble",
    "compose_stacked_ensemble", "dif_2d", "dif_Ld", "frame_bounds", "gaussian_matrix", "gen_cosparse",
    "gen_piecewise_image", "measure", "partial_frame_check", "plain_ensemble", "random_tight_frame",
    "recover_analysis_baseline", "recover_dif_scheme", "recover_frame_scheme", "recover_general_scheme",
    "run_program", "split_frame",
]
