from .convex import ConvexSolution, admm_solve, analysis_l1, constrained_transform_fit, l1_bpdn, lp_solve
from .estimators import BPDN, IHT, OMP, CoSaMP
from .exhaustive import brute_force_l0_analysis, brute_force_l0_synthesis
from .greedy import cosamp, iht, omp
from .program import ALGORITHMS, SynthesisProgramSpec, run_program
from .report import RecoveryReport, hard_threshold, support_of

__all__ = [
    "ALGORITHMS", "BPDN", "CoSaMP", "ConvexSolution", "IHT", "OMP", "RecoveryReport",
    "SynthesisProgramSpec", "admm_solve", "analysis_l1", "brute_force_l0_analysis",
    "brute_force_l0_synthesis", "constrained_transform_fit", "cosamp", "hard_threshold", "iht",
    "l1_bpdn", "lp_solve", "omp", "run_program", "support_of",
]
