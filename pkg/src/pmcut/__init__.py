"""Connected, compact superpixels on noisy gray-scale images.

Each rectangular patch of the image is segmented and denoised at once by an
L1 Potts model written as a MILP with multicut cycle inequalities, solved by
a small branch-and-cut on top of HiGHS LP relaxations.
"""
from .errors import FormatError, InvalidArgumentError, TooLargeError
from .grid import build_grid, components_of_dormant, enumerate_unit_cycles, induced_multicut
from .model import build_multicut_ilp, build_potts_milp, contrast_estimate, lambda_from_sigma
from .solver import MilpSolution, SolveLimits, branch_and_cut, brute_force_oracle, refit_segments
from .pipeline import SuperpixelResult, make_patches, merge_small_segments, segment_image
from .estimator import PottsSuperpixels

__version__ = "0.1.0"

__all__ = [
    "FormatError",
    "InvalidArgumentError",
    "TooLargeError",
    "build_grid",
    "components_of_dormant",
    "enumerate_unit_cycles",
    "induced_multicut",
    "build_multicut_ilp",
    "build_potts_milp",
    "contrast_estimate",
    "lambda_from_sigma",
    "MilpSolution",
    "SolveLimits",
    "branch_and_cut",
    "brute_force_oracle",
    "refit_segments",
    "SuperpixelResult",
    "make_patches",
    "merge_small_segments",
    "segment_image",
    "PottsSuperpixels",
]
