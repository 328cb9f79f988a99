"""Minimax solvers: signed mountain pass, simplex nodal search, multi-start."""

from .endpoints import (Endpoints, RChoice, SimplexMap, build_endpoints, choose_R,
                        constant_map, intersection_check, linear_map, simplex_lattice)
from .flow import FlowConfig, FlowResult, descent_flow
from .fountain import (FountainRow, MultiStartResult, fountain_estimates, fountain_trends,
                       multi_start_sign_changing)
from .nodal import find_sign_changing, part_norm_floor
from .peaks import NodalPeak, PeakFailure, RayPeak, SubspacePeak
from .report import SolveReport, classify
from .signed import find_signed_solution, mirror_residual

__all__ = [
    "Endpoints", "FlowConfig", "FlowResult", "FountainRow", "MultiStartResult",
    "NodalPeak", "PeakFailure", "RChoice", "RayPeak", "SimplexMap", "SolveReport",
    "SubspacePeak", "build_endpoints", "choose_R", "classify", "constant_map",
    "descent_flow", "find_sign_changing", "find_signed_solution", "fountain_estimates",
    "fountain_trends", "intersection_check", "linear_map", "mirror_residual",
    "multi_start_sign_changing", "part_norm_floor", "simplex_lattice",
]
