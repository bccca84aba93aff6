"""Coded distributed linear inference at the network edge: latency simulation,
lower bounds and design search for Rateless-IR, MDS-IR and MDS-R."""

from .kernels import BACKEND
from .model import (Decoder, DesignError, LatencyBreakdown, Scheme, SchemeDesign, SystemParams, delta,
                    psi)
from .fountain import (DegreeDistribution, EncodingRow, failure_bound, inactivation_decode, krawtchouk,
                       robust_soliton, sample_row)
from .placement import AssignmentMatrix, batch_assignment, cyclic_assignment, feasible_designs
from .runtime import StoppingSetUnreachable, StragglerDraw, draw_stragglers, run_computation
from .bounds import f_bound, lc_lower, lde_lower, ldu_lower, tau_e_lower, tau_u_lower
from .search import NoFeasibleDesign, optimize_design, optimize_soliton

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Decoder", "DesignError", "LatencyBreakdown", "Scheme", "SchemeDesign", "SystemParams",
    "delta", "psi", "DegreeDistribution", "EncodingRow", "failure_bound", "inactivation_decode",
    "krawtchouk", "robust_soliton", "sample_row", "AssignmentMatrix", "batch_assignment",
    "cyclic_assignment", "feasible_designs", "StoppingSetUnreachable", "StragglerDraw", "draw_stragglers",
    "run_computation", "f_bound", "lc_lower", "lde_lower", "ldu_lower", "tau_e_lower", "tau_u_lower",
    "NoFeasibleDesign", "optimize_design", "optimize_soliton",
]
