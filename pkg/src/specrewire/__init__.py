"""Spectral-gap graph rewiring with perturbation proxies and Eldan's criterion."""

__version__ = "0.1.0"

from .analytic import (
    RingEigenbasis,
    cheeger_constant,
    eldan_criterion,
    EldanInputs,
    figure1_fixtures,
    ring_gap,
    verify_table_a1,
)
from .graph import (
    Direction,
    EdgeDelta,
    GeneratorSpec,
    Graph,
    apply_delta,
    erdos_renyi_nm,
    generate,
    is_connected,
    read_edge_list,
    ring,
    write_edge_list,
)
from .rewiring import RewirePlan, RewireTrace, Strategy, TerminalReason, prune_to_sparsity, rewire
from .smoothing import LabelConfig, SmoothingReport, class_mean_informativeness, smoothing_mse_curve
from .spectral import SolverConfig, SpectrumEstimate, exact_gap, exact_spectrum, iterative_spectrum

__all__ = [
    "Direction",
    "EdgeDelta",
    "EldanInputs",
    "GeneratorSpec",
    "Graph",
    "LabelConfig",
    "RewirePlan",
    "RewireTrace",
    "RingEigenbasis",
    "SmoothingReport",
    "SolverConfig",
    "SpectrumEstimate",
    "Strategy",
    "TerminalReason",
    "apply_delta",
    "cheeger_constant",
    "class_mean_informativeness",
    "eldan_criterion",
    "erdos_renyi_nm",
    "exact_gap",
    "exact_spectrum",
    "figure1_fixtures",
    "generate",
    "is_connected",
    "iterative_spectrum",
    "prune_to_sparsity",
    "read_edge_list",
    "rewire",
    "ring",
    "ring_gap",
    "smoothing_mse_curve",
    "verify_table_a1",
    "write_edge_list",
]
