"""Geometric involutive bases and moment-matrix real-radical candidates for polynomial systems."""

from .involutive import (
    GifLimitError, GifResult, InvolutiveCandidate, SymbolInfo, annotate_table, cartan_test,
    elimination_test, gif, kernel_symbol, symbol_involutive, symbol_involutive_2var, symbol_matrix,
    zero_dim_involutive_test,
)
from .moment import InfeasibleMomentProblem, MomentProblem, assemble, build_moment_problem
from .polycore import (
    CoeffMatrix, Monomial, MonomialBasis, Polynomial, PolySystem, coefficient_matrix, count_class,
    count_degree, count_monomials, extract_generators, format_polynomial, monomial_basis, prolong_system,
    prolongation_matrix,
)
from .polyio import ParseError, format_system, parse_document, parse_system
from .realradical import IterationTrace, RealRadicalLimitError, gif_mmtx, simplify_report
from .sdp import MomentSolution, SdpInfeasibleError, SdpOptions, UnstableRankError, generic_point, psd_rank
from .subspace import (
    DimensionTable, Subspace, dimension_table, inclusion_residual, numeric_kernel, numeric_rank,
    principal_angle_gap, project_kernel, prolong_kernel, same_subspace, span, subspace_included,
)

__version__ = "0.1.0"
