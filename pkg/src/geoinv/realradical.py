"""Alternating involutive completion and moment-matrix kernels.

Each round computes a projected involutive basis of the current system
(kernel dimension ``d``), a generic point of its moment family (rank ``r``)
and the kernel generators of that moment matrix.  The loop stops once
``r == d``; the output generates an ideal between the input ideal and the
real radical.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .involutive import DEFAULT_KMAX, GifResult, gif
from .moment import build_moment_problem
from .polycore import PolySystem, extract_generators, format_polynomial, monomial_basis
from .sdp import SdpOptions, generic_point
from .subspace import DEFAULT_EPS, numeric_rowspace, project_kernel, system_kernel

log = logging.getLogger(__name__)

DEFAULT_MAX_ITER = 10
_DIGITS = 10       # stored floats
DISPLAY_DIGITS = 7
DISPLAY_RTOL = 1e-8  # SDP-derived kernels carry ~1e-10 noise
# prolonging an SDP-derived kernel amplifies its noise (clustered roots reach ~1e-8)
SDP_KERNEL_EPS = 1e-6


def _round(x):
    return float(f"{x:.{_DIGITS}g}")


def _poly_strings(P: PolySystem, varnames=None) -> list[str]:
    return [format_polynomial(p, varnames, digits=DISPLAY_DIGITS) for p in P]


def display_generators(R) -> PolySystem:
    """Echelonized, normalized generators of the complement of a kernel ``R``."""
    return extract_generators(R.complement(), monomial_basis(R.nvars, R.degree), rtol=DISPLAY_RTOL)


@dataclass
class Round:
    """One GIF + moment round."""

    index: int
    input_size: int
    input_degree: int
    gif_k: int
    gif_ell: int
    gif_degree: int
    d: int
    table: dict
    generators: list[str]
    r: int | None = None
    moment_size: int | None = None
    y: list[float] = field(default_factory=list)
    lambda_min: float | None = None
    faces: int | None = None
    restart_ranks: list[int] = field(default_factory=list)
    kernel_generators: list[str] = field(default_factory=list)
    containment_residual: float | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class IterationTrace:
    eps: float
    seed: int
    max_iter: int
    rounds: list[Round] = field(default_factory=list)
    status: str = "running"
    output: list[str] = field(default_factory=list)
    confirm: dict = field(default_factory=dict)

    @property
    def d_sequence(self) -> list[int]:
        return [rd.d for rd in self.rounds]

    @property
    def r_sequence(self) -> list[int | None]:
        return [rd.r for rd in self.rounds]

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "seed": self.seed, "max_iter": self.max_iter,
            "status": self.status,
            "rounds": [rd.to_dict() for rd in self.rounds],
            "output": self.output,
            "confirm": self.confirm,
        }


class RealRadicalLimitError(RuntimeError):
    def __init__(self, message: str, trace: IterationTrace, last: PolySystem):
        super().__init__(message)
        self.trace = trace
        self.last = last


@dataclass(frozen=True)
class RealRadicalResult:
    generators: PolySystem       # display form (echelonized, normalized)
    kernel: object               # kernel Subspace of the output in J^degree
    degree: int
    trace: IterationTrace
    final_gif: GifResult


def _containment(gens: PolySystem, kernel) -> float:
    """How far the rows of ``gens`` (at the kernel's degree) are from ``ker M``."""
    basis = monomial_basis(kernel.nvars, kernel.degree)
    if len(gens) == 0 or kernel.dim == 0:
        return 0.0 if len(gens) == 0 else float("inf")
    rows = numeric_rowspace(np.array([p.to_vector(basis) for p in gens]))
    return float(np.max(kernel.residuals(rows.basis)))


def gif_mmtx(P: PolySystem, eps: float = DEFAULT_EPS, seed: int = 0, max_iter: int = DEFAULT_MAX_ITER,
             kmax: int = DEFAULT_KMAX, sdp_options: SdpOptions | None = None,
             varnames=None) -> RealRadicalResult:
    """Real-radical candidate of ``P`` by alternating GIF and moment-matrix kernels.

    ``varnames`` only affects the polynomial strings stored in the trace.
    """
    P = P.nonzero()
    if len(P) == 0:
        raise ValueError("gif_mmtx needs a nonempty system")
    trace = IterationTrace(eps, seed, max_iter)
    Q, qdeg = P, None
    for j in range(max_iter):
        G = gif(Q, eps if j == 0 else max(eps, SDP_KERNEL_EPS), kmax, seed, degree=qdeg)
        d = G.kernel.dim
        gens = G.generators
        rd = Round(j, len(Q), Q.degree if qdeg is None else qdeg, G.candidate.k, G.candidate.ell,
                   G.degree, d, G.table.to_dict(), _poly_strings(display_generators(G.kernel), varnames))
        trace.rounds.append(rd)
        Mp = build_moment_problem(gens, degree=G.degree, eps=eps)
        sol = generic_point(Mp, seed, sdp_options)
        rd.r, rd.moment_size = sol.rank, sol.size
        rd.y = [_round(v) for v in sol.y]
        rd.lambda_min = _round(sol.lambda_min)
        rd.faces = sol.faces
        rd.restart_ranks = list(sol.restart_ranks)
        rd.containment_residual = _round(_containment(gens, sol.kernel))
        kgens = extract_generators(sol.kernel, monomial_basis(P.nvars, G.degree), normalize=False, reduced=False)
        rd.kernel_generators = _poly_strings(extract_generators(sol.kernel, monomial_basis(P.nvars, G.degree)), varnames)
        log.info("round %d: gif (k=%d, l=%d) degree %d, d=%d, r=%d", j, rd.gif_k, rd.gif_ell, G.degree, d, sol.rank)
        if sol.rank == d:
            # criterion is a conjunction: the moment kernel must also be involutive with the same kernel
            C = gif(kgens, max(eps, SDP_KERNEL_EPS), kmax, seed, degree=G.degree)
            trace.confirm = {
                "k": C.candidate.k, "ell": C.candidate.ell, "degree": C.degree, "dim": C.kernel.dim,
                "same_degree": C.degree == G.degree,
                "same_kernel": C.degree == G.degree and C.kernel.dim == d,
            }
            trace.status = "converged"
            out = display_generators(G.kernel)
            trace.output = _poly_strings(out, varnames)
            return RealRadicalResult(out, G.kernel, G.degree, trace, G)
        Q, qdeg = kgens, G.degree
    trace.status = "max_iter"
    raise RealRadicalLimitError(f"no convergence within {max_iter} rounds", trace, Q)


# -- presentation ------------------------------------------------------------

@dataclass(frozen=True)
class ReportLevel:
    ell: int
    degree: int
    dim: int
    raw: tuple[str, ...]
    normalized: tuple[str, ...]


@dataclass(frozen=True)
class SimplifyReport:
    levels: tuple[ReportLevel, ...]

    def lowest(self) -> ReportLevel | None:
        """Deepest projection that still carries generators."""
        withgens = [lv for lv in self.levels if lv.normalized]
        return withgens[-1] if withgens else None

    def render(self) -> str:
        lines = []
        for lv in self.levels:
            if not lv.normalized:
                continue
            lines.append(f"degree {lv.degree} (l={lv.ell}, dim {lv.dim}): {len(lv.normalized)} generator(s)")
            for raw, nrm in zip(lv.raw, lv.normalized):
                lines.append(f"  {nrm}    [orthonormal: {raw}]" if raw != nrm else f"  {nrm}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {"levels": [lv.__dict__ | {"raw": list(lv.raw), "normalized": list(lv.normalized)} for lv in self.levels]}


def _canonical_sign(P: PolySystem) -> PolySystem:
    out = []
    for p in P:
        lt = p.leading_term()
        out.append(p.scale(-1.0) if lt is not None and lt[1] < 0 else p)
    return PolySystem(P.nvars, out)


def simplify_report(Q: PolySystem, eps: float = DEFAULT_EPS, degree: int | None = None,
                    varnames=None) -> SimplifyReport:
    """Generators of every projection of ``D^0 Q``, lowest degrees last.

    Purely presentational: for an involutive ``Q`` each projection is the
    part of the ideal of that degree, so low-degree members such as linear
    relations show up explicitly.
    """
    Q = Q.nonzero()
    d = Q.degree if degree is None else degree
    D = system_kernel(Q, d, eps)
    levels = []
    for ell in range(d + 1):
        R = project_kernel(D, ell)
        comp = R.complement()
        basis = monomial_basis(Q.nvars, R.degree)
        raw = _canonical_sign(extract_generators(comp, basis, normalize=False, reduced=False))
        nrm = extract_generators(comp, basis)
        # orthonormal vectors only make sense one at a time
        raw_s = tuple(_poly_strings(raw, varnames)) if len(raw) == 1 else tuple(_poly_strings(nrm, varnames))
        levels.append(ReportLevel(ell, R.degree, R.dim, raw_s, tuple(_poly_strings(nrm, varnames))))
    return SimplifyReport(tuple(levels))
