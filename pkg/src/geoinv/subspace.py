"""SVD-based linear algebra on coefficient spaces ``J^d``.

Kernels are carried as :class:`Subspace` objects holding an orthonormal row
basis.  Prolongation of a kernel is the kernel of the prolonged system;
projection drops the coordinates of the highest degrees and re-orthonormalizes
what is left.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .polycore import PolySystem, monomial_basis, prolongation_matrix

log = logging.getLogger(__name__)

DEFAULT_EPS = 1e-8
INCLUSION_TOL = 1e-6
GAP_WARN = 10.0


@dataclass(frozen=True)
class Subspace:
    """Span of the rows of ``basis`` (orthonormal) inside ``R^ambient``.

    ``nvars``/``degree`` are set when the ambient space is ``J^degree``.
    ``gap`` is the singular-value ratio at the rank cut that produced the
    subspace (``inf`` when the cut was unambiguous by construction).
    """

    ambient: int
    basis: np.ndarray
    eps: float = DEFAULT_EPS
    gap: float = float("inf")
    nvars: int | None = None
    degree: int | None = None

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float).reshape(-1, self.ambient)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def ambiguous(self) -> bool:
        return self.gap < GAP_WARN

    def projector(self) -> np.ndarray:
        return self.basis.T @ self.basis

    def complement(self) -> Subspace:
        """Orthogonal complement in the same ambient space."""
        if self.dim == 0:
            comp = np.eye(self.ambient)
        elif self.dim == self.ambient:
            comp = np.zeros((0, self.ambient))
        else:
            _, _, vt = np.linalg.svd(self.basis, full_matrices=True)
            comp = vt[self.dim:]
        return Subspace(self.ambient, comp, self.eps, self.gap, self.nvars, self.degree)

    def residuals(self, vectors) -> np.ndarray:
        """Norm of each row of ``vectors`` after removing its component in this span."""
        v = np.atleast_2d(np.asarray(vectors, dtype=float))
        if v.size == 0:
            return np.zeros(0)
        r = v - (v @ self.basis.T) @ self.basis
        return np.linalg.norm(r, axis=1)


def _rank_cut(s: np.ndarray, eps: float, scale: float | None = None) -> tuple[int, float]:
    """Number of singular values above ``eps * scale`` and the gap at that cut."""
    if s.size == 0:
        return 0, float("inf")
    ref = s[0] if scale is None else scale
    if ref <= 0.0:
        return 0, float("inf")
    r = int(np.sum(s > eps * ref))
    if r == 0:
        gap = ref / s[0] if s[0] > 0 else float("inf")
    elif r == s.size:
        gap = float("inf")
    else:
        gap = s[r - 1] / s[r] if s[r] > 0 else float("inf")
    return r, gap


def numeric_rank(A, eps: float = DEFAULT_EPS, scale: float | None = None) -> int:
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return 0
    return _rank_cut(np.linalg.svd(A, compute_uv=False), eps, scale)[0]


def numeric_kernel(A, eps: float = DEFAULT_EPS, *, nvars=None, degree=None) -> Subspace:
    """Kernel of ``A`` with the rank cut at ``sigma_i > eps * sigma_1``."""
    A = np.asarray(A, dtype=float)
    ncols = A.shape[1]
    if A.shape[0] == 0 or not np.any(A):
        return Subspace(ncols, np.eye(ncols), eps, float("inf"), nvars, degree)
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    r, gap = _rank_cut(s, eps)
    if gap < GAP_WARN:
        log.warning("ambiguous rank cut: gap %.3g at rank %d (eps=%g)", gap, r, eps)
    return Subspace(ncols, vt[r:], eps, gap, nvars, degree)


def numeric_rowspace(A, eps: float = DEFAULT_EPS, *, nvars=None, degree=None) -> Subspace:
    A = np.asarray(A, dtype=float)
    ncols = A.shape[1]
    if A.shape[0] == 0 or not np.any(A):
        return Subspace(ncols, np.zeros((0, ncols)), eps, float("inf"), nvars, degree)
    _, s, vt = np.linalg.svd(A, full_matrices=False)
    r, gap = _rank_cut(s, eps)
    return Subspace(ncols, vt[:r], eps, gap, nvars, degree)


def span(vectors, eps: float = DEFAULT_EPS, *, nvars=None, degree=None, scale: float | None = None) -> Subspace:
    """Orthonormal basis for the span of the rows of ``vectors``."""
    v = np.atleast_2d(np.asarray(vectors, dtype=float))
    ncols = v.shape[1]
    if v.shape[0] == 0:
        return Subspace(ncols, np.zeros((0, ncols)), eps, float("inf"), nvars, degree)
    _, s, vt = np.linalg.svd(v, full_matrices=False)
    r, gap = _rank_cut(s, eps, scale)
    return Subspace(ncols, vt[:r], eps, gap, nvars, degree)


def system_kernel(P: PolySystem, degree: int | None = None, eps: float = DEFAULT_EPS) -> Subspace:
    """``ker C(Pro^0 P)`` inside ``J^degree`` (``degree`` defaults to ``deg P``)."""
    d = max(P.degree, 0) if degree is None else degree
    C = prolongation_matrix(P, d)
    return numeric_kernel(C.matrix, eps, nvars=P.nvars, degree=d)


def prolong_kernel(P: PolySystem, k: int, eps: float = DEFAULT_EPS, degree: int | None = None) -> Subspace:
    """``D^k P = ker C(Pro^k P)`` in ``J^(d+k)``."""
    if k < 0:
        raise ValueError(f"prolongation order must be >= 0, got {k}")
    d = max(P.degree, 0) if degree is None else degree
    C = prolongation_matrix(P, d + k)
    return numeric_kernel(C.matrix, eps, nvars=P.nvars, degree=d + k)


def project_kernel(S: Subspace, ell: int, eps: float | None = None) -> Subspace:
    """Drop the coordinates of degree ``> d - ell`` and re-orthonormalize."""
    if S.nvars is None or S.degree is None:
        raise ValueError("projection needs a subspace of some J^d (nvars and degree unset)")
    if not 0 <= ell <= S.degree:
        raise ValueError(f"projection order {ell} outside 0..{S.degree}")
    eps = S.eps if eps is None else eps
    if ell == 0:
        return S
    e = S.degree - ell
    cols = monomial_basis(S.nvars, S.degree).low_slice(e)
    # rows of S.basis are orthonormal, so singular values are measured against 1
    return span(S.basis[:, cols], eps, nvars=S.nvars, degree=e, scale=1.0)


def projected_dim(S: Subspace, ell: int, eps: float | None = None) -> int:
    """``dim pi^ell S``; zero once the target degree drops below zero."""
    if S.degree is not None and ell > S.degree:
        return 0
    return project_kernel(S, ell, eps).dim


def subspace_included(S1: Subspace, S2: Subspace, tol: float = INCLUSION_TOL) -> bool:
    return inclusion_residual(S1, S2) <= tol


def inclusion_residual(S1: Subspace, S2: Subspace) -> float:
    """Largest distance from a basis vector of ``S1`` to ``span(S2)``."""
    if S1.ambient != S2.ambient:
        raise ValueError(f"ambient dimensions differ: {S1.ambient} vs {S2.ambient}")
    if S1.dim == 0:
        return 0.0
    return float(np.max(S2.residuals(S1.basis)))


def principal_angle_gap(S1: Subspace, S2: Subspace) -> float:
    """Largest sine of the principal angles; ``inf`` if dimensions differ."""
    if S1.ambient != S2.ambient:
        raise ValueError(f"ambient dimensions differ: {S1.ambient} vs {S2.ambient}")
    if S1.dim != S2.dim:
        return float("inf")
    if S1.dim == 0:
        return 0.0
    return float(max(inclusion_residual(S1, S2), inclusion_residual(S2, S1)))


def same_subspace(S1: Subspace, S2: Subspace, tol: float = INCLUSION_TOL) -> bool:
    return principal_angle_gap(S1, S2) <= tol


@dataclass
class Cell:
    """One ``(k, ell)`` entry of a dimension table with its involutivity flags."""

    dim: int
    elimination: bool | None = None
    symbol_involutive: bool | None = None
    inclusion: bool | None = None

    @property
    def involutive(self) -> bool | None:
        if self.elimination is None or self.symbol_involutive is None:
            return None
        return self.elimination and self.symbol_involutive


@dataclass
class DimensionTable:
    """``dim pi^ell D^k P`` for ``0 <= k <= kmax`` and ``0 <= ell <= d + k``."""

    nvars: int
    degree: int
    eps: float
    kernels: dict[int, Subspace] = field(default_factory=dict, repr=False)
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)

    @property
    def kmax(self) -> int:
        return max(self.kernels, default=-1)

    def dim(self, k: int, ell: int) -> int:
        if ell > self.degree + k:
            return 0
        return self.cells[(k, ell)].dim

    def column(self, k: int) -> list[int]:
        return [self.cells[(k, ell)].dim for ell in range(self.degree + k + 1)]

    def __iter__(self) -> Iterator[tuple[tuple[int, int], Cell]]:
        return iter(sorted(self.cells.items()))

    def add_column(self, P: PolySystem, k: int) -> None:
        D = prolong_kernel(P, k, self.eps, degree=self.degree)
        self.kernels[k] = D
        for ell in range(self.degree + k + 1):
            self.cells[(k, ell)] = Cell(project_kernel(D, ell).dim)

    def truncated(self, kmax: int) -> DimensionTable:
        return DimensionTable(
            self.nvars, self.degree, self.eps,
            {k: v for k, v in self.kernels.items() if k <= kmax},
            {key: c for key, c in self.cells.items() if key[0] <= kmax},
        )

    def to_dict(self) -> dict:
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "eps": self.eps,
            "kmax": self.kmax,
            "entries": [
                {"k": k, "l": ell, "dim": c.dim, "elimination": c.elimination,
                 "symbol_involutive": c.symbol_involutive, "involutive": c.involutive,
                 "inclusion": c.inclusion}
                for (k, ell), c in self
            ],
        }

    def render(self, max_ell: int | None = None, flags: bool = True) -> str:
        """Aligned text table: one row per ``ell``, one column per ``k``.

        Marks: ``*`` involutive, ``+`` involutive and inclusion-certified.
        """
        kmax = self.kmax
        last = self.degree + kmax if max_ell is None else max_ell
        header = ["", *[f"k={k}" for k in range(kmax + 1)]]
        rows = [header]
        for ell in range(last + 1):
            row = [f"l={ell}"]
            for k in range(kmax + 1):
                c = self.cells.get((k, ell))
                if c is None:
                    row.append("")
                    continue
                mark = ""
                if flags and c.involutive:
                    mark = "+" if c.inclusion else "*"
                row.append(f"{c.dim}{mark}")
            rows.append(row)
        widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
        return "\n".join("  ".join(cell.rjust(w) for cell, w in zip(r, widths)).rstrip() for r in rows)


def dimension_table(P: PolySystem, kmax: int, eps: float = DEFAULT_EPS, degree: int | None = None) -> DimensionTable:
    """Fill every defined entry ``dim pi^ell D^k P`` up to ``kmax``."""
    if kmax < 0:
        raise ValueError(f"kmax must be >= 0, got {kmax}")
    d = max(P.degree, 0) if degree is None else degree
    table = DimensionTable(P.nvars, d, eps)
    for k in range(kmax + 1):
        table.add_column(P, k)
    return table


