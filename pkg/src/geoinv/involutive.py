"""Symbols, the Cartan involutivity test and projected involutive bases.

A candidate is the projected kernel ``pi^ell D^k Q`` inside ``J^dbar`` with
``dbar = deg Q + k - ell``.  It is projectively involutive when the
projected elimination test holds and its symbol is involutive.  :func:`gif`
searches the smallest ``k`` with such a candidate that also passes the
prolongation inclusion test, and returns the lowest-degree one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .polycore import (
    Monomial, PolySystem, coefficient_matrix, extract_generators, count_class, count_degree,
    monomial_basis, monomials_of_degree, prolongation_matrix,
)
from .subspace import (
    DEFAULT_EPS, INCLUSION_TOL, DimensionTable, Subspace, inclusion_residual,
    numeric_kernel, numeric_rank, project_kernel, span,
)

log = logging.getLogger(__name__)

DEFAULT_KMAX = 10


class GifLimitError(RuntimeError):
    """No certified involutive candidate up to ``kmax``; carries the partial table."""

    def __init__(self, message: str, table: DimensionTable):
        super().__init__(message)
        self.table = table


# -- symbols -----------------------------------------------------------------

def symbol_columns(n: int, d: int) -> list[Monomial]:
    """Degree-``d`` monomials sorted by descending class.

    Ascending tuple order puts class ``n`` first and, inside a class, follows
    a class-respecting term order, so echelon pivots are Pommaret leaders.
    """
    return sorted(monomials_of_degree(n, d))


def _class_order(n: int, d: int) -> np.ndarray:
    """Permutation taking the top block of the column basis to symbol column order."""
    pos = {m: i for i, m in enumerate(monomials_of_degree(n, d))}
    return np.array([pos[m] for m in symbol_columns(n, d)], dtype=int)


def symbol_matrix(P, degree: int | None = None) -> np.ndarray:
    """Degree-``d`` block of the coefficient matrix, columns by descending class.

    ``P`` is a :class:`PolySystem` (one row per member, zero rows for members
    of lower degree) or a kernel :class:`Subspace` of ``J^d``; for a kernel
    the rows are the top-degree parts of an orthonormal basis of its
    orthogonal complement, i.e. of the system the kernel stands for.
    """
    if isinstance(P, Subspace):
        if P.degree is None:
            raise ValueError("subspace carries no degree")
        n, d = P.nvars, P.degree
        rows = P.complement().basis
    else:
        n = P.nvars
        d = P.degree if degree is None else degree
        if d < 0:
            return np.zeros((0, 0))
        rows = coefficient_matrix(P, d).matrix
    if d == 0:
        return np.zeros((rows.shape[0], 0))
    return rows[:, :count_degree(n, d)][:, _class_order(n, d)]


def kernel_symbol(S: Subspace, eps: float | None = None) -> Subspace:
    """Kernel vectors with vanishing lower-degree part, restricted to the top block.

    This is the orthogonal complement of the symbol; its dimension equals
    ``dim S - dim pi^1 S``.  Columns are in symbol (descending class) order.
    """
    eps = S.eps if eps is None else eps
    n, d = S.nvars, S.degree
    ntop = count_degree(n, d)
    B = S.basis
    low = B[:, ntop:]
    if S.dim == 0:
        comb = np.zeros((0, 0))
    elif low.shape[1] == 0:
        comb = np.eye(S.dim)
    else:
        comb = numeric_kernel(low.T, eps).basis
        # numeric_kernel cuts relative to sigma_1; guard the all-zero case
        if not np.any(low):
            comb = np.eye(S.dim)
    vecs = comb @ B[:, :ntop] if comb.size else np.zeros((0, ntop))
    return span(vecs[:, _class_order(n, d)], eps, scale=1.0)


def linear_change_matrix(n: int, d: int, G) -> np.ndarray:
    """Action of ``x_i -> sum_j G[i, j] x_j`` on degree-``d`` forms (row-vector convention)."""
    from .polycore import Polynomial

    top = monomials_of_degree(n, d)
    basis = monomial_basis(n, d)
    ntop = len(top)
    phi = np.zeros((ntop, ntop))
    for a, m in enumerate(top):
        img = Polynomial(n, {m: 1.0}).linear_change(G)
        phi[a] = img.to_vector(basis)[:ntop]
    return phi


@dataclass(frozen=True)
class SymbolInfo:
    """Outcome of one Cartan test.

    ``betas[k - 1]`` is the number of class-``k`` pivots of the echelonized
    symbol; the symbol is involutive when ``sum k * beta_k`` reaches the rank
    of the prolonged symbol.
    """

    degree: int
    nvars: int
    betas: tuple[int, ...]
    rank: int
    rank_prolonged: int
    frame: str = "original"
    seed: int | None = None

    @property
    def cartan_sum(self) -> int:
        return sum((k + 1) * b for k, b in enumerate(self.betas))

    @property
    def involutive(self) -> bool:
        return self.cartan_sum == self.rank_prolonged


def _symbol_rows(S, eps: float) -> tuple[np.ndarray, int, int]:
    """Orthonormal rows spanning the symbol, in the column basis's top-block order."""
    if isinstance(S, Subspace):
        n, d = S.nvars, S.degree
        rows = S.complement().basis[:, :count_degree(n, d)] if d > 0 else np.zeros((0, 0))
        scale = 1.0
    else:
        n, d = S.nvars, S.degree
        rows = coefficient_matrix(S, d).matrix[:, :count_degree(n, d)] if d > 0 else np.zeros((0, 0))
        scale = None
    if d <= 0:
        return np.zeros((0, 0)), n, max(d, 0)
    return span(rows, eps, scale=scale).basis, n, d


def _betas(A: np.ndarray, n: int, d: int, eps: float) -> tuple[int, ...]:
    """Class pivot counts from the complement ``A`` (columns in symbol order).

    With ``A|_{<=k}`` the columns of class ``<= k``:
    ``beta_k = N_c(n,d,k) - (rank A|_{<=k} - rank A|_{<=k-1})``.
    """
    classes = np.array([m.cls for m in symbol_columns(n, d)])
    ranks = [0]
    for k in range(1, n + 1):
        cols = classes <= k
        sub = A[:, cols]
        ranks.append(numeric_rank(sub, eps, scale=1.0) if sub.size else 0)
    return tuple(count_class(n, d, k) - (ranks[k] - ranks[k - 1]) for k in range(1, n + 1))


def _prolonged_rank(T: np.ndarray, n: int, d: int, eps: float) -> int:
    if T.shape[0] == 0:
        return 0
    top = monomials_of_degree(n, d)
    up = monomials_of_degree(n, d + 1)
    pos = {m: i for i, m in enumerate(up)}
    rows = []
    for j in range(n):
        shift = np.zeros((len(top), len(up)))
        e = [0] * n
        e[j] = 1
        for a, m in enumerate(top):
            shift[a, pos[m * Monomial(e)]] = 1.0
        rows.append(T @ shift)
    return numeric_rank(np.vstack(rows), eps, scale=1.0)


def cartan_test(S, eps: float = DEFAULT_EPS, frame: str = "original", seed: int = 0) -> SymbolInfo:
    """Cartan's test for the symbol of ``S`` (a kernel subspace or a system).

    ``frame="random"`` first applies a seeded Gaussian linear change of
    variables to a throwaway copy of the symbol.
    """
    T, n, d = _symbol_rows(S, eps)
    if d == 0:
        return SymbolInfo(0, n, (0,) * n, 0, 0, frame, seed if frame == "random" else None)
    if frame == "random":
        G = np.random.default_rng(seed).standard_normal((n, n))
        T = span(T @ linear_change_matrix(n, d, G), eps).basis if T.shape[0] else T
    elif frame != "original":
        raise ValueError(f"unknown frame {frame!r}")
    ntop = count_degree(n, d)
    T_cls = T[:, _class_order(n, d)] if T.shape[0] else np.zeros((0, ntop))
    A = Subspace(ntop, T_cls).complement().basis if T.shape[0] else np.eye(ntop)
    betas = _betas(A, n, d, eps)
    return SymbolInfo(d, n, betas, T.shape[0], _prolonged_rank(T, n, d, eps), frame,
                      seed if frame == "random" else None)


def symbol_involutive(S, eps: float = DEFAULT_EPS, seed: int = 0) -> SymbolInfo:
    """Original coordinates first, one seeded random frame if that fails."""
    info = cartan_test(S, eps, "original")
    if info.involutive:
        return info
    return cartan_test(S, eps, "random", seed)


# -- tests read off a dimension table ---------------------------------------

def _as_table(P, kneed: int, eps: float) -> DimensionTable:
    if isinstance(P, DimensionTable):
        if P.kmax < kneed:
            raise ValueError(f"table has columns up to k={P.kmax}, need k={kneed}")
        return P
    from .subspace import dimension_table
    return dimension_table(P, kneed, eps)


def symbol_dim(table: DimensionTable, k: int, ell: int) -> int:
    """Dimension of the (kernel) symbol of ``pi^ell D^k``."""
    return table.dim(k, ell) - table.dim(k, ell + 1)


def elimination_test(P, k: int, ell: int, eps: float = DEFAULT_EPS) -> bool:
    """``dim pi^ell D^k P == dim pi^(ell+1) D^(k+1) P``."""
    T = _as_table(P, k + 1, eps)
    if not 0 <= ell <= T.degree + k:
        raise ValueError(f"projection order {ell} outside 0..{T.degree + k}")
    return T.dim(k, ell) == T.dim(k + 1, ell + 1)


def symbol_involutive_2var(P, k: int, ell: int, eps: float = DEFAULT_EPS) -> bool:
    """Bivariate symbol test: prolonging once leaves the symbol dimension unchanged."""
    nvars = P.nvars
    if nvars != 2:
        raise ValueError(f"two-variable shortcut needs n = 2, got n = {nvars}")
    T = _as_table(P, k + 1, eps)
    return symbol_dim(T, k + 1, ell) == symbol_dim(T, k, ell)


def zero_dim_involutive_test(P, k: int, ell: int, eps: float = DEFAULT_EPS) -> bool:
    """Involutivity criterion for zero-dimensional systems.

    Needs both ``dim pi^ell D^k = dim pi^(ell+1) D^(k+1)`` and
    ``dim pi^ell D^k = dim pi^(ell+1) D^k``.
    """
    T = _as_table(P, k + 1, eps)
    return elimination_test(T, k, ell) and T.dim(k, ell) == T.dim(k, ell + 1)


# -- projected involutive basis ----------------------------------------------

@dataclass(frozen=True)
class InvolutiveCandidate:
    k: int
    ell: int
    kernel: Subspace
    elimination: bool
    symbol_involutive: bool
    inclusion: bool | None = None
    inclusion_residual: float | None = None
    symbol: SymbolInfo | None = None

    @property
    def degree(self) -> int:
        return self.kernel.degree

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @property
    def involutive(self) -> bool:
        return self.elimination and self.symbol_involutive


@dataclass(frozen=True)
class GifResult:
    candidate: InvolutiveCandidate
    generators: PolySystem
    table: DimensionTable
    seed: int

    @property
    def kernel(self) -> Subspace:
        return self.candidate.kernel

    @property
    def degree(self) -> int:
        return self.candidate.degree


def generator_system(R: Subspace) -> PolySystem:
    """Polynomials spanning the orthogonal complement of a kernel ``R`` of ``J^d``."""
    return extract_generators(R.complement(), monomial_basis(R.nvars, R.degree), normalize=False, reduced=False)


def prolonged_generator_kernel(R: Subspace, target_degree: int, eps: float) -> Subspace:
    """``D^(target - dbar)`` of the system whose kernel is ``R``."""
    comp = R.complement()
    n = R.nvars
    if comp.dim == 0:
        N = len(monomial_basis(n, target_degree))
        return Subspace(N, np.eye(N), eps, nvars=n, degree=target_degree)
    gens = extract_generators(comp, monomial_basis(n, R.degree), normalize=False, reduced=False)
    C = prolongation_matrix(gens, target_degree)
    return numeric_kernel(C.matrix, eps, nvars=n, degree=target_degree)


def inclusion_check(R: Subspace, target: Subspace, eps: float, tol: float = INCLUSION_TOL) -> tuple[bool, float]:
    """Does the prolonged kernel of ``R`` sit inside ``target`` (a ``D^k Q``)?"""
    D = prolonged_generator_kernel(R, target.degree, eps)
    res = inclusion_residual(D, target)
    return res <= tol, res


def _cell_symbol(table: DimensionTable, R: Subspace, k: int, ell: int, eps: float, seed: int):
    n = table.nvars
    if n == 1 or R.degree == 0:
        return True, None
    if n == 2:
        return symbol_dim(table, k + 1, ell) == symbol_dim(table, k, ell), None
    info = symbol_involutive(R, eps, seed)
    return info.involutive, info


def evaluate_column(Q: PolySystem, table: DimensionTable, k: int, eps: float, seed: int,
                    tol: float = INCLUSION_TOL) -> list[InvolutiveCandidate]:
    """Flag every cell of column ``k`` (needs column ``k + 1``); return all candidates."""
    if table.kmax < k + 1:
        for kk in range(table.kmax + 1, k + 2):
            table.add_column(Q, kk)
    D = table.kernels[k]
    out = []
    for ell in range(table.degree + k + 1):
        cell = table.cells[(k, ell)]
        R = project_kernel(D, ell)
        elim = table.dim(k, ell) == table.dim(k + 1, ell + 1)
        sym, info = _cell_symbol(table, R, k, ell, eps, seed)
        cell.elimination, cell.symbol_involutive = elim, sym
        incl = res = None
        if elim and sym:
            incl, res = inclusion_check(R, D, eps, tol)
            cell.inclusion = incl
        out.append(InvolutiveCandidate(k, ell, R, elim, sym, incl, res, info))
    return out


def annotate_table(Q: PolySystem, table: DimensionTable, eps: float | None = None, seed: int = 0) -> DimensionTable:
    """Fill elimination/symbol/inclusion flags for every column of ``table``."""
    eps = table.eps if eps is None else eps
    kmax = table.kmax
    for k in range(kmax + 1):
        evaluate_column(Q, table, k, eps, seed)
    return table.truncated(kmax)


def gif(Q: PolySystem, eps: float = DEFAULT_EPS, kmax: int = DEFAULT_KMAX, seed: int = 0,
        degree: int | None = None, tol: float = INCLUSION_TOL) -> GifResult:
    """Projected involutive basis of ``Q``.

    Walks ``k = 0, 1, ...``; at the first ``k`` with an involutive candidate
    whose prolongation is contained in ``D^k Q`` returns the one of lowest
    degree.  Generators come from the orthogonal complement of the chosen
    kernel, in the original coordinates.
    """
    Q = Q.nonzero()
    if len(Q) == 0:
        raise ValueError("gif needs a nonempty system")
    d = Q.degree if degree is None else degree
    table = DimensionTable(Q.nvars, d, eps)
    table.add_column(Q, 0)
    for k in range(kmax + 1):
        cands = evaluate_column(Q, table, k, eps, seed, tol)
        certified = [c for c in cands if c.involutive and c.inclusion]
        log.debug("gif k=%d column=%s certified=%s", k, table.column(k), [c.ell for c in certified])
        if certified:
            best = max(certified, key=lambda c: c.ell)
            gens = generator_system(best.kernel)
            return GifResult(best, gens, table.truncated(k + 1), seed)
    raise GifLimitError(f"no certified involutive system for k <= {kmax}", table)
