"""Truncated moment matrices constrained by a polynomial system.

Moments ``u_gamma`` are indexed by the monomials of degree ``<= 2d`` in the
package column order.  Every ``p`` in ``Pro^d Q`` (products up to degree
``2d``) gives a linear constraint ``L(p) = sum_gamma p_gamma u_gamma = 0`` and
``u_0 = 1`` fixes the scale.  The feasible moments form an affine family
``u = offset + B @ y`` whose free coordinates ``y`` are moments of the lowest
degrees available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .polycore import MonomialBasis, Polynomial, PolySystem, format_polynomial, monomial_basis, prolongation_matrix
from .subspace import DEFAULT_EPS, numeric_kernel


class InfeasibleMomentProblem(ValueError):
    """The constraints force ``u_0 = 0``: the ideal contains a nonzero constant."""


@dataclass(frozen=True)
class MomentProblem:
    nvars: int
    degree: int
    index_basis: MonomialBasis
    moment_basis: MonomialBasis
    hankel: np.ndarray        # (N, N) indices into u
    constraints: np.ndarray   # rows c with c @ u = 0 (u_0 = 1 is kept apart)
    null: np.ndarray          # orthonormal columns spanning {u : constraints @ u = 0}
    offset: np.ndarray        # u at y = 0
    directions: np.ndarray    # (len(u), len(y))
    free: tuple[int, ...]     # moment indices carried by y

    @property
    def size(self) -> int:
        return len(self.index_basis)

    @property
    def nfree(self) -> int:
        return self.directions.shape[1]

    def moments(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape != (self.nfree,):
            raise ValueError(f"expected {self.nfree} free parameters, got {y.shape[0]}")
        return self.offset + self.directions @ y

    def hankel_of(self, u) -> np.ndarray:
        """``M[a, b] = u[alpha_a + beta_b]``; entries with equal index are identical."""
        return np.asarray(u, dtype=float)[self.hankel]

    def free_moments(self, u) -> np.ndarray:
        return np.asarray(u, dtype=float)[list(self.free)]

    def constraint_residual(self, u) -> float:
        u = np.asarray(u, dtype=float)
        res = np.abs(self.constraints @ u) if self.constraints.size else np.zeros(0)
        return float(max(res.max(initial=0.0), abs(u[self.moment_basis.index[(0,) * self.nvars]] - 1.0)))

    def to_dict(self) -> dict:
        mons = [list(m) for m in self.moment_basis]
        return {
            "nvars": self.nvars,
            "degree": self.degree,
            "index_basis": [list(m) for m in self.index_basis],
            "moment_basis": mons,
            "constraints": self.constraints.tolist(),
            "free_moments": [mons[i] for i in self.free],
            "offset": self.offset.tolist(),
            "directions": self.directions.tolist(),
        }


def hankel_indices(n: int, d: int) -> np.ndarray:
    """Index of ``alpha + beta`` in the degree-``2d`` basis for every pair of the degree-``d`` basis."""
    rows = monomial_basis(n, d)
    big = monomial_basis(n, 2 * d)
    N = len(rows)
    idx = np.empty((N, N), dtype=int)
    for a, ma in enumerate(rows):
        for b in range(a, N):
            idx[a, b] = idx[b, a] = big.index[ma * rows[b]]
    return idx


def _pick_free(Z: np.ndarray, tol: float = 1e-8) -> list[int]:
    """Greedily choose rows of ``Z`` (lowest degree first) until they span its row space."""
    m = Z.shape[1]
    chosen: list[int] = []
    Qb = np.zeros((0, m))
    for i in range(Z.shape[0] - 1, -1, -1):
        if len(chosen) == m:
            break
        v = Z[i] - (Z[i] @ Qb.T) @ Qb if Qb.size else Z[i].copy()
        nv = np.linalg.norm(v)
        if nv > tol:
            chosen.append(i)
            Qb = np.vstack([Qb, v / nv])
    return chosen


def build_moment_problem(Q: PolySystem, degree: int | None = None, eps: float = DEFAULT_EPS) -> MomentProblem:
    """Moment problem of order ``d = deg Q`` (or ``degree``) for the system ``Q``."""
    Q = Q.nonzero()
    if len(Q) == 0:
        raise ValueError("moment problem needs a nonempty system")
    n = Q.nvars
    d = Q.degree if degree is None else degree
    if d < Q.degree:
        raise ValueError(f"moment order {d} is below the system degree {Q.degree}")
    big = monomial_basis(n, 2 * d)
    A = prolongation_matrix(Q, 2 * d).matrix
    Z = numeric_kernel(A, eps).basis.T          # columns span the homogeneous solutions
    i0 = big.index[(0,) * n]
    if Z.shape[1] == 0 or np.linalg.norm(Z[i0]) <= eps:
        raise InfeasibleMomentProblem("constraints force u_0 = 0 (the ideal contains a constant)")
    free = _pick_free(Z)
    if free[0] != i0:
        # u_0 is the lowest-degree moment, so it is always picked first when admissible
        raise InfeasibleMomentProblem("u_0 is not a free moment")
    Bfull = Z @ np.linalg.inv(Z[free])
    Bfull[free] = np.eye(len(free))
    return MomentProblem(
        nvars=n, degree=d,
        index_basis=monomial_basis(n, d), moment_basis=big,
        hankel=hankel_indices(n, d),
        constraints=np.array(A), null=Z,
        offset=Bfull[:, 0].copy(), directions=Bfull[:, 1:].copy(),
        free=tuple(free[1:]),
    )


def assemble(Mp: MomentProblem, y) -> np.ndarray:
    """Symmetric moment matrix at the free parameters ``y``."""
    return Mp.hankel_of(Mp.moments(y))


def moment_labels(Mp: MomentProblem, varnames=None) -> list[str]:
    """Readable names ``u[x^2*y]`` for the free moments."""
    return [f"u[{format_polynomial(Polynomial(Mp.nvars, {Mp.moment_basis[i]: 1.0}), varnames)}]" for i in Mp.free]
