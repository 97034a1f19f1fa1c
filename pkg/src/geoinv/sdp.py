"""Maximum-rank positive semidefinite points of a moment family.

The affine family ``u = offset + B y`` is homogenized: ``u = K z`` with ``K``
an orthonormal basis of the constraint null space, ``M(z) = sum z_i H(K_i)``
and the slice ``tr M(z) = 1`` keeps the feasible set compact.  Phase 1 pushes
``lambda_min`` up with a log-det barrier.  If no positive definite point
exists, the directions where the spectrum collapses are pinned
(``M(z) U = 0``) and phase 1 is repeated on the smaller face.  Phase 2 then
computes the analytic center of the face, whose rank is maximal over the
feasible set, and the result is rescaled to ``u_0 = 1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .moment import InfeasibleMomentProblem, MomentProblem
from .subspace import Subspace

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SdpOptions:
    max_iter: int = 200          # Newton steps per phase
    tol: float = 1e-8            # Newton decrement target
    rank_eps: float = 1e-6       # relative spectral cut for the rank
    strict_tol: float = 1e-7     # lambda_min above this counts as strictly feasible
    mu_min: float = 1e-13
    mu_factor: float = 0.1
    restarts: int = 2


class SdpInfeasibleError(InfeasibleMomentProblem):
    """No positive semidefinite moment matrix with ``u_0 = 1``."""


class UnstableRankError(RuntimeError):
    def __init__(self, message: str, solutions):
        super().__init__(message)
        self.solutions = solutions


class SdpConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MomentSolution:
    y: np.ndarray
    moments: np.ndarray
    matrix: np.ndarray
    rank: int
    kernel: Subspace
    lambda_min: float
    iterations: int
    seed: int
    faces: int = 0
    restart_ranks: tuple[int, ...] = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self, digits: int = 12) -> dict:
        def r(a):
            return np.round(np.asarray(a, dtype=float), digits).tolist()
        return {
            "y": r(self.y),
            "rank": self.rank,
            "kernel_dim": self.kernel.dim,
            "size": self.size,
            "lambda_min": float(np.round(self.lambda_min, digits)),
            "iterations": self.iterations,
            "seed": self.seed,
            "faces": self.faces,
            "restart_ranks": list(self.restart_ranks),
        }


def psd_rank(M, eps: float = 1e-6, nvars: int | None = None, degree: int | None = None):
    """``(rank, kernel, lambda_min)`` of a symmetric matrix.

    Eigenvalues up to ``eps * max|lambda|`` are candidates for zero; the cut
    sits at the widest gap (ratio >= 1e3) among them and the next eigenvalue,
    so a badly scaled but well separated spectrum keeps its small positive
    eigenvalues.  Without such a gap the plain relative cut is used.
    """
    M = np.asarray(M, dtype=float)
    N = M.shape[0]
    if N == 0:
        return 0, Subspace(0, np.zeros((0, 0)), eps, nvars=nvars, degree=degree), 0.0
    lam, vec = np.linalg.eigh((M + M.T) / 2)
    top = np.max(np.abs(lam))
    if top == 0.0:
        return 0, Subspace(N, np.eye(N), eps, nvars=nvars, degree=degree), 0.0
    mag = np.abs(lam)
    order = np.argsort(mag, kind="stable")
    cut = _largest_gap(mag[order], eps * top, 1e3)
    zero = np.zeros(N, dtype=bool)
    if cut is not None:
        zero[order[:cut]] = True
    else:
        zero = lam <= eps * top
    r = int(N - zero.sum())
    small = mag[zero]
    big = mag[~zero]
    gap = big.min() / small.max() if r and small.size and small.max() > 0 else float("inf")
    return r, Subspace(N, vec[:, zero].T, eps, gap, nvars, degree), float(lam[0])


# -- barrier machinery -------------------------------------------------------

def _chol(X):
    try:
        return np.linalg.cholesky(X)
    except np.linalg.LinAlgError:
        return None


def _newton(F0, F, w, t, mu, opts, with_t):
    """Damped Newton for ``max [t/mu] + log det(F0 + sum w_j F_j - t I)``.

    Returns the new ``(w, t, iterations)``; ``t`` is ignored when ``with_t`` is false.
    """
    q = F0.shape[0]
    p = F.shape[0]
    it = 0
    while it < opts.max_iter:
        X = F0 + np.tensordot(w, F, axes=1) - (t * np.eye(q) if with_t else 0.0)
        C = _chol(X)
        if C is None:
            raise SdpConvergenceError("iterate left the positive definite cone")
        Ci = np.linalg.inv(C)
        G = Ci @ F @ Ci.T
        Gf = G.reshape(p, -1)
        grad = np.trace(G, axis1=1, axis2=2)
        H = Gf @ Gf.T
        if with_t:
            Gt = Ci @ Ci.T
            grad = np.append(grad, 1.0 / mu - np.trace(Gt))
            cross = -np.einsum("jab,ab->j", G, Gt)
            H = np.block([[H, cross[:, None]], [cross[None, :], np.array([[np.sum(Gt * Gt)]])]])
        try:
            step = np.linalg.solve(H + 1e-14 * np.trace(H) / max(len(H), 1) * np.eye(len(H)), grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(H, grad, rcond=None)[0]
        dec = float(np.sqrt(max(grad @ step, 0.0)))
        it += 1
        if dec * dec / 2 < opts.tol:
            break
        alpha = 1.0 if dec < 0.25 else 1.0 / (1.0 + dec)
        while True:
            w_new = w + alpha * step[:p]
            t_new = t + alpha * step[p] if with_t else t
            Xn = F0 + np.tensordot(w_new, F, axes=1) - (t_new * np.eye(q) if with_t else 0.0)
            if _chol(Xn) is not None:
                break
            alpha /= 2
            if alpha < 1e-12:
                raise SdpConvergenceError("line search failed")
        w, t = w_new, t_new
    return w, t, it


def _slice(G):
    """Affine parametrization ``z = z0 + W w`` of ``tr(sum z_i G_i) = 1``."""
    a = np.trace(G, axis1=1, axis2=2)
    na = np.linalg.norm(a)
    if na == 0.0:
        return None, None
    z0 = a / na**2
    _, _, vt = np.linalg.svd(a[None, :])
    return z0, vt[1:].T


def _largest_gap(vals, hi, min_ratio, floor=1e-15):
    """Split index after the biggest ratio gap among ascending ``vals`` with the lower side <= hi.

    Values under ``floor * max(vals)`` count as equal, so rounding noise never forms a gap.
    """
    lo = floor * max(float(vals[-1]), 0.0)
    best, cut = min_ratio, None
    for i in range(len(vals) - 1):
        if vals[i] > hi:
            break
        ratio = max(vals[i + 1], lo) / max(vals[i], lo, 1e-300)
        if ratio > best:
            best, cut = ratio, i + 1
    return cut


def _null_gap(Cm, scale, rel=1e-6, noise=0.0):
    """Null space of ``Cm`` with the cut placed at a clear singular-value gap.

    ``scale`` is the size of the operator ``Cm`` came from and ``noise`` the
    expected size of ``Cm`` on its true null space, so that a map which
    vanishes up to rounding is recognized as zero.
    """
    p = Cm.shape[1]
    _, s, vt = np.linalg.svd(Cm, full_matrices=True)
    zero = max(1e-10 * scale, noise)
    if s.size == 0 or s[0] <= zero:
        return np.eye(p)
    asc = np.concatenate([[zero], np.sort(s)]) / s[0]
    cut = _largest_gap(asc, 1e-4, 1e2)
    thr = asc[cut - 1] if cut is not None else rel
    r = int(np.sum(s / s[0] > thr))
    return vt[r:].T


def _phase1(H, rng, opts):
    """Maximize ``lambda_min`` over the trace slice of ``sum z_i H_i``.

    Returns ``(z0, W, w, t, strict, iterations)``.
    """
    z0, W = _slice(H)
    if z0 is None:
        raise SdpInfeasibleError("only the zero moment matrix is feasible")
    F0 = np.tensordot(z0, H, axes=1)
    F = np.tensordot(W.T, H, axes=1)
    w = 0.01 * rng.standard_normal(W.shape[1])
    t = float(np.linalg.eigvalsh(F0 + np.tensordot(w, F, axes=1))[0])
    if W.shape[1] == 0:
        # a single point on the slice: nothing to optimize
        return z0, W, w, t, t > opts.strict_tol, 0
    t -= 1.0
    mu, iters = 1.0, 0
    while mu >= opts.mu_min:
        w, t, k = _newton(F0, F, w, t, mu, opts, with_t=True)
        iters += k
        if t > opts.strict_tol:
            return z0, W, w, t, True, iters
        mu *= opts.mu_factor
    return z0, W, w, t, False, iters


def _jacobi(X, floor=1e-10):
    """Diagonal scaling that brings the diagonal of a PSD matrix to one.

    Entries at noise level (kernel coordinates) are not amplified: they get
    the factor of the largest entry.
    """
    d = np.diag(X)
    top = max(float(d.max()), 1e-300)
    return np.where(d > floor * top, 1.0 / np.sqrt(np.maximum(d, floor * top)), 1.0 / np.sqrt(top))


def _max_rank_face(G, rng, opts):
    """Analytic center of ``{z : sum z_i G_i >= 0, trace = 1}`` on its maximal face.

    Returns ``(z, V, faces, iterations)``: ``z`` in the coordinates of ``G`` and
    ``V`` a basis of the range of the face.  Moment matrices are badly scaled
    (entries grow like ``|x|^(2d)``), so a face on which phase 1 stalls is
    Jacobi-scaled by the current iterate once before its spectrum is read.
    """
    m, N, _ = G.shape
    Z = np.eye(m)               # current subspace of z
    V = np.eye(N)               # current range of the face (columns, possibly scaled)
    faces = iters = 0
    scaled = False
    while True:
        H = np.einsum("ab,jbc,cd->jad", V.T, np.tensordot(Z.T, G, axes=1), V)
        z0, W, w, t, strict, k = _phase1(H, rng, opts)
        iters += k
        F0 = np.tensordot(z0, H, axes=1)
        F = np.tensordot(W.T, H, axes=1)
        X = F0 + np.tensordot(w, F, axes=1)
        if not strict and not scaled:
            V = V * _jacobi(X)[None, :]
            scaled = True
            continue
        if t < -opts.strict_tol:
            # the barrier converged with lambda_min bounded away from zero: no PSD point on the slice
            raise SdpInfeasibleError(f"no positive semidefinite moment matrix (max lambda_min = {t:.3g})")
        lam, vec = np.linalg.eigh(X)
        cut = None if strict else _largest_gap(np.maximum(lam, 0.0), 1e-5, 1e3)
        if strict or (cut is None and t > 0.0):
            if not strict:
                log.debug("phase 1 ended at lambda_min %.3g with no spectral gap; treated as strict", t)
            if W.shape[1]:
                w, _, k = _newton(F0, F, w, 0.0, 1.0, opts, with_t=False)
                iters += k
            return Z @ (z0 + W @ w), V, faces, iters
        if cut is None:
            raise SdpConvergenceError(f"no strictly feasible point and no spectral gap (lambda_min = {lam[0]:.3g})")
        if cut == X.shape[0]:
            raise SdpInfeasibleError("the feasible face is {0}")
        U = vec[:, :cut]
        # pin M(z) U = 0 over the homogeneous coordinates of this face
        Cm = np.einsum("jab,bk->jak", H, U).reshape(H.shape[0], -1).T
        # U is accurate to about (size of the zero cluster) / (first kept eigenvalue)
        hn = float(np.linalg.norm(H))
        drift = max(float(np.max(np.abs(lam[:cut]))), 1e-15 * float(lam[-1])) / float(lam[cut])
        Y = _null_gap(Cm, hn, noise=10.0 * hn * drift)
        if Y.shape[1] == 0:
            raise SdpInfeasibleError("no nonzero moment matrix on the reduced face")
        Z = Z @ Y
        V = V @ vec[:, cut:]
        scaled = False
        faces += 1
        log.debug("facial reduction %d: face rank %d, %d parameters", faces, V.shape[1], Z.shape[1])


def _scaled_rank(M, eps, nvars, degree):
    """Rank and kernel of ``M`` read off its Jacobi-scaled copy."""
    D = _jacobi(M)
    r, ker, _ = psd_rank(D[:, None] * M * D[None, :], eps)
    lam_min = float(np.linalg.eigvalsh(M)[0])
    kb = (ker.basis * D[None, :]) if ker.dim else ker.basis
    if ker.dim:
        q, _ = np.linalg.qr(kb.T)
        kb = q.T
    return r, Subspace(M.shape[0], kb, eps, ker.gap, nvars, degree), lam_min


def _solve_once(Mp: MomentProblem, seed: int, opts: SdpOptions) -> MomentSolution:
    rng = np.random.default_rng(seed)
    K = Mp.null
    G = np.stack([Mp.hankel_of(K[:, i]) for i in range(K.shape[1])])
    z, V, faces, iters = _max_rank_face(G, rng, opts)
    u = K @ z
    i0 = Mp.moment_basis.index[(0,) * Mp.nvars]
    s = u[i0]
    if s <= 1e-9 * np.abs(u).max():
        raise SdpInfeasibleError("every positive semidefinite point has u_0 = 0")
    u = u / s
    # snap to the affine family so the equality constraints hold to rounding
    y = Mp.free_moments(u)
    u = Mp.moments(y)
    M = Mp.hankel_of(u)
    r, ker, lam_min = _scaled_rank(M, opts.rank_eps, Mp.nvars, Mp.degree)
    return MomentSolution(y, u, M, r, ker, lam_min, iters, seed, faces,
                          diagnostics={"face_rank": V.shape[1]})


def generic_point(Mp: MomentProblem, seed: int = 0, options: SdpOptions | None = None) -> MomentSolution:
    """Generic (maximum rank) positive semidefinite point of the moment family.

    Runs ``options.restarts`` solves from seeds ``seed, seed + 1, ...``; their
    ranks must agree.  The first solution is returned.
    """
    opts = options or SdpOptions()
    sols = [_solve_once(Mp, seed + i, opts) for i in range(max(opts.restarts, 1))]
    ranks = tuple(s.rank for s in sols)
    if len(set(ranks)) > 1:
        raise UnstableRankError(f"restarts disagree on the rank: {ranks}", sols)
    first = sols[0]
    log.info("generic point: rank %d of %d, lambda_min %.3g, faces %d", first.rank, first.size, first.lambda_min, first.faces)
    return MomentSolution(first.y, first.moments, first.matrix, first.rank, first.kernel, first.lambda_min,
                          first.iterations, first.seed, first.faces, ranks, first.diagnostics)
