import math

import numpy as np
import pytest

from geoinv import (
    InfeasibleMomentProblem, SdpInfeasibleError, SdpOptions, UnstableRankError, assemble,
    build_moment_problem, generic_point, parse_system, principal_angle_gap, psd_rank, span,
)
from geoinv.moment import moment_labels
from geoinv.polycore import extract_generators, monomial_basis, prolongation_matrix
from geoinv.subspace import project_kernel, system_kernel

R2 = math.sqrt(2.0)


@pytest.fixture
def quartic():
    return build_moment_problem(parse_system("vars: x\nx^4 - 2"))


def ascending(M):
    """Reorder a univariate moment matrix to rows 1, x, x^2, ..."""
    return M[::-1, ::-1]


def test_quartic_parameterization(quartic):
    Mp = quartic
    assert Mp.nfree == 3
    assert moment_labels(Mp) == ["u[x]", "u[x^2]", "u[x^3]"]
    u1, u2, u3 = 0.3, 1.1, -0.7
    u = Mp.moments([u1, u2, u3])
    by_deg = {m[0]: u[i] for i, m in enumerate(Mp.moment_basis)}
    # u4 = 2, u5 = 2 u1, u6 = 2 u2, u7 = 2 u3, u8 = 2 u4
    np.testing.assert_allclose([by_deg[k] for k in range(9)], [1, u1, u2, u3, 2, 2 * u1, 2 * u2, 2 * u3, 4], atol=1e-12)
    M = ascending(assemble(Mp, [u1, u2, u3]))
    want = np.array([
        [1, u1, u2, u3, 2], [u1, u2, u3, 2, 2 * u1], [u2, u3, 2, 2 * u1, 2 * u2],
        [u3, 2, 2 * u1, 2 * u2, 2 * u3], [2, 2 * u1, 2 * u2, 2 * u3, 4]])
    np.testing.assert_allclose(M, want, atol=1e-12)
    assert Mp.constraint_residual(u) < 1e-12


def test_quartic_at_published_point(quartic):
    M = ascending(assemble(quartic, [0.0, R2, 0.0]))
    np.testing.assert_allclose(M[0], [1, 0, R2, 0, 2], atol=1e-12)
    np.testing.assert_allclose(M[1], [0, R2, 0, 2, 0], atol=1e-12)


def test_hankel_consistency(p3):
    Mp = build_moment_problem(parse_system("vars: x y\nx^2 + y - 1"))
    y = np.random.default_rng(0).standard_normal(Mp.nfree)
    M = assemble(Mp, y)
    assert np.array_equal(M, M.T)
    for g in np.unique(Mp.hankel):
        vals = M[Mp.hankel == g]
        assert np.all(vals == vals[0])


def test_unit_ideal_infeasible():
    with pytest.raises(InfeasibleMomentProblem):
        build_moment_problem(parse_system("vars: x\n1"))


def test_unconstrained_at_zero():
    # x - x^... : a system whose only constraint is trivial at the chosen degree
    Mp = build_moment_problem(parse_system("vars: x y\nx - y"))
    M = assemble(Mp, np.zeros(Mp.nfree))
    i0 = Mp.index_basis.index[(0, 0)]
    assert M[i0, i0] == 1.0
    assert np.count_nonzero(M) == 1
    with pytest.raises(ValueError):
        assemble(Mp, np.zeros(Mp.nfree + 1))


def test_serialization(quartic):
    d = quartic.to_dict()
    assert d["free_moments"] == [[1], [2], [3]]
    assert len(d["offset"]) == 9


# -- psd_rank ----------------------------------------------------------------

def test_psd_rank_identity_and_outer():
    r, K, lam = psd_rank(np.eye(4))
    assert (r, K.dim, lam) == (4, 0, 1.0)
    v = np.array([1.0, -2.0, 0.5])
    r, K, _ = psd_rank(np.outer(v, v))
    assert (r, K.dim) == (1, 2)


def test_psd_rank_published_solution(quartic):
    M = assemble(quartic, [0.0, R2, 0.0])
    r, K, lam = psd_rank(M, nvars=1, degree=4)
    assert r == 2 and K.dim == 3 and lam > -1e-12
    # kernel vectors over (x^4, x^3, x^2, x, 1): 2 - x^4, sqrt2 - x^2, sqrt2 x - x^3
    want = span([[-1, 0, 0, 0, 2], [0, 0, -1, 0, R2], [0, -1, 0, R2, 0]])
    assert principal_angle_gap(K, want) < 1e-10


# -- generic points ----------------------------------------------------------

def test_generic_point_quartic(quartic):
    sol = generic_point(quartic, seed=0)
    assert sol.rank == 2 and sol.kernel.dim == 3
    assert abs(sol.y[0]) <= 1e-5 and abs(sol.y[1] - R2) <= 1e-5 and abs(sol.y[2]) <= 1e-5
    want = span([[-1, 0, 0, 0, 2], [0, 0, -1, 0, R2], [0, -1, 0, R2, 0]])
    assert principal_angle_gap(sol.kernel, want) <= 1e-5
    assert sol.rank + sol.kernel.dim == sol.size
    assert sol.lambda_min >= -1e-7
    assert quartic.constraint_residual(sol.moments) <= 1e-9
    assert sol.restart_ranks == (2, 2)
    gens = extract_generators(sol.kernel, monomial_basis(1, 4))
    assert len(gens) == 3


def test_generic_point_constraint_soundness():
    Q = parse_system("vars: x y\nx^2 + y^2 - 1\nx*y")
    Mp = build_moment_problem(Q)
    sol = generic_point(Mp, seed=3)
    A = prolongation_matrix(Q, 2 * Mp.degree).matrix
    assert np.max(np.abs(A @ sol.moments)) <= 1e-9
    assert sol.rank == 4  # (+-1, 0), (0, +-1)


def test_single_rational_root():
    z = np.array([0.5, -1.5])
    Q = parse_system("vars: x y\nx - 0.5\ny + 1.5")
    Mp = build_moment_problem(Q, degree=2)
    sol = generic_point(Mp)
    v = np.array([np.prod(z ** np.array(m)) for m in Mp.index_basis])
    np.testing.assert_allclose(sol.matrix, np.outer(v, v), atol=1e-7)
    assert sol.rank == 1


def test_no_real_points():
    # x^2 + 1 has no real roots; only u0 = 0 is PSD-feasible
    with pytest.raises(SdpInfeasibleError):
        generic_point(build_moment_problem(parse_system("vars: x\nx^2 + 1")))


def test_determinism(quartic):
    a = generic_point(quartic, seed=7)
    b = generic_point(quartic, seed=7)
    assert np.array_equal(a.y, b.y)
    assert a.to_dict() == b.to_dict()


def test_unstable_rank_error_type():
    err = UnstableRankError("ranks differ", [1, 2])
    assert err.solutions == [1, 2]


def test_p3_degree_three_moment(p3):
    """Moment matrix of the degree-3 projection of P3: rank 7, kernel dimension 13."""
    R = project_kernel(system_kernel(p3), 2)
    gens = extract_generators(R.complement(), monomial_basis(3, 3), normalize=False, reduced=False)
    sol = generic_point(build_moment_problem(gens, degree=3), options=SdpOptions())
    assert (sol.size, sol.rank, sol.kernel.dim) == (20, 7, 13)
