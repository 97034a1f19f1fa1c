"""Randomized invariants over small systems (n <= 3, d <= 4).

Each property is a plain ``check_*`` function.  Hypothesis drives them here;
the acceptance suite replays them on seeded numpy-generated systems.
"""

import itertools
from fractions import Fraction

import numpy as np
from hypothesis import HealthCheck, given, settings, strategies as st

from geoinv import (
    Polynomial, PolySystem, build_moment_problem, cartan_test, dimension_table, generic_point,
    gif_mmtx, project_kernel, same_subspace, symbol_involutive, symbol_involutive_2var,
)
from geoinv.involutive import inclusion_check
from geoinv.polycore import count_monomials, prolongation_matrix
from geoinv.subspace import numeric_rowspace, system_kernel

RUNS = settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])


# -- generators --------------------------------------------------------------

def build_system(n, d, members, top_const):
    """``members`` is a list of ``{monomial: coefficient}``; a pure power of x1 fixes the degree."""
    polys = [Polynomial(n, t) for t in members]
    top = Polynomial(n, {tuple([d] + [0] * (n - 1)): 1.0, (0,) * n: top_const})
    return PolySystem(n, [p for p in polys if not p.is_zero()] + [top])


def _monomials(n, d):
    return [m for m in itertools.product(range(d + 1), repeat=n) if sum(m) <= d]


@st.composite
def systems(draw, nmin=1, nmax=3, dmax=4):
    n = draw(st.integers(nmin, nmax))
    d = draw(st.integers(1, dmax if n < 3 else min(dmax, 3)))
    mons = _monomials(n, d)
    members = []
    for _ in range(draw(st.integers(1, 3))):
        chosen = draw(st.lists(st.sampled_from(mons), min_size=1, max_size=4, unique=True))
        coeffs = draw(st.lists(st.integers(-3, 3).filter(bool), min_size=len(chosen), max_size=len(chosen)))
        members.append(dict(zip(chosen, coeffs)))
    return build_system(n, d, members, draw(st.integers(-3, 3)))


def random_system(rng, nmin=1, nmax=3, dmax=4):
    n = int(rng.integers(nmin, nmax + 1))
    d = int(rng.integers(1, (dmax if n < 3 else min(dmax, 3)) + 1))
    mons = _monomials(n, d)
    members = []
    for _ in range(int(rng.integers(1, 4))):
        idx = rng.choice(len(mons), size=int(rng.integers(1, min(4, len(mons)) + 1)), replace=False)
        coeffs = rng.choice([-3, -2, -1, 1, 2, 3], size=len(idx))
        members.append({mons[i]: int(c) for i, c in zip(idx, coeffs)})
    return build_system(n, d, members, int(rng.integers(-3, 4)))


@st.composite
def grids(draw):
    """Coordinates of a grid of rational points, at most 3 per axis (2 when n = 3)."""
    n = draw(st.integers(1, 3))
    fr = st.fractions(min_value=-3, max_value=3, max_denominator=4)
    sizes = [draw(st.integers(1, 3 if n < 3 else 2)) for _ in range(n)]
    return n, [sorted(draw(st.lists(fr, min_size=s, max_size=s, unique=True))) for s in sizes]


def random_grid(rng):
    n = int(rng.integers(1, 4))
    pool = sorted({Fraction(int(a), int(b)) for a in range(-12, 13) for b in (1, 2, 3, 4) if abs(a) <= 3 * b})
    coords = []
    for _ in range(n):
        k = int(rng.integers(1, (3 if n < 3 else 2) + 1))
        coords.append(sorted(pool[i] for i in rng.choice(len(pool), size=k, replace=False)))
    return n, coords


def grid_system(n, coords, extra=None):
    """One product of linear forms per variable: the vanishing ideal of the grid."""
    polys = []
    for i, cs in enumerate(coords):
        p = Polynomial.constant(n, 1.0)
        for c in cs:
            p = p * (Polynomial.variable(n, i) - Polynomial.constant(n, float(c)))
        if extra is not None:
            p = p * extra(n, i)
        polys.append(p)
    return PolySystem(n, polys)


def monomial_vector(basis, z):
    return np.array([np.prod(np.asarray(z, dtype=float) ** np.array(m)) for m in basis])


def well_conditioned(n, seed):
    Qm, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, n)))
    return Qm @ np.diag(np.random.default_rng(seed + 1).uniform(0.5, 2.0, n))


def _complex_factor(n, i):
    # x_i^2 + 1 has no real roots; the real radical drops it
    return Polynomial.variable(n, i) * Polynomial.variable(n, i) + Polynomial.constant(n, 1.0)


# -- checks ------------------------------------------------------------------

def check_orthogonality(P):
    d = P.degree
    K = system_kernel(P)
    R = numeric_rowspace(prolongation_matrix(P, d).matrix)
    assert R.dim + K.dim == count_monomials(P.nvars, d)
    if R.dim and K.dim:
        assert np.max(np.abs(R.basis @ K.basis.T)) < 1e-10


def check_projection_composition(P, a, b):
    D = system_kernel(P)
    two = project_kernel(project_kernel(D, a), b)
    one = project_kernel(D, a + b)
    assert two.dim == one.dim
    assert same_subspace(two, one)


def check_cartan_inequality(P, seed):
    R = project_kernel(system_kernel(P), 0)
    for S in (P, R):
        for info in (cartan_test(S), cartan_test(S, frame="random", seed=seed)):
            assert info.cartan_sum <= info.rank_prolonged


def check_table_invariance(P, seed):
    G = well_conditioned(P.nvars, seed)
    a = dimension_table(P, 1)
    b = dimension_table(P.linear_change(G), 1)
    assert [a.column(k) for k in range(2)] == [b.column(k) for k in range(2)]


def check_moment_oracle(n, coords, seed):
    Q = grid_system(n, coords)
    points = list(itertools.product(*coords))
    # moment order at which monomials separate the grid points
    degree = max(Q.degree, sum(len(c) - 1 for c in coords))
    Mp = build_moment_problem(Q, degree=degree)
    u = np.mean([monomial_vector(Mp.moment_basis, z) for z in points], axis=0)
    assert Mp.constraint_residual(u) < 1e-9
    M = Mp.hankel_of(u)
    assert np.linalg.eigvalsh(M)[0] > -1e-9 * np.abs(M).max()
    diag = np.diag(M)
    # a zero diagonal entry means a zero row (PSD), leave it unscaled
    D = 1.0 / np.sqrt(np.where(diag > 0, diag, 1.0))
    assert np.linalg.matrix_rank(D[:, None] * M * D[None, :], tol=1e-8) == len(points)
    sol = generic_point(Mp, seed=seed)
    assert sol.rank == len(points)
    assert sol.lambda_min >= -1e-7
    for z in points:
        v = monomial_vector(Mp.index_basis, z)
        assert np.max(np.abs(sol.kernel.basis @ v)) <= 1e-6 * max(1.0, np.linalg.norm(v))


def check_realrad_roots(n, coords, complex_factor):
    if n == 3:
        coords = [c[:1] for c in coords]
    P = grid_system(n, coords, _complex_factor if complex_factor and n == 1 else None)
    res = gif_mmtx(P)
    for z in itertools.product(*coords):
        assert np.max(np.abs(res.generators(np.array([float(c) for c in z])))) <= 1e-6


def check_two_variable_consistency(P, seed):
    """Shortcut and Cartan agree on cells passing elimination and the inclusion certificate.

    Elsewhere the shortcut reads dimensions of a tower that is not involutive
    yet, so agreement is only expected on certified cells.
    """
    T = dimension_table(P, 2)
    for k in range(2):
        D = T.kernels[k]
        for ell in range(P.degree + k + 1):
            R = project_kernel(D, ell)
            if R.degree == 0 or T.dim(k, ell) != T.dim(k + 1, ell + 1):
                continue
            if not inclusion_check(R, D, 1e-8)[0]:
                continue
            assert symbol_involutive_2var(T, k, ell) == symbol_involutive(R, seed=seed).involutive


def _split(rng, d):
    a = int(rng.integers(0, d + 1))
    return a, int(rng.integers(0, d - a + 1))


SUITES = [
    ("(a) orthogonality and dimension sum", check_orthogonality, lambda r: (random_system(r),)),
    ("(b) projection composition", check_projection_composition,
     lambda r: (lambda P: (P, *_split(r, P.degree)))(random_system(r))),
    ("(c) Cartan inequality", check_cartan_inequality,
     lambda r: (random_system(r, nmin=2), int(r.integers(10_000)))),
    ("(d) table invariance under variable change", check_table_invariance,
     lambda r: (random_system(r, dmax=3), int(r.integers(10_000)))),
    ("(e) moment oracle on rational roots", check_moment_oracle,
     lambda r: (*random_grid(r), int(r.integers(1000)))),
    ("(f) realrad root soundness", check_realrad_roots, lambda r: (*random_grid(r), bool(r.integers(2)))),
    ("two-variable consistency on certified cells", check_two_variable_consistency,
     lambda r: (random_system(r, nmin=2, nmax=2, dmax=3), int(r.integers(1000)))),
]


# -- hypothesis drivers ------------------------------------------------------

@RUNS
@given(systems())
def test_rowspace_orthogonal_to_kernel(P):
    check_orthogonality(P)


@RUNS
@given(systems(), st.data())
def test_projection_composition(P, data):
    a = data.draw(st.integers(0, P.degree))
    check_projection_composition(P, a, data.draw(st.integers(0, P.degree - a)))


@RUNS
@given(systems(nmin=2), st.integers(0, 10_000))
def test_cartan_inequality(P, seed):
    check_cartan_inequality(P, seed)


@RUNS
@given(systems(dmax=3), st.integers(0, 10_000))
def test_table_invariant_under_variable_change(P, seed):
    check_table_invariance(P, seed)


@RUNS
@given(grids(), st.integers(0, 1000))
def test_moment_oracle(grid, seed):
    check_moment_oracle(*grid, seed)


@RUNS
@given(grids(), st.booleans())
def test_realrad_root_soundness(grid, complex_factor):
    check_realrad_roots(*grid, complex_factor)


@RUNS
@given(systems(nmin=2, nmax=2, dmax=3), st.integers(0, 1000))
def test_two_variable_shortcut_matches_cartan_on_certified_cells(P, seed):
    check_two_variable_consistency(P, seed)
