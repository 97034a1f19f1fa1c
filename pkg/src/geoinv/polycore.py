"""Monomials, sparse real polynomials and their coefficient matrices.

Column order is shared by every module in the package: monomials of degree
``<= d`` sorted by total degree descending, ties broken by graded
lexicographic order with ``x1 > x2 > ... > xn``.  For two variables and
``d = 2`` this gives ``x1^2, x1*x2, x2^2, x1, x2, 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import Iterable, Mapping, Sequence

import numpy as np

CLEANUP_RTOL = 1e-10


class Monomial(tuple):
    """Exponent vector ``alpha`` of ``x^alpha``; a tuple of non-negative ints."""

    def __new__(cls, exponents: Iterable[int]):
        exps = tuple(int(e) for e in exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        return super().__new__(cls, exps)

    @property
    def nvars(self) -> int:
        return len(self)

    @property
    def degree(self) -> int:
        return sum(self)

    @property
    def cls(self) -> int:
        """Least (1-based) index ``j`` with ``alpha_j != 0``."""
        for j, e in enumerate(self):
            if e:
                return j + 1
        raise ValueError("class is undefined for the constant monomial")

    def __mul__(self, other):
        return Monomial(a + b for a, b in zip(self, other))

    def __repr__(self):
        return f"Monomial({tuple(self)})"


def count_monomials(n: int, d: int) -> int:
    """Number of monomials in ``n`` variables of degree ``<= d``."""
    _check_nd(n, d)
    return comb(n + d, d)


def count_degree(n: int, d: int) -> int:
    """Number of monomials in ``n`` variables of degree exactly ``d``."""
    _check_nd(n, d)
    return comb(n + d - 1, d)


def count_class(n: int, d: int, k: int) -> int:
    """Number of class-``k`` monomials of degree ``d``."""
    _check_nd(n, d)
    if not 1 <= k <= n:
        raise ValueError(f"class k={k} out of range 1..{n}")
    if d == 0:
        return 0
    return comb(n + d - k - 1, d - 1)


def _check_nd(n, d):
    if n < 1:
        raise ValueError(f"need at least one variable, got n={n}")
    if d < 0:
        raise ValueError(f"negative degree d={d}")


@lru_cache(maxsize=None)
def monomials_of_degree(n: int, d: int) -> tuple[Monomial, ...]:
    """Degree-``d`` monomials in graded lex descending order."""
    out = []
    for combo in combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return tuple(Monomial(e) for e in sorted(set(out), reverse=True))


@dataclass(frozen=True)
class MonomialBasis:
    """All monomials of degree ``<= degree`` in the package's column order."""

    nvars: int
    degree: int
    monomials: tuple[Monomial, ...] = field(init=False, repr=False)
    index: Mapping[Monomial, int] = field(init=False, repr=False)

    def __post_init__(self):
        _check_nd(self.nvars, self.degree)
        mons = tuple(m for e in range(self.degree, -1, -1) for m in monomials_of_degree(self.nvars, e))
        object.__setattr__(self, "monomials", mons)
        object.__setattr__(self, "index", {m: i for i, m in enumerate(mons)})

    def __len__(self):
        return len(self.monomials)

    def __iter__(self):
        return iter(self.monomials)

    def __getitem__(self, i):
        return self.monomials[i]

    def degrees(self) -> np.ndarray:
        return np.array([m.degree for m in self.monomials], dtype=int)

    def low_slice(self, e: int) -> slice:
        """Columns of degree ``<= e`` (a tail of the column list)."""
        if e < 0:
            return slice(len(self), len(self))
        return slice(len(self) - count_monomials(self.nvars, e), len(self))

    def top_slice(self) -> slice:
        """Columns of degree exactly ``self.degree``."""
        return slice(0, count_degree(self.nvars, self.degree))


@lru_cache(maxsize=64)
def monomial_basis(n: int, d: int) -> MonomialBasis:
    return MonomialBasis(n, d)


class Polynomial:
    """Sparse polynomial with real coefficients in a fixed number of variables."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], float] | None = None):
        self.nvars = int(nvars)
        clean: dict[Monomial, float] = {}
        for mon, c in (terms or {}).items():
            mon = Monomial(mon)
            if len(mon) != self.nvars:
                raise ValueError(f"monomial {tuple(mon)} does not have {self.nvars} exponents")
            c = float(c)
            if c != 0.0:
                clean[mon] = clean.get(mon, 0.0) + c
        self.terms = {m: c for m, c in clean.items() if c != 0.0}

    @classmethod
    def constant(cls, nvars: int, value: float) -> Polynomial:
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, nvars: int, i: int) -> Polynomial:
        e = [0] * nvars
        e[i] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def from_vector(cls, vec, basis: MonomialBasis) -> Polynomial:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (len(basis),):
            raise ValueError(f"vector of length {vec.shape} does not match basis of size {len(basis)}")
        return cls(basis.nvars, {basis[i]: c for i, c in enumerate(vec) if c != 0.0})

    @property
    def degree(self) -> int:
        """Max degree over stored terms; ``-1`` for the zero polynomial."""
        return max((m.degree for m in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, mon) -> float:
        return self.terms.get(Monomial(mon), 0.0)

    def to_vector(self, basis: MonomialBasis) -> np.ndarray:
        if basis.nvars != self.nvars:
            raise ValueError("variable count mismatch")
        v = np.zeros(len(basis))
        for m, c in self.terms.items():
            try:
                v[basis.index[m]] = c
            except KeyError:
                raise ValueError(f"term of degree {m.degree} exceeds basis degree {basis.degree}") from None
        return v

    def leading_term(self) -> tuple[Monomial, float] | None:
        """First term in the package column order (highest degree, then lex)."""
        if not self.terms:
            return None
        m = max(self.terms, key=lambda m: (m.degree, tuple(m)))
        return m, self.terms[m]

    def shift(self, mon) -> Polynomial:
        """Multiply by the monomial ``x^mon``."""
        mon = Monomial(mon)
        return Polynomial(self.nvars, {m * mon: c for m, c in self.terms.items()})

    def scale(self, s: float) -> Polynomial:
        return Polynomial(self.nvars, {m: s * c for m, c in self.terms.items()})

    def __add__(self, other: Polynomial) -> Polynomial:
        terms = dict(self.terms)
        for m, c in other.terms.items():
            terms[m] = terms.get(m, 0.0) + c
        return Polynomial(self.nvars, terms)

    def __neg__(self):
        return self.scale(-1.0)

    def __sub__(self, other: Polynomial) -> Polynomial:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        terms: dict[Monomial, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = m1 * m2
                terms[m] = terms.get(m, 0.0) + c1 * c2
        return Polynomial(self.nvars, terms)

    __rmul__ = __mul__

    def __call__(self, point) -> float:
        point = np.asarray(point, dtype=float)
        return float(sum(c * np.prod(point ** np.array(m)) for m, c in self.terms.items()))

    def __eq__(self, other):
        return isinstance(other, Polynomial) and self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def max_abs_coeff(self) -> float:
        return max((abs(c) for c in self.terms.values()), default=0.0)

    def cleaned(self, rtol: float = CLEANUP_RTOL) -> Polynomial:
        """Drop terms smaller than ``rtol`` times the largest coefficient."""
        cut = rtol * self.max_abs_coeff()
        return Polynomial(self.nvars, {m: c for m, c in self.terms.items() if abs(c) >= cut})

    def normalized(self, rtol: float = 0.0) -> Polynomial:
        """Scale so the leading coefficient (column order) is 1.

        Terms below ``rtol`` times the largest coefficient are skipped when
        locating the leading term, so numerical dust never becomes the divisor.
        """
        cut = rtol * self.max_abs_coeff()
        big = {m: c for m, c in self.terms.items() if abs(c) >= cut}
        if not big:
            return self
        m = max(big, key=lambda m: (m.degree, tuple(m)))
        return self.scale(1.0 / big[m])

    def linear_change(self, G) -> Polynomial:
        """Substitute ``x_i -> sum_j G[i, j] x_j``."""
        G = np.asarray(G, dtype=float)
        images = [Polynomial(self.nvars, {_unit(self.nvars, j): G[i, j] for j in range(self.nvars)})
                  for i in range(self.nvars)]
        out = Polynomial(self.nvars)
        for m, c in self.terms.items():
            term = Polynomial.constant(self.nvars, c)
            for i, e in enumerate(m):
                for _ in range(e):
                    term = term * images[i]
            out = out + term
        return out

    def __repr__(self):
        return f"Polynomial({self.nvars}, {format_polynomial(self)!r})"


def _unit(n, j):
    e = [0] * n
    e[j] = 1
    return tuple(e)


def default_varnames(n: int) -> list[str]:
    if n <= 3:
        return ["x", "y", "z"][:n]
    return [f"x{i + 1}" for i in range(n)]


def format_polynomial(p: Polynomial, varnames: Sequence[str] | None = None, digits: int = 7) -> str:
    """Render ``p`` in the text format understood by :func:`geoinv.polyio.parse_system`."""
    names = list(varnames) if varnames is not None else default_varnames(p.nvars)
    if not p.terms:
        return "0"
    ordered = sorted(p.terms.items(), key=lambda mc: (mc[0].degree, tuple(mc[0])), reverse=True)
    parts = []
    for i, (m, c) in enumerate(ordered):
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        factors = []
        for name, e in zip(names, m):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        coeff = f"{mag:.{digits}g}"
        if factors and coeff == "1":
            body = "*".join(factors)
        elif factors:
            body = coeff + "*" + "*".join(factors)
        else:
            body = coeff
        if i == 0:
            parts.append(("-" if sign == "-" else "") + body)
        else:
            parts.append(f" {sign} {body}")
    return "".join(parts)


@dataclass(frozen=True)
class PolySystem:
    """An ordered list of polynomials over a common set of ``nvars`` variables."""

    nvars: int
    polys: tuple[Polynomial, ...]

    def __init__(self, nvars: int, polys: Iterable[Polynomial] = ()):
        polys = tuple(polys)
        for p in polys:
            if p.nvars != nvars:
                raise ValueError(f"polynomial in {p.nvars} variables added to a system in {nvars}")
        object.__setattr__(self, "nvars", int(nvars))
        object.__setattr__(self, "polys", polys)

    @property
    def degree(self) -> int:
        return max((p.degree for p in self.polys), default=-1)

    def __len__(self):
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def nonzero(self) -> PolySystem:
        return PolySystem(self.nvars, [p for p in self.polys if not p.is_zero()])

    def linear_change(self, G) -> PolySystem:
        return PolySystem(self.nvars, [p.linear_change(G) for p in self.polys])

    def __call__(self, point) -> np.ndarray:
        return np.array([p(point) for p in self.polys])


@dataclass(frozen=True)
class CoeffMatrix:
    """Coefficient matrix ``C(P)`` with its column basis; ``P = C(P) x^(<=d)``."""

    matrix: np.ndarray
    basis: MonomialBasis

    @property
    def shape(self):
        return self.matrix.shape

    def rows_as_system(self) -> PolySystem:
        return PolySystem(self.basis.nvars, [Polynomial.from_vector(r, self.basis) for r in self.matrix])


def coefficient_matrix(P: PolySystem, d: int | None = None) -> CoeffMatrix:
    """Rows hold the coefficients of each polynomial against the degree-``d`` basis."""
    if d is None:
        d = max(P.degree, 0)
    if d < P.degree:
        raise ValueError(f"degree bound {d} is below the system degree {P.degree}")
    basis = monomial_basis(P.nvars, d)
    mat = np.zeros((len(P), len(basis)))
    for i, p in enumerate(P):
        for m, c in p.terms.items():
            mat[i, basis.index[m]] = c
    mat.setflags(write=False)
    return CoeffMatrix(mat, basis)


def prolongation_matrix(P: PolySystem, target: int) -> CoeffMatrix:
    """``C`` of all products ``x^alpha p`` with ``deg(x^alpha p) <= target``."""
    basis = monomial_basis(P.nvars, target)
    rows = []
    for p in P:
        dp = p.degree
        if dp < 0 or dp > target:
            continue
        items = [(basis.index.get(m), m, c) for m, c in p.terms.items()]
        for e in range(target - dp + 1):
            for mult in monomials_of_degree(P.nvars, e):
                row = np.zeros(len(basis))
                for _, m, c in items:
                    row[basis.index[m * mult]] = c
                rows.append(row)
    mat = np.array(rows) if rows else np.zeros((0, len(basis)))
    mat.setflags(write=False)
    return CoeffMatrix(mat, basis)


def prolong_system(P: PolySystem, k: int, degree: int | None = None) -> PolySystem:
    """``Pro^k(P)``: every ``x^alpha p`` of degree ``<= deg(P) + k``.

    ``degree`` overrides ``deg(P)`` when the system lives in a larger ``J^d``.
    """
    if k < 0:
        raise ValueError(f"prolongation order must be >= 0, got {k}")
    base = P.degree if degree is None else degree
    if base < 0:
        return PolySystem(P.nvars)
    out = []
    for p in P:
        if p.is_zero():
            continue
        for e in range(base + k - p.degree + 1):
            for mult in monomials_of_degree(P.nvars, e):
                out.append(p.shift(mult))
    return PolySystem(P.nvars, out)


def _echelon(B: np.ndarray, tol: float) -> np.ndarray:
    """Reduced row echelon form of ``B`` along the column order, partial pivoting."""
    R = np.array(B, dtype=float)
    m, ncols = R.shape
    row = 0
    for j in range(ncols):
        if row == m:
            break
        p = row + int(np.argmax(np.abs(R[row:, j])))
        if abs(R[p, j]) <= tol:
            continue
        R[[row, p]] = R[[p, row]]
        R[row] /= R[row, j]
        others = np.arange(m) != row
        R[others] -= np.outer(R[others, j], R[row])
        R[others, j] = 0.0
        row += 1
    return R[:row]


def extract_generators(S, basis: MonomialBasis, normalize: bool = True, reduced: bool = True,
                       rtol: float = CLEANUP_RTOL, pivot_tol: float = 1e-7) -> PolySystem:
    """Polynomials spanning ``S`` (an object with an orthonormal ``basis`` of rows).

    ``reduced`` echelonizes the rows first so each generator has a distinct
    leading monomial with coefficient 1; otherwise ``normalize`` scales each
    leading coefficient to 1.  Small terms are dropped either way.
    """
    B = np.atleast_2d(np.asarray(getattr(S, "basis", S), dtype=float))
    if B.size == 0:
        return PolySystem(basis.nvars)
    if B.shape[1] != len(basis):
        raise ValueError(f"subspace vectors have length {B.shape[1]}, basis has {len(basis)} monomials")
    if reduced:
        B = _echelon(B, pivot_tol * max(1.0, float(np.max(np.abs(B)))))
    out = []
    for v in B:
        p = Polynomial.from_vector(v, basis).cleaned(rtol)
        if p.is_zero():
            continue
        if normalize and not reduced:
            p = p.normalized(pivot_tol)
        out.append(p)
    return PolySystem(basis.nvars, out)
