"""Lie algebras given by the differentials of their dual basis.

Convention throughout: for a 1-form eta, d(eta)(x, y) = -eta([x, y]).  With
the determinant pairing e^{ij}(e_i, e_j) = 1 this means

    [e_i, e_j] = sum_k c^k_ij e_k   <=>   de^k = -sum_{i<j} c^k_ij e^{ij}.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .exterior import KForm, _position, dstar_action, change_basis as change_form_basis, indices_of, mask_of, wedge
from .linalg import ExactMatrix, inverse_rows, kernel_rows, rref_rows
from .ring import EMPTY, Polynomial, Registry, UsageError, format_scalar, to_scalar


@lru_cache(maxsize=None)
def form_basis(dim: int, k: int) -> tuple:
    """Bitmasks of the basis k-forms, ordered by multi-index."""
    return tuple(mask_of(c) for c in combinations(range(1, dim + 1), k))


@lru_cache(maxsize=None)
def form_index(dim: int, k: int) -> dict:
    return {m: i for i, m in enumerate(form_basis(dim, k))}


def form_to_vector(a: KForm):
    """Coefficient vector of a form in the ordered basis of its degree."""
    idx = form_index(a.dim, a.degree)
    zero = a.registry.zero if not a.is_numeric() else Fraction(0)
    v = [zero] * len(idx)
    numeric = a.is_numeric()
    for m, c in a.coeffs.items():
        v[idx[m]] = c.constant_value() if numeric else c
    return v


def vector_to_form(v, dim: int, k: int, registry: Registry = EMPTY) -> KForm:
    basis = form_basis(dim, k)
    return KForm(dim, k, {m: x for m, x in zip(basis, v) if x}, registry)


class LieAlgebra:
    """A Lie algebra stored through the differentials ``de^1 .. de^n``.

    ``ideal`` optionally designates a nilpotent ideal (rational basis vectors,
    stored in reduced echelon form).  Polynomial structure constants are
    allowed for symbolic families; numeric checks refuse them.
    """

    def __init__(self, differentials, registry: Registry | None = None, ideal=None, name: str = ""):
        diffs = list(differentials)
        self.dim = len(diffs)
        if registry is None:
            registry = EMPTY
            for f in diffs:
                if len(f.registry):
                    registry = f.registry
                    break
        self.registry = registry
        checked = []
        for k, f in enumerate(diffs, start=1):
            if f.dim != self.dim:
                raise UsageError(f"de^{k} lives in dimension {f.dim}, expected {self.dim}")
            if f and f.degree != 2:
                raise UsageError(f"de^{k} must be a 2-form")
            checked.append(f.lift(registry) if f else KForm.zero(self.dim, 2, registry))
        self.differentials = tuple(checked)
        self.name = name
        self.ideal = None if ideal is None else _echelon_basis(ideal, self.dim)
        self._dcache = {}

    # -- construction -----------------------------------------------------
    @classmethod
    def from_brackets(cls, dim, brackets, registry=EMPTY, ideal=None, name=""):
        """Build from ``{(i, j): vector}`` meaning [e_i, e_j] = sum_k vector[k-1] e_k."""
        diffs = [dict() for _ in range(dim)]
        for (i, j), vec in brackets.items():
            if i == j:
                raise UsageError(f"bracket [e{i},e{i}] must vanish")
            sgn = 1
            if i > j:
                i, j, sgn = j, i, -1
            for k, c in enumerate(vec, start=1):
                if c:
                    key = (i, j)
                    diffs[k - 1][key] = diffs[k - 1].get(key, 0) - sgn * (c if isinstance(c, Polynomial)
                                                                          else to_scalar(c))
        return cls([KForm(dim, 2, d, registry) for d in diffs], registry, ideal, name)

    @classmethod
    def abelian(cls, dim, name=""):
        return cls([KForm.zero(dim, 2) for _ in range(dim)], name=name)

    def with_ideal(self, ideal):
        return LieAlgebra(self.differentials, self.registry, ideal, self.name)

    def renamed(self, name):
        return LieAlgebra(self.differentials, self.registry, self.ideal, name)

    # -- structure --------------------------------------------------------
    def is_numeric(self) -> bool:
        return all(f.is_numeric() for f in self.differentials)

    def require_numeric(self, what: str):
        if not self.is_numeric():
            raise UsageError(f"{what} needs numeric structure constants; instantiate the symbolic family first")

    def structure_constant(self, i, j, k):
        """c^k_ij as a Polynomial."""
        if i == j:
            return self.registry.zero
        if i < j:
            return -self.differentials[k - 1].coefficient((i, j))
        return self.differentials[k - 1].coefficient((j, i))

    def bracket_basis(self, i, j):
        return [self.structure_constant(i, j, k) for k in range(1, self.dim + 1)]

    def bracket_table(self) -> dict:
        """Nonzero brackets ``{(i, j): [c^1_ij, ..]}`` for i < j."""
        table = {}
        for i in range(1, self.dim + 1):
            for j in range(i + 1, self.dim + 1):
                v = self.bracket_basis(i, j)
                if any(v):
                    table[(i, j)] = v
        return table

    def bracket(self, x, y):
        """[x, y] of numeric coordinate vectors."""
        self.require_numeric("bracket of vectors")
        out = [Fraction(0)] * self.dim
        for i, xi in enumerate(x, start=1):
            if not xi:
                continue
            for j, yj in enumerate(y, start=1):
                if not yj or i == j:
                    continue
                for k in range(1, self.dim + 1):
                    c = self.structure_constant(i, j, k)
                    if c:
                        out[k - 1] = out[k - 1] + xi * yj * c.constant_value()
        return out

    def ad_matrix(self, x) -> ExactMatrix:
        """Matrix of ad_x (column j holds [x, e_j])."""
        dim = self.dim
        reg = self.registry
        cols = []
        for j in range(1, dim + 1):
            col = [reg.zero] * dim
            for i, xi in enumerate(x, start=1):
                if not xi or i == j:
                    continue
                for k in range(1, dim + 1):
                    c = self.structure_constant(i, j, k)
                    if c:
                        col[k - 1] = col[k - 1] + c * xi
            cols.append(col)
        return ExactMatrix([list(r) for r in zip(*cols)], reg)

    # -- Chevalley-Eilenberg differential ---------------------------------
    def d_basis(self, mask: int) -> KForm:
        """d(e^I) for the basis monomial with bitmask ``mask``."""
        hit = self._dcache.get(mask)
        if hit is not None:
            return hit
        if mask == 0:
            out = KForm.zero(self.dim, 1, self.registry)
        else:
            low = mask & -mask
            i = low.bit_length()
            rest = mask ^ low
            head = self.differentials[i - 1]
            if rest:
                tail = KForm._raw(self.dim, bin(rest).count("1"), {rest: self.registry.one}, self.registry)
                out = wedge(head, tail) - wedge(KForm.basis(self.dim, (i,), 1, self.registry), self.d_basis(rest))
            else:
                out = head
        self._dcache[mask] = out
        return out

    def d(self, a: KForm) -> KForm:
        return ce_differential(self, a)

    def d_matrix(self, k: int):
        """Numeric matrix of d: Lambda^k -> Lambda^{k+1} (columns = images of basis forms)."""
        self.require_numeric("the differential matrix")
        cols = []
        for m in form_basis(self.dim, k):
            img = self.d_basis(m) if k else KForm.zero(self.dim, 1)
            cols.append(form_to_vector(img) if img else [Fraction(0)] * len(form_basis(self.dim, k + 1)))
        rows = len(form_basis(self.dim, k + 1))
        return [[cols[c][r] for c in range(len(cols))] for r in range(rows)]

    # -- change of basis --------------------------------------------------
    def change_basis(self, P: ExactMatrix, name: str = "") -> "LieAlgebra":
        """The same algebra in the dual basis E^i = sum_j P[i][j] e^j."""
        diffs = []
        for i in range(self.dim):
            acc = KForm.zero(self.dim, 2, self.registry)
            for j in range(self.dim):
                pij = P.rows[i][j]
                if pij:
                    acc = acc + self.differentials[j].scale(pij.constant_value())
            diffs.append(change_form_basis(acc, P) if acc else KForm.zero(self.dim, 2, self.registry))
        ideal = None
        if self.ideal is not None:
            # vector coordinates transform by P itself: E^i(v) = sum_j P[i][j] v_j
            ideal = [[sum((P.rows[i][j].constant_value() * v[j] for j in range(self.dim)), Fraction(0))
                      for i in range(self.dim)] for v in self.ideal]
        return LieAlgebra(diffs, self.registry, ideal, name or self.name)

    def __eq__(self, other):
        return (isinstance(other, LieAlgebra) and self.dim == other.dim
                and all(a == b for a, b in zip(self.differentials, other.differentials)))

    def __hash__(self):
        return hash(tuple(self.differentials))

    def __repr__(self):
        from .catalog import render_structure_equations
        return f"LieAlgebra({render_structure_equations(self)})"


def _t(m):
    return [list(r) for r in zip(*m)]


def _echelon_basis(vectors, dim):
    vecs = []
    for v in vectors:
        if isinstance(v, int):
            vecs.append([Fraction(int(j == v)) for j in range(1, dim + 1)])
        else:
            v = [to_scalar(x) for x in v]
            if len(v) != dim:
                raise UsageError(f"ideal vector of length {len(v)} in dimension {dim}")
            vecs.append(v)
    red, _ = rref_rows(vecs, dim) if vecs else ([], [])
    return tuple(tuple(r) for r in red)


def ce_differential(g: LieAlgebra, a: KForm) -> KForm:
    """Chevalley-Eilenberg differential of a form on ``g``."""
    if a.dim != g.dim:
        raise UsageError(f"form of dimension {a.dim} on a {g.dim}-dimensional algebra")
    if a.degree >= g.dim:
        return KForm.zero(g.dim, a.degree + 1, g.registry)
    if a.degree == 0:
        return KForm.zero(g.dim, 1, g.registry)
    result = KForm.zero(g.dim, a.degree + 1, g.registry)
    for m, c in a.coeffs.items():
        dm = g.d_basis(m)
        if dm:
            result = result + dm.scale(c)
    return result


# ---------------------------------------------------------------------------
# Jacobi
# ---------------------------------------------------------------------------


def validate_jacobi(g: LieAlgebra):
    """``None`` when the Jacobi identity holds, else the first failing triple (i, j, k)."""
    g.require_numeric("Jacobi validation")
    n = g.dim
    basis = [[Fraction(int(a == b)) for a in range(1, n + 1)] for b in range(1, n + 1)]
    for i, j, k in combinations(range(1, n + 1), 3):
        x, y, z = basis[i - 1], basis[j - 1], basis[k - 1]
        s = [a + b + c for a, b, c in zip(g.bracket(x, g.bracket(y, z)),
                                          g.bracket(y, g.bracket(z, x)),
                                          g.bracket(z, g.bracket(x, y)))]
        if any(s):
            return (i, j, k)
    return None


# ---------------------------------------------------------------------------
# Cohomology
# ---------------------------------------------------------------------------


class CohomologyBasis:
    """H^k with a chosen list of closed representatives and a coordinate map."""

    def __init__(self, g: LieAlgebra, k: int, boundary_rows, boundary_pivots, representatives):
        self.algebra = g
        self.degree = k
        self._brows = boundary_rows
        self._bpiv = boundary_pivots
        self.representatives = list(representatives)
        self.betti = len(self.representatives)
        reduced = [self._reduce(form_to_vector(r)) for r in self.representatives]
        if reduced:
            red, piv = rref_rows(reduced, len(reduced[0]))
            if len(piv) != len(reduced):
                raise UsageError("representatives are not independent in cohomology")
            square = [[row[p] for p in piv] for row in reduced]
            self._piv = piv
            self._inv = inverse_rows(square)
        else:
            self._piv, self._inv = [], []

    def _reduce(self, v):
        v = list(v)
        for row, p in zip(self._brows, self._bpiv):
            f = v[p]
            if f:
                v = [a - f * b if b else a for a, b in zip(v, row)]
        return v

    def coordinates(self, closed: KForm):
        """Coordinates of [closed] along the representatives (polynomial-valued for symbolic input)."""
        if closed.degree != self.degree and closed:
            raise UsageError(f"expected a {self.degree}-form")
        v = self._reduce(form_to_vector(closed) if closed else
                         [Fraction(0)] * len(form_basis(self.algebra.dim, self.degree)))
        picked = [v[p] for p in self._piv]
        out = []
        for c in range(self.betti):
            acc = Fraction(0)
            for r in range(self.betti):
                coef = self._inv[r][c]
                if coef and picked[r]:
                    acc = picked[r] * coef + acc
            out.append(acc)
        return out

    def is_exact(self, closed: KForm) -> bool:
        return not any(self.coordinates(closed))


@dataclass
class CohomologyResult:
    degree: int
    betti: int
    representatives: list
    basis: CohomologyBasis = field(repr=False)

    def coordinates(self, closed: KForm):
        return self.basis.coordinates(closed)


def _boundaries(g: LieAlgebra, k: int):
    if k == 0:
        return [], []
    mat = g.d_matrix(k - 1)
    cols = [list(c) for c in zip(*mat)] if mat and mat[0] else []
    return rref_rows(cols, len(form_basis(g.dim, k))) if cols else ([], [])


def cycles(g: LieAlgebra, k: int):
    n_k = len(form_basis(g.dim, k))
    if k == g.dim:
        return [[Fraction(int(i == j)) for i in range(n_k)] for j in range(n_k)]
    return kernel_rows(g.d_matrix(k), n_k)


def cohomology(g: LieAlgebra, k: int, representatives=None) -> CohomologyResult:
    """H^k(g) over the coefficient field, with canonical or supplied representatives."""
    g.require_numeric("cohomology")
    if not 0 <= k <= g.dim:
        raise UsageError(f"degree {k} outside 0..{g.dim}")
    brows, bpiv = _boundaries(g, k)
    if representatives is None:
        z = cycles(g, k)
        n_k = len(form_basis(g.dim, k))
        reduced = []
        for v in z:
            for row, p in zip(brows, bpiv):
                f = v[p]
                if f:
                    v = [a - f * b for a, b in zip(v, row)]
            reduced.append(v)
        red, _ = rref_rows(reduced, n_k) if reduced else ([], [])
        representatives = [vector_to_form(v, g.dim, k) for v in red]
    else:
        for r in representatives:
            if ce_differential(g, r):
                raise UsageError(f"representative {r} is not closed")
    basis = CohomologyBasis(g, k, brows, bpiv, representatives)
    return CohomologyResult(k, basis.betti, basis.representatives, basis)


def betti_numbers(g: LieAlgebra) -> tuple:
    """(b_0, .., b_dim) computed from ranks of the differential matrices."""
    g.require_numeric("Betti numbers")
    ranks = [0]
    for k in range(g.dim):
        mat = g.d_matrix(k)
        ranks.append(len(rref_rows(mat, len(mat[0]))[1]) if mat and mat[0] else 0)
    ranks.append(0)
    out = []
    for k in range(g.dim + 1):
        n_k = len(form_basis(g.dim, k))
        out.append(n_k - ranks[k + 1] - ranks[k])
    return tuple(out)


# ---------------------------------------------------------------------------
# Central series and unimodularity
# ---------------------------------------------------------------------------


@dataclass
class SeriesChain:
    terms: list          # echelon bases, terms[0] = the ideal itself
    nilpotent: bool

    def dims(self):
        return [len(t) for t in self.terms]


class NotAnIdealError(UsageError):
    def __init__(self, x, y, value):
        super().__init__(f"[{x}, {y}] = {value} leaves the subspace")
        self.witness = (x, y, value)


def _in_span(vec, basis_rows, pivots):
    v = list(vec)
    for row, p in zip(basis_rows, pivots):
        f = v[p]
        if f:
            v = [a - f * b for a, b in zip(v, row)]
    return not any(v)


def central_series(g: LieAlgebra, ideal=None) -> SeriesChain:
    """Descending central series n^0 = ideal, n^i = [n, n^{i-1}] until it stabilises."""
    g.require_numeric("the central series")
    if ideal is None:
        ideal = g.ideal
    if ideal is None:
        raise UsageError("no ideal designated")
    base = [list(v) for v in _echelon_basis(ideal, g.dim)]
    piv = rref_rows(base, g.dim)[1] if base else []
    full = [[Fraction(int(i == j)) for i in range(g.dim)] for j in range(g.dim)]
    for x in full:
        for y in base:
            z = g.bracket(x, y)
            if not _in_span(z, base, piv):
                raise NotAnIdealError(_fmt_vec(x), _fmt_vec(y), _fmt_vec(z))
    terms = [base]
    while True:
        prev = terms[-1]
        spans = [g.bracket(x, y) for x in base for y in prev]
        spans = [s for s in spans if any(s)]
        nxt = rref_rows(spans, g.dim)[0] if spans else []
        if len(nxt) == len(prev):
            return SeriesChain(terms, nilpotent=False)
        terms.append(nxt)
        if not nxt:
            return SeriesChain(terms, nilpotent=True)


def _fmt_vec(v):
    parts = []
    for i, x in enumerate(v, start=1):
        if x:
            parts.append(f"{format_scalar(x)}*e_{i}")
    return " + ".join(parts) or "0"


def quotient_traces(g_ad: ExactMatrix, chain: SeriesChain, dim: int):
    """Traces of a linear map on each quotient n^i / n^{i+1} of the chain.

    ``g_ad`` must preserve every term.  Entries may be polynomials, so this
    is shared by the numeric check and the symbolic constraint builder.
    """
    traces = []
    for i in range(len(chain.terms) - 1 if not chain.terms[-1] else len(chain.terms)):
        top = chain.terms[i]
        below = chain.terms[i + 1] if i + 1 < len(chain.terms) else []
        comp = _complement(top, below, dim)
        basis = list(below) + comp
        if not basis:
            traces.append(g_ad.registry.zero)
            continue
        inv = _left_inverse(basis, dim)
        tr = g_ad.registry.zero
        for idx, w in enumerate(comp, start=len(below)):
            img = g_ad.apply(w)
            # coordinate of img along basis vector idx
            coord = g_ad.registry.zero
            for c, x in enumerate(img):
                if x and inv[idx][c]:
                    coord = coord + x * inv[idx][c]
            tr = tr + coord
        traces.append(tr)
    return traces


def _complement(top, below, dim):
    """Vectors of ``top`` extending a basis of ``below`` to one of ``top``."""
    piv_rows = [list(r) for r in below]
    comp = []
    for v in top:
        trial = piv_rows + [list(v)]
        if len(rref_rows(trial, dim)[1]) > len(piv_rows):
            piv_rows.append(list(v))
            comp.append(list(v))
    return comp


def _left_inverse(basis, dim):
    """Rows L with L . basis[j] = unit vector j (basis given as a list of vectors)."""
    # solve via the pivot columns of the basis
    mat = [list(v) for v in basis]           # k x dim
    _, piv = rref_rows(mat, dim)
    square = [[v[p] for p in piv] for v in mat]  # k x k, rows = basis vectors
    inv = inverse_rows(_t(square))           # inverse of (columns = basis vectors)
    out = []
    for r in range(len(basis)):
        row = [Fraction(0)] * dim
        for c, p in enumerate(piv):
            row[p] = inv[r][c]
        out.append(row)
    return out


@dataclass
class UnimodularityReport:
    unimodular: bool
    strongly_unimodular: bool
    failures: list          # (basis index X, quotient index i, trace)
    witness: tuple | None   # deepest failing quotient, first X
    series: SeriesChain


def unimodularity(g: LieAlgebra, ideal=None) -> UnimodularityReport:
    """Unimodularity and strong unimodularity relative to a designated nilpotent ideal."""
    g.require_numeric("unimodularity")
    ideal = ideal if ideal is not None else g.ideal
    if ideal is None:
        raise UsageError("strong unimodularity needs a designated nilpotent ideal")
    chain = central_series(g, ideal)
    if not chain.nilpotent:
        raise UsageError("designated ideal is not nilpotent")
    unimodular = True
    failures = []
    for x in range(1, g.dim + 1):
        vec = [int(i == x) for i in range(1, g.dim + 1)]
        ad = g.ad_matrix(vec)
        if sum((ad.rows[i][i].constant_value() for i in range(g.dim)), Fraction(0)):
            unimodular = False
        for i, tr in enumerate(quotient_traces(ad, chain, g.dim)):
            value = tr.constant_value()
            if value:
                failures.append((x, i, value))
    witness = None
    if failures:
        deepest = max(f[1] for f in failures)
        witness = min((f for f in failures if f[1] == deepest), key=lambda f: f[0])
    return UnimodularityReport(unimodular, not failures, failures, witness, chain)


def is_unimodular(g: LieAlgebra) -> bool:
    g.require_numeric("unimodularity")
    for x in range(1, g.dim + 1):
        vec = [int(i == x) for i in range(1, g.dim + 1)]
        ad = g.ad_matrix(vec)
        if sum((ad.rows[i][i].constant_value() for i in range(g.dim)), Fraction(0)):
            return False
    return True


# ---------------------------------------------------------------------------
# Semidirect extensions
# ---------------------------------------------------------------------------


def semidirect_extend(n: LieAlgebra, D: ExactMatrix, check: bool = True, name: str = "") -> LieAlgebra:
    """n x|_D R with a new generator e_{dim+1} acting by [e_{dim+1}, x] = Dx."""
    from .derivations import is_derivation  # local import: derivations builds on this module

    if D.shape != (n.dim, n.dim):
        raise UsageError(f"derivation of shape {D.shape} on a {n.dim}-dimensional algebra")
    if check and D.is_numeric() and n.is_numeric():
        bad = is_derivation(n, D)
        if bad is not None:
            raise UsageError(f"not a derivation: Leibniz fails on (e{bad[0]}, e{bad[1]})")
    reg = n.registry
    if len(D.registry):
        reg = D.registry if not len(reg) else reg + D.registry
    m = n.dim + 1
    t = KForm.basis(m, (m,), 1, reg)
    diffs = []
    for i in range(1, n.dim + 1):
        hat = _embed(n.differentials[i - 1], m, reg)
        dstar = dstar_action(_pad(D, reg), KForm.basis(m, (i,), 1, reg))
        diffs.append(hat + wedge(dstar, t))
    diffs.append(KForm.zero(m, 2, reg))
    return LieAlgebra(diffs, reg, ideal=list(range(1, n.dim + 1)), name=name)


def _embed(a: KForm, dim: int, reg) -> KForm:
    return KForm._raw(dim, a.degree, {k: v.lift(reg) for k, v in a.coeffs.items()}, reg)


def _pad(D: ExactMatrix, reg) -> ExactMatrix:
    n = D.nrows
    rows = [list(r) + [0] for r in D.lift(reg).rows] + [[0] * (n + 1)]
    return ExactMatrix(rows, reg)


def restrict_to_ideal(g: LieAlgebra, count: int) -> LieAlgebra:
    """The subalgebra spanned by e_1..e_count (must be closed under brackets)."""
    diffs = []
    for k in range(count):
        f = g.differentials[k]
        coeffs = {}
        for m, c in f.coeffs.items():
            if m >> count:
                continue
            coeffs[m] = c
        diffs.append(KForm._raw(count, 2, coeffs, g.registry))
    return LieAlgebra(diffs, g.registry)


def derivation_part(g: LieAlgebra, count: int) -> ExactMatrix:
    """Matrix of ad_{e_{count+1}} restricted to span(e_1..e_count)."""
    x = [int(i == count + 1) for i in range(1, g.dim + 1)]
    ad = g.ad_matrix(x)
    return ExactMatrix([list(r[:count]) for r in ad.rows[:count]], g.registry)
