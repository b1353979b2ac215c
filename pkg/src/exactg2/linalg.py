"""Exact linear algebra over Q, Q(sqrt 3) and polynomial rings.

Two layers live here.  The ``*_rows`` helpers work on plain lists of field
elements and are what the cohomology code calls in its inner loops.
:class:`ExactMatrix` wraps polynomial entries and carries the public
operations (rref/kernel, determinants, characteristic polynomial).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

import networkx as nx

from .ring import (
    Polynomial,
    QSqrt3,
    Registry,
    EMPTY,
    UsageError,
    format_scalar,
    is_rational,
    to_scalar,
)

# ---------------------------------------------------------------------------
# Field-level routines on lists of scalars
# ---------------------------------------------------------------------------


def rref_rows(rows, ncols=None, reverse=False):
    """Reduced row echelon form of a list of scalar rows.

    With ``reverse=True`` columns are scanned right to left, so pivots land on
    the latest possible columns and free variables are the earliest ones.

    Returns ``(reduced_rows, pivot_columns)``; zero rows are dropped.
    """
    m = [list(r) for r in rows]
    if ncols is None:
        ncols = len(m[0]) if m else 0
    order = range(ncols - 1, -1, -1) if reverse else range(ncols)
    pivots = []
    r = 0
    for c in order:
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        if inv != 1:
            m[r] = [x * inv for x in m[r]]
        pivot_row = m[r]
        nz = [j for j, x in enumerate(pivot_row) if x]
        for i in range(len(m)):
            if i != r:
                f = m[i][c]
                if f:
                    row = m[i]
                    for j in nz:
                        row[j] = row[j] - f * pivot_row[j]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rank_rows(rows, ncols=None) -> int:
    return len(rref_rows(rows, ncols)[1])


def kernel_rows(rows, ncols, reverse=False):
    """Basis of {x : rows . x = 0}, one vector per free column (free entry = 1)."""
    red, pivots = rref_rows(rows, ncols, reverse=reverse)
    pivset = set(pivots)
    basis = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, pivots):
            if row[f]:
                v[p] = -row[f]
        basis.append(v)
    return basis


def solve_rows(rows, rhs, ncols, reverse=False):
    """Solve rows . x = rhs; returns (particular, kernel basis, pivots) or None."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    # the augmented column is scanned last regardless of direction
    red, pivots = _rref_augmented(aug, ncols, reverse)
    if any(p == ncols for p in pivots):
        return None
    x = [Fraction(0)] * ncols
    for row, p in zip(red, pivots):
        x[p] = row[ncols]
    kernel = kernel_rows([row[:ncols] for row in red], ncols, reverse=reverse)
    return x, kernel, pivots


def _rref_augmented(aug, ncols, reverse):
    order = list(range(ncols - 1, -1, -1)) if reverse else list(range(ncols))
    m = [list(r) for r in aug]
    pivots = []
    r = 0
    for c in order + [ncols]:
        if r == len(m):
            break
        p = next((i for i in range(r, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def inverse_rows(rows):
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    red, pivots = rref_rows(aug, 2 * n)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise UsageError("matrix is singular")
    return [row[n:] for row in red]


def matmul_rows(a, b):
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(r, c)), Fraction(0)) for c in bt] for r in a]


def det_rows(rows):
    """Determinant of a square scalar matrix.

    Rational input goes through integer Bareiss after clearing denominators;
    Q(sqrt 3) input through ordinary elimination.
    """
    n = len(rows)
    if n == 0:
        return Fraction(1)
    if all(is_rational(x) for r in rows for x in r):
        scale = Fraction(1)
        ints = []
        for r in rows:
            den = lcm(*(Fraction(x).denominator for x in r)) if r else 1
            scale /= den
            ints.append([int(Fraction(x) * den) for x in r])
        return scale * bareiss_int(ints)
    m = [list(r) for r in rows]
    det = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if m[i][k]), None)
        if p is None:
            return Fraction(0)
        if p != k:
            m[k], m[p] = m[p], m[k]
            det = -det
        det = det * m[k][k]
        inv = 1 / m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] * inv
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[k])]
    return to_scalar(det)


def bareiss_int(m):
    """Fraction-free Bareiss determinant of an integer matrix."""
    m = [list(r) for r in m]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            p = next((i for i in range(k + 1, n) if m[i][k]), None)
            if p is None:
                return 0
            m[k], m[p] = m[p], m[k]
            sign = -sign
        akk = m[k][k]
        for i in range(k + 1, n):
            aik = m[i][k]
            row_i, row_k = m[i], m[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * akk - aik * row_k[j]) // prev
        prev = akk
    return sign * m[n - 1][n - 1]


def det_cofactor(rows):
    """Laplace expansion along the first row; the brute-force oracle."""
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        a = rows[0][j]
        if not a:
            continue
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        t = a * det_cofactor(minor)
        t = t if j % 2 == 0 else -t
        total = t if total is None else total + t
    if total is None:
        return rows[0][0] * 0
    return total


# ---------------------------------------------------------------------------
# Polynomial matrices
# ---------------------------------------------------------------------------


class ExactMatrix:
    """Rectangular matrix of :class:`Polynomial` entries over one registry."""

    __slots__ = ("registry", "rows")

    def __init__(self, rows, registry: Registry | None = None):
        rows = [list(r) for r in rows]
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise UsageError("ragged matrix")
        if registry is None:
            registry = next((x.registry for r in rows for x in r if isinstance(x, Polynomial)), EMPTY)
        self.registry = registry
        self.rows = tuple(
            tuple(x if isinstance(x, Polynomial) and x.registry == registry
                  else (x.lift(registry) if isinstance(x, Polynomial)
                        else Polynomial.constant(registry, x))
                  for x in r)
            for r in rows)

    @classmethod
    def identity(cls, n, registry=EMPTY):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], registry)

    @classmethod
    def zeros(cls, r, c, registry=EMPTY):
        return cls([[0] * c for _ in range(r)], registry)

    @classmethod
    def diag(cls, entries, registry=None):
        n = len(entries)
        if registry is None:
            registry = next((x.registry for x in entries if isinstance(x, Polynomial)), EMPTY)
        return cls([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)], registry)

    @property
    def shape(self):
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    @property
    def nrows(self):
        return len(self.rows)

    @property
    def ncols(self):
        return len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def is_square(self):
        return self.nrows == self.ncols

    def is_numeric(self) -> bool:
        return all(x.is_constant() for r in self.rows for x in r)

    def scalars(self):
        """Entries as scalars; raises for symbolic matrices."""
        if not self.is_numeric():
            raise UsageError("matrix has non-constant polynomial entries; use the symbolic path")
        return [[x.constant_value() for x in r] for r in self.rows]

    def lift(self, registry):
        return ExactMatrix([[x.lift(registry) for x in r] for r in self.rows], registry)

    def transpose(self):
        return ExactMatrix(list(zip(*self.rows)), self.registry)

    def __add__(self, other):
        self._check_shape(other)
        return ExactMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           self.registry)

    def __sub__(self, other):
        self._check_shape(other)
        return ExactMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                           self.registry)

    def __neg__(self):
        return ExactMatrix([[-a for a in r] for r in self.rows], self.registry)

    def scale(self, c):
        return ExactMatrix([[a * c for a in r] for r in self.rows], self.registry)

    def __matmul__(self, other):
        if self.ncols != other.nrows:
            raise UsageError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows))
        zero = self.registry.zero
        out = []
        for r in self.rows:
            row = []
            for c in cols:
                acc = zero
                for a, b in zip(r, c):
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return ExactMatrix(out, self.registry)

    def apply(self, vec):
        """Matrix times a column vector of polynomials or scalars."""
        zero = self.registry.zero
        out = []
        for r in self.rows:
            acc = zero
            for a, b in zip(r, vec):
                if a and b:
                    acc = acc + a * b
            out.append(acc)
        return out

    def _check_shape(self, other):
        if self.shape != other.shape:
            raise UsageError(f"shape mismatch {self.shape} vs {other.shape}")

    def subs(self, mapping, registry=None):
        reg = registry or self.registry
        return ExactMatrix([[x.subs(mapping, reg) for x in r] for r in self.rows], reg)

    def evaluate(self, point) -> "ExactMatrix":
        """Numeric matrix at ``point`` (name -> scalar, missing names -> 0)."""
        return ExactMatrix([[x.evaluate(point) for x in r] for r in self.rows])

    def is_zero(self):
        return all(not x for r in self.rows for x in r)

    def __eq__(self, other):
        return isinstance(other, ExactMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def to_strings(self):
        return [[str(x) for x in r] for r in self.rows]

    def __str__(self):
        cells = self.to_strings()
        width = max((len(c) for r in cells for c in r), default=1)
        return "\n".join("[" + "  ".join(c.rjust(width) for c in r) + "]" for r in cells)

    def __repr__(self):
        return f"ExactMatrix({self.to_strings()})"


def from_scalars(rows, registry=EMPTY) -> ExactMatrix:
    return ExactMatrix(rows, registry)


def mat_rref_kernel(m: ExactMatrix):
    """Return ``(rref, rank, kernel_basis)`` for a matrix with constant entries."""
    rows = m.scalars()
    red, pivots = rref_rows(rows, m.ncols)
    kernel = kernel_rows(rows, m.ncols)
    padded = red + [[Fraction(0)] * m.ncols for _ in range(m.nrows - len(red))]
    return ExactMatrix(padded, m.registry), len(pivots), kernel


def mat_det(m: ExactMatrix, method: str = "auto") -> Polynomial:
    """Exact determinant.

    ``method`` is ``"auto"``, ``"bareiss"``, ``"cofactor"`` or ``"blocks"``
    (strongly-connected block factorisation, each block by Bareiss).
    """
    if not m.is_square():
        raise UsageError(f"determinant of non-square {m.shape} matrix")
    n = m.nrows
    reg = m.registry
    if n == 0:
        return reg.one
    if method == "cofactor":
        return _as_poly(det_cofactor([list(r) for r in m.rows]), reg)
    if m.is_numeric():
        return Polynomial.constant(reg, det_rows(m.scalars()))
    if method == "blocks":
        result = reg.one
        for block in diagonal_blocks(m):
            sub = [[m.rows[i][j] for j in block] for i in block]
            d = _bareiss_poly(sub, reg) if len(block) > 4 else _as_poly(det_cofactor(sub), reg)
            if not d:
                return reg.zero
            result = result * d
        return result
    if method == "auto" and n <= 4:
        return _as_poly(det_cofactor([list(r) for r in m.rows]), reg)
    return _bareiss_poly([list(r) for r in m.rows], reg)


def _as_poly(x, reg):
    return x if isinstance(x, Polynomial) else Polynomial.constant(reg, x)


def _bareiss_poly(rows, reg):
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = None
    for k in range(n - 1):
        candidates = [i for i in range(k, n) if a[i][k]]
        if not candidates:
            return reg.zero
        p = min(candidates, key=lambda i: len(a[i][k].terms))
        if p != k:
            a[k], a[p] = a[p], a[k]
            sign = -sign
        akk = a[k][k]
        for i in range(k + 1, n):
            aik = a[i][k]
            row_i, row_k = a[i], a[k]
            for j in range(k + 1, n):
                v = row_i[j] * akk
                if aik and row_k[j]:
                    v = v - aik * row_k[j]
                row_i[j] = v if prev is None else (v.divexact(prev) if v else v)
        prev = akk
    d = a[n - 1][n - 1]
    return d if sign > 0 else -d


def diagonal_blocks(m: ExactMatrix):
    """Index sets of the diagonal blocks of a symmetric permutation to block-triangular form.

    These are the strongly connected components of the graph with an edge
    i -> j whenever entry (i, j) is nonzero; the determinant is the product of
    the block determinants.
    """
    g = nx.DiGraph()
    g.add_nodes_from(range(m.nrows))
    for i, r in enumerate(m.rows):
        for j, x in enumerate(r):
            if x and i != j:
                g.add_edge(i, j)
    return sorted(sorted(c) for c in nx.strongly_connected_components(g))


def char_poly(m: ExactMatrix, var: str = "t") -> Polynomial:
    """det(t*I - m) for a square matrix with constant entries."""
    if not m.is_square():
        raise UsageError(f"characteristic polynomial of non-square {m.shape} matrix")
    vals = m.scalars()
    reg = Registry((var,))
    t = reg.var(var)
    n = m.nrows
    rows = [[(t if i == j else reg.zero) - vals[i][j] for j in range(n)] for i in range(n)]
    if n == 0:
        return reg.one
    if n <= 4:
        return _as_poly(det_cofactor(rows), reg)
    return _bareiss_poly(rows, reg)


# ---------------------------------------------------------------------------
# Affine solution spaces of linear constraint systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearSolutionSpace:
    """Solutions of a linear system over the variables of ``registry``.

    ``particular`` and every vector in ``basis`` are indexed by registry
    position.  ``free`` lists the registry positions that stay free; the
    remaining ``pivots`` are expressed through them.
    """

    registry: Registry
    particular: tuple
    basis: tuple
    free: tuple
    pivots: tuple
    equations: tuple = field(default=())

    def expressions(self) -> dict:
        """Map each pivot variable name to its affine expression in the free variables."""
        reg = self.registry
        out = {}
        for p in self.pivots:
            expr = Polynomial.constant(reg, self.particular[p])
            for f, vec in zip(self.free, self.basis):
                if vec[p]:
                    expr = expr + reg.var(reg.names[f]).scale(vec[p])
            out[reg.names[p]] = expr
        return out

    def point(self, free_values) -> dict:
        """Full assignment from values of the free variables (name -> scalar)."""
        reg = self.registry
        vals = [to_scalar(x) for x in self.particular]
        for f, vec in zip(self.free, self.basis):
            t = to_scalar(free_values.get(reg.names[f], 0))
            if t:
                vals = [a + t * b for a, b in zip(vals, vec)]
        return {n: v for n, v in zip(reg.names, vals)}

    def contains(self, point) -> bool:
        return all(not eq.evaluate(point) for eq in self.equations)

    def free_names(self):
        return [self.registry.names[f] for f in self.free]

    def describe(self):
        return [f"{name} = {expr}" for name, expr in self.expressions().items()]


def solve_linear_system(equations, registry: Registry) -> LinearSolutionSpace:
    """Solve a list of affine-linear polynomials (each meaning ``p == 0``).

    Pivots are chosen on the latest registry variables, so e.g. ``a1 + a7``
    is solved as ``a7 = -a1``.
    """
    eqs = [e.lift(registry) if e.registry != registry else e for e in equations]
    eqs = [e for e in eqs if e]
    n = len(registry)
    rows, rhs = [], []
    for e in eqs:
        coeffs, const = e.linear_coefficients()
        rows.append([to_scalar(coeffs.get(name, 0)) for name in registry.names])
        rhs.append(-const)
    if not rows:
        basis = [tuple(Fraction(int(i == j)) for i in range(n)) for j in range(n)]
        return LinearSolutionSpace(registry, tuple([Fraction(0)] * n), tuple(basis),
                                   tuple(range(n)), (), tuple(eqs))
    sol = solve_rows(rows, rhs, n, reverse=True)
    if sol is None:
        raise UsageError("inconsistent linear system")
    x, kernel, pivots = sol
    free = [i for i in range(n) if i not in set(pivots)]
    return LinearSolutionSpace(registry, tuple(x), tuple(tuple(v) for v in kernel),
                               tuple(free), tuple(sorted(pivots)), tuple(eqs))


def substitute_linear_solution(p: Polynomial, sol: LinearSolutionSpace) -> Polynomial:
    """Replace constrained variables by their expressions in the free ones.

    The result is the zero polynomial exactly when ``p`` vanishes on the whole
    solution set.
    """
    if p.registry != sol.registry:
        if all(n in sol.registry.index for n in p.used_variables()):
            p = p.lift(sol.registry) if set(p.registry.names) <= set(sol.registry.names) \
                else p.subs({}, sol.registry)
        else:
            raise UsageError("polynomial uses variables outside the solution registry")
    return p.subs(sol.expressions())


def substitute_matrix(m: ExactMatrix, sol: LinearSolutionSpace) -> ExactMatrix:
    expr = sol.expressions()
    return ExactMatrix([[x.subs(expr) for x in r] for r in m.rows], m.registry)


def format_vector(v):
    return "(" + ", ".join(format_scalar(x) for x in v) + ")"


__all__ = [
    "ExactMatrix",
    "LinearSolutionSpace",
    "QSqrt3",
    "char_poly",
    "det_cofactor",
    "det_rows",
    "diagonal_blocks",
    "inverse_rows",
    "kernel_rows",
    "mat_det",
    "mat_rref_kernel",
    "rank_rows",
    "rref_rows",
    "solve_linear_system",
    "solve_rows",
    "substitute_linear_solution",
    "substitute_matrix",
]
