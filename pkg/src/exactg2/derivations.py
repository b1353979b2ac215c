"""Derivation algebras of (numeric) Lie algebras.

The Leibniz identity D[x, y] = [Dx, y] + [x, Dy] is linear in the entries of
D, so Der(n) is the kernel of a rational matrix.  Entries are unknowns in
row-major order; the kernel is computed with pivots on the latest unknowns,
which makes the free parameters the earliest nonzero entries of each row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .lie import LieAlgebra
from .linalg import ExactMatrix, kernel_rows, rank_rows
from .ring import Polynomial, Registry, UsageError, numbered_registry, to_scalar


@dataclass
class DerivationSpace:
    algebra: LieAlgebra
    dimension: int
    basis: list                 # rational ExactMatrix per parameter
    generic: ExactMatrix        # sum of params * basis
    registry: Registry
    free_entries: list = field(default_factory=list)   # (row, col), 1-based, one per parameter

    @property
    def parameters(self):
        return list(self.registry.names)

    def instantiate(self, values) -> ExactMatrix:
        """Rational derivation for ``{name: value}`` (missing names are 0)."""
        point = {n: to_scalar(values.get(n, 0)) for n in self.registry.names}
        return self.generic.evaluate(point)


def leibniz_rows(n: LieAlgebra):
    """Rows of the linear system whose kernel is Der(n), unknowns x[(r-1)*dim + (c-1)] = D[r][c]."""
    n.require_numeric("the derivation space")
    dim = n.dim
    c = {}
    for i in range(1, dim + 1):
        for j in range(1, dim + 1):
            for k in range(1, dim + 1):
                v = n.structure_constant(i, j, k)
                if v:
                    c[(i, j, k)] = v.constant_value()

    def var(r, col):
        return (r - 1) * dim + (col - 1)

    rows = []
    for i in range(1, dim + 1):
        for j in range(i + 1, dim + 1):
            for k in range(1, dim + 1):
                row = [Fraction(0)] * (dim * dim)
                for l in range(1, dim + 1):
                    # D[e_i, e_j] component k
                    x = c.get((i, j, l))
                    if x:
                        row[var(k, l)] += x
                    # [D e_i, e_j] and [e_i, D e_j]
                    y = c.get((l, j, k))
                    if y:
                        row[var(l, i)] -= y
                    z = c.get((i, l, k))
                    if z:
                        row[var(l, j)] -= z
                if any(row):
                    rows.append(row)
    return rows


def derivation_space(n: LieAlgebra, prefix: str = "a") -> DerivationSpace:
    """Der(n) with a generic element in fresh parameters ``a1, a2, ..``."""
    dim = n.dim
    rows = leibniz_rows(n)
    kernel = kernel_rows(rows, dim * dim, reverse=True) if rows else [
        [Fraction(int(i == j)) for i in range(dim * dim)] for j in range(dim * dim)]
    reg = numbered_registry(prefix, len(kernel))
    basis = []
    free = []
    generic = [[reg.zero] * dim for _ in range(dim)]
    for idx, vec in enumerate(kernel):
        basis.append(ExactMatrix([vec[r * dim:(r + 1) * dim] for r in range(dim)]))
        # the free entry of a kernel vector is its first nonzero slot with value 1 that no other vector uses
        pos = _free_slot(vec, kernel, idx)
        free.append((pos // dim + 1, pos % dim + 1))
        a = reg.var(reg.names[idx])
        for p, x in enumerate(vec):
            if x:
                r, col = divmod(p, dim)
                generic[r][col] = generic[r][col] + a.scale(x)
    return DerivationSpace(n, len(kernel), basis, ExactMatrix(generic, reg), reg, free)


def _free_slot(vec, kernel, idx):
    for p, x in enumerate(vec):
        if x == 1 and all(not other[p] for j, other in enumerate(kernel) if j != idx):
            return p
    raise AssertionError("kernel vector without a free slot")


def is_derivation(n: LieAlgebra, D: ExactMatrix):
    """``None`` when D satisfies Leibniz on every basis pair, else the first failing pair (i, j).

    Symbolic entries (in D or in the structure constants) are checked as
    polynomial identities.
    """
    dim = n.dim
    if D.shape != (dim, dim):
        raise UsageError(f"matrix of shape {D.shape} on a {dim}-dimensional algebra")
    reg = n.registry
    if len(D.registry) and D.registry != reg:
        reg = D.registry if not len(reg) else reg + D.registry
    Dm = D.lift(reg) if D.registry != reg else D
    d = [[Dm.rows[r][c] for c in range(dim)] for r in range(dim)]
    cst = {}
    for i in range(1, dim + 1):
        for j in range(1, dim + 1):
            if i != j:
                for k in range(1, dim + 1):
                    v = n.structure_constant(i, j, k)
                    if v:
                        cst[(i, j, k)] = v.lift(reg) if v.registry != reg else v
    zero = reg.zero
    for i in range(1, dim + 1):
        for j in range(i + 1, dim + 1):
            for k in range(1, dim + 1):
                total = zero
                for l in range(1, dim + 1):
                    x = cst.get((i, j, l))
                    if x and d[k - 1][l - 1]:
                        total = total + x * d[k - 1][l - 1]
                    y = cst.get((l, j, k))
                    if y and d[l - 1][i - 1]:
                        total = total - y * d[l - 1][i - 1]
                    z = cst.get((i, l, k))
                    if z and d[l - 1][j - 1]:
                        total = total - z * d[l - 1][j - 1]
                if total:
                    return (i, j)
    return None


def inner_derivation(n: LieAlgebra, i: int) -> ExactMatrix:
    return n.ad_matrix([int(j == i) for j in range(1, n.dim + 1)])


def commutator(a: ExactMatrix, b: ExactMatrix) -> ExactMatrix:
    return a @ b - b @ a


def align_parameters(ours: DerivationSpace, theirs: ExactMatrix):
    """Express our parameters through the entries of another generic derivation.

    Returns ``{our_name: Polynomial in theirs.registry}`` when ``theirs`` spans
    the same subspace (checked entrywise after substitution), else ``None``.
    """
    mapping = {}
    for name, (r, c) in zip(ours.registry.names, ours.free_entries):
        mapping[name] = theirs.rows[r - 1][c - 1]
    treg = theirs.registry
    moved = ExactMatrix([[x.subs(mapping, treg) for x in row] for row in ours.generic.rows], treg)
    if moved != theirs:
        return None
    # the substituted parameters must stay independent, otherwise theirs is a proper subfamily
    rows = []
    for v in mapping.values():
        coeffs, const = v.linear_coefficients() if v.degree() <= 1 else (None, None)
        if coeffs is None or const:
            return None
        rows.append([to_scalar(coeffs.get(n, 0)) for n in treg.names])
    if rank_rows(rows, len(treg)) < ours.dimension:
        return None
    return mapping


def is_nilpotent_matrix(D: ExactMatrix) -> bool:
    """D^dim == 0 (numeric matrices only)."""
    p = D
    for _ in range(D.nrows - 1):
        p = p @ D
    return p.is_zero()
