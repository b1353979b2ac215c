"""Exterior algebra of the dual of an n-dimensional space (n <= 8).

A k-form is stored as a dict from bitmask (bit i-1 set <=> e^i present) to a
nonzero :class:`Polynomial` coefficient.  Every sign in this module comes out
of :func:`_merge_sign` or :func:`_position`.
"""
from __future__ import annotations

import re
from fractions import Fraction

from .linalg import ExactMatrix, inverse_rows
from .ring import EMPTY, Polynomial, Registry, UsageError, parse_polynomial, to_scalar

MAX_DIM = 8


def mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << (i - 1)
    return m


def indices_of(mask: int) -> tuple:
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


def _position(mask: int, i: int) -> int:
    """Number of indices in ``mask`` strictly below ``i``."""
    return bin(mask & ((1 << (i - 1)) - 1)).count("1")


def _merge_sign(a: int, b: int) -> int:
    """Sign of the shuffle e^A ^ e^B -> e^(A u B) for disjoint A, B."""
    inversions = 0
    while b:
        low = b & -b
        inversions += bin(a & ~((low << 1) - 1)).count("1")
        b ^= low
    return -1 if inversions & 1 else 1


def _common_registry(r1: Registry, r2: Registry) -> Registry:
    if r1 == r2 or not len(r2):
        return r1
    if not len(r1):
        return r2
    if set(r2.names) <= set(r1.names):
        return r1
    if set(r1.names) <= set(r2.names):
        return r2
    raise UsageError(f"registry mismatch: {r1.names} vs {r2.names}")


class KForm:
    """A homogeneous k-form with polynomial coefficients."""

    __slots__ = ("dim", "degree", "coeffs", "registry")

    def __init__(self, dim: int, degree: int, coeffs=None, registry: Registry = EMPTY):
        if not 0 <= dim <= MAX_DIM:
            raise UsageError(f"dimension {dim} outside 0..{MAX_DIM}")
        self.dim = dim
        self.degree = degree
        self.registry = registry
        self.coeffs = {}
        for key, c in (coeffs or {}).items():
            mask = key if isinstance(key, int) else mask_of(key)
            if not isinstance(key, int):
                idx = tuple(key)
                if list(idx) != sorted(set(idx)):
                    raise UsageError(f"multi-index {idx} is not strictly increasing")
            if mask >> dim:
                raise UsageError(f"index out of range 1..{dim} in {indices_of(mask)}")
            if bin(mask).count("1") != degree:
                raise UsageError(f"multi-index {indices_of(mask)} has wrong degree for a {degree}-form")
            if not isinstance(c, Polynomial):
                c = Polynomial.constant(registry, c)
            elif c.registry != registry:
                c = c.lift(registry)
            if c:
                self.coeffs[mask] = c

    @classmethod
    def _raw(cls, dim, degree, coeffs, registry):
        obj = cls.__new__(cls)
        obj.dim, obj.degree, obj.coeffs, obj.registry = dim, degree, coeffs, registry
        return obj

    # -- construction -----------------------------------------------------
    @classmethod
    def basis(cls, dim, indices, coeff=1, registry=EMPTY):
        idx = tuple(indices)
        return cls(dim, len(idx), {idx: coeff}, registry)

    @classmethod
    def zero(cls, dim, degree, registry=EMPTY):
        return cls._raw(dim, degree, {}, registry)

    @classmethod
    def constant(cls, dim, value, registry=EMPTY):
        return cls(dim, 0, {(): value}, registry)

    # -- inspection -------------------------------------------------------
    def items(self):
        """(multi-index, coefficient) pairs in sorted multi-index order."""
        return sorted(((indices_of(m), c) for m, c in self.coeffs.items()), key=lambda t: t[0])

    def coefficient(self, indices) -> Polynomial:
        return self.coeffs.get(mask_of(indices), self.registry.zero)

    def top_coefficient(self) -> Polynomial:
        return self.coeffs.get((1 << self.dim) - 1, self.registry.zero)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self):
        return bool(self.coeffs)

    def is_numeric(self) -> bool:
        return all(c.is_constant() for c in self.coeffs.values())

    def lift(self, registry):
        if registry == self.registry:
            return self
        return KForm._raw(self.dim, self.degree,
                          {m: c.lift(registry) for m, c in self.coeffs.items()}, registry)

    def _align(self, other):
        if not isinstance(other, KForm):
            raise TypeError(f"expected KForm, got {type(other).__name__}")
        if other.dim != self.dim:
            raise UsageError(f"dimension mismatch: {self.dim} vs {other.dim}")
        reg = _common_registry(self.registry, other.registry)
        return self.lift(reg), other.lift(reg), reg

    # -- linear structure -------------------------------------------------
    def __add__(self, other):
        if isinstance(other, int) and other == 0:
            return self
        a, b, reg = self._align(other)
        if a.degree != b.degree and a and b:
            raise UsageError(f"cannot add a {a.degree}-form and a {b.degree}-form")
        coeffs = dict(a.coeffs)
        for m, c in b.coeffs.items():
            v = coeffs.get(m)
            v = c if v is None else v + c
            if v:
                coeffs[m] = v
            else:
                coeffs.pop(m, None)
        degree = a.degree if a else b.degree
        return KForm._raw(self.dim, degree, coeffs, reg)

    __radd__ = __add__

    def __neg__(self):
        return KForm._raw(self.dim, self.degree, {m: -c for m, c in self.coeffs.items()}, self.registry)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        reg = self.registry
        if isinstance(c, Polynomial):
            reg = _common_registry(reg, c.registry)
            c = c.lift(reg)
            base = self.lift(reg)
            coeffs = {m: v * c for m, v in base.coeffs.items()}
        else:
            c = to_scalar(c)
            coeffs = {m: v.scale(c) for m, v in self.coeffs.items()}
        return KForm._raw(self.dim, self.degree, {m: v for m, v in coeffs.items() if v}, reg)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, int) and other == 0:
            return not self.coeffs
        if not isinstance(other, KForm) or other.dim != self.dim:
            return False
        if not self.coeffs and not other.coeffs:
            return True
        if self.degree != other.degree:
            return False
        a, b, _ = self._align(other)
        return a.coeffs == b.coeffs

    def __hash__(self):
        return hash((self.dim, self.degree, frozenset((m, str(c)) for m, c in self.coeffs.items())))

    def subs(self, mapping, registry=None):
        reg = registry or self.registry
        coeffs = {}
        for m, c in self.coeffs.items():
            v = c.subs(mapping, reg)
            if v:
                coeffs[m] = v
        return KForm._raw(self.dim, self.degree, coeffs, reg)

    def evaluate(self, point):
        """Instantiate every coefficient at a point; returns a numeric form."""
        coeffs = {}
        for m, c in self.coeffs.items():
            v = c.evaluate(point)
            if v:
                coeffs[m] = Polynomial.constant(EMPTY, v)
        return KForm._raw(self.dim, self.degree, coeffs, EMPTY)

    def wedge(self, other):
        return wedge(self, other)

    def __xor__(self, other):
        return wedge(self, other)

    # -- rendering --------------------------------------------------------
    def __str__(self):
        return format_form(self)

    def __repr__(self):
        return f"KForm({self.dim}, {self.degree}, {str(self)!r})"


def wedge(*forms: KForm) -> KForm:
    """Exterior product of one or more forms of the same ambient dimension."""
    if not forms:
        raise UsageError("wedge of nothing")
    result = forms[0]
    for f in forms[1:]:
        a, b, reg = result._align(f)
        degree = a.degree + b.degree
        coeffs = {}
        if degree <= a.dim:
            for ma, ca in a.coeffs.items():
                for mb, cb in b.coeffs.items():
                    if ma & mb:
                        continue
                    m = ma | mb
                    term = ca * cb
                    if _merge_sign(ma, mb) < 0:
                        term = -term
                    v = coeffs.get(m)
                    v = term if v is None else v + term
                    if v:
                        coeffs[m] = v
                    else:
                        del coeffs[m]
        result = KForm._raw(a.dim, degree, coeffs, reg)
    return result


def _vector_entries(v, dim):
    v = list(v)
    if len(v) != dim:
        raise UsageError(f"vector of length {len(v)} in dimension {dim}")
    return v


def contract(v, a: KForm) -> KForm:
    """Interior product of the vector ``v`` (coefficients on e_1..e_dim) into ``a``."""
    if a.degree < 1:
        raise UsageError("cannot contract a vector into a 0-form")
    v = _vector_entries(v, a.dim)
    reg = a.registry
    for x in v:
        if isinstance(x, Polynomial):
            reg = _common_registry(reg, x.registry)
    a = a.lift(reg)
    vp = []
    for x in v:
        if isinstance(x, Polynomial):
            vp.append(x.lift(reg))
        else:
            x = to_scalar(x)
            vp.append(Polynomial.constant(reg, x) if x else None)
    coeffs = {}
    for m, c in a.coeffs.items():
        rest = m
        while rest:
            low = rest & -rest
            rest ^= low
            i = low.bit_length()
            vi = vp[i - 1]
            if vi is None or not vi:
                continue
            term = vi * c
            if _position(m, i) & 1:
                term = -term
            key = m ^ low
            old = coeffs.get(key)
            new = term if old is None else old + term
            if new:
                coeffs[key] = new
            else:
                del coeffs[key]
    return KForm._raw(a.dim, a.degree - 1, coeffs, reg)


def basis_vector(dim, i):
    return [int(j == i) for j in range(1, dim + 1)]


def dstar_action(D: ExactMatrix, a: KForm) -> KForm:
    """Extension of the dual action e^i -> sum_j D[i][j] e^j as a derivation."""
    if D.shape != (a.dim, a.dim):
        raise UsageError(f"matrix of shape {D.shape} on {a.dim}-dimensional forms")
    reg = _common_registry(a.registry, D.registry)
    a = a.lift(reg)
    rows = [[x.lift(reg) for x in r] for r in D.rows]
    coeffs = {}
    for m, c in a.coeffs.items():
        for i in indices_of(m):
            base = m ^ (1 << (i - 1))
            s_i = _position(m, i)
            for j, dij in enumerate(rows[i - 1], start=1):
                if not dij:
                    continue
                bit = 1 << (j - 1)
                if j != i and base & bit:
                    continue
                term = dij * c
                if (s_i + _position(base, j)) & 1:
                    term = -term
                key = base | bit
                old = coeffs.get(key)
                new = term if old is None else old + term
                if new:
                    coeffs[key] = new
                else:
                    del coeffs[key]
    return KForm._raw(a.dim, a.degree, coeffs, reg)


def substitute_covectors(a: KForm, M: ExactMatrix) -> KForm:
    """Replace each e^i by sum_j M[i][j] f^j and re-expand in the f basis."""
    if M.shape != (a.dim, a.dim):
        raise UsageError(f"matrix of shape {M.shape} on {a.dim}-dimensional forms")
    reg = _common_registry(a.registry, M.registry)
    images = [KForm(a.dim, 1, {(j,): M.rows[i][j - 1].lift(reg) for j in range(1, a.dim + 1)}, reg)
              for i in range(a.dim)]
    result = KForm.zero(a.dim, a.degree, reg)
    for m, c in a.coeffs.items():
        idx = indices_of(m)
        if not idx:
            result = result + KForm.constant(a.dim, c.lift(reg), reg)
            continue
        prod = wedge(*[images[i - 1] for i in idx])
        result = result + prod.scale(c.lift(reg))
    return result


def change_basis(a: KForm, P: ExactMatrix) -> KForm:
    """Rewrite ``a`` in the dual basis E^i = sum_j P[i][j] e^j."""
    try:
        inv = inverse_rows(P.scalars())
    except UsageError:
        raise UsageError("not a basis change: the matrix is singular") from None
    return substitute_covectors(a, ExactMatrix(inv, P.registry))


# ---------------------------------------------------------------------------
# Text form
# ---------------------------------------------------------------------------


def format_form(a: KForm, letter: str = "e") -> str:
    if not a.coeffs:
        return "0"
    parts = []
    for idx, c in a.items():
        name = letter + "".join(str(i) for i in idx)
        cs = str(c)
        if len(c.terms) == 1:
            neg = cs.startswith("-")
            mag = cs[1:] if neg else cs
            body = mag if not name else (name if mag == "1" else f"{mag}*{name}")
        else:
            neg = False
            body = f"({cs})*{name}" if name else f"({cs})"
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


_FORM_TAIL = re.compile(r"\*?\s*[eE](\d+)\s*$")


def _split_terms(src: str):
    """Split at top-level signs; yields (sign, body) pairs."""
    terms, depth, cur, sign = [], 0, "", "+"
    for ch in src:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if depth == 0 and ch in "+-" and cur.strip() and not cur.rstrip().endswith(("*", "^")):
            terms.append((sign, cur))
            sign, cur = ch, ""
        elif depth == 0 and ch in "+-" and not cur.strip():
            sign = "-" if (sign == "-") != (ch == "-") else "+"
        else:
            cur += ch
    if depth != 0:
        raise UsageError(f"unbalanced parentheses in {src!r}")
    if cur.strip():
        terms.append((sign, cur))
    return terms


def parse_form(text: str, dim: int, registry: Registry = EMPTY) -> KForm:
    """Parse ``e127 + e347 - 2*e36`` style text.  ``0`` parses as the zero form.

    Coefficients may be rationals, ``sqrt3`` multiples or any polynomial
    expression written before the monomial, e.g. ``(a1 - a2)*e13``.
    """
    src = " ".join(text.split())
    if src in ("0", ""):
        return KForm.zero(dim, 0, registry)
    result = None
    for sgn, body in _split_terms(src):
        m = _FORM_TAIL.search(body)
        if not m:
            raise UsageError(f"cannot parse form term {body.strip()!r}")
        coeff_text = body[:m.start()].strip().rstrip("*").strip() or "1"
        coeff_text = re.sub(r"(?<![A-Za-z\d])(\d+(?:/\d+)?)\s*([A-Za-z(])", r"\1*\2", coeff_text)
        coeff = parse_polynomial(coeff_text, registry)
        if sgn == "-":
            coeff = -coeff
        idx = tuple(int(ch) for ch in m.group(1))
        if any(i < 1 or i > dim for i in idx):
            raise UsageError(f"index out of range in e{m.group(1)} (dimension {dim})")
        sign = 1
        # allow unsorted multi-indices like e21 = -e12
        for x in range(len(idx)):
            for y in range(x + 1, len(idx)):
                if idx[x] > idx[y]:
                    sign = -sign
        if len(set(idx)) != len(idx):
            term = KForm.zero(dim, len(idx), registry)
        else:
            term = KForm(dim, len(idx), {tuple(sorted(idx)): coeff.scale(sign)}, registry)
        result = term if result is None else result + term
    return result
