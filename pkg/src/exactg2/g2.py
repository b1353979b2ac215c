"""G2-structures on seven-dimensional Lie algebras.

A 3-form phi on a 7-dimensional space defines a G2-structure exactly when the
symmetric form B(v, w) = coefficient of e^{1..7} in iota_v phi ^ iota_w phi ^ phi
is definite.  B/6 = g_phi * dV_phi, where dV_phi = mu e^{1..7}; taking
determinants gives mu = det(B/6)^(1/9).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import mpmath

from .derivations import derivation_space
from .exterior import KForm, basis_vector, contract, format_form, parse_form, wedge
from .lie import LieAlgebra, cohomology, form_basis, form_to_vector, semidirect_extend, vector_to_form
from .linalg import (ExactMatrix, LinearSolutionSpace, char_poly, det_rows, kernel_rows,
                     solve_rows)
from .ring import Polynomial, QSqrt3, Registry, UsageError, format_scalar, sign, to_scalar

STANDARD_PHI = "e127 + e347 + e567 + e135 - e146 - e236 - e245"


def standard_adapted_form() -> KForm:
    """e127 + e347 + e567 + e135 - e146 - e236 - e245."""
    return parse_form(STANDARD_PHI, 7)


def _check_phi(phi: KForm):
    if phi.dim != 7 or (phi and phi.degree != 3):
        raise UsageError("a G2 candidate is a 3-form in dimension 7")


# ---------------------------------------------------------------------------
# The bilinear form B
# ---------------------------------------------------------------------------


def b_value(phi: KForm, v, w=None):
    """Top coefficient of iota_v phi ^ iota_w phi ^ phi (w defaults to v)."""
    _check_phi(phi)
    if not phi:
        return phi.registry.zero
    a = contract(v, phi)
    b = a if w is None else contract(w, phi)
    return wedge(a, b, phi).top_coefficient()


@dataclass
class BilinearData:
    matrix: ExactMatrix
    det: object

    def value(self, v):
        """v^T B v for a vector of scalars."""
        rows = self.matrix.rows
        total = self.matrix.registry.zero
        for i, x in enumerate(v):
            if not x:
                continue
            for j, y in enumerate(v):
                if y and rows[i][j]:
                    total = total + rows[i][j] * (to_scalar(x) * to_scalar(y))
        return total


def g2_bilinear(phi: KForm) -> BilinearData:
    _check_phi(phi)
    reg = phi.registry
    contractions = [contract(basis_vector(7, i), phi) if phi else None for i in range(1, 8)]
    rows = [[reg.zero] * 7 for _ in range(7)]
    for i in range(7):
        for j in range(i, 7):
            if phi:
                val = wedge(contractions[i], contractions[j], phi).top_coefficient()
            else:
                val = reg.zero
            rows[i][j] = rows[j][i] = val
    m = ExactMatrix(rows, reg)
    det = det_rows(m.scalars()) if m.is_numeric() else None
    return BilinearData(m, det)


@dataclass
class NondegeneracyVerdict:
    is_g2: bool
    sign: int | None                 # +1 positive definite, -1 negative definite
    witness: list | None             # v with B(v,v) = 0 or of the wrong sign
    witness_value: object = None
    char_poly: Polynomial | None = None
    ldl_pivots: list = field(default_factory=list)


def _pattern_sign(cp: Polynomial):
    """+1 / -1 when the real-rooted char poly has only positive / negative roots, else 0."""
    n = cp.degree()
    coeffs = [cp.terms.get((k,), 0) for k in range(n, -1, -1)]   # t^n .. t^0
    if any(not c for c in coeffs):
        return 0
    signs = [sign(c) for c in coeffs]
    if all(s == (-1) ** k for k, s in enumerate(signs)):
        return 1
    if all(s == 1 for s in signs):
        return -1
    return 0


def _ldl(rows):
    """Diagonal pivots of a symmetric elimination without pivoting; stops at the first zero."""
    a = [list(r) for r in rows]
    n = len(a)
    piv = []
    for k in range(n):
        p = a[k][k]
        piv.append(p)
        if not p:
            break
        for i in range(k + 1, n):
            f = a[i][k] / p
            if f:
                for j in range(k + 1, n):
                    a[i][j] = a[i][j] - f * a[k][j]
    return piv


def _witness(rows):
    """A vector v != 0 with B(v,v) = 0 or with sign opposite to B(w1,w1) (B-orthogonal sweep)."""
    n = len(rows)

    def bil(u, w):
        return sum((rows[i][j] * u[i] * w[j] for i in range(n) for j in range(n) if u[i] and w[j]),
                   Fraction(0))

    done = []
    first = 0
    for k in range(n):
        w = [Fraction(int(i == k)) for i in range(n)]
        for u, du in done:
            f = bil(w, u) / du
            if f:
                w = [x - f * y for x, y in zip(w, u)]
        d = bil(w, w)
        if not d:
            return w, d
        s = sign(d)
        if not first:
            first = s
        elif s != first:
            return w, d
        done.append((w, d))
    return None, None


def g2_nondegenerate(phi: KForm) -> NondegeneracyVerdict:
    """Exact definiteness test of B via the sign pattern of its characteristic polynomial.

    The symmetric pivots of an LDL^T sweep give an independent verdict; the
    two must agree.
    """
    data = g2_bilinear(phi)
    if not data.matrix.is_numeric():
        raise UsageError("nondegeneracy of a symbolic 3-form needs an obstruction certificate")
    rows = data.matrix.scalars()
    cp = char_poly(data.matrix)
    s = _pattern_sign(cp)
    piv = _ldl(rows)
    ldl_sign = 0
    if len(piv) == 7 and all(piv):
        signs = {sign(p) for p in piv}
        ldl_sign = signs.pop() if len(signs) == 1 else 0
    if ldl_sign != s:
        raise AssertionError("characteristic polynomial and LDL^T disagree on definiteness")
    if s:
        return NondegeneracyVerdict(True, s, None, None, cp, piv)
    if not data.det:
        kernel = kernel_rows(rows, 7)
        w = kernel[-1]
        return NondegeneracyVerdict(False, None, w, Fraction(0), cp, piv)
    w, val = _witness(rows)
    return NondegeneracyVerdict(False, None, w, val, cp, piv)


# ---------------------------------------------------------------------------
# Metric and volume
# ---------------------------------------------------------------------------


@dataclass
class MetricVolume:
    b: ExactMatrix                 # B / 6
    det_b: object
    exact: bool
    mu: object                     # dV = mu * e1234567; Fraction when exact
    metric: object                 # ExactMatrix when exact, else nested lists of mpf intervals
    precision: int = 50

    def metric_strings(self):
        if self.exact:
            return self.metric.to_strings()
        return [[_iv_str(x, self.precision) for x in row] for row in self.metric]

    def mu_string(self):
        return format_scalar(self.mu) if self.exact else _iv_str(self.mu, self.precision)


def _iv_str(x, digits):
    """Midpoint and radius of an interval enclosure."""
    with mpmath.workdps(digits + 10):
        lo, hi = (mpmath.mpf(e) for e in x._mpi_)
        mid, rad = (lo + hi) / 2, (hi - lo) / 2
        return f"{mpmath.nstr(mid, digits)} +/- {mpmath.nstr(rad, 3)}"


def _rational_root(q: Fraction, n: int):
    """Exact real n-th root of a rational (n odd), or None."""
    neg = q < 0
    num, ok1 = gmpy2.iroot(gmpy2.mpz(abs(q.numerator)), n)
    den, ok2 = gmpy2.iroot(gmpy2.mpz(q.denominator), n)
    if not (ok1 and ok2):
        return None
    r = Fraction(int(num), int(den))
    return -r if neg else r


def _interval(x, ctx):
    if isinstance(x, QSqrt3):
        return ctx.mpf(x.a.numerator) / x.a.denominator + \
            ctx.mpf(x.b.numerator) / x.b.denominator * ctx.sqrt(3)
    x = Fraction(x)
    return ctx.mpf(x.numerator) / x.denominator


def metric_volume(phi: KForm, precision: int = 50) -> MetricVolume:
    """g_phi and dV_phi relative to e1..e7: g = det(b)^(-1/9) b, dV = det(b)^(1/9) e1234567."""
    verdict = g2_nondegenerate(phi)
    if not verdict.is_g2:
        raise UsageError("not a G2-form: B is not definite")
    data = g2_bilinear(phi)
    b = data.matrix.scale(Fraction(1, 6))
    det_b = det_rows(b.scalars())
    if not isinstance(det_b, QSqrt3):
        mu = _rational_root(Fraction(det_b), 9)
        if mu is not None:
            return MetricVolume(b, det_b, True, mu, b.scale(1 / mu), precision)
    ctx = mpmath.iv
    ctx.dps = precision + 10
    d = _interval(det_b, ctx)
    # odd real root: sign(d) * |d|^(1/9)
    s = sign(det_b)
    mu = s * ctx.exp(ctx.log(d if s > 0 else -d) / 9)
    metric = [[_interval(x, ctx) / mu for x in row] for row in b.scalars()]
    return MetricVolume(b, det_b, False, mu, metric, precision)


# ---------------------------------------------------------------------------
# Closedness and primitives
# ---------------------------------------------------------------------------


def is_closed(g: LieAlgebra, a: KForm) -> bool:
    return not g.d(a)


@dataclass
class PrimitiveResult:
    exact: bool
    primitive: KForm | None
    class_coordinates: list | None   # coordinates of [a] in H^k when not exact


def exact_primitive(g: LieAlgebra, a: KForm) -> PrimitiveResult:
    """Solve d(beta) = a, or report the nonzero cohomology class of a."""
    g.require_numeric("primitives")
    if g.d(a):
        raise UsageError("not closed")
    k = a.degree
    if k == 0 or not a:
        if not a:
            return PrimitiveResult(True, KForm.zero(g.dim, max(k - 1, 0)), None)
        return PrimitiveResult(False, None, [a.coefficient(())])
    rows = g.d_matrix(k - 1)
    rhs = form_to_vector(a)
    ncols = len(form_basis(g.dim, k - 1))
    sol = solve_rows(rows, rhs, ncols) if rows and rows[0] else None
    if sol is not None:
        return PrimitiveResult(True, vector_to_form(sol[0], g.dim, k - 1), None)
    H = cohomology(g, k)
    return PrimitiveResult(False, None, H.coordinates(a))


# ---------------------------------------------------------------------------
# Exactness obstructions for families n x|_D R
# ---------------------------------------------------------------------------


def c_names(dim: int = 7):
    return [f"c{i}{j}" for i in range(1, dim + 1) for j in range(i + 1, dim + 1)]


def generic_two_form(reg: Registry, dim: int = 7) -> KForm:
    coeffs = {}
    for name in c_names(dim):
        coeffs[(int(name[1]), int(name[2]))] = reg.var(name)
    return KForm(dim, 2, coeffs, reg)


def _vector_name(v):
    nz = [i for i, x in enumerate(v, start=1) if x]
    if len(nz) == 1 and v[nz[0] - 1] == 1:
        return f"e{nz[0]}"
    return "(" + ", ".join(format_scalar(to_scalar(x)) for x in v) + ")"


@dataclass
class ObstructionCertificate:
    family: str
    constraints: list          # canonical strings "a7 = -a1"
    witness: list | None       # vector; None for a refutation
    polynomial: Polynomial | None
    reduced: Polynomial | None
    verdict: bool
    remainders: list = field(default_factory=list)   # (vector, polynomial) when refuted
    certifying: list = field(default_factory=list)   # every vector that certifies

    def witness_name(self):
        return None if self.witness is None else _vector_name(self.witness)

    def to_dict(self):
        out = {
            "family": self.family,
            "constraints": list(self.constraints),
            "witness": self.witness_name(),
            "polynomial": None if self.polynomial is None else str(self.polynomial),
            "polynomial_on_constraints": None if self.reduced is None else str(self.reduced),
            "verdict": self.verdict,
            "orientation": "coefficient of e1234567 with e^{ij}(e_i, e_j) = 1",
        }
        if self.verdict:
            out["certifying"] = [_vector_name(v) for v in self.certifying]
        else:
            out["remainders"] = [{"vector": _vector_name(v), "polynomial": str(p)}
                                 for v, p in self.remainders]
        return out


@dataclass
class ObstructionFamily:
    algebra: LieAlgebra          # the symbolic extension
    registry: Registry           # c_ij first, then derivation parameters
    dalpha: KForm


def obstruction_family(n: LieAlgebra, D: ExactMatrix | None = None) -> ObstructionFamily:
    """The generic exact 3-form d(sum c_ij e^ij) on n x|_D R (D generic by default)."""
    if n.dim != 6:
        raise UsageError("obstruction families are built on six-dimensional algebras")
    from .lie import central_series
    if not central_series(n, list(range(1, 7))).nilpotent:
        raise UsageError("the base algebra must be nilpotent")
    if D is None:
        D = derivation_space(n).generic
    reg = Registry(c_names(7)) + D.registry
    g = semidirect_extend(n, D.lift(reg), check=False)
    alpha = generic_two_form(reg)
    return ObstructionFamily(g, reg, g.d(alpha))


def obstruction_polynomial(dalpha: KForm, v) -> Polynomial:
    iv = contract(v, dalpha)
    if not iv:
        return dalpha.registry.zero
    return wedge(iv, iv, dalpha).top_coefficient()


def exactness_obstruction(n: LieAlgebra, D: ExactMatrix | None = None,
                          constraints: LinearSolutionSpace | None = None,
                          extra_vectors=(), family: str = "", prefer=()) -> ObstructionCertificate:
    """Search e1..e7 (then ``extra_vectors``) for v with P_v vanishing on the constrained family.

    Every candidate is evaluated; all certifying vectors are recorded.  The
    reported witness is the first certifying vector of ``prefer`` if any,
    otherwise the first in search order.
    """
    fam = obstruction_family(n, D)
    reg = fam.registry
    subs = {}
    if constraints is not None:
        subs = {k: v.lift(reg) if v.registry != reg else v for k, v in constraints.expressions().items()}
    cons = constraints.describe() if constraints is not None else []
    candidates = [basis_vector(7, i) for i in range(1, 8)] + [list(v) for v in extra_vectors]
    results = []
    for v in candidates:
        p = obstruction_polynomial(fam.dalpha, v)
        results.append((v, p, p.subs(subs) if subs else p))
    certifying = [r for r in results if not r[2]]
    if not certifying:
        remainders = sorted(((v, red) for v, _, red in results), key=lambda t: t[1].degree())
        return ObstructionCertificate(family or n.name, cons, None, None, None, False, remainders)
    chosen = certifying[0]
    for want in prefer:
        want = list(want)
        hit = next((r for r in certifying if list(r[0]) == want), None)
        if hit is not None:
            chosen = hit
            break
    cert = ObstructionCertificate(family or n.name, cons, chosen[0], chosen[1], chosen[2], True)
    cert.certifying = [v for v, _, _ in certifying]
    return cert


def instantiate_family(cert_family: ObstructionFamily, point) -> KForm:
    """dalpha at a point assigning every a_i and c_ij."""
    return cert_family.dalpha.evaluate(point)
