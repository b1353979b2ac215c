"""(2,3)-trivial solvable extensions n x|_D R of six-dimensional nilpotent algebras.

For a generic derivation D of n, the generator e7 acts on H^k(n) through
[a] -> [iota_{e7} d a].  The extension has b2 = b3 = 0 exactly when the
action matrices A_1, A_2, A_3 are invertible; strong unimodularity adds the
linear constraints S on the derivation parameters.  An algebra is excluded
at degree k when det(A_k) vanishes identically on the solutions of S.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count

from .derivations import (DerivationSpace, align_parameters, derivation_space, is_derivation,
                          is_nilpotent_matrix)
from .exterior import KForm, contract, basis_vector
from .lie import (LieAlgebra, betti_numbers, central_series, cohomology, quotient_traces,
                  semidirect_extend)
from .linalg import (ExactMatrix, LinearSolutionSpace, det_rows, diagonal_blocks, mat_det,
                     solve_linear_system, substitute_linear_solution, substitute_matrix)
from .ring import Polynomial, UsageError, to_scalar

# symbolic determinants larger than this are certified by evaluation only
SYMBOLIC_DET_LIMIT = 12


@dataclass
class ActionMatrix:
    degree: int
    representatives: list   # KForms on n
    matrix: ExactMatrix

    @property
    def size(self):
        return self.matrix.nrows


@dataclass
class DegreeReport:
    degree: int
    size: int
    vanishes_on_S: bool          # det(A_k) restricted to S is the zero polynomial
    certificate: str             # "evaluation" (nonzero value found) or "symbolic"
    det: Polynomial | None = None          # before substitution, when computed
    det_on_S: Polynomial | None = None     # after substitution, when computed


@dataclass
class ClassificationVerdict:
    algebra_id: str
    tuple_text: str
    su_constraints: LinearSolutionSpace
    admits: bool
    failing_k: int | None
    failing_degrees: list
    sample_point: dict | None
    degrees: list = field(default_factory=list)   # DegreeReport per k = 1, 2, 3
    expected_k: int | None = None

    @property
    def matches_expectation(self) -> bool:
        if self.expected_k is None:
            return self.admits
        return self.failing_k == self.expected_k


# ---------------------------------------------------------------------------
# Constraint set S
# ---------------------------------------------------------------------------


def _normalise(p: Polynomial) -> Polynomial:
    lead = p.leading()[1]
    return p.scale(1 / to_scalar(lead)) if lead != 1 else p


def trace_constraints(n: LieAlgebra, D: ExactMatrix):
    """Traces of D on the quotients of the descending central series of n."""
    chain = central_series(n, list(range(1, n.dim + 1)))
    if not chain.nilpotent:
        raise UsageError("the constraint set needs a nilpotent algebra")
    return quotient_traces(D, chain, n.dim)


def su_constraints(n: LieAlgebra, D: ExactMatrix) -> LinearSolutionSpace:
    """Linear conditions on the parameters of D for n x|_D R to be strongly unimodular.

    One trace condition per quotient n^i/n^{i+1}; conditions are deduplicated
    up to a scalar factor.
    """
    seen = []
    for tr in trace_constraints(n, D):
        if not tr:
            continue
        if tr.is_constant():
            raise UsageError("strong unimodularity is impossible for this derivation")
        norm = _normalise(tr)
        if norm not in seen:
            seen.append(norm)
    return solve_linear_system(seen, D.registry)


# ---------------------------------------------------------------------------
# Action matrices
# ---------------------------------------------------------------------------


def _restrict(a: KForm, dim: int) -> KForm:
    reg = a.registry
    coeffs = {}
    for mask, c in a.coeffs.items():
        if mask >> dim:
            raise AssertionError("form still involves the extra generator")
        coeffs[mask] = c
    return KForm._raw(dim, a.degree, coeffs, reg)


def induced_action_matrix(n: LieAlgebra, D: ExactMatrix, k: int, representatives=None,
                          extension: LieAlgebra | None = None, cohom=None) -> ActionMatrix:
    """Matrix of [a] -> [iota_{e7} d a] on H^k(n); column c holds the image of representative c."""
    H = cohom if cohom is not None else cohomology(n, k, representatives)
    if H.betti == 0:
        raise UsageError(f"action on trivial space: H^{k} vanishes")
    g = extension if extension is not None else semidirect_extend(n, D, check=False)
    m = n.dim + 1
    e_top = basis_vector(m, m)
    reg = g.registry
    cols = []
    for rep in H.representatives:
        lifted = KForm._raw(m, rep.degree, {mask: c.lift(reg) for mask, c in rep.coeffs.items()}, reg)
        image = contract(e_top, g.d(lifted))
        image = _restrict(image, n.dim) if image else KForm.zero(n.dim, k, reg)
        cols.append(H.coordinates(image))
    rows = [[_poly(cols[c][r], reg) for c in range(len(cols))] for r in range(len(cols))]
    return ActionMatrix(k, list(H.representatives), ExactMatrix(rows, reg))


def _poly(x, reg):
    if isinstance(x, Polynomial):
        return x.lift(reg) if x.registry != reg else x
    return Polynomial.constant(reg, x)


def action_matrices(n: LieAlgebra, D: ExactMatrix, degrees=(1, 2, 3)):
    """Action matrices for the requested degrees; None where H^k(n) = 0."""
    g = semidirect_extend(n, D, check=False)
    out = {}
    for k in degrees:
        H = cohomology(n, k)
        out[k] = induced_action_matrix(n, D, k, extension=g, cohom=H) if H.betti else None
    return out


# ---------------------------------------------------------------------------
# Zero-polynomial decisions
# ---------------------------------------------------------------------------


def _sample_points(sol: LinearSolutionSpace, how_many: int, seed: int, bound: int = 6):
    rng = random.Random(seed)
    names = sol.free_names()
    for _ in range(how_many):
        yield sol.point({n: rng.randint(-bound, bound) for n in names})


def det_at(m: ExactMatrix, point) -> Fraction:
    return det_rows(m.evaluate(point).scalars()) if m.nrows else Fraction(1)


def decide_vanishing(A: ExactMatrix, sol: LinearSolutionSpace, tries: int = 8, seed: int = 0,
                     symbolic: bool = True):
    """Does det(A) vanish on every solution of ``sol``?

    Returns ``(vanishes, certificate, det, det_on_S)``.  A nonzero value at a
    solution point proves non-vanishing; vanishing is proved by expanding the
    substituted determinant symbolically.
    """
    det = det_on = None
    for point in _sample_points(sol, tries, seed):
        if det_at(A, point):
            if symbolic and A.nrows <= SYMBOLIC_DET_LIMIT:
                det = mat_det(A, "blocks")
                det_on = substitute_linear_solution(det, sol)
            return False, "evaluation", det, det_on
    reduced = substitute_matrix(A, sol)
    det_on = mat_det(reduced, "blocks")
    if symbolic and A.nrows <= SYMBOLIC_DET_LIMIT:
        det = mat_det(A, "blocks")
    return (not det_on), "symbolic", det, det_on


def find_sample_point(mats, sol: LinearSolutionSpace, seed: int = 1, bound: int = 6,
                      max_tries: int = 2000):
    """Integer point of S (free variables in [-bound, bound]) where every det(A_k) is nonzero.

    The search widens the bound after ``max_tries`` unsuccessful draws; it
    terminates because a product of nonzero polynomials is nonzero.
    """
    names = sol.free_names()
    rng = random.Random(seed)
    for b in count(bound, bound):
        for _ in range(max_tries):
            point = sol.point({n: rng.randint(-b, b) for n in names})
            if all(det_at(m, point) for m in mats):
                return point
        if b > 64 * bound:
            raise AssertionError("no sample point found; a determinant may vanish on S")


# ---------------------------------------------------------------------------
# Verdicts
# ---------------------------------------------------------------------------


def classify_nilpotent(n: LieAlgebra, algebra_id: str = "", tuple_text: str = "",
                       expected_k: int | None = None, symbolic: bool = True) -> ClassificationVerdict:
    """Decide whether some strongly unimodular n x|_D R has b2 = b3 = 0."""
    space = derivation_space(n)
    D = space.generic
    sol = su_constraints(n, D)
    mats = action_matrices(n, D)
    degrees = []
    failing = []
    for k in (1, 2, 3):
        A = mats[k]
        if A is None:
            degrees.append(DegreeReport(k, 0, False, "trivial"))
            continue
        vanishes, cert, det, det_on = decide_vanishing(A.matrix, sol, seed=k, symbolic=symbolic)
        degrees.append(DegreeReport(k, A.size, vanishes, cert, det, det_on))
        if vanishes:
            failing.append(k)
    sample = None
    if not failing:
        sample = find_sample_point([mats[k].matrix for k in (1, 2, 3) if mats[k] is not None], sol)
        assert not is_nilpotent_matrix(D.evaluate(sample)), "sample derivation is nilpotent"
    return ClassificationVerdict(
        algebra_id=algebra_id or n.name, tuple_text=tuple_text, su_constraints=sol,
        admits=not failing, failing_k=failing[0] if failing else None,
        failing_degrees=failing, sample_point=sample, degrees=degrees, expected_k=expected_k,
    )


def sweep_catalog(entries=None, symbolic: bool = True, progress=None):
    """Verdicts for every catalog entry, ordered by id."""
    from .catalog import load_catalog

    entries = entries if entries is not None else load_catalog()
    out = []
    for e in entries:
        v = classify_nilpotent(e.algebra, str(e.id), e.tuple_text, e.expected_exclusion, symbolic)
        out.append(v)
        if progress:
            progress(e, v)
    return out


def madsen_swann_crosscheck(n: LieAlgebra, D: ExactMatrix):
    """Compare invertibility of A_1..A_3 at a rational D with b2, b3 of the extension.

    Returns ``(via_action, via_betti)``; the two must agree.
    """
    bad = is_derivation(n, D)
    if bad is not None:
        raise UsageError(f"not a derivation: Leibniz fails on (e{bad[0]}, e{bad[1]})")
    g = semidirect_extend(n, D, check=False)
    via_action = True
    for k in (1, 2, 3):
        H = cohomology(n, k)
        if not H.betti:
            continue
        A = induced_action_matrix(n, D, k, extension=g, cohom=H)
        if not det_rows(A.matrix.scalars()):
            via_action = False
    b = betti_numbers(g)
    return via_action, (b[2] == 0 and b[3] == 0)


def random_derivation(space: DerivationSpace, rng: random.Random, bound: int = 5,
                      sol: LinearSolutionSpace | None = None) -> ExactMatrix:
    """A rational derivation with small random integer parameters (optionally on S)."""
    if sol is None:
        point = {n: rng.randint(-bound, bound) for n in space.registry.names}
    else:
        point = sol.point({n: rng.randint(-bound, bound) for n in sol.free_names()})
    return space.instantiate(point)


# ---------------------------------------------------------------------------
# Comparison with printed action matrices
# ---------------------------------------------------------------------------


@dataclass
class AppendixComparison:
    algebra: str
    degree: int
    mode: str                 # "entrywise", "negated-transpose" or "behavioural"
    matches: bool
    ours: ExactMatrix         # recomputed in the printed basis, on S
    printed: ExactMatrix      # printed matrix (readings filled in), on S
    det_equal: bool | None = None
    singularity_agrees: bool | None = None
    both_nonvanishing: bool | None = None
    notes: list = field(default_factory=list)


def _rational_points(sol: LinearSolutionSpace, how_many: int, seed: int):
    rng = random.Random(seed)
    names = sol.free_names()
    for _ in range(how_many):
        yield sol.point({n: Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for n in names})


def recompute_in_basis(n: LieAlgebra, printed_D: ExactMatrix, k: int, basis) -> ExactMatrix:
    """A_k in the given representatives, with our parameters renamed to those of ``printed_D``."""
    space = derivation_space(n)
    mapping = align_parameters(space, printed_D)
    if mapping is None:
        raise AssertionError("printed derivation does not span Der(n)")
    A = induced_action_matrix(n, space.generic, k, representatives=basis).matrix
    return A.subs(mapping, printed_D.registry)


def compare_appendix(n: LieAlgebra, printed_D: ExactMatrix, entry, points: int = 5,
                     seed: int = 0) -> AppendixComparison:
    """Compare a printed action matrix against recomputation.

    Matrices are compared entrywise on S, falling back to the negated
    transpose; matrices flagged for behavioural comparison have their
    unreadable cells filled with the recorded readings and are compared: equal determinants on S and
    equal singularity at random rational points of S.
    """
    sol = su_constraints(n, printed_D)
    ours = substitute_matrix(recompute_in_basis(n, printed_D, entry.degree, entry.basis), sol)
    notes = []
    if entry.compare != "behavioural":
        printed = substitute_matrix(entry.matrix, sol)
        if ours == printed:
            return AppendixComparison(entry.algebra, entry.degree, "entrywise", True, ours, printed)
        if ours.transpose().scale(-1) == printed:
            notes.append("printed matrix is the negated transpose of the recomputed one")
            return AppendixComparison(entry.algebra, entry.degree, "negated-transpose", True,
                                      ours, printed, notes=notes)
        return AppendixComparison(entry.algebra, entry.degree, "entrywise", False, ours, printed)
    printed = substitute_matrix(entry.with_readings(), sol)
    if entry.unreliable:
        notes.append("unreliable cells read as " + ", ".join(
            f"({r},{c}) = {entry.readings[(r, c)]}" for r, c in entry.unreliable))
    det_ours = mat_det(ours, "blocks")
    det_printed = mat_det(printed, "blocks")
    agree = all(bool(det_at(ours, p)) == bool(det_at(printed, p))
                for p in _rational_points(sol, points, seed))
    det_equal = det_ours == det_printed
    if not det_equal:
        notes.append("determinants on S differ")
    return AppendixComparison(entry.algebra, entry.degree, "behavioural", det_equal and agree,
                              ours, printed, det_equal=det_equal, singularity_agrees=agree,
                              both_nonvanishing=bool(det_ours) and bool(det_printed), notes=notes)
