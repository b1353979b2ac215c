from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from exactg2.linalg import (ExactMatrix, char_poly, det_cofactor, det_rows, mat_det,
                            mat_rref_kernel, solve_linear_system, substitute_linear_solution)
from exactg2.ring import (QSqrt3, Registry, UsageError, numbered_registry, parse_polynomial,
                          sqrt3_number)

from strategies import REG, polynomials, rational_matrices, small_fractions

A = numbered_registry("a", 8)
C = Registry(("c56",)) + A


def test_additive_inverse():
    a1 = A.var("a1")
    assert (a1 + (-a1)).is_zero()


def test_multiplicative_identity():
    p = A.var("a1") + A.var("a4")
    assert p * 1 == p
    assert p * A.one == p


def test_cube_times_linear_factor():
    c = C.var("c56")
    p = (c * (c * c)).scale(-12) * (C.var("a1") + C.var("a7"))
    assert str(p) == "-12*c56^3*a1 - 12*c56^3*a7"
    assert p == parse_polynomial("-12*c56^3*(a1 + a7)", C)


def test_registry_mismatch_is_a_usage_error():
    with pytest.raises(UsageError):
        A.var("a1") + Registry(("b",)).var("b")


def test_canonical_text_round_trips():
    p = parse_polynomial("3/2*a2^2*a1 - a8 + 7", A)
    assert parse_polynomial(str(p), A) == p


@given(polynomials(), polynomials(), polynomials())
def test_ring_axioms(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert (p * q) * r == p * (q * r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p
    assert (p - p).is_zero()


@given(polynomials(), polynomials())
def test_evaluation_is_a_ring_map(p, q):
    pt = {"x": Fraction(2, 3), "y": Fraction(-1), "z": Fraction(5)}
    assert (p * q).evaluate(pt) == p.evaluate(pt) * q.evaluate(pt)
    assert (p + q).evaluate(pt) == p.evaluate(pt) + q.evaluate(pt)


@given(polynomials())
def test_exact_division(p):
    q = REG.var("x") + REG.var("y") * 2 - 1
    assert (p * q).divexact(q) == p


# -- rref and kernel ------------------------------------------------------


def test_identity_has_full_rank():
    _, rank, kernel = mat_rref_kernel(ExactMatrix.identity(3))
    assert rank == 3 and kernel == []


def test_zero_matrix_kernel():
    _, rank, kernel = mat_rref_kernel(ExactMatrix.zeros(2, 4))
    assert rank == 0 and len(kernel) == 4


def test_symbolic_rref_is_refused():
    with pytest.raises(UsageError):
        mat_rref_kernel(ExactMatrix([[A.var("a1")]]))


def test_rank_of_d_on_one_forms_of_s(fixtures):
    _, rank, _ = mat_rref_kernel(ExactMatrix(fixtures.s.d_matrix(1)))
    assert rank == 6


@given(rational_matrices(max_n=5), st.integers(1, 6))
def test_kernel_vectors_are_annihilated(m, extra):
    wide = ExactMatrix([list(r) + [1] * extra for r in m.scalars()])
    red, rank, kernel = mat_rref_kernel(wide)
    assert rank + len(kernel) == wide.ncols
    rows = wide.scalars()
    for v in kernel:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in rows)
    pivots = sum(1 for row in red.scalars() if any(row))
    assert pivots == rank


# -- determinants -----------------------------------------------------------


def _leibniz_det(rows):
    n = len(rows)
    total = Fraction(0)
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = Fraction(1)
        for i, p in enumerate(perm):
            prod *= rows[i][p]
        total += -prod if inv % 2 else prod
    return total


def test_printed_det_of_worked_action():
    a1 = A.var("a1")
    m = ExactMatrix.diag([-a1, a1.scale(-2)], A)
    assert mat_det(m) == (a1 * a1).scale(2)


def test_identity_det():
    for n in range(1, 6):
        assert mat_det(ExactMatrix.identity(n)) == 1


def test_non_square_det_is_a_usage_error():
    with pytest.raises(UsageError):
        mat_det(ExactMatrix.zeros(2, 3))


@given(rational_matrices(max_n=6))
def test_bareiss_matches_cofactor(m):
    rows = m.scalars()
    assert det_rows(rows) == det_cofactor(rows) == _leibniz_det(rows)


@given(st.lists(polynomials(max_terms=2, max_degree=1), min_size=9, max_size=9))
def test_symbolic_bareiss_matches_cofactor(entries):
    m = ExactMatrix([entries[0:3], entries[3:6], entries[6:9]], REG)
    assert mat_det(m, "bareiss") == mat_det(m, "cofactor") == mat_det(m, "blocks")


# -- substitution ---------------------------------------------------------------


def test_substituting_the_constraint_itself():
    p = A.var("a1") + A.var("a7")
    assert substitute_linear_solution(p, solve_linear_system([p], A)).is_zero()


def test_printed_vanishing_under_a1_zero():
    a1 = A.var("a1")
    sol = solve_linear_system([a1], A)
    assert substitute_linear_solution((a1 * a1).scale(2), sol).is_zero()


@given(polynomials(), st.lists(small_fractions, min_size=3, max_size=3))
def test_substitution_agrees_with_evaluation(p, free):
    eq = REG.var("x") + REG.var("y").scale(2) - REG.var("z") + 1
    sol = solve_linear_system([eq], REG)
    point = sol.point(dict(zip(sol.free_names(), free)))
    assert sol.contains(point)
    assert substitute_linear_solution(p, sol).evaluate(point) == p.evaluate(point)


# -- characteristic polynomials -----------------------------------------------


def test_char_poly_examples():
    assert str(char_poly(ExactMatrix.zeros(2, 2))) == "t^2"
    assert str(char_poly(ExactMatrix.diag([1, 2]))) == "t^2 - 3*t + 2"
    # diag(-a1, -2 a1) at a1 = 1, expanded by hand: (t + 1)(t + 2)
    assert str(char_poly(ExactMatrix.diag([-1, -2]))) == "t^2 + 3*t + 2"


@given(rational_matrices(max_n=5))
def test_cayley_hamilton(m):
    cp = char_poly(m)
    n = m.nrows
    coeffs = [cp.terms.get((k,), 0) for k in range(n + 1)]
    acc = ExactMatrix.zeros(n, n)
    for c in reversed(coeffs):
        acc = acc @ m + ExactMatrix.identity(n).scale(c)
    assert acc.is_zero()


# -- quadratic extension ------------------------------------------------------------


def test_sqrt3_arithmetic():
    r = sqrt3_number(0, 1)
    assert r * r == 3
    x = sqrt3_number(2, 1)
    assert x * x.inverse() == 1
    assert sqrt3_number(1, -1).sign() == -1
