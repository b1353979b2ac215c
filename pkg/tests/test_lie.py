import random
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from exactg2.acceptance import random_form, semidirect_identity_holds
from exactg2.catalog import parse_structure_equations
from exactg2.classify import random_derivation
from exactg2.derivations import derivation_space
from exactg2.exterior import KForm, parse_form, wedge
from exactg2.lie import (LieAlgebra, NotAnIdealError, betti_numbers, ce_differential,
                         central_series, cohomology, derivation_part, restrict_to_ideal,
                         semidirect_extend, unimodularity, validate_jacobi)
from exactg2.linalg import ExactMatrix, rank_rows
from exactg2.ring import UsageError, numbered_registry


def span_equal(a, b, dim):
    a, b = [list(v) for v in a], [list(v) for v in b]
    return rank_rows(a, dim) == rank_rows(b, dim) == rank_rows(a + b, dim)


def vec(*pairs, dim=7):
    v = [Fraction(0)] * dim
    for i, c in pairs:
        v[i - 1] = Fraction(c)
    return v


# -- Jacobi ---------------------------------------------------------------------------


def test_abelian_satisfies_jacobi():
    assert validate_jacobi(LieAlgebra.abelian(7)) is None


def test_s_satisfies_jacobi(fixtures):
    assert validate_jacobi(fixtures.s) is None


def test_corrupted_s_violates_jacobi():
    # [e1,e3] = e4 instead of e4 - 3e6: drop 3e13 from de6
    text = "(-2e17,-4e27,9/2e37,5/2e47-e13,1/2e57-6e37-e14-e23,-3/2e67-6e47+e15+e24,0)"
    g = parse_structure_equations(text, validate=False)
    assert validate_jacobi(g) is not None
    e1, e3, e7 = vec((1, 1)), vec((3, 1)), vec((7, 1))
    jac = [a + b + c for a, b, c in zip(g.bracket(g.bracket(e1, e3), e7),
                                        g.bracket(g.bracket(e3, e7), e1),
                                        g.bracket(g.bracket(e7, e1), e3))]
    # by hand: -5/2 e4 + 6 e6 + 9/2 e4 + 6 e6 - 2 e4
    assert jac == vec((6, 12))


def test_jacobi_refuses_symbolic_algebras():
    reg = numbered_registry("a", 1)
    f = KForm(3, 2, {(1, 2): reg.var("a1")}, reg)
    g = LieAlgebra([KForm.zero(3, 2, reg), KForm.zero(3, 2, reg), f], reg)
    with pytest.raises(UsageError):
        validate_jacobi(g)


# -- differential ---------------------------------------------------------------------


def test_differentials_from_the_tables(fixtures):
    assert fixtures.s.d(KForm.basis(7, (4,))) == parse_form("5/2*e47 - e13", 7)
    assert fixtures.h.d(KForm.basis(7, (6,))) == parse_form("e16 + e26 + e35", 7)
    assert not ce_differential(fixtures.s, KForm.constant(7, 5))


def test_bracket_and_differential_tables_agree(fixtures):
    assert fixtures.s == fixtures.s_from_brackets
    assert fixtures.h == fixtures.h_from_brackets
    assert fixtures.s.bracket_table() == fixtures.s_from_brackets.bracket_table()


def test_convention_on_one_forms(fixtures):
    # d eta (x, y) = -eta([x, y]) with e^{ij}(e_i, e_j) = 1
    g = fixtures.s
    for i in range(1, 8):
        for j in range(i + 1, 8):
            br = g.bracket(vec((i, 1)), vec((j, 1)))
            for k in range(1, 8):
                assert g.d(KForm.basis(7, (k,))).coefficient((i, j)) == -br[k - 1]


def test_d_squared_vanishes_everywhere(fixtures, catalog):
    for g in [fixtures.s, fixtures.h, fixtures.h_E] + [e.algebra for e in catalog]:
        for k in range(g.dim - 1):
            for r in cohomology_free_forms(g.dim, k):
                assert not g.d(g.d(r))


def cohomology_free_forms(dim, k, count=3, seed=7):
    rng = random.Random(seed + k)
    return [random_form(rng, dim, k) for _ in range(count)]


def test_jacobi_violation_shows_up_as_d_squared():
    text = "(-2e17,-4e27,9/2e37,5/2e47-e13,1/2e57-6e37-e14-e23,-3/2e67-6e47+e15+e24,0)"
    g = parse_structure_equations(text, validate=False)
    assert any(g.d(g.d(KForm.basis(7, (i,)))) for i in range(1, 8))


@given(st.integers(0, 10 ** 6), st.integers(1, 3), st.integers(1, 3))
def test_leibniz_rule(fixtures, seed, p, q):
    rng = random.Random(seed)
    for g in (fixtures.s, fixtures.h):
        a, b = random_form(rng, 7, p), random_form(rng, 7, q)
        lhs = g.d(wedge(a, b))
        assert lhs == wedge(g.d(a), b) + wedge(a, g.d(b)).scale((-1) ** p)


# -- cohomology -------------------------------------------------------------------------


def test_betti_numbers_of_s_and_h(fixtures):
    assert betti_numbers(fixtures.s) == (1, 1, 0, 0, 0, 0, 1, 1)
    assert betti_numbers(fixtures.h) == (1, 2, 1, 0, 0, 1, 2, 1)


def test_abelian_betti_numbers():
    assert betti_numbers(LieAlgebra.abelian(6)) == tuple(comb(6, k) for k in range(7))


def test_first_cohomology_of_s_is_spanned_by_e7(fixtures):
    H = cohomology(fixtures.s, 1)
    assert H.betti == 1
    assert H.coordinates(KForm.basis(7, (7,))) != [0]


def test_representatives_are_closed_and_independent(fixtures):
    for g in (fixtures.s, fixtures.h):
        for k in range(8):
            H = cohomology(g, k)
            assert all(not g.d(r) for r in H.representatives)
            for c, r in enumerate(H.representatives):
                assert H.coordinates(r) == [int(i == c) for i in range(H.betti)]


def test_poincare_duality_and_euler_characteristic(fixtures, catalog):
    for g in (fixtures.s, fixtures.h):
        b = betti_numbers(g)
        assert all(b[k] == b[7 - k] for k in range(8))
    for g in [fixtures.s, fixtures.h] + [e.algebra for e in catalog]:
        b = betti_numbers(g)
        assert sum((-1) ** k * x for k, x in enumerate(b)) == 0


def test_cohomology_degree_out_of_range(fixtures):
    with pytest.raises(UsageError):
        cohomology(fixtures.s, 8)


# -- central series and unimodularity ---------------------------------------------------


def test_central_series_of_the_nilradical_of_s(fixtures):
    chain = central_series(fixtures.s)
    assert chain.nilpotent and chain.dims() == [6, 3, 2, 1, 0]
    assert span_equal(chain.terms[1], [vec((4, 1), (6, -3)), vec((5, 1)), vec((6, 1))], 7)
    assert span_equal(chain.terms[2], [vec((5, 1)), vec((6, 1))], 7)
    assert span_equal(chain.terms[3], [vec((6, 1))], 7)


def test_central_series_of_the_nilradical_of_h(fixtures):
    chain = central_series(fixtures.h)
    assert chain.dims() == [5, 2, 1, 0]
    assert span_equal(chain.terms[1], [vec((6, 1)), vec((7, 1))], 7)
    assert span_equal(chain.terms[2], [vec((7, 1))], 7)


def test_abelian_ideal_series():
    chain = central_series(LieAlgebra.abelian(6), list(range(1, 7)))
    assert chain.dims() == [6, 0] and chain.nilpotent


def test_non_ideal_is_rejected(fixtures):
    with pytest.raises(NotAnIdealError):
        central_series(fixtures.s, [1])


def test_unimodularity_of_s(fixtures):
    rep = unimodularity(fixtures.s)
    assert rep.unimodular and not rep.strongly_unimodular
    assert rep.witness == (7, 3, Fraction(-3, 2))


def test_unimodularity_of_h(fixtures):
    rep = unimodularity(fixtures.h)
    assert rep.unimodular and not rep.strongly_unimodular
    assert rep.witness == (1, 2, 3)


def test_abelian_is_strongly_unimodular():
    rep = unimodularity(LieAlgebra.abelian(7), list(range(1, 8)))
    assert rep.unimodular and rep.strongly_unimodular


def test_unimodularity_needs_an_ideal():
    with pytest.raises(UsageError):
        unimodularity(parse_structure_equations("(0,0,e12)"))


# -- semidirect extensions --------------------------------------------------------------


def test_extension_by_ad_e7_rebuilds_s(fixtures):
    n = restrict_to_ideal(fixtures.s, 6)
    D = derivation_part(fixtures.s, 6)
    assert semidirect_extend(n, D) == fixtures.s


def test_extension_by_zero_adds_one_to_b1(algebra):
    for key in ("n1", "n2", "worked"):
        n = algebra(key)
        g = semidirect_extend(n, ExactMatrix.zeros(6, 6))
        assert betti_numbers(g)[1] == betti_numbers(n)[1] + 1


def test_diagonal_family_on_abelian():
    reg = numbered_registry("a", 6)
    D = ExactMatrix.diag(reg.vars(), reg)
    g = semidirect_extend(LieAlgebra.abelian(6), D)
    assert g.d(KForm.basis(7, (3,))) == KForm.basis(7, (3, 7)).lift(reg).scale(reg.var("a3"))


def test_extension_by_a_non_derivation_fails(algebra):
    D = ExactMatrix.diag([1, 0, 0, 0, 0, 0])
    with pytest.raises(UsageError, match="not a derivation"):
        semidirect_extend(algebra("n1"), D)


@given(st.integers(0, 10 ** 6), st.sampled_from(["n1", "n2", "worked", "5", "28"]), st.integers(1, 4))
def test_semidirect_differential_identity(algebra, seed, key, k):
    rng = random.Random(seed)
    n = algebra(key)
    D = random_derivation(derivation_space(n), rng, bound=3)
    assert semidirect_identity_holds(n, D, random_form(rng, 6, k))
