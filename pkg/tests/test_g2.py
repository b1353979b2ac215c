import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from exactg2.classify import random_derivation, su_constraints
from exactg2.derivations import derivation_space
from exactg2.exterior import KForm, basis_vector, change_basis, contract, parse_form, substitute_covectors
from exactg2.g2 import (b_value, exact_primitive, exactness_obstruction, g2_bilinear,
                        g2_nondegenerate, is_closed, metric_volume, obstruction_family,
                        standard_adapted_form)
from exactg2.linalg import ExactMatrix, det_rows, inverse_rows
from exactg2.ring import QSqrt3, UsageError, parse_polynomial

from strategies import forms


def e(*idx):
    return KForm.basis(7, idx)


# -- bilinear form and nondegeneracy -------------------------------------------------------------


def test_adapted_form_has_seven_unit_terms():
    phi = standard_adapted_form()
    assert len(phi.coeffs) == 7
    assert sorted(abs(c.constant_value()) for c in phi.coeffs.values()) == [1] * 7


def test_adapted_form_gives_six_times_identity():
    assert g2_bilinear(standard_adapted_form()).matrix == ExactMatrix.identity(7).scale(6)


def test_bilinear_form_by_brute_force():
    phi = standard_adapted_form()
    for i in range(1, 8):
        for j in range(1, 8):
            top = (contract(basis_vector(7, i), phi).wedge(contract(basis_vector(7, j), phi))
                   .wedge(phi)).top_coefficient()
            assert top == (6 if i == j else 0)


def test_zero_form_and_e123():
    assert g2_bilinear(KForm.zero(7, 3)).matrix.is_zero()
    B = g2_bilinear(e(1, 2, 3)).matrix
    assert all(not any(B.rows[r]) for r in range(3, 7))
    assert not det_rows(B.scalars())


def test_contraction_of_the_adapted_form():
    assert contract(basis_vector(7, 1), standard_adapted_form()) == parse_form("e27 + e35 - e46", 7)


def test_adapted_form_is_positive():
    v = g2_nondegenerate(standard_adapted_form())
    assert v.is_g2 and v.sign == 1


def test_e123_fails_with_witness_e7():
    v = g2_nondegenerate(e(1, 2, 3))
    assert not v.is_g2 and v.witness == basis_vector(7, 7)


def test_negated_form_is_negative_definite():
    v = g2_nondegenerate(standard_adapted_form().scale(-1))
    assert v.is_g2 and v.sign == -1


def test_wrong_degree_is_refused():
    with pytest.raises(UsageError):
        g2_bilinear(e(1, 2))


@given(forms(degree=3), st.lists(st.integers(-3, 3), min_size=7, max_size=7))
def test_b_value_agrees_with_the_matrix(phi, v):
    B = g2_bilinear(phi).matrix.scalars()
    quad = sum(v[i] * B[i][j] * v[j] for i in range(7) for j in range(7))
    assert b_value(phi, v) == quad


@settings(max_examples=15)
@given(forms(degree=3))
def test_indefinite_witness_is_genuine(phi):
    v = g2_nondegenerate(phi)
    if v.is_g2:
        return
    assert any(v.witness)
    assert b_value(phi, v.witness) == v.witness_value


@given(st.lists(st.integers(-2, 2), min_size=49, max_size=49), st.sampled_from([1, -1]))
def test_definiteness_is_basis_independent(entries, s):
    P = [entries[7 * r:7 * r + 7] for r in range(7)]
    if not det_rows(P):
        return
    phi = standard_adapted_form().scale(s)
    moved = substitute_covectors(phi, ExactMatrix(P))
    v = g2_nondegenerate(moved)
    assert v.is_g2
    # the sign flips exactly with the orientation of the change of basis
    assert v.sign == s * (1 if det_rows(P) > 0 else -1)


@given(forms(degree=3))
def test_random_forms_are_decided_consistently(phi):
    v = g2_nondegenerate(phi)
    if not v.is_g2:
        return
    # definite: every basis vector has B(e_i, e_i) of the reported sign
    B = g2_bilinear(phi).matrix.scalars()
    assert all(B[i][i] * v.sign > 0 for i in range(7))


# -- metric and volume ------------------------------------------------------------------------------


def test_adapted_metric_is_identity():
    mv = metric_volume(standard_adapted_form())
    assert mv.exact and mv.mu == 1 and mv.metric == ExactMatrix.identity(7)


def test_negated_form_metric():
    mv = metric_volume(standard_adapted_form().scale(-1))
    assert mv.exact and mv.mu == -1 and mv.metric == ExactMatrix.identity(7)


def test_scaled_form_metric_is_certified():
    mv = metric_volume(standard_adapted_form().scale(2), precision=30)
    assert not mv.exact
    # b = 8 Id, det b = 8^7, mu = 8^(7/9); g = b / mu
    with mpmath.workdps(40):
        mu = mpmath.mpf(8) ** (mpmath.mpf(7) / 9)
        assert mu in mv.mu
        assert mpmath.mpf(8) / mu in mv.metric[0][0]
        assert 0 in mv.metric[0][1]


def test_cube_scaling_is_exact():
    mv = metric_volume(standard_adapted_form().scale(8))
    assert mv.exact and mv.mu == 128 and mv.metric == ExactMatrix.identity(7).scale(4)


def test_metric_of_a_degenerate_form_is_refused():
    with pytest.raises(UsageError, match="not a G2-form"):
        metric_volume(e(1, 2, 3))


# -- closedness and primitives -------------------------------------------------------------------------


def test_phi_on_s_is_exact_with_the_printed_primitive(fixtures):
    g, phi = fixtures.s, fixtures.s_phi
    assert is_closed(g, phi)
    assert g.d(fixtures.s_primitive) == phi
    r = exact_primitive(g, phi)
    assert r.exact and g.d(r.primitive) == phi


def test_phi_in_E_basis(fixtures):
    g, phi = fixtures.h_E, fixtures.h_phi_E
    assert is_closed(g, phi)
    assert g.d(fixtures.h_primitive_E) == phi
    r = exact_primitive(g, phi)
    assert r.exact and g.d(r.primitive) == phi


def test_phi_of_h_pulled_back_to_the_e_basis(fixtures):
    P = fixtures.h_change
    phi = substitute_covectors(fixtures.h_phi_E, P)
    assert is_closed(fixtures.h, phi)
    v = g2_nondegenerate(phi)
    assert v.is_g2
    assert isinstance(g2_bilinear(phi).det, QSqrt3)
    prim = substitute_covectors(fixtures.h_primitive_E, P)
    assert fixtures.h.d(prim) == phi


def test_e7_is_not_exact_on_s(fixtures):
    r = exact_primitive(fixtures.s, e(7))
    assert not r.exact and r.class_coordinates == [1]


def test_primitive_of_a_non_closed_form_is_refused(fixtures):
    with pytest.raises(UsageError, match="not closed"):
        exact_primitive(fixtures.s, e(1, 2, 3))


@given(st.integers(0, 10 ** 6))
def test_primitives_and_class_coordinates(fixtures, seed):
    from exactg2.acceptance import random_form
    from exactg2.lie import cohomology
    rng = random.Random(seed)
    g = fixtures.h
    a = g.d(random_form(rng, 7, 2))
    H = cohomology(g, 3)  # b3 = 0, so every closed 3-form is exact
    r = exact_primitive(g, a)
    assert r.exact and g.d(r.primitive) == a
    closed = cohomology(g, 2).representatives[0] + g.d(random_form(rng, 7, 1))
    r = exact_primitive(g, closed)
    assert not r.exact and any(r.class_coordinates)


# -- obstruction certificates -------------------------------------------------------------------------


def test_e127_coefficient_on_n1(algebra, fixtures):
    fam = obstruction_family(algebra("n1"))
    want = parse_polynomial(fixtures.obstruction["n1_e127"], fam.registry)
    assert fam.dalpha.coefficient((1, 2, 7)) == want


def test_full_display_on_n1(algebra, fixtures):
    fam = obstruction_family(algebra("n1"))
    want = parse_form(fixtures.obstruction["n1_dalpha"], 7, fam.registry)
    assert fam.dalpha == want


def test_n1_certificate(algebra):
    cert = exactness_obstruction(algebra("n1"), prefer=[basis_vector(7, 6)])
    assert cert.verdict and cert.witness_name() == "e6" and cert.polynomial.is_zero()
    assert [str(v) for v in cert.to_dict()["certifying"]] == ["e5", "e6"]


def test_n2_certificate(algebra):
    n = algebra("n2")
    D = derivation_space(n).generic
    sol = su_constraints(n, D)
    cert = exactness_obstruction(n, D, sol, prefer=[basis_vector(7, 6)])
    reg = cert.polynomial.registry
    assert cert.verdict and cert.witness_name() == "e6"
    assert cert.polynomial == parse_polynomial("-12*c56^3*(a1 + a7)", reg)
    assert cert.reduced.is_zero()


def test_n2_without_constraints_is_refuted(algebra):
    cert = exactness_obstruction(algebra("n2"))
    assert not cert.verdict and cert.remainders


def test_abelian_certificate_in_search_order(algebra):
    cert = exactness_obstruction(algebra("a"))
    assert cert.verdict and cert.witness_name() == "e1" and cert.polynomial.is_zero()
    assert cert.to_dict()["certifying"] == ["e1", "e2", "e3", "e4", "e5", "e6"]


def test_strict_search_order_reports_the_first_hit(algebra):
    assert exactness_obstruction(algebra("n1")).witness_name() == "e5"


def test_extra_vectors_are_tried_after_the_basis(algebra):
    cert = exactness_obstruction(algebra("a"), extra_vectors=[[1, 1, 0, 0, 0, 0, 0]])
    assert len(cert.to_dict()["certifying"]) == 7


def test_family_needs_a_nilpotent_six_dimensional_base(fixtures):
    with pytest.raises(UsageError):
        obstruction_family(fixtures.s)


@pytest.mark.parametrize("key", ["a", "n1", "n2"])
def test_certificate_implies_degenerate_instances(algebra, key):
    n = algebra(key)
    space = derivation_space(n)
    sol = su_constraints(n, space.generic) if key == "n2" else None
    fam = obstruction_family(n, space.generic)
    prefer = [basis_vector(7, 1 if key == "a" else 6)]
    cert = exactness_obstruction(n, space.generic, sol, prefer=prefer)
    rng = random.Random(key)
    for _ in range(20):
        D = random_derivation(space, rng, bound=4, sol=sol)
        point = {name: D.rows[r - 1][c - 1].constant_value()
                 for name, (r, c) in zip(space.registry.names, space.free_entries)}
        point.update({name: Fraction(rng.randint(-5, 5)) for name in fam.registry.names
                      if name.startswith("c")})
        phi = fam.dalpha.evaluate(point)
        assert b_value(phi, cert.witness) == 0
        assert not g2_nondegenerate(phi).is_g2
