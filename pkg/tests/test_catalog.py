import pytest
from hypothesis import given, strategies as st

from exactg2.catalog import (MalformedAlgebraError, ParseError, catalog_entry, load_catalog,
                             parse_bracket_table, parse_catalog, parse_structure_equations,
                             render_bracket_table, render_structure_equations)
from exactg2.exterior import KForm, parse_form
from exactg2.lie import central_series, is_unimodular, validate_jacobi
from exactg2.ring import sqrt3_number


def test_parse_n1():
    g = parse_structure_equations("(0,0,0,0,e12,e34)")
    assert g.differentials[4] == KForm.basis(6, (1, 2))
    assert g.differentials[5] == KForm.basis(6, (3, 4))


def test_parse_abelian():
    g = parse_structure_equations("(0,0,0,0,0,0)")
    assert g.dim == 6 and not any(g.differentials)


def test_typeset_forms_are_accepted():
    g = parse_structure_equations("(0, 0, 0, 0, e^{13} − e^{24}, e^{14}+e^{23})")
    assert render_structure_equations(g) == "(0,0,0,0,e13-e24,e14+e23)"


def test_render_n2_and_abelian(algebra):
    assert render_structure_equations(algebra("n2")) == "(0,0,0,0,e13-e24,e14+e23)"
    assert render_structure_equations(algebra("a")) == "(0,0,0,0,0,0)"


def test_h_round_trip_is_bit_identical(fixtures):
    text = render_structure_equations(fixtures.h)
    assert render_structure_equations(parse_structure_equations(text)) == text
    assert parse_structure_equations(text) == fixtures.h


def test_round_trip_for_every_entry_and_fixture(catalog, fixtures):
    for g in [e.algebra for e in catalog] + [fixtures.s, fixtures.h, fixtures.h_E]:
        assert parse_structure_equations(render_structure_equations(g)) == g


def test_bracket_table_round_trip(fixtures):
    text = render_bracket_table(fixtures.s)
    assert parse_bracket_table(text, 7) == fixtures.s


@pytest.mark.parametrize("text, message", [
    ("0,0,e12", "parentheses"),
    ("(0,0,e14)", "out of range"),
    ("(0,0,e12 e12)", "missing"),
    ("(0,0,x12)", "expected a term"),
    ("(0,0,e11)", "repeated index"),
])
def test_syntax_errors(text, message):
    with pytest.raises(ParseError, match=message):
        parse_structure_equations(text)


def test_syntax_error_reports_a_position():
    with pytest.raises(ParseError) as info:
        parse_structure_equations("(0,0,0,e12,e1q)")
    assert info.value.position is not None


def test_jacobi_failure_is_reported():
    with pytest.raises(MalformedAlgebraError):
        parse_structure_equations("(0,0,e12,e34)")


@given(st.lists(st.sampled_from(["0", "e12", "-e13", "2e23", "1/2e12+e13"]), min_size=3, max_size=3))
def test_parse_render_parse_is_stable(entries):
    text = "(" + ",".join(entries) + ")"
    try:
        g = parse_structure_equations(text)
    except MalformedAlgebraError:
        return
    assert parse_structure_equations(render_structure_equations(g)) == g


# -- catalog ---------------------------------------------------------------------------------


def test_catalog_has_34_valid_nilpotent_entries(catalog):
    assert len(catalog) == 34
    for e in catalog:
        assert validate_jacobi(e.algebra) is None
        assert central_series(e.algebra).nilpotent


def test_worked_example_entry(catalog):
    e = catalog_entry("worked", catalog)
    assert e.tuple_text == "(0,0,e12,e13,e14+e23,e34-e25)"
    assert "worked example" in e.provenance


def test_catalog_list_sizes(catalog):
    counts = {}
    for e in catalog:
        counts[e.expected_exclusion] = counts.get(e.expected_exclusion, 0) + 1
    assert counts == {1: 25, 2: 2, 3: 4, None: 3}


def test_aliases(catalog):
    assert catalog_entry("n1", catalog).tuple_text == "(0,0,0,0,e12,e34)"
    assert catalog_entry("33", catalog).tuple_text == "(0,0,0,0,e12,e34)"
    with pytest.raises(Exception, match="unknown catalog id"):
        catalog_entry("n9", catalog)


def test_catalog_path_override(tmp_path, monkeypatch):
    path = tmp_path / "cat.txt"
    path.write_text("1 (0,0,e12) # tiny\n2 (0,0,0) # abelian; alias z\n", encoding="utf-8")
    monkeypatch.setenv("EXACTG2_CATALOG", str(path))
    entries = load_catalog()
    assert [e.id for e in entries] == [1, 2] and entries[1].aliases == ["z"]


def test_bad_catalog_entry_names_its_id():
    with pytest.raises(Exception, match="catalog entry 7"):
        parse_catalog("7 (0,0,e12,e34) # broken\n")


# -- fixtures ------------------------------------------------------------------------------


def test_s_fixture_is_unimodular(fixtures):
    assert validate_jacobi(fixtures.s) is None
    assert is_unimodular(fixtures.s)


def test_E_basis_differential_of_E1(fixtures):
    assert fixtures.h_E.differentials[0] == parse_form("4*e17", 7)


def test_E_basis_is_reproduced_by_the_change_of_basis(fixtures):
    assert fixtures.h.change_basis(fixtures.h_change) == fixtures.h_E


def test_change_matrix_uses_sqrt3(fixtures):
    assert fixtures.h_change.rows[1][1].constant_value() == sqrt3_number(0, "1/12")


def test_printed_A1_of_n1(fixtures):
    A = fixtures.appendix[("n1", 1)]
    assert A.reliable()
    assert A.matrix.to_strings() == [["-a1", "-a3", "0", "0"], ["-a2", "-a4", "0", "0"],
                                     ["0", "0", "-a5", "-a7"], ["0", "0", "-a6", "a1 + a4 + a5"]]


def test_unreliable_cells_are_flagged(fixtures):
    A = fixtures.appendix[("n2", 2)]
    assert A.unreliable == [(3, 6), (4, 2)]
    assert A.compare == "behavioural"
    filled = A.with_readings()
    assert str(filled.rows[2][5]) == "-a5" and not filled.rows[3][1]
