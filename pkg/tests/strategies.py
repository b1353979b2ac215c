"""Hypothesis strategies for exact scalars, polynomials, matrices and forms."""

from fractions import Fraction

from hypothesis import strategies as st

from exactg2.exterior import KForm
from exactg2.lie import form_basis
from exactg2.linalg import ExactMatrix
from exactg2.ring import Polynomial, Registry

REG = Registry(("x", "y", "z"))

small_fractions = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 4))


@st.composite
def polynomials(draw, registry=REG, max_terms=4, max_degree=3):
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        exps = tuple(draw(st.integers(0, max_degree)) for _ in registry.names)
        c = draw(small_fractions)
        if c:
            terms[exps] = terms.get(exps, 0) + c
    p = registry.zero
    for exps, c in terms.items():
        mono = Polynomial.constant(registry, c)
        for name, e in zip(registry.names, exps):
            for _ in range(e):
                mono = mono * registry.var(name)
        p = p + mono
    return p


@st.composite
def rational_matrices(draw, min_n=1, max_n=5):
    n = draw(st.integers(min_n, max_n))
    rows = [[draw(st.integers(-5, 5)) for _ in range(n)] for _ in range(n)]
    return ExactMatrix(rows)


@st.composite
def forms(draw, dim=7, degree=None):
    k = draw(st.integers(0, dim)) if degree is None else degree
    coeffs = {}
    for idx in form_basis(dim, k):
        if draw(st.booleans()):
            coeffs[idx] = draw(st.integers(-3, 3))
    return KForm(dim, k, coeffs)


vectors7 = st.lists(small_fractions, min_size=7, max_size=7)
