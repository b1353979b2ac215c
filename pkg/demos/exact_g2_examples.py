"""Check the two seven-dimensional exact G2 examples.

Prints Betti numbers, the nondegeneracy verdict of phi and a primitive.
Run with ``python3 demos/exact_g2_examples.py``.
"""
from exactg2.catalog import reference_fixtures
from exactg2.exterior import substitute_covectors
from exactg2.g2 import exact_primitive, g2_nondegenerate, metric_volume
from exactg2.lie import betti_numbers, is_unimodular


def report(name, g, phi):
    print(name)
    print(f"  Betti numbers: {list(betti_numbers(g))}")
    print(f"  unimodular: {is_unimodular(g)}")
    verdict = g2_nondegenerate(phi)
    print(f"  G2-form: {verdict.is_g2} (sign {verdict.sign})")
    r = exact_primitive(g, phi)
    print(f"  exact: {r.exact}; primitive {r.primitive}")
    if verdict.is_g2:
        mv = metric_volume(phi)
        print(f"  volume scale mu = {mv.mu} ({'exact' if mv.exact else 'interval'})")


if __name__ == "__main__":
    fx = reference_fixtures()
    report("s", fx.s, fx.s_phi)
    report("h (E-basis)", fx.h_E, fx.h_phi_E)
    report("h (e-basis)", fx.h, substitute_covectors(fx.h_phi_E, fx.h_change))
