"""Walk through the classification of six-dimensional nilpotent algebras.

For every catalog entry we build the generic derivation, impose strong
unimodularity and ask whether the induced action on H^k(n) can be invertible
for k = 1, 2, 3.  Run with ``python3 demos/reproduce_classification.py``.
"""
from collections import Counter

from exactg2.catalog import catalog_entry, load_catalog
from exactg2.classify import action_matrices, classify_nilpotent, su_constraints
from exactg2.derivations import derivation_space
from exactg2.linalg import mat_det


def show_worked_example():
    entry = catalog_entry("worked")
    n = entry.algebra
    space = derivation_space(n)
    print(f"worked example {entry.tuple_text}")
    print(f"  derivation space has dimension {len(space.registry.names)}")
    print(f"  constraints: {', '.join(su_constraints(n, space.generic).describe())}")
    for k, A in action_matrices(n, space.generic).items():
        if A is not None:
            print(f"  A{k} = {A.matrix.to_strings()}  det = {mat_det(A.matrix)}")


def sweep():
    tally = Counter()
    for entry in load_catalog():
        v = classify_nilpotent(entry.algebra, str(entry.id), entry.tuple_text,
                               entry.expected_exclusion)
        verdict = "admits" if v.admits else f"excluded at k={v.failing_k}"
        tally[verdict] += 1
        print(f"{entry.id:>3} {entry.tuple_text:<36} {verdict}")
    print(dict(sorted(tally.items())))


if __name__ == "__main__":
    show_worked_example()
    print()
    sweep()
