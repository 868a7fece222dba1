from itertools import product

import pytest

from qisplit.counting import (
    CountQuery,
    constrained_compositions,
    crosscheck,
    crosscheck_grid,
    max_protocols,
)


def brute_compositions(total, parts, first_min, other_min):
    if total < 0:
        return []
    out = [t for t in product(range(total + 1), repeat=parts) if sum(t) == total]
    return sorted(t for t in out if t[0] >= first_min and all(x >= other_min for x in t[1:]))


@pytest.mark.parametrize("query,expected", [
    ((4, 1, 3), 2),
    ((4, 2, 3), 0),
    ((6, 2, 3), 2),
    ((5, 2, 3), 1),
])
def test_max_protocols_examples(query, expected):
    assert max_protocols(*query) == expected


def test_six_qubits_four_parties():
    # brute force: dealer >= 1, two middle parties >= 1, receiver fixed at 1
    expected = len(brute_compositions(6 - 1, 3, 1, 1))
    assert expected == 6
    assert max_protocols(6, 1, 4) == expected


@pytest.mark.parametrize("bad", [(4, 1, 2), (1, 2, 3), (3, 0, 3)])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        max_protocols(*bad)
    with pytest.raises(ValueError):
        CountQuery(*bad)


def test_compositions_examples():
    assert constrained_compositions(3, 2, 1, 1) == [(1, 2), (2, 1)]
    assert constrained_compositions(2, 2, 2, 1) == []
    assert constrained_compositions(5, 3, 2, 1) == brute_compositions(5, 3, 2, 1)
    assert constrained_compositions(5, 3, 2, 1) == [(2, 1, 2), (2, 2, 1), (3, 1, 1)]


@pytest.mark.parametrize("total,parts,first_min,other_min", [
    (t, p, f, o) for t in range(0, 9) for p in range(1, 5) for f in range(0, 4) for o in range(0, 3)
])
def test_compositions_match_brute_force(total, parts, first_min, other_min):
    assert constrained_compositions(total, parts, first_min, other_min) == brute_compositions(
        total, parts, first_min, other_min
    )


def test_crosscheck_examples():
    assert crosscheck(4, 1, 3) == {"N": 4, "n": 1, "k": 3, "formula": 2, "enumerated": 2, "match": True}
    r = crosscheck(4, 2, 3)
    assert (r["formula"], r["enumerated"], r["match"]) == (0, 0, True)


def test_crosscheck_exhaustive_grid():
    rows = crosscheck_grid(12, 4, 6)
    assert rows and all(r["match"] for r in rows)


def test_three_parties_reduce_to_n_minus_2n():
    for N in range(1, 13):
        for n in range(1, N + 1):
            if N > 2 * n:
                assert max_protocols(N, n, 3) == N - 2 * n
            else:
                assert max_protocols(N, n, 3) == 0


def test_monotonicity():
    for k in range(3, 7):
        for n in range(1, 5):
            vals = [max_protocols(N, n, k) for N in range(n, 13)]
            assert vals == sorted(vals)
        for N in range(1, 13):
            vals = [max_protocols(N, n, k) for n in range(1, min(4, N) + 1)]
            assert vals == sorted(vals, reverse=True)


def test_boundary_every_middle_party_one_qubit():
    for n in range(1, 5):
        for k in range(3, 7):
            assert max_protocols(2 * n + k - 2, n, k) == 1
