"""How many qubit distributions can carry a splitting protocol.

Counting convention: the receiver (last party) holds exactly the last ``n``
channel qubits, the dealer needs at least ``n`` qubits, every other party at
least one, and a distribution is identified by its ordered block sizes. Under
that convention the count is ``C(N - 2n, k - 2)``, which is ``N - 2n`` for
three parties.

``C(n - 1, k - 1)`` (compositions of ``n`` into ``k`` positive parts) is a
different quantity and does not apply: the secret size ``n`` fixes the
receiver block and the dealer minimum, and only the ``N - 2n`` leftover qubits
are free. :func:`crosscheck` confirms the closed form by enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterator


@dataclass(frozen=True)
class CountQuery:
    N: int
    n: int
    k: int

    def __post_init__(self):
        if self.k < 3:
            raise ValueError(f"need k >= 3 parties, got k={self.k}")
        if not self.N >= self.n >= 1:
            raise ValueError(f"need N >= n >= 1, got N={self.N}, n={self.n}")


def max_protocols(N: int, n: int, k: int) -> int:
    q = CountQuery(N, n, k)
    free = q.N - 2 * q.n
    if free <= 0 or free < q.k - 2:
        return 0
    return comb(free, q.k - 2)


def iter_compositions(total: int, parts: int, first_min: int = 1, other_min: int = 1) -> Iterator[tuple[int, ...]]:
    if parts < 1:
        raise ValueError(f"parts must be positive, got {parts}")

    def rec(remaining, slots, lo):
        if slots == 1:
            if remaining >= lo:
                yield (remaining,)
            return
        for head in range(lo, remaining - other_min * (slots - 1) + 1):
            for tail in rec(remaining - head, slots - 1, other_min):
                yield (head,) + tail

    yield from rec(total, parts, first_min)


def constrained_compositions(total: int, parts: int, first_min: int = 1, other_min: int = 1) -> list[tuple[int, ...]]:
    """Ordered tuples of ``parts`` integers summing to ``total``, lexicographic.

    ``tuple[0] >= first_min`` and every other entry ``>= other_min``.
    """
    return list(iter_compositions(total, parts, first_min, other_min))


def crosscheck(N: int, n: int, k: int) -> dict:
    q = CountQuery(N, n, k)
    formula = max_protocols(q.N, q.n, q.k)
    enumerated = len(constrained_compositions(q.N - q.n, q.k - 1, q.n, 1))
    return {"N": q.N, "n": q.n, "k": q.k, "formula": formula, "enumerated": enumerated, "match": formula == enumerated}


def crosscheck_grid(max_N: int, max_n: int, max_k: int, min_k: int = 3) -> list[dict]:
    rows = []
    for N in range(1, max_N + 1):
        for n in range(1, min(max_n, N) + 1):
            for k in range(min_k, max_k + 1):
                rows.append(crosscheck(N, n, k))
    return rows
