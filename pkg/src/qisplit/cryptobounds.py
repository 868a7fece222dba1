"""Random-unitary encryption of quantum states.

A mixture ``T(rho) = sum_j w_j U_j rho U_j^dag`` hides every input iff it
sends each state to ``I/D``. With ``P`` unitaries the Choi matrix has rank at
most ``P``, while a fully depolarizing map has a full-rank Choi matrix, so at
least ``D**2`` unitaries (``2n`` bits of key for ``n`` qubits) are needed.

The necessity direction is checked here numerically, by sweeping random
undersized mixtures, not proved.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np

from .statevec import I2, SQRT2_INV, X, Y, Z, PureState, is_unitary

RANK_TOL = 1e-9
DEPOLARIZING_TOL = 1e-9

_PAULIS = {"I": I2, "X": X, "Y": Y, "Z": Z}


def pauli_names(n: int) -> list[str]:
    return ["".join(p) for p in product("IXYZ", repeat=n)]


def pauli_strings(n: int) -> list[np.ndarray]:
    """All ``4**n`` tensor products of I, X, Y, Z, ordered as :func:`pauli_names`."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    return [reduce(np.kron, [_PAULIS[c] for c in name]) for name in pauli_names(n)]


@dataclass(frozen=True, eq=False)
class UnitaryMixture:
    unitaries: tuple
    weights: tuple

    def __post_init__(self):
        us = tuple(np.asarray(u, dtype=complex) for u in self.unitaries)
        ws = tuple(float(w) for w in self.weights)
        if not us:
            raise ValueError("mixture needs at least one unitary")
        if len(us) != len(ws):
            raise ValueError(f"{len(us)} unitaries but {len(ws)} weights")
        d = us[0].shape[0]
        for u in us:
            if u.shape != (d, d):
                raise ValueError(f"unitary of shape {u.shape} in a dimension-{d} mixture")
            if not is_unitary(u, 1e-10):
                raise ValueError("mixture element is not unitary")
        if min(ws) < 0 or abs(sum(ws) - 1) > 1e-12:
            raise ValueError("weights must be non-negative and sum to 1")
        object.__setattr__(self, "unitaries", us)
        object.__setattr__(self, "weights", ws)

    @classmethod
    def uniform(cls, unitaries: Sequence) -> "UnitaryMixture":
        return cls(tuple(unitaries), (1 / len(unitaries),) * len(unitaries))

    @property
    def dim(self) -> int:
        return self.unitaries[0].shape[0]

    def __len__(self):
        return len(self.unitaries)


def pauli_mixture(n: int) -> UnitaryMixture:
    return UnitaryMixture.uniform(pauli_strings(n))


def mixture_output(m: UnitaryMixture, psi) -> np.ndarray:
    v = np.asarray(psi.amplitudes if isinstance(psi, PureState) else psi, dtype=complex).reshape(-1)
    if v.size != m.dim:
        raise ValueError(f"state of dimension {v.size} for a dimension-{m.dim} mixture")
    rho = np.outer(v, v.conj())
    return sum(w * u @ rho @ u.conj().T for u, w in zip(m.unitaries, m.weights))


def choi_matrix(m: UnitaryMixture) -> np.ndarray:
    """``(T (x) id)(|Phi+><Phi+|)``, a unit-trace ``D**2 x D**2`` matrix."""
    d = m.dim
    phi = np.eye(d, dtype=complex).reshape(-1) / np.sqrt(d)
    out = np.zeros((d * d, d * d), dtype=complex)
    for u, w in zip(m.unitaries, m.weights):
        v = np.kron(u, np.eye(d)) @ phi
        out += w * np.outer(v, v.conj())
    return out


def spanning_probes(d: int) -> list[np.ndarray]:
    """``d**2`` pure states whose projectors span all ``d x d`` matrices."""
    e = np.eye(d, dtype=complex)
    probes = [e[i] for i in range(d)]
    for i in range(d):
        for j in range(i + 1, d):
            probes.append((e[i] + e[j]) * SQRT2_INV)
            probes.append((e[i] + 1j * e[j]) * SQRT2_INV)
    return probes


def choi_rank(m: UnitaryMixture, tol: float = RANK_TOL) -> int:
    return int((np.linalg.eigvalsh(choi_matrix(m)) > tol).sum())


@dataclass(frozen=True)
class EncryptionAudit:
    depolarizing: bool
    choi_rank: int
    min_bits: float
    max_deviation: float


def encryption_audit(m: UnitaryMixture, tol: float = DEPOLARIZING_TOL) -> EncryptionAudit:
    d = m.dim
    target = np.eye(d) / d
    dev = max(np.abs(mixture_output(m, p) - target).max() for p in spanning_probes(d))
    rank = choi_rank(m)
    return EncryptionAudit(bool(dev <= tol), rank, float(np.log2(rank)), float(dev))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_mixture(d: int, size: int, rng: np.random.Generator) -> UnitaryMixture:
    weights = rng.dirichlet(np.ones(size))
    weights = weights / weights.sum()
    return UnitaryMixture(tuple(random_unitary(d, rng) for _ in range(size)), tuple(weights))


def undersized_sweep(d: int, size: int, trials: int, seed: int) -> list[EncryptionAudit]:
    rng = np.random.default_rng(seed)
    return [encryption_audit(random_mixture(d, size, rng)) for _ in range(trials)]
