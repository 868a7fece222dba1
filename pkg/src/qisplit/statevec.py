"""Dense pure-state simulation on small qubit registers.

Index convention: qubit 0 is the most significant bit, so the basis label
``|b0 b1 ... b(N-1)>`` sits at index ``sum(b_j * 2**(N-1-j))``. This matches
left-to-right ket labels such as ``|0110>``. Qubit positions in this module
are 0-based; the protocol layer maps its own labels onto positions.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from itertools import product
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
ZERO_PROB = 1e-12
ORTHO_TOL = 1e-10
DM_TOL = 1e-10
MAX_QUBITS = 16

SQRT2_INV = 1 / np.sqrt(2)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) * SQRT2_INV


def _num_qubits_for(dim: int) -> int:
    q = int(dim).bit_length() - 1
    if dim < 1 or 2**q != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return q


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized amplitude vector over ``num_qubits`` qubits."""

    amplitudes: np.ndarray
    tol: float = field(default=NORM_TOL, repr=False)

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        nq = _num_qubits_for(amps.size)
        if nq < 1:
            raise ValueError("a state needs at least one qubit")
        if nq > MAX_QUBITS:
            raise ValueError(f"{nq} qubits exceeds the dense limit of {MAX_QUBITS}")
        norm = np.linalg.norm(amps)
        if abs(norm - 1) > self.tol:
            raise ValueError(f"state is not normalized (norm {norm:.3e})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def num_qubits(self) -> int:
        return _num_qubits_for(self.amplitudes.size)

    @classmethod
    def normalized(cls, vector) -> "PureState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(v / norm)

    @classmethod
    def from_label(cls, label: str) -> "PureState":
        """Computational basis state, e.g. ``PureState.from_label("01")``.

        ``+`` and ``-`` are accepted for the Hadamard eigenstates.
        """
        single = {
            "0": np.array([1, 0], dtype=complex),
            "1": np.array([0, 1], dtype=complex),
            "+": np.array([1, 1], dtype=complex) * SQRT2_INV,
            "-": np.array([1, -1], dtype=complex) * SQRT2_INV,
        }
        try:
            parts = [single[c] for c in label]
        except KeyError as exc:
            raise ValueError(f"bad state label {label!r}") from exc
        return cls(reduce(np.kron, parts))

    def tensor(self, other: "PureState") -> "PureState":
        return tensor(self, other)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True, eq=False)
class MeasurementBasis:
    """Orthonormal basis of ``2**arity`` vectors; row ``j`` is outcome ``j``."""

    name: str
    vectors: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        vecs = np.array(self.vectors, dtype=complex)
        if vecs.ndim != 2 or vecs.shape[0] != vecs.shape[1]:
            raise ValueError(f"basis {self.name!r}: need a square array of vectors")
        _num_qubits_for(vecs.shape[0])
        gram = vecs.conj() @ vecs.T
        err = np.abs(gram - np.eye(len(vecs))).max()
        if err > ORTHO_TOL:
            raise ValueError(f"basis {self.name!r} is not orthonormal (deviation {err:.2e})")
        vecs.setflags(write=False)
        object.__setattr__(self, "vectors", vecs)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(len(vecs))))
        elif len(self.labels) != len(vecs):
            raise ValueError(f"basis {self.name!r}: label count does not match vector count")

    @property
    def arity(self) -> int:
        return _num_qubits_for(self.vectors.shape[0])

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class Branch:
    outcome: int
    probability: float
    state: PureState | None


@dataclass(frozen=True)
class BranchEnsemble:
    """Outcome branches of one projective measurement.

    ``remaining`` lists the pre-measurement positions of the qubits that
    survive, in the order they appear in every post-measurement state.
    ``state`` is ``None`` only when no qubits survive.
    """

    branches: tuple[Branch, ...]
    measured: tuple[int, ...]
    remaining: tuple[int, ...]
    zero_branches: tuple[int, ...] = ()

    @property
    def total_probability(self) -> float:
        return float(sum(b.probability for b in self.branches))


# -- canonical bases ---------------------------------------------------------


def computational_basis(q: int = 1) -> MeasurementBasis:
    return MeasurementBasis("computational" if q == 1 else f"computational{q}", np.eye(2**q))


def hadamard_basis(q: int = 1) -> MeasurementBasis:
    hq = reduce(np.kron, [H] * q)
    return MeasurementBasis("hadamard" if q == 1 else f"hadamard{q}", hq.T)


def ghz_basis(q: int, dressing: str | None = None) -> MeasurementBasis:
    """Basis ``D (|x> + (-1)^s |~x>)/sqrt(2)`` with the first bit of ``x`` fixed to 0.

    Outcomes are ordered by ``x`` then ``s``; for ``q = 2`` this is
    Phi+, Phi-, Psi+, Psi-. ``dressing`` is a string over ``{"I", "H"}``,
    one letter per qubit.
    """
    if q < 1:
        raise ValueError("GHZ basis needs at least one qubit")
    dim = 2**q
    full = dim - 1
    vecs = []
    for x in range(dim // 2):
        for s in (0, 1):
            v = np.zeros(dim, dtype=complex)
            v[x] += SQRT2_INV
            v[full ^ x] += (-1) ** s * SQRT2_INV
            vecs.append(v)
    vecs = np.array(vecs)
    name = "bell" if q == 2 else f"ghz{q}"
    if dressing:
        if len(dressing) != q or set(dressing) - {"I", "H"}:
            raise ValueError(f"bad dressing {dressing!r} for {q} qubits")
        d = reduce(np.kron, [H if c == "H" else I2 for c in dressing])
        vecs = vecs @ d.T
        if "H" in dressing:
            name = f"ghz{q}[{dressing}]"
    return MeasurementBasis(name, vecs)


def bell_basis() -> MeasurementBasis:
    return ghz_basis(2)


def product_basis(factors: Sequence[MeasurementBasis]) -> MeasurementBasis:
    vecs = reduce(np.kron, [f.vectors for f in factors])
    return MeasurementBasis("*".join(f.name for f in factors), vecs)


# -- operations ---------------------------------------------------------------


def tensor(a: PureState, b: PureState) -> PureState:
    return PureState(np.kron(a.amplitudes, b.amplitudes), tol=1e-10)


def _check_positions(nq: int, qubits: Sequence[int]) -> list[int]:
    qs = [int(q) for q in qubits]
    if not qs:
        raise ValueError("empty qubit list")
    if len(set(qs)) != len(qs):
        raise ValueError(f"repeated qubit in {qs}")
    for q in qs:
        if not 0 <= q < nq:
            raise IndexError(f"qubit {q} out of range for a {nq}-qubit register")
    return qs


def apply_on(s: PureState, qubits: Sequence[int], u) -> PureState:
    """Apply ``u`` to ``qubits`` (in the given order), identity elsewhere."""
    nq = s.num_qubits
    qs = _check_positions(nq, qubits)
    u = np.asarray(u, dtype=complex)
    k = len(qs)
    if u.shape != (2**k, 2**k):
        raise ValueError(f"operator of shape {u.shape} does not act on {k} qubits")
    rest = [q for q in range(nq) if q not in qs]
    perm = qs + rest
    psi = np.transpose(s.amplitudes.reshape([2] * nq), perm).reshape(2**k, -1)
    psi = (u @ psi).reshape([2] * nq)
    out = np.transpose(psi, np.argsort(perm)).reshape(-1)
    return PureState(out, tol=1e-10)


def measure(
    s: PureState,
    qubits: Sequence[int],
    basis: MeasurementBasis,
    zero_prob: float = ZERO_PROB,
) -> BranchEnsemble:
    nq = s.num_qubits
    qs = _check_positions(nq, qubits)
    if len(qs) != basis.arity:
        raise ValueError(f"basis {basis.name!r} has arity {basis.arity}, got {len(qs)} qubits")
    rest = tuple(q for q in range(nq) if q not in qs)
    rows = project(s.amplitudes, nq, qs, basis)
    probs = np.einsum("ij,ij->i", rows.conj(), rows).real
    branches, zeros = [], []
    for j, p in enumerate(probs):
        if p < zero_prob:
            zeros.append(basis.labels[j])
            continue
        post = PureState(rows[j] / np.sqrt(p), tol=1e-9) if rest else None
        branches.append(Branch(basis.labels[j], float(p), post))
    return BranchEnsemble(tuple(branches), tuple(qs), rest, tuple(zeros))


def project(amplitudes: np.ndarray, nq: int, qubits: Sequence[int], basis: MeasurementBasis) -> np.ndarray:
    """Unnormalized residuals ``<phi_j|psi>`` as rows, one per basis vector.

    Residual qubits keep their relative order. Raw-array fast path used by
    :func:`measure` and by the protocol executor.
    """
    qs = list(qubits)
    rest = [q for q in range(nq) if q not in qs]
    psi = np.transpose(np.asarray(amplitudes).reshape([2] * nq), qs + rest)
    psi = psi.reshape(2 ** len(qs), -1)
    return basis.vectors.conj() @ psi


def partial_trace(s: PureState, keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix on ``keep`` (ordered as given)."""
    nq = s.num_qubits
    keep = _check_positions(nq, keep)
    return reduced_density(s.amplitudes, nq, keep)


def reduced_density(amplitudes: np.ndarray, nq: int, keep: Sequence[int]) -> np.ndarray:
    keep = list(keep)
    rest = [q for q in range(nq) if q not in keep]
    psi = np.transpose(np.asarray(amplitudes).reshape([2] * nq), keep + rest)
    psi = psi.reshape(2 ** len(keep), -1)
    return psi @ psi.conj().T


def fidelity(a: PureState, b: PureState) -> float:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"register sizes differ: {a.num_qubits} vs {b.num_qubits}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2))


def as_operator(s: PureState, row_qubits: Sequence[int], col_qubits: Sequence[int]) -> np.ndarray:
    """Reshape ``s`` into ``M`` with ``M[r, c]`` the amplitude of ``|r>_row |c>_col``."""
    nq = s.num_qubits
    rows, cols = list(row_qubits), list(col_qubits)
    if set(rows) & set(cols):
        raise ValueError("row and column qubits overlap")
    if sorted(rows + cols) != list(range(nq)):
        raise ValueError("row and column qubits must cover the register exactly")
    psi = np.transpose(s.amplitudes.reshape([2] * nq), rows + cols)
    return psi.reshape(2 ** len(rows), 2 ** len(cols)).copy()


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    diff = np.asarray(rho) - np.asarray(sigma)
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())


def is_unitary(u, tol: float = 1e-10) -> bool:
    u = np.asarray(u)
    return u.ndim == 2 and u.shape[0] == u.shape[1] and np.allclose(u.conj().T @ u, np.eye(len(u)), atol=tol, rtol=0)


def check_density_matrix(rho: np.ndarray, tol: float = DM_TOL) -> list[str]:
    """Return the density-matrix invariants ``rho`` violates (empty when valid)."""
    rho = np.asarray(rho)
    problems = []
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        return ["not square"]
    try:
        _num_qubits_for(rho.shape[0])
    except ValueError:
        problems.append("dimension not a power of two")
    if np.abs(rho - rho.conj().T).max() > tol:
        problems.append("not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        problems.append(f"trace {np.trace(rho).real:.3e}")
    if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol:
        problems.append("negative eigenvalue")
    return problems


def pauli_eigenstates(n: int = 1) -> list[PureState]:
    """The 6**n products of single-qubit Pauli eigenstates (a spanning probe set)."""
    single = [
        np.array([1, 0]),
        np.array([0, 1]),
        np.array([1, 1]) * SQRT2_INV,
        np.array([1, -1]) * SQRT2_INV,
        np.array([1, 1j]) * SQRT2_INV,
        np.array([1, -1j]) * SQRT2_INV,
    ]
    return [PureState(reduce(np.kron, combo)) for combo in product(single, repeat=n)]


def random_state(n: int, rng: np.random.Generator) -> PureState:
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return PureState.normalized(v)
