"""Splitting protocols: party assignments, measurement scripts and their execution.

Qubit labels used by protocols:

* channel qubits are the integers ``1..N`` (qubit 1 leftmost);
* secret qubits are ``"s1" .. "sn"`` and belong to the dealer (party 1);
* reference qubits ``"r1" .. "rn"`` only appear inside :func:`run_reference`.

Parties are numbered ``1..k``; party 1 is the dealer and party ``k`` the
receiver, who holds exactly ``n`` channel qubits. Every measurement outcome is
available to the receiver when the final ``Correct`` step runs.

Execution is exhaustive: every outcome branch with conditional probability
above :data:`qisplit.statevec.ZERO_PROB` is followed, depth first, so results
come out ordered by outcome tuple.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import statevec as sv
from .channels import ChannelDescriptor, bell_pairs, cluster4, ghz
from .statevec import MeasurementBasis, PureState

SUCCESS_TOL = 1e-9
CORRECTABLE_TOL = 1e-9
NO_SIGNALING_TOL = 1e-9


class ProtocolError(ValueError):
    """A protocol that cannot be executed as written."""

    def __init__(self, message: str, violations: Sequence["Violation"] = ()):
        super().__init__(message)
        self.violations = list(violations)


class NotCorrectable(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def secret_label(i: int) -> str:
    return f"s{i}"


def ref_label(i: int) -> str:
    return f"r{i}"


@dataclass(frozen=True)
class PartyAssignment:
    N: int
    n: int
    blocks: tuple[tuple[int, ...], ...]
    contiguous: bool = True

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(tuple(int(q) for q in b) for b in self.blocks))

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], n: int) -> "PartyAssignment":
        blocks, start = [], 1
        for size in sizes:
            blocks.append(tuple(range(start, start + size)))
            start += size
        return cls(N=start - 1, n=n, blocks=tuple(blocks))

    @property
    def k(self) -> int:
        return len(self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    @property
    def dealer(self) -> tuple[int, ...]:
        return self.blocks[0]

    @property
    def receiver(self) -> tuple[int, ...]:
        return self.blocks[-1]

    @property
    def secret(self) -> tuple[str, ...]:
        return tuple(secret_label(i) for i in range(1, self.n + 1))

    def qubits_of(self, party: int) -> tuple:
        if not 1 <= party <= self.k:
            raise ValueError(f"no party {party} in a {self.k}-party assignment")
        own = self.blocks[party - 1]
        return self.secret + own if party == 1 else own

    def owner(self, label) -> int | None:
        if isinstance(label, str):
            return 1 if label in self.secret else None
        for p, block in enumerate(self.blocks, start=1):
            if label in block:
                return p
        return None

    def violations(self) -> list[Violation]:
        out = []
        if self.n < 1:
            out.append(Violation("assignment", f"secret size n={self.n} must be positive"))
        if self.k < 3:
            out.append(Violation("assignment", f"need at least 3 parties, got {self.k}"))
        flat = [q for b in self.blocks for q in b]
        if sorted(flat) != list(range(1, self.N + 1)):
            out.append(Violation("assignment", f"blocks {self.blocks} do not partition 1..{self.N}"))
        for p, b in enumerate(self.blocks, start=1):
            if not b:
                out.append(Violation("assignment", f"party {p} holds no qubits"))
        if self.blocks and len(self.receiver) != self.n:
            out.append(Violation("assignment", f"receiver holds {len(self.receiver)} qubits, expected n={self.n}"))
        if self.contiguous and flat != list(range(1, len(flat) + 1)):
            out.append(Violation("assignment", "blocks are not contiguous runs in qubit order"))
        return out


@dataclass(frozen=True, eq=False)
class Measure:
    """Projective measurement by ``party`` on ``qubits``.

    ``adaptive`` optionally maps a tuple of earlier outcomes to a basis that
    replaces ``basis`` on that branch.
    """

    party: int
    qubits: tuple
    basis: MeasurementBasis
    adaptive: Mapping[tuple, MeasurementBasis] | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(self.qubits))

    def basis_for(self, prior: tuple) -> MeasurementBasis:
        if self.adaptive and prior in self.adaptive:
            return self.adaptive[prior]
        return self.basis


@dataclass(frozen=True, eq=False)
class Correct:
    party: int
    mode: str = "auto"
    table: Mapping[tuple, np.ndarray] | None = None


Step = Measure | Correct


@dataclass(frozen=True, eq=False)
class ProtocolSpec:
    assignment: PartyAssignment
    steps: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def measurements(self) -> tuple[Measure, ...]:
        return tuple(s for s in self.steps if isinstance(s, Measure))

    @property
    def correction(self) -> Correct | None:
        last = self.steps[-1] if self.steps else None
        return last if isinstance(last, Correct) else None


@dataclass(frozen=True, eq=False)
class BranchResult:
    outcomes: tuple
    probability: float
    correction: np.ndarray | None = None
    failure: str | None = None
    fidelity: float | None = None
    residual_operator: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        if self.failure is not None:
            return False
        return self.fidelity is None or self.fidelity >= 1 - SUCCESS_TOL


def validate(spec: ProtocolSpec) -> list[Violation]:
    """Every invariant ``spec`` breaks; an empty list means the spec is valid."""
    a = spec.assignment
    out = a.violations()
    steps = spec.steps
    if not steps:
        return out + [Violation("structure", "no steps")]

    corrects = [i for i, s in enumerate(steps) if isinstance(s, Correct)]
    if not corrects:
        out.append(Violation("structure", "no Correct step"))
    elif corrects != [len(steps) - 1]:
        out.append(Violation("structure", "the single Correct step must be the final step"))
    for i, s in enumerate(steps):
        if not isinstance(s, (Measure, Correct)):
            out.append(Violation("structure", f"step {i} is neither Measure nor Correct"))

    seen: set = set()
    last_party = 0
    for i, s in enumerate(steps):
        if not isinstance(s, Measure):
            continue
        if not 1 <= s.party < a.k:
            out.append(Violation("order", f"step {i}: party {s.party} may not measure (parties 1..{a.k - 1} act)"))
        if s.party < last_party:
            out.append(Violation("order", f"step {i}: party {s.party} acts after party {last_party}"))
        last_party = max(last_party, s.party)
        if not s.qubits:
            out.append(Violation("structure", f"step {i}: empty qubit list"))
        for q in s.qubits:
            owner = a.owner(q)
            if owner is None:
                out.append(Violation("ownership", f"step {i}: unknown qubit {q!r}"))
            elif owner != s.party:
                out.append(Violation("ownership", f"step {i}: party {s.party} measures qubit {q!r} owned by party {owner}"))
            if q in seen:
                out.append(Violation("structure", f"step {i}: qubit {q!r} measured twice"))
            seen.add(q)
        bases = [s.basis] + list((s.adaptive or {}).values())
        for b in bases:
            if b.arity != len(s.qubits):
                out.append(Violation("basis", f"step {i}: basis {b.name!r} has arity {b.arity}, step measures {len(s.qubits)} qubits"))

    must_measure = set(a.secret) | {q for b in a.blocks[:-1] for q in b}
    missing = must_measure - seen
    if missing:
        out.append(Violation("coverage", f"qubits never measured: {sorted(map(str, missing))}"))

    c = spec.correction
    if c is not None:
        if c.party != a.k:
            out.append(Violation("ownership", f"Correct step by party {c.party}, receiver is party {a.k}"))
        if c.mode not in ("auto", "explicit"):
            out.append(Violation("correction", f"unknown correction mode {c.mode!r}"))
        elif c.mode == "explicit":
            if not c.table:
                out.append(Violation("correction", "explicit mode needs a table"))
            else:
                d = 2**a.n
                for key, u in c.table.items():
                    u = np.asarray(u)
                    if u.shape != (d, d) or not sv.is_unitary(u, 1e-9):
                        out.append(Violation("correction", f"table entry {key} is not a {d}x{d} unitary"))
    return out


def _require_valid(channel: ChannelDescriptor, spec: ProtocolSpec) -> None:
    problems = validate(spec)
    if problems:
        raise ProtocolError("invalid protocol: " + "; ".join(map(str, problems)), problems)
    if channel.num_qubits != spec.assignment.N:
        raise ProtocolError(f"channel has {channel.num_qubits} qubits, assignment expects {spec.assignment.N}")


@dataclass
class _Path:
    outcomes: tuple
    probability: float
    amplitudes: np.ndarray
    labels: tuple


def _walk(amps, labels, steps, outcomes=(), prob=1.0, zero_prob=sv.ZERO_PROB) -> Iterator[_Path]:
    if not steps:
        yield _Path(outcomes, prob, amps, labels)
        return
    step, rest = steps[0], steps[1:]
    basis = step.basis_for(outcomes)
    pos = [labels.index(q) for q in step.qubits]
    rows = sv.project(amps, len(labels), pos, basis)
    probs = np.einsum("ij,ij->i", rows.conj(), rows).real
    remaining = tuple(q for q in labels if q not in step.qubits)
    for j, p in enumerate(probs):
        if p < zero_prob:
            continue
        yield from _walk(rows[j] / np.sqrt(p), remaining, rest, outcomes + (basis.labels[j],), prob * p, zero_prob)


def _reordered(amps: np.ndarray, labels: tuple, order: Sequence) -> np.ndarray:
    nq = len(labels)
    perm = [labels.index(q) for q in order]
    return np.transpose(amps.reshape([2] * nq), perm).reshape(-1)


def _reference_input(channel: ChannelDescriptor, n: int) -> tuple[np.ndarray, tuple]:
    labels = []
    for i in range(1, n + 1):
        labels += [ref_label(i), secret_label(i)]
    labels += list(range(1, channel.num_qubits + 1))
    amps = np.kron(bell_pairs(n).state.amplitudes, channel.state.amplitudes)
    return amps, tuple(labels)


def _secret_input(channel: ChannelDescriptor, secret: PureState) -> tuple[np.ndarray, tuple]:
    n = secret.num_qubits
    labels = tuple(secret_label(i) for i in range(1, n + 1)) + tuple(range(1, channel.num_qubits + 1))
    return np.kron(secret.amplitudes, channel.state.amplitudes), labels


def synthesize_correction(M, tol: float = CORRECTABLE_TOL) -> np.ndarray:
    """Receiver unitary ``U`` with ``(I (x) U)`` mapping the residual onto ``|Phi+>^n``.

    ``M`` is the residual reshaped as (reference rows, receiver columns). The
    branch is correctable iff ``M^dag M`` is proportional to the identity, in
    which case ``U = d^(-1/2) (M^T)^(-1)`` for the Frobenius-normalized ``M``.
    Raises :class:`NotCorrectable` with reason ``"singular"`` or
    ``"not_proportional"`` otherwise.
    """
    M = np.asarray(M, dtype=complex)
    d = M.shape[0]
    if M.shape != (d, d):
        raise ValueError(f"residual operator must be square, got {M.shape}")
    norm = np.linalg.norm(M)
    if norm == 0:
        raise NotCorrectable("singular", "zero residual")
    Mn = M / norm
    smallest = np.linalg.svd(Mn, compute_uv=False).min()
    if smallest * np.sqrt(d) < tol:
        raise NotCorrectable("singular", f"smallest singular value {smallest:.3e}")
    dev = np.abs(Mn.conj().T @ Mn - np.eye(d) / d).max()
    if dev > tol:
        raise NotCorrectable("not_proportional", f"M^dag M deviates from I/{d} by {dev:.3e}")
    U = np.linalg.inv(Mn.T) / np.sqrt(d)
    if not sv.is_unitary(U, tol):
        raise NotCorrectable("not_proportional", "synthesized correction is not unitary")
    return U


def _reference_paths(channel: ChannelDescriptor, spec: ProtocolSpec) -> Iterator[_Path]:
    amps, labels = _reference_input(channel, spec.assignment.n)
    return _walk(amps, labels, spec.measurements)


def _reference_branch(path: _Path, a: PartyAssignment) -> BranchResult:
    refs = tuple(ref_label(i) for i in range(1, a.n + 1))
    if set(path.labels) != set(refs) | set(a.receiver):
        raise ProtocolError(
            f"branch {path.outcomes}: residual register {path.labels} is not reference + receiver qubits"
        )
    d = 2**a.n
    M = _reordered(path.amplitudes, path.labels, refs + a.receiver).reshape(d, d)
    try:
        U = synthesize_correction(M)
    except NotCorrectable as exc:
        return BranchResult(path.outcomes, path.probability, None, exc.reason, None, M)
    fid = float(min(1.0, abs(np.trace(M @ U.T)) ** 2 / d))
    return BranchResult(path.outcomes, path.probability, U, None, fid, M)


def run_reference(channel: ChannelDescriptor, spec: ProtocolSpec) -> list[BranchResult]:
    """Run ``spec`` with halves of ``n`` Bell pairs standing in for the secret.

    A protocol works for every secret iff every branch returned here is
    correctable.
    """
    _require_valid(channel, spec)
    return [_reference_branch(p, spec.assignment) for p in _reference_paths(channel, spec)]


def is_perfect(channel: ChannelDescriptor, spec: ProtocolSpec) -> tuple[bool, int]:
    """Short-circuiting form of ``all(b.ok for b in run_reference(...))``.

    Returns the verdict and the number of branches evaluated.
    """
    _require_valid(channel, spec)
    count = 0
    for path in _reference_paths(channel, spec):
        count += 1
        if not _reference_branch(path, spec.assignment).ok:
            return False, count
    return True, count


def run_with_secret(
    channel: ChannelDescriptor,
    spec: ProtocolSpec,
    secret: PureState,
    reference: Sequence[BranchResult] | None = None,
) -> list[BranchResult]:
    """Execute ``spec`` on ``secret (x) channel`` and score every branch.

    In auto mode corrections come from :func:`run_reference` (pass
    ``reference`` to reuse an earlier run across many secrets).
    """
    _require_valid(channel, spec)
    a = spec.assignment
    if secret.num_qubits != a.n:
        raise ProtocolError(f"secret has {secret.num_qubits} qubits, assignment expects n={a.n}")
    corr = spec.correction
    if corr.mode == "auto":
        if reference is None:
            reference = run_reference(channel, spec)
        table = {r.outcomes: r for r in reference}
    amps, labels = _secret_input(channel, secret)
    results = []
    for path in _walk(amps, labels, spec.measurements):
        if set(path.labels) != set(a.receiver):
            raise ProtocolError(f"branch {path.outcomes}: residual register {path.labels} is not the receiver block")
        out = _reordered(path.amplitudes, path.labels, a.receiver)
        if corr.mode == "auto":
            ref = table.get(path.outcomes)
            if ref is None:
                results.append(BranchResult(path.outcomes, path.probability, None, "unreachable"))
                continue
            if ref.failure is not None:
                results.append(BranchResult(path.outcomes, path.probability, None, ref.failure))
                continue
            U = ref.correction
        else:
            if path.outcomes not in corr.table:
                raise ProtocolError(f"outcome {path.outcomes} is reachable but missing from the explicit table")
            U = np.asarray(corr.table[path.outcomes], dtype=complex)
        fid = float(min(1.0, abs(np.vdot(secret.amplitudes, U @ out)) ** 2))
        results.append(BranchResult(path.outcomes, path.probability, U, None, fid))
    return results


def no_signaling_check(
    channel: ChannelDescriptor,
    spec: ProtocolSpec,
    party: int,
    stage: int,
    secret: PureState | None = None,
) -> float:
    """Trace distance between ``party``'s branch-averaged state after ``stage``
    measurement steps and its state before the protocol.

    Only the party's still-unmeasured qubits are compared. Without a
    ``secret`` the reference composition is used, which covers every secret
    at once.
    """
    _require_valid(channel, spec)
    a = spec.assignment
    steps = spec.measurements
    if not 0 <= stage <= len(steps):
        raise ValueError(f"stage {stage} outside 0..{len(steps)}")
    own = a.qubits_of(party)
    if secret is None:
        amps, labels = _reference_input(channel, a.n)
    else:
        amps, labels = _secret_input(channel, secret)
    measured = {q for s in steps[:stage] for q in s.qubits}
    keep = [q for q in own if q not in measured]
    if not keep:
        return 0.0
    before = sv.reduced_density(amps, len(labels), [labels.index(q) for q in keep])
    after = np.zeros_like(before)
    for path in _walk(amps, labels, steps[:stage]):
        pos = [path.labels.index(q) for q in keep]
        after += path.probability * sv.reduced_density(path.amplitudes, len(path.labels), pos)
    return sv.trace_distance(after, before)


def classical_cost(spec: ProtocolSpec) -> dict[int, int]:
    """Bits broadcast per party: one per measured qubit."""
    cost = {p: 0 for p in range(1, spec.assignment.k + 1)}
    for s in spec.measurements:
        cost[s.party] = cost.get(s.party, 0) + int(np.log2(s.basis.size))
    return cost


def pauli_table(results: Sequence[BranchResult]) -> dict[tuple, tuple[str, np.ndarray]]:
    """Name each synthesized correction as a Pauli string, up to global phase.

    Raises :class:`ValueError` if some branch failed or its correction is not
    a Pauli string.
    """
    from .cryptobounds import pauli_strings, pauli_names

    if not results:
        return {}
    d = results[0].correction.shape[0] if results[0].correction is not None else None
    if d is None:
        raise ValueError(f"branch {results[0].outcomes} has no correction")
    n = int(np.log2(d))
    paulis = list(zip(pauli_names(n), pauli_strings(n)))
    table = {}
    for r in results:
        if r.correction is None:
            raise ValueError(f"branch {r.outcomes} has no correction ({r.failure})")
        for name, P in paulis:
            if abs(abs(np.trace(P.conj().T @ r.correction)) - d) < 1e-9:
                table[r.outcomes] = (name, P)
                break
        else:
            raise ValueError(f"branch {r.outcomes}: correction is not a Pauli string")
    return table


# -- built-in scripts ---------------------------------------------------------


def hillery() -> ProtocolSpec:
    """GHZ3 splitting: dealer Bell-measures (secret, 1), party 2 measures 2 in X."""
    a = PartyAssignment(3, 1, ((1,), (2,), (3,)))
    return ProtocolSpec(a, (
        Measure(1, ("s1", 1), sv.bell_basis()),
        Measure(2, (2,), sv.hadamard_basis()),
        Correct(3),
    ), name="hillery")


def ghz4_bell_chain() -> ProtocolSpec:
    a = PartyAssignment(4, 1, ((1,), (2, 3), (4,)))
    return ProtocolSpec(a, (
        Measure(1, ("s1", 1), sv.bell_basis()),
        Measure(2, (2, 3), sv.bell_basis()),
        Correct(3),
    ), name="ghz4-bell-chain")


def ghz4_ghz_measurement() -> ProtocolSpec:
    a = PartyAssignment(4, 1, ((1, 2), (3,), (4,)))
    return ProtocolSpec(a, (
        Measure(1, ("s1", 1, 2), sv.ghz_basis(3)),
        Measure(2, (3,), sv.hadamard_basis()),
        Correct(3),
    ), name="ghz4-ghz-measurement")


def cluster4_dressed_ghz() -> ProtocolSpec:
    """Two-qubit secret over the four-qubit cluster state; dealer holds only qubit 1.

    The dealer's basis is the GHZ3 basis with a Hadamard on the first qubit,
    whose first vector is (|000> + |100> + |011> - |111>)/2.
    """
    a = PartyAssignment(4, 2, ((1,), (2,), (3, 4)))
    return ProtocolSpec(a, (
        Measure(1, ("s1", "s2", 1), sv.ghz_basis(3, "HII")),
        Measure(2, (2,), sv.hadamard_basis()),
        Correct(3),
    ), name="cluster4-dressed-ghz")


BUILTIN_SCRIPTS = {
    "hillery": (lambda: ghz(3), hillery),
    "ghz4-bell-chain": (lambda: ghz(4), ghz4_bell_chain),
    "ghz4-ghz-measurement": (lambda: ghz(4), ghz4_ghz_measurement),
    "cluster4-dressed-ghz": (cluster4, cluster4_dressed_ghz),
}


# -- JSON protocol files ------------------------------------------------------

_SINGLE = {"computational": sv.computational_basis, "hadamard": sv.hadamard_basis}


def basis_from_name(name: str, q: int) -> MeasurementBasis:
    """Resolve names such as ``bell``, ``ghz``, ``ghz3[HII]`` or ``bell*hadamard``.

    ``computational``, ``hadamard`` and ``ghz`` stretch to ``q`` qubits.
    """
    if "*" in name:
        factors = [_named_factor(part) for part in name.split("*")]
        basis = sv.product_basis(factors)
        if basis.arity != q:
            raise ValueError(f"basis {name!r} has arity {basis.arity}, expected {q}")
        return basis
    if name in _SINGLE:
        return _SINGLE[name](q)
    if name == "bell":
        if q != 2:
            raise ValueError(f"bell basis needs 2 qubits, got {q}")
        return sv.bell_basis()
    if name == "ghz":
        return sv.ghz_basis(q)
    basis = _named_factor(name)
    if basis.arity != q:
        raise ValueError(f"basis {name!r} has arity {basis.arity}, expected {q}")
    return basis


def _named_factor(name: str) -> MeasurementBasis:
    if name in _SINGLE:
        return _SINGLE[name](1)
    if name == "bell":
        return sv.bell_basis()
    for prefix, make in (("computational", sv.computational_basis), ("hadamard", sv.hadamard_basis)):
        if name.startswith(prefix) and name[len(prefix):].isdigit():
            return make(int(name[len(prefix):]))
    if name.startswith("ghz"):
        body = name[3:]
        dressing = None
        if "[" in body:
            body, _, dressing = body.partition("[")
            dressing = dressing.rstrip("]")
        if body.isdigit():
            return sv.ghz_basis(int(body), dressing)
        if not body and dressing:
            return sv.ghz_basis(len(dressing), dressing)
    raise ValueError(f"unknown basis name {name!r}")


def _complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        re_, im_ = x
        return complex(float(re_), float(im_))
    if isinstance(x, str):
        return complex(x.replace(" ", ""))
    return complex(x)


def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def _basis_to_json(b: MeasurementBasis):
    try:
        if np.array_equal(basis_from_name(b.name, b.arity).vectors, b.vectors):
            return b.name
    except ValueError:
        pass
    return {"custom": [[_pair(z) for z in v] for v in b.vectors]}


def _basis_from_json(doc, q: int) -> MeasurementBasis:
    if isinstance(doc, str):
        return basis_from_name(doc, q)
    if isinstance(doc, dict) and "custom" in doc:
        vecs = np.array([[_complex(z) for z in v] for v in doc["custom"]], dtype=complex)
        b = MeasurementBasis("custom", vecs)
        if b.arity != q:
            raise ValueError(f"custom basis has arity {b.arity}, step measures {q} qubits")
        return b
    raise ValueError(f"bad basis entry {doc!r}")


def _qubit_from_json(x):
    if isinstance(x, str) and not x.startswith("s"):
        return int(x)
    return x


def spec_to_json(spec: ProtocolSpec) -> dict:
    a = spec.assignment
    steps = []
    for s in spec.steps:
        if isinstance(s, Measure):
            steps.append({"measure": {"party": s.party, "qubits": list(s.qubits), "basis": _basis_to_json(s.basis)}})
        else:
            c = {"mode": s.mode}
            if s.mode == "explicit":
                c["table"] = [
                    {"outcomes": list(k), "unitary": [[_pair(z) for z in row] for row in np.asarray(u)]}
                    for k, u in sorted(s.table.items())
                ]
            steps.append({"correct": c})
    doc = {
        "assignment": {"N": a.N, "n": a.n, "k": a.k, "blocks": [list(b) for b in a.blocks]},
        "steps": steps,
    }
    if spec.name:
        doc["name"] = spec.name
    return doc


def spec_from_json(doc: dict) -> ProtocolSpec:
    try:
        ad = doc["assignment"]
        a = PartyAssignment(int(ad["N"]), int(ad["n"]), tuple(tuple(b) for b in ad["blocks"]))
        if "k" in ad and int(ad["k"]) != a.k:
            raise ProtocolError(f"assignment says k={ad['k']} but lists {a.k} blocks")
        steps = []
        for entry in doc["steps"]:
            if "measure" in entry:
                m = entry["measure"]
                qubits = tuple(_qubit_from_json(q) for q in m["qubits"])
                steps.append(Measure(int(m["party"]), qubits, _basis_from_json(m["basis"], len(qubits))))
            elif "correct" in entry:
                c = entry["correct"]
                mode = c.get("mode", "auto")
                table = None
                if mode == "explicit":
                    table = {
                        tuple(row["outcomes"]): np.array([[_complex(z) for z in r] for r in row["unitary"]])
                        for row in c.get("table", [])
                    }
                steps.append(Correct(a.k, mode, table))
            else:
                raise ProtocolError(f"step {entry!r} is neither measure nor correct")
    except (KeyError, TypeError) as exc:
        raise ProtocolError(f"malformed protocol document: {exc!r}") from exc
    return ProtocolSpec(a, tuple(steps), name=str(doc.get("name", "")))


def load_protocol(path) -> ProtocolSpec:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"{path}: not valid JSON ({exc})") from exc
    return spec_from_json(doc)


def save_protocol(spec: ProtocolSpec, path) -> None:
    Path(path).write_text(json.dumps(spec_to_json(spec), indent=1) + "\n")
