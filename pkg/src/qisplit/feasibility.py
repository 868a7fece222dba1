"""Which qubit distributions admit a working splitting protocol.

The search is exhaustive relative to a finite canonical basis library:
computational and Hadamard single-qubit factors, the Bell basis, and the GHZ
basis family dressed with Hadamards on any subset of qubits. An
``infeasible`` verdict therefore means "no protocol built from this library",
which every verdict states explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Sequence

import numpy as np

from . import statevec as sv
from .channels import ChannelDescriptor
from .counting import constrained_compositions, max_protocols
from .protocol import (
    SUCCESS_TOL,
    Correct,
    Measure,
    PartyAssignment,
    ProtocolSpec,
    is_perfect,
    no_signaling_check,
    run_reference,
    run_with_secret,
    _secret_input,
    _walk,
)
from .statevec import MeasurementBasis, PureState

AUDIT_TOL = 1e-9


class UnsupportedBlock(ValueError):
    pass


def _equivalent(a: MeasurementBasis, b: MeasurementBasis) -> bool:
    """Same set of projectors, i.e. vectors agree up to order and phase."""
    if a.size != b.size:
        return False
    overlaps = np.abs(a.vectors.conj() @ b.vectors.T)
    return bool(np.allclose(np.sort(overlaps, axis=1)[:, -1], 1, atol=1e-9))


def ghz_family(q: int) -> list[MeasurementBasis]:
    return [sv.ghz_basis(q, "".join(d)) for d in product("IH", repeat=q)]


def product_family(q: int) -> list[MeasurementBasis]:
    """Tilings of ``q`` qubits by computational, Hadamard and Bell factors."""
    singles = [sv.computational_basis(1), sv.hadamard_basis(1)]
    bell = sv.bell_basis()

    def tilings(width):
        if width == 0:
            yield []
            return
        for f in singles:
            for rest in tilings(width - 1):
                yield [f] + rest
        if width >= 2:
            for rest in tilings(width - 2):
                yield [bell] + rest

    return [t[0] if len(t) == 1 else sv.product_basis(t) for t in tilings(q)]


@dataclass(frozen=True)
class BasisLibrary:
    max_arity: int = 4
    cap: int | None = None
    ghz: bool = True
    products: bool = True

    def candidates(self, q: int) -> list[MeasurementBasis]:
        if q < 1 or q > self.max_arity:
            raise UnsupportedBlock(f"{q}-qubit measurement exceeds library arity {self.max_arity}")
        return self._cache[q - 1]

    @cached_property
    def _cache(self) -> list[list[MeasurementBasis]]:
        out = []
        for q in range(1, self.max_arity + 1):
            pool = (ghz_family(q) if self.ghz and q > 1 else []) + (product_family(q) if self.products else [])
            unique: list[MeasurementBasis] = []
            for b in pool:
                if not any(_equivalent(b, u) for u in unique):
                    unique.append(b)
            out.append(unique[: self.cap] if self.cap else unique)
        return out

    def describe(self) -> str:
        parts = [p for p, on in (("ghz-family", self.ghz), ("products", self.products)) if on]
        cap = f", at most {self.cap} bases per block" if self.cap else ""
        return f"canonical library ({' + '.join(parts)}, arity <= {self.max_arity}{cap})"


DEFAULT_LIBRARY = BasisLibrary()


@dataclass(frozen=True, eq=False)
class FeasibilityVerdict:
    assignment: PartyAssignment
    status: str
    reason: str | None = None
    spec: ProtocolSpec | None = None
    bases_tried: int = 0
    branches_evaluated: int = 0
    note: str = ""
    audit: str | None = None

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"

    def to_json(self) -> dict:
        doc = {
            "blocks": [list(b) for b in self.assignment.blocks],
            "sizes": list(self.assignment.sizes),
            "status": self.status,
            "reason": self.reason,
            "stats": {"bases_tried": self.bases_tried, "branches_evaluated": self.branches_evaluated},
            "note": self.note,
        }
        if self.spec is not None:
            doc["bases"] = [m.basis.name for m in self.spec.measurements]
        if self.audit is not None:
            doc["theorem1_audit"] = self.audit
        return doc


def enumerate_assignments(N: int, n: int, k: int, contiguous: bool = True) -> list[PartyAssignment]:
    """Receiver gets the last ``n`` qubits; the first ``N - n`` go to parties ``1..k-1``.

    With ``contiguous=False`` the first ``N - n`` qubits may be dealt out in
    any pattern (every party still gets at least one).
    """
    if not N >= n >= 1:
        raise ValueError(f"need N >= n >= 1, got N={N}, n={n}")
    if k < 3:
        raise ValueError(f"need k >= 3 parties, got {k}")
    if contiguous:
        return [PartyAssignment.from_sizes(sizes + (n,), n) for sizes in constrained_compositions(N - n, k - 1)]
    receiver = tuple(range(N - n + 1, N + 1))
    out = []
    for owners in product(range(k - 1), repeat=N - n):
        if len(set(owners)) != k - 1:
            continue
        blocks = tuple(tuple(q + 1 for q, o in enumerate(owners) if o == p) for p in range(k - 1))
        out.append(PartyAssignment(N, n, blocks + (receiver,), contiguous=False))
    return out


def theorem1_filter(assignments: Sequence[PartyAssignment]) -> tuple[list[PartyAssignment], list[FeasibilityVerdict]]:
    """Keep assignments whose dealer holds at least ``n`` channel qubits."""
    kept, removed = [], []
    for a in assignments:
        if len(a.dealer) >= a.n:
            kept.append(a)
        else:
            removed.append(FeasibilityVerdict(
                a, "infeasible", "theorem1",
                note=f"dealer holds {len(a.dealer)} < n={a.n} qubits",
            ))
    return kept, removed


def dealer_order(a: PartyAssignment) -> tuple:
    """Dealer qubits interleaved as (s1, c1, s2, c2, ...) then any extra channel qubits.

    Product bases then pair each secret qubit with a channel qubit.
    """
    pairs = [q for s, c in zip(a.secret, a.dealer) for q in (s, c)]
    return tuple(pairs) + a.secret[len(a.dealer):] + a.dealer[len(a.secret):]


def _build_spec(a: PartyAssignment, bases: Sequence[MeasurementBasis]) -> ProtocolSpec:
    steps = [Measure(1, dealer_order(a), bases[0])]
    for p, basis in enumerate(bases[1:], start=2):
        steps.append(Measure(p, a.blocks[p - 1], basis))
    steps.append(Correct(a.k))
    return ProtocolSpec(a, tuple(steps))


def search(
    channel: ChannelDescriptor,
    assignment: PartyAssignment,
    library: BasisLibrary = DEFAULT_LIBRARY,
) -> FeasibilityVerdict:
    """First library protocol on ``assignment`` whose every branch is correctable.

    The dealer measures its secret and channel qubits jointly; each middle
    party measures its whole block; the receiver corrects. Candidates are
    tried in library order, dealer basis outermost.
    """
    a = assignment
    if channel.num_qubits != a.N:
        raise ValueError(f"channel has {channel.num_qubits} qubits, assignment expects {a.N}")
    problems = a.violations()
    if problems:
        raise ValueError("invalid assignment: " + "; ".join(map(str, problems)))
    arities = [a.n + len(a.dealer)] + [len(b) for b in a.blocks[1:-1]]
    pools = [library.candidates(q) for q in arities]
    tried = branches = 0
    for bases in product(*pools):
        spec = _build_spec(a, bases)
        ok, count = is_perfect(channel, spec)
        tried += 1
        branches += count
        if ok:
            return FeasibilityVerdict(a, "feasible", None, spec, tried, branches, library.describe())
    return FeasibilityVerdict(
        a, "infeasible", "search_exhausted", None, tried, branches,
        f"no protocol found; exhaustive over the {library.describe()}",
    )


@dataclass(frozen=True, eq=False)
class Survey:
    channel: str
    n: int
    k: int
    verdicts: tuple[FeasibilityVerdict, ...]
    bound: int

    @property
    def feasible(self) -> int:
        return sum(v.feasible for v in self.verdicts if v.reason != "theorem1")

    @property
    def theorem1_violations(self) -> int:
        return sum(v.audit == "feasible" for v in self.verdicts)

    def to_json(self) -> dict:
        return {
            "channel": self.channel,
            "n": self.n,
            "k": self.k,
            "verdicts": [v.to_json() for v in self.verdicts],
            "summary": {
                "feasible": self.feasible,
                "bound": self.bound,
                "assignments": len(self.verdicts),
                "theorem1_violations": self.theorem1_violations,
            },
        }


def _guarded_search(channel, a, library) -> FeasibilityVerdict:
    try:
        return search(channel, a, library)
    except UnsupportedBlock as exc:
        return FeasibilityVerdict(a, "skipped", "block_too_large", note=str(exc))


def survey(
    channel: ChannelDescriptor,
    n: int,
    k: int,
    library: BasisLibrary = DEFAULT_LIBRARY,
    audit_theorem1: bool = False,
    contiguous: bool = True,
) -> Survey:
    """Search every assignment of ``channel`` for ``n``-qubit secrets and ``k`` parties.

    Verdicts follow enumeration order. Assignments removed by the dealer-size
    filter are reported as infeasible; with ``audit_theorem1`` they are also
    searched and the outcome recorded in ``audit``.
    """
    assignments = enumerate_assignments(channel.num_qubits, n, k, contiguous)
    kept, removed = theorem1_filter(assignments)
    removed_by_id = {id(v.assignment): v for v in removed}
    verdicts = []
    for a in assignments:
        if id(a) in removed_by_id:
            v = removed_by_id[id(a)]
            if audit_theorem1:
                found = _guarded_search(channel, a, library)
                v = FeasibilityVerdict(
                    a, v.status, v.reason, found.spec, found.bases_tried, found.branches_evaluated,
                    v.note, audit=found.status,
                )
            verdicts.append(v)
        else:
            verdicts.append(_guarded_search(channel, a, library))
    return Survey(channel.name, n, k, tuple(verdicts), max_protocols(channel.num_qubits, n, k))


# -- security audit -----------------------------------------------------------


def _cq_distance(a: dict, b: dict) -> float:
    """Trace distance between classical-quantum states stored as outcome -> block."""
    total = 0.0
    for key in set(a) | set(b):
        x = a.get(key)
        y = b.get(key)
        if x is None:
            x = np.zeros_like(y)
        if y is None:
            y = np.zeros_like(x)
        total += sv.trace_distance(x, y)
    return total


def _views(channel, spec, secret, steps, party_outcomes, keep) -> dict:
    """Outcome-conditioned (unnormalized) states of the qubits ``keep``.

    ``party_outcomes`` picks which step outcomes the observer sees.
    """
    amps, labels = _secret_input(channel, secret)
    view: dict = {}
    for path in _walk(amps, labels, steps):
        key = tuple(path.outcomes[i] for i in party_outcomes)
        pos = [path.labels.index(q) for q in keep]
        rho = sv.reduced_density(path.amplitudes, len(path.labels), pos) if pos else np.ones((1, 1), dtype=complex)
        view[key] = view.get(key, 0) + path.probability * rho
    return view


def probe_secrets(n: int, seed: int = 0, random_count: int = 4) -> list[PureState]:
    rng = np.random.default_rng(seed)
    return sv.pauli_eigenstates(n) + [sv.random_state(n, rng) for _ in range(random_count)]


def phase_partners(probes: Sequence[PureState], seed: int = 0) -> list[tuple[PureState, PureState]]:
    """Pairs with equal amplitude moduli and different phases."""
    rng = np.random.default_rng(seed + 1)
    pairs = []
    for p in probes:
        d = p.amplitudes.size
        parity = np.array([(-1) ** (i & 1) for i in range(d)])
        pairs.append((p, PureState(p.amplitudes * parity)))
        phases = np.exp(2j * np.pi * rng.random(d))
        pairs.append((p, PureState(p.amplitudes * phases)))
    return pairs


@dataclass(frozen=True)
class SecurityReport:
    independence: float
    phase_blindness: float
    min_fidelity: float
    failed_branches: int
    probes: int

    @property
    def independence_ok(self) -> bool:
        return self.independence <= AUDIT_TOL

    @property
    def phase_blind_ok(self) -> bool:
        return self.phase_blindness <= AUDIT_TOL

    @property
    def complete_ok(self) -> bool:
        return self.failed_branches == 0 and self.min_fidelity >= 1 - SUCCESS_TOL

    def to_json(self) -> dict:
        return {
            "independence": {"max_trace_distance": self.independence, "pass": self.independence_ok},
            "phase_blindness": {"max_trace_distance": self.phase_blindness, "pass": self.phase_blind_ok},
            "completeness": {
                "min_fidelity": self.min_fidelity,
                "failed_branches": self.failed_branches,
                "pass": self.complete_ok,
            },
            "probes": self.probes,
        }


def audit_security(channel: ChannelDescriptor, spec: ProtocolSpec, seed: int = 0) -> SecurityReport:
    """Reduced-state checks on a splitting protocol.

    * independence: each non-dealer party's own outcomes plus its remaining
      qubits, before anything is disclosed, do not depend on the secret;
    * phase blindness: the receiver, told only the dealer's outcomes, holds a
      state that is the same for secrets differing only in phases;
    * completeness: with every outcome, the receiver's corrected state is the
      secret on every branch.
    """
    a = spec.assignment
    steps = spec.measurements
    reference = run_reference(channel, spec)
    probes = probe_secrets(a.n, seed)

    independence = 0.0
    for party in range(2, a.k + 1):
        own_steps = [i for i, s in enumerate(steps) if s.party == party]
        keep = [q for q in a.qubits_of(party) if not any(q in s.qubits for s in steps)]
        views = [_views(channel, spec, p, steps, own_steps, keep) for p in probes]
        independence = max([independence] + [_cq_distance(views[0], v) for v in views[1:]])

    dealer_steps = [i for i, s in enumerate(steps) if s.party == 1]
    prefix = steps[: max(dealer_steps) + 1] if dealer_steps else ()
    phase = 0.0
    for p, q in phase_partners(probes, seed):
        va = _views(channel, spec, p, prefix, dealer_steps, a.receiver)
        vb = _views(channel, spec, q, prefix, dealer_steps, a.receiver)
        phase = max(phase, _cq_distance(va, vb))

    min_fid, failed = 1.0, 0
    for p in probes:
        for r in run_with_secret(channel, spec, p, reference):
            if r.failure is not None:
                failed += 1
                min_fid = 0.0
            elif r.fidelity is not None:
                min_fid = min(min_fid, r.fidelity)
                failed += r.fidelity < 1 - SUCCESS_TOL
    return SecurityReport(independence, phase, min_fid, failed, len(probes))


def no_signaling_suite(channel: ChannelDescriptor, spec: ProtocolSpec) -> float:
    """Largest :func:`no_signaling_check` value over every party and stage."""
    worst = 0.0
    for party in range(1, spec.assignment.k + 1):
        for stage in range(len(spec.measurements) + 1):
            worst = max(worst, no_signaling_check(channel, spec, party, stage))
    return worst
