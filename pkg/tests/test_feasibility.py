from itertools import product
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qisplit import feasibility as F
from qisplit import protocol as P
from qisplit import statevec as sv
from qisplit.channels import ChannelDescriptor, cluster4, ghz, load
from qisplit.counting import max_protocols
from qisplit.cryptobounds import spanning_probes
from qisplit.protocol import PartyAssignment

BROWN = Path(__file__).resolve().parents[1] / "data" / "channels" / "brown5.json"


def sizes(assignments):
    return [a.sizes for a in assignments]


def teleport_channel():
    # Phi+ shared by qubits 1 and 3, qubit 2 in |0>
    amps = np.zeros(8)
    amps[0] = amps[0b101] = 1 / np.sqrt(2)
    return ChannelDescriptor("teleport", sv.PureState(amps))


def probe_verified(channel, spec):
    """Independent of the reference method: run every spanning probe and a random secret."""
    d = 2 ** spec.assignment.n
    probes = [sv.PureState(v) for v in spanning_probes(d)]
    probes.append(sv.random_state(spec.assignment.n, np.random.default_rng(0)))
    return all(
        r.fidelity is not None and r.fidelity >= 1 - 1e-9
        for p in probes
        for r in P.run_with_secret(channel, spec, p)
    )


# -- enumeration --------------------------------------------------------------


def test_enumerate_examples():
    assert sizes(F.enumerate_assignments(4, 1, 3)) == [(1, 2, 1), (2, 1, 1)]
    # enumeration does not apply the dealer-size constraint
    assert sizes(F.enumerate_assignments(4, 2, 3)) == [(1, 1, 2)]
    assert sizes(F.enumerate_assignments(5, 1, 4)) == [(1, 1, 2, 1), (1, 2, 1, 1), (2, 1, 1, 1)]
    brute = [t for t in product(range(1, 6), repeat=3) if sum(t) == 5]
    assert len(brute) == 6
    assert sorted(sizes(F.enumerate_assignments(6, 1, 4))) == sorted(t + (1,) for t in brute)


def test_enumerate_blocks_are_contiguous():
    for a in F.enumerate_assignments(7, 2, 4):
        flat = [q for b in a.blocks for q in b]
        assert flat == list(range(1, 8))
        assert a.receiver == (6, 7)
        assert a.violations() == []


def test_enumerate_non_contiguous():
    loose = F.enumerate_assignments(4, 1, 3, contiguous=False)
    # every surjection of qubits 1..3 onto two parties
    assert len(loose) == 6
    assert all(a.violations() == [] for a in loose)
    assert {a.blocks[:2] for a in F.enumerate_assignments(4, 1, 3)} < {a.blocks[:2] for a in loose}


def test_enumerate_domain():
    with pytest.raises(ValueError):
        F.enumerate_assignments(4, 1, 2)
    with pytest.raises(ValueError):
        F.enumerate_assignments(2, 3, 3)


def test_theorem1_filter_examples():
    kept, removed = F.theorem1_filter(F.enumerate_assignments(6, 2, 3))
    assert sizes(kept) == [(2, 2, 2), (3, 1, 2)]
    assert sizes(v.assignment for v in removed) == [(1, 3, 2)]
    assert all(v.reason == "theorem1" and not v.feasible for v in removed)

    kept, removed = F.theorem1_filter(F.enumerate_assignments(4, 1, 3))
    assert len(kept) == 2 and removed == []


@pytest.mark.parametrize("N,n,k", [(N, n, k) for N in range(3, 10) for n in (1, 2, 3) for k in (3, 4, 5)])
def test_filtered_count_matches_closed_form(N, n, k):
    if N < n:
        return
    kept, _ = F.theorem1_filter(F.enumerate_assignments(N, n, k))
    assert len(kept) == max_protocols(N, n, k)


# -- library ------------------------------------------------------------------


def test_library_sizes_and_validity():
    lib = F.BasisLibrary()
    assert [len(lib.candidates(q)) for q in (1, 2, 3, 4)] == [2, 6, 20, 45]
    for q in (1, 2, 3):
        for b in lib.candidates(q):
            assert b.arity == q
            g = b.vectors.conj() @ b.vectors.T
            np.testing.assert_allclose(g, np.eye(2**q), atol=1e-12)
    with pytest.raises(F.UnsupportedBlock):
        lib.candidates(5)
    assert len(F.BasisLibrary(cap=3).candidates(3)) == 3


def test_library_contains_the_named_bases():
    names = {b.name for b in F.DEFAULT_LIBRARY.candidates(2)}
    assert {"bell", "computational*computational", "hadamard*hadamard"} <= names
    names = {b.name for b in F.DEFAULT_LIBRARY.candidates(3)}
    assert {"ghz3", "ghz3[HII]", "bell*hadamard"} <= names


def test_dealer_order_interleaves():
    a = PartyAssignment(6, 2, ((1, 2), (3, 4), (5, 6)))
    assert F.dealer_order(a) == ("s1", 1, "s2", 2)
    a = PartyAssignment(6, 1, ((1, 2, 3), (4,), (5,), (6,)))
    assert F.dealer_order(a) == ("s1", 1, 2, 3)


# -- search -------------------------------------------------------------------


def test_search_ghz4_dealer_one_middle_two():
    v = F.search(ghz(4), PartyAssignment(4, 1, ((1,), (2, 3), (4,))))
    assert v.feasible
    assert probe_verified(ghz(4), v.spec)


def test_search_ghz4_dealer_two():
    v = F.search(ghz(4), PartyAssignment(4, 1, ((1, 2), (3,), (4,))))
    assert v.feasible
    assert [m.basis.arity for m in v.spec.measurements] == [3, 1]
    assert probe_verified(ghz(4), v.spec)


def test_search_ghz3_single_assignment():
    v = F.search(ghz(3), PartyAssignment(3, 1, ((1,), (2,), (3,))))
    assert v.feasible and v.bases_tried >= 1
    assert probe_verified(ghz(3), v.spec)


def test_search_cluster4_one_one_two():
    v = F.search(cluster4(), PartyAssignment(4, 2, ((1,), (2,), (3, 4))))
    assert v.status == "infeasible"
    assert v.reason == "search_exhausted"
    assert v.bases_tried == 20 * 2
    assert "exhaustive" in v.note


def test_search_rejects_mismatched_channel():
    with pytest.raises(ValueError):
        F.search(ghz(3), PartyAssignment(4, 1, ((1,), (2, 3), (4,))))


def test_search_verdict_json():
    doc = F.search(ghz(3), PartyAssignment(3, 1, ((1,), (2,), (3,)))).to_json()
    assert doc["status"] == "feasible"
    assert doc["bases"][0] == "bell"
    assert doc["stats"]["bases_tried"] >= 1


# -- surveys ------------------------------------------------------------------


@pytest.mark.parametrize("N", [3, 4, 5])
def test_ghz_single_qubit_survey_attains_bound(N):
    s = F.survey(ghz(N), 1, 3)
    assert s.bound == N - 2
    assert s.feasible == s.bound
    for v in s.verdicts:
        if v.feasible:
            assert probe_verified(ghz(N), v.spec)


def test_ghz4_survey():
    s = F.survey(ghz(4), 1, 3)
    assert s.feasible == 2
    assert [v.status for v in s.verdicts] == ["feasible", "feasible"]
    assert s.to_json()["summary"] == {"feasible": 2, "bound": 2, "assignments": 2, "theorem1_violations": 0}


def test_ghz5_two_qubit_secret_within_bound():
    s = F.survey(ghz(5), 2, 3)
    assert s.bound == 1
    assert s.feasible <= 1


def test_cluster4_two_qubit_survey():
    s = F.survey(cluster4(), 2, 3, audit_theorem1=True)
    assert s.bound == 0
    assert s.feasible == 0
    assert s.theorem1_violations == 0
    assert all(v.reason == "theorem1" for v in s.verdicts)


def test_brown_state_attains_two_qubit_bound():
    brown = load(BROWN)
    s = F.survey(brown, 2, 3)
    assert s.bound == 1
    assert s.feasible == 1
    (win,) = [v for v in s.verdicts if v.feasible]
    assert win.assignment.sizes == (2, 1, 2)
    assert probe_verified(brown, win.spec)


@pytest.mark.parametrize("channel,n,k", [
    (ghz(3), 1, 3), (ghz(4), 1, 3), (ghz(4), 1, 4), (ghz(5), 1, 3),
    (ghz(5), 1, 4), (ghz(5), 2, 3), (ghz(6), 2, 3), (cluster4(), 1, 3), (cluster4(), 2, 3),
], ids=lambda x: getattr(x, "name", str(x)))
def test_survey_never_exceeds_bound(channel, n, k):
    s = F.survey(channel, n, k, audit_theorem1=True)
    assert s.feasible <= s.bound == max_protocols(channel.num_qubits, n, k)
    assert s.theorem1_violations == 0


def test_skipped_when_dealer_block_too_large():
    lib = F.BasisLibrary(max_arity=2)
    s = F.survey(ghz(4), 1, 3, library=lib)
    by_sizes = {v.assignment.sizes: v for v in s.verdicts}
    assert by_sizes[(2, 1, 1)].status == "skipped"
    assert by_sizes[(2, 1, 1)].reason == "block_too_large"
    assert by_sizes[(1, 2, 1)].feasible
    assert s.feasible == 1


def test_survey_non_contiguous_ghz4():
    s = F.survey(ghz(4), 1, 3, contiguous=False)
    # GHZ is symmetric, so every way of dealing three qubits to two parties works
    assert len(s.verdicts) == 6
    assert s.feasible == 6


# -- security audit -----------------------------------------------------------


def test_probe_set():
    probes = F.probe_secrets(1, seed=0)
    assert len(probes) == 6 + 4
    assert len(F.probe_secrets(2, seed=0)) == 36 + 4
    a = [p.amplitudes for p in F.probe_secrets(1, seed=3)]
    b = [p.amplitudes for p in F.probe_secrets(1, seed=3)]
    np.testing.assert_array_equal(a, b)


def test_phase_partners_share_magnitudes():
    probes = F.probe_secrets(2, seed=1)
    for p, q in F.phase_partners(probes, seed=1):
        np.testing.assert_allclose(np.abs(p.amplitudes), np.abs(q.amplitudes), atol=1e-15)


@pytest.mark.parametrize("name", ["hillery", "ghz4-bell-chain", "ghz4-ghz-measurement"])
def test_builtin_protocols_pass_audit(name):
    make_channel, make_spec = P.BUILTIN_SCRIPTS[name]
    r = F.audit_security(make_channel(), make_spec(), seed=0)
    assert r.independence_ok and r.phase_blind_ok and r.complete_ok
    assert r.to_json()["completeness"]["pass"]


def test_audit_catches_incomplete_protocol():
    r = F.audit_security(cluster4(), P.cluster4_dressed_ghz())
    assert not r.complete_ok
    assert r.failed_branches > 0


def test_audit_catches_receiver_reading_the_secret():
    # party 2 holds a decoupled qubit, so the protocol is plain teleportation
    r = F.audit_security(teleport_channel(), P.hillery())
    assert r.complete_ok
    assert r.independence_ok
    assert not r.phase_blind_ok
    assert r.phase_blindness == pytest.approx(1.0, abs=1e-9)


def test_audit_phase_pair_in_hillery_is_hidden():
    # |+> and |-> differ only in a relative phase; the receiver cannot tell them apart
    probes = [sv.PureState.from_label("+")]
    spec = P.hillery()
    steps = spec.measurements
    a = spec.assignment
    va = F._views(ghz(3), spec, sv.PureState.from_label("+"), steps[:1], [0], a.receiver)
    vb = F._views(ghz(3), spec, sv.PureState.from_label("-"), steps[:1], [0], a.receiver)
    assert F._cq_distance(va, vb) <= 1e-9
    tele_a = F._views(teleport_channel(), spec, probes[0], steps[:1], [0], a.receiver)
    tele_b = F._views(teleport_channel(), spec, sv.PureState.from_label("-"), steps[:1], [0], a.receiver)
    assert F._cq_distance(tele_a, tele_b) == pytest.approx(1.0, abs=1e-9)


def test_feasible_survey_specs_pass_audit():
    for channel, n in ((ghz(4), 1), (ghz(5), 1), (load(BROWN), 2)):
        for v in F.survey(channel, n, 3).verdicts:
            if v.feasible:
                r = F.audit_security(channel, v.spec)
                assert r.independence_ok and r.complete_ok


def test_no_signaling_suite():
    for name, (make_channel, make_spec) in P.BUILTIN_SCRIPTS.items():
        assert F.no_signaling_suite(make_channel(), make_spec()) <= 1e-9, name
    assert F.no_signaling_suite(teleport_channel(), P.hillery()) <= 1e-9


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_channel_search_results_are_sound(seed):
    # whatever the search calls feasible must survive the probe oracle
    channel = ChannelDescriptor("rand", sv.random_state(3, np.random.default_rng(seed)))
    v = F.search(channel, PartyAssignment(3, 1, ((1,), (2,), (3,))), F.BasisLibrary(cap=2))
    if v.feasible:
        assert probe_verified(channel, v.spec)
    else:
        assert v.bases_tried == 2 * 2
