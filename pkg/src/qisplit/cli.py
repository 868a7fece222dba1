"""Command-line front end; every subcommand prints one JSON report."""
from __future__ import annotations

import argparse
import json
import sys
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np

from . import __version__
from . import channels as ch
from . import counting, feasibility, protocol
from . import statevec as sv
from .cryptobounds import DEPOLARIZING_TOL, RANK_TOL

TOLERANCES = {
    "success": protocol.SUCCESS_TOL,
    "correctable": protocol.CORRECTABLE_TOL,
    "no_signaling": protocol.NO_SIGNALING_TOL,
    "zero_probability": sv.ZERO_PROB,
    "orthonormality": sv.ORTHO_TOL,
    "audit": feasibility.AUDIT_TOL,
    "choi_rank": RANK_TOL,
    "depolarizing": DEPOLARIZING_TOL,
}


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _sizes(text: str) -> list[int]:
    try:
        sizes = [int(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"blocks must be comma-separated sizes, got {text!r}")
    if any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError("every block size must be positive")
    return sizes


def _channel(args) -> ch.ChannelDescriptor:
    if args.channel_file:
        return ch.load(args.channel_file)
    if not args.channel:
        raise UsageError("one of --channel or --channel-file is required")
    try:
        return ch.builtin(args.channel)
    except KeyError:
        raise UsageError(
            f"unknown built-in channel {args.channel!r} (ghz2..ghz8, cluster4, bellpairs-<n>); "
            "use --channel-file for anything else"
        )


def _protocol(ref: str) -> protocol.ProtocolSpec:
    path = Path(ref)
    if not path.exists() and ref in protocol.BUILTIN_SCRIPTS:
        return protocol.BUILTIN_SCRIPTS[ref][1]()
    if not path.exists():
        raise UsageError(f"protocol file {ref} not found")
    return protocol.load_protocol(path)


def _runnable(channel, spec) -> None:
    problems = protocol.validate(spec)
    if problems:
        raise UsageError("invalid protocol: " + "; ".join(map(str, problems)))
    if channel.num_qubits != spec.assignment.N:
        raise UsageError(f"channel {channel.name} has {channel.num_qubits} qubits, protocol expects {spec.assignment.N}")


def _library(args) -> feasibility.BasisLibrary:
    return feasibility.BasisLibrary(max_arity=args.max_arity, cap=args.library_cap)


def cmd_count(args) -> dict:
    return {"query": {"N": args.N, "n": args.n, "k": args.k}, "max_protocols": counting.max_protocols(args.N, args.n, args.k)}


def cmd_enumerate(args) -> dict:
    assignments = feasibility.enumerate_assignments(args.N, args.n, args.k)
    kept, removed = feasibility.theorem1_filter(assignments)
    listed = assignments if args.no_theorem1_filter else kept
    return {
        "query": {"N": args.N, "n": args.n, "k": args.k},
        "theorem1_filter": not args.no_theorem1_filter,
        "assignments": [{"sizes": list(a.sizes), "blocks": [list(b) for b in a.blocks]} for a in listed],
        "removed": [{"sizes": list(v.assignment.sizes), "reason": v.reason} for v in removed],
        "count": len(listed),
        "max_protocols": counting.max_protocols(args.N, args.n, args.k),
    }


def cmd_search(args) -> dict:
    channel = _channel(args)
    library = _library(args)
    if args.blocks is None:
        if args.k is None:
            raise UsageError("search needs --blocks, or --k to survey every assignment")
        survey = feasibility.survey(channel, args.n, args.k, library, audit_theorem1=args.audit_theorem1)
        return {"channel": channel.name, "survey": survey.to_json()}
    if sum(args.blocks) != channel.num_qubits:
        raise UsageError(f"blocks {args.blocks} cover {sum(args.blocks)} qubits, channel has {channel.num_qubits}")
    assignment = protocol.PartyAssignment.from_sizes(args.blocks, args.n)
    problems = assignment.violations()
    if problems:
        raise UsageError("invalid assignment: " + "; ".join(map(str, problems)))
    try:
        verdict = feasibility.search(channel, assignment, library)
    except feasibility.UnsupportedBlock as exc:
        verdict = feasibility.FeasibilityVerdict(assignment, "skipped", "block_too_large", note=str(exc))
    doc = {"channel": channel.name, "n": args.n, **verdict.to_json()}
    if verdict.spec is not None:
        doc["protocol"] = protocol.spec_to_json(verdict.spec)
    return doc


def _branch_json(r: protocol.BranchResult) -> dict:
    return {"outcomes": list(r.outcomes), "probability": r.probability, "fidelity": r.fidelity, "failure": r.failure}


def cmd_simulate(args) -> dict:
    channel = _channel(args)
    spec = _protocol(args.protocol)
    _runnable(channel, spec)
    rng = np.random.default_rng(args.seed)
    reference = protocol.run_reference(channel, spec) if spec.correction.mode == "auto" else None
    runs, fids, failures = [], [], 0
    for i in range(args.secrets):
        secret = sv.random_state(spec.assignment.n, rng)
        results = protocol.run_with_secret(channel, spec, secret, reference)
        for r in results:
            if r.failure is not None:
                failures += 1
            else:
                fids.append(r.fidelity)
        runs.append({
            "secret": i,
            "amplitudes": [[float(z.real), float(z.imag)] for z in secret.amplitudes],
            "total_probability": float(sum(r.probability for r in results)),
            "branches": [_branch_json(r) for r in results],
        })
    min_fid = min(fids) if fids and not failures else 0.0
    return {
        "channel": channel.name,
        "protocol": spec.name or args.protocol,
        "classical_cost": {str(p): b for p, b in protocol.classical_cost(spec).items()},
        "reference_correctable": None if reference is None else all(r.ok for r in reference),
        "runs": runs,
        "summary": {
            "secrets": args.secrets,
            "branches": sum(len(r["branches"]) for r in runs),
            "failed_branches": failures,
            "min_fidelity": min_fid,
            "perfect": failures == 0 and min_fid >= 1 - protocol.SUCCESS_TOL,
        },
    }


def cmd_audit(args) -> dict:
    channel = _channel(args)
    spec = _protocol(args.protocol)
    _runnable(channel, spec)
    report = feasibility.audit_security(channel, spec, seed=args.seed)
    return {
        "channel": channel.name,
        "protocol": spec.name or args.protocol,
        "security": report.to_json(),
        "no_signaling_max": feasibility.no_signaling_suite(channel, spec),
        "classical_cost": {str(p): b for p, b in protocol.classical_cost(spec).items()},
    }


def cmd_crosscheck(args) -> dict:
    rows = counting.crosscheck_grid(args.max_N, args.max_n, args.max_k)
    k3 = [r for r in rows if r["k"] == 3 and r["N"] > 2 * r["n"]]
    return {
        "grid": {"max_N": args.max_N, "max_n": args.max_n, "max_k": args.max_k},
        "rows": rows,
        "all_match": all(r["match"] for r in rows),
        "k3_equals_N_minus_2n": all(r["formula"] == r["N"] - 2 * r["n"] for r in k3),
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qisplit", description=__doc__)
    parser.add_argument("--pretty", action="store_true", help="indent the JSON report")
    parser.add_argument("--version", action="version", version=f"qisplit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_channel(p):
        p.add_argument("--channel", help="built-in channel: ghz2..ghz8, cluster4, bellpairs-<n>")
        p.add_argument("--channel-file", help="channel JSON file")

    p = sub.add_parser("count", help="closed-form maximum number of protocols")
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("enumerate", help="list qubit distributions")
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, required=True)
    p.add_argument("--no-theorem1-filter", action="store_true", help="keep distributions whose dealer has < n qubits")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("search", help="search for a working protocol")
    add_channel(p)
    p.add_argument("--blocks", type=_sizes, help="comma-separated block sizes, dealer first")
    p.add_argument("--n", type=_positive, required=True)
    p.add_argument("--k", type=_positive, help="survey all distributions for k parties (when --blocks is absent)")
    p.add_argument("--library-cap", type=_positive, default=None, help="at most this many bases per block")
    p.add_argument("--max-arity", type=_positive, default=4)
    p.add_argument("--audit-theorem1", action="store_true", help="also search distributions removed by the dealer-size filter")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("simulate", help="run a protocol on seeded random secrets")
    add_channel(p)
    p.add_argument("--protocol", required=True, help="protocol JSON file or built-in script name")
    p.add_argument("--secrets", type=_positive, default=20)
    p.add_argument("--seed", type=_non_negative, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("audit", help="security and no-signaling audit of a protocol")
    add_channel(p)
    p.add_argument("--protocol", required=True, help="protocol JSON file or built-in script name")
    p.add_argument("--seed", type=_non_negative, default=0)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("crosscheck", help="closed-form counts against enumeration")
    p.add_argument("--max-N", type=_positive, required=True)
    p.add_argument("--max-n", type=_positive, required=True)
    p.add_argument("--max-k", type=_positive, required=True)
    p.set_defaults(func=cmd_crosscheck)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        with redirect_stdout(stdout), redirect_stderr(stderr):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        body = args.func(args)
    except (UsageError, ValueError, OSError) as exc:
        print(f"qisplit {args.command}: error: {exc}", file=stderr)
        return 2
    report = {
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "tolerances": TOLERANCES,
        **body,
    }
    stdout.write(json.dumps(report, sort_keys=True, indent=2 if args.pretty else None) + "\n")
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
