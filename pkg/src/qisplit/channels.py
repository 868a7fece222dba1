"""Built-in entangled channels and the JSON channel file format.

A channel file looks like::

    {"name": "ghz3", "num_qubits": 3,
     "amplitudes": [["0.7071067811865476", "0"], ...]}

with ``2**num_qubits`` ``[re, im]`` pairs written as decimal strings in the
big-endian index order used throughout the package. An optional
``"provenance"`` string is carried through untouched.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .statevec import SQRT2_INV, PureState

LOAD_NORM_TOL = 1e-9


class ChannelFileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ChannelDescriptor:
    name: str
    state: PureState
    provenance: str | None = None

    @property
    def num_qubits(self) -> int:
        return self.state.num_qubits


def ghz(N: int) -> ChannelDescriptor:
    if N < 2:
        raise ValueError(f"GHZ channel needs N >= 2, got {N}")
    amps = np.zeros(2**N, dtype=complex)
    amps[0] = amps[-1] = SQRT2_INV
    return ChannelDescriptor(f"ghz{N}", PureState(amps))


def cluster4() -> ChannelDescriptor:
    """(|0000> + |0110> + |1001> - |1111>) / 2."""
    amps = np.zeros(16, dtype=complex)
    amps[[0b0000, 0b0110, 0b1001]] = 0.5
    amps[0b1111] = -0.5
    return ChannelDescriptor("cluster4", PureState(amps))


def bell_pairs(n: int) -> ChannelDescriptor:
    """``n`` copies of |Phi+>, qubits ordered (ref_1, in_1, ref_2, in_2, ...)."""
    if n < 1:
        raise ValueError(f"need at least one Bell pair, got {n}")
    phi = np.array([1, 0, 0, 1], dtype=complex) * SQRT2_INV
    amps = phi
    for _ in range(n - 1):
        amps = np.kron(amps, phi)
    return ChannelDescriptor(f"bellpairs-{n}", PureState(amps))


BUILTIN_PATTERN = re.compile(r"^(?:ghz([2-8])|cluster4|bellpairs-([1-8]))$")


def builtin(name: str) -> ChannelDescriptor:
    """Resolve ``ghz2`` .. ``ghz8``, ``cluster4`` and ``bellpairs-<n>``."""
    m = BUILTIN_PATTERN.match(name)
    if not m:
        raise KeyError(f"unknown built-in channel {name!r}")
    if m.group(1):
        return ghz(int(m.group(1)))
    if m.group(2):
        return bell_pairs(int(m.group(2)))
    return cluster4()


def to_json(c: ChannelDescriptor) -> dict:
    doc = {
        "name": c.name,
        "num_qubits": c.num_qubits,
        "amplitudes": [[repr(float(a.real)), repr(float(a.imag))] for a in c.state.amplitudes],
    }
    if c.provenance:
        doc["provenance"] = c.provenance
    return doc


def from_json(doc: dict) -> ChannelDescriptor:
    try:
        name = str(doc["name"])
        nq = int(doc["num_qubits"])
        raw = doc["amplitudes"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelFileError(f"malformed channel document: {exc}") from exc
    if nq < 1:
        raise ChannelFileError(f"num_qubits must be positive, got {nq}")
    if not isinstance(raw, list) or len(raw) != 2**nq:
        got = len(raw) if isinstance(raw, list) else type(raw).__name__
        raise ChannelFileError(f"expected {2**nq} amplitudes for {nq} qubits, got {got}")
    amps = np.empty(len(raw), dtype=complex)
    for i, pair in enumerate(raw):
        try:
            re_s, im_s = pair
            amps[i] = complex(float(str(re_s)), float(str(im_s)))
        except (TypeError, ValueError) as exc:
            raise ChannelFileError(f"amplitude {i} is not a [re, im] pair: {pair!r}") from exc
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1) > LOAD_NORM_TOL:
        raise ChannelFileError(
            f"channel {name!r} is not normalized: norm {norm!r}, |norm - 1| = {abs(norm - 1):.3e} "
            f"exceeds {LOAD_NORM_TOL:g}"
        )
    return ChannelDescriptor(name, PureState(amps, tol=LOAD_NORM_TOL), doc.get("provenance"))


def save(c: ChannelDescriptor, path) -> None:
    Path(path).write_text(json.dumps(to_json(c), indent=1) + "\n")


def load(path) -> ChannelDescriptor:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ChannelFileError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ChannelFileError(f"{path}: top level must be an object")
    return from_json(doc)
