"""JSON circuit files.

Layout::

    {"d": 2, "n": 2, "depth": 1,
     "layers": [[{"qudits": [0, 1],
                  "unitary": {"re": [[...]], "im": [[...]]}}]]}

Operation gates replace ``"unitary"`` by ``"kraus": [{"re": ..., "im": ...}, ...]``.
An optional top-level ``"allow_idle": true`` relaxes the idle-qudit rule.
"""
from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .circuit import Circuit, CircuitArchitecture, GatePlacement, validate_architecture
from .core import QuantumOperation


class CircuitFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _gate_lines(text: str) -> list[int]:
    return [text.count("\n", 0, m.start()) + 1 for m in re.finditer(r'"qudits"\s*:', text)]


def _matrix(obj, where: str, line: int | None) -> np.ndarray:
    if not isinstance(obj, dict) or set(obj) != {"re", "im"}:
        raise CircuitFormatError(f"{where}: matrix must be an object with keys 're' and 'im'", line)
    try:
        re_ = np.array(obj["re"], dtype=float)
        im_ = np.array(obj["im"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise CircuitFormatError(f"{where}: non-numeric matrix entry ({exc})", line) from None
    if re_.ndim != 2 or re_.shape != im_.shape:
        raise CircuitFormatError(f"{where}: 're' and 'im' must be equally shaped 2-D arrays", line)
    return re_ + 1j * im_


def parse_circuit(text: str) -> Circuit:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CircuitFormatError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise CircuitFormatError("top level must be an object", 1)
    unknown = set(doc) - {"d", "n", "depth", "layers", "allow_idle"}
    if unknown:
        raise CircuitFormatError(f"unknown field(s): {sorted(unknown)}", 1)
    for key in ("d", "n", "depth", "layers"):
        if key not in doc:
            raise CircuitFormatError(f"missing field {key!r}", 1)
    d, n, depth = doc["d"], doc["n"], doc["depth"]
    if not all(isinstance(v, int) and not isinstance(v, bool) for v in (d, n, depth)):
        raise CircuitFormatError("'d', 'n' and 'depth' must be integers", 1)
    layers = doc["layers"]
    if not isinstance(layers, list) or len(layers) != depth:
        raise CircuitFormatError(f"'layers' must be a list of {depth} layers", 1)

    lines = _gate_lines(text)
    placements, gates, modes, gate_line = [], [], set(), {}
    k = 0
    for i, layer in enumerate(layers, start=1):
        if not isinstance(layer, list):
            raise CircuitFormatError(f"layer {i} must be a list of gates", 1)
        for j, g in enumerate(layer, start=1):
            line = lines[k] if k < len(lines) else None
            k += 1
            where = f"gate ({i},{j})"
            if not isinstance(g, dict) or "qudits" not in g:
                raise CircuitFormatError(f"{where}: expected an object with 'qudits'", line)
            q = g["qudits"]
            if not (isinstance(q, list) and len(q) == 2 and all(isinstance(v, int) for v in q)):
                raise CircuitFormatError(f"{where}: 'qudits' must be two integers", line)
            if ("unitary" in g) == ("kraus" in g):
                raise CircuitFormatError(f"{where}: give exactly one of 'unitary' or 'kraus'", line)
            if "unitary" in g:
                modes.add("unitary")
                gates.append(_matrix(g["unitary"], where, line))
            else:
                if not isinstance(g["kraus"], list) or not g["kraus"]:
                    raise CircuitFormatError(f"{where}: 'kraus' must be a non-empty list", line)
                modes.add("operation")
                gates.append([_matrix(m, where, line) for m in g["kraus"]])
            placements.append(GatePlacement(i, j, tuple(q)))
            gate_line[(i, j)] = line
    if len(modes) > 1:
        raise CircuitFormatError("circuit mixes unitary and Kraus gates", 1)

    arch = CircuitArchitecture(n, d, depth, tuple(placements), bool(doc.get("allow_idle", False)))
    problems = validate_architecture(arch)
    if problems:
        v = problems[0]
        line = next((gate_line[(p.layer, p.index)] for p in placements if p.layer == v.layer), 1)
        raise CircuitFormatError("; ".join(map(str, problems)), line)
    mode = modes.pop() if modes else "unitary"
    ordered = [g for _, g in sorted(zip(placements, gates), key=lambda t: t[0])]
    for p, g in zip(sorted(placements), ordered):
        try:
            if mode == "operation":
                QuantumOperation(tuple(g))
        except ValueError as exc:
            raise CircuitFormatError(f"gate ({p.layer},{p.index}): {exc}", gate_line[(p.layer, p.index)]) from None
    try:
        return Circuit(arch, tuple(ordered), mode)
    except ValueError as exc:
        m = re.search(r"gate (\d+),(\d+)", str(exc))
        line = gate_line.get((int(m.group(1)), int(m.group(2)))) if m else 1
        raise CircuitFormatError(str(exc), line) from None


def load_circuit(path) -> Circuit:
    return parse_circuit(Path(path).read_text())


def _matrix_json(m: np.ndarray) -> dict:
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


def dump_circuit(circ: Circuit) -> str:
    arch = circ.architecture
    layers = [[] for _ in range(arch.depth)]
    for p, g in circ.items():
        entry = {"qudits": list(p.qudits)}
        if circ.mode == "unitary":
            entry["unitary"] = _matrix_json(g)
        else:
            entry["kraus"] = [_matrix_json(k) for k in g.kraus]
        layers[p.layer - 1].append(entry)
    doc = {"d": arch.d, "n": arch.n, "depth": arch.depth, "layers": layers}
    if arch.allow_idle:
        doc["allow_idle"] = True
    return json.dumps(doc, indent=1) + "\n"


def save_circuit(circ: Circuit, path) -> None:
    Path(path).write_text(dump_circuit(circ))
