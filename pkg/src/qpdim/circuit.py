"""2-local qudit circuits: architectures, validation, simulation and counting.

An architecture fixes which (unordered) qudit pair each gate acts on and in
which layer; a :class:`Circuit` additionally plugs a two-qudit gate into every
placement. Gates act on the pair ``(a, b)`` with ``a < b`` through the local
index ``s_a * d + s_b``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import (
    TOL,
    DensityMatrix,
    DimensionError,
    PureState,
    QuantumOperation,
    ValidationError,
    as_generator,
    haar_random_unitary,
    random_channel,
)


@dataclass(frozen=True, order=True)
class GatePlacement:
    layer: int
    index: int
    qudits: tuple

    def __post_init__(self):
        object.__setattr__(self, "qudits", tuple(int(q) for q in self.qudits))


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    layer: int | None = None

    def __str__(self):
        return self.message


@dataclass(frozen=True)
class CircuitArchitecture:
    """Gate placements of a depth-``depth`` circuit on ``n`` qudits of dimension ``d``.

    The constructor does not validate; see :func:`validate_architecture`.
    """

    n: int
    d: int
    depth: int
    placements: tuple
    allow_idle: bool = False

    def __post_init__(self):
        object.__setattr__(self, "placements", tuple(sorted(self.placements)))

    @classmethod
    def from_layers(cls, n: int, d: int, layers: Sequence[Sequence], allow_idle: bool = False):
        placements = [
            GatePlacement(i + 1, j + 1, tuple(pair))
            for i, layer in enumerate(layers)
            for j, pair in enumerate(layer)
        ]
        return cls(n, d, len(layers), tuple(placements), allow_idle)

    @property
    def size(self) -> int:
        return len(self.placements)

    @property
    def layer_sizes(self) -> list[int]:
        counts = [0] * self.depth
        for p in self.placements:
            if 1 <= p.layer <= self.depth:
                counts[p.layer - 1] += 1
        return counts

    def layers(self) -> list[list[tuple]]:
        out: list[list[tuple]] = [[] for _ in range(self.depth)]
        for p in self.placements:
            out[p.layer - 1].append(p.qudits)
        return out

    def canonical_key(self) -> tuple:
        return (self.n, tuple(tuple(sorted(tuple(sorted(q)) for q in layer)) for layer in self.layers()))

    def __str__(self):
        body = " | ".join(" ".join(f"({a},{b})" for a, b in layer) for layer in self.layers())
        return f"n={self.n} d={self.d} depth={self.depth} size={self.size}: {body}"


def validate_architecture(arch: CircuitArchitecture, allow_idle: bool | None = None) -> list[Violation]:
    """Every invariant violation of ``arch``; an empty list means valid."""
    allow_idle = arch.allow_idle if allow_idle is None else allow_idle
    out: list[Violation] = []
    if arch.n < 1 or arch.d < 2:
        out.append(Violation("dims", f"need n >= 1 and d >= 2, got n={arch.n}, d={arch.d}"))
    if arch.depth < 1:
        out.append(Violation("depth", f"depth must be >= 1, got {arch.depth}"))
    seen_slots = set()
    used: dict[int, set] = {}
    for p in arch.placements:
        a, b = p.qudits if len(p.qudits) == 2 else (None, None)
        if len(p.qudits) != 2:
            out.append(Violation("pair", f"gate ({p.layer},{p.index}) must act on exactly two qudits", p.layer))
            continue
        if not 1 <= p.layer <= arch.depth:
            out.append(Violation("layer", f"gate ({p.layer},{p.index}) lies outside layers 1..{arch.depth}", p.layer))
            continue
        if (p.layer, p.index) in seen_slots:
            out.append(Violation("slot", f"duplicate slot ({p.layer},{p.index})", p.layer))
        seen_slots.add((p.layer, p.index))
        if not (0 <= a < arch.n and 0 <= b < arch.n):
            out.append(Violation("range", f"gate ({p.layer},{p.index}) acts on {p.qudits}, outside 0..{arch.n - 1}", p.layer))
            continue
        if a == b:
            out.append(Violation("pair", f"gate ({p.layer},{p.index}) acts twice on qudit {a}", p.layer))
            continue
        if a > b:
            out.append(Violation("order", f"gate ({p.layer},{p.index}) pair {p.qudits} must be listed as a < b", p.layer))
        layer_used = used.setdefault(p.layer, set())
        shared = layer_used & {a, b}
        if shared:
            out.append(Violation(
                "overlap",
                f"layer {p.layer}: gate on {p.qudits} overlaps another gate on qudit {min(shared)}",
                p.layer,
            ))
        layer_used.update((a, b))
    for i, count in enumerate(arch.layer_sizes, start=1):
        if count == 0:
            out.append(Violation("empty-layer", f"layer {i} is empty", i))
    if not allow_idle and arch.n >= 1:
        touched = set().union(*used.values()) if used else set()
        for q in range(arch.n):
            if q not in touched:
                out.append(Violation("idle", f"qudit {q} is not acted upon by any gate"))
    return out


def _check_gate(gate, d: int, mode: str, where: str, tol: float):
    D = d * d
    if mode == "unitary":
        U = np.asarray(gate, dtype=complex)
        if U.shape != (D, D):
            raise DimensionError(f"{where}: gate must be {D}x{D}, got {U.shape}")
        if np.abs(U.conj().T @ U - np.eye(D)).max() > tol:
            raise ValidationError(f"{where}: gate is not unitary")
        U = U.copy()
        U.setflags(write=False)
        return U
    if mode == "operation":
        op = gate if isinstance(gate, QuantumOperation) else QuantumOperation(tuple(gate))
        if op.dim != D:
            raise DimensionError(f"{where}: operation must act on dimension {D}, got {op.dim}")
        return op
    raise ValueError(f"unknown circuit mode {mode!r}")


@dataclass(frozen=True)
class Circuit:
    """An architecture with one gate per placement, all unitary or all operations."""

    architecture: CircuitArchitecture
    gates: tuple
    mode: str = "unitary"
    tol: float = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        problems = validate_architecture(self.architecture)
        if problems:
            raise ValidationError("invalid architecture: " + "; ".join(map(str, problems)))
        if len(self.gates) != self.architecture.size:
            raise ValidationError(f"expected {self.architecture.size} gates, got {len(self.gates)}")
        gates = tuple(
            _check_gate(g, self.architecture.d, self.mode, f"gate {p.layer},{p.index}", self.tol)
            for p, g in zip(self.architecture.placements, self.gates)
        )
        object.__setattr__(self, "gates", gates)

    @property
    def n(self) -> int:
        return self.architecture.n

    @property
    def d(self) -> int:
        return self.architecture.d

    @property
    def dim(self) -> int:
        return self.d ** self.n

    def items(self):
        return zip(self.architecture.placements, self.gates)

    def as_operation(self) -> "Circuit":
        if self.mode == "operation":
            return self
        return Circuit(self.architecture, tuple(QuantumOperation.unitary(U) for U in self.gates), "operation")


# -- simulation -------------------------------------------------------------

def _apply_pair(t: np.ndarray, mat: np.ndarray, axes: tuple, d: int) -> np.ndarray:
    t = np.moveaxis(t, axes, (-2, -1))
    shape = t.shape
    t = (t.reshape(shape[:-2] + (d * d,)) @ mat.T).reshape(shape)
    return np.moveaxis(t, (-2, -1), axes)


def _selected(circ: Circuit, layers):
    keep = None if layers is None else set(layers)
    for p, g in circ.items():
        if keep is None or p.layer in keep:
            yield p, g


def apply_unitary_layers(circ: Circuit, states: np.ndarray, layers: Iterable[int] | None = None) -> np.ndarray:
    """Apply the circuit to a batch of state vectors of shape ``(B, d**n)``."""
    if circ.mode != "unitary":
        raise ValidationError("unitary simulation needs a unitary-mode circuit")
    n, d = circ.n, circ.d
    states = np.asarray(states, dtype=complex)
    if states.shape[-1] != d ** n:
        raise DimensionError(f"expected vectors of length {d ** n}, got {states.shape[-1]}")
    B = states.shape[0]
    t = states.reshape((B,) + (d,) * n)
    for p, U in _selected(circ, layers):
        a, b = p.qudits
        t = _apply_pair(t, U, (1 + a, 1 + b), d)
    return t.reshape(B, d ** n)


def apply_operation_layers(circ: Circuit, rhos: np.ndarray, layers: Iterable[int] | None = None) -> np.ndarray:
    """Apply an operation-mode circuit to a batch of matrices of shape ``(B, D, D)``."""
    if circ.mode != "operation":
        raise ValidationError("operation simulation needs an operation-mode circuit")
    n, d = circ.n, circ.d
    rhos = np.asarray(rhos, dtype=complex)
    D = d ** n
    if rhos.shape[-2:] != (D, D):
        raise DimensionError(f"expected {D}x{D} matrices, got {rhos.shape[-2:]}")
    B = rhos.shape[0]
    t = rhos.reshape((B,) + (d,) * (2 * n))
    for p, op in _selected(circ, layers):
        a, b = p.qudits
        acc = None
        for K in op.kraus:
            s = _apply_pair(t, K, (1 + a, 1 + b), d)
            s = _apply_pair(s, K.conj(), (1 + n + a, 1 + n + b), d)
            acc = s if acc is None else acc + s
        t = acc
    return t.reshape(B, D, D)


def simulate_unitary_circuit(circ: Circuit, state: PureState, layers: Iterable[int] | None = None) -> PureState:
    """Output state ``U_N |state>``; ``layers`` restricts to a subset of layers (in order)."""
    if (state.n, state.d) != (circ.n, circ.d):
        raise DimensionError(f"state is on n={state.n}, d={state.d}; circuit on n={circ.n}, d={circ.d}")
    out = apply_unitary_layers(circ, state.amplitudes[None, :], layers)[0]
    return PureState(out, circ.n, circ.d)


def simulate_operation_circuit(circ: Circuit, rho: DensityMatrix, layers: Iterable[int] | None = None) -> DensityMatrix:
    """Output ``T_N(rho)``, possibly sub-normalized."""
    if (rho.n, rho.d) != (circ.n, circ.d):
        raise DimensionError(f"state is on n={rho.n}, d={rho.d}; circuit on n={circ.n}, d={circ.d}")
    out = apply_operation_layers(circ, rho.matrix[None], layers)[0]
    return DensityMatrix(out, circ.n, circ.d, subnormalized=True)


def circuit_unitary(circ: Circuit) -> np.ndarray:
    """Full ``d**n x d**n`` unitary of a unitary-mode circuit."""
    return apply_unitary_layers(circ, np.eye(circ.dim, dtype=complex)).T


def product_vector(spec, n: int, d: int, tol: float = TOL) -> np.ndarray:
    """State vector for a product specification.

    ``spec`` is ``None`` (all zeros), a basis index, a digit string such as
    ``"01"``, or a sequence of ``n`` local vectors of length ``d``.
    """
    if spec is None:
        spec = 0
    if isinstance(spec, (int, np.integer)):
        if not 0 <= spec < d ** n:
            raise DimensionError(f"basis index {spec} out of range for n={n}, d={d}")
        v = np.zeros(d ** n, dtype=complex)
        v[int(spec)] = 1.0
        return v
    if isinstance(spec, str):
        digits = [int(c) for c in spec]
        if len(digits) != n or any(not 0 <= c < d for c in digits):
            raise DimensionError(f"bad basis label {spec!r} for n={n}, d={d}")
        return product_vector(int(np.ravel_multi_index(digits, (d,) * n)), n, d)
    locs = np.asarray(spec, dtype=complex)
    if locs.shape != (n, d):
        raise DimensionError(f"expected {n} local vectors of length {d}, got shape {locs.shape}")
    norms = np.einsum("ij,ij->i", locs.conj(), locs).real
    bad = np.flatnonzero(np.abs(norms - 1) > tol)
    if bad.size:
        raise ValidationError(f"local vector {int(bad[0])} is not normalized")
    v = np.ones(1, dtype=complex)
    for row in locs:
        v = np.kron(v, row)
    return v


def circuit_output_probability(circ: Circuit, x, y=None) -> float:
    """``f(x, y) = <x| T_N(|y><y|) |x>``; ``|<x|U_N|y>|^2`` for unitary circuits.

    ``x`` and ``y`` follow :func:`product_vector`; ``y=None`` is ``|0...0>``.
    """
    xv = product_vector(x, circ.n, circ.d)
    yv = product_vector(y, circ.n, circ.d)
    if circ.mode == "unitary":
        out = apply_unitary_layers(circ, yv[None, :])[0]
        p = abs(np.vdot(xv, out)) ** 2
    else:
        rho = apply_operation_layers(circ, np.outer(yv, yv.conj())[None])[0]
        p = float(np.vdot(xv, rho @ xv).real)
    return float(min(max(p, 0.0), 1.0)) if -TOL <= p <= 1 + TOL else float(p)


# -- architecture enumeration ------------------------------------------------

def _matchings(n: int, k: int) -> list[tuple]:
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for combo in itertools.combinations(pairs, k):
        flat = [q for pair in combo for q in pair]
        if len(set(flat)) == len(flat):
            out.append(combo)
    return out


def _compositions(total: int, parts: int, cap: int):
    if parts == 1:
        if 1 <= total <= cap:
            yield (total,)
        return
    for first in range(1, min(cap, total - parts + 1) + 1):
        for rest in _compositions(total - first, parts - 1, cap):
            yield (first,) + rest


def _check_counts(n: int, depth: int, size: int):
    if depth < 1 or size < 1:
        raise ValueError("depth and size must be positive")
    if depth > size:
        raise ValueError(f"depth {depth} > size {size} forces an empty layer")
    if n < 2 or size > depth * (n // 2):
        raise ValueError(f"size {size} does not fit in {depth} layers of at most {n // 2} disjoint gates")


def iter_architectures(n: int, d: int, depth: int, size: int, allow_idle: bool = False):
    """Lazily yield every canonical architecture (see :func:`enumerate_architectures`)."""
    _check_counts(n, depth, size)
    cache = {k: _matchings(n, k) for k in range(1, n // 2 + 1)}
    for comp in _compositions(size, depth, n // 2):
        for layers in itertools.product(*(cache[k] for k in comp)):
            if not allow_idle:
                touched = {q for layer in layers for pair in layer for q in pair}
                if len(touched) < n:
                    continue
            yield CircuitArchitecture.from_layers(n, d, [list(layer) for layer in layers], allow_idle)


def enumerate_architectures(n: int, d: int, depth: int, size: int, allow_idle: bool = False) -> list[CircuitArchitecture]:
    """All architectures of the given depth and size, without duplicates.

    Pairs are unordered and each layer is a lexicographically sorted set of
    disjoint pairs, so two architectures are equal iff their layers are.
    """
    return list(iter_architectures(n, d, depth, size, allow_idle))


def count_architecture_bound(n: int, depth: int, size: int) -> int:
    """``size! depth^(size-depth) / (size-depth)! * (n!)^depth``, exactly."""
    if depth < 1 or size < 1:
        raise ValueError("depth and size must be positive")
    if depth > size:
        raise ValueError(f"depth {depth} > size {size} forces an empty layer")
    return (math.factorial(size) * depth ** (size - depth) // math.factorial(size - depth)) * math.factorial(n) ** depth


# -- random circuits ---------------------------------------------------------

def random_circuit(arch: CircuitArchitecture, seed=None, mode: str = "unitary", n_kraus: int = 2) -> Circuit:
    """Haar-random unitary gates, or random channels with ``n_kraus`` Kraus operators."""
    rng = as_generator(seed)
    D = arch.d ** 2
    if mode == "unitary":
        gates = tuple(haar_random_unitary(D, rng) for _ in arch.placements)
    else:
        gates = tuple(random_channel(D, n_kraus, rng) for _ in arch.placements)
    return Circuit(arch, gates, mode)


def identity_circuit(arch: CircuitArchitecture) -> Circuit:
    return Circuit(arch, tuple(np.eye(arch.d ** 2, dtype=complex) for _ in arch.placements))
