"""A family of (n+1)-qubit states whose Born-rule functions shatter 2^n points.

For every subset ``C`` of the labels ``{x0 : x in {0,1}^n}`` the state
``|psi_C>`` is the uniform superposition over ``C``; the empty subset maps to
``|0...0>|1>``, which is orthogonal to every point. Measuring ``|x0><x0|``
gives ``1/|C|`` on ``C`` and ``0`` elsewhere, so the thresholds ``1/2^n``
split every pattern.
"""
from __future__ import annotations

import numpy as np

from .bounds import bound_variable
from .circuit import Circuit, CircuitArchitecture, circuit_output_probability
from .core import PureState, as_generator, haar_random_unitary
from .shattering import BudgetExceeded, FunctionTable, Witness, find_shattered_set, is_pseudo_shattered

MAX_N = 4


def family_points(n: int) -> tuple[str, ...]:
    return tuple(format(x, f"0{n}b") + "0" for x in range(2**n)) if n else ("0",)


def _subset_label(members) -> str:
    return "C[" + " ".join(members) + "]"


def _point_indices(n: int, C) -> list[int]:
    """Indices into ``family_points(n)``; members may be ints ``x`` or labels ``x`` / ``x0``."""
    out = set()
    for c in C:
        if isinstance(c, (int, np.integer)):
            x = int(c)
        else:
            s = str(c)
            if len(s) == n + 1 and s.endswith("0"):
                s = s[:-1]
            if len(s) != n or set(s) - {"0", "1"}:
                raise ValueError(f"{c!r} is not a label of the {n}-qubit family")
            x = int(s, 2)
        if not 0 <= x < 2**n:
            raise ValueError(f"{c!r} out of range for n={n}")
        out.add(x)
    return sorted(out)


def state_family_state(n: int, C=()) -> PureState:
    """``|psi_C>`` on ``n + 1`` qubits, with ``|x0>`` at index ``2x``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    members = _point_indices(n, C)
    amp = np.zeros(2 ** (n + 1), dtype=complex)
    if members:
        amp[[2 * x for x in members]] = 1 / np.sqrt(len(members))
    else:
        amp[1] = 1.0
    return PureState(amp, n + 1, 2)


def state_family_functions(n: int) -> FunctionTable:
    """All ``2^(2^n)`` functions ``f_C(x0) = |<x0|psi_C>|^2`` on the ``2^n`` points.

    Row ``r`` is the subset whose bitmask is ``r`` (row 0 is the empty subset).
    """
    if not 1 <= n <= MAX_N:
        raise BudgetExceeded(f"state family table needs 1 <= n <= {MAX_N} (got {n}); it has 2^(2^n) rows")
    pts = family_points(n)
    k = len(pts)
    masks = np.arange(1 << k, dtype=np.int64)
    bits = (masks[:, None] >> np.arange(k)) & 1
    sizes = bits.sum(axis=1)
    values = np.where(sizes[:, None] > 0, bits / np.maximum(sizes, 1)[:, None], 0.0)
    labels = tuple(_subset_label([pts[i] for i in range(k) if r >> i & 1]) for r in range(1 << k))
    return FunctionTable(pts, labels, values)


def family_thresholds(n: int) -> np.ndarray:
    return np.full(2**n, 1.0 / 2**n)


# -- circuit realizations ------------------------------------------------------

def _complete_unitary(columns: np.ndarray) -> np.ndarray:
    """A unitary whose leading columns are the given orthonormal columns."""
    cols = np.asarray(columns, dtype=complex)
    D, k = cols.shape
    rng = np.random.default_rng(0)
    filler = rng.normal(size=(D, D - k)) + 1j * rng.normal(size=(D, D - k))
    q, _ = np.linalg.qr(np.hstack([cols, filler]))
    # qr fixes columns only up to phase
    phases = np.einsum("ij,ij->j", q[:, :k].conj(), cols)
    q[:, :k] *= phases / np.abs(phases)
    return q


def prepare_state_circuit(psi) -> Circuit:
    """A 2-local qubit circuit with ``U|0...0> = psi`` for 2 or 3 qubits.

    Two qubits use a single gate. Three qubits split ``psi`` by a Schmidt
    decomposition across qubit 0: the first gate on (0, 1) prepares
    ``sum_k s_k |u_k>|k>``, the second on (1, 2) maps ``|k>|0>`` to the
    Schmidt vector ``|w_k>`` of qubits 1, 2.
    """
    psi = np.asarray(getattr(psi, "amplitudes", psi), dtype=complex)
    psi = psi / np.linalg.norm(psi)
    if psi.size == 4:
        arch = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
        return Circuit(arch, (_complete_unitary(psi[:, None]),))
    if psi.size != 8:
        raise ValueError("only 2- and 3-qubit states are supported")
    u, s, vh = np.linalg.svd(psi.reshape(2, 4))
    first = np.zeros(4, dtype=complex)
    for k in range(2):
        first += s[k] * np.kron(u[:, k], np.eye(2)[k])
    w = vh[:2].T  # columns |w_k>
    if s[1] < 1e-12:
        w = _complete_unitary(w[:, :1])[:, :2]
    second = np.zeros((4, 2), dtype=complex)
    second[:, 0], second[:, 1] = w[:, 0], w[:, 1]
    # the second gate sees |k>|0> at local index 2k
    g2 = _complete_unitary(second)[:, [0, 2, 1, 3]]
    arch = CircuitArchitecture.from_layers(3, 2, [[(0, 1)], [(1, 2)]])
    return Circuit(arch, (_complete_unitary(first[:, None]), g2))


def family_circuits(n: int) -> list[tuple[str, Circuit]]:
    """Circuits realizing every ``|psi_C>`` for ``n`` in {1, 2}."""
    if n not in (1, 2):
        raise ValueError("circuit realizations are provided for n = 1, 2")
    table = state_family_functions(n)
    out = []
    for r, label in enumerate(table.labels):
        C = [i for i in range(2**n) if r >> i & 1]
        out.append((label, prepare_state_circuit(state_family_state(n, C))))
    return out


def realized_table(n: int) -> FunctionTable:
    """The family table recomputed by simulating the preparing circuits."""
    pts = family_points(n)
    rows = []
    labels = []
    for label, circ in family_circuits(n):
        labels.append(label)
        rows.append([circuit_output_probability(circ, p) for p in pts])
    return FunctionTable(pts, tuple(labels), np.array(rows))


def shattering_consistency(n: int) -> dict:
    """Check the pseudo-dimension upper bound against the realized family.

    Returns the realized size/depth, the number of shattered points and the
    bound value; a shattered set larger than the bound would be a contradiction.
    """
    circs = family_circuits(n)
    arch = circs[0][1].architecture
    res = is_pseudo_shattered(realized_table(n), None, family_thresholds(n) - 1e-9)
    bound = bound_variable(2, arch.size, arch.depth, n + 1)
    return {"n": n, "gamma": arch.size, "delta": arch.depth, "shattered": res.shattered,
            "points": 2**n, "bound": bound, "consistent": (not res.shattered) or 2**n <= bound}


# -- single-gate lower-bound search ------------------------------------------

def single_gate_table(n_samples: int, d: int = 2, seed=None) -> FunctionTable:
    """Rows ``f_U(x) = |<x|U|0 0>|^2`` over the ``d^2`` basis points for Haar-random ``U``."""
    rng = as_generator(seed)
    D = d * d
    cols = np.array([haar_random_unitary(D, rng)[:, 0] for _ in range(n_samples)])
    pts = tuple("".join(map(str, np.unravel_index(i, (d, d)))) for i in range(D))
    return FunctionTable(pts, tuple(f"U{i}" for i in range(n_samples)), np.abs(cols) ** 2)


def single_gate_search(d: int = 2, k: int | None = None, max_samples: int = 10_000, seed=0,
                       max_candidates: int = 24, schedule=(64, 256, 1024, 4096)) -> dict:
    """Look for ``k`` (default ``d``) points shattered by single-gate functions.

    Samples grow along ``schedule`` up to ``max_samples``. A returned witness
    is exact; not finding one is inconclusive.
    """
    k = d if k is None else k
    sizes = sorted({s for s in schedule if s < max_samples} | {max_samples})
    table = single_gate_table(max_samples, d, seed)
    for m in sizes:
        sub = FunctionTable(table.points, table.labels[:m], table.values[:m])
        w: Witness | None = find_shattered_set(sub, k, budget=10**8, max_candidates=max_candidates)
        if w is not None:
            return {"d": d, "k": k, "samples": m, "status": "found", "points": w.points,
                    "thresholds": w.thresholds, "witness": w.result.witness}
    return {"d": d, "k": k, "samples": max_samples, "status": "inconclusive"}

