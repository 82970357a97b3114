from __future__ import annotations

import json
import math

import numpy as np
import pytest

from oracles import brute_force_architectures, dense_channel, dense_unitary
from qpdim.circuit import (
    Circuit,
    CircuitArchitecture,
    GatePlacement,
    apply_unitary_layers,
    circuit_output_probability,
    circuit_unitary,
    count_architecture_bound,
    enumerate_architectures,
    identity_circuit,
    product_vector,
    random_circuit,
    simulate_operation_circuit,
    simulate_unitary_circuit,
    validate_architecture,
)
from qpdim.circuit_io import CircuitFormatError, dump_circuit, parse_circuit
from qpdim.core import (
    DensityMatrix,
    PureState,
    QuantumOperation,
    ValidationError,
    basis_state,
    depolarizing_channel,
    haar_random_state,
    random_density_matrix,
)

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def kinds(arch):
    return {v.kind for v in validate_architecture(arch)}


def test_validate_examples():
    assert validate_architecture(CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])) == []
    assert "overlap" in kinds(CircuitArchitecture.from_layers(4, 2, [[(0, 1), (1, 2)]], allow_idle=True))
    idle = CircuitArchitecture.from_layers(3, 2, [[(0, 1)]])
    assert kinds(idle) == {"idle"}
    assert validate_architecture(idle, allow_idle=True) == []


def test_validate_reports_all_violations():
    arch = CircuitArchitecture(4, 2, 3, (GatePlacement(1, 1, (0, 1)), GatePlacement(1, 2, (1, 1)),
                                        GatePlacement(3, 1, (2, 5))))
    assert {"pair", "range", "empty-layer", "idle"} <= kinds(arch)


def test_circuit_rejects_bad_gates():
    arch = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
    with pytest.raises(ValidationError):
        Circuit(arch, (2 * np.eye(4),))
    with pytest.raises(ValidationError):
        Circuit(arch, ())
    with pytest.raises(ValidationError):
        Circuit(CircuitArchitecture.from_layers(3, 2, [[(0, 1)]]), (np.eye(4),))


def test_identity_and_cnot():
    arch = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
    psi = PureState(haar_random_state(4, 0), 2)
    out = simulate_unitary_circuit(identity_circuit(arch), psi)
    assert np.abs(out.amplitudes - psi.amplitudes).max() < 1e-15
    out = simulate_unitary_circuit(Circuit(arch, (CNOT,)), basis_state("10", 2))
    assert np.abs(out.amplitudes - basis_state("11", 2).amplitudes).max() < 1e-15


def test_gate_orientation_on_reversed_pair():
    # CNOT on (0, 2) with control 0 flips qudit 2
    arch = CircuitArchitecture.from_layers(3, 2, [[(0, 2)], [(0, 1)]])
    circ = Circuit(arch, (CNOT, np.eye(4)))
    out = simulate_unitary_circuit(circ, basis_state("100", 3))
    assert abs(out.amplitudes[0b101] - 1) < 1e-15


def test_random_circuit_matches_dense_oracle():
    arch = CircuitArchitecture.from_layers(3, 2, [[(0, 2)], [(0, 1)], [(1, 2)]])
    for s in range(5):
        circ = random_circuit(arch, s)
        psi = PureState(haar_random_state(8, s), 3)
        out = simulate_unitary_circuit(circ, psi)
        assert np.abs(out.amplitudes - dense_unitary(circ) @ psi.amplitudes).max() < 1e-9
        assert abs(np.linalg.norm(out.amplitudes) - 1) < 1e-9


def test_gamma3_delta2_dense_oracle_qutrit():
    arch = CircuitArchitecture.from_layers(3, 3, [[(0, 1)], [(1, 2), ], [(0, 2)]])
    circ = random_circuit(arch, 1)
    assert np.abs(circuit_unitary(circ) - dense_unitary(circ)).max() < 1e-9
    arch = CircuitArchitecture.from_layers(4, 2, [[(0, 1), (2, 3)], [(1, 2)]])
    circ = random_circuit(arch, 2)
    assert np.abs(circuit_unitary(circ) - dense_unitary(circ)).max() < 1e-9


def test_layer_commutation_and_composition():
    arch = CircuitArchitecture.from_layers(4, 2, [[(0, 1), (2, 3)], [(1, 2)], [(0, 3), (1, 2)]])
    circ = random_circuit(arch, 3)
    swapped_arch = CircuitArchitecture.from_layers(4, 2, [[(2, 3), (0, 1)], [(1, 2)], [(1, 2), (0, 3)]])
    gates = dict(zip([p.qudits + (p.layer,) for p in arch.placements], circ.gates))
    swapped = Circuit(swapped_arch, tuple(gates[p.qudits + (p.layer,)] for p in swapped_arch.placements))
    psi = PureState(haar_random_state(16, 4), 4)
    a = simulate_unitary_circuit(circ, psi).amplitudes
    assert np.abs(a - simulate_unitary_circuit(swapped, psi).amplitudes).max() <= 1e-12
    mid = simulate_unitary_circuit(circ, psi, layers=[1])
    b = simulate_unitary_circuit(circ, mid, layers=[2, 3]).amplitudes
    assert np.abs(a - b).max() <= 1e-12


def test_operation_mode_identity_and_unitary_agreement():
    arch = CircuitArchitecture.from_layers(3, 2, [[(0, 1)], [(1, 2)]])
    rho = random_density_matrix(3, seed=0)
    ident = Circuit(arch, tuple(QuantumOperation.unitary(np.eye(4)) for _ in range(2)), "operation")
    assert np.abs(simulate_operation_circuit(ident, rho).matrix - rho.matrix).max() < 1e-15
    circ = random_circuit(arch, 5)
    U = circuit_unitary(circ)
    out = simulate_operation_circuit(circ.as_operation(), rho).matrix
    assert np.abs(out - U @ rho.matrix @ U.conj().T).max() < 1e-9


def test_operation_depolarizing_gate():
    p = 0.3
    arch = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
    circ = Circuit(arch, (depolarizing_channel(p, 4),), "operation")
    rho0 = basis_state(0, 2).to_density()
    out = simulate_operation_circuit(circ, rho0).matrix
    assert np.abs(out - ((1 - p) * rho0.matrix + p * np.eye(4) / 4)).max() < 1e-9


def test_random_operation_circuit_matches_dense_oracle_and_trace():
    arch = CircuitArchitecture.from_layers(3, 2, [[(0, 2)], [(0, 1)]], allow_idle=True)
    circ = random_circuit(arch, 8, mode="operation", n_kraus=3)
    rho = random_density_matrix(3, seed=1)
    out = simulate_operation_circuit(circ, rho)
    assert np.abs(out.matrix - dense_channel(circ, rho.matrix)).max() < 1e-9
    assert out.trace <= 1 + 1e-9


def test_output_probability_examples():
    arch = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
    ident = identity_circuit(arch)
    assert circuit_output_probability(ident, "00", "00") == 1.0
    assert circuit_output_probability(ident, "01", "10") == 0.0
    circ = random_circuit(arch, 1)
    rng = np.random.default_rng(2)
    x = np.array([haar_random_state(2, rng) for _ in range(2)])
    y = np.array([haar_random_state(2, rng) for _ in range(2)])
    U = dense_unitary(circ)
    ref = abs(np.vdot(product_vector(x, 2, 2), U @ product_vector(y, 2, 2))) ** 2
    assert abs(circuit_output_probability(circ, x, y) - ref) < 1e-12
    with pytest.raises(ValidationError):
        circuit_output_probability(circ, [[1, 1], [1, 0]])


def test_output_probability_operation_mode_is_born_rule():
    arch = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
    circ = random_circuit(arch, 4, mode="operation")
    rho = simulate_operation_circuit(circ, basis_state("01", 2).to_density()).matrix
    for x in ("00", "01", "10", "11"):
        v = product_vector(x, 2, 2)
        assert abs(circuit_output_probability(circ, x, "01") - np.vdot(v, rho @ v).real) < 1e-12


def test_enumeration_examples():
    assert len(enumerate_architectures(2, 2, 1, 1)) == 1
    assert len(enumerate_architectures(4, 2, 1, 2)) == 3
    assert len(enumerate_architectures(3, 2, 2, 2)) == 6
    with pytest.raises(ValueError):
        enumerate_architectures(3, 2, 2, 1)
    with pytest.raises(ValueError):
        enumerate_architectures(2, 2, 1, 2)


def test_enumeration_is_valid_and_duplicate_free():
    for idle in (False, True):
        archs = enumerate_architectures(4, 2, 2, 3, allow_idle=idle)
        assert all(validate_architecture(a) == [] for a in archs)
        keys = {a.canonical_key() for a in archs}
        assert len(keys) == len(archs)
        oracle = brute_force_architectures(4, 2, 3, idle)
        assert {tuple(frozenset(layer) for layer in a.layers()) for a in archs} == oracle


def test_count_bound_examples():
    assert count_architecture_bound(2, 1, 1) == 2
    assert count_architecture_bound(4, 1, 2) == 48
    with pytest.raises(ValueError):
        count_architecture_bound(3, 2, 1)
    assert count_architecture_bound(10, 3, 12) == (math.factorial(12) * 3**9 // math.factorial(9)) * math.factorial(10) ** 3


def test_batch_application_matches_single():
    arch = CircuitArchitecture.from_layers(3, 2, [[(0, 1)], [(1, 2)]])
    circ = random_circuit(arch, 9)
    states = np.array([haar_random_state(8, s) for s in range(4)])
    batch = apply_unitary_layers(circ, states)
    for s, row in zip(states, batch):
        assert np.abs(simulate_unitary_circuit(circ, PureState(s, 3)).amplitudes - row).max() < 1e-15


# -- circuit files -------------------------------------------------------------

def test_round_trip():
    arch = CircuitArchitecture.from_layers(4, 2, [[(0, 1), (2, 3)], [(1, 3)]])
    circ = random_circuit(arch, 0)
    back = parse_circuit(dump_circuit(circ))
    assert back.architecture == circ.architecture
    assert max(np.abs(a - b).max() for a, b in zip(back.gates, circ.gates)) == 0
    op = random_circuit(arch, 1, mode="operation")
    back = parse_circuit(dump_circuit(op))
    assert back.mode == "operation" and len(back.gates[0].kraus) == 2


def test_malformed_json_reports_line():
    with pytest.raises(CircuitFormatError) as e:
        parse_circuit('{"d": 2,\n "n": 2,\n "depth": 1\n "layers": []}')
    assert e.value.line == 4 and str(e.value).startswith("line 4:")


def _doc_text(layers, n=2, depth=1):
    return json.dumps({"d": 2, "n": n, "depth": depth, "layers": layers}, indent=1)


def _u(m):
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def test_non_unitary_gate_reports_its_line():
    text = _doc_text([[{"qudits": [0, 1], "unitary": _u(np.eye(4))}], [{"qudits": [0, 1], "unitary": _u(2 * np.eye(4))}]], depth=2)
    with pytest.raises(CircuitFormatError) as e:
        parse_circuit(text)
    second = [i for i, line in enumerate(text.splitlines(), 1) if '"qudits"' in line][1]
    assert e.value.line == second


def test_overlap_and_unknown_fields_rejected():
    text = _doc_text([[{"qudits": [0, 1], "unitary": _u(np.eye(4))}, {"qudits": [1, 2], "unitary": _u(np.eye(4))}]], n=3)
    with pytest.raises(CircuitFormatError, match="overlaps"):
        parse_circuit(text)
    with pytest.raises(CircuitFormatError, match="unknown"):
        parse_circuit(json.dumps({"d": 2, "n": 2, "depth": 1, "layers": [], "extra": 1}))
    with pytest.raises(CircuitFormatError, match="exactly one"):
        parse_circuit(_doc_text([[{"qudits": [0, 1]}]]))
