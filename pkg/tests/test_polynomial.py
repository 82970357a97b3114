from __future__ import annotations

import numpy as np
import pytest

from oracles import dense_unitary
from qpdim.circuit import (
    CircuitArchitecture,
    circuit_output_probability,
    identity_circuit,
    product_vector,
    random_circuit,
)
from qpdim.core import haar_random_state
from qpdim.polynomial import (
    PolynomialSizeError,
    SparsePolynomial,
    Variable,
    VariableRegistry,
    amplitude_polynomial,
    circuit_assignment,
    gate_assignment,
    probability_polynomial,
    variable_input_amplitude,
    variable_input_polynomial,
    vector_assignment,
)

N2 = CircuitArchitecture.from_layers(2, 2, [[(0, 1)]])
N2G2 = CircuitArchitecture.from_layers(2, 2, [[(0, 1)], [(0, 1)]])
N3G3 = CircuitArchitecture.from_layers(3, 2, [[(0, 1)], [(1, 2)], [(0, 2)]])


def locals_(n, d, rng):
    return np.array([haar_random_state(d, rng) for _ in range(n)])


def test_identity_substitution_collapses_q00():
    q = amplitude_polynomial(N2, 0)
    rest = q.substitute(gate_assignment(identity_circuit(N2)))
    assert len(rest) == 1
    (key, coeff), = rest.terms.items()
    assert coeff == 1 and sorted(rest.slot_name(s) for s, _ in key) == ["x0[0]", "x1[0]"]


def test_q_coefficients_and_size():
    q = amplitude_polynomial(N3G3, 5)
    assert len(q) == 2 ** (2 * 3)
    assert all(c == 1 for c in q.terms.values())


def test_gate_degree_gamma2_and_multilinear():
    q = amplitude_polynomial(N2G2, 1)
    assert q.degree_report()["gate"] == 2
    assert q.max_exponent("gate") == 1


def test_q_matches_simulator_amplitude():
    rng = np.random.default_rng(0)
    for z in range(8):
        q = amplitude_polynomial(N3G3, z)
        circ = random_circuit(N3G3, rng)
        x = locals_(3, 2, rng)
        val = q.evaluate(circuit_assignment(circ, x))
        ref = np.vdot(product_vector(x, 3, 2), dense_unitary(circ)[:, z])
        # q^z is built from adjoint entries, so it equals the conjugate amplitude
        assert abs(val - np.conj(ref)) < 1e-9
        assert q.degree_report()["gate"] == 3


def test_probability_identity_value():
    p = probability_polynomial(N2, 0)
    assert abs(p.evaluate(circuit_assignment(identity_circuit(N2), "00")) - 1) < 1e-15


def test_probability_matches_simulator():
    rng = np.random.default_rng(1)
    p = probability_polynomial(N3G3, 3)
    for _ in range(20):
        circ = random_circuit(N3G3, rng)
        x = locals_(3, 2, rng)
        assert abs(p.evaluate(circuit_assignment(circ, x)) - circuit_output_probability(circ, x, 3)) < 1e-9


def test_expanded_probability_is_real_with_certified_degrees():
    p = probability_polynomial(N2G2, 0)
    full = p.expand()
    assert full.is_real(1e-12)
    real = full.to_real()
    assert real.is_real(1e-12)
    measured = real.degree_report()
    assert measured == p.degree_report() == {"gate": 4, "x": 4}
    rng = np.random.default_rng(2)
    circ = random_circuit(N2G2, rng)
    a = circuit_assignment(circ, locals_(2, 2, rng))
    assert abs(full.evaluate(a) - p.evaluate(a)) < 1e-12
    assert abs(real.evaluate(a) - p.evaluate(a)) < 1e-12


def test_variable_input_matches_simulator_and_degrees():
    rng = np.random.default_rng(3)
    p = variable_input_polynomial(N3G3)
    for _ in range(20):
        circ = random_circuit(N3G3, rng)
        x, y = locals_(3, 2, rng), locals_(3, 2, rng)
        val = p.evaluate(circuit_assignment(circ, x, y))
        assert abs(val - circuit_output_probability(circ, x, y)) < 1e-9
    deg = p.degree_report()
    assert deg["y"] <= 6 and deg["x"] <= 6 and deg["gate"] <= 6


def test_variable_input_small_expansion_degrees():
    p = variable_input_polynomial(N2)
    real = p.expand().to_real(max_terms=1 << 20)
    assert real.degree_report() == p.degree_report() == {"gate": 2, "x": 4, "y": 4}


def test_variable_input_fixed_basis_y_recovers_fixed():
    for z in (0, 2):
        q1 = variable_input_amplitude(N2G2).substitute(vector_assignment(z, 2, 2, "y"))
        q0 = amplitude_polynomial(N2G2, z)
        assert q1.dump() == q0.dump()
        p1 = (q1 * q1.conj()).dump()
        assert p1 == probability_polynomial(N2G2, z).expand().dump()


def test_registry_counts():
    d, n, g = 2, 3, 3
    reg = VariableRegistry.for_architecture(N3G3)
    assert reg.real_count("gate") == 2 * g * d**4
    assert reg.real_count("x") == 2 * d * n
    reg = VariableRegistry.for_architecture(N3G3, input_vars=True)
    assert reg.real_count("gate") + reg.real_count("x") + reg.real_count("y") == 2 * g * d**4 + 4 * d * n


def test_degree_report_constant_and_evaluate_basics():
    reg = VariableRegistry([Variable("x", 0, 0), Variable("x", 0, 1)])
    assert SparsePolynomial.constant(reg, 3).degree_report() == {"x": 0}
    assert SparsePolynomial(reg).evaluate({}) == 0
    v1 = SparsePolynomial.variable(reg, Variable("x", 0, 0))
    v2 = SparsePolynomial.variable(reg, Variable("x", 0, 1))
    mono = v1 * v2 * 2
    assert mono.evaluate({"x0[0]": 3, "x0[1]": 5}) == 30
    with pytest.raises(KeyError):
        mono.evaluate({"x0[0]": 3})


def test_measurement_degree_n2():
    p = probability_polynomial(N2, 1)
    assert p.expand().to_real().degree_report()["x"] <= 4


def test_qutrit_probability():
    arch = CircuitArchitecture.from_layers(2, 3, [[(0, 1)]])
    p = variable_input_polynomial(arch)
    rng = np.random.default_rng(4)
    circ = random_circuit(arch, rng)
    x, y = locals_(2, 3, rng), locals_(2, 3, rng)
    assert abs(p.evaluate(circuit_assignment(circ, x, y)) - circuit_output_probability(circ, x, y)) < 1e-9


def test_size_guard():
    big = CircuitArchitecture.from_layers(4, 2, [[(0, 1), (2, 3)]] * 5)
    with pytest.raises(PolynomialSizeError):
        amplitude_polynomial(big, 0)
    n4 = CircuitArchitecture.from_layers(4, 2, [[(0, 1), (2, 3)], [(1, 2), (0, 3)]])
    with pytest.raises(PolynomialSizeError):
        variable_input_polynomial(n4).expand()


def test_dump_is_canonical():
    a = variable_input_polynomial(N2).expand().dump()
    b = variable_input_polynomial(N2).expand().dump()
    assert a == b
    first = a.splitlines()[0].split()
    assert len(first) >= 2 and all(":" in tok for tok in first[2:])


def test_arithmetic():
    reg = VariableRegistry([Variable("x", 0, 0)])
    v = SparsePolynomial.variable(reg, Variable("x", 0, 0))
    sq = (v + 1) * (v - 1)
    assert abs(sq.evaluate({"x0[0]": 2 + 1j}) - ((2 + 1j) ** 2 - 1)) < 1e-12
    assert len(v - v) == 0
    assert (v * v.conj()).is_real()
