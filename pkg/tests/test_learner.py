from __future__ import annotations

import numpy as np
import pytest

from qpdim.circuit import Circuit, CircuitArchitecture, identity_circuit, random_circuit
from qpdim.core import haar_random_unitary
from qpdim.learner import (
    Distribution,
    GateParameterization,
    KrausParameterization,
    LearningConfig,
    _basis_prob_matrix,
    central_difference_gradient,
    check_hypothesis_shape,
    erm_fit,
    evaluate_hypothesis,
    generalization_experiment,
    generate_dataset,
    make_target,
    rows_to_csv,
)
from oracles import dense_channel, dense_unitary

ARCH3 = CircuitArchitecture.from_layers(3, 2, [[(0, 1)], [(1, 2)]])


def as_basis_index(locals_):
    return int(np.ravel_multi_index(tuple(np.argmax(np.abs(locals_), axis=1)), (2,) * len(locals_)))


def test_identity_dataset_labels():
    data = generate_dataset(identity_circuit(ARCH3), "basis", 200, seed=1)
    for e in data:
        assert e.p == float(as_basis_index(e.x) == as_basis_index(e.y))


def test_dataset_deterministic():
    circ = random_circuit(ARCH3, seed=4)
    a = generate_dataset(circ, "basis", 30, seed=9)
    b = generate_dataset(circ, "basis", 30, seed=9)
    assert all(np.array_equal(u.x, v.x) and np.array_equal(u.y, v.y) and u.p == v.p for u, v in zip(a, b))


def test_dataset_labels_match_dense_oracle():
    circ = random_circuit(ARCH3, seed=5)
    U = dense_unitary(circ)
    for e in generate_dataset(circ, "haar_product", 20, seed=2):
        x, y = e.vectors()
        assert abs(abs(np.vdot(x, U @ y)) ** 2 - e.p) < 1e-12


def test_dataset_mean_matches_expectation():
    circ = random_circuit(ARCH3, seed=6)
    F = np.abs(dense_unitary(circ)) ** 2
    data = generate_dataset(circ, "basis", 1000, seed=3)
    assert abs(np.mean([e.p for e in data]) - F.mean()) < 0.05


def test_distribution_parsing():
    assert Distribution.parse({"kind": "support", "support": [[0, 1]]}).pairs(8).tolist() == [[0, 1]]
    with pytest.raises(ValueError):
        Distribution.parse("gaussian")
    with pytest.raises(ValueError):
        Distribution.parse({"kind": "basis", "extra": 1})


def test_gate_parameterization_unitary():
    P = GateParameterization(2)
    rng = np.random.default_rng(0)
    H = rng.normal(size=(5, 16))
    U = P.matrix(H)
    assert np.abs(U @ np.swapaxes(U.conj(), -1, -2) - np.eye(4)).max() < 1e-12
    assert np.abs(P.hermitian(H) - np.swapaxes(P.hermitian(H).conj(), -1, -2)).max() == 0
    assert np.abs(P.matrix(np.zeros(16)) - np.eye(4)).max() < 1e-15


def test_kraus_parameterization_is_channel():
    P = KrausParameterization(2, 3)
    K = P.kraus(np.random.default_rng(1).normal(size=P.n_params))
    assert np.abs(np.einsum("kji,kjl->il", K.conj(), K) - np.eye(4)).max() < 1e-12


def test_central_difference_converges():
    rng = np.random.default_rng(2)
    A = rng.normal(size=(4, 4))

    def f(x):
        return np.sin(x @ A @ x) + np.sum(x**3)

    x = rng.normal(size=4)
    exact = np.cos(x @ A @ x) * ((A + A.T) @ x) + 3 * x**2
    g1 = central_difference_gradient(f, x, 1e-3)
    g2 = central_difference_gradient(f, x, 5e-4)
    # second-order method: halving h quarters the error
    e1, e2 = np.abs(g1 - exact).max(), np.abs(g2 - exact).max()
    assert e2 < e1 / 3
    batched = central_difference_gradient(lambda X: np.array([f(r) for r in X]), x, 1e-3, batched=True)
    assert np.abs(batched - g1).max() < 1e-12


def quick_config(**kw):
    base = dict(Gamma=2, Delta=2, n=3, restarts=20, iterations=300, seed=0)
    base.update(kw)
    return LearningConfig.from_dict(base)


def test_config_validation():
    with pytest.raises(ValueError, match="unknown"):
        LearningConfig.from_dict({"Gamma": 2, "bogus": 1})
    with pytest.raises(ValueError):
        LearningConfig.from_dict({"alpha": 0.3, "beta": 0.2})
    cfg = quick_config()
    assert LearningConfig.from_dict(cfg.to_dict()) == cfg


def test_fit_empty_data():
    with pytest.raises(ValueError):
        erm_fit([], quick_config())


def test_fit_identity_target():
    cfg = quick_config(target="identity")
    target = make_target(cfg, 0)
    data = generate_dataset(target, "basis", 40, seed=1)
    fit = erm_fit(data, cfg, seed=0)
    assert fit.success and fit.train_error <= cfg.alpha
    assert check_hypothesis_shape(fit.hypothesis, cfg)
    assert evaluate_hypothesis(fit.hypothesis, target, "basis", cfg.beta).value < 0.1


def test_fit_random_target_deterministic():
    cfg = quick_config()
    target = make_target(cfg, 3)
    data = generate_dataset(target, "basis", 50, seed=2)
    a, b = erm_fit(data, cfg, seed=5), erm_fit(data, cfg, seed=5)
    assert a.success and np.array_equal(a.params, b.params)


def test_evaluate_self_and_permutation():
    ident = identity_circuit(ARCH3)
    assert evaluate_hypothesis(ident, ident, "basis", 0.2).value == 0
    X = np.array([[0, 1], [1, 0]])
    flip = Circuit(ARCH3, (np.kron(X, np.eye(2)), np.eye(4)))
    est = evaluate_hypothesis(flip, ident, "diagonal", 0.2)
    assert est.value == 1 and est.mode == "exhaustive"


def test_monte_carlo_agrees_with_exhaustive():
    a, b = random_circuit(ARCH3, seed=11), random_circuit(ARCH3, seed=12)
    exact = evaluate_hypothesis(a, b, "basis", 0.1, mode="exhaustive").value
    mc = evaluate_hypothesis(a, b, "basis", 0.1, n_test=3000, seed=0, mode="monte_carlo", level=0.999)
    assert mc.lower <= exact <= mc.upper


def test_basis_prob_matrix_operations():
    circ = random_circuit(ARCH3, seed=13, mode="operation", n_kraus=2)
    D = 8
    ref = np.empty((D, D))
    for y in range(D):
        rho = np.zeros((D, D), dtype=complex)
        rho[y, y] = 1
        ref[:, y] = np.real(np.diag(dense_channel(circ, rho)))
    assert np.abs(_basis_prob_matrix(circ) - ref).max() < 1e-12


def test_operation_mode_fit_smoke():
    cfg = quick_config(mode="operation", target="identity", restarts=3, iterations=60, n_kraus=1)
    target = make_target(cfg, 0)
    fit = erm_fit(generate_dataset(target, "basis", 10, seed=0), cfg, seed=0)
    assert fit.hypothesis.mode == "operation" and np.isfinite(fit.train_error)


def test_experiment_injection_and_shape():
    cfg = quick_config(m_grid=[5, 10, 20], seeds=[0, 1])
    rows = generalization_experiment(cfg, inject_target=True)
    assert len(rows) == 6
    assert all(r.train_err == 0 and r.test_err == 0 and r.success for r in rows)
    text = rows_to_csv(rows)
    assert text.splitlines()[0] == "m,seed,train_err,test_err,success,predicted_m"
    assert text == rows_to_csv(generalization_experiment(cfg, inject_target=True))
