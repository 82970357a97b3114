from __future__ import annotations

import numpy as np
import pytest

from qpdim.circuit import circuit_unitary
from qpdim.core import Effect, born_probability
from qpdim.shattering import BudgetExceeded, is_pseudo_shattered, verify_witness
from qpdim.state_family import (
    family_points,
    prepare_state_circuit,
    realized_table,
    shattering_consistency,
    single_gate_search,
    state_family_functions,
    state_family_state,
)


def row(table, members):
    label = "C[" + " ".join(members) + "]"
    return table.values[table.labels.index(label)]


def test_n1_rows():
    t = state_family_functions(1)
    assert t.points == ("00", "10")
    assert np.array_equal(row(t, ["00"]), [1, 0])
    assert np.array_equal(row(t, ["00", "10"]), [0.5, 0.5])


def test_n2_table_shape_and_sums():
    t = state_family_functions(2)
    assert t.values.shape == (16, 4)
    sums = t.values.sum(axis=1)
    assert sums[0] == 0 and np.allclose(sums[1:], 1, atol=1e-15)


def test_budget():
    with pytest.raises(BudgetExceeded):
        state_family_functions(5)


def test_state_examples():
    empty = state_family_state(2, [])
    assert empty.n == 3 and empty.amplitudes[1] == 1
    full = state_family_state(2, range(4))
    assert np.allclose(full.amplitudes[::2], 0.5) and np.all(full.amplitudes[1::2] == 0)


def test_state_reproduces_table_rows():
    rng = np.random.default_rng(0)
    n = 3
    t = state_family_functions(n)
    pts = family_points(n)
    for _ in range(10):
        members = [p for p in pts if rng.random() < 0.5]
        psi = state_family_state(n, members)
        assert abs(np.vdot(psi.amplitudes, psi.amplitudes).real - 1) < 1e-12
        for i, p in enumerate(pts):
            proj = np.zeros(2 ** (n + 1))
            proj[int(p, 2)] = 1
            assert abs(born_probability(psi, Effect.projector(proj)) - row(t, members)[i]) < 1e-12


def test_uniform_thresholds_shatter_n1_to_n3():
    for n in (1, 2, 3):
        t = state_family_functions(n)
        res = is_pseudo_shattered(t, None, np.full(2**n, 1 / 2**n))
        assert res.shattered and verify_witness(t, res)
        assert t.n_functions >= 2 ** t.n_points


def test_prepare_state_circuit():
    rng = np.random.default_rng(1)
    for size in (4, 8):
        for _ in range(5):
            v = rng.normal(size=size) + 1j * rng.normal(size=size)
            v /= np.linalg.norm(v)
            assert np.abs(circuit_unitary(prepare_state_circuit(v))[:, 0] - v).max() < 1e-12
    # product state (Schmidt rank one) takes the degenerate branch
    v = np.kron([1, 0], np.array([0, 1, 0, 0]))
    assert np.abs(circuit_unitary(prepare_state_circuit(v))[:, 0] - v).max() < 1e-12


def test_realized_family_and_bound_consistency():
    for n in (1, 2):
        assert np.abs(realized_table(n).values - state_family_functions(n).values).max() < 1e-12
        info = shattering_consistency(n)
        assert info["shattered"] and info["consistent"]
        assert 2**n <= info["bound"]


def test_single_gate_search_small():
    out = single_gate_search(d=2, max_samples=500, seed=3)
    assert out["status"] in ("found", "inconclusive")
    if out["status"] == "found":
        assert len(out["points"]) == 2 and len(out["witness"]) == 4
