"""Closed-form pseudo-dimension, sign-pattern and sample-size bounds.

Everything is computed in the log domain (base 2), with ``lgamma`` for
factorials, so inputs like ``gamma = 10**6`` stay finite. Order-of-magnitude
expressions are instantiated with a unit leading constant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

LOG2E = 1.0 / math.log(2.0)


def _log2_factorial(k: int) -> float:
    return math.lgamma(k + 1) * LOG2E


def _check_int(name: str, value, lo: int) -> int:
    if isinstance(value, bool) or int(value) != value or value < lo:
        raise ValueError(f"{name} must be an integer >= {lo}, got {value!r}")
    return int(value)


class WarrenCount(NamedTuple):
    """``log2`` of the two sign-assignment counts for ``m`` polynomials."""

    log2_nonzero: float
    log2_any: float

    @property
    def nonzero(self) -> float:
        """(4 e deg m / n)^n, ``inf`` if it overflows a double."""
        return _exp2(self.log2_nonzero)

    @property
    def any(self) -> float:
        """(8 e deg m / n)^n."""
        return _exp2(self.log2_any)


def _exp2(x: float) -> float:
    try:
        return 2.0 ** x
    except OverflowError:
        return math.inf


def warren_count(n_vars: int, degree: int, m: int) -> WarrenCount:
    """Upper bounds on the number of (non-zero) consistent sign assignments.

    Needs ``m >= n_vars >= 1`` and ``degree >= 1``.
    """
    n_vars = _check_int("n_vars", n_vars, 1)
    degree = _check_int("degree", degree, 1)
    m = _check_int("m", m, 1)
    if m < n_vars:
        raise ValueError(f"need m >= n_vars, got m={m} < n_vars={n_vars}")
    base = math.log2(math.e * degree * m / n_vars)
    return WarrenCount(n_vars * (2.0 + base), n_vars * (3.0 + base))


def bound_fixed(d: int, gamma: int) -> float:
    """8 d^4 gamma log2(16 e gamma): pseudo-dimension bound for one fixed architecture."""
    d = _check_int("d", d, 2)
    gamma = _check_int("gamma", gamma, 1)
    return 8 * d**4 * gamma * math.log2(16 * math.e * gamma)


def log2_architecture_count(gamma: int, delta: int, n: int) -> float:
    """log2 of gamma! delta^(gamma-delta) / (gamma-delta)! (n!)^delta."""
    gamma = _check_int("gamma", gamma, 1)
    delta = _check_int("delta", delta, 1)
    n = _check_int("n", n, 2)
    if delta > gamma:
        raise ValueError(f"depth delta={delta} exceeds size gamma={gamma}")
    return (_log2_factorial(gamma) + (gamma - delta) * math.log2(delta)
            - _log2_factorial(gamma - delta) + delta * _log2_factorial(n))


def _variable(dpow: int, gamma: int, delta: int, n: int) -> float:
    lc = log2_architecture_count(gamma, delta, n)
    return 8 * dpow * gamma * (math.log2(16 * math.e * gamma) + lc)


def bound_variable(d: int, gamma: int, delta: int, n: int) -> float:
    """8 d^4 gamma log2(16 e gamma * #architectures): bound when the architecture is free."""
    d = _check_int("d", d, 2)
    return _variable(d**4, gamma, delta, n)


def bound_operations(d: int, gamma: int, delta: int, n: int) -> float:
    """As :func:`bound_variable` with d^8 in place of d^4 (Kraus-operator gates)."""
    d = _check_int("d", d, 2)
    return _variable(d**8, gamma, delta, n)


def sample_complexity(Delta: int, Gamma: int, d: int, eps: float, confidence: float,
                      alpha: float, beta: float, n: int | None = None) -> int:
    """Training-set size (1/eps)(P log2^2(P / ((beta-alpha) eps)) + log2(1/confidence)).

    ``P`` is :func:`bound_operations` at the promised size and depth, standing
    in for the fat-shattering dimension, which it upper-bounds. ``n`` defaults
    to ``2 * Gamma``, the most qudits ``Gamma`` two-qudit gates can touch.
    """
    if not 0 < alpha < beta < 1:
        raise ValueError(f"need 0 < alpha < beta < 1, got alpha={alpha}, beta={beta}")
    for name, v in (("eps", eps), ("confidence", confidence)):
        if not 0 < v < 1:
            raise ValueError(f"{name} must lie in (0, 1), got {v}")
    if n is None:
        n = 2 * int(Gamma)
    P = bound_operations(d, Gamma, Delta, n)
    inner = math.log2(P / ((beta - alpha) * eps))
    return math.ceil((P * inner**2 + math.log2(1 / confidence)) / eps)


@dataclass(frozen=True)
class BoundInputs:
    """Parameters shared by the bound calculators.

    ``confidence`` is the PAC failure probability; ``delta``/``Delta`` are depths.
    """

    d: int = 2
    n: int = 2
    gamma: int = 1
    delta: int = 1
    Gamma: int = 1
    Delta: int = 1
    eps: float = 0.1
    confidence: float = 0.05
    alpha: float = 0.05
    beta: float = 0.2
    m: int | None = None

    def __post_init__(self):
        _check_int("d", self.d, 2)
        _check_int("n", self.n, 2)
        _check_int("gamma", self.gamma, 1)
        _check_int("delta", self.delta, 1)
        _check_int("Gamma", self.Gamma, 1)
        _check_int("Delta", self.Delta, 1)
        if self.delta > self.gamma:
            raise ValueError(f"depth delta={self.delta} exceeds size gamma={self.gamma}")
        if self.Delta > self.Gamma:
            raise ValueError(f"depth Delta={self.Delta} exceeds size Gamma={self.Gamma}")
        if not 0 < self.alpha < self.beta < 1:
            raise ValueError("need 0 < alpha < beta < 1")
        if not (0 < self.eps < 1 and 0 < self.confidence < 1):
            raise ValueError("eps and confidence must lie in (0, 1)")

    @property
    def warren_vars(self) -> int:
        """Real variables in the fixed-architecture polynomial system."""
        return 2 * self.gamma * self.d**4

    @property
    def warren_degree(self) -> int:
        return 2 * self.gamma

    def report(self) -> list[tuple[str, float, str]]:
        """``(name, value, instantiated formula)`` rows for every calculator."""
        d, g, dl, n = self.d, self.gamma, self.delta, self.n
        rows = [
            ("bound_fixed", bound_fixed(d, g), f"8*{d}^4*{g}*log2(16e*{g})"),
            ("bound_variable", bound_variable(d, g, dl, n),
             f"8*{d}^4*{g}*log2(16e*{g}*{g}!*{dl}^({g}-{dl})/({g}-{dl})!*({n}!)^{dl})"),
            ("bound_operations", bound_operations(d, g, dl, n),
             f"8*{d}^8*{g}*log2(16e*{g}*{g}!*{dl}^({g}-{dl})/({g}-{dl})!*({n}!)^{dl})"),
        ]
        nv, deg = self.warren_vars, self.warren_degree
        m = self.m if self.m is not None else nv
        w = warren_count(nv, deg, m)
        rows.append(("log2_warren_nonzero", w.log2_nonzero, f"{nv}*log2(4e*{deg}*{m}/{nv})"))
        rows.append(("log2_warren_any", w.log2_any, f"{nv}*log2(8e*{deg}*{m}/{nv})"))
        sc = sample_complexity(self.Delta, self.Gamma, d, self.eps, self.confidence, self.alpha, self.beta)
        P = f"bound_operations({d},{self.Gamma},{self.Delta},{2 * self.Gamma})"
        rows.append(("sample_complexity", float(sc),
                     f"ceil((1/{self.eps})*({P}*log2^2({P}/(({self.beta}-{self.alpha})*{self.eps}))"
                     f"+log2(1/{self.confidence})))  [unit constant]"))
        return rows
