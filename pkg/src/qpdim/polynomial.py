"""Symbolic amplitude and probability polynomials of 2-local circuits.

For an architecture ``N`` the amplitude ``<z| U_N^dag |x>`` is built by pushing
the product vector ``|x>`` backwards through the circuit, last layer first.
Every gate contributes the entries ``w[r, c]`` of its adjoint ``U^dag`` as
complex variables, and every qudit of ``x`` contributes ``d`` complex
variables. The result ``q`` is multilinear in the gate entries with degree
exactly ``size``, and has degree ``n`` in the ``x`` variables.

Probabilities are ``p = q * conj(q)``. Polynomials are stored over pairs
``(v, conj(v))`` of each complex variable. This substitution is linear and
invertible with ``(Re v, Im v)``, so degrees carry over unchanged to the real
variables. :meth:`SparsePolynomial.to_real` performs the change of variables
explicitly.

Because ``|q|^2`` has ``len(q)**2`` terms, it is held in factored form as a
:class:`ModulusSquared`. :meth:`ModulusSquared.expand` multiplies it out
when the size guard allows.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .circuit import Circuit, CircuitArchitecture, product_vector, validate_architecture
from .core import ValidationError

PRUNE = 1e-14
MAX_TERMS = 1 << 16
GROUPS = ("gate", "x", "y")


class PolynomialSizeError(ValueError):
    """Raised when a symbolic construction would exceed the term budget."""


@dataclass(frozen=True, order=True)
class Variable:
    """One complex variable: gate entry ``w{owner}[row,col]`` or vector entry ``x{owner}[row]``."""

    group: str
    owner: int
    row: int
    col: int = 0

    @property
    def name(self) -> str:
        if self.group == "gate":
            return f"w{self.owner}[{self.row},{self.col}]"
        return f"{self.group}{self.owner}[{self.row}]"

    def __str__(self):
        return self.name


class VariableRegistry:
    """Ordered set of complex variables, grouped as gate / x / y."""

    def __init__(self, variables):
        self.variables = tuple(sorted(variables, key=lambda v: (GROUPS.index(v.group), v.owner, v.row, v.col)))
        self.index = {v: i for i, v in enumerate(self.variables)}
        self.by_name = {v.name: v for v in self.variables}
        self.group_of = [v.group for v in self.variables]

    @classmethod
    def for_architecture(cls, arch: CircuitArchitecture, input_vars: bool = False) -> "VariableRegistry":
        D = arch.d ** 2
        vs = [Variable("gate", g, r, c) for g in range(arch.size) for r in range(D) for c in range(D)]
        vs += [Variable("x", i, j) for i in range(arch.n) for j in range(arch.d)]
        if input_vars:
            vs += [Variable("y", i, j) for i in range(arch.n) for j in range(arch.d)]
        return cls(vs)

    def __len__(self):
        return len(self.variables)

    def __eq__(self, other):
        return isinstance(other, VariableRegistry) and self.variables == other.variables

    def __hash__(self):
        return hash(self.variables)

    def complex_count(self, group: str) -> int:
        return sum(1 for g in self.group_of if g == group)

    def real_count(self, group: str) -> int:
        return 2 * self.complex_count(group)

    def slot(self, var: Variable, flag: int = 0) -> int:
        return 2 * self.index[var] + flag

    def resolve(self, key) -> Variable:
        if isinstance(key, Variable):
            return key
        try:
            return self.by_name[key]
        except KeyError:
            raise KeyError(f"unknown variable {key!r}") from None


def _mul_keys(k1: tuple, k2: tuple) -> tuple:
    if not k1:
        return k2
    if not k2:
        return k1
    acc = dict(k1)
    for s, e in k2:
        acc[s] = acc.get(s, 0) + e
    return tuple(sorted(acc.items()))


class SparsePolynomial:
    """Polynomial with complex coefficients over a :class:`VariableRegistry`.

    Monomials are tuples of ``(slot, exponent)`` sorted by slot, where
    ``slot = 2 * var_index + flag``. With ``basis="complex"`` the flag selects
    ``v`` (0) or ``conj(v)`` (1); with ``basis="real"`` it selects ``Re v`` or
    ``Im v``. Terms with ``|coeff| <= PRUNE`` are dropped.
    """

    __slots__ = ("registry", "terms", "basis", "_compiled", "_vars")

    def __init__(self, registry: VariableRegistry, terms: Mapping | None = None, basis: str = "complex",
                 prune: float = PRUNE):
        if basis not in ("complex", "real"):
            raise ValueError(f"unknown basis {basis!r}")
        self.registry = registry
        self.basis = basis
        self.terms = {k: complex(c) for k, c in (terms or {}).items() if abs(c) > prune}
        self._compiled = None
        self._vars = None

    # -- construction ---------------------------------------------------
    @classmethod
    def constant(cls, registry, value, basis="complex"):
        return cls(registry, {(): value}, basis)

    @classmethod
    def variable(cls, registry, var, conj: bool = False):
        var = registry.resolve(var)
        return cls(registry, {((registry.slot(var, int(conj)), 1),): 1.0})

    def _like(self, terms) -> "SparsePolynomial":
        return SparsePolynomial(self.registry, terms, self.basis)

    def _coerce(self, other) -> "SparsePolynomial":
        if isinstance(other, SparsePolynomial):
            if other.registry != self.registry or other.basis != self.basis:
                raise ValueError("polynomials live over different variable registries")
            return other
        return self._like({(): other})

    # -- arithmetic -----------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, 0) + c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SparsePolynomial):
            return self._like({k: c * other for k, c in self.terms.items()})
        other = self._coerce(other)
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = _mul_keys(k1, k2)
                out[k] = out.get(k, 0) + c1 * c2
        return self._like(out)

    __rmul__ = __mul__

    def conj(self) -> "SparsePolynomial":
        """Complex conjugate as a function of the underlying complex variables."""
        if self.basis == "real":
            return self._like({k: c.conjugate() for k, c in self.terms.items()})
        return self._like({
            tuple(sorted((s ^ 1, e) for s, e in k)): c.conjugate() for k, c in self.terms.items()
        })

    def __eq__(self, other):
        return (isinstance(other, SparsePolynomial) and self.registry == other.registry
                and self.basis == other.basis and self.terms == other.terms)

    def allclose(self, other: "SparsePolynomial", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0) - other.terms.get(k, 0)) <= tol for k in keys)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"SparsePolynomial({len(self)} terms, basis={self.basis!r})"

    # -- inspection -----------------------------------------------------
    def variables(self) -> frozenset:
        if self._vars is None:
            self._vars = frozenset(self.registry.variables[s // 2] for k in self.terms for s, _ in k)
        return self._vars

    def degree_report(self) -> dict:
        """Maximum total degree in each variable group, over all stored terms."""
        out = {g: 0 for g in GROUPS if self.registry.complex_count(g)}
        group_of = self.registry.group_of
        for k in self.terms:
            acc = dict.fromkeys(out, 0)
            for s, e in k:
                acc[group_of[s // 2]] += e
            for g, v in acc.items():
                if v > out[g]:
                    out[g] = v
        return out

    def max_exponent(self, group: str | None = None) -> int:
        group_of = self.registry.group_of
        return max((e for k in self.terms for s, e in k if group is None or group_of[s // 2] == group), default=0)

    def is_real(self, tol: float = 1e-12) -> bool:
        return all(abs(c.imag) <= tol for c in self.terms.values())

    # -- evaluation -----------------------------------------------------
    def _compile(self):
        if self._compiled is None:
            null = 2 * len(self.registry)
            starts, slots, exps, coeffs = [], [], [], []
            for k, c in self.terms.items():
                starts.append(len(slots))
                if not k:
                    slots.append(null)
                    exps.append(1)
                for s, e in k:
                    slots.append(s)
                    exps.append(e)
                coeffs.append(c)
            self._compiled = (np.array(starts, dtype=np.intp), np.array(slots, dtype=np.intp),
                              np.array(exps), np.array(coeffs, dtype=complex))
        return self._compiled

    def _slot_values(self, assignment: Mapping, needed: set) -> np.ndarray:
        vals = np.zeros(2 * len(self.registry) + 1, dtype=complex)
        vals[-1] = 1.0
        given = set()
        for key, value in assignment.items():
            var = self.registry.resolve(key)
            if var not in self.registry.index:
                continue
            i = self.registry.index[var]
            value = complex(value)
            if self.basis == "complex":
                vals[2 * i], vals[2 * i + 1] = value, value.conjugate()
            else:
                vals[2 * i], vals[2 * i + 1] = value.real, value.imag
            given.add(var)
        missing = needed - given
        if missing:
            names = sorted(v.name for v in missing)
            raise KeyError(f"assignment is missing {len(missing)} variable(s), e.g. {names[:3]}")
        return vals

    def evaluate(self, assignment: Mapping) -> complex:
        """Exact term-by-term value; ``assignment`` maps every variable of the polynomial to a complex number."""
        if not self.terms:
            return 0j
        vals = self._slot_values(assignment, self.variables())
        starts, slots, exps, coeffs = self._compile()
        factors = vals[slots] ** exps
        return complex(np.dot(coeffs, np.multiply.reduceat(factors, starts)))

    def substitute(self, assignment: Mapping) -> "SparsePolynomial":
        """Fix some variables, returning a polynomial in the rest."""
        fixed = {}
        for key, value in assignment.items():
            var = self.registry.resolve(key)
            if var not in self.registry.index:
                continue
            i = self.registry.index[var]
            value = complex(value)
            if self.basis == "complex":
                fixed[2 * i], fixed[2 * i + 1] = value, value.conjugate()
            else:
                fixed[2 * i], fixed[2 * i + 1] = value.real, value.imag
        out: dict = {}
        for k, c in self.terms.items():
            rest = []
            for s, e in k:
                if s in fixed:
                    c = c * fixed[s] ** e
                else:
                    rest.append((s, e))
            rest = tuple(rest)
            out[rest] = out.get(rest, 0) + c
        return self._like(out)

    # -- conversions ----------------------------------------------------
    def to_real(self, max_terms: int = MAX_TERMS) -> "SparsePolynomial":
        """Rewrite over ``Re v, Im v`` using ``v = a + ib`` and ``conj(v) = a - ib``."""
        if self.basis == "real":
            return self
        estimate = sum(math.prod(e + 1 for _, e in k) for k in self.terms)
        if estimate > max_terms:
            raise PolynomialSizeError(f"real expansion needs about {estimate} terms (budget {max_terms})")
        out: dict = {}
        for k, c in self.terms.items():
            partial = {(): c}
            for s, e in k:
                a, b = s & ~1, s | 1
                sign = -1 if s & 1 else 1
                factor = {}
                for j in range(e + 1):
                    key = tuple(p for p in ((a, e - j), (b, j)) if p[1])
                    factor[key] = math.comb(e, j) * (sign * 1j) ** j
                nxt: dict = {}
                for k1, c1 in partial.items():
                    for k2, c2 in factor.items():
                        key = _mul_keys(k1, k2)
                        nxt[key] = nxt.get(key, 0) + c1 * c2
                partial = nxt
            for key, v in partial.items():
                out[key] = out.get(key, 0) + v
        return SparsePolynomial(self.registry, out, "real")

    def slot_name(self, slot: int) -> str:
        name = self.registry.variables[slot // 2].name
        if self.basis == "complex":
            return name + "*" if slot & 1 else name
        return f"im({name})" if slot & 1 else f"re({name})"

    def dump(self) -> str:
        """One term per line, ``coeff_re coeff_im var:exp ...``, in canonical order."""
        lines = []
        for k in sorted(self.terms):
            c = self.terms[k]
            mono = " ".join(f"{self.slot_name(s)}:{e}" for s, e in k)
            lines.append(f"{c.real:.17g} {c.imag:.17g}" + (f" {mono}" if mono else ""))
        return "\n".join(lines) + ("\n" if lines else "")


class ModulusSquared:
    """``p = q * conj(q)`` for a complex-basis polynomial ``q``, held in factored form.

    The expanded form has one term per ordered pair of terms of ``q``. No two
    pairs collide, because ``q`` only contains ``conj`` slots for ``y``
    variables. Degrees are therefore exactly twice those of ``q``.
    """

    def __init__(self, q: SparsePolynomial):
        if q.basis != "complex":
            raise ValueError("ModulusSquared expects a complex-basis polynomial")
        self.q = q
        self.registry = q.registry

    def __len__(self):
        return len(self.q) ** 2

    def __repr__(self):
        return f"ModulusSquared({len(self.q)}^2 terms)"

    def evaluate(self, assignment: Mapping) -> float:
        return abs(self.q.evaluate(assignment)) ** 2

    def degree_report(self) -> dict:
        return {g: 2 * v for g, v in self.q.degree_report().items()}

    def variables(self) -> set:
        return self.q.variables()

    def expand(self, max_terms: int = MAX_TERMS) -> SparsePolynomial:
        if len(self) > max_terms:
            raise PolynomialSizeError(f"|q|^2 has {len(self)} terms (budget {max_terms})")
        return self.q * self.q.conj()

    def dump(self, max_terms: int = MAX_TERMS) -> str:
        return self.expand(max_terms).dump()


# -- circuit polynomials ------------------------------------------------------

def _checked(arch: CircuitArchitecture):
    problems = validate_architecture(arch)
    if problems:
        raise ValidationError("invalid architecture: " + "; ".join(map(str, problems)))


def _guard(arch: CircuitArchitecture, extra: int, max_terms: int):
    count = arch.d ** (2 * arch.size) * extra
    if count > max_terms:
        raise PolynomialSizeError(
            f"symbolic amplitude would have {count} terms (size={arch.size}, n={arch.n}, d={arch.d}); "
            f"budget is {max_terms}"
        )


def _propagate(arch: CircuitArchitecture, reg: VariableRegistry) -> dict:
    """Amplitudes of ``U_N^dag |x>`` as ``{basis digits: terms}``."""
    n, d = arch.n, arch.d
    xslot = [[reg.slot(Variable("x", i, j)) for j in range(d)] for i in range(n)]
    state = {s: {tuple((xslot[i][s[i]], 1) for i in range(n)): 1.0}
             for s in itertools.product(range(d), repeat=n)}
    order = list(enumerate(arch.placements))
    # U_N^dag = L_1^dag ... L_delta^dag, so the last layer acts first.
    order.sort(key=lambda t: -t[1].layer)
    for g, p in order:
        a, b = p.qudits
        new = {}
        for s in state:
            r = s[a] * d + s[b]
            acc: dict = {}
            for c in range(d * d):
                src = list(s)
                src[a], src[b] = divmod(c, d)
                w = (reg.slot(Variable("gate", g, r, c)), 1)
                for k, coef in state[tuple(src)].items():
                    key = tuple(sorted(k + (w,)))
                    acc[key] = acc.get(key, 0) + coef
            new[s] = acc
        state = new
    return state


def _digits(z, n: int, d: int) -> tuple:
    if isinstance(z, str):
        z = tuple(int(c) for c in z)
    if isinstance(z, (int, np.integer)):
        if not 0 <= z < d ** n:
            raise ValueError(f"basis index {z} out of range")
        return tuple(int(v) for v in np.unravel_index(int(z), (d,) * n))
    z = tuple(z)
    if len(z) != n or any(not 0 <= v < d for v in z):
        raise ValueError(f"bad basis label {z!r}")
    return z


def amplitude_polynomial(arch: CircuitArchitecture, z=0, max_terms: int = MAX_TERMS) -> SparsePolynomial:
    """``q^z(w, x) = <z| U_N^dag |x>`` over gate-adjoint entries ``w`` and measurement amplitudes ``x``.

    Substituting :func:`gate_assignment` and :func:`vector_assignment` gives
    ``conj(<x| U_N |z>)``, so ``|q^z|^2 = |<x|U_N|z>|^2``.
    """
    _checked(arch)
    _guard(arch, 1, max_terms)
    reg = VariableRegistry.for_architecture(arch)
    return SparsePolynomial(reg, _propagate(arch, reg)[_digits(z, arch.n, arch.d)])


def probability_polynomial(arch: CircuitArchitecture, z=0, max_terms: int = MAX_TERMS) -> ModulusSquared:
    """``p_N = |q^z|^2``, the probability of measuring ``x`` on ``U_N |z>``."""
    return ModulusSquared(amplitude_polynomial(arch, z, max_terms))


def variable_input_amplitude(arch: CircuitArchitecture, max_terms: int = MAX_TERMS) -> SparsePolynomial:
    """``q'(w, x, y) = sum_z conj(y_z) q^z(w, x)`` with ``y_z`` the product of the local ``y`` amplitudes."""
    _checked(arch)
    n, d = arch.n, arch.d
    _guard(arch, d ** n, max_terms)
    reg = VariableRegistry.for_architecture(arch, input_vars=True)
    out: dict = {}
    for z, terms in _propagate(arch, reg).items():
        ybar = tuple((reg.slot(Variable("y", i, z[i]), 1), 1) for i in range(n))
        for k, c in terms.items():
            key = tuple(sorted(k + ybar))
            out[key] = out.get(key, 0) + c
    return SparsePolynomial(reg, out)


def variable_input_polynomial(arch: CircuitArchitecture, max_terms: int = MAX_TERMS) -> ModulusSquared:
    """``p'_N(w, x, y) = |q'|^2 = |<x|U_N|y>|^2``."""
    return ModulusSquared(variable_input_amplitude(arch, max_terms))


def degree_report(p) -> dict:
    return p.degree_report()


def evaluate(p, assignment: Mapping):
    return p.evaluate(assignment)


# -- assignments --------------------------------------------------------------

def gate_assignment(circ: Circuit) -> dict:
    """Gate variables ``w{g}[r,c] = conj(U_g[c, r])``, ``g`` counting placements in order."""
    if circ.mode != "unitary":
        raise ValidationError("gate assignments are defined for unitary circuits")
    out = {}
    for g, U in enumerate(circ.gates):
        W = U.conj().T
        D = W.shape[0]
        for r in range(D):
            for c in range(D):
                out[Variable("gate", g, r, c)] = W[r, c]
    return out


def matrix_assignment(matrices) -> dict:
    """Gate variables set directly to the given matrices, which stand in for the adjoints ``U_g^dag``."""
    out = {}
    for g, W in enumerate(matrices):
        W = np.asarray(W)
        for r in range(W.shape[0]):
            for c in range(W.shape[1]):
                out[Variable("gate", g, r, c)] = W[r, c]
    return out


def vector_assignment(spec, n: int, d: int, group: str = "x") -> dict:
    """Local amplitudes of a product vector (basis label or ``(n, d)`` local vectors)."""
    if spec is None or isinstance(spec, (int, np.integer, str)):
        locs = np.zeros((n, d), dtype=complex)
        for i, v in enumerate(_digits(0 if spec is None else spec, n, d)):
            locs[i, v] = 1.0
    else:
        locs = np.asarray(spec, dtype=complex)
        product_vector(locs, n, d)
    return {Variable(group, i, j): locs[i, j] for i in range(n) for j in range(d)}


def circuit_assignment(circ: Circuit, x, y=None) -> dict:
    out = gate_assignment(circ)
    out.update(vector_assignment(x, circ.n, circ.d, "x"))
    if y is not None:
        out.update(vector_assignment(y, circ.n, circ.d, "y"))
    return out
