"""States, effects, quantum operations and the Born rule for qudit registers.

Basis ordering: qudit 0 is the most significant digit of a base-``d`` index,
so ``|s_0 s_1 ... s_{n-1}>`` sits at index ``sum_i s_i * d**(n-1-i)``.
Channels are stored as Kraus families.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TOL = 1e-9


class DimensionError(ValueError):
    """Raised when operands act on spaces of different dimension."""


class ValidationError(ValueError):
    """Raised when an object violates its physical invariants."""


def as_generator(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _infer_n(D: int, d: int) -> int:
    n, size = 0, 1
    while size < D:
        size *= d
        n += 1
    if size != D:
        raise DimensionError(f"dimension {D} is not a power of d={d}")
    return n


@dataclass(frozen=True)
class PureState:
    """Unit vector in ``(C^d)^{tensor n}``."""

    amplitudes: np.ndarray
    n: int
    d: int = 2
    tol: float = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        amps = _frozen(self.amplitudes).reshape(-1)
        object.__setattr__(self, "amplitudes", amps)
        if amps.size != self.d ** self.n:
            raise DimensionError(f"expected {self.d ** self.n} amplitudes, got {amps.size}")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > self.tol:
            raise ValidationError(f"state is not normalized: |psi|^2 = {norm!r}")

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()), self.n, self.d)


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite matrix with trace one.

    With ``subnormalized=True`` the trace may be anywhere in ``[0, 1]``, which
    is what trace-non-increasing operations produce.
    """

    matrix: np.ndarray
    n: int
    d: int = 2
    subnormalized: bool = False
    tol: float = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        object.__setattr__(self, "matrix", m)
        D = self.d ** self.n
        if m.shape != (D, D):
            raise DimensionError(f"expected a {D}x{D} matrix, got shape {m.shape}")
        if np.abs(m - m.conj().T).max() > self.tol:
            raise ValidationError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(m).min() < -self.tol:
            raise ValidationError("density matrix has a negative eigenvalue")
        tr = float(np.trace(m).real)
        if tr > 1 + self.tol or (not self.subnormalized and tr < 1 - self.tol):
            raise ValidationError(f"invalid trace {tr!r}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)


@dataclass(frozen=True)
class Effect:
    """Measurement effect, ``0 <= E <= 1``."""

    matrix: np.ndarray
    tol: float = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"effect must be square, got shape {m.shape}")
        if np.abs(m - m.conj().T).max() > self.tol:
            raise ValidationError("effect is not Hermitian")
        ev = np.linalg.eigvalsh(m)
        if ev.min() < -self.tol or ev.max() > 1 + self.tol:
            raise ValidationError("effect eigenvalues must lie in [0, 1]")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def projector(cls, vector) -> "Effect":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()))


@dataclass(frozen=True)
class QuantumOperation:
    """Completely positive, trace-non-increasing map given by Kraus operators.

    ``channel=True`` additionally asserts ``sum_k K_k^dag K_k = 1``.
    """

    kraus: tuple
    channel: bool = False
    tol: float = field(default=TOL, repr=False, compare=False)

    def __post_init__(self):
        ks = tuple(_frozen(k) for k in self.kraus)
        if not ks:
            raise ValidationError("a quantum operation needs at least one Kraus operator")
        D = ks[0].shape[0]
        for k in ks:
            if k.shape != (D, D):
                raise DimensionError("Kraus operators must all be DxD with the same D")
        object.__setattr__(self, "kraus", ks)
        gram = self.gram()
        ev = np.linalg.eigvalsh(gram)
        if ev.max() > 1 + self.tol:
            raise ValidationError("operation increases trace: sum K^dag K > 1")
        if self.channel and np.abs(gram - np.eye(D)).max() > self.tol:
            raise ValidationError("operation flagged as channel is not trace preserving")

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def gram(self) -> np.ndarray:
        return sum(k.conj().T @ k for k in self.kraus)

    def is_trace_preserving(self, tol: float = TOL) -> bool:
        return bool(np.abs(self.gram() - np.eye(self.dim)).max() <= tol)

    @classmethod
    def unitary(cls, U) -> "QuantumOperation":
        return cls((U,), channel=True)


def basis_state(index, n: int, d: int = 2) -> PureState:
    """Computational basis state from an integer index or a digit sequence."""
    if not isinstance(index, (int, np.integer)):
        digits = [int(c) for c in index]
        if len(digits) != n or any(not 0 <= c < d for c in digits):
            raise DimensionError(f"bad basis label {index!r} for n={n}, d={d}")
        index = int(np.ravel_multi_index(digits, (d,) * n)) if n else 0
    amps = np.zeros(d ** n, dtype=complex)
    amps[index] = 1.0
    return PureState(amps, n, d)


def product_state(locals_: Sequence, tol: float = TOL) -> PureState:
    """Tensor product of single-qudit unit vectors (qudit 0 first)."""
    vecs = [np.asarray(v, dtype=complex).reshape(-1) for v in locals_]
    if not vecs:
        raise DimensionError("need at least one local vector")
    d = vecs[0].size
    out = np.ones(1, dtype=complex)
    for i, v in enumerate(vecs):
        if v.size != d:
            raise DimensionError("all local vectors must have the same dimension")
        norm = float(np.vdot(v, v).real)
        if abs(norm - 1.0) > tol:
            raise ValidationError(f"local vector {i} is not normalized (|v|^2 = {norm!r})")
        out = np.kron(out, v)
    return PureState(out, len(vecs), d, tol=max(tol, 10 * len(vecs) * tol))


def born_probability(state, effect, tol: float = TOL) -> float:
    """``tr[rho E]``, clamped to ``[0, 1]`` when it strays by at most ``tol``."""
    E = effect.matrix if isinstance(effect, Effect) else np.asarray(effect, dtype=complex)
    if isinstance(state, PureState):
        if E.shape != (state.dim, state.dim):
            raise DimensionError(f"state dim {state.dim} does not match effect shape {E.shape}")
        p = float(np.vdot(state.amplitudes, E @ state.amplitudes).real)
    else:
        rho = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)
        if E.shape != rho.shape:
            raise DimensionError(f"state shape {rho.shape} does not match effect shape {E.shape}")
        p = float(np.einsum("ij,ji->", rho, E).real)
    if -tol <= p < 0:
        return 0.0
    if 1 < p <= 1 + tol:
        return 1.0
    return p


def haar_random_unitary(D: int, seed=None) -> np.ndarray:
    """Haar-distributed ``D x D`` unitary (QR of a Ginibre matrix, phases fixed)."""
    rng = as_generator(seed)
    z = (rng.standard_normal((D, D)) + 1j * rng.standard_normal((D, D))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def haar_random_state(D: int, seed=None) -> np.ndarray:
    rng = as_generator(seed)
    v = rng.standard_normal(D) + 1j * rng.standard_normal(D)
    return v / np.linalg.norm(v)


def random_density_matrix(n: int, d: int = 2, rank: int | None = None, seed=None) -> DensityMatrix:
    rng = as_generator(seed)
    D = d ** n
    rank = D if rank is None else rank
    g = rng.standard_normal((D, rank)) + 1j * rng.standard_normal((D, rank))
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real, n, d)


def random_effect(D: int, seed=None) -> Effect:
    rng = as_generator(seed)
    U = haar_random_unitary(D, rng)
    return Effect((U * rng.uniform(0, 1, D)) @ U.conj().T)


def random_channel(D: int, n_kraus: int = 2, seed=None) -> QuantumOperation:
    """Random channel from a Haar isometry ``C^D -> C^{n_kraus D}``."""
    V = haar_random_unitary(n_kraus * D, seed)[:, :D]
    return QuantumOperation(tuple(V[k * D:(k + 1) * D] for k in range(n_kraus)), channel=True)


def depolarizing_channel(p: float, D: int = 2) -> QuantumOperation:
    """``rho -> (1-p) rho + p tr[rho] 1/D`` via the generalized Pauli (Weyl) basis."""
    if not 0 <= p <= 1:
        raise ValidationError("depolarizing parameter must lie in [0, 1]")
    omega = np.exp(2j * np.pi / D)
    X = np.roll(np.eye(D), 1, axis=0)
    Z = np.diag(omega ** np.arange(D))
    weyl = [np.linalg.matrix_power(X, a) @ np.linalg.matrix_power(Z, b) for a in range(D) for b in range(D)]
    w0 = np.sqrt(1 - p + p / D ** 2)
    wk = np.sqrt(p) / D
    return QuantumOperation(tuple([w0 * weyl[0]] + [wk * W for W in weyl[1:]]), channel=True)


def apply_operation(op: QuantumOperation, rho, d: int = 2) -> DensityMatrix:
    """``sum_k K_k rho K_k^dag``; the result may be sub-normalized."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (op.dim, op.dim):
        raise DimensionError(f"operation dim {op.dim} does not match state shape {m.shape}")
    out = sum(k @ m @ k.conj().T for k in op.kraus)
    if isinstance(rho, DensityMatrix):
        n, d = rho.n, rho.d
    else:
        n = _infer_n(op.dim, d)
    return DensityMatrix(out, n, d, subnormalized=True)


def maximally_entangled(D: int) -> np.ndarray:
    """``|Omega> = D^{-1/2} sum_i |i>|i>`` on ``C^D (x) C^D``."""
    return np.eye(D, dtype=complex).reshape(-1) / np.sqrt(D)


def choi_state(op: QuantumOperation, n: int | None = None, d: int = 2) -> DensityMatrix:
    """Choi-Jamiolkowski state ``(T (x) Id)(|Omega><Omega|)``.

    With this normalization ``tr[E T(rho)] = D tr[tau (E (x) rho^T)]``, with
    ``D = d**n`` the input dimension (``2**n`` for qubits).
    """
    if not op.is_trace_preserving(op.tol):
        raise ValidationError("Choi state is only defined here for trace-preserving operations")
    D = op.dim
    n = _infer_n(D, d) if n is None else n
    omega = np.outer(maximally_entangled(D), maximally_entangled(D).conj())
    tau = np.zeros((D * D, D * D), dtype=complex)
    for k in op.kraus:
        K = np.kron(k, np.eye(D))
        tau += K @ omega @ K.conj().T
    return DensityMatrix(tau, 2 * n, d)
