"""Realizable learning of 2-local circuits from measurement statistics.

A training example is ``((x, y), p)`` with ``p = f_target(x, y)``. The learner
does empirical risk minimization over a fixed size and depth: it enumerates
architectures and, for each, runs multi-restart L-BFGS over a Hermitian
exponential parameterization of the gates, with gradients by central
differences. Success means every training error is within ``alpha``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from .bounds import sample_complexity
from .circuit import (
    Circuit,
    CircuitArchitecture,
    _apply_pair,
    enumerate_architectures,
    identity_circuit,
    random_circuit,
    validate_architecture,
)
from .core import DimensionError, QuantumOperation, as_generator, haar_random_state


# -- data ----------------------------------------------------------------------

@dataclass(frozen=True)
class TrainingExample:
    """``x`` and ``y`` are ``(n, d)`` arrays of local vectors; ``p = f(x, y)``."""

    x: np.ndarray
    y: np.ndarray
    p: float

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        return _kron_rows(self.x), _kron_rows(self.y)


def _kron_rows(locs: np.ndarray) -> np.ndarray:
    v = np.ones(1, dtype=complex)
    for row in locs:
        v = np.kron(v, row)
    return v


def _basis_locals(index: int, n: int, d: int) -> np.ndarray:
    out = np.zeros((n, d), dtype=complex)
    out[np.arange(n), np.unravel_index(index, (d,) * n)] = 1.0
    return out


@dataclass(frozen=True)
class Distribution:
    """Distribution of ``(x, y)``.

    ``basis``: uniform over basis pairs. ``diagonal``: uniform basis ``x = y``.
    ``support``: uniform over the listed ``(x, y)`` basis-index pairs.
    ``haar_product``: independent Haar-random local vectors (no exhaustive mode).
    """

    kind: str = "basis"
    support: tuple = ()

    KINDS = ("basis", "diagonal", "support", "haar_product")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown distribution {self.kind!r}; expected one of {self.KINDS}")
        if self.kind == "support":
            if not self.support:
                raise ValueError("support distribution needs a non-empty support")
            object.__setattr__(self, "support", tuple((int(a), int(b)) for a, b in self.support))

    @classmethod
    def parse(cls, spec) -> "Distribution":
        if isinstance(spec, Distribution):
            return spec
        if spec is None:
            return cls()
        if isinstance(spec, str):
            return cls(spec)
        if isinstance(spec, dict):
            unknown = set(spec) - {"kind", "support"}
            if unknown:
                raise ValueError(f"unknown distribution field(s): {sorted(unknown)}")
            return cls(spec.get("kind", "basis"), tuple(map(tuple, spec.get("support", ()))))
        raise ValueError(f"cannot interpret distribution spec {spec!r}")

    @property
    def finite(self) -> bool:
        return self.kind != "haar_product"

    def pairs(self, D: int) -> np.ndarray:
        """All basis pairs of a finite distribution, each with equal weight."""
        if self.kind == "basis":
            return np.array([(x, y) for x in range(D) for y in range(D)])
        if self.kind == "diagonal":
            return np.array([(x, x) for x in range(D)])
        if self.kind == "support":
            arr = np.array(self.support)
            if arr.min() < 0 or arr.max() >= D:
                raise DimensionError(f"support index out of range for dimension {D}")
            return arr
        raise ValueError("haar_product has no finite support")

    def sample(self, n: int, d: int, m: int, rng) -> tuple[np.ndarray, np.ndarray]:
        """``(m, n, d)`` arrays of local vectors for x and y."""
        D = d**n
        if self.finite:
            pairs = self.pairs(D)
            pick = pairs[rng.integers(len(pairs), size=m)]
            xs = np.array([_basis_locals(int(a), n, d) for a in pick[:, 0]])
            ys = np.array([_basis_locals(int(b), n, d) for b in pick[:, 1]])
            return xs, ys
        xs = np.array([[haar_random_state(d, rng) for _ in range(n)] for _ in range(m)])
        ys = np.array([[haar_random_state(d, rng) for _ in range(n)] for _ in range(m)])
        return xs, ys


# -- fast forward model --------------------------------------------------------

def _lift_index(pair: tuple, n: int, d: int) -> tuple[np.ndarray, np.ndarray]:
    """Gather indices and mask with ``lift(G)[i, j] = G[loc[i], loc[j]] * mask[i, j]``."""
    digits = np.array(np.unravel_index(np.arange(d**n), (d,) * n)).T
    a, b = pair
    loc = digits[:, a] * d + digits[:, b]
    rest = np.delete(digits, [a, b], axis=1)
    mask = np.all(rest[:, None, :] == rest[None, :, :], axis=-1)
    return loc, mask


def _lift(mat: np.ndarray, pair: tuple, n: int, d: int) -> np.ndarray:
    """Dense ``d^n x d^n`` matrix of a two-qudit gate (works on stacked gates too)."""
    loc, mask = _lift_index(pair, n, d)
    return mat[..., loc[:, None], loc[None, :]] * mask


def _unitary_probs(U: np.ndarray, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """``|<x_m|U|y_m>|^2``; a stack ``U`` of shape ``(B, D, D)`` gives ``(B, m)``."""
    amp = np.einsum("...me,me->...m", X.conj() @ U, Y)
    return amp.real**2 + amp.imag**2


def _operation_probs(kraus_lists, pairs, n, d, X, Y) -> np.ndarray:
    m, D = Y.shape
    t = (Y[:, :, None] * Y.conj()[:, None, :]).reshape((m,) + (d,) * (2 * n))
    for (a, b), ks in zip(pairs, kraus_lists):
        acc = None
        for K in ks:
            s = _apply_pair(t, K, (1 + a, 1 + b), d)
            s = _apply_pair(s, K.conj(), (1 + n + a, 1 + n + b), d)
            acc = s if acc is None else acc + s
        t = acc
    rho = t.reshape(m, D, D)
    return np.einsum("md,mde,me->m", X.conj(), rho, X).real


# -- parameterizations ---------------------------------------------------------

@dataclass(frozen=True)
class GateParameterization:
    """``d^4`` reals -> Hermitian ``H`` -> ``exp(iH)``.

    The first ``d^2`` entries fill the diagonal, the rest are (re, im) pairs
    of the strict upper triangle in row-major order.
    """

    d: int = 2

    @property
    def dim(self) -> int:
        return self.d**2

    @property
    def n_params(self) -> int:
        return self.d**4

    def hermitian(self, h: np.ndarray) -> np.ndarray:
        """Leading axes of ``h`` are kept, so a ``(B, d^4)`` stack gives ``(B, d^2, d^2)``."""
        D = self.dim
        h = np.asarray(h, dtype=float)
        if h.shape[-1:] != (self.n_params,):
            raise DimensionError(f"expected {self.n_params} parameters, got {h.shape}")
        H = np.zeros(h.shape[:-1] + (D, D), dtype=complex)
        idx = np.arange(D)
        H[..., idx, idx] = h[..., :D]
        iu = np.triu_indices(D, 1)
        off = h[..., D:].reshape(h.shape[:-1] + (-1, 2))
        H[..., iu[0], iu[1]] = off[..., 0] + 1j * off[..., 1]
        H[..., iu[1], iu[0]] = off[..., 0] - 1j * off[..., 1]
        return H

    def matrix(self, h: np.ndarray) -> np.ndarray:
        lam, V = np.linalg.eigh(self.hermitian(h))
        return (V * np.exp(1j * lam)[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)

    def gate(self, h: np.ndarray):
        return self.matrix(h)

    def random(self, rng, scale: float = math.pi) -> np.ndarray:
        return rng.uniform(-scale, scale, size=self.n_params)


@dataclass(frozen=True)
class KrausParameterization:
    """Stacked ``(r D) x D`` complex matrix retracted to an isometry by polar decomposition."""

    d: int = 2
    n_kraus: int = 2

    @property
    def dim(self) -> int:
        return self.d**2

    @property
    def n_params(self) -> int:
        return 2 * self.n_kraus * self.dim**2

    def isometry(self, h: np.ndarray) -> np.ndarray:
        D, r = self.dim, self.n_kraus
        h = np.asarray(h, dtype=float)
        if h.shape[-1:] != (self.n_params,):
            raise DimensionError(f"expected {self.n_params} parameters, got {h.shape}")
        A = (h[..., : r * D * D] + 1j * h[..., r * D * D:]).reshape(h.shape[:-1] + (r * D, D))
        u, _, vh = np.linalg.svd(A, full_matrices=False)
        return u @ vh

    def kraus(self, h: np.ndarray) -> np.ndarray:
        """Kraus operators stacked along the axis before the last two."""
        W = self.isometry(h)
        return W.reshape(W.shape[:-2] + (self.n_kraus, self.dim, self.dim))

    def gate(self, h: np.ndarray):
        return QuantumOperation(tuple(self.kraus(h)), channel=True)

    def random(self, rng, scale: float = 1.0) -> np.ndarray:
        return rng.normal(scale=scale, size=self.n_params)


# -- configuration -------------------------------------------------------------

@dataclass
class LearningConfig:
    """Everything a learning run needs; loadable from a JSON object with these keys."""

    Gamma: int = 2
    Delta: int = 2
    d: int = 2
    n: int = 3
    alpha: float = 0.05
    beta: float = 0.2
    eps: float = 0.1
    confidence: float = 0.05
    restarts: int = 50
    iterations: int = 400
    seed: int = 0
    distribution: object = "basis"
    mode: str = "unitary"
    n_kraus: int = 2
    exact_size: bool = True
    target: str = "random"
    n_test: int = 2000
    fd_step: float = 1e-6
    m_grid: list = field(default_factory=lambda: [25, 50, 100, 200])
    seeds: list = field(default_factory=lambda: [0])

    def __post_init__(self):
        self.validate()

    def validate(self):
        for name in ("Gamma", "Delta", "d", "n", "restarts", "iterations", "n_test", "n_kraus"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if self.d < 2 or self.n < 2:
            raise ValueError("need d >= 2 and n >= 2")
        if self.Delta > self.Gamma:
            raise ValueError(f"Delta={self.Delta} exceeds Gamma={self.Gamma}")
        if not 0 < self.alpha < self.beta < 1:
            raise ValueError(f"need 0 < alpha < beta < 1, got alpha={self.alpha}, beta={self.beta}")
        if not (0 < self.eps < 1 and 0 < self.confidence < 1):
            raise ValueError("eps and confidence must lie in (0, 1)")
        if self.mode not in ("unitary", "operation"):
            raise ValueError(f"mode must be 'unitary' or 'operation', got {self.mode!r}")
        if self.target not in ("random", "identity"):
            raise ValueError(f"target must be 'random' or 'identity', got {self.target!r}")
        if self.fd_step <= 0:
            raise ValueError("fd_step must be positive")
        self.m_grid = [int(m) for m in self.m_grid]
        self.seeds = [int(s) for s in self.seeds]
        if not self.m_grid or min(self.m_grid) < 1:
            raise ValueError("m_grid must be a non-empty list of positive integers")
        if not self.seeds:
            raise ValueError("seeds must be non-empty")
        Distribution.parse(self.distribution)

    @property
    def dist(self) -> Distribution:
        return Distribution.parse(self.distribution)

    @classmethod
    def from_dict(cls, obj: dict) -> "LearningConfig":
        if not isinstance(obj, dict):
            raise ValueError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ValueError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**obj)

    @classmethod
    def load(cls, path) -> "LearningConfig":
        text = Path(path).read_text()
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValueError(f"line {exc.lineno}: {exc.msg}") from None
        return cls.from_dict(obj)

    def to_dict(self) -> dict:
        return asdict(self)


# -- datasets ------------------------------------------------------------------

def _probabilities(circ: Circuit, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    n, d = circ.n, circ.d
    pairs = [p.qudits for p in circ.architecture.placements]
    if circ.mode == "unitary":
        U = np.eye(d**n, dtype=complex)
        for pair, g in zip(pairs, circ.gates):
            U = _lift(g, pair, n, d) @ U
        p = _unitary_probs(U, X, Y)
    else:
        p = _operation_probs([g.kraus for g in circ.gates], pairs, n, d, X, Y)
    return np.clip(p, 0.0, 1.0)


def generate_dataset(target: Circuit, dist="basis", m: int = 100, seed=None) -> list[TrainingExample]:
    """``m`` i.i.d. examples labelled exactly by the target circuit."""
    if m < 1:
        raise ValueError("m must be at least 1")
    dist = Distribution.parse(dist)
    rng = as_generator(seed)
    xs, ys = dist.sample(target.n, target.d, m, rng)
    X = np.array([_kron_rows(x) for x in xs])
    Y = np.array([_kron_rows(y) for y in ys])
    ps = _probabilities(target, X, Y)
    return [TrainingExample(x, y, float(p)) for x, y, p in zip(xs, ys, ps)]


def _stack(data: Sequence[TrainingExample]):
    X = np.array([_kron_rows(e.x) for e in data])
    Y = np.array([_kron_rows(e.y) for e in data])
    P = np.array([e.p for e in data])
    return X, Y, P


# -- fitting -------------------------------------------------------------------

def central_difference_gradient(fun: Callable, x: np.ndarray, step: float = 1e-6,
                                batched: bool = False) -> np.ndarray:
    """``(f(x + h e_i) - f(x - h e_i)) / 2h`` for every coordinate.

    With ``batched=True``, ``fun`` maps a ``(B, P)`` stack of points to ``B``
    values and all ``2P`` evaluations happen in one call.
    """
    x = np.asarray(x, dtype=float)
    if batched:
        E = step * np.eye(x.size)
        vals = np.asarray(fun(np.vstack([x + E, x - E])), dtype=float)
        return (vals[: x.size] - vals[x.size:]) / (2 * step)
    g = np.empty_like(x)
    e = np.zeros_like(x)
    for i in range(x.size):
        e[i] = step
        g[i] = (fun(x + e) - fun(x - e)) / (2 * step)
        e[i] = 0.0
    return g


class _Model:
    """Predictions of one architecture as a function of stacked flat parameter vectors."""

    def __init__(self, arch: CircuitArchitecture, mode: str, n_kraus: int, X, Y):
        self.arch = arch
        self.mode = mode
        n, d = arch.n, arch.d
        self.lifts = [_lift_index(p.qudits, n, d) for p in arch.placements]
        self.param = GateParameterization(d) if mode == "unitary" else KrausParameterization(d, n_kraus)
        self.k = self.param.n_params
        self.size = self.k * arch.size
        # repeated examples only need one evaluation
        XY, self.inverse = np.unique(np.hstack([X, Y]), axis=0, return_inverse=True)
        self.inverse = self.inverse.ravel()
        D = d**n
        self.X, self.Y = XY[:, :D], XY[:, D:]
        self.evals = 0

    def predict(self, thetas) -> np.ndarray:
        """``(B, P)`` parameters -> ``(B, m)`` probabilities (1-D in, 1-D out)."""
        thetas = np.asarray(thetas, dtype=float)
        single = thetas.ndim == 1
        thetas = np.atleast_2d(thetas)
        B = thetas.shape[0]
        self.evals += B
        D = self.arch.d**self.arch.n
        if self.mode == "unitary":
            U = np.broadcast_to(np.eye(D, dtype=complex), (B, D, D))
            for g, (loc, mask) in enumerate(self.lifts):
                G = self.param.matrix(thetas[:, g * self.k:(g + 1) * self.k])
                U = (G[:, loc[:, None], loc[None, :]] * mask) @ U
            out = _unitary_probs(U, self.X, self.Y)
        else:
            rho = np.broadcast_to(self.Y[:, :, None] * self.Y.conj()[:, None, :], (B,) + (len(self.Y), D, D))
            for g, (loc, mask) in enumerate(self.lifts):
                K = self.param.kraus(thetas[:, g * self.k:(g + 1) * self.k])
                L = K[..., loc[:, None], loc[None, :]] * mask
                rho = np.einsum("bkde,bmef,bkgf->bmdg", L, rho, L.conj())
            out = np.einsum("md,bmde,me->bm", self.X.conj(), rho, self.X).real
        out = out[:, self.inverse]
        return out[0] if single else out

    def circuit(self, theta) -> Circuit:
        gates = [self.param.gate(theta[i * self.k:(i + 1) * self.k]) for i in range(self.arch.size)]
        return Circuit(self.arch, tuple(gates), self.mode)


@dataclass
class FitResult:
    hypothesis: Circuit
    params: np.ndarray
    train_error: float
    success: bool
    restarts_used: int
    evaluations: int
    history: list = field(default_factory=list)

    @property
    def architecture(self) -> CircuitArchitecture:
        return self.hypothesis.architecture


def candidate_architectures(config: LearningConfig) -> list[CircuitArchitecture]:
    """Architectures searched by ERM: exactly (Gamma, Delta), or every smaller pair if not exact."""
    shapes = [(config.Gamma, config.Delta)]
    if not config.exact_size:
        shapes = [(g, dl) for g in range(1, config.Gamma + 1) for dl in range(1, min(g, config.Delta) + 1)]
    out = []
    for g, dl in shapes:
        try:
            out.extend(enumerate_architectures(config.n, config.d, dl, g))
        except ValueError:
            continue
    if not out:
        raise ValueError(f"no valid architecture with size {config.Gamma} and depth {config.Delta} on {config.n} qudits")
    return out


def _descend(model: _Model, theta0, P, config: LearningConfig):
    step = config.fd_step

    def mse(t):
        r = model.predict(t) - P
        return np.mean(r * r, axis=-1)

    res = optimize.minimize(lambda t: float(mse(t)), theta0,
                            jac=lambda t: central_difference_gradient(mse, t, step, batched=True),
                            method="L-BFGS-B", options={"maxiter": config.iterations, "ftol": 1e-16, "gtol": 1e-10})
    theta = res.x
    err = float(np.abs(model.predict(theta) - P).max())
    if config.alpha < err < 4 * config.alpha:
        # smooth maximum of the residuals, sharpened towards the max-error loss
        scale = 50.0 / max(err, 1e-12)

        def softmax(t):
            r = np.abs(model.predict(t) - P) * scale
            top = r.max(axis=-1, keepdims=True)
            return (top[..., 0] + np.log(np.exp(r - top).sum(axis=-1))) / scale

        res2 = optimize.minimize(lambda t: float(softmax(t)), theta,
                                 jac=lambda t: central_difference_gradient(softmax, t, step, batched=True),
                                 method="L-BFGS-B", options={"maxiter": config.iterations})
        err2 = float(np.abs(model.predict(res2.x) - P).max())
        if err2 < err:
            theta, err = res2.x, err2
    return theta, err


def erm_fit(data: Sequence[TrainingExample], config: LearningConfig, seed=None) -> FitResult:
    """Fit a hypothesis circuit with training error at most ``alpha`` if the budget allows.

    Restarts cycle over the candidate architectures; the search stops at the
    first restart that reaches the margin. The best hypothesis is returned
    either way, with ``success`` telling which case occurred.
    """
    if len(data) == 0:
        raise ValueError("cannot fit an empty dataset")
    X, Y, P = _stack(data)
    if X.shape[1] != config.d**config.n:
        raise DimensionError(f"data live in dimension {X.shape[1]}, config expects {config.d ** config.n}")
    rng = as_generator(config.seed if seed is None else seed)
    archs = candidate_architectures(config)
    order = rng.permutation(len(archs))
    models = {}
    best = None
    history = []
    evals = 0
    for r in range(config.restarts):
        a = int(order[r % len(archs)])
        if a not in models:
            models[a] = _Model(archs[a], config.mode, config.n_kraus, X, Y)
        model = models[a]
        theta0 = np.concatenate([model.param.random(rng) for _ in range(archs[a].size)])
        before = model.evals
        theta, err = _descend(model, theta0, P, config)
        evals += model.evals - before
        history.append((r, str(archs[a]), err))
        if best is None or err < best[2]:
            best = (a, theta, err)
        if err <= config.alpha:
            break
    a, theta, err = best
    hyp = models[a].circuit(theta)
    # replay through the public simulator path to report the certified error
    replay = float(np.abs(_probabilities(hyp, X, Y) - P).max())
    return FitResult(hyp, theta, replay, replay <= config.alpha, len(history), evals, history)


# -- evaluation ----------------------------------------------------------------

@dataclass(frozen=True)
class ErrorEstimate:
    """Estimated ``P[|f_hyp - f_target| > beta]`` with a Clopper-Pearson interval."""

    value: float
    lower: float
    upper: float
    samples: int
    mode: str


def clopper_pearson(k: int, n: int, level: float = 0.95) -> tuple[float, float]:
    a = 1 - level
    lo = 0.0 if k == 0 else float(stats.beta.ppf(a / 2, k, n - k + 1))
    hi = 1.0 if k == n else float(stats.beta.ppf(1 - a / 2, k + 1, n - k))
    return lo, hi


def _check_comparable(a: Circuit, b: Circuit):
    if (a.n, a.d) != (b.n, b.d):
        raise DimensionError(f"cannot compare circuits on (n={a.n}, d={a.d}) and (n={b.n}, d={b.d})")


def _basis_prob_matrix(circ: Circuit) -> np.ndarray:
    """``F[x, y] = f(x, y)`` for all basis pairs."""
    D = circ.dim
    I = np.eye(D, dtype=complex)
    if circ.mode == "unitary":
        U = np.eye(D, dtype=complex)
        for p, g in circ.items():
            U = _lift(g, p.qudits, circ.n, circ.d) @ U
        return np.abs(U) ** 2
    pairs = [p.qudits for p in circ.architecture.placements]
    out = np.empty((D, D))
    for y in range(D):
        Y = np.repeat(I[y][None], D, axis=0)
        out[:, y] = _operation_probs([g.kraus for g in circ.gates], pairs, circ.n, circ.d, I, Y)
    return out


def evaluate_hypothesis(hyp: Circuit, target: Circuit, dist="basis", beta: float = 0.2,
                        n_test: int = 2000, seed=None, mode: str = "auto", level: float = 0.95) -> ErrorEstimate:
    """Probability that hypothesis and target differ by more than ``beta``.

    ``mode="exhaustive"`` sums over the finite support exactly;
    ``"monte_carlo"`` draws ``n_test`` fresh pairs; ``"auto"`` prefers exact.
    """
    _check_comparable(hyp, target)
    dist = Distribution.parse(dist)
    if mode == "auto":
        mode = "exhaustive" if dist.finite else "monte_carlo"
    if mode == "exhaustive":
        if not dist.finite:
            raise ValueError("exhaustive evaluation needs a finite distribution")
        pairs = dist.pairs(hyp.dim)
        dev = np.abs(_basis_prob_matrix(hyp) - _basis_prob_matrix(target))[pairs[:, 0], pairs[:, 1]]
        v = float(np.mean(dev > beta))
        return ErrorEstimate(v, v, v, len(pairs), mode)
    if mode != "monte_carlo":
        raise ValueError(f"unknown evaluation mode {mode!r}")
    rng = as_generator(seed)
    xs, ys = dist.sample(hyp.n, hyp.d, n_test, rng)
    X = np.array([_kron_rows(x) for x in xs])
    Y = np.array([_kron_rows(y) for y in ys])
    k = int(np.sum(np.abs(_probabilities(hyp, X, Y) - _probabilities(target, X, Y)) > beta))
    lo, hi = clopper_pearson(k, n_test, level)
    return ErrorEstimate(k / n_test, lo, hi, n_test, mode)


# -- experiments ---------------------------------------------------------------

CSV_HEADER = ("m", "seed", "train_err", "test_err", "success", "predicted_m")


def make_target(config: LearningConfig, seed) -> Circuit:
    """The target for one trial: identity, or Haar gates on a random valid architecture."""
    rng = as_generator(seed)
    archs = enumerate_architectures(config.n, config.d, config.Delta, config.Gamma)
    arch = archs[int(rng.integers(len(archs)))]
    if config.target == "identity":
        return identity_circuit(arch) if config.mode == "unitary" else identity_circuit(arch).as_operation()
    return random_circuit(arch, rng, config.mode, config.n_kraus)


@dataclass
class ExperimentRow:
    m: int
    seed: int
    train_err: float
    test_err: float
    success: bool
    predicted_m: int

    def csv_fields(self) -> list[str]:
        return [str(self.m), str(self.seed), f"{self.train_err:.17g}", f"{self.test_err:.17g}",
                "true" if self.success else "false", str(self.predicted_m)]


def generalization_experiment(config: LearningConfig, m_grid: Sequence[int] | None = None,
                              seeds: Sequence[int] | None = None, inject_target: bool = False) -> list[ExperimentRow]:
    """Fit and evaluate for every ``(m, seed)``; datasets for one seed are nested prefixes.

    Grid and seeds default to the config's. ``inject_target`` skips fitting
    and uses the target itself, checking the plumbing.
    """
    grid = [int(m) for m in (config.m_grid if m_grid is None else m_grid)]
    if not grid or any(m < 1 for m in grid):
        raise ValueError("m_grid must be a non-empty list of positive integers")
    seeds = [int(s) for s in (config.seeds if seeds is None else seeds)]
    predicted = sample_complexity(config.Delta, config.Gamma, config.d, config.eps, config.confidence,
                                  config.alpha, config.beta)
    rows = []
    for s in seeds:
        t_seed, d_seed, e_seed = np.random.SeedSequence([int(s), 1]).spawn(3)
        target = make_target(config, np.random.default_rng(t_seed))
        data = generate_dataset(target, config.dist, max(grid), np.random.default_rng(d_seed))
        for m in grid:
            sub = data[:m]
            if inject_target:
                X, Y, P = _stack(sub)
                hyp = target
                train = float(np.abs(_probabilities(hyp, X, Y) - P).max())
                ok = train <= config.alpha
            else:
                fit = erm_fit(sub, config, seed=np.random.default_rng([int(s), 2, m]))
                hyp, train, ok = fit.hypothesis, fit.train_error, fit.success
            est = evaluate_hypothesis(hyp, target, config.dist, config.beta, config.n_test,
                                      np.random.default_rng(e_seed), level=1 - config.confidence)
            rows.append(ExperimentRow(m, int(s), train, est.value, ok, predicted))
    rows.sort(key=lambda r: (grid.index(r.m), seeds.index(r.seed)))
    return rows


def rows_to_csv(rows: Sequence[ExperimentRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_fields())
    return buf.getvalue()


def check_hypothesis_shape(hyp: Circuit, config: LearningConfig) -> bool:
    """Proper-learning check: valid architecture of the promised size and depth."""
    arch = hyp.architecture
    if validate_architecture(arch):
        return False
    if config.exact_size:
        return arch.size == config.Gamma and arch.depth == config.Delta
    return arch.size <= config.Gamma and arch.depth <= config.Delta
