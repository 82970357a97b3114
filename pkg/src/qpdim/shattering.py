"""Brute-force pseudo-shattering and fat-shattering checks on finite function tables."""
from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive search would exceed its combinatorial budget."""


@dataclass(frozen=True)
class FunctionTable:
    """Values of finitely many functions at finitely many points.

    ``values[r, i]`` is the value of function ``labels[r]`` at point ``points[i]``.
    """

    points: tuple
    labels: tuple
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        object.__setattr__(self, "points", tuple(str(p) for p in self.points))
        object.__setattr__(self, "labels", tuple(str(lbl) for lbl in self.labels))
        if vals.ndim != 2 or vals.shape != (len(self.labels), len(self.points)):
            raise ValueError(f"values must have shape ({len(self.labels)}, {len(self.points)}), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("function values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def n_functions(self) -> int:
        return len(self.labels)

    def point_indices(self, subset) -> list[int]:
        if subset is None:
            return list(range(self.n_points))
        lookup = {p: i for i, p in enumerate(self.points)}
        out = []
        for s in subset:
            if isinstance(s, (int, np.integer)):
                if not 0 <= s < self.n_points:
                    raise IndexError(f"point index {s} out of range")
                out.append(int(s))
            else:
                out.append(lookup[str(s)])
        if len(set(out)) != len(out):
            raise ValueError("point subset contains duplicates")
        return out


@dataclass
class ShatterResult:
    """Outcome of a shattering check.

    ``witness`` maps each realized subset ``C`` (a frozenset of point labels)
    to the label of the first function realizing it; ``missing`` lists the
    subsets nobody realizes.
    """

    shattered: bool
    points: tuple
    thresholds: tuple
    witness: dict = field(default_factory=dict)
    missing: list = field(default_factory=list)

    def __bool__(self):
        return self.shattered


def _codes(bits: np.ndarray) -> np.ndarray:
    k = bits.shape[1]
    if k > 62:
        raise BudgetExceeded(f"cannot enumerate 2^{k} patterns")
    weights = np.left_shift(np.int64(1), np.arange(k, dtype=np.int64))
    return bits.astype(np.int64) @ weights


def _decode(code: int, points: Sequence[str]) -> frozenset:
    return frozenset(p for i, p in enumerate(points) if code >> i & 1)


def _result(table, idx, thresholds, codes, valid=None, with_missing=True) -> ShatterResult:
    k = len(idx)
    pts = tuple(table.points[i] for i in idx)
    rows = np.arange(table.n_functions) if valid is None else np.flatnonzero(valid)
    uniq, first = np.unique(codes[rows], return_index=True)
    shattered = uniq.size == 1 << k
    witness = {_decode(int(c), pts): table.labels[int(rows[f])] for c, f in zip(uniq, first)}
    missing = []
    if with_missing and not shattered:
        have = set(int(c) for c in uniq)
        missing = [_decode(c, pts) for c in range(1 << k) if c not in have]
    return ShatterResult(shattered, pts, tuple(float(t) for t in thresholds), witness, missing)


def is_pseudo_shattered(table: FunctionTable, subset=None, thresholds=None) -> ShatterResult:
    """Whether every ``C`` of the subset is cut out as ``{i : f(x_i) >= y_i}`` by some row.

    ``subset`` defaults to all points; ``thresholds`` is one value per point
    of the subset or a scalar. Ties ``f(x_i) == y_i`` count as inside ``C``.
    """
    idx = table.point_indices(subset)
    y = np.broadcast_to(np.asarray(thresholds, dtype=float), (len(idx),))
    bits = table.values[:, idx] >= y
    return _result(table, idx, y, _codes(bits))


def fat_shattering_check(table: FunctionTable, subset=None, thresholds=None, alpha: float = 0.0) -> bool:
    """Whether every ``C`` is realized with margin: ``f >= y + alpha`` on ``C`` and ``f <= y - alpha`` off it.

    At ``alpha = 0`` the off-``C`` condition is ``f <= y``. This coincides
    with pseudo-shattering when no table value equals a threshold.
    """
    return fat_shattering_result(table, subset, thresholds, alpha).shattered


def fat_shattering_result(table: FunctionTable, subset=None, thresholds=None, alpha: float = 0.0) -> ShatterResult:
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    idx = table.point_indices(subset)
    y = np.broadcast_to(np.asarray(thresholds, dtype=float), (len(idx),))
    vals = table.values[:, idx]
    above = vals >= y + alpha
    below = vals <= y - alpha
    valid = np.all(above | below, axis=1)
    return _result(table, idx, y, _codes(above), valid)


@dataclass
class Witness:
    points: tuple
    thresholds: tuple
    result: ShatterResult


def _candidates(column: np.ndarray, limit: int | None) -> np.ndarray:
    vals = np.unique(column)[1:]  # a threshold at the minimum leaves no row below it
    if limit is not None and vals.size > limit:
        vals = np.unique(np.quantile(vals, np.linspace(0, 1, limit), method="nearest"))
    return vals


def find_shattered_set(table: FunctionTable, k: int, budget: int = 10**7,
                       max_candidates: int | None = None) -> Witness | None:
    """Exhaustively look for ``k`` points and thresholds that the table pseudo-shatters.

    Thresholds range over the distinct values at each point, which is
    complete for the ``>=`` predicate. ``max_candidates`` thins them to
    quantiles; any witness found is still exact, but absence is then no proof.
    """
    if not 0 <= k <= table.n_points:
        raise ValueError(f"k must lie in 0..{table.n_points}")
    if k == 0:
        return Witness((), (), is_pseudo_shattered(table, [], []))
    if table.n_functions < 1 << k:
        return None
    cands = [_candidates(table.values[:, i], max_candidates) for i in range(table.n_points)]
    n_subsets = math.comb(table.n_points, k)
    if n_subsets > budget:
        raise BudgetExceeded(f"{n_subsets} point subsets exceed the budget of {budget}")
    total = 0
    for combo in itertools.combinations(range(table.n_points), k):
        total += math.prod(len(cands[i]) for i in combo)
        if total > budget:
            raise BudgetExceeded(f"more than {budget} (subset, threshold) combinations")
    for combo in itertools.combinations(range(table.n_points), k):
        cols = table.values[:, combo]
        for ys in itertools.product(*(cands[i] for i in combo)):
            codes = _codes(cols >= np.asarray(ys))
            if np.unique(codes).size == 1 << k:
                res = is_pseudo_shattered(table, combo, ys)
                return Witness(res.points, res.thresholds, res)
    return None


def verify_witness(table: FunctionTable, result: ShatterResult) -> bool:
    """Replay every subset against its witness row and check the exact sign pattern."""
    if not result.shattered:
        return False
    idx = table.point_indices(result.points)
    row_of = {lbl: r for r, lbl in enumerate(table.labels)}
    y = np.asarray(result.thresholds)
    for C, label in result.witness.items():
        vals = table.values[row_of[label], idx]
        got = frozenset(p for p, v, t in zip(result.points, vals, y) if v >= t)
        if got != C:
            return False
    return len(result.witness) == 1 << len(idx)


# -- table files -------------------------------------------------------------

def dump_table(table: FunctionTable) -> str:
    """CSV: a header of point labels, then ``label,v1,...,vk`` per function (17 significant digits)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.points)
    for label, row in zip(table.labels, table.values):
        w.writerow([label] + [f"{v:.17g}" for v in row])
    return buf.getvalue()


def parse_table(text: str) -> FunctionTable:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise ValueError("line 1: empty table")
    points = rows[0]
    labels, values = [], []
    for lineno, r in enumerate(rows[1:], start=2):
        if len(r) != len(points) + 1:
            raise ValueError(f"line {lineno}: expected {len(points) + 1} fields, got {len(r)}")
        try:
            values.append([float(v) for v in r[1:]])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        labels.append(r[0])
    return FunctionTable(tuple(points), tuple(labels), np.array(values).reshape(len(labels), len(points)))


def load_table(path) -> FunctionTable:
    return parse_table(Path(path).read_text())


def save_table(table: FunctionTable, path) -> None:
    Path(path).write_text(dump_table(table))
