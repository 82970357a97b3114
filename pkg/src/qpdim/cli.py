"""Command-line front end.

Exit codes: 0 success, 1 domain failure (bound violated, shattering asserted
but absent, learning failed under ``--strict``), 2 usage or input errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import bounds as B
from .circuit import Circuit, circuit_output_probability, enumerate_architectures, count_architecture_bound
from .circuit_io import CircuitFormatError, load_circuit
from .core import as_generator, haar_random_state, haar_random_unitary
from .learner import LearningConfig, generalization_experiment, rows_to_csv
from .polynomial import (
    PolynomialSizeError,
    circuit_assignment,
    degree_report,
    probability_polynomial,
    variable_input_polynomial,
)
from .shattering import (
    BudgetExceeded,
    dump_table,
    find_shattered_set,
    is_pseudo_shattered,
    load_table,
)
from .state_family import family_thresholds, shattering_consistency, state_family_functions

POLY_TOL = 1e-9


class UsageError(Exception):
    pass


class DomainFailure(Exception):
    pass


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _emit(args, text: str):
    if getattr(args, "out", None):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _labels(n: int, d: int) -> list[str]:
    return ["".join(map(str, np.unravel_index(i, (d,) * n))) for i in range(d**n)]


def _require_seed(args):
    if args.strict and args.seed is None:
        raise UsageError(f"--strict requires --seed for '{args.command}'")


# -- subcommands ---------------------------------------------------------------

def cmd_simulate(args) -> int:
    circ = load_circuit(args.circuit)
    labels = _labels(circ.n, circ.d)
    xs = args.x or labels
    ys = args.y or labels
    for lbl in xs + ys:
        if lbl not in labels:
            raise UsageError(f"{lbl!r} is not a basis label for n={circ.n}, d={circ.d}")
    rows = [(x, y, circuit_output_probability(circ, x, y)) for y in ys for x in xs]
    if args.json:
        _emit(args, _dump_json([{"x": x, "y": y, "p": p} for x, y, p in rows]))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "p"])
        for x, y, p in rows:
            w.writerow([x, y, _fmt(p)])
        _emit(args, buf.getvalue())
    return 0


def _random_locals(n, d, rng):
    return np.array([haar_random_state(d, rng) for _ in range(n)])


def cmd_poly_check(args) -> int:
    _require_seed(args)
    circ = load_circuit(args.circuit)
    if circ.mode != "unitary":
        raise UsageError("poly-check needs a unitary circuit")
    arch = circ.architecture
    if arch.size > args.max_gates:
        raise UsageError(f"circuit has {arch.size} gates; symbolic budget is --max-gates {args.max_gates}")
    try:
        poly = variable_input_polynomial(arch) if args.variable_input else probability_polynomial(arch, 0)
    except PolynomialSizeError as exc:
        raise UsageError(str(exc)) from None
    rng = as_generator(args.seed if args.seed is not None else 0)
    worst = 0.0
    for t in range(args.trials):
        if t == 0:
            trial = circ
        else:
            trial = Circuit(arch, tuple(haar_random_unitary(arch.d**2, rng) for _ in arch.placements))
        x = _random_locals(arch.n, arch.d, rng)
        y = _random_locals(arch.n, arch.d, rng) if args.variable_input else None
        sim = circuit_output_probability(trial, x, y)
        val = poly.evaluate(circuit_assignment(trial, x, y))
        worst = max(worst, abs(val - sim))
    deg = degree_report(poly)
    limits = {"gate": 2 * arch.size, "x": 2 * arch.n}
    if args.variable_input:
        limits["y"] = 2 * arch.n
    degree_ok = all(deg.get(g, 0) <= lim for g, lim in limits.items())
    ok = worst <= POLY_TOL and degree_ok
    report = {"size": arch.size, "depth": arch.depth, "n": arch.n, "d": arch.d,
              "variable_input": bool(args.variable_input), "trials": args.trials,
              "max_deviation": worst, "degrees": deg, "degree_limits": limits,
              "degree_ok": degree_ok, "ok": ok}
    if args.json:
        _emit(args, _dump_json(report))
    else:
        lines = [f"max_deviation {_fmt(worst)}"]
        lines += [f"degree {g} {deg.get(g, 0)} <= {lim}" for g, lim in limits.items()]
        lines.append("ok" if ok else "FAILED")
        _emit(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


def cmd_bounds(args) -> int:
    try:
        inputs = B.BoundInputs(d=args.d, n=args.n, gamma=args.gamma, delta=args.delta,
                               Gamma=args.Gamma if args.Gamma is not None else args.gamma,
                               Delta=args.Delta if args.Delta is not None else args.delta,
                               eps=args.eps, confidence=args.confidence,
                               alpha=args.alpha, beta=args.beta, m=args.m)
        rows = inputs.report()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.json:
        _emit(args, _dump_json({name: {"value": v, "formula": f} for name, v, f in rows}))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "value", "formula"])
        for name, v, f in rows:
            w.writerow([name, _fmt(v), f])
        _emit(args, buf.getvalue())
    return 0


def _parse_thresholds(spec: str, k: int) -> np.ndarray:
    vals = [float(v) for v in spec.split(",")]
    if len(vals) == 1:
        vals = vals * k
    if len(vals) != k:
        raise UsageError(f"expected 1 or {k} thresholds, got {len(vals)}")
    return np.array(vals)


def cmd_shatter(args) -> int:
    if (args.table is None) == (args.state_family is None):
        raise UsageError("give exactly one of TABLE or --state-family N")
    if args.state_family is not None:
        table = state_family_functions(args.state_family)
        default_y = family_thresholds(args.state_family)
    else:
        table = load_table(args.table)
        default_y = None
    if args.k is not None and args.thresholds is not None:
        raise UsageError("--k searches thresholds; do not combine it with --thresholds")
    if args.k is None and (args.thresholds is not None or default_y is not None):
        y = _parse_thresholds(args.thresholds, table.n_points) if args.thresholds else default_y
        res = is_pseudo_shattered(table, None, y)
        points, thresholds, witness = res.points, res.thresholds, res.witness if res.shattered else None
    else:
        k = table.n_points if args.k is None else args.k
        if not 0 <= k <= table.n_points:
            raise UsageError(f"k must lie in 0..{table.n_points}")
        w = find_shattered_set(table, k, budget=args.budget)
        points, thresholds, witness = (w.points, w.thresholds, w.result.witness) if w else ((), (), None)
    found = witness is not None
    if args.json:
        out = {"shattered": found, "points": list(points), "thresholds": list(thresholds)}
        if found:
            out["witness"] = [{"subset": sorted(C), "function": lbl}
                              for C, lbl in sorted(witness.items(), key=lambda t: (len(t[0]), sorted(t[0])))]
        _emit(args, _dump_json(out))
    elif found:
        ys = sorted(set(thresholds))
        ytxt = ", ".join(f"{v:.17g}" for v in ys) if len(ys) > 1 else f"{ys[0]:.17g}" if ys else "-"
        lines = [f"shattered: {len(points)} points, thresholds {ytxt}",
                 "points: " + " ".join(points)]
        if args.verbose:
            for C, lbl in sorted(witness.items(), key=lambda t: (len(t[0]), sorted(t[0]))):
                lines.append("{" + " ".join(sorted(C)) + "} <- " + lbl)
        _emit(args, "\n".join(lines) + "\n")
    else:
        _emit(args, "none\n")
    if args.assert_shattered and not found:
        raise DomainFailure("table is not shattered")
    return 0


def cmd_state_family(args) -> int:
    table = state_family_functions(args.n)
    if args.consistency:
        info = shattering_consistency(args.n)
        if args.json:
            _emit(args, _dump_json(info))
        else:
            _emit(args, "".join(f"{k} {v}\n" for k, v in info.items()))
        return 0 if info["consistent"] else 1
    if args.json:
        _emit(args, _dump_json({"points": list(table.points),
                                "functions": {lbl: row.tolist() for lbl, row in zip(table.labels, table.values)}}))
    else:
        _emit(args, dump_table(table))
    return 0


def cmd_learn(args) -> int:
    _require_seed(args)
    try:
        config = LearningConfig.load(args.config)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"{args.config}: {exc}") from None
    if args.seed is not None:
        config.seed = args.seed
        config.seeds = [args.seed]
    grid = [int(v) for v in args.grid.split(",")] if args.grid else None
    rows = generalization_experiment(config, grid, inject_target=args.inject_target)
    if args.json:
        _emit(args, _dump_json([{"m": r.m, "seed": r.seed, "train_err": r.train_err, "test_err": r.test_err,
                                 "success": r.success, "predicted_m": r.predicted_m} for r in rows]))
    else:
        _emit(args, rows_to_csv(rows))
    n_ok = sum(r.success for r in rows)
    print(f"{n_ok}/{len(rows)} fits within alpha={config.alpha}", file=sys.stderr)
    if args.strict and n_ok < len(rows):
        return 1
    return 0


def cmd_enumerate_arch(args) -> int:
    try:
        archs = enumerate_architectures(args.n, args.d, args.depth, args.size, args.allow_idle)
        bound = count_architecture_bound(args.n, args.depth, args.size)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ok = len(archs) <= bound
    if args.json:
        out = {"n": args.n, "depth": args.depth, "size": args.size, "count": len(archs), "bound": bound}
        if not args.count_only:
            out["architectures"] = [a.layers() for a in archs]
        _emit(args, _dump_json(out))
    else:
        lines = [] if args.count_only else [str(a) for a in archs]
        lines.append(f"count {len(archs)} bound {bound}")
        _emit(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--strict", action="store_true", help="require --seed and fail on unmet targets")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", help="write primary output here instead of stdout")

    p = argparse.ArgumentParser(prog="qpdim", description="Pseudo-dimension tools for 2-local quantum circuits.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="probability table f(x, y) of a circuit file")
    s.add_argument("circuit")
    s.add_argument("--x", action="append", help="measurement basis label (repeatable; default all)")
    s.add_argument("--y", action="append", help="input basis label (repeatable; default all)")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("poly-check", parents=[common], help="compare the symbolic polynomial with simulation")
    s.add_argument("circuit")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--variable-input", action="store_true", help="use the polynomial in x, y and the gates")
    s.add_argument("--max-gates", type=int, default=6)
    s.set_defaults(func=cmd_poly_check)

    s = sub.add_parser("bounds", parents=[common], help="all bound calculators")
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--gamma", type=int, default=1)
    s.add_argument("--delta", type=int, default=1)
    s.add_argument("--Gamma", type=int, default=None, help="learning size (default gamma)")
    s.add_argument("--Delta", type=int, default=None, help="learning depth (default delta)")
    s.add_argument("--eps", type=float, default=0.1)
    s.add_argument("--confidence", type=float, default=0.05)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--beta", type=float, default=0.2)
    s.add_argument("--m", type=int, default=None, help="polynomial count for the sign-pattern bound")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("shatter", parents=[common], help="pseudo-shattering check or search")
    s.add_argument("table", nargs="?")
    s.add_argument("--state-family", type=int, metavar="N")
    s.add_argument("--k", type=int, help="search for k shattered points")
    s.add_argument("--thresholds", help="one value or a comma list, checks all points")
    s.add_argument("--budget", type=int, default=10**7)
    s.add_argument("--assert", dest="assert_shattered", action="store_true", help="exit 1 if not shattered")
    s.add_argument("--verbose", action="store_true", help="list the witness map")
    s.set_defaults(func=cmd_shatter)

    s = sub.add_parser("state-family", parents=[common], help="function table of the shattering state family")
    s.add_argument("n", type=int)
    s.add_argument("--consistency", action="store_true", help="check realized circuits against the upper bound")
    s.set_defaults(func=cmd_state_family)

    s = sub.add_parser("learn", parents=[common], help="run a learning experiment from a JSON config")
    s.add_argument("config")
    s.add_argument("--grid", help="comma list of training-set sizes (overrides m_grid)")
    s.add_argument("--inject-target", action="store_true", help="use the target as hypothesis")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("enumerate-arch", parents=[common], help="list architectures of a given size and depth")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, default=2)
    s.add_argument("--depth", type=int, required=True)
    s.add_argument("--size", type=int, required=True)
    s.add_argument("--allow-idle", action="store_true")
    s.add_argument("--count-only", action="store_true")
    s.set_defaults(func=cmd_enumerate_arch)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, CircuitFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DomainFailure, BudgetExceeded) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
