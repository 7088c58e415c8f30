"""Command-line interface: ``msasep {prob,verify,oracle-compare,sweep,plot}``.

Exit codes: 0 success, 1 invalid input, 2 quadrature did not converge,
3 a verification threshold was breached, 4 the oracle window leaked too much.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass
from typing import Sequence

from .bethe import SystemParams
from .combinatorics import format_word, parse_word, sector_of
from .quadrature import (DEFAULT_MAX_NODES, DEFAULT_NODES, DEFAULT_TOL, ConvergenceError,
                         default_radius)
from .states import State, parse_positions

EXIT_OK, EXIT_USAGE, EXIT_CONVERGENCE, EXIT_VERIFY, EXIT_LEAKAGE = 0, 1, 2, 3, 4
ORACLE_MAX_PARTICLES = 3
MAX_LEAKAGE = 1e-8
RECORD_KEYS = ("p", "t", "y", "nu", "x", "pi", "value", "err", "M", "radius")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(value: float) -> str:
    return f"{value:.17g}"


@dataclass(frozen=True)
class ProbRecord:
    p: float
    t: float
    y: list[int]
    nu: str
    x: list[int]
    pi: str
    value: float
    err: float
    M: int
    radius: float

    def to_json(self) -> str:
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, text: str) -> "ProbRecord":
        data = json.loads(text)
        if set(data) != set(RECORD_KEYS):
            raise ValueError(f"record keys {sorted(data)} differ from {list(RECORD_KEYS)}")
        return cls(float(data["p"]), float(data["t"]), [int(v) for v in data["y"]], str(data["nu"]),
                   [int(v) for v in data["x"]], str(data["pi"]), float(data["value"]),
                   float(data["err"]), int(data["M"]), float(data["radius"]))


# -- argument helpers ------------------------------------------------------------

def _params(args) -> SystemParams:
    try:
        return SystemParams(args.p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _state(positions: str, word: str) -> State:
    try:
        return State(parse_positions(positions), parse_word(word))
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _radius(text: str, params: SystemParams) -> float:
    if text == "auto":
        return default_radius(params)
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"radius must be a number or 'auto', got {text!r}") from None


def _window(text: str | None, initial: State, t: float) -> tuple[int, int]:
    """``W`` means ``W`` sites either side of the initial particles; ``L,R`` or ``L:R`` is explicit."""
    from .transition import default_margin

    if text is None:
        margin = default_margin(t)
    else:
        parts = text.replace(":", ",").split(",")
        try:
            values = [int(v) for v in parts]
        except ValueError:
            raise UsageError(f"malformed window {text!r}") from None
        if len(values) == 2:
            lo, hi = values
            if not (lo <= initial.positions[0] and initial.positions[-1] <= hi):
                raise UsageError(f"window [{lo}, {hi}] does not contain the initial positions")
            return lo, hi
        if len(values) != 1 or values[0] < 0:
            raise UsageError(f"malformed window {text!r}")
        margin = values[0]
    return initial.positions[0] - margin, initial.positions[-1] + margin


def _times(text: str) -> list[float]:
    try:
        times = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed time list {text!r}") from None
    if any(not t >= 0 for t in times):
        raise UsageError("times must be non-negative")
    return times


def _workers(args) -> int:
    return args.threads if args.threads else (os.cpu_count() or 1)


def _numerics(args, params) -> dict:
    return dict(radius=_radius(args.radius, params), nodes=args.nodes,
                max_nodes=args.max_nodes, tol=args.tol, workers=_workers(args))


# -- commands --------------------------------------------------------------------

def cmd_prob(args, out) -> int:
    from .transition import transition_probability

    params = _params(args)
    initial, final = _state(args.y, args.nu), _state(args.x, args.pi)
    if initial.n != final.n:
        raise UsageError("initial and final states have different particle numbers")
    res = transition_probability(initial, final, args.t, params, orientation=args.orientation,
                                 **_numerics(args, params))
    record = ProbRecord(params.p, args.t, list(initial.positions), format_word(initial.species),
                        list(final.positions), format_word(final.species), res.value, res.error,
                        res.nodes, res.radius)
    if args.json:
        print(record.to_json(), file=out)
    else:
        print(f"value  {fmt(res.value)}\nerr    {res.error:.3g}\nM      {res.nodes}\n"
              f"radius {fmt(res.radius)}", file=out)
    return EXIT_OK


def cmd_verify(args, out) -> int:
    from .integrability import SUITES, THRESHOLDS, run_suite

    if args.alphabet < 1 or args.alphabet > 5:
        raise UsageError("alphabet must be between 1 and 5")
    if args.points < 1:
        raise UsageError("points must be positive")
    suites = SUITES if args.suite == "all" else (args.suite,)
    print("relation,sector,point,deviation", file=out)
    failed = []
    for suite in suites:
        report = run_suite(suite, alphabet=args.alphabet, points=args.points, seed=args.seed)
        for row in report.rows:
            print(row.csv(), file=out)
        ok = report.passed(THRESHOLDS[suite])
        summary = (f"# {suite}: {'pass' if ok else 'FAIL'} rows={len(report.rows)} "
                   f"max={report.max_deviation:.3g} threshold={THRESHOLDS[suite]:g}")
        print(summary, file=out)
        if not ok:
            failed.append((suite, report.worst))
    for suite, worst in failed:
        print(f"{suite} failed; worst {worst.relation} sector {worst.sector} point {worst.point} "
              f"deviation {worst.deviation:.3g}", file=sys.stderr)
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_oracle_compare(args, out) -> int:
    from .oracle import WindowedStateSpace, build_generator, compare, evolve
    from .transition import window_probabilities

    params = _params(args)
    initial = _state(args.y, args.nu)
    if initial.n > ORACLE_MAX_PARTICLES:
        raise UsageError(f"oracle comparison is capped at N = {ORACLE_MAX_PARTICLES}")
    lo, hi = _window(args.window, initial, args.t)
    space = WindowedStateSpace(lo, hi, sector_of(initial.species))
    oracle = evolve(space, build_generator(space, params), initial, args.t)
    exact = window_probabilities(initial, args.t, params, lo, hi, **_numerics(args, params))
    report = compare(exact.probabilities, oracle.probabilities, space)
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow([f"x_{i + 1}" for i in range(initial.n)] + ["pi", "exact", "oracle", "diff"])
    for state, e, o, d in report.rows:
        writer.writerow(list(state.positions) + [format_word(state.species), fmt(e), fmt(o), fmt(d)])
    print(f"# max_diff={report.max_abs_diff:.3g} tv={report.tv_distance:.3g} "
          f"leakage={oracle.leakage:.3g} window={lo}:{hi} states={len(space)} M={exact.nodes}",
          file=out)
    if oracle.leakage > args.max_leakage:
        print(f"oracle leakage {oracle.leakage:.3g} exceeds {args.max_leakage:g}; widen the window",
              file=sys.stderr)
        return EXIT_LEAKAGE
    return EXIT_OK


def sweep_rows(initial: State, times: Sequence[float], params: SystemParams,
               window: tuple[int, int] | None, **numerics) -> list[list]:
    from .transition import distribution

    rows = []
    for t in times:
        dist = distribution(initial, t, params, window, **numerics)
        for state, prob in dist.probabilities.items():
            rows.append([t, *state.positions, format_word(state.species), prob])
    return rows


def write_sweep_csv(rows, n: int, handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["t"] + [f"x_{i + 1}" for i in range(n)] + ["pi", "prob"])
    for t, *rest in rows:
        *pos, word, prob = rest
        writer.writerow([fmt(t), *pos, word, fmt(prob)])


def read_sweep_csv(handle) -> tuple[int, list[tuple[float, tuple[int, ...], tuple[int, ...], float]]]:
    reader = csv.reader(handle)
    header = next(reader)
    n = len(header) - 3
    if header[0] != "t" or header[-2:] != ["pi", "prob"] or n < 1:
        raise ValueError(f"not a sweep file: header {header}")
    rows = [(float(r[0]), tuple(int(v) for v in r[1:1 + n]), parse_word(r[1 + n]), float(r[2 + n]))
            for r in reader if r]
    return n, rows


def plot_sweep(csv_path: str, svg_path: str) -> None:
    """Per-site species marginals against position, one curve per time."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with open(csv_path, newline="", encoding="utf-8") as fh:
        _, rows = read_sweep_csv(fh)
    marg: dict[int, dict[float, dict[int, float]]] = {}
    for t, pos, word, prob in rows:
        for x, c in zip(pos, word):
            site = marg.setdefault(c, {}).setdefault(t, {})
            site[x] = site.get(x, 0.0) + prob
    species = sorted(marg)
    with plt.rc_context({"svg.hashsalt": "msasep", "svg.fonttype": "none"}):
        fig, axes = plt.subplots(len(species), 1, figsize=(6, 2.2 * len(species)),
                                 sharex=True, squeeze=False)
        for ax, c in zip(axes[:, 0], species):
            for t in sorted(marg[c]):
                xs = sorted(marg[c][t])
                ax.plot(xs, [marg[c][t][x] for x in xs], marker="o", ms=2.5, lw=1, label=f"t={t:g}")
            ax.set_ylabel(f"species {c}")
            ax.legend(fontsize="small", frameon=False)
        axes[-1, 0].set_xlabel("site x")
        fig.tight_layout()
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        plt.close(fig)


def cmd_sweep(args, out) -> int:
    params = _params(args)
    initial = _state(args.y, args.nu)
    times = _times(args.t_list)
    window = _window(args.window, initial, max(times)) if args.window is not None else None
    rows = sweep_rows(initial, times, params, window, **_numerics(args, params))
    try:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            write_sweep_csv(rows, initial.n, fh)
        if args.plot:
            plot_sweep(args.out, args.plot)
    except OSError as exc:
        raise UsageError(f"cannot write output: {exc}") from None
    mass: dict[float, float] = {}
    for t, *_, prob in rows:
        mass[t] = mass.get(t, 0.0) + prob
    for t, m in mass.items():
        print(f"t={t:g} mass={fmt(m)}", file=out)
    return EXIT_OK


def cmd_plot(args, out) -> int:
    try:
        plot_sweep(args.csv, args.out)
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    return EXIT_OK


# -- parser ----------------------------------------------------------------------

def _add_numerics(sub):
    sub.add_argument("--radius", default="auto", help="contour radius, or 'auto'")
    sub.add_argument("--nodes", type=int, default=DEFAULT_NODES, help="initial nodes per circle")
    sub.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    sub.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative doubling tolerance")
    sub.add_argument("--threads", type=int, default=0, help="worker threads (0: all cores)")


def _add_initial(sub):
    sub.add_argument("--p", type=float, required=True, help="right-hop rate")
    sub.add_argument("--y", required=True, help="initial positions, e.g. 0,2,4")
    sub.add_argument("--nu", required=True, help="initial species word, e.g. 123")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="msasep", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    prob = subs.add_parser("prob", help="one transition probability")
    _add_initial(prob)
    prob.add_argument("--t", type=float, required=True)
    prob.add_argument("--x", required=True, help="final positions")
    prob.add_argument("--pi", required=True, help="final species word")
    prob.add_argument("--orientation", choices=("auto", "direct", "reflected"), default="auto")
    prob.add_argument("--json", action="store_true", help="print one JSON record")
    _add_numerics(prob)
    prob.set_defaults(func=cmd_prob)

    verify = subs.add_parser("verify", help="integrability and initial-condition checks")
    verify.add_argument("--suite", choices=("inverse", "ybe", "braid", "initial", "all"),
                        default="all")
    verify.add_argument("--alphabet", type=int, default=3)
    verify.add_argument("--points", type=int, default=50)
    verify.add_argument("--seed", type=int, default=0)
    verify.set_defaults(func=cmd_verify)

    comp = subs.add_parser("oracle-compare", help="contour formula against the Markov chain")
    _add_initial(comp)
    comp.add_argument("--t", type=float, required=True)
    comp.add_argument("--window", help="margin W, or L,R")
    comp.add_argument("--max-leakage", type=float, default=MAX_LEAKAGE)
    _add_numerics(comp)
    comp.set_defaults(func=cmd_oracle_compare)

    sweep = subs.add_parser("sweep", help="distributions at several times to CSV")
    _add_initial(sweep)
    sweep.add_argument("--t-list", required=True, help="comma-separated times")
    sweep.add_argument("--window", help="margin W, or L,R (default: calibrated per time)")
    sweep.add_argument("--out", required=True, help="CSV output path")
    sweep.add_argument("--plot", help="SVG output path for species marginals")
    _add_numerics(sweep)
    sweep.set_defaults(func=cmd_sweep)

    plot = subs.add_parser("plot", help="redraw the marginal plot from a sweep CSV")
    plot.add_argument("csv")
    plot.add_argument("out")
    plot.set_defaults(func=cmd_plot)
    return parser


def main(argv: Sequence[str] | None = None, out: io.TextIOBase | None = None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"msasep: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"msasep: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        # inadmissible radius, bad node counts, malformed states deeper down
        print(f"msasep: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
