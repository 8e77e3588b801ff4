"""Command line front end: tables, single solves, convergence studies,
condition diagnostics.

All artifacts are deterministic: floats are rendered with %.15e, CSV
headers are fixed, and the JSON reports carry the schema tag
"wicm-report/1" with a stable key order. Figures (PNG) are rendered next
to the delimited files so a study is plot-ready without external tools.

Exit codes: 0 success, 2 non-convergence (or a study floored to fewer
than two usable levels), 3 bad arguments, 4 I/O failure.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import coiflet
from .assembly import integral_operator_matrix
from .solver import NewtonConfig, SingularMatrixError, condition_number_2
from .problems import (bratu_1d, bratu_2d, circular_plate,
                       estimate_convergence_rate, five_point_bvp,
                       fourth_order_condition_matrix, fourth_order_geng,
                       integral_sin_errors, solve_problem, solve_problem_2d)

__all__ = ["main"]

SCHEMA = "wicm-report/1"
MIN_LEVEL_1D = 4
MIN_LEVEL_2D = 4  # the 2D operators reuse the 1D extension stencil

EXIT_OK = 0
EXIT_NONCONVERGED = 2
EXIT_BADARGS = 3
EXIT_IO = 4

# Levels whose error sits within this many epsilons of the solution scale
# are treated as floored at machine precision and excluded from rate fits.
FLOOR_EPS_FACTOR = 100.0


class CliError(Exception):
    """Carries an exit code together with the message."""

    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# deterministic serialization

def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return "%.15e" % value
    return str(value)


def _json_render(value, indent):
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = ",\n".join(
            '%s  "%s": %s' % (pad, k, _json_render(v, indent + 1))
            for k, v in value.items())
        return "{\n%s\n%s}" % (items, pad)
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        items = ",\n".join(
            "%s  %s" % (pad, _json_render(v, indent + 1)) for v in value)
        return "[\n%s\n%s]" % (items, pad)
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (float, np.floating)):
        return _fmt(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return '"%s"' % str(value).replace("\\", "\\\\").replace('"', '\\"')


def write_json(path, report):
    """Write a report dict as deterministic JSON (insertion key order)."""
    _write_text(path, _json_render(report, 0) + "\n")


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    _write_text(path, "\n".join(lines) + "\n")


def _write_text(path, text):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError("cannot write %s: %s" % (path, exc), EXIT_IO)


def _out_path(args, name):
    out = args.out or "."
    try:
        os.makedirs(out, exist_ok=True)
    except OSError as exc:
        raise CliError("cannot create %s: %s" % (out, exc), EXIT_IO)
    return os.path.join(out, name)


def _save_figure(fig, path):
    try:
        fig.savefig(path, dpi=150)
    except OSError as exc:
        raise CliError("cannot write %s: %s" % (path, exc), EXIT_IO)
    finally:
        import matplotlib.pyplot as plt
        plt.close(fig)


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _elapsed(t0):
    """Wall clock since t0, or 0.0 under WICM_NO_TIMING.

    Timing is the one report field that varies between identical
    invocations; zeroing it restores byte-identical output.
    """
    if os.environ.get("WICM_NO_TIMING"):
        return 0.0
    return time.perf_counter() - t0


def _thread_count():
    raw = os.environ.get("WICM_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise CliError("WICM_THREADS must be an integer, got %r" % raw,
                       EXIT_BADARGS)
    return max(1, n)


# ---------------------------------------------------------------------------
# problem registry

def _parse_params(pairs):
    params = {}
    for item in pairs or []:
        if "=" not in item:
            raise CliError("--param expects key=value, got %r" % item,
                           EXIT_BADARGS)
        key, _, raw = item.partition("=")
        try:
            params[key.strip()] = float(raw)
        except ValueError:
            raise CliError("--param %s: %r is not a number" % (key, raw),
                           EXIT_BADARGS)
    return params


def _lambda_stages(lam, start=1.0):
    """Continuation ramp for strongly nonlinear parameter values."""
    if abs(lam) <= 2.0:
        return None
    n = max(2, int(np.ceil(abs(lam - start))) + 1)
    return [float(v) for v in np.linspace(start, lam, n)]


def _plate_stages(q):
    if abs(q) <= 10.0:
        return None
    stages = list(np.arange(10.0, q, 20.0)) + [float(q)]
    return [float(v) for v in stages]


class ProblemSpec:
    """One CLI problem id: factory, defaults and solve policy."""

    def __init__(self, name, factory, param_key=None, default=None,
                 two_d=False, stages=None, default_probe=None):
        self.name = name
        self.factory = factory
        self.param_key = param_key
        self.default = default
        self.two_d = two_d
        self.stages = stages
        self.default_probe = default_probe

    def value(self, params):
        unknown = set(params) - ({self.param_key} if self.param_key else set())
        if unknown:
            raise CliError("unknown parameter(s) for %s: %s"
                           % (self.name, ", ".join(sorted(unknown))),
                           EXIT_BADARGS)
        if self.param_key is None:
            return None
        return params.get(self.param_key, self.default)

    def solve(self, params, j, probe=None):
        value = self.value(params)
        min_level = MIN_LEVEL_2D if self.two_d else MIN_LEVEL_1D
        if j < min_level:
            raise CliError("level %d below minimum %d for %s"
                           % (j, min_level, self.name), EXIT_BADARGS)
        cfg = None
        if self.stages is not None:
            ramp = self.stages(value)
            if ramp is not None:
                cfg = NewtonConfig(continuation=ramp)
        if self.two_d:
            factory = self.factory if cfg is not None else None
            problem = self.factory(value)
            return solve_problem_2d(problem, j, cfg=cfg, factory=factory)
        factory = None
        if self.param_key is None:
            problem = self.factory()
        else:
            problem = self.factory(value)
            if cfg is not None:
                factory = self.factory
        if probe is None:
            probe = self.default_probe
        return solve_problem(problem, j, cfg=cfg, factory=factory,
                             probe=probe)


PROBLEMS = {
    "bratu": ProblemSpec("bratu", bratu_1d, "lambda", 1.0,
                         stages=_lambda_stages, default_probe=0.5),
    "geng": ProblemSpec("geng", fourth_order_geng, default_probe=0.5),
    "five-point": ProblemSpec("five-point", five_point_bvp,
                              default_probe=0.5),
    "plate": ProblemSpec("plate", circular_plate, "Q", 10.0,
                         stages=_plate_stages),
    "bratu2d": ProblemSpec("bratu2d", bratu_2d, "lambda", 1.0, two_d=True,
                           stages=_lambda_stages),
}

STUDY_ONLY = {"integral-sin"}


# ---------------------------------------------------------------------------
# tables

def cmd_tables(args):
    tables = coiflet.build_tables()
    computed = {n: tables.integral[n][1:18] for n in range(1, 5)}
    rows = []
    for k in range(1, 18):
        rows.append([k] + [float(computed[n][k - 1]) for n in range(1, 5)])
    write_csv(_out_path(args, "tables.csv"),
              ["k", "phi_int_1", "phi_int_2", "phi_int_3", "phi_int_4"],
              rows)

    diff_rows = []
    worst = 0.0
    for n in range(1, 5):
        ref = np.asarray(coiflet.REFERENCE_INTEGRALS[n])
        rel = np.abs(computed[n] - ref) / np.abs(ref)
        k_worst = int(rel.argmax()) + 1
        diff_rows.append([n, k_worst, float(rel.max())])
        worst = max(worst, float(rel.max()))
    write_csv(_out_path(args, "tables_diff.csv"),
              ["n", "k_worst", "max_rel_deviation"], diff_rows)

    report = {
        "schema": SCHEMA,
        "command": "tables",
        "max_rel_deviation": worst,
        "tolerance": 1e-9,
        "within_tolerance": bool(worst <= 1e-9),
    }
    write_json(_out_path(args, "tables_report.json"), report)

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ks = np.arange(1, 18)
    for n in range(1, 5):
        ax.plot(ks, computed[n], marker="o", label="n = %d" % n)
    ax.set_xlabel("k")
    ax.set_ylabel("phi_int_n(k)")
    ax.set_yscale("symlog", linthresh=1e-12)
    ax.legend()
    fig.tight_layout()
    _save_figure(fig, _out_path(args, "tables.png"))

    print("tables: max relative deviation %.3e (tolerance 1e-09)" % worst)
    return EXIT_OK if worst <= 1e-9 else EXIT_NONCONVERGED


# ---------------------------------------------------------------------------
# solve

def _lookup(problem_id):
    if problem_id in STUDY_ONLY:
        raise CliError("'%s' is an approximation study; use the "
                       "convergence command" % problem_id, EXIT_BADARGS)
    spec = PROBLEMS.get(problem_id)
    if spec is None:
        known = sorted(PROBLEMS) + sorted(STUDY_ONLY)
        raise CliError("unknown problem %r (known: %s)"
                       % (problem_id, ", ".join(known)), EXIT_BADARGS)
    return spec


def _solution_report(spec, sol, params, elapsed):
    report = {
        "schema": SCHEMA,
        "command": "solve",
        "problem": spec.name,
        "parameters": {k: float(v) for k, v in sorted(params.items())},
        "level": sol.level,
        "converged": bool(sol.report.converged),
        "iterations": [int(i) for i in sol.report.iterations],
        "final_residual": float(sol.report.final_residual),
        "continuation_values": [float(v)
                                for v in sol.report.continuation_values],
        "max_abs_error": sol.max_abs_error,
        "error_at_probe": sol.error_at_probe,
        "probe": list(sol.probe) if isinstance(sol.probe, tuple)
                 else sol.probe,
        "scalars": {k: float(v) for k, v in sorted(sol.scalars.items())},
        "wall_clock_seconds": elapsed,
    }
    return report


def _write_solution_csv(args, spec, sol):
    if spec.two_d:
        n = len(sol.x)
        rows = []
        u = sol.fields[0][0]
        for iy in range(n):
            for ix in range(n):
                rows.append([float(sol.x[ix]), float(sol.x[iy]),
                             float(u[iy, ix])])
        write_csv(_out_path(args, "%s_solution.csv" % spec.name),
                  ["x", "y", "u"], rows)
        return
    header = ["x"]
    columns = [sol.x]
    for f, field in enumerate(sol.fields):
        for i, values in enumerate(field):
            header.append("y_%d" % i if len(sol.fields) == 1
                          else "f%d_y_%d" % (f, i))
            columns.append(values)
    rows = [[float(col[r]) for col in columns]
            for r in range(len(sol.x))]
    write_csv(_out_path(args, "%s_solution.csv" % spec.name), header, rows)


def _solution_figure(args, spec, sol):
    plt = _pyplot()
    if spec.two_d:
        fig, ax = plt.subplots(figsize=(5, 4))
        im = ax.imshow(sol.fields[0][0], origin="lower",
                       extent=(0.0, 1.0, 0.0, 1.0))
        fig.colorbar(im, ax=ax)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
        ax.set_title("%s, j = %d" % (spec.name, sol.level))
    else:
        fig, ax = plt.subplots(figsize=(6, 4))
        for f, field in enumerate(sol.fields):
            label = "y" if len(sol.fields) == 1 else "field %d" % f
            ax.plot(sol.x, field[0], marker=".", label=label)
        ax.set_xlabel("x")
        ax.set_ylabel("solution")
        ax.set_title("%s, j = %d" % (spec.name, sol.level))
        ax.legend()
    fig.tight_layout()
    _save_figure(fig, _out_path(args, "%s_solution.png" % spec.name))


def cmd_solve(args):
    spec = _lookup(args.problem)
    params = _parse_params(args.param)
    spec.value(params)  # validate early
    started = time.perf_counter()
    try:
        sol = spec.solve(params, args.level, probe=args.probe)
    except SingularMatrixError as exc:
        raise CliError("solve %s failed: %s" % (spec.name, exc),
                       EXIT_NONCONVERGED)
    elapsed = _elapsed(started)
    report = _solution_report(spec, sol, params, elapsed)
    _write_solution_csv(args, spec, sol)
    write_json(_out_path(args, "%s_report.json" % spec.name), report)
    _solution_figure(args, spec, sol)
    if not sol.report.converged:
        print("solve %s: did not converge (final residual %.3e)"
              % (spec.name, sol.report.final_residual), file=sys.stderr)
        return EXIT_NONCONVERGED
    line = "solve %s j=%d: converged in %s iterations" % (
        spec.name, sol.level, "+".join(str(i) for i in sol.report.iterations))
    if sol.max_abs_error is not None:
        line += ", max abs error %.3e" % sol.max_abs_error
    print(line)
    return EXIT_OK


# ---------------------------------------------------------------------------
# convergence

def _parse_levels(raw):
    try:
        a, b = raw.split("..")
        a, b = int(a), int(b)
    except ValueError:
        raise CliError("--levels expects a..b, got %r" % raw, EXIT_BADARGS)
    if b <= a:
        raise CliError("--levels: b must exceed a (got %s)" % raw,
                       EXIT_BADARGS)
    return list(range(a, b + 1))


def _study_integral_sin(levels):
    """Fig.-style pure approximation study; no solve involved."""
    results = []
    skipped = []
    for j in levels:
        if 2 ** j <= 9:
            skipped.append(j)
            continue
        errs = integral_sin_errors(j)
        results.append((j, float(errs.max()), None))
    scale = 2.0 / np.pi
    return results, skipped, scale


def _plate_reference(levels, params):
    ref_level = max(8, max(levels) + 2)
    spec = PROBLEMS["plate"]
    return spec.solve(params, ref_level), ref_level


def _study_solves(spec, levels, params, probe):
    """Per-level errors via repeated solves, optionally in parallel."""
    threads = _thread_count()
    min_level = MIN_LEVEL_2D if spec.two_d else MIN_LEVEL_1D
    skipped = [j for j in levels if j < min_level]
    usable_levels = [j for j in levels if j >= min_level]

    reference = None
    if spec.name == "plate":
        reference, ref_level = _plate_reference(usable_levels, params)
        if not reference.report.converged:
            raise CliError("plate reference solve (j = %d) did not converge"
                           % ref_level, EXIT_NONCONVERGED)

    def run(j):
        t0 = time.perf_counter()
        try:
            sol = spec.solve(params, j, probe=probe)
        except SingularMatrixError as exc:
            raise CliError("level %d failed: %s" % (j, exc),
                           EXIT_NONCONVERGED)
        return sol, _elapsed(t0)

    if threads > 1 and len(usable_levels) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(run, usable_levels))
    else:
        solved = [run(j) for j in usable_levels]

    results = []
    scale = 0.0
    for (sol, dt), j in zip(solved, usable_levels):
        if not sol.report.converged:
            raise CliError("level %d did not converge (final residual %.3e)"
                           % (j, sol.report.final_residual),
                           EXIT_NONCONVERGED)
        if reference is not None:
            stride = 2 ** (reference.level - j)
            ref = reference.fields[0][0][::stride]
            err = float(np.abs(sol.fields[0][0] - ref).max())
        elif probe is not None and not spec.two_d:
            err = sol.error_at_probe
        elif spec.two_d:
            err = sol.error_at_probe if probe is not None \
                else sol.max_abs_error
        else:
            err = sol.max_abs_error
        if err is None:
            raise CliError("problem %s has no exact solution; convergence "
                           "study needs one (or a self-reference)"
                           % spec.name, EXIT_BADARGS)
        # floor scale tracks the field the error is measured on
        scale = max(scale, float(np.abs(sol.fields[0][0]).max()))
        results.append((j, float(err), dt))
    return results, skipped, scale


def cmd_convergence(args):
    levels = _parse_levels(args.levels)
    params = _parse_params(args.param)
    if args.problem == "integral-sin":
        if params:
            raise CliError("integral-sin takes no parameters", EXIT_BADARGS)
        name = "integral-sin"
        results, skipped, scale = _study_integral_sin(levels)
    else:
        spec = _lookup(args.problem)
        name = spec.name
        results, skipped, scale = _study_solves(spec, levels, params,
                                                args.probe)

    floor = FLOOR_EPS_FACTOR * np.finfo(float).eps * scale
    usable = [(j, err) for j, err, _ in results if err > floor]
    floored = [j for j, err, _ in results if err <= floor]

    rows = [[j, 2 ** j + 1, err] for j, err, _ in results]
    write_csv(_out_path(args, "%s_convergence.csv" % name),
              ["j", "m", "error"], rows)

    rate = None
    if len(usable) >= 2:
        rate = estimate_convergence_rate([e for _, e in usable],
                                         [j for j, _ in usable])

    report = {
        "schema": SCHEMA,
        "command": "convergence",
        "problem": name,
        "parameters": {k: float(v) for k, v in sorted(params.items())},
        "levels": [j for j, _, _ in results],
        "skipped_levels": skipped,
        "probe": args.probe,
        "errors": [err for _, err, _ in results],
        "wall_clock_seconds": [dt for _, _, dt in results],
        "machine_floor": float(floor),
        "floored_levels": floored,
        "fitted_rate": rate,
    }
    write_json(_out_path(args, "%s_convergence.json" % name), report)

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy([j for j, _, _ in results], [e for _, e, _ in results],
                marker="o")
    ax.set_xlabel("resolution level j")
    ax.set_ylabel("error")
    title = name if rate is None else "%s, fitted rate %.2f" % (name, rate)
    ax.set_title(title)
    fig.tight_layout()
    _save_figure(fig, _out_path(args, "%s_convergence.png" % name))

    if len(usable) < 2:
        print("convergence %s: fewer than two usable levels remain after "
              "excluding errors at the machine-precision floor (%.3e); "
              "cannot fit a rate" % (name, floor), file=sys.stderr)
        return EXIT_NONCONVERGED
    note = ""
    if floored:
        note = " (levels %s at machine floor, excluded)" % \
               ",".join(str(j) for j in floored)
    print("convergence %s: fitted rate %.3f over levels %s%s"
          % (name, rate, ",".join(str(j) for j, _ in usable), note))
    return EXIT_OK


# ---------------------------------------------------------------------------
# condition

def cmd_condition(args):
    try:
        alpha = [float(v) for v in args.alpha.split(",")]
    except ValueError:
        raise CliError("--alpha expects five comma-separated numbers",
                       EXIT_BADARGS)
    if len(alpha) != 5:
        raise CliError("--alpha expects exactly five values a0..a4",
                       EXIT_BADARGS)
    if alpha[4] == 0.0:
        raise CliError("--alpha: a4 must be nonzero", EXIT_BADARGS)
    levels = _parse_levels(args.levels)
    if min(levels) < MIN_LEVEL_1D:
        raise CliError("condition levels must be >= %d" % MIN_LEVEL_1D,
                       EXIT_BADARGS)
    rows = []
    conds = []
    for j in levels:
        A = fourth_order_condition_matrix(alpha, j)
        rep = condition_number_2(A)
        rows.append([j, 2 ** j + 1, float(rep.cond), float(rep.inv_norm)])
        conds.append((j, rep))
    write_csv(_out_path(args, "condition.csv"),
              ["j", "m", "cond_2", "inv_norm_2"], rows)
    report = {
        "schema": SCHEMA,
        "command": "condition",
        "alpha": [float(a) for a in alpha],
        "levels": levels,
        "cond_2": [float(rep.cond) for _, rep in conds],
        "inv_norm_2": [float(rep.inv_norm) for _, rep in conds],
    }
    write_json(_out_path(args, "condition_report.json"), report)

    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(levels, [rep.cond for _, rep in conds], marker="o",
            label="K_2(A)")
    ax.plot(levels, [rep.inv_norm for _, rep in conds], marker="s",
            label="||A^-1||_2")
    ax.set_xlabel("resolution level j")
    ax.legend()
    fig.tight_layout()
    _save_figure(fig, _out_path(args, "condition.png"))

    for j, rep in conds:
        print("condition j=%d: K_2 = %.6f, ||A^-1||_2 = %.6f"
              % (j, rep.cond, rep.inv_norm))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message, EXIT_BADARGS)


def build_parser():
    parser = _Parser(prog="wicm",
                     description="Wavelet integral collocation method: "
                                 "tables, solves, convergence and condition "
                                 "studies.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="reproduce the integral tables")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("solve", help="solve one benchmark problem")
    p.add_argument("problem")
    p.add_argument("--level", type=int, required=True)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--probe", type=float, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", help="run a grid refinement study")
    p.add_argument("problem")
    p.add_argument("--levels", required=True, metavar="A..B")
    p.add_argument("--probe", type=float, default=None)
    p.add_argument("--param", action="append", metavar="KEY=VALUE")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("condition",
                       help="condition diagnostics of the linear "
                            "fourth-order family")
    p.add_argument("--alpha", required=True, metavar="a0,a1,a2,a3,a4")
    p.add_argument("--levels", required=True, metavar="A..B")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_condition)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
