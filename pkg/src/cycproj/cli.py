"""Command-line benchmark harness.

Three subcommands: `solve` runs one method on a problem file and emits a
per-iteration trace; `angle-sweep` measures iteration counts of plain
versus line-search cyclic projections on two lines at a controlled
angle; `hyperplane-bench` times both methods on random hyperplane
systems.  Summary tables are CSV with fixed headers; all randomness is
derived from the --seed flag, so identical invocations produce identical
data columns (timings excluded).
"""

from __future__ import annotations

import argparse
import contextlib
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .acceleration import SolveConfig, StepRule, solve
from .analysis import exact_projection
from .geometry import Hyperplane, InfeasibleProblemError, Span
from .operators import CycleOperator, DouglasRachfordOperator

__all__ = [
    "ProblemFileError",
    "UsageError",
    "ExperimentRow",
    "parse_problem_file",
    "build_operator",
    "angle_instance",
    "angle_sweep",
    "hyperplane_bench",
    "main",
    "run",
]

SWEEP_HEADER = "theta,method,mean_iterations,std_iterations,reps,seed"
BENCH_HEADER = "m,n,method,mean_iterations,mean_residual,mean_time_s,reps,seed"
TRACE_DIGITS = 17
TABLE_DIGITS = 6

SOLVE_METHODS = ("cp", "gk-affine", "sym-cp", "accel-sym-cp", "dr", "accel-dr")
BENCH_METHODS = ("cp", "accel-cp", "sym-cp", "accel-sym-cp")
SWEEP_METHODS = ("cp", "gk-affine")

# x0 is declared already feasible when every constraint residual sits below
# this relative bound; the solve then reports zero iterations.
FEASIBLE_X0_TOL = 1e-12
# The exact-projection oracle is skipped when constraint rows times ambient
# dimension exceeds this (it would dominate the run).
ORACLE_SIZE_LIMIT = 4_000_000


class ProblemFileError(ValueError):
    """Problem file rejected; carries the offending line number."""

    def __init__(self, lineno: int, msg: str):
        super().__init__(f"line {lineno}: {msg}")
        self.lineno = lineno


class UsageError(ValueError):
    """Bad flag combination or value."""


@dataclass
class ExperimentRow:
    """One summary line of an experiment table."""

    method: str
    reps: int
    seed: int
    theta: Optional[float] = None
    m: Optional[int] = None
    n: Optional[int] = None
    mean_iterations: float = 0.0
    std_iterations: Optional[float] = None
    mean_residual: Optional[float] = None
    mean_time_s: Optional[float] = None
    all_converged: bool = True


def _fmt(x: float, digits: int) -> str:
    return format(float(x), f".{digits}g")


@contextlib.contextmanager
def _open_out(path: Optional[str]):
    if path is None or path == "-":
        yield sys.stdout
    else:
        fh = open(path, "w", newline="")
        try:
            yield fh
        finally:
            fh.close()


def parse_problem_file(path: str) -> tuple[np.ndarray, list]:
    """Read a problem file into (x0, sets).

    Format: `dim <d>`, then `x0 <d reals>`, then one constraint per line,
    either `hyperplane <d reals> <offset>` or `point <d reals>`.  Blank
    lines and lines starting with '#' are ignored.
    """
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise ProblemFileError(0, f"cannot read {path}: {exc}") from exc

    lines = []
    for i, line in enumerate(raw, start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            lines.append((i, stripped))
    if not lines:
        raise ProblemFileError(0, "empty problem file")

    def floats(lineno, tokens, count, what):
        if len(tokens) != count:
            raise ProblemFileError(
                lineno, f"{what} needs {count} numbers, got {len(tokens)}"
            )
        try:
            vals = np.array([float(t) for t in tokens])
        except ValueError:
            raise ProblemFileError(lineno, f"{what} contains a non-number")
        if not np.all(np.isfinite(vals)):
            raise ProblemFileError(lineno, f"{what} contains a non-finite value")
        return vals

    lineno, header = lines[0]
    tokens = header.split()
    if tokens[0] != "dim" or len(tokens) != 2:
        raise ProblemFileError(lineno, "first line must be 'dim <d>'")
    try:
        dim = int(tokens[1])
    except ValueError:
        raise ProblemFileError(lineno, "dimension must be an integer")
    if dim < 1:
        raise ProblemFileError(lineno, "dimension must be positive")

    if len(lines) < 2:
        raise ProblemFileError(lineno, "missing x0 line")
    lineno, x0_line = lines[1]
    tokens = x0_line.split()
    if tokens[0] != "x0":
        raise ProblemFileError(lineno, "second line must be 'x0 <d reals>'")
    x0 = floats(lineno, tokens[1:], dim, "x0")

    sets = []
    for lineno, line in lines[2:]:
        tokens = line.split()
        kind = tokens[0]
        if kind == "hyperplane":
            vals = floats(lineno, tokens[1:], dim + 1, "hyperplane")
            if float(vals[:dim] @ vals[:dim]) == 0.0:
                raise ProblemFileError(lineno, "hyperplane normal is zero")
            sets.append(Hyperplane(vals[:dim], float(vals[dim])))
        elif kind == "point":
            vals = floats(lineno, tokens[1:], dim, "point")
            sets.append(Span(vals, np.zeros((dim, 0))))
        else:
            raise ProblemFileError(lineno, f"unknown constraint kind {kind!r}")
    if not sets:
        raise ProblemFileError(lines[-1][0], "no constraint sets given")
    return x0, sets


def build_operator(sets: Sequence, method: str):
    """Operator and step rule for a solve-method name."""
    if method not in SOLVE_METHODS:
        raise UsageError(f"unknown method {method!r}")
    if method in ("dr", "accel-dr"):
        if len(sets) != 2:
            raise UsageError("dr methods need exactly two constraint sets")
        op = DouglasRachfordOperator(sets[0], sets[1], symmetric=True)
        rule = StepRule.symmetric_dr() if method == "accel-dr" else StepRule.unit()
        return op, rule
    if method in ("sym-cp", "accel-sym-cp"):
        op = CycleOperator(tuple(sets), mode="symmetric")
        rule = StepRule.symmetric() if method == "accel-sym-cp" else StepRule.unit()
        return op, rule
    op = CycleOperator(tuple(sets), mode="cyclic")
    rule = StepRule.gk_affine() if method == "gk-affine" else StepRule.unit()
    return op, rule


def _constraint_row_count(s) -> int:
    if isinstance(s, Hyperplane):
        return 1
    return s.dim - s.rank


def _solution_estimate(x0, sets) -> Optional[np.ndarray]:
    rows = sum(_constraint_row_count(s) for s in sets)
    if rows * x0.shape[0] > ORACLE_SIZE_LIMIT:
        return None
    return exact_projection(x0, sets)


def _write_trace(fh, trace, dists: Optional[list]) -> None:
    header = "k,t_k,successive_change"
    if dists is not None:
        header += ",dist_to_solution"
    fh.write(header + "\n")
    for i, k in enumerate(trace.ks):
        cols = [
            str(k),
            _fmt(trace.steps[i], TRACE_DIGITS),
            _fmt(trace.changes[i], TRACE_DIGITS),
        ]
        if dists is not None:
            cols.append(_fmt(dists[i], TRACE_DIGITS))
        fh.write(",".join(cols) + "\n")


def cmd_solve(args) -> int:
    x0, sets = parse_problem_file(args.problem)
    method = args.method

    worst = max(s.residual(x0) for s in sets)
    if worst <= FEASIBLE_X0_TOL * (1.0 + float(np.linalg.norm(x0))):
        with _open_out(args.out) as fh:
            fh.write("k,t_k,successive_change\n")
        _summary(method, True, 0, x0)
        return 0

    target = _solution_estimate(x0, sets)
    op, rule = build_operator(sets, method)
    cfg = SolveConfig(
        eps=args.eps,
        max_iter=args.max_iter,
        store_every=args.store_every,
    )
    trace = solve(op, rule, x0, cfg)

    dists = None
    final = trace.final
    if method in ("dr", "accel-dr"):
        final = sets[0].project(trace.final)
        if target is not None:
            dists = [
                float(np.linalg.norm(sets[0].project(z) - target))
                for z in trace.iterates
            ]
    elif target is not None:
        dists = [float(np.linalg.norm(z - target)) for z in trace.iterates]

    with _open_out(args.out) as fh:
        _write_trace(fh, trace, dists)
    _summary(method, trace.converged, trace.iterations, final)
    return 0 if trace.converged else 2


def _summary(method: str, converged: bool, iterations: int, final: np.ndarray) -> None:
    state = "converged" if converged else "hit the iteration limit"
    coords = " ".join(_fmt(v, TRACE_DIGITS) for v in final)
    print(f"{method}: {state} after {iterations} iterations", file=sys.stderr)
    print(f"final: {coords}", file=sys.stderr)


def angle_instance(theta: float, xstar: np.ndarray) -> list:
    """Two lines in the plane through xstar, one horizontal, one at angle theta."""
    first = Hyperplane(np.array([0.0, 1.0]), float(xstar[1]))
    normal = np.array([-np.sin(theta), np.cos(theta)])
    second = Hyperplane(normal, float(normal @ xstar))
    return [first, second]


def _unit_start(rng: np.random.Generator, dim: int, radius: float = 10.0) -> np.ndarray:
    v = rng.standard_normal(dim)
    nrm = float(np.linalg.norm(v))
    while nrm == 0.0:
        v = rng.standard_normal(dim)
        nrm = float(np.linalg.norm(v))
    return (radius / nrm) * v


def angle_sweep(
    thetas: Sequence[float],
    reps: int,
    eps: float,
    seed: int,
    max_iter: int,
) -> list[ExperimentRow]:
    """Iteration counts of cp and gk-affine across a grid of angles.

    Each angle gets its own random reference point; each replication gets
    its own random start of norm 10, shared by both methods.  Runs stop
    when the iterate is within eps of the reference point.
    """
    rows = []
    for j, theta in enumerate(thetas):
        inst_rng = np.random.default_rng([seed, j])
        xstar = inst_rng.standard_normal(2)
        op = CycleOperator(tuple(angle_instance(theta, xstar)), mode="cyclic")
        counts = {name: [] for name in SWEEP_METHODS}
        ok = True
        for r in range(reps):
            rep_rng = np.random.default_rng([seed, j, r])
            x0 = _unit_start(rep_rng, 2)
            for name in SWEEP_METHODS:
                rule = StepRule.gk_affine() if name == "gk-affine" else StepRule.unit()
                cfg = SolveConfig(
                    eps=eps, max_iter=max_iter, solution=xstar, store_every=0
                )
                tr = solve(op, rule, x0, cfg)
                counts[name].append(tr.iterations)
                ok = ok and tr.converged
        for name in SWEEP_METHODS:
            arr = np.array(counts[name], dtype=float)
            rows.append(
                ExperimentRow(
                    method=name,
                    reps=reps,
                    seed=seed,
                    theta=float(theta),
                    mean_iterations=float(arr.mean()),
                    std_iterations=float(arr.std()),
                    all_converged=ok,
                )
            )
    return rows


def hyperplane_bench(
    m: int,
    n: int,
    reps: int,
    eps: float,
    seed: int,
    methods: Sequence[str],
    max_iter: int,
) -> list[ExperimentRow]:
    """Iterations, residuals and timings on one random hyperplane system.

    The system A x = b has standard normal entries and is consistent by
    construction.  Runs stop when the change between sweeps drops below
    eps.  Memory grows as 8*n*m bytes for the matrix itself.
    """
    for name in methods:
        if name not in BENCH_METHODS:
            raise UsageError(f"unknown benchmark method {name!r}")
    inst_rng = np.random.default_rng([seed, m, n])
    a = inst_rng.standard_normal((n, m))
    xstar = inst_rng.standard_normal(m)
    b = a @ xstar
    sets = tuple(Hyperplane(a[i], float(b[i])) for i in range(n))

    results = {name: {"iters": [], "res": [], "time": []} for name in methods}
    ok = True
    for r in range(reps):
        rep_rng = np.random.default_rng([seed, m, n, r])
        x0 = _unit_start(rep_rng, m)
        for name in methods:
            solve_name = "gk-affine" if name == "accel-cp" else name
            op, rule = build_operator(sets, solve_name)
            cfg = SolveConfig(eps=eps, max_iter=max_iter, store_every=0)
            t0 = time.perf_counter()
            tr = solve(op, rule, x0, cfg)
            elapsed = time.perf_counter() - t0
            results[name]["iters"].append(tr.iterations)
            results[name]["res"].append(float(np.linalg.norm(a @ tr.final - b)))
            results[name]["time"].append(elapsed)
            ok = ok and tr.converged

    rows = []
    for name in methods:
        rows.append(
            ExperimentRow(
                method=name,
                reps=reps,
                seed=seed,
                m=m,
                n=n,
                mean_iterations=float(np.mean(results[name]["iters"])),
                mean_residual=float(np.mean(results[name]["res"])),
                mean_time_s=float(np.mean(results[name]["time"])),
                all_converged=ok,
            )
        )
    return rows


def write_sweep_csv(rows: Sequence[ExperimentRow], fh) -> None:
    fh.write(SWEEP_HEADER + "\n")
    for row in rows:
        fh.write(
            ",".join(
                [
                    _fmt(row.theta, TABLE_DIGITS),
                    row.method,
                    _fmt(row.mean_iterations, TABLE_DIGITS),
                    _fmt(row.std_iterations, TABLE_DIGITS),
                    str(row.reps),
                    str(row.seed),
                ]
            )
            + "\n"
        )


def write_bench_csv(rows: Sequence[ExperimentRow], fh) -> None:
    fh.write(BENCH_HEADER + "\n")
    for row in rows:
        fh.write(
            ",".join(
                [
                    str(row.m),
                    str(row.n),
                    row.method,
                    _fmt(row.mean_iterations, TABLE_DIGITS),
                    _fmt(row.mean_residual, TABLE_DIGITS),
                    _fmt(row.mean_time_s, TABLE_DIGITS),
                    str(row.reps),
                    str(row.seed),
                ]
            )
            + "\n"
        )


def _theta_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0.0:
        raise UsageError("theta step must be positive")
    if hi < lo:
        raise UsageError("theta range is empty")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def cmd_angle_sweep(args) -> int:
    thetas = _theta_grid(args.theta_min, args.theta_max, args.theta_step)
    rows = angle_sweep(thetas, args.reps, args.eps, args.seed, args.max_iter)
    with _open_out(args.out) as fh:
        write_sweep_csv(rows, fh)
    return 0 if all(r.all_converged for r in rows) else 2


def cmd_hyperplane_bench(args) -> int:
    n = args.n if args.n is not None else args.m // 2
    methods = [name.strip() for name in args.methods.split(",") if name.strip()]
    if not methods:
        raise UsageError("no benchmark methods given")
    rows = hyperplane_bench(
        args.m, n, args.reps, args.eps, args.seed, methods, args.max_iter
    )
    with _open_out(args.out) as fh:
        write_bench_csv(rows, fh)
    return 0 if all(r.all_converged for r in rows) else 2


def _positive(kind, what):
    def convert(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{what} must be a {kind.__name__}")
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{what} must be positive")
        return value

    return convert


def _nonnegative_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    if value < 0:
        raise argparse.ArgumentTypeError("expected a nonnegative integer")
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cycproj",
        description="cyclic projection solvers and benchmarks for affine feasibility",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, eps_default):
        p.add_argument("--out", default=None, help="output CSV path (default stdout)")
        p.add_argument("--seed", type=_nonnegative_int, default=0)
        p.add_argument("--eps", type=_positive(float, "eps"), default=eps_default)
        p.add_argument(
            "--max-iter", type=_positive(int, "max-iter"), default=100_000
        )

    p_solve = sub.add_parser("solve", help="run one method on a problem file")
    p_solve.add_argument("problem", help="problem file path")
    p_solve.add_argument("--method", choices=SOLVE_METHODS, default="cp")
    p_solve.add_argument(
        "--store-every",
        type=_nonnegative_int,
        default=1,
        help="keep every j-th trace row (0 keeps none)",
    )
    common(p_solve, eps_default=1e-9)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser(
        "angle-sweep", help="iteration counts for two lines at varied angles"
    )
    p_sweep.add_argument("--theta-min", type=float, default=0.01)
    p_sweep.add_argument("--theta-max", type=float, default=1.57)
    p_sweep.add_argument("--theta-step", type=_positive(float, "theta-step"), default=0.01)
    p_sweep.add_argument("--reps", type=_positive(int, "reps"), default=10)
    common(p_sweep, eps_default=1e-9)
    p_sweep.set_defaults(func=cmd_angle_sweep)

    p_bench = sub.add_parser(
        "hyperplane-bench", help="time methods on a random hyperplane system"
    )
    p_bench.add_argument("--m", type=_positive(int, "m"), default=500)
    p_bench.add_argument(
        "--n", type=_positive(int, "n"), default=None, help="defaults to m // 2"
    )
    p_bench.add_argument("--reps", type=_positive(int, "reps"), default=10)
    p_bench.add_argument(
        "--methods", default="cp,accel-cp", help="comma-separated method list"
    )
    common(p_bench, eps_default=1e-6)
    p_bench.set_defaults(func=cmd_hyperplane_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point returning the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        return args.func(args)
    except ProblemFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InfeasibleProblemError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main(sys.argv[1:]))
