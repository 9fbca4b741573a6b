"""Step-size rules and the relaxed fixed-point iteration driver.

The iteration is x_{k+1} = x_k + t_k (T(x_k) - x_k) for a composite
operator T.  Unit steps give the classical method; the other rules pick
t_k by exact line search toward the solution set, computable from the
current point alone (plus per-stage increments of one application of T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import as_vector
from .operators import CycleOperator, DouglasRachfordOperator, StageTrace

__all__ = [
    "NumericalFailureError",
    "StepRule",
    "SolveConfig",
    "IterationTrace",
    "solve",
    "step_gk_linear",
    "step_gk_affine",
    "step_symmetric",
    "step_dr",
    "step_oracle",
]

# Relative fixed-point threshold: below it the step degenerates to t = 1.
FIX_TOL_DEFAULT = 1e-14
# A set counts as containing the origin (linear) within this residual.
LINEAR_ORIGIN_TOL = 1e-10
# An oracle witness must be fixed by the operator within this relative bound.
ORACLE_WITNESS_TOL = 1e-8

_VARIANTS = ("unit", "gk-linear", "gk-affine", "symmetric", "symmetric-dr", "oracle")


class NumericalFailureError(RuntimeError):
    """A non-finite value appeared during iteration."""

    def __init__(self, iteration: int):
        super().__init__(f"non-finite value at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class StepRule:
    """Choice of relaxation parameter t_k, with an optional witness point."""

    variant: str
    m: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.variant not in _VARIANTS:
            raise ValueError(f"unknown step rule {self.variant!r}")
        if self.variant == "oracle":
            if self.m is None:
                raise ValueError("oracle rule needs a witness point m")
            object.__setattr__(self, "m", as_vector(self.m))
        elif self.m is not None:
            raise ValueError("only the oracle rule carries a witness point")

    @classmethod
    def unit(cls) -> "StepRule":
        return cls("unit")

    @classmethod
    def gk_linear(cls) -> "StepRule":
        return cls("gk-linear")

    @classmethod
    def gk_affine(cls) -> "StepRule":
        return cls("gk-affine")

    @classmethod
    def symmetric(cls) -> "StepRule":
        return cls("symmetric")

    @classmethod
    def symmetric_dr(cls) -> "StepRule":
        return cls("symmetric-dr")

    @classmethod
    def oracle(cls, m) -> "StepRule":
        return cls("oracle", as_vector(m))


@dataclass
class SolveConfig:
    """Iteration limits, termination rule and trace thinning.

    When `solution` is given, the run stops once ||x_k - solution|| < eps;
    otherwise it stops when the successive change drops below eps.
    store_every=j keeps every j-th per-iteration record (0 keeps none,
    which the large benchmarks use); the final state is always available.
    """

    eps: float = 1e-9
    max_iter: int = 100_000
    solution: Optional[np.ndarray] = None
    fix_tol: float = FIX_TOL_DEFAULT
    store_every: int = 1

    def __post_init__(self):
        if not self.eps > 0.0:
            raise ValueError("eps must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")
        if self.fix_tol < 0.0:
            raise ValueError("fix_tol must be nonnegative")
        if self.store_every < 0:
            raise ValueError("store_every must be nonnegative")
        if self.solution is not None:
            self.solution = as_vector(self.solution)


@dataclass
class IterationTrace:
    """Outcome of one solve, with per-update records (possibly thinned).

    Row i describes completed update ks[i]: the step taken, the iterate it
    produced, the change it caused, and (when the solution is known) the
    distance and contraction factor it achieved.
    """

    start: np.ndarray
    final: np.ndarray
    iterations: int
    converged: bool
    ks: list[int] = field(default_factory=list)
    steps: list[float] = field(default_factory=list)
    changes: list[float] = field(default_factory=list)
    iterates: list[np.ndarray] = field(default_factory=list)
    dists: Optional[list[float]] = None
    factors: Optional[list[Optional[float]]] = None
    initial_dist: Optional[float] = None


def _reject_fixed(gap: float, ref: float, fix_tol: float) -> None:
    if gap <= fix_tol * (1.0 + ref):
        raise ValueError(
            "point is fixed within tolerance; the caller must take t = 1"
        )


def step_gk_linear(x, qx, fix_tol: float = FIX_TOL_DEFAULT) -> float:
    """Exact line-search step toward the origin: <x - Qx, x> / ||x - Qx||^2.

    Valid when every set in the cycle passes through the origin.
    """
    x = as_vector(x)
    d = x - as_vector(qx)
    den = float(d @ d)
    _reject_fixed(math.sqrt(den), float(np.linalg.norm(x)), fix_tol)
    return float(d @ x) / den


def step_gk_affine(trace: StageTrace, fix_tol: float = FIX_TOL_DEFAULT) -> float:
    """Line-search step from one traced application of a projection cycle.

    Equals 1/2 plus the sum of squared stage increments over twice the
    squared total displacement, which minimises the distance to the
    intersection projection along the update direction without knowing
    any intersection point.
    """
    den = trace.total_sq
    ref = float(np.linalg.norm(trace.stages[0]))
    _reject_fixed(math.sqrt(den), ref, fix_tol)
    return 0.5 + float(np.sum(trace.increments_sq)) / (2.0 * den)


def step_symmetric(trace: StageTrace, fix_tol: float = FIX_TOL_DEFAULT) -> float:
    """Line-search step for the symmetric cycle, from its 2n-stage trace.

    The symmetric composite over n sets is the plain cycle over the 2n-1
    sets (forward then backward), so the step is the same stage-increment
    formula evaluated on that longer trace.
    """
    if len(trace.stages) % 2 != 0:
        raise ValueError(
            f"symmetric trace must have an even stage count, got {len(trace.stages)}"
        )
    return step_gk_affine(trace, fix_tol)


def step_dr(z, half, full, fix_tol: float = FIX_TOL_DEFAULT) -> float:
    """Line-search step for the symmetric Douglas-Rachford composite.

    Takes the current point, the image under the forward half, and the
    image under the full composite.
    """
    z = as_vector(z)
    half = as_vector(half)
    full = as_vector(full)
    g = z - full
    den = float(g @ g)
    _reject_fixed(math.sqrt(den), float(np.linalg.norm(z)), fix_tol)
    a = z - half
    b = half - full
    return 0.5 + (float(a @ a) + float(b @ b)) / (2.0 * den)


def step_oracle(x, qx, m, fix_tol: float = FIX_TOL_DEFAULT) -> float:
    """Line-search step toward a known solution-set point m.

    For affine cycles this matches the trace-based step exactly; for
    general firmly quasi-nonexpansive cycles it is bounded below by it.
    """
    x = as_vector(x)
    d = x - as_vector(qx)
    den = float(d @ d)
    _reject_fixed(math.sqrt(den), float(np.linalg.norm(x)), fix_tol)
    return float(d @ (x - as_vector(m))) / den


def _validate_rule(op, rule: StepRule) -> None:
    v = rule.variant
    if v == "gk-affine":
        if not (isinstance(op, CycleOperator) and op.mode == "cyclic"):
            raise ValueError("gk-affine rule drives a cyclic CycleOperator")
    elif v == "gk-linear":
        if not (isinstance(op, CycleOperator) and op.mode == "cyclic"):
            raise ValueError("gk-linear rule drives a cyclic CycleOperator")
        zero = np.zeros(op.dim)
        for s in op.sets:
            if s.residual(zero) > LINEAR_ORIGIN_TOL:
                raise ValueError(
                    "gk-linear rule needs every set to pass through the origin"
                )
    elif v == "symmetric":
        if not (isinstance(op, CycleOperator) and op.mode == "symmetric"):
            raise ValueError("symmetric rule drives a symmetric CycleOperator")
    elif v == "symmetric-dr":
        if not (isinstance(op, DouglasRachfordOperator) and op.symmetric):
            raise ValueError(
                "symmetric-dr rule drives a symmetric DouglasRachfordOperator"
            )
    elif v == "oracle":
        m = rule.m
        drift = float(np.linalg.norm(op.apply(m) - m))
        if drift > ORACLE_WITNESS_TOL * (1.0 + float(np.linalg.norm(m))):
            raise ValueError(
                f"oracle witness is not fixed by the operator (drift {drift:.3e})"
            )


def solve(op, rule: StepRule, x0, cfg: SolveConfig) -> IterationTrace:
    """Run the relaxed iteration of op from x0 under the given step rule.

    Symmetric rules first advance the start point by one application of
    the composite, per their derivation; reported iterations count
    updates after that.  Stops on the configured criterion, on reaching
    an exact fixed point, or at max_iter (flagged non-converged).
    """
    x0 = as_vector(x0)
    if x0.shape[0] != op.dim:
        raise ValueError(f"operator lives in R^{op.dim}, x0 in R^{x0.shape[0]}")
    _validate_rule(op, rule)

    variant = rule.variant
    needs_increments = variant in ("gk-affine", "symmetric", "symmetric-dr")
    sol = cfg.solution
    x = op.apply(x0) if variant in ("symmetric", "symmetric-dr") else x0.copy()

    trace = IterationTrace(start=x, final=x, iterations=0, converged=False)
    if sol is not None:
        trace.dists = []
        trace.factors = []
        trace.initial_dist = float(np.linalg.norm(x - sol))
        if trace.initial_dist < cfg.eps:
            trace.converged = True
            return trace

    prev_dist = trace.initial_dist
    last_row = None
    k = 0
    while k < cfg.max_iter:
        if needs_increments:
            y, inc = op.apply_with_increments(x)
        else:
            y = op.apply(x)
            inc = None

        change = None
        if variant == "unit":
            t = 1.0
            x_new = y
        else:
            d = y - x
            gap_sq = float(d @ d)
            gap = math.sqrt(gap_sq)
            if gap <= cfg.fix_tol * (1.0 + float(np.linalg.norm(x))):
                t = 1.0
                x_new = y
            elif variant == "gk-linear":
                t = -float(d @ x) / gap_sq
                x_new = x + t * d
            elif variant == "oracle":
                t = -float(d @ (x - rule.m)) / gap_sq
                x_new = x + t * d
            else:
                t = 0.5 + float(inc.sum()) / (2.0 * gap_sq)
                x_new = x + t * d
            change = abs(t) * gap
            if not math.isfinite(t):
                raise NumericalFailureError(k + 1)
        k += 1

        dist = factor = None
        if sol is not None:
            dist = float(np.linalg.norm(x_new - sol))
            if not math.isfinite(dist):
                raise NumericalFailureError(k)
            if prev_dist is not None and prev_dist > cfg.eps * cfg.eps:
                factor = dist / prev_dist
            prev_dist = dist

        if change is None and (sol is None or cfg.store_every > 0):
            g = x_new - x
            change = math.sqrt(float(g @ g))
        if sol is None:
            if not math.isfinite(change):
                raise NumericalFailureError(k)
            done = change < cfg.eps
        else:
            done = dist < cfg.eps

        if cfg.store_every > 0:
            last_row = (k, t, change, x_new, dist, factor)
            if k % cfg.store_every == 0:
                _record(trace, last_row)
                last_row = None

        stalled = not done and _same_point(x_new, x)
        x = x_new
        if done or stalled:
            trace.converged = done
            break
    else:
        # max_iter exhausted without meeting the criterion
        trace.converged = False

    if last_row is not None:
        _record(trace, last_row)
    trace.iterations = k
    trace.final = x
    return trace


def _record(trace: IterationTrace, row) -> None:
    k, t, change, x_new, dist, factor = row
    trace.ks.append(k)
    trace.steps.append(float(t))
    trace.changes.append(float(change) if change is not None else float("nan"))
    trace.iterates.append(x_new)
    if trace.dists is not None:
        trace.dists.append(dist)
        trace.factors.append(factor)


def _same_point(a: np.ndarray, b: np.ndarray) -> bool:
    return np.array_equal(a, b)
