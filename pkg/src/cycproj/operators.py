"""Composite fixed-point operators built from projectors.

Cyclic and symmetric projection cascades, Douglas-Rachford compositions
and generic firmly quasi-nonexpansive cycles.  Every operator exposes
three evaluation routes that share one arithmetic path: plain apply,
apply with a full per-stage trace, and apply with accumulated squared
stage increments (the cheap form the accelerated solvers consume).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space

from .geometry import (
    AffineSet,
    AnySet,
    HalfSpace,
    InfeasibleProblemError,
    Span,
    as_vector,
    reflect,
)

__all__ = [
    "StageTrace",
    "CycleOperator",
    "DouglasRachfordOperator",
    "ProjectionOperator",
    "FqneCycle",
    "apply_with_trace",
    "fixset_dr",
    "shadow_project",
]

# Singular values below RANK_CUTOFF * sigma_max count as zero in null-space
# and feasibility computations.
RANK_CUTOFF = 1e-10
# Feasibility residual above this (scaled) bound marks an empty intersection.
FEAS_TOL = 1e-6


@dataclass
class StageTrace:
    """Intermediate points of one composite application.

    stages[0] is the input, stages[-1] the final output; stages[i] is the
    image of the input under the first i constituent maps.
    """

    stages: list[np.ndarray]

    @property
    def last(self) -> np.ndarray:
        return self.stages[-1]

    @property
    def increments_sq(self) -> np.ndarray:
        """Squared norms of consecutive stage differences."""
        return np.array(
            [
                float((a - b) @ (a - b))
                for a, b in zip(self.stages[:-1], self.stages[1:])
            ]
        )

    @property
    def total_sq(self) -> float:
        """Squared norm of input minus output."""
        g = self.stages[0] - self.stages[-1]
        return float(g @ g)


@dataclass(frozen=True)
class CycleOperator:
    """Sequential projections onto affine sets.

    mode "cyclic" applies the projectors once in order; mode "symmetric"
    goes forward through all sets and then back through all but the last,
    which makes the composite self-adjoint in the linear case.
    """

    sets: tuple
    mode: str = "cyclic"

    def __post_init__(self):
        sets = tuple(self.sets)
        if not sets:
            raise ValueError("cycle needs at least one set")
        if self.mode not in ("cyclic", "symmetric"):
            raise ValueError(f"unknown mode {self.mode!r}")
        dim = sets[0].dim
        for s in sets:
            if isinstance(s, HalfSpace):
                raise TypeError(
                    "CycleOperator is for affine sets; wrap half-space "
                    "projectors in an FqneCycle instead"
                )
            if s.dim != dim:
                raise ValueError("all sets must share one ambient dimension")
        if self.mode == "symmetric":
            stage_sets = sets + tuple(reversed(sets[:-1]))
        else:
            stage_sets = sets
        object.__setattr__(self, "sets", sets)
        object.__setattr__(self, "_stage_sets", stage_sets)

    @property
    def dim(self) -> int:
        return self.sets[0].dim

    @property
    def stage_count(self) -> int:
        """Number of projections in one application."""
        return len(self._stage_sets)

    def apply(self, x: np.ndarray) -> np.ndarray:
        for s in self._stage_sets:
            x = s.project(x)
        return x

    def apply_with_trace(self, x: np.ndarray) -> StageTrace:
        stages = [x]
        for s in self._stage_sets:
            x = s.project(x)
            stages.append(x)
        return StageTrace(stages)

    def apply_with_increments(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        inc = np.empty(len(self._stage_sets))
        for i, s in enumerate(self._stage_sets):
            x, inc[i] = s.project_with_gap(x)
        return x, inc


def _dr_half(x: np.ndarray, a: AffineSet, b: AffineSet) -> np.ndarray:
    # Averaged double reflection: 0.5 (x + R_b R_a x).
    return 0.5 * (x + reflect(reflect(x, a), b))


@dataclass(frozen=True)
class DouglasRachfordOperator:
    """Averaged double reflection through an ordered pair of affine sets.

    The plain operator reflects through `first`, then `second`, then
    averages with the input.  With symmetric=True the reversed-order
    operator is applied on top, giving a self-adjoint composite in the
    linear case.
    """

    first: AffineSet
    second: AffineSet
    symmetric: bool = False
    fixed_point: Optional[np.ndarray] = None

    def __post_init__(self):
        if isinstance(self.first, HalfSpace) or isinstance(self.second, HalfSpace):
            raise TypeError("Douglas-Rachford reflections require affine sets")
        if self.first.dim != self.second.dim:
            raise ValueError("both sets must share one ambient dimension")

    @property
    def dim(self) -> int:
        return self.first.dim

    def half_step(self, x: np.ndarray) -> np.ndarray:
        """One forward averaged double reflection."""
        return _dr_half(x, self.first, self.second)

    def apply(self, x: np.ndarray) -> np.ndarray:
        y = _dr_half(x, self.first, self.second)
        if self.symmetric:
            y = _dr_half(y, self.second, self.first)
        return y

    def apply_with_trace(self, x: np.ndarray) -> StageTrace:
        y = _dr_half(x, self.first, self.second)
        if not self.symmetric:
            return StageTrace([x, y])
        return StageTrace([x, y, _dr_half(y, self.second, self.first)])

    def apply_with_increments(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        trace = self.apply_with_trace(x)
        return trace.last, trace.increments_sq


@dataclass(frozen=True)
class ProjectionOperator:
    """A single projector viewed as a firmly quasi-nonexpansive map."""

    target: AnySet
    fixed_point: Optional[np.ndarray] = None

    @property
    def dim(self) -> int:
        return self.target.dim

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.target.project(x)

    def project_with_gap(self, x: np.ndarray) -> tuple[np.ndarray, float]:
        return self.target.project_with_gap(x)


@dataclass(frozen=True)
class FqneCycle:
    """Composition of arbitrary quasi-nonexpansive operators, in order.

    Operators only need an apply(x) method and a dim attribute; a
    project_with_gap method is used when present to avoid re-deriving
    stage increments.
    """

    operators: tuple

    def __post_init__(self):
        ops = tuple(self.operators)
        if not ops:
            raise ValueError("cycle needs at least one operator")
        dim = ops[0].dim
        for op in ops:
            if op.dim != dim:
                raise ValueError("all operators must share one ambient dimension")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self) -> int:
        return self.operators[0].dim

    @property
    def stage_count(self) -> int:
        return len(self.operators)

    def apply(self, x: np.ndarray) -> np.ndarray:
        for op in self.operators:
            x = op.apply(x)
        return x

    def apply_with_trace(self, x: np.ndarray) -> StageTrace:
        stages = [x]
        for op in self.operators:
            x = op.apply(x)
            stages.append(x)
        return StageTrace(stages)

    def apply_with_increments(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        inc = np.empty(len(self.operators))
        for i, op in enumerate(self.operators):
            if hasattr(op, "project_with_gap"):
                x, inc[i] = op.project_with_gap(x)
            else:
                y = op.apply(x)
                g = x - y
                inc[i] = float(g @ g)
                x = y
        return x, inc


def apply_with_trace(op, x: np.ndarray) -> StageTrace:
    """Trace any composite, or a plain sequence of operators, at x."""
    if isinstance(op, (list, tuple)):
        op = FqneCycle(tuple(op))
    return op.apply_with_trace(as_vector(x))


def _stacked_constraints(sets: Sequence[AffineSet]) -> tuple[np.ndarray, np.ndarray]:
    rows = []
    vals = []
    dim = sets[0].dim
    for s in sets:
        a, b = s.constraint_rows()
        rows.append(a)
        vals.append(b)
    if not rows:
        return np.zeros((0, dim)), np.zeros(0)
    return np.vstack(rows), np.concatenate(vals)


def _nullspace(a: np.ndarray) -> np.ndarray:
    if a.shape[0] == 0:
        return np.eye(a.shape[1])
    return null_space(a, rcond=RANK_CUTOFF)


def fixset_dr(c1: AffineSet, c2: AffineSet) -> Span:
    """Fixed set of the Douglas-Rachford composite for an affine pair.

    The fixed points form the affine set (C1 n C2) + N1 n N2 where N1, N2
    are the orthogonal complements of the parallel subspaces.  Raises
    InfeasibleProblemError when the pair has empty intersection.
    """
    if isinstance(c1, HalfSpace) or isinstance(c2, HalfSpace):
        raise TypeError("fixed-set computation requires affine sets")
    if c1.dim != c2.dim:
        raise ValueError("both sets must share one ambient dimension")
    a, b = _stacked_constraints([c1, c2])
    if a.shape[0] == 0:
        anchor = np.zeros(c1.dim)
    else:
        y, *_ = np.linalg.lstsq(a, b, rcond=RANK_CUTOFF)
        if np.linalg.norm(a @ y - b) > FEAS_TOL * (1.0 + np.linalg.norm(b)):
            raise InfeasibleProblemError(
                "the two sets have no common point; the fixed set is empty"
            )
        anchor = y
    # Direction of the intersection: joint null space of both constraint
    # blocks.  Orthogonal part: null space of the stacked parallel bases.
    direction = _nullspace(a)
    spans = np.hstack([c1.parallel_basis(), c2.parallel_basis()])
    ortho = _nullspace(spans.T)
    basis = np.hstack([direction, ortho])
    return Span(anchor, basis)


def shadow_project(z: np.ndarray, c1: AffineSet, c2: AffineSet) -> np.ndarray:
    """Shadow of a Douglas-Rachford iterate: its projection onto the first set."""
    if c1.dim != c2.dim:
        raise ValueError("both sets must share one ambient dimension")
    return c1.project(z)
