"""Closed-form solutions and convergence-rate bounds for affine problems.

Everything here is direct linear algebra on small to medium problems:
the exact best approximation via stacked constraints, principal-angle
style cosines between subspaces, and the per-iteration contraction
constant those cosines induce for cyclic projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import null_space

from .geometry import AffineSet, HalfSpace, InfeasibleProblemError, as_vector
from .operators import RANK_CUTOFF, _stacked_constraints

__all__ = [
    "RateReport",
    "exact_projection",
    "friederichs_cosine",
    "rate_constant",
]

# Residual bound (scaled by 1 + ||b||) above which stacked constraints are
# declared inconsistent.
FEASIBILITY_TOL = 1e-6


def exact_projection(x0, sets: Sequence[AffineSet]) -> np.ndarray:
    """Nearest point of the intersection of affine sets to x0.

    Stacks all sets' constraint rows into A x = b and removes the
    minimum-norm correction A^+ (A x0 - b) from x0, with singular values
    below RANK_CUTOFF * sigma_max treated as zero.  Raises
    InfeasibleProblemError when the stacked system is inconsistent.
    """
    x0 = as_vector(x0)
    if not sets:
        raise ValueError("need at least one set")
    for s in sets:
        if isinstance(s, HalfSpace):
            raise TypeError("exact projection requires affine sets")
        if s.dim != x0.shape[0]:
            raise ValueError("sets and x0 must share one ambient dimension")
    a, b = _stacked_constraints(list(sets))
    if a.shape[0] == 0:
        return x0.copy()
    r = a @ x0 - b
    y, *_ = np.linalg.lstsq(a, r, rcond=RANK_CUTOFF)
    p = x0 - y
    if np.linalg.norm(a @ p - b) > FEASIBILITY_TOL * (1.0 + np.linalg.norm(b)):
        raise InfeasibleProblemError("the sets have no common point")
    return p


def _as_basis(u) -> np.ndarray:
    """Coerce a basis given as a (d, r) array or a list of vectors."""
    if isinstance(u, np.ndarray) and u.ndim == 2:
        b = np.asarray(u, dtype=float)
    else:
        vecs = [as_vector(v) for v in u]
        if not vecs:
            raise ValueError("basis must contain at least the ambient dimension info")
        b = np.column_stack(vecs)
    if b.shape[1] > 0:
        drift = float(np.max(np.abs(b.T @ b - np.eye(b.shape[1]))))
        if drift > 1e-8:
            raise ValueError(f"basis is not orthonormal (drift {drift:.3e})")
    return b


def _orth_columns(b: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column space with an absolute rank cutoff.

    Deflated bases started from unit columns, so singular values below
    RANK_CUTOFF mean content that was subtracted away, not scale.
    """
    if b.shape[1] == 0:
        return b
    left, sing, _ = np.linalg.svd(b, full_matrices=False)
    return left[:, sing > RANK_CUTOFF]


def friederichs_cosine(u, v) -> float:
    """Cosine of the Friederichs angle between two linear subspaces.

    Takes orthonormal bases (as (d, r) arrays or vector lists), removes
    the common intersection from both, and returns the largest remaining
    cross correlation, clamped to [0, 1].  Subspaces that coincide or
    contain one another yield 0, matching the supremum over an empty set.
    """
    ub = _as_basis(u)
    vb = _as_basis(v)
    if ub.shape[0] != vb.shape[0]:
        raise ValueError("both subspaces must share one ambient dimension")
    d = ub.shape[0]
    if ub.shape[1] == 0 or vb.shape[1] == 0:
        return 0.0
    # Intersection as the joint null space of both orthogonal projectors.
    stack = np.vstack([np.eye(d) - ub @ ub.T, np.eye(d) - vb @ vb.T])
    w = null_space(stack, rcond=RANK_CUTOFF)
    if w.shape[1] > 0:
        ub = ub - w @ (w.T @ ub)
        vb = vb - w @ (w.T @ vb)
    ub = _orth_columns(ub)
    vb = _orth_columns(vb)
    if ub.shape[1] == 0 or vb.shape[1] == 0:
        return 0.0
    top = float(np.linalg.norm(ub.T @ vb, ord=2))
    return min(max(top, 0.0), 1.0)


@dataclass(frozen=True)
class RateReport:
    """Per-cycle contraction data for cyclic projections.

    cosines[i] is the Friederichs cosine between set i's parallel
    subspace and the intersection of all later ones; constant is the
    induced per-iteration error factor.
    """

    cosines: tuple[float, ...]
    constant: float

    def bound(self, k):
        """Error-reduction bound after k iterations: constant ** k."""
        return self.constant ** np.asarray(k, dtype=float)


def rate_constant(sets: Sequence[AffineSet]) -> RateReport:
    """Contraction constant of one cyclic-projection pass over affine sets.

    With c_i the cosine between the i-th parallel subspace and the
    intersection of the later ones, the distance to the solution shrinks
    by at least sqrt(1 - prod(1 - c_i^2)) per pass.
    """
    sets = list(sets)
    if len(sets) < 2:
        raise ValueError("need at least two sets")
    for s in sets:
        if isinstance(s, HalfSpace):
            raise TypeError("rate analysis requires affine sets")
    dim = sets[0].dim
    bases = [s.parallel_basis() for s in sets]
    # Tail intersections in constraint form: stack the complement rows of
    # every later parallel subspace, then convert back to a spanning basis.
    cosines = []
    for i in range(len(sets) - 1):
        rows = []
        for basis in bases[i + 1:]:
            if basis.shape[1] == 0:
                rows.append(np.eye(dim))
            else:
                q, _ = np.linalg.qr(basis, mode="complete")
                rows.append(q[:, basis.shape[1]:].T)
        stacked = np.vstack(rows) if rows else np.zeros((0, dim))
        if stacked.shape[0] == 0:
            tail = np.eye(dim)
        else:
            tail = null_space(stacked, rcond=RANK_CUTOFF)
        cosines.append(friederichs_cosine(bases[i], tail))
    prod = 1.0
    for c in cosines:
        prod *= 1.0 - c * c
    constant = float(np.sqrt(min(max(1.0 - prod, 0.0), 1.0)))
    return RateReport(cosines=tuple(cosines), constant=constant)
