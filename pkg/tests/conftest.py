"""Shared helpers for building random instances and independent oracles.

Oracles here deliberately avoid the library's own formulas: projections
come from least squares or KKT solves, line-search minimisers from grid
scans with parabolic refinement, and subspace samples from scipy null
spaces.
"""

import numpy as np
from scipy.linalg import null_space

from cycproj.geometry import HalfSpace, Hyperplane, Span


def orthonormal_columns(rng, d, r):
    """Random orthonormal (d, r) basis."""
    q, _ = np.linalg.qr(rng.standard_normal((d, max(r, 1))))
    return q[:, :r]


def random_hyperplane_through(rng, p):
    d = p.shape[0]
    a = rng.standard_normal(d)
    while np.linalg.norm(a) < 0.1:
        a = rng.standard_normal(d)
    return Hyperplane(a, float(a @ p))


def random_span_through(rng, p, r):
    d = p.shape[0]
    basis = orthonormal_columns(rng, d, r)
    # anchor somewhere else on the same flat, so anchor != p is exercised
    return Span(p + basis @ rng.standard_normal(r), basis)


def random_affine_instance(rng, d=None, n=None, linear=False, span_fraction=0.5):
    """Sets with a guaranteed common point; returns (sets, point).

    With linear=True the common point is the origin, so every set is a
    linear subspace.
    """
    if d is None:
        d = int(rng.integers(2, 9))
    if n is None:
        n = int(rng.integers(2, 5))
    p = np.zeros(d) if linear else 3.0 * rng.standard_normal(d)
    sets = []
    for _ in range(n):
        if d > 1 and rng.random() < span_fraction:
            r = int(rng.integers(1, d))
            sets.append(random_span_through(rng, p, r))
        else:
            sets.append(random_hyperplane_through(rng, p))
    return sets, p


def sample_point(rng, s, scale=2.0):
    """A point of the set, built without the library's projectors."""
    if isinstance(s, Hyperplane):
        a, b = s.normal, s.offset
        base = (b / (a @ a)) * a
        tangent = null_space(a[None, :])
        return base + tangent @ (scale * rng.standard_normal(tangent.shape[1]))
    if isinstance(s, Span):
        return s.anchor + s.basis @ (scale * rng.standard_normal(s.rank))
    raise TypeError(f"cannot sample from {type(s).__name__}")


def lstsq_projection(x, sets):
    """Independent best-approximation oracle via stacked normal equations.

    Builds each set's constraints from scratch (hyperplane rows directly,
    span complements via scipy null_space) and solves the KKT least
    squares problem with numpy.
    """
    d = x.shape[0]
    rows, vals = [], []
    for s in sets:
        if isinstance(s, Hyperplane):
            rows.append(s.normal[None, :])
            vals.append(np.array([s.offset]))
        elif isinstance(s, Span):
            if s.rank == 0:
                comp = np.eye(d)
            else:
                comp = null_space(s.basis.T)
            rows.append(comp.T)
            vals.append(comp.T @ s.anchor)
        else:
            raise TypeError(f"cannot stack {type(s).__name__}")
    a = np.vstack(rows)
    b = np.concatenate(vals)
    y, *_ = np.linalg.lstsq(a, a @ x - b, rcond=None)
    return x - y


def scan_line_min(x, direction, target, lo=-2.0, hi=3.0, step=1e-2):
    """Grid argmin of ||x + t*direction - target|| with parabolic refinement.

    The objective is an exact quadratic in t, so a three-point parabola
    through the best grid node recovers the true minimiser to roundoff.
    The window doubles while the minimiser sits on its edge.
    """
    for _ in range(60):
        ts = np.arange(lo, hi + 0.5 * step, step)
        pts = x[None, :] + ts[:, None] * direction[None, :] - target[None, :]
        vals = np.einsum("ij,ij->i", pts, pts)
        i = int(np.argmin(vals))
        if i == 0:
            lo -= hi - lo
            continue
        if i == len(ts) - 1:
            hi += hi - lo
            continue
        denom = vals[i - 1] - 2.0 * vals[i] + vals[i + 1]
        if denom <= 0.0:
            return float(ts[i])
        return float(ts[i] + 0.5 * step * (vals[i - 1] - vals[i + 1]) / denom)
    raise RuntimeError("line scan failed to bracket the minimiser")


def strictly_feasible_halfspaces(rng, d, n, margin_lo=0.1, margin_hi=1.0):
    """Half-spaces sharing a strictly interior point; returns (sets, point)."""
    m = 2.0 * rng.standard_normal(d)
    sets = []
    for _ in range(n):
        a = rng.standard_normal(d)
        while np.linalg.norm(a) < 0.1:
            a = rng.standard_normal(d)
        gamma = float(rng.uniform(margin_lo, margin_hi))
        sets.append(HalfSpace(a, float(a @ m) + gamma))
    return sets, m


def violating_point(rng, halfspaces, scale=4.0):
    """A random point pushed outside the first half-space."""
    d = halfspaces[0].dim
    x = scale * rng.standard_normal(d)
    h = halfspaces[0]
    slack = h.normal @ x - h.offset
    if slack <= 0.0:
        x = x + ((1.0 - slack) / (h.normal @ h.normal)) * h.normal
    assert h.normal @ x - h.offset > 0.0
    return x
