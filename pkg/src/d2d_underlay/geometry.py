"""Disc sampling, two-circle intersection area and the distance densities used
by the single-hop outage integral.

All densities accept scalars or numpy arrays and broadcast elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# relative tolerance for boundary classification (containment / disjoint)
BOUNDARY_RTOL = 1e-9


class DegenerateGeometryError(ValueError):
    """A conditioning distance is zero, so the conditional density is undefined."""


class Point2D(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class DistanceParams:
    """Cell radius ``R`` and cluster radius ``r`` in meters."""

    R: float
    r: float

    def __post_init__(self):
        if not (0 < self.r < self.R):
            raise ValueError(f"need 0 < r < R, got r={self.r}, R={self.R}")


def sample_uniform_disc(center, radius: float, rng: np.random.Generator, size=None):
    """Draw point(s) uniformly from the disc of ``radius`` about ``center``.

    Uses the inverse-CDF radius ``radius * sqrt(u)``; no rejection. With
    ``size=None`` a single :class:`Point2D` is returned, otherwise an array of
    shape ``(*size, 2)``. ``center`` may itself be an array of shape
    ``(..., 2)`` broadcastable against ``size``.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    c = np.asarray(center, dtype=float)
    if size is None:
        u, v = rng.random(2)
        rho = radius * np.sqrt(u)
        ang = 2.0 * np.pi * v
        return Point2D(float(c[0] + rho * np.cos(ang)), float(c[1] + rho * np.sin(ang)))
    shape = (size,) if np.isscalar(size) else tuple(size)
    uv = rng.random((*shape, 2))
    u, v = uv[..., 0], uv[..., 1]
    rho = radius * np.sqrt(u)
    ang = 2.0 * np.pi * v
    offs = np.stack([rho * np.cos(ang), rho * np.sin(ang)], axis=-1)
    return c + offs


def _acos(x):
    return np.arccos(np.clip(x, -1.0, 1.0))


def circle_intersection_area(d_max, r, d_SC):
    """Area of ``disc(S, d_max) ∩ disc(C, r)`` where ``|S - C| = d_SC``.

    Explicit case split: one disc inside the other gives the smaller disc's
    area, separated discs give zero, otherwise the lens formula.
    """
    a = np.asarray(d_max, dtype=float)
    b = np.asarray(r, dtype=float)
    d = np.asarray(d_SC, dtype=float)
    a, b, d = np.broadcast_arrays(a, b, d)
    small = np.minimum(a, b)
    big = np.maximum(a, b)
    tol = BOUNDARY_RTOL * np.maximum(big, d)

    contained = d + small <= big + tol
    disjoint = d >= a + b - tol

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        dd = np.where(contained | disjoint, 1.0, d)
        aa = np.where(a > 0, a, 1.0)
        bb = np.where(b > 0, b, 1.0)
        t1 = a * a * _acos((dd * dd + a * a - b * b) / (2.0 * dd * aa))
        t2 = b * b * _acos((dd * dd + b * b - a * a) / (2.0 * dd * bb))
        k = (-dd + a + b) * (dd + a - b) * (dd - a + b) * (dd + a + b)
        lens = t1 + t2 - 0.5 * np.sqrt(np.maximum(k, 0.0))

    out = np.where(contained, np.pi * small * small, np.where(disjoint, 0.0, lens))
    out = np.where(small <= 0, 0.0, out)
    return out if out.ndim else float(out)


def _ret(x):
    return x if np.ndim(x) else float(x)


def pdf_d_cb(d, p: DistanceParams):
    """Cluster-center to base-station distance: ``2d/(R-r)^2`` on ``[0, R-r]``."""
    d = np.asarray(d, dtype=float)
    L = p.R - p.r
    return _ret(np.where((d >= 0) & (d <= L), 2.0 * d / L**2, 0.0))


def pdf_d_sc(d, p: DistanceParams):
    """Source to cluster-center distance: ``2d/r^2`` on ``[0, r]``."""
    d = np.asarray(d, dtype=float)
    return _ret(np.where((d >= 0) & (d <= p.r), 2.0 * d / p.r**2, 0.0))


def pdf_d_mb(d, p: DistanceParams):
    """Macro-user to base-station distance: ``2d/R^2`` on ``[0, R]``."""
    d = np.asarray(d, dtype=float)
    return _ret(np.where((d >= 0) & (d <= p.R), 2.0 * d / p.R**2, 0.0))


def _disc_point_distance_pdf(rho, c, a):
    """Density of the distance ``rho`` from a fixed point to a point uniform in
    a disc of radius ``a`` whose center lies ``c`` away from the fixed point.

    The clamp of the arccos argument to -1 covers the ``c < a`` inner region
    where the density is ``2 rho / a^2``.
    """
    rho = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        psi = (rho * rho + c * c - a * a) / (2.0 * rho * c)
        val = 2.0 * rho / (np.pi * a * a) * _acos(psi)
    tol = BOUNDARY_RTOL * np.maximum(np.maximum(rho, c), a)
    inside = (rho > 0) & (np.abs(rho - c) <= a + tol)
    return np.where(inside, val, 0.0)


def pdf_d_sb_given(d_SB, d_SC, d_CB):
    """Source to base-station distance given ``d_SC`` and ``d_CB``, as printed:
    the source is treated as uniform in the disc of radius ``d_SC`` about the
    cluster center."""
    if np.any(np.asarray(d_SC) <= 0) or np.any(np.asarray(d_CB) <= 0):
        raise DegenerateGeometryError("d_SC and d_CB must be positive")
    return _ret(_disc_point_distance_pdf(d_SB, d_CB, d_SC))


def pdf_d_cm(d, p: DistanceParams):
    """Cluster-center to macro-user distance, piecewise form with the ``theta``
    and ``phi`` branch on ``[r, 2R - r]``."""
    d = np.asarray(d, dtype=float)
    R, r = p.R, p.r
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        theta = _acos((d * d + r * r - 2 * R * r) / (2 * d * (R - r)))
        phi = _acos((d * d - r * r + 2 * R * r) / (2 * d * R))
        outer = d * (2 * theta - np.sin(2 * theta)) / (np.pi * R**2) + d * (
            2 * phi - np.sin(2 * phi)
        ) / (np.pi * (R - r) ** 2)
    inner = 2.0 * d / R**2
    out = np.where((d >= 0) & (d < r), inner, np.where((d >= r) & (d <= 2 * R - r), outer, 0.0))
    return _ret(out)


def pdf_d_md_given(d_MD, d_CM, p: DistanceParams):
    """Macro-user to destination distance given ``d_CM``; destination uniform
    in the cluster disc."""
    if np.any(np.asarray(d_CM) <= 0):
        raise DegenerateGeometryError("d_CM must be positive")
    return _ret(_disc_point_distance_pdf(d_MD, d_CM, p.r))
