"""Nystrom discretisation of the Helmholtz boundary operators on a billiard.

The boundary is parametrised by ``t in [0, 2pi)``; every segment receives an
equal-``t`` share proportional to its length, and the map from ``t`` to arc
length inside a segment is Kress's sigmoidal grading, which clusters nodes at
both segment ends (corners).  A single closed smooth segment (the circle) is
left ungraded.  Nodes sit at ``t_i = 2pi (i + 1/2) / N`` so none falls on a
corner.

Log-singular parts are integrated with Kress's product weights
``R_j(t) = -(2pi/n) sum_{m<n} cos(m(t-t_j))/m - (pi/n^2) cos(n(t-t_j))``.

The eigenvalue operator is ``K' - I/2`` where
``K'u(x) = int dPhi(x, y)/dnu(x) u(y) ds(y)`` and ``Phi = (i/4) H0(k|x-y|)``.
A null vector ``u`` is the normal derivative of a Dirichlet eigenfunction,
which is recovered as the single-layer potential ``psi = S u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..specfun import EULER_GAMMA, bessel_all
from .geometry import BoundaryCurve

DEFAULT_GRADING = 3
MIN_NODES = 32
MIN_SEGMENT_NODES = 8


def kress_grading(u, p: int = DEFAULT_GRADING):
    """Kress's graded map of [0, 1] onto itself and its derivative.

    Derivatives up to order ``p - 1`` vanish at both ends; the slope at the
    midpoint is 2.
    """
    u = np.asarray(u, dtype=float)
    s = 2 * math.pi * u
    c3 = 1.0 / p - 0.5

    def v(s):
        return c3 * ((math.pi - s) / math.pi) ** 3 + (s - math.pi) / (p * math.pi) + 0.5

    def dv(s):
        return -3 * c3 * (math.pi - s) ** 2 / math.pi ** 3 + 1.0 / (p * math.pi)

    a, b = v(s), v(2 * math.pi - s)
    f, g = a ** p, b ** p
    df = p * a ** (p - 1) * dv(s)
    dg = -p * b ** (p - 1) * dv(2 * math.pi - s)
    frac = f / (f + g)
    dfrac = 2 * math.pi * (df * g - f * dg) / (f + g) ** 2
    return frac, dfrac


def node_count(boundary: BoundaryCurve, k: float, nodes_per_wavelength: float) -> int:
    """``ceil(npw * k * L / 2pi)``, at least ``MIN_NODES``, rounded up to even."""
    n = math.ceil(nodes_per_wavelength * k * boundary.total_length / (2 * math.pi))
    n = max(n, MIN_NODES, MIN_SEGMENT_NODES * len(boundary.segments))
    return n + (n % 2)


def _allocate(boundary: BoundaryCurve, n_total: int) -> list[int]:
    lengths = np.array([s.length for s in boundary.segments])
    raw = n_total * lengths / lengths.sum()
    counts = np.maximum(MIN_SEGMENT_NODES, np.floor(raw)).astype(int)
    while counts.sum() < n_total:
        counts[np.argmax(raw - counts)] += 1
    while counts.sum() > n_total:
        idx = np.argmax(counts - raw)
        counts[idx] -= 1
    return counts.tolist()


@dataclass
class Discretization:
    """Quadrature nodes on a boundary (all arrays have leading length ``N``)."""

    boundary: BoundaryCurve
    n_nodes: int
    counts: list
    grading: int
    t: np.ndarray
    points: np.ndarray
    normals: np.ndarray
    speed: np.ndarray
    curvature: np.ndarray

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid weights in arc length, ``(2pi/N) |x'(t)|``."""
        return (2 * math.pi / self.n_nodes) * self.speed

    @property
    def max_spacing(self) -> float:
        return float(np.max(self.weights))


def _graded(boundary: BoundaryCurve) -> bool:
    return not (len(boundary.segments) == 1 and not boundary.joint_is_corner(0))


def parametrize(boundary: BoundaryCurve, counts, t, grading: int = DEFAULT_GRADING):
    """Points, unit normals, speeds ``|x'(t)|`` and curvatures at parameters ``t``."""
    t = np.mod(np.asarray(t, dtype=float), 2 * math.pi)
    n_total = sum(counts)
    edges = 2 * math.pi * np.concatenate([[0], np.cumsum(counts)]) / n_total
    seg_idx = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, len(counts) - 1)
    graded = _graded(boundary)
    points = np.empty((len(t), 2))
    tangents = np.empty((len(t), 2))
    speed = np.empty(len(t))
    curv = np.empty(len(t))
    for j, seg in enumerate(boundary.segments):
        sel = seg_idx == j
        if not np.any(sel):
            continue
        dt = edges[j + 1] - edges[j]
        u = (t[sel] - edges[j]) / dt
        if graded:
            frac, dfrac = kress_grading(u, grading)
        else:
            frac, dfrac = u, np.ones_like(u)
        points[sel] = seg.point(frac)
        tangents[sel] = seg.tangent(frac)
        speed[sel] = seg.length * dfrac / dt
        curv[sel] = seg.curvature(frac)
    normals = np.stack([tangents[:, 1], -tangents[:, 0]], axis=1)
    return points, normals, speed, curv


def discretize(boundary: BoundaryCurve, n_nodes: int,
               grading: int = DEFAULT_GRADING) -> Discretization:
    if n_nodes % 2:
        raise ValueError("node count must be even")
    counts = _allocate(boundary, n_nodes)
    t = 2 * math.pi * (np.arange(n_nodes) + 0.5) / n_nodes
    pts, nrm, speed, curv = parametrize(boundary, counts, t, grading)
    return Discretization(boundary, n_nodes, counts, grading, t, pts, nrm, speed, curv)


def kress_log_weights(n_nodes: int) -> np.ndarray:
    """Matrix ``R[i, j]`` integrating ``ln(4 sin^2((t_i - t)/2)) f(t)`` exactly
    for trigonometric polynomials of degree < N/2."""
    n = n_nodes // 2
    q = np.arange(n_nodes)
    d = 2 * math.pi * q / n_nodes
    m = np.arange(1, n)
    row = (-(2 * math.pi / n) * (np.cos(np.outer(d, m)) / m).sum(axis=1)
           - (math.pi / n ** 2) * np.cos(n * d))
    idx = (q[:, None] - q[None, :]) % n_nodes
    return row[idx]


class KernelAssembler:
    """Caches the k-independent geometry of a discretisation.

    ``matrix(k)`` returns the ``N x N`` complex matrix of ``K' - I/2``.
    """

    def __init__(self, disc: Discretization):
        self.disc = disc
        n_nodes = disc.n_nodes
        x = disc.points
        diff = x[:, None, :] - x[None, :, :]
        r = np.hypot(diff[..., 0], diff[..., 1])
        np.fill_diagonal(r, 1.0)
        self.r = r
        # (y - x) . nu(x) / r, evaluated at the target x_i
        self.cos_target = -(diff[..., 0] * disc.normals[:, None, 0]
                            + diff[..., 1] * disc.normals[:, None, 1]) / r
        np.fill_diagonal(self.cos_target, 0.0)
        dt = disc.t[:, None] - disc.t[None, :]
        with np.errstate(divide="ignore"):
            logterm = np.log(4.0 * np.sin(0.5 * dt) ** 2)
        np.fill_diagonal(logterm, 0.0)
        self.logterm = logterm
        self.R = kress_log_weights(n_nodes)
        self.h = math.pi / (n_nodes // 2)
        self.diag_dl = -disc.curvature * disc.speed / (4 * math.pi)
        self._offdiag = ~np.eye(n_nodes, dtype=bool)

    def matrix(self, k: float) -> np.ndarray:
        if k <= 0:
            raise ValueError("wavenumber must be positive")
        disc = self.disc
        _, j1, _, y1 = bessel_all(k * self.r)
        speed_src = disc.speed[None, :]
        geom = self.cos_target * speed_src
        kern = (0.25j * k) * (j1 + 1j * y1) * geom
        k1 = -(k / (4 * math.pi)) * j1 * geom
        k2 = kern - k1 * self.logterm
        np.fill_diagonal(k1, 0.0)
        np.fill_diagonal(k2, self.diag_dl)
        a = self.R * k1 + self.h * k2
        a[np.diag_indices_from(a)] -= 0.5
        return a

    def single_layer(self, k: float) -> np.ndarray:
        """Matrix of ``S`` on the boundary (for Dirichlet residual checks)."""
        disc = self.disc
        j0, _, y0, _ = bessel_all(k * self.r)
        speed_src = disc.speed[None, :]
        m = 0.25j * (j0 + 1j * y0) * speed_src
        m1 = -(1 / (4 * math.pi)) * j0 * speed_src
        m2 = m - m1 * self.logterm
        np.fill_diagonal(m1, -disc.speed / (4 * math.pi))
        diag = (0.25j - EULER_GAMMA / (2 * math.pi)
                - np.log(0.5 * k * disc.speed) / (2 * math.pi)) * disc.speed
        np.fill_diagonal(m2, diag)
        return self.R * m1 + self.h * m2


def assemble_kernel(boundary: BoundaryCurve, k: float, nodes_per_wavelength: float = 10.0,
                    n_nodes: int | None = None, grading: int = DEFAULT_GRADING) -> np.ndarray:
    """Dense Nystrom matrix of ``K' - I/2`` at wavenumber ``k``."""
    if k <= 0:
        raise ValueError("wavenumber must be positive")
    if nodes_per_wavelength < 6:
        raise ValueError("nodes_per_wavelength must be at least 6")
    if n_nodes is None:
        n_nodes = node_count(boundary, k, nodes_per_wavelength)
    disc = discretize(boundary, n_nodes, grading)
    return KernelAssembler(disc).matrix(k)
