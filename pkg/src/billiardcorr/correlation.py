"""Two-point correlation grids: closed forms, ensemble estimates and comparisons.

The closed form for a signed image set is

    C(x, x + r) = sum_C chi(C) J0(k |x + r - C x|),

a sum of Bessel functions centred on the images of the probe.  Grids are
square, centred on ``r = 0`` and stored as ``values[j, i]`` (y rows).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from . import io as bio
from .grids import check_grid, displacement_grid, grid_points
from .randwave import DEFAULT_COMPONENTS, ensemble_moments
from .specfun import bessel_j0
from .symmetry import (ImageSet, conjugate, corridor_contains, corridor_images, corridor_modes,
                       default_cutoff, translation)

_IMAGE_CHUNK = 128
# images closer than this (relative to their distance from the origin) are one point
_COINCIDENT = 1e-11


@dataclass(frozen=True, eq=False)
class CorrelationGrid:
    """``C(x, x + r)`` on a square displacement grid centred at ``r = 0``.

    ``mask`` (optional) flags the cells that carry data; cells outside a
    billiard are excluded from comparisons and averages.
    """

    probe: tuple
    k: float
    side: float
    resolution: int
    values: np.ndarray
    kind: str = "theory"
    sample_count: int = 0
    mask: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        check_grid(self.side, self.resolution)
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.resolution, self.resolution):
            raise ValueError("values must be resolution x resolution")
        if not np.all(np.isfinite(vals)):
            raise ValueError("correlation values must be finite")
        if self.kind not in ("theory", "empirical", "residual"):
            raise ValueError(f"unknown grid kind {self.kind!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "probe", tuple(float(v) for v in self.probe))
        if self.mask is not None:
            m = np.array(self.mask, dtype=bool)
            if m.shape != vals.shape:
                raise ValueError("mask shape differs from values")
            m.setflags(write=False)
            object.__setattr__(self, "mask", m)

    @property
    def spacing(self) -> float:
        return self.side / (self.resolution - 1)

    def displacements(self) -> np.ndarray:
        return displacement_grid(self.side, self.resolution)

    def points(self) -> np.ndarray:
        return grid_points(self.probe, self.side, self.resolution)

    def valid(self) -> np.ndarray:
        if self.mask is None:
            return np.ones(self.values.shape, dtype=bool)
        return self.mask

    def same_geometry(self, other: "CorrelationGrid", tol: float = 1e-12) -> bool:
        return (self.resolution == other.resolution
                and abs(self.side - other.side) <= tol * self.side
                and np.allclose(self.probe, other.probe, atol=tol * self.side, rtol=0))

    def header(self) -> dict:
        h = {"type": "correlation", "probe": self.probe, "k": self.k, "side": self.side,
             "resolution": self.resolution, "kind": self.kind,
             "sample_count": self.sample_count}
        for key, value in self.meta.items():
            h[f"meta.{key}"] = value
        return h

    def to_csv(self, path) -> Path:
        path = Path(path)
        head = self.header()
        if self.mask is not None:
            mask_path = path.with_name(path.stem + ".mask.csv")
            bio.write_table(mask_path, {"type": "mask", "resolution": self.resolution},
                            self.mask.astype(float))
            head["mask_file"] = mask_path.name
        return bio.write_table(path, head, self.values)

    @classmethod
    def from_csv(cls, path) -> "CorrelationGrid":
        path = Path(path)
        h, data = bio.read_table(path)
        if h.get("type") != "correlation":
            raise ValueError(f"{path} is not a correlation grid")
        mask = None
        if "mask_file" in h:
            _, m = bio.read_table(path.with_name(h["mask_file"]))
            mask = m > 0.5
        meta = {key[5:]: value for key, value in h.items() if key.startswith("meta.")}
        return cls(bio.parse_floats(h["probe"]), float(h["k"]), float(h["side"]),
                   int(h["resolution"]), data, h["kind"], int(h["sample_count"]), mask, meta)


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Angular means of a correlation grid in equal-width radial bins.

    ``radii`` are bin centres; ``mean_radii`` the average ``|r|`` of the
    cells that fell in each bin.
    """

    radii: np.ndarray
    means: np.ndarray
    counts: np.ndarray
    mean_radii: np.ndarray
    k: float = float("nan")

    def __post_init__(self):
        if len(self.radii) > 1 and np.any(np.diff(self.radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        if np.any(np.asarray(self.counts) < 1):
            raise ValueError("every reported bin needs at least one cell")

    def to_csv(self, path) -> Path:
        data = np.column_stack([self.radii, self.means, self.counts, self.mean_radii])
        return bio.write_table(path, {"type": "radial_profile", "k": self.k,
                                      "bins": len(self.radii)},
                               data, ["radius", "mean", "count", "mean_radius"])

    @classmethod
    def from_csv(cls, path) -> "RadialProfile":
        h, data = bio.read_table(path)
        return cls(data[:, 0], data[:, 1], data[:, 2].astype(int), data[:, 3],
                   float(h.get("k", "nan")))


# --- closed forms -------------------------------------------------------------

def _merge_coincident(centers: np.ndarray, parities: np.ndarray):
    """Combine images that land on the same point (probe on a mirror line).

    Their Bessel terms are equal, so opposite signs cancel exactly; summing
    them separately would leave rounding noise from the image positions.
    """
    tol = _COINCIDENT * max(1.0, float(np.max(np.abs(centers))))
    pairs = cKDTree(centers).query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return centers, np.asarray(parities, dtype=float)
    n = len(centers)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, label = connected_components(graph, directed=False)
    weight = np.bincount(label, weights=parities)
    first = np.full(weight.size, n)
    np.minimum.at(first, label, np.arange(n))
    keep = weight != 0
    return centers[first[keep]], weight[keep]


def image_sum(images: ImageSet, k: float, probe, points) -> np.ndarray:
    """``sum_C chi(C) J0(k |p - C probe|)`` at ``points`` (trailing axis 2)."""
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 2)
    centers, par = _merge_coincident(images.images_of(np.asarray(probe, dtype=float)),
                                     images.parities)
    out = np.zeros(len(flat))
    for lo in range(0, len(centers), _IMAGE_CHUNK):
        c = centers[lo:lo + _IMAGE_CHUNK]
        d = np.hypot(flat[None, :, 0] - c[:, None, 0], flat[None, :, 1] - c[:, None, 1])
        out += par[lo:lo + _IMAGE_CHUNK] @ bessel_j0(k * d)
    return out.reshape(pts.shape[:-1])


def theory_correlation(images: ImageSet, k: float, probe, side: float,
                       resolution: int) -> CorrelationGrid:
    """Closed-form correlation around ``probe`` for the signed image set."""
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    check_grid(side, resolution)
    probe = np.asarray(probe, dtype=float).reshape(2)
    if not np.all(images.contains(probe)):
        raise ValueError("probe outside the physical domain")
    vals = image_sum(images, k, probe, grid_points(probe, side, resolution))
    meta = {"images": len(images), "geometry": images.kind}
    if "cutoff" in images.params:
        meta["cutoff"] = images.params["cutoff"]
    if "n" in images.params:
        meta["n"] = images.params["n"]
    if "a" in images.params:
        meta["a"] = images.params["a"]
    return CorrelationGrid(tuple(probe), float(k), float(side), int(resolution), vals,
                           "theory", 0, None, meta)


def corridor_set(a: float, probe, cutoff: float, y_shift: float = 0.0) -> ImageSet:
    """Corridor images of ``probe`` given in a frame shifted by ``y_shift``
    (the corridor is ``|y - y_shift| <= a/2``)."""
    probe = np.asarray(probe, dtype=float).reshape(2)
    canon = probe - np.array([0.0, y_shift])
    images = corridor_images(a, canon, cutoff)
    if y_shift:
        images = conjugate(images, translation((0.0, y_shift)))
    return images


def corridor_theory(k: float, a: float, probe, side: float, resolution: int,
                    cutoff: float | None = None, y_shift: float = 0.0) -> CorrelationGrid:
    """Truncated image-sum correlation in the corridor ``x >= 0, |y - y_shift| <= a/2``.

    The default cutoff puts the J0 envelope at the truncation distance
    below ``1e-3``.
    """
    if cutoff is None:
        cutoff = default_cutoff(k)
    images = corridor_set(a, probe, cutoff, y_shift)
    grid = theory_correlation(images, k, probe, side, resolution)
    meta = dict(grid.meta, y_shift=y_shift)
    return CorrelationGrid(grid.probe, grid.k, grid.side, grid.resolution, grid.values,
                           "theory", 0, None, meta)


def corridor_truncation_change(k: float, a: float, probe, side: float, resolution: int,
                               cutoff: float | None = None, y_shift: float = 0.0):
    """Sup-norm change of the corridor theory grid when the cutoff doubles.

    Returns ``(change, grid_at_cutoff, grid_at_double)``.
    """
    if cutoff is None:
        cutoff = default_cutoff(k)
    g1 = corridor_theory(k, a, probe, side, resolution, cutoff, y_shift)
    g2 = corridor_theory(k, a, probe, side, resolution, 2 * cutoff, y_shift)
    return float(np.max(np.abs(g1.values - g2.values))), g1, g2


def corridor_mode_sum(k: float, a: float, probe, points, y_shift: float = 0.0) -> np.ndarray:
    """Corridor correlation as the transverse-mode series (the lattice limit of
    the image sum, by Poisson summation)."""
    _, q, w = corridor_modes(k, a)
    l = np.arange(1, len(q) + 1)
    pts = np.asarray(points, dtype=float)
    flat = pts.reshape(-1, 2)
    x0, y0 = float(probe[0]), float(probe[1]) - y_shift
    f0 = w * np.sin(q * x0) * np.sin(math.pi * l * (y0 - 0.5 * a) / a)
    fx = np.sin(np.outer(flat[:, 0], q))
    fy = np.sin(math.pi * np.outer(flat[:, 1] - y_shift - 0.5 * a, l) / a)
    return ((fx * fy) @ f0).reshape(pts.shape[:-1])


# --- ensembles ------------------------------------------------------------------

def empirical_correlation(samples, normalization: float = 1.0) -> CorrelationGrid:
    """Mean of ``psi(probe) psi(probe + r)`` over ``(value at probe, FieldGrid)`` pairs.

    The probe is the grid centre.  Accumulation runs in the order given.
    """
    if not normalization > 0:
        raise ValueError("normalization must be positive")
    acc = None
    first = None
    n = 0
    for value, grid in samples:
        if first is None:
            first = grid
            acc = np.zeros(grid.values.shape)
        elif not first.same_geometry(grid):
            raise ValueError("samples do not share one grid geometry")
        acc += float(value) * grid.values
        n += 1
    if n < 2:
        raise ValueError("need at least two samples")
    return CorrelationGrid(first.center, first.k, first.side, first.resolution,
                           acc / (n * normalization), "empirical", n)


def randwave_correlation(images: ImageSet, k: float, probe, side: float, resolution: int,
                         n_waves: int, M: int = DEFAULT_COMPONENTS, seed: int = 0,
                         threads: int = 1) -> CorrelationGrid:
    """Monte Carlo correlation of the adapted random-wave ensemble.

    The projections are normalised so the far-field variance is one; no
    empirical rescaling is applied.
    """
    cross, sq, csq, n = ensemble_moments(images, k, probe, side, resolution, n_waves, M,
                                         seed, threads)
    meta = {"probe_variance": csq / n, "components": M, "seed": seed, "source": "randwave",
            "geometry": images.kind}
    return CorrelationGrid(tuple(np.asarray(probe, dtype=float)), float(k), float(side),
                           int(resolution), cross / n, "empirical", n, None, meta)


def eigenstate_correlation(states, probe, side: float, resolution: int,
                           scale: str = "area") -> CorrelationGrid:
    """Correlation averaged over billiard eigenstates.

    Each unit-norm state is multiplied by ``sqrt(area)`` (``scale="area"``) so
    its mean square is one.  Cells outside the billiard are masked.
    """
    states = list(states)
    if len(states) < 2:
        raise ValueError("need at least two eigenstates")
    boundary = states[0].boundary
    probe = np.asarray(probe, dtype=float).reshape(2)
    if not boundary.contains(probe):
        raise ValueError("probe outside the billiard")
    pts = grid_points(probe, side, resolution)
    inside = boundary.contains(pts.reshape(-1, 2)).reshape(resolution, resolution)
    factor = boundary.area if scale == "area" else 1.0
    acc = np.zeros((resolution, resolution))
    c = resolution // 2
    for s in states:
        v = s(pts, outside="zero")
        centre = s(probe) if resolution % 2 == 0 else v[c, c]
        acc += centre * v
    vals = factor * acc / len(states)
    ks = np.array([s.k for s in states])
    meta = {"source": "bim", "geometry": boundary.name, "k_min": float(ks.min()),
            "k_max": float(ks.max())}
    return CorrelationGrid(tuple(probe), float(np.mean(ks)), float(side), int(resolution),
                           vals, "empirical", len(states), inside, meta)


def corridor_mode_theory(k: float, a: float, probe, side: float, resolution: int,
                         y_shift: float = 0.0) -> CorrelationGrid:
    """Corridor theory grid from the transverse-mode series (no truncation)."""
    check_grid(side, resolution)
    probe = np.asarray(probe, dtype=float).reshape(2)
    if not corridor_contains(probe - np.array([0.0, y_shift]), a):
        raise ValueError("probe outside the physical domain")
    vals = corridor_mode_sum(k, a, probe, grid_points(probe, side, resolution), y_shift)
    meta = {"geometry": "corridor", "a": a, "y_shift": y_shift, "method": "modes"}
    return CorrelationGrid(tuple(probe), float(k), float(side), int(resolution), vals,
                           "theory", 0, None, meta)


def mean_theory(theory_for, ks) -> CorrelationGrid:
    """Average of the theory grids ``theory_for(k)`` over an ensemble's wavenumbers."""
    ks = np.asarray(ks, dtype=float)
    if ks.size == 0:
        raise ValueError("no wavenumbers to average over")
    acc = None
    for kv in ks:
        g = theory_for(float(kv))
        acc = g.values.copy() if acc is None else acc + g.values
    return CorrelationGrid(g.probe, float(np.mean(ks)), g.side, g.resolution,
                           acc / len(ks), "theory", 0, None, dict(g.meta, averaged=len(ks)))


# --- comparisons ----------------------------------------------------------------

def error_metric(c_num: CorrelationGrid, c_th: CorrelationGrid, mask=None) -> float:
    """``sum (c_num - c_th)^2 / sum c_th^2`` over the cells of both grids.

    Cells masked out in either grid (or by ``mask``) are skipped.  Sums are
    exactly rounded, hence independent of cell order.
    """
    if not c_num.same_geometry(c_th):
        raise ValueError("grids differ in geometry")
    keep = c_num.valid() & c_th.valid()
    if mask is not None:
        keep &= np.asarray(mask, dtype=bool)
    th = c_th.values[keep]
    diff = c_num.values[keep] - th
    den = math.fsum((th * th).tolist())
    if den == 0.0:
        raise ValueError("reference grid is identically zero")
    return math.fsum((diff * diff).tolist()) / den


def residual_grid(c_num: CorrelationGrid, c_th: CorrelationGrid) -> CorrelationGrid:
    if not c_num.same_geometry(c_th):
        raise ValueError("grids differ in geometry")
    keep = c_num.valid() & c_th.valid()
    vals = np.where(keep, c_num.values - c_th.values, 0.0)
    mask = None if keep.all() else keep
    return CorrelationGrid(c_th.probe, c_th.k, c_th.side, c_th.resolution, vals,
                           "residual", c_num.sample_count, mask)


def angular_average(grid: CorrelationGrid, bins: int | None = None) -> RadialProfile:
    """Equal-width radial bins on ``[0, side/2]``; corner cells are dropped."""
    if bins is None:
        bins = int(math.ceil(grid.resolution / 2))
    if bins < 4:
        raise ValueError("need at least 4 bins")
    r = np.hypot(*np.moveaxis(grid.displacements(), -1, 0))
    rmax = 0.5 * grid.side
    keep = grid.valid() & (r <= rmax * (1 + 1e-12))
    width = rmax / bins
    idx = np.minimum((r[keep] / width).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    sums = np.bincount(idx, weights=grid.values[keep], minlength=bins)
    rsum = np.bincount(idx, weights=r[keep], minlength=bins)
    ok = counts > 0
    centers = width * (np.arange(bins) + 0.5)
    return RadialProfile(centers[ok], sums[ok] / counts[ok], counts[ok],
                         rsum[ok] / counts[ok], grid.k)
