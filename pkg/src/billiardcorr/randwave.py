"""Gaussian random plane-wave fields and their boundary-adapted projections.

A realisation is the real field

    psi(x) = sqrt(2/M) sum_j a_j cos(k n_j . x + delta_j),

with standard normal ``a_j`` and uniform ``delta_j``, so ``<psi^2> = 1``.  The
adapted field is ``nu * sum_A chi(A) psi(A x)`` over a signed image set.

Every realisation draws from its own Philox stream keyed by ``(seed, index)``,
so an ensemble does not depend on the order (or thread) in which members are
generated.  Within a realisation components are drawn in index order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import io as bio
from .grids import check_grid, grid_offsets, grid_points
from .symmetry import ImageSet, apply, corridor_modes

DEFAULT_COMPONENTS = 256
_POINT_CHUNK = 2048


def rng_for(seed: int, index: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ValueError("seed and index must be non-negative")
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def _frozen(arr):
    arr = np.array(arr, dtype=float).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PlaneWaveSum:
    """One realisation: wavenumber and per-component direction, amplitude, phase."""

    k: float
    theta: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    seed: int = 0
    index: int = 0

    def __post_init__(self):
        for name in ("theta", "amplitude", "phase"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if not self.k > 0:
            raise ValueError("wavenumber must be positive")
        m = len(self.theta)
        if m < 1:
            raise ValueError("a plane-wave sum needs at least one component")
        if len(self.amplitude) != m or len(self.phase) != m:
            raise ValueError("component arrays differ in length")
        for arr in (self.theta, self.amplitude, self.phase):
            if not np.all(np.isfinite(arr)):
                raise ValueError("component values must be finite")

    @property
    def M(self) -> int:
        return len(self.theta)

    @property
    def wavevectors(self) -> np.ndarray:
        return self.k * np.stack([np.cos(self.theta), np.sin(self.theta)], axis=1)

    def same_as(self, other: "PlaneWaveSum") -> bool:
        return (self.k == other.k and self.M == other.M
                and np.array_equal(self.theta, other.theta)
                and np.array_equal(self.amplitude, other.amplitude)
                and np.array_equal(self.phase, other.phase))


def sample_free_wave(k: float, M: int = DEFAULT_COMPONENTS, seed: int = 0,
                     index: int = 0) -> PlaneWaveSum:
    """Isotropic realisation: directions and phases uniform, amplitudes normal."""
    if not k > 0:
        raise ValueError("wavenumber must be positive")
    if int(M) != M or M < 1:
        raise ValueError("component count must be a positive integer")
    rng = rng_for(seed, index)
    theta = rng.uniform(0.0, 2 * math.pi, M)
    amp = rng.standard_normal(M)
    phase = rng.uniform(0.0, 2 * math.pi, M)
    return PlaneWaveSum(float(k), theta, amp, phase, int(seed), int(index))


def sample_corridor_wave(k: float, a: float, M: int = DEFAULT_COMPONENTS, seed: int = 0,
                         index: int = 0) -> PlaneWaveSum:
    """Realisation whose wavevectors have ``k_y = +-pi l / a``.

    ``l`` is drawn with probability proportional to ``1 / q_l`` (the
    isotropic density of ``k_y`` restricted to the corridor's transverse
    modes) and both signs of ``k_x`` and ``k_y`` are equally likely.  The
    field is ``2a``-periodic in y, as :func:`symmetry.corridor_cell_group`
    requires.
    """
    if int(M) != M or M < 1:
        raise ValueError("component count must be a positive integer")
    l, q, _ = corridor_modes(k, a)
    p = (1.0 / q) / np.sum(1.0 / q)
    rng = rng_for(seed, index)
    pick = rng.choice(len(l), size=M, p=p)
    sx = np.where(rng.integers(0, 2, M) == 1, 1.0, -1.0)
    sy = np.where(rng.integers(0, 2, M) == 1, 1.0, -1.0)
    amp = rng.standard_normal(M)
    phase = rng.uniform(0.0, 2 * math.pi, M)
    theta = np.mod(np.arctan2(sy * math.pi * l[pick] / a, sx * q[pick]), 2 * math.pi)
    return PlaneWaveSum(float(k), theta, amp, phase, int(seed), int(index))


def sample_wave(k: float, images: ImageSet, M: int = DEFAULT_COMPONENTS, seed: int = 0,
                index: int = 0) -> PlaneWaveSum:
    """The realisation suited to ``images`` (corridor-periodic or isotropic)."""
    if images.params.get("periodic"):
        if abs(images.params["k"] - k) > 1e-12 * k:
            raise ValueError("image set was built for a different wavenumber")
        return sample_corridor_wave(k, images.params["a"], M, seed, index)
    return sample_free_wave(k, M, seed, index)


def _free_values(wave: PlaneWaveSum, pts: np.ndarray) -> np.ndarray:
    kv = wave.wavevectors
    out = np.empty(len(pts))
    scale = math.sqrt(2.0 / wave.M)
    for lo in range(0, len(pts), _POINT_CHUNK):
        arg = pts[lo:lo + _POINT_CHUNK] @ kv.T + wave.phase
        out[lo:lo + _POINT_CHUNK] = scale * np.sum(wave.amplitude * np.cos(arg), axis=1)
    return out


def evaluate_free(wave: PlaneWaveSum, p):
    """Free field at point(s) ``p`` (trailing axis 2)."""
    arr = np.asarray(p, dtype=float)
    vals = _free_values(wave, arr.reshape(-1, 2)).reshape(arr.shape[:-1])
    return float(vals) if vals.ndim == 0 else vals


def gradient_free(wave: PlaneWaveSum, p):
    """Gradient of the free field, shape ``p.shape``."""
    arr = np.asarray(p, dtype=float)
    flat = arr.reshape(-1, 2)
    kv = wave.wavevectors
    s = np.sin(flat @ kv.T + wave.phase) * wave.amplitude
    grad = -math.sqrt(2.0 / wave.M) * (s @ kv)
    return grad.reshape(arr.shape)


def _check_compatible(wave: PlaneWaveSum, images: ImageSet):
    if not images.params.get("periodic"):
        return
    a = images.params["a"]
    ky = wave.k * np.sin(wave.theta) * a / math.pi
    if np.max(np.abs(ky - np.round(ky))) > 1e-8 * max(1.0, wave.k * a):
        raise ValueError("the corridor cell projection needs waves with k_y = pi l / a "
                         "(see sample_corridor_wave)")


def _adapted_values(wave: PlaneWaveSum, images: ImageSet, pts: np.ndarray) -> np.ndarray:
    total = np.zeros(len(pts))
    for elem in images:
        total += elem.parity * _free_values(wave, apply(elem, pts))
    return images.normalization * total


def evaluate_adapted(wave: PlaneWaveSum, images: ImageSet, p):
    """Projected field ``nu * sum_A chi(A) psi(A p)`` at points inside the domain."""
    _check_compatible(wave, images)
    arr = np.asarray(p, dtype=float)
    flat = arr.reshape(-1, 2)
    if not np.all(images.contains(flat)):
        raise ValueError("point outside the physical domain of the image set")
    vals = _adapted_values(wave, images, flat).reshape(arr.shape[:-1])
    return float(vals) if vals.ndim == 0 else vals


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Field samples on a square grid; ``origin`` is the lower-left grid point."""

    origin: tuple
    side: float
    resolution: int
    values: np.ndarray
    k: float = float("nan")
    seed: int = -1
    index: int = -1

    def __post_init__(self):
        check_grid(self.side, self.resolution)
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.resolution, self.resolution):
            raise ValueError("values must be resolution x resolution")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))

    @property
    def center(self) -> tuple:
        h = 0.5 * self.side
        return (self.origin[0] + h, self.origin[1] + h)

    @property
    def spacing(self) -> float:
        return self.side / (self.resolution - 1)

    def points(self) -> np.ndarray:
        return grid_points(self.center, self.side, self.resolution)

    def center_value(self) -> float:
        if self.resolution % 2 == 0:
            raise ValueError("even resolution: the centre is not a grid point")
        c = self.resolution // 2
        return float(self.values[c, c])

    def same_geometry(self, other, tol: float = 1e-12) -> bool:
        return (self.resolution == other.resolution
                and abs(self.side - other.side) <= tol * self.side
                and np.allclose(self.origin, other.origin, atol=tol * self.side, rtol=0))

    def header(self) -> dict:
        return {"type": "field", "origin": self.origin, "side": self.side,
                "resolution": self.resolution, "k": self.k, "seed": self.seed,
                "index": self.index}

    def to_csv(self, path):
        return bio.write_table(path, self.header(), self.values)

    @classmethod
    def from_csv(cls, path) -> "FieldGrid":
        h, data = bio.read_table(path)
        return cls(bio.parse_floats(h["origin"]), float(h["side"]), int(h["resolution"]),
                   data, float(h.get("k", "nan")), int(h.get("seed", -1)),
                   int(h.get("index", -1)))


def _grid_origin(center, side):
    c = np.asarray(center, dtype=float).reshape(2)
    return (c[0] - 0.5 * side, c[1] - 0.5 * side)


def sample_grid(wave: PlaneWaveSum, images: ImageSet, center, side: float,
                resolution: int) -> FieldGrid:
    """Adapted field on the square grid centred at ``center``.

    Only the centre has to lie in the physical domain; grid points beyond a
    wall get the signed continuation of the projection (it is what the
    closed-form correlation describes there too).
    """
    _check_compatible(wave, images)
    check_grid(side, resolution)
    if not np.all(images.contains(np.asarray(center, dtype=float))):
        raise ValueError("grid centre outside the physical domain of the image set")
    pts = grid_points(center, side, resolution).reshape(-1, 2)
    vals = _adapted_values(wave, images, pts).reshape(resolution, resolution)
    return FieldGrid(_grid_origin(center, side), side, resolution, vals, wave.k,
                     wave.seed, wave.index)


class GridSampler:
    """Fast adapted-field grids for ensembles.

    Image elements are folded into effective plane waves (wavevector
    ``L^T k``, phase ``delta + k . shift``) and the field on the grid is a
    product of x and y factors, ``Re sum_w A_w e^{i Kx x} e^{i (Ky y + phi)}``,
    evaluated as one real matrix product.  Values agree with
    :func:`sample_grid` to rounding.
    """

    def __init__(self, images: ImageSet, center, side: float, resolution: int):
        check_grid(side, resolution)
        self.images = images
        self.center = np.asarray(center, dtype=float).reshape(2)
        if not np.all(images.contains(self.center)):
            raise ValueError("grid centre outside the physical domain of the image set")
        self.side = float(side)
        self.resolution = int(resolution)
        self.offsets = grid_offsets(side, resolution)
        self._lin = np.array([e.linear for e in images])
        self._shift = np.array([e.shift for e in images])
        self._par = images.parities

    def values(self, wave: PlaneWaveSum) -> np.ndarray:
        _check_compatible(wave, self.images)
        kv = wave.wavevectors
        # effective wavevectors K = L^T k for every (image, component)
        keff = np.einsum("aij,mi->amj", self._lin, kv).reshape(-1, 2)
        ph = (wave.phase[None, :] + self._shift @ kv.T
              + np.einsum("amj,j->am", keff.reshape(len(self._par), -1, 2), self.center))
        amp = (self._par[:, None] * wave.amplitude[None, :]).reshape(-1)
        ph = ph.reshape(-1)
        # grid offsets are equally spaced, so the exponentials along each axis
        # are geometric sequences (rounding grows like n * eps)
        ex = _geometric(keff[:, 0], self.offsets)
        ey = _geometric(keff[:, 1], self.offsets) * np.exp(1j * ph)
        left = np.concatenate([amp * ey.real, -amp * ey.imag], axis=1)
        right = np.concatenate([ex.real, ex.imag], axis=1)
        scale = self.images.normalization * math.sqrt(2.0 / wave.M)
        return scale * (left @ right.T)

    def grid(self, wave: PlaneWaveSum) -> FieldGrid:
        return FieldGrid(_grid_origin(self.center, self.side), self.side, self.resolution,
                         self.values(wave), wave.k, wave.seed, wave.index)


def _geometric(kk: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """``exp(i outer(offsets, kk))`` for equally spaced offsets."""
    n = len(offsets)
    h = offsets[1] - offsets[0]
    rows = np.empty((n, len(kk)), dtype=complex)
    rows[0] = np.exp(1j * kk * offsets[0])
    rows[1:] = np.exp(1j * kk * h)
    return np.cumprod(rows, axis=0)


def ensemble_grids(images: ImageSet, k: float, center, side: float, resolution: int,
                   n_waves: int, M: int = DEFAULT_COMPONENTS, seed: int = 0,
                   start: int = 0):
    """Yield ``(value at centre, FieldGrid)`` for realisations ``start .. start+n-1``."""
    sampler = GridSampler(images, center, side, resolution)
    for idx in range(start, start + n_waves):
        g = sampler.grid(sample_wave(k, images, M, seed, idx))
        yield g.center_value(), g


def ensemble_moments(images: ImageSet, k: float, center, side: float, resolution: int,
                     n_waves: int, M: int = DEFAULT_COMPONENTS, seed: int = 0,
                     threads: int = 1, block: int = 64):
    """Sums over realisations of ``psi(center) psi(center + r)`` and ``psi^2``.

    Returns ``(sum_cross, sum_sq, sum_center_sq, n)``.  Blocks of ``block``
    realisations are reduced in index order, so the result does not depend on
    ``threads``.
    """
    if n_waves < 1:
        raise ValueError("need at least one realisation")
    if resolution % 2 == 0:
        raise ValueError("resolution must be odd so the probe is a grid point")
    sampler = GridSampler(images, center, side, resolution)
    c = resolution // 2

    def run(lo):
        hi = min(lo + block, n_waves)
        cross = np.zeros((resolution, resolution))
        sq = np.zeros((resolution, resolution))
        csq = 0.0
        for idx in range(lo, hi):
            v = sampler.values(sample_wave(k, images, M, seed, idx))
            cross += v[c, c] * v
            sq += v * v
            csq += v[c, c] ** 2
        return cross, sq, csq

    starts = list(range(0, n_waves, block))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    cross = np.zeros((resolution, resolution))
    sq = np.zeros((resolution, resolution))
    csq = 0.0
    for pc, ps, pcs in parts:
        cross += pc
        sq += ps
        csq += pcs
    return cross, sq, csq, n_waves


def waves_to_csv(path, waves) -> None:
    """Write realisations as rows ``index, component, theta, amplitude, phase``."""
    rows = []
    waves = list(waves)
    for w in waves:
        for j in range(w.M):
            rows.append([w.index, j, w.theta[j], w.amplitude[j], w.phase[j]])
    if not waves:
        raise ValueError("no realisations to write")
    head = {"type": "waves", "k": waves[0].k, "seed": waves[0].seed, "count": len(waves),
            "components": waves[0].M}
    bio.write_table(path, head, np.array(rows),
                    ["index", "component", "theta", "amplitude", "phase"])


def waves_from_csv(path) -> list:
    h, data = bio.read_table(path)
    k, seed = float(h["k"]), int(h["seed"])
    out = []
    for idx in np.unique(data[:, 0]).astype(int):
        rows = data[data[:, 0] == idx]
        rows = rows[np.argsort(rows[:, 1])]
        out.append(PlaneWaveSum(k, rows[:, 2], rows[:, 3], rows[:, 4], seed, int(idx)))
    return out
