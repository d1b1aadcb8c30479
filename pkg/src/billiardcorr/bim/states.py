"""Interior eigenfunctions reconstructed from boundary null vectors.

For a Dirichlet eigenfunction with boundary normal derivative ``u`` Green's
formula gives ``psi(x) = int Phi(x, y) u(y) ds(y)`` inside the billiard (and
zero outside).  With ``u`` real the ``J0`` part of ``Phi`` integrates to zero, so
``psi(x) = -1/4 int Y0(k|x - y|) u(y) ds(y)``.  The L2 norm comes from the
Rellich identity ``int psi^2 = (1 / 2k^2) int (x . nu) u^2 ds``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import io as bio
from ..specfun import bessel_y0
from .geometry import BoundaryCurve, curve_from_description
from .kernel import DEFAULT_GRADING, KernelAssembler, discretize, parametrize
from .solver import SpectrumScanner, default_step, eigen_scan

log = logging.getLogger(__name__)

NEAR_SPACINGS = 5.0
UPSAMPLE = 4
_CHUNK = 1024


def _trig_upsample(g: np.ndarray, factor: int) -> np.ndarray:
    """Trigonometric interpolation from ``t_i = 2pi(i+1/2)/N`` to the grid of
    ``factor * N`` points of the same form.  The Nyquist mode is dropped."""
    n = len(g)
    nf = factor * n
    m = np.fft.fftfreq(n, 1.0 / n)
    coef = np.fft.fft(g) * np.exp(-1j * m * math.pi / n) / n
    coef[n // 2] = 0.0
    big = np.zeros(nf, dtype=complex)
    big[m.astype(int) % nf] = coef * np.exp(1j * m * math.pi / nf) * nf
    return np.fft.ifft(big).real


def _fix_phase(vec: np.ndarray, weights: np.ndarray):
    """Rotate a complex null vector onto the real axis.

    Returns the real vector and the relative size of the discarded
    imaginary part.  The overall sign makes the largest entry positive.
    """
    vec = np.asarray(vec)
    phi = 0.5 * np.angle(np.sum(weights * vec * vec))
    rot = vec * np.exp(-1j * phi)
    real, imag = rot.real, rot.imag
    resid = float(np.linalg.norm(imag) / max(np.linalg.norm(real), 1e-300))
    if real[np.argmax(np.abs(real))] < 0:
        real = -real
    return real, resid


class Eigenstate:
    """Evaluator of one normalised eigenfunction.

    ``density`` is the real boundary normal derivative at the quadrature
    nodes of ``discretize(boundary, n_nodes, grading)`` up to the factor
    ``norm_constant``: the normalised field is ``norm_constant * S density``.
    """

    def __init__(self, boundary: BoundaryCurve, k: float, density, n_nodes: int,
                 grading: int = DEFAULT_GRADING, norm_constant: float | None = None,
                 sigma: float = float("nan")):
        self.boundary = boundary
        self.k = float(k)
        self.density = np.asarray(density, dtype=float)
        self.n_nodes = int(n_nodes)
        self.grading = int(grading)
        self.sigma = float(sigma)
        if self.density.shape != (self.n_nodes,):
            raise ValueError("density length does not match node count")
        self.disc = discretize(boundary, self.n_nodes, self.grading)
        if norm_constant is None:
            norm_constant = 1.0 / math.sqrt(self.rellich_norm())
        self.norm_constant = float(norm_constant)
        self._fine = None

    @property
    def wavelength(self) -> float:
        return 2 * math.pi / self.k

    def rellich_norm(self) -> float:
        """``int psi^2`` of the unnormalised field from boundary data."""
        d = self.disc
        xdotn = np.sum(d.points * d.normals, axis=1)
        return float(np.sum(d.weights * xdotn * self.density ** 2) / (2 * self.k ** 2))

    def _fine_nodes(self):
        if self._fine is None:
            d = self.disc
            nf = UPSAMPLE * d.n_nodes
            t = 2 * math.pi * (np.arange(nf) + 0.5) / nf
            pts, _, _, _ = parametrize(self.boundary, d.counts, t, d.grading)
            g = _trig_upsample(self.density * d.speed, UPSAMPLE)
            self._fine = (pts, g * (2 * math.pi / nf))
        return self._fine

    def _layer(self, pts, nodes, wg):
        out = np.empty(len(pts))
        for lo in range(0, len(pts), _CHUNK):
            p = pts[lo:lo + _CHUNK]
            r = np.hypot(p[:, None, 0] - nodes[None, :, 0], p[:, None, 1] - nodes[None, :, 1])
            out[lo:lo + _CHUNK] = -0.25 * (bessel_y0(self.k * r) @ wg)
        return out

    def __call__(self, points, outside: str = "raise"):
        """Normalised field at ``points`` (trailing axis 2).

        ``outside="raise"`` rejects points outside the billiard;
        ``outside="zero"`` returns 0 there (the exact continuation).
        """
        p = np.asarray(points, dtype=float)
        flat = p.reshape(-1, 2)
        dist = self.boundary.distance(flat)
        inside = self.boundary.contains(flat) | (dist < 1e-9)
        if outside == "raise":
            if not np.all(inside):
                raise ValueError("evaluation point outside the billiard")
        elif outside != "zero":
            raise ValueError("outside must be 'raise' or 'zero'")
        vals = np.zeros(len(flat))
        h = self.disc.max_spacing
        far = inside & (dist >= NEAR_SPACINGS * h)
        near = inside & (dist < NEAR_SPACINGS * h) & (dist > 1e-12)
        d = self.disc
        if np.any(far):
            vals[far] = self._layer(flat[far], d.points, d.weights * self.density)
        if np.any(near):
            nodes, wg = self._fine_nodes()
            vals[near] = self._layer(flat[near], nodes, wg)
        vals *= self.norm_constant
        out = vals.reshape(p.shape[:-1])
        if np.ndim(out) == 0:
            return float(out)
        return out

    def boundary_values(self) -> np.ndarray:
        """Field at the boundary nodes through the product-quadrature single
        layer (should vanish)."""
        s = KernelAssembler(self.disc).single_layer(self.k)
        return self.norm_constant * (s @ self.density).real

    def interior_norm(self, cell: float | None = None) -> float:
        """``int psi^2`` by the midpoint rule on a masked square grid.

        The default cell is a wavelength over 8, but no coarser than 1/64 of
        the square root of the area (low states of small billiards)."""
        if cell is None:
            cell = min(self.wavelength / 8, math.sqrt(self.boundary.area) / 64)
        lo, hi = self.boundary.bounding_box()
        nx = int(math.ceil((hi[0] - lo[0]) / cell))
        ny = int(math.ceil((hi[1] - lo[1]) / cell))
        xs = lo[0] + cell * (np.arange(nx) + 0.5)
        ys = lo[1] + cell * (np.arange(ny) + 0.5)
        pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        pts = pts[self.boundary.contains(pts)]
        return float(np.sum(self(pts) ** 2) * cell * cell)

    def sup_estimate(self, cell: float | None = None) -> float:
        if cell is None:
            cell = self.wavelength / 6
        lo, hi = self.boundary.bounding_box()
        xs = np.arange(lo[0] + 0.5 * cell, hi[0], cell)
        ys = np.arange(lo[1] + 0.5 * cell, hi[1], cell)
        pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        pts = pts[self.boundary.contains(pts)]
        return float(np.max(np.abs(self(pts))))


def eigenfunction(boundary: BoundaryCurve, k: float, density, n_nodes: int | None = None,
                  grading: int = DEFAULT_GRADING, sigma: float = float("nan")) -> Eigenstate:
    """Normalised interior evaluator from a (possibly complex) null vector."""
    density = np.asarray(density)
    if n_nodes is None:
        n_nodes = len(density)
    disc = discretize(boundary, n_nodes, grading)
    if np.iscomplexobj(density):
        density, resid = _fix_phase(density, disc.weights)
        # a degenerate level gives a complex mix of real null vectors; its
        # real part is still an eigenfunction
        log.debug("null vector at k=%.10g: imaginary remainder %.2g", k, resid)
    return Eigenstate(boundary, k, density, n_nodes, grading, sigma=sigma)


@dataclass
class EigenstateSet:
    boundary: BoundaryCurve
    states: list = field(default_factory=list)
    window: tuple = (0.0, 0.0)

    def __post_init__(self):
        ks = self.ks
        if len(ks) > 1 and np.any(np.diff(ks) <= 0):
            raise ValueError("eigen-wavenumbers must be strictly increasing")

    @property
    def ks(self) -> np.ndarray:
        return np.array([s.k for s in self.states])

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, i):
        return self.states[i]

    def save(self, directory) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        bio.atomic_write_text(directory / "geometry.txt",
                              "\n".join(self.boundary.describe()) + "\n")
        index = []
        for i, s in enumerate(self.states):
            name = f"state_{i:04d}.csv"
            d = s.disc
            bio.write_table(directory / name,
                            {"k": s.k, "n_nodes": s.n_nodes, "grading": s.grading,
                             "norm_constant": s.norm_constant, "sigma": s.sigma},
                            np.column_stack([d.t, d.points, s.density]),
                            ["t", "x", "y", "density"])
            index.append([i, s.k, s.n_nodes, s.grading, s.norm_constant,
                          s.sigma if np.isfinite(s.sigma) else -1.0])
        bio.write_table(directory / "states.csv",
                        {"count": len(self.states), "k_min": self.window[0],
                         "k_max": self.window[1], "geometry": self.boundary.name},
                        np.array(index) if index else np.empty((0, 6)),
                        ["index", "k", "n_nodes", "grading", "norm_constant", "sigma"])
        return directory

    @classmethod
    def load(cls, directory) -> "EigenstateSet":
        directory = Path(directory)
        if not (directory / "states.csv").exists():
            raise FileNotFoundError(f"no eigenstate set in {directory}")
        with open(directory / "geometry.txt", encoding="utf-8") as fh:
            boundary = curve_from_description(fh.read().splitlines())
        header, _ = bio.read_table(directory / "states.csv")
        count = int(header["count"])
        states = []
        for i in range(count):
            h, data = bio.read_table(directory / f"state_{i:04d}.csv")
            states.append(Eigenstate(boundary, float(h["k"]), data[:, 3], int(h["n_nodes"]),
                                     int(h["grading"]), float(h["norm_constant"]),
                                     float(h["sigma"])))
        return cls(boundary, states, (float(header["k_min"]), float(header["k_max"])))


def _level_density(boundary: BoundaryCurve, k: float) -> float:
    return max(boundary.area * k / (2 * math.pi) - boundary.total_length / (4 * math.pi), 1e-3)


def ensemble_of_states(boundary: BoundaryCurve, k_center: float, count: int,
                       nodes_per_wavelength: float = 10.0, dk: float | None = None,
                       threshold: float = 1e-4, threads: int = 1,
                       grading: int = DEFAULT_GRADING, max_rounds: int = 20) -> EigenstateSet:
    """The ``count`` eigenstates whose wavenumbers lie nearest ``k_center``.

    The first window holds about 1.2 ``count`` levels by Weyl's law; it then
    grows by half its width on both sides until enough levels are found.
    Each band is scanned with nodes fixed by its own upper end.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if k_center <= 0:
        raise ValueError("k_center must be positive")
    k_floor = 1e-3 * k_center
    half = 0.6 * count / _level_density(boundary, k_center)
    lo, hi = max(k_center - half, k_floor), k_center + half
    found: list[tuple] = []

    def scan_band(a, b):
        if b - a <= 0:
            return
        step = dk if dk is not None else default_step(boundary, b)
        scanner = SpectrumScanner(boundary, b, nodes_per_wavelength, grading)
        ks, vecs, sigmas = eigen_scan(boundary, a, b, step, threshold=threshold,
                                      threads=threads, scanner=scanner, return_vectors=True)
        for kv, vec, sig in zip(ks, vecs, sigmas):
            if any(abs(kv - f[0]) < 1e-7 * kv for f in found):
                continue
            found.append((kv, vec, scanner.disc.n_nodes, sig))

    scan_band(lo, hi)
    rounds = 0
    while len(found) < count:
        rounds += 1
        if rounds > max_rounds:
            raise RuntimeError(f"found only {len(found)} of {count} levels near {k_center}")
        grow = 0.5 * (hi - lo)
        new_lo, new_hi = max(lo - grow, k_floor), hi + grow
        scan_band(new_lo, lo)
        scan_band(hi, new_hi)
        lo, hi = new_lo, new_hi
    found.sort(key=lambda f: (abs(f[0] - k_center), f[0]))
    chosen = sorted(found[:count], key=lambda f: f[0])
    states = [eigenfunction(boundary, kv, vec, n, grading, sigma=sig)
              for kv, vec, n, sig in chosen]
    log.info("%d states of %s in [%.6g, %.6g]", len(states), boundary.name,
             states[0].k, states[-1].k)
    return EigenstateSet(boundary, states, (lo, hi))
