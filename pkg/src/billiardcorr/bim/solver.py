"""Eigen-wavenumber search by minimising the smallest singular value."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import scipy.linalg as sla
from scipy.optimize import minimize_scalar

from .geometry import BoundaryCurve
from .kernel import DEFAULT_GRADING, KernelAssembler, discretize, node_count

log = logging.getLogger(__name__)


def smallest_singular(a: np.ndarray, method: str = "inverse", tol: float = 1e-10,
                      maxiter: int = 200):
    """Smallest singular value of ``a`` and its right singular vector.

    ``method="inverse"`` runs inverse iteration on ``(A^H A)^-1`` from one LU
    factorisation and a fixed start vector; ``method="svd"`` uses a full SVD.
    """
    if method == "svd":
        _, s, vh = sla.svd(a, check_finite=False)
        return float(s[-1]), vh[-1].conj()
    n = a.shape[0]
    lu = sla.lu_factor(a, check_finite=False)
    x = np.exp(1j * np.arange(n) * 0.7) + np.linspace(0.5, 1.5, n)
    x /= np.linalg.norm(x)
    sigma = np.inf
    for _ in range(maxiter):
        y = sla.lu_solve(lu, x, trans=2, check_finite=False)
        z = sla.lu_solve(lu, y, check_finite=False)
        nz = np.linalg.norm(z)
        if not np.isfinite(nz) or nz == 0:
            break
        x = z / nz
        new = float(np.linalg.norm(a @ x))
        if abs(sigma - new) <= tol * new or new < 1e-15:
            sigma = new
            break
        sigma = new
    return sigma, x


def weyl_count(area: float, perimeter: float, k):
    """Two-term Weyl estimate of the number of Dirichlet levels below ``k``."""
    k = np.asarray(k, dtype=float)
    return area * k ** 2 / (4 * math.pi) - perimeter * k / (4 * math.pi)


def default_step(boundary: BoundaryCurve, k: float) -> float:
    """A fifth of the mean level spacing ``2 pi / (A k)`` from the area term."""
    return 2 * math.pi / (boundary.area * k) / 5


class SpectrumScanner:
    """Scans ``sigma_min(k)`` on a fixed discretisation.

    The node count is fixed by the top of the window so that the operator does
    not change size (and jump) in the middle of a scan.
    """

    def __init__(self, boundary: BoundaryCurve, k_max: float, nodes_per_wavelength: float = 10.0,
                 grading: int = DEFAULT_GRADING, n_nodes: int | None = None,
                 method: str = "inverse"):
        if nodes_per_wavelength < 6:
            raise ValueError("nodes_per_wavelength must be at least 6")
        self.boundary = boundary
        self.nodes_per_wavelength = nodes_per_wavelength
        if n_nodes is None:
            n_nodes = node_count(boundary, k_max, nodes_per_wavelength)
        self.disc = discretize(boundary, n_nodes, grading)
        self.assembler = KernelAssembler(self.disc)
        self.method = method
        self._sqrt_w = np.sqrt(self.disc.weights)

    def weighted_matrix(self, k: float) -> np.ndarray:
        """``W^1/2 A W^-1/2``: the operator in the discrete L2(ds) norm.

        Unweighted, the graded corner nodes carry a near-null vector whose
        singular value is a k-independent plateau (~4e-3 for the quarter
        stadium) that hides all but a narrow core of each level's dip.
        """
        w = self._sqrt_w
        return w[:, None] * self.assembler.matrix(k) / w[None, :]

    def sigma(self, k: float) -> float:
        return smallest_singular(self.weighted_matrix(k), self.method)[0]

    def null_vector(self, k: float):
        sig, vec = smallest_singular(self.weighted_matrix(k), self.method)
        vec = vec / self._sqrt_w
        return sig, vec / np.linalg.norm(vec)

    def scan(self, ks, threads: int = 1) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                return np.array(list(pool.map(self.sigma, ks)))
        return np.array([self.sigma(k) for k in ks])

    def refine(self, lo: float, hi: float, xatol: float = 1e-9):
        # work in the offset from lo: the bounded method adds a relative
        # tolerance sqrt(eps)*|x|, which would be ~1e-6 at k ~ 100
        res = minimize_scalar(lambda d: self.sigma(lo + d) ** 2, bounds=(0.0, hi - lo),
                              method="bounded", options={"xatol": xatol, "maxiter": 200})
        return float(lo + res.x), math.sqrt(max(res.fun, 0.0))


SUBDIVIDE = 3


def find_minima(ks, sig):
    """Indices of strict interior local minima of a sampled curve."""
    sig = np.asarray(sig)
    i = np.arange(1, len(sig) - 1)
    mask = (sig[i] < sig[i - 1]) & (sig[i] <= sig[i + 1])
    return i[mask]


def eigen_scan(boundary: BoundaryCurve, k_min: float, k_max: float, dk: float | None = None,
               nodes_per_wavelength: float = 10.0, threshold: float = 1e-4,
               threads: int = 1, scanner: SpectrumScanner | None = None,
               return_vectors: bool = False):
    """Eigen-wavenumbers in ``(k_min, k_max)``.

    The smallest singular value of ``K' - I/2`` is sampled with step ``dk``.
    The bracket of each interior local minimum is resampled ``SUBDIVIDE``
    times finer, and every minimum seen there is refined by bounded Brent
    minimisation of ``sigma^2`` to ``|dk| < 1e-8`` and kept if the refined
    value is below ``threshold * median(samples)``.  With ``return_vectors`` the null vectors
    (boundary normal derivatives, complex phase not fixed) and the singular
    values at the levels are returned too.
    """
    if not 0 < k_min < k_max:
        raise ValueError("need 0 < k_min < k_max")
    if dk is None:
        dk = default_step(boundary, k_max)
    if scanner is None:
        scanner = SpectrumScanner(boundary, k_max, nodes_per_wavelength)
    n = int(math.ceil((k_max - k_min) / dk))
    # one extra sample on each side so minima near the window ends are seen
    ks = k_min + dk * np.arange(-1, n + 2)
    ks = ks[ks > 0]
    sig = scanner.scan(ks, threads)
    floor = threshold * float(np.median(sig))
    found = []
    for i in find_minima(ks, sig):
        # two levels closer than dk show up as a single coarse minimum, so
        # the bracket is resampled on a finer grid before refining
        fine = np.linspace(ks[i - 1], ks[i + 1], 2 * SUBDIVIDE + 1)
        fsig = np.empty(len(fine))
        known = {0: sig[i - 1], SUBDIVIDE: sig[i], 2 * SUBDIVIDE: sig[i + 1]}
        todo = [j for j in range(len(fine)) if j not in known]
        fsig[todo] = scanner.scan(fine[todo], threads)
        for j, v in known.items():
            fsig[j] = v
        for j in find_minima(fine, fsig):
            k_star, s_star = scanner.refine(fine[j - 1], fine[j + 1])
            if s_star >= floor or not (k_min < k_star < k_max):
                continue
            if any(abs(k_star - kf) < 1e-7 * k_star for kf, _ in found):
                continue
            found.append((k_star, s_star))
    found.sort()
    log.info("scan %s [%g, %g]: %d samples, %d levels", boundary.name, k_min, k_max,
             len(ks), len(found))
    kvals = [k for k, _ in found]
    if not return_vectors:
        return kvals
    pairs = [scanner.null_vector(k) for k in kvals]
    return kvals, [v for _, v in pairs], [s for s, _ in pairs]
