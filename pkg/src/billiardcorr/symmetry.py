"""Plane isometries carrying a sign, wedge reflection groups and corridor images.

The wedge of opening angle ``pi/n`` has its apex at the origin and edges along
``phi = 0`` and ``phi = pi/n``.  Geometries given with the wedge bisector on the
x-axis (the cone billiard frame) are mapped with :func:`bisector_to_wedge`.

The semi-infinite corridor occupies ``x >= 0, |y| <= a/2``; its image lattice is
enumerated in closed form rather than through the finite cylinder group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Isometry:
    """``p -> linear @ p + shift`` with a character ``parity`` of +1 or -1."""

    linear: np.ndarray
    shift: np.ndarray
    parity: int
    label: str = ""

    def __post_init__(self):
        lin = np.array(self.linear, dtype=float).reshape(2, 2)
        sh = np.array(self.shift, dtype=float).reshape(2)
        lin.setflags(write=False)
        sh.setflags(write=False)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "shift", sh)
        if self.parity not in (1, -1):
            raise ValueError("parity must be +1 or -1")
        if not np.allclose(lin @ lin.T, np.eye(2), atol=1e-12, rtol=0):
            raise ValueError("linear part must be orthogonal")

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def __call__(self, p):
        return apply(self, p)

    def __repr__(self):
        name = self.label or "Isometry"
        return f"<{name} parity={self.parity:+d} shift={self.shift.tolist()}>"


def identity() -> Isometry:
    return Isometry(np.eye(2), np.zeros(2), 1, "E")


def rotation(angle: float, label: str = "") -> Isometry:
    c, s = math.cos(angle), math.sin(angle)
    return Isometry([[c, -s], [s, c]], np.zeros(2), 1, label)


def translation(vector, label: str = "") -> Isometry:
    return Isometry(np.eye(2), np.asarray(vector, dtype=float), 1, label)


def reflection(angle: float, label: str = "") -> Isometry:
    """Reflection across the line through the origin at polar angle ``angle``."""
    c, s = math.cos(2 * angle), math.sin(2 * angle)
    return Isometry([[c, s], [s, -c]], np.zeros(2), -1, label)


def apply(iso: Isometry, p):
    """Apply ``iso`` to a point or to an array of points with trailing axis 2."""
    p = np.asarray(p, dtype=float)
    return p @ iso.linear.T + iso.shift


def compose(a: Isometry, b: Isometry) -> Isometry:
    """``a o b``: apply ``b`` first, then ``a``."""
    return Isometry(a.linear @ b.linear, a.linear @ b.shift + a.shift,
                    a.parity * b.parity,
                    f"{a.label}{b.label}" if a.label and b.label else "")


def inverse(a: Isometry) -> Isometry:
    lin = a.linear.T
    return Isometry(lin, -lin @ a.shift, a.parity, f"{a.label}^-1" if a.label else "")


def same_map(a: Isometry, b: Isometry, atol: float = 1e-12) -> bool:
    return (np.allclose(a.linear, b.linear, atol=atol, rtol=0)
            and np.allclose(a.shift, b.shift, atol=atol, rtol=0))


@dataclass(frozen=True, eq=False)
class ImageSet:
    """Ordered signed isometries plus the projection normalisation.

    ``kind`` is ``"wedge"`` or ``"corridor"``; ``params`` holds ``n`` for a
    wedge and ``a``, ``cutoff``, ``center`` for a corridor.  ``frame`` (if
    set) is the isometry taking the canonical frame of ``kind`` to the frame
    the elements act in; see :func:`conjugate`.
    """

    elements: tuple
    kind: str
    params: dict = field(default_factory=dict)
    normalization: float = 1.0
    frame: Isometry | None = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @property
    def parities(self) -> np.ndarray:
        return np.array([e.parity for e in self.elements], dtype=float)

    def images_of(self, p) -> np.ndarray:
        """Array ``(len(self), 2)`` of the images of a single point."""
        p = np.asarray(p, dtype=float)
        return np.array([apply(e, p) for e in self.elements])

    def contains(self, p, tol: float = 1e-10):
        """Whether point(s) lie in the physical domain (boundary included)."""
        if self.frame is not None:
            p = apply(inverse(self.frame), p)
        if self.kind == "wedge":
            return wedge_contains(p, self.params["n"], tol)
        if self.kind == "corridor":
            return corridor_contains(p, self.params["a"], tol)
        raise ValueError(f"unknown image set kind {self.kind!r}")


def conjugate(images: ImageSet, frame: Isometry) -> ImageSet:
    """The same image set expressed in the frame ``frame(canonical)``.

    Each element ``A`` becomes ``F A F^-1``; characters are unchanged.
    """
    elems = tuple(Isometry(*_conj(e, frame), e.parity, e.label) for e in images)
    total = frame if images.frame is None else compose(frame, images.frame)
    return ImageSet(elems, images.kind, dict(images.params), images.normalization, total)


def _conj(e: Isometry, f: Isometry):
    c = compose(compose(f, e), inverse(f))
    return c.linear, c.shift


# --- wedge -------------------------------------------------------------------

def wedge_group(n: int, frame: str = "canonical") -> ImageSet:
    """Dihedral group of order ``2n`` fixing the wedge ``0 <= phi <= pi/n``.

    Rotations by ``2 pi m / n`` carry character +1, reflections across
    ``phi = m pi / n`` carry -1.  For ``n = 3`` the reflections are labelled
    R1 (``phi=0``), R2 (``phi=pi/3``), R3 (``phi=2pi/3``) and the rotations
    R1R2 (by -120 degrees) and R2R1 (by +120 degrees).

    ``frame="bisector"`` returns the group acting in the frame whose x-axis
    is the wedge bisector (edges at ``+-pi/(2n)``), the cone billiard frame.
    """
    if frame not in ("canonical", "bisector"):
        raise ValueError(f"unknown wedge frame {frame!r}")
    if int(n) != n or n < 1:
        raise ValueError("wedge order n must be a positive integer")
    n = int(n)
    elems = [identity()]
    for m in range(1, n):
        elems.append(rotation(2 * math.pi * m / n, f"C{m}"))
    for m in range(n):
        elems.append(reflection(m * math.pi / n, f"S{m}"))
    if n == 3:
        names = {"C1": "R2R1", "C2": "R1R2", "S0": "R1", "S1": "R2", "S2": "R3"}
        elems = [Isometry(e.linear, e.shift, e.parity, names.get(e.label, e.label))
                 for e in elems]
        order = ["E", "R1", "R2", "R3", "R1R2", "R2R1"]
        elems.sort(key=lambda e: order.index(e.label))
    group = ImageSet(tuple(elems), "wedge", {"n": n}, 1.0 / math.sqrt(2 * n))
    if frame == "bisector":
        group = conjugate(group, rotation(-math.pi / (2 * n)))
    return group


def wedge_contains(p, n: int, tol: float = 1e-10):
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    alpha = math.pi / n
    inside = (y >= -tol) & (math.sin(alpha) * x - math.cos(alpha) * y >= -tol)
    return inside


def wedge_edge_distance(p, n: int):
    """Distance from point(s) inside the wedge to the nearer edge."""
    p = np.asarray(p, dtype=float)
    x, y = p[..., 0], p[..., 1]
    alpha = math.pi / n
    d1 = np.where(x >= 0, np.abs(y), np.hypot(x, y)) if n > 1 else np.abs(y)
    ex = np.array([math.cos(alpha), math.sin(alpha)])
    along = x * ex[0] + y * ex[1]
    perp = np.abs(math.sin(alpha) * x - math.cos(alpha) * y)
    d2 = np.where(along >= 0, perp, np.hypot(x, y)) if n > 1 else perp
    return np.minimum(d1, d2)


def bisector_to_wedge(p, n: int):
    """Rotate from the frame with the wedge bisector on +x (edges at
    ``+-pi/(2n)``) into the canonical wedge frame."""
    rot = rotation(math.pi / (2 * n))
    return apply(rot, p)


def wedge_to_bisector(p, n: int):
    rot = rotation(-math.pi / (2 * n))
    return apply(rot, p)


# --- corridor ----------------------------------------------------------------

def corridor_contains(p, a: float, tol: float = 1e-10):
    p = np.asarray(p, dtype=float)
    return (p[..., 0] >= -tol) & (np.abs(p[..., 1]) <= 0.5 * a + tol)


def corridor_element(sigma: int, m: int, mirror: bool, a: float) -> Isometry:
    """Member of the corridor image lattice.

    ``mirror=False``: ``(x, y) -> (sigma x, y + 2 m a)`` with parity ``sigma``;
    ``mirror=True``: ``(x, y) -> (sigma x, (2m+1) a - y)`` with parity ``-sigma``.
    """
    if mirror:
        lin = [[sigma, 0.0], [0.0, -1.0]]
        shift = [0.0, (2 * m + 1) * a]
        parity = -sigma
    else:
        lin = [[sigma, 0.0], [0.0, 1.0]]
        shift = [0.0, 2 * m * a]
        parity = sigma
    tag = f"{'M' if mirror else 'T'}{m:+d}{'b' if sigma < 0 else ''}"
    return Isometry(lin, shift, parity, tag)


def _corridor_candidates(a, probe, cutoff):
    x0, y0 = probe
    mmax = int(math.ceil((cutoff + abs(y0) + a) / (2 * a))) + 1
    out = []
    for sigma in (1, -1):
        dx = x0 - sigma * x0
        if abs(dx) > cutoff + _TOL:
            continue
        for m in range(-mmax, mmax + 1):
            for mirror in (False, True):
                yi = (2 * m + 1) * a - y0 if mirror else y0 + 2 * m * a
                d = math.hypot(dx, yi - y0)
                if d <= cutoff + _TOL or (sigma == 1 and m == 0 and not mirror):
                    out.append((d, int(mirror), -sigma, m, sigma))
    out.sort()
    return out


def corridor_images(a: float, x_probe, cutoff: float) -> ImageSet:
    """Signed images whose image of ``x_probe`` lies within ``cutoff`` of it.

    Elements are sorted by that distance; the identity always comes first.
    A probe on a wall keeps the mirror that fixes it (distance zero).
    The normalisation is ``1/sqrt(len)``, the count-based analogue of the
    finite-cylinder prefactor.
    """
    if a <= 0 or cutoff <= 0:
        raise ValueError("corridor width and cutoff must be positive")
    probe = np.asarray(x_probe, dtype=float).reshape(2)
    cands = _corridor_candidates(a, probe, cutoff)
    elems = [corridor_element(sigma, m, bool(mirror), a)
             for (_, mirror, _, m, sigma) in cands]
    return ImageSet(tuple(elems), "corridor",
                    {"a": float(a), "cutoff": float(cutoff), "center": tuple(probe)},
                    1.0 / math.sqrt(len(elems)))


def default_cutoff(k: float, envelope: float = 1e-3) -> float:
    """Distance at which the J0 envelope ``sqrt(2/(pi k d))`` drops to ``envelope``."""
    return 2.0 / (math.pi * k * envelope ** 2)


def composition_table(images: ImageSet, atol: float = 1e-12) -> np.ndarray:
    """Index table ``T[i, j]`` with ``elements[T[i,j]] == elements[i] o elements[j]``.

    Raises ``ValueError`` if the set is not closed under composition.
    """
    elems = images.elements
    n = len(elems)
    table = np.empty((n, n), dtype=int)
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            c = compose(a, b)
            for idx, e in enumerate(elems):
                if same_map(c, e, atol) and c.parity == e.parity:
                    table[i, j] = idx
                    break
            else:
                raise ValueError(f"set not closed: {a!r} o {b!r}")
    return table


# --- corridor transverse modes ------------------------------------------------

def corridor_modes(k: float, a: float):
    """Transverse Dirichlet modes of the corridor that propagate at ``k``.

    Returns ``(l, q, weight)`` for ``l = 1..floor(k a / pi)`` with
    ``q_l = sqrt(k^2 - (pi l / a)^2)`` and ``weight_l = 8 / (a q_l)``.  Poisson
    summation of the full signed image lattice gives the corridor correlation
    ``sum_l weight_l sin(q_l x) sin(q_l x') s_l(y) s_l(y')`` with
    ``s_l(y) = sin(pi l (y - a/2) / a)``.
    """
    if k <= 0 or a <= 0:
        raise ValueError("wavenumber and corridor width must be positive")
    n = int(math.floor(k * a / math.pi))
    if n < 1:
        raise ValueError("no propagating corridor mode below k = pi / a")
    l = np.arange(1, n + 1)
    q2 = k * k - (math.pi * l / a) ** 2
    if q2[-1] <= (1e-9 * k) ** 2:
        raise ValueError("k a / pi is an integer: a grazing mode makes the corridor "
                         "correlation singular")
    q = np.sqrt(q2)
    return l, q, 8.0 / (a * q)


def corridor_cell_group(a: float, k: float) -> ImageSet:
    """Projection for fields that are ``2a``-periodic in y (transverse modes).

    For such fields every translation by ``2 m a`` acts trivially, so the
    infinite image lattice collapses to the four classes E, back-wall
    reflection, mirror in ``y = a/2`` and their product.  The normalisation
    ``sqrt(S / 2)`` with ``S = sum_l 1 / (a q_l)`` makes the projected mode
    ensemble reproduce the lattice correlation exactly; it tends to
    ``1/sqrt(4)`` as ``k a`` grows.
    """
    _, q, _ = corridor_modes(k, a)
    s = float(np.sum(1.0 / (a * q)))
    elems = (corridor_element(1, 0, False, a), corridor_element(-1, 0, False, a),
             corridor_element(1, 0, True, a), corridor_element(-1, 0, True, a))
    return ImageSet(elems, "corridor", {"a": float(a), "k": float(k), "periodic": True},
                    math.sqrt(0.5 * s))
