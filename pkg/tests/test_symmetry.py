import itertools
import math
from collections import Counter

import numpy as np
import pytest

from billiardcorr.symmetry import (apply, composition_table, compose, conjugate,
                                   corridor_cell_group, corridor_images, corridor_modes,
                                   default_cutoff, identity, inverse, reflection, rotation,
                                   same_map, translation, wedge_contains, wedge_group)


def _rotation_angle(iso):
    return math.atan2(iso.linear[1, 0], iso.linear[0, 0])


# --- isometries ---------------------------------------------------------------

def test_apply_examples():
    assert np.allclose(apply(identity(), (0.2, 0.7)), (0.2, 0.7), atol=0)
    assert np.allclose(apply(reflection(0.0), (0.3, 0.4)), (0.3, -0.4), atol=1e-15)
    p = apply(rotation(2 * math.pi / 3), (1.0, 0.0))
    assert np.allclose(p, (-0.5, math.sqrt(3) / 2), atol=1e-15)


def test_apply_broadcasts_over_points():
    pts = np.random.default_rng(0).random((4, 5, 2))
    out = apply(rotation(0.3), pts)
    assert out.shape == pts.shape
    np.testing.assert_allclose(out[2, 3], apply(rotation(0.3), pts[2, 3]))


def test_invalid_isometries():
    with pytest.raises(ValueError):
        translation((1.0, 0.0)).__class__([[1, 1], [0, 1]], [0, 0], 1)
    with pytest.raises(ValueError):
        identity().__class__(np.eye(2), [0, 0], 0)


def test_compose_and_inverse():
    r1, r2 = reflection(0.0), reflection(math.pi / 3)
    e = compose(r1, r1)
    assert same_map(e, identity()) and e.parity == 1
    rot = compose(r1, r2)
    assert rot.parity == 1
    assert abs(abs(_rotation_angle(rot)) - 2 * math.pi / 3) < 1e-14
    a = compose(translation((0.3, -1.0)), rotation(0.7))
    assert same_map(compose(a, inverse(a)), identity())


# --- wedge group ----------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 9))
def test_wedge_group_axioms(n):
    g = wedge_group(n)
    assert len(g) == 2 * n
    assert sum(e.parity == -1 for e in g) == n
    assert g.normalization == pytest.approx(1 / math.sqrt(2 * n))
    assert same_map(g.elements[0], identity()) and g.elements[0].parity == 1
    table = composition_table(g)            # raises unless closed
    ident = [i for i, e in enumerate(g) if same_map(e, identity())]
    assert len(ident) == 1
    # every element has an inverse in the set
    for i in range(len(g)):
        assert ident[0] in table[i]
    # characters are multiplicative on the full table
    par = g.parities
    assert np.all(par[table] == np.outer(par, par))
    # associativity on random triples
    rng = np.random.default_rng(n)
    for i, j, k in rng.integers(0, 2 * n, size=(20, 3)):
        assert table[table[i, j], k] == table[i, table[j, k]]


@pytest.mark.parametrize("n", range(1, 9))
def test_parity_is_determinant(n):
    for e in wedge_group(n):
        assert e.parity == round(e.det)


@pytest.mark.parametrize("n", range(1, 9))
def test_reflections_fix_their_mirror_line(n):
    for e in wedge_group(n):
        if e.parity == 1:
            continue
        # mirror direction: eigenvector of the linear part with eigenvalue +1
        w, v = np.linalg.eigh(e.linear)
        d = v[:, np.argmax(w)]
        pts = np.outer(np.linspace(-3, 3, 13), d)
        assert np.max(np.abs(apply(e, pts) - pts)) <= 1e-14


def test_wedge_examples():
    g1 = wedge_group(1)
    assert len(g1) == 2 and g1.normalization == pytest.approx(1 / math.sqrt(2))
    assert np.allclose(apply(g1.elements[1], (0.2, 0.5)), (0.2, -0.5))

    g3 = wedge_group(3)
    assert [e.label for e in g3] == ["E", "R1", "R2", "R3", "R1R2", "R2R1"]
    assert [e.parity for e in g3] == [1, -1, -1, -1, 1, 1]
    r1, r2 = g3.elements[1], g3.elements[2]
    assert same_map(compose(r1, r2), g3.elements[4])
    assert same_map(compose(r2, r1), g3.elements[5])

    # n = 2: independent antisymmetrisation in x and y
    g2 = wedge_group(2)
    maps = {(round(e.linear[0, 0]), round(e.linear[1, 1])): e.parity for e in g2}
    assert maps == {(1, 1): 1, (1, -1): -1, (-1, 1): -1, (-1, -1): 1}


def test_wedge_group_rejects_bad_order():
    with pytest.raises(ValueError):
        wedge_group(0)
    with pytest.raises(ValueError):
        wedge_group(2.5)
    with pytest.raises(ValueError):
        wedge_group(3, frame="sideways")


def test_bisector_frame_is_conjugate():
    g = wedge_group(3)
    b = wedge_group(3, "bisector")
    f = rotation(-math.pi / 6)
    p = np.array([0.31, 0.07])
    for e, eb in zip(g, b):
        np.testing.assert_allclose(apply(eb, apply(f, p)), apply(f, apply(e, p)), atol=1e-15)
        assert e.parity == eb.parity
    # cone frame: edges at +-30 degrees
    assert b.contains((0.3, 0.0)) and b.contains((0.3, 0.153))
    assert not b.contains((0.3, 0.2))
    edge = 0.3 * np.array([math.cos(math.pi / 6), math.sin(math.pi / 6)])
    assert b.contains(edge)
    composition_table(b)


def test_wedge_contains():
    assert wedge_contains((1.0, 0.0), 3)
    assert wedge_contains((math.cos(math.pi / 3), math.sin(math.pi / 3)), 3)
    assert not wedge_contains((1.0, -0.01), 3)
    assert not wedge_contains((-1.0, 0.5), 3)


# --- corridor -------------------------------------------------------------------

def _reflection_oracle(a, probe, cutoff, depth):
    """All signed images reachable by at most ``depth`` wall reflections."""
    walls = [
        lambda p: (-p[0], p[1]),            # back wall x = 0
        lambda p: (p[0], a - p[1]),         # y = a/2
        lambda p: (p[0], -a - p[1]),        # y = -a/2
    ]
    start = (round(probe[0], 12), round(probe[1], 12), 1)
    seen = {start}
    frontier = [start]
    for _ in range(depth):
        nxt = []
        for x, y, s in frontier:
            for w in walls:
                px, py = w((x, y))
                key = (round(px, 12), round(py, 12), -s)
                if key not in seen:
                    seen.add(key)
                    nxt.append(key)
        frontier = nxt
    return Counter(k for k in seen
                   if math.hypot(k[0] - probe[0], k[1] - probe[1]) <= cutoff + 1e-9)


def _signed_images(images, probe):
    pts = images.images_of(probe)
    return Counter((round(p[0], 12), round(p[1], 12), int(s))
                   for p, s in zip(pts, images.parities))


def test_corridor_matches_recursive_reflection_oracle():
    a, cutoff = 1.0, 2.5
    probe = (0.3, 0.0)
    got = _signed_images(corridor_images(a, probe, cutoff), probe)
    want = _reflection_oracle(a, probe, cutoff, depth=6)
    assert got == want
    # back-wall branch at x = -0.3 and y-images at +-1, +-2
    xs = sorted({k[0] for k in got})
    assert xs == [-0.3, 0.3]
    ys = sorted({k[1] for k in got if k[0] == 0.3})
    assert ys == [-2.0, -1.0, 0.0, 1.0, 2.0]


def test_corridor_completeness_random_probes():
    rng = np.random.default_rng(42)
    a, cutoff = 0.6, 2.0
    depth = math.ceil(cutoff / a) + 2
    for _ in range(100):
        probe = (rng.uniform(0.0, 1.5), rng.uniform(-0.5 * a, 0.5 * a))
        got = _signed_images(corridor_images(a, probe, cutoff), probe)
        assert got == _reflection_oracle(a, probe, cutoff, depth)


def test_corridor_examples():
    only = corridor_images(1.0, (5.0, 0.1), 0.3)
    assert len(only) == 1 and same_map(only.elements[0], identity())
    wall = corridor_images(1.0, (5.0, 0.5), 0.1)
    fixers = [e for e in wall if np.allclose(apply(e, (5.0, 0.5)), (5.0, 0.5))]
    assert any(e.parity == -1 for e in fixers)
    mirror = [e for e in fixers if e.parity == -1][0]
    assert np.allclose(apply(mirror, (2.0, 0.1)), (2.0, 0.9))


def test_corridor_images_sorted_and_signed():
    probe = (0.4, 0.12)
    imgs = corridor_images(0.6, probe, 3.0)
    d = np.hypot(*(imgs.images_of(probe) - probe).T)
    assert np.all(np.diff(d) >= -1e-12)
    assert same_map(imgs.elements[0], identity())
    assert imgs.normalization == pytest.approx(1 / math.sqrt(len(imgs)))
    for e in imgs:
        assert e.parity == round(e.det)


def test_corridor_rejects_bad_arguments():
    with pytest.raises(ValueError):
        corridor_images(0.0, (0.1, 0.0), 1.0)
    with pytest.raises(ValueError):
        corridor_images(1.0, (0.1, 0.0), -1.0)


def test_default_cutoff_envelope():
    k = 200.0
    d = default_cutoff(k)
    assert math.sqrt(2 / (math.pi * k * d)) == pytest.approx(1e-3)


def test_corridor_modes():
    l, q, w = corridor_modes(100.0, 0.6)
    assert list(l) == list(range(1, 20))          # floor(60 / pi) = 19
    np.testing.assert_allclose(q ** 2 + (np.pi * l / 0.6) ** 2, 1e4)
    np.testing.assert_allclose(w, 8 / (0.6 * q))
    with pytest.raises(ValueError):
        corridor_modes(1.0, 0.6)                  # below the first threshold
    with pytest.raises(ValueError):
        corridor_modes(math.pi / 0.6 * 10, 0.6)   # grazing mode


def test_cell_group():
    g = corridor_cell_group(0.6, 200.0)
    assert len(g) == 4 and g.params["periodic"]
    assert [e.parity for e in g] == [1, -1, -1, 1]
    # the normalisation tends to 1/2 as k a grows
    assert abs(corridor_cell_group(1.0, 5000.0).normalization - 0.5) < 0.01
    shifted = conjugate(g, translation((0.0, 0.3)))
    assert shifted.contains((0.1, 0.55)) and not shifted.contains((0.1, -0.05))
    assert g.contains((0.1, -0.25)) and not g.contains((-0.01, 0.0))


def test_conjugation_preserves_composition_table():
    g = wedge_group(4)
    f = compose(translation((0.2, -0.4)), rotation(0.3))
    c = conjugate(g, f)
    np.testing.assert_array_equal(composition_table(c), composition_table(g))
    for e in itertools.islice(c, 8):
        assert e.parity == round(e.det)
