"""Command-line front end: one experiment per invocation.

Every command writes its outputs plus ``manifest.txt`` into ``--out``.  A
manifest holds the full configuration as ``key=value`` lines and can be fed
back with ``--config`` to repeat the run; lines whose key contains a dot
(``run.*``, ``result.*``) are informational and ignored on input.

Geometries are given as ``kind:params``::

    wedge:3            dihedral wedge, cone frame (bisector on +x)
    corridor:0.6       x >= 0, |y| <= a/2  (``--frame stadium``: 0 <= y <= a)
    cone:1.0           60 degree wedge capped by a semicircle of that diameter
    quarter_stadium:0.6,1.2
    circle:1.0
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import io as bio
from .bim import (EigenstateSet, eigen_scan, ensemble_of_states, make_circle, make_cone,
                  make_quarter_stadium)
from .correlation import (CorrelationGrid, angular_average, corridor_mode_theory,
                          corridor_theory, corridor_truncation_change, eigenstate_correlation,
                          error_metric, mean_theory, randwave_correlation, residual_grid,
                          theory_correlation)
from .grids import grid_points
from .randwave import DEFAULT_COMPONENTS, sample_wave, waves_to_csv
from .specfun import bessel_j0
from .symmetry import conjugate, corridor_cell_group, default_cutoff, translation, wedge_group

log = logging.getLogger("billiardcorr")

# defaults follow the desk-scale experiments
DEFAULTS = {
    "geometry": "wedge:3",
    "frame": "default",
    "k": 200.0,
    "probe": (0.3, 0.0),
    "side": None,            # None: 4 wavelengths
    "resolution": 65,
    "n_waves": 4000,
    "components": DEFAULT_COMPONENTS,
    "ensemble_size": 100,
    "seed": 7,
    "cutoff": None,          # None: envelope rule
    "nodes_per_wavelength": 10.0,
    "threads": os.cpu_count() or 1,
    "count": 20,
    "bins": None,
    "theory_k": "center",    # BIM theory at the nominal k, or "mean" over the states
}
_FLOATS = {"k", "side", "cutoff", "nodes_per_wavelength"}
_INTS = {"resolution", "n_waves", "components", "ensemble_size", "seed", "threads", "count",
         "bins"}


# manifest entries that describe a run rather than configure it
_INFO_KEYS = {"command", "source", "ensemble", "theory", "empirical", "grid"}


class UsageError(Exception):
    pass


# --- configuration ------------------------------------------------------------

def _convert(key, value):
    if value is None or value == "" or value == "None":
        return None
    if key == "probe":
        if isinstance(value, str):
            try:
                vals = bio.parse_floats(value)
            except ValueError:
                raise UsageError(f"probe must be 'x,y', got {value!r}") from None
        else:
            vals = tuple(float(v) for v in value)
        if len(vals) != 2:
            raise UsageError(f"probe must be 'x,y', got {value!r}")
        return vals
    try:
        if key in _FLOATS:
            return float(value)
        if key in _INTS:
            f = float(value)
            if f != int(f):
                raise ValueError
            return int(f)
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None
    return value


def load_config(args) -> dict:
    """Defaults, then the config file, then explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            entries = bio.read_manifest(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        for key, value in entries.items():
            if "." in key or key in _INFO_KEYS:
                continue
            if key not in DEFAULTS:
                raise UsageError(f"unknown config key {key!r} in {args.config}")
            cfg[key] = _convert(key, value)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = _convert(key, value)
    if cfg["threads"] is None or cfg["threads"] < 1:
        raise UsageError("threads must be >= 1")
    return cfg


@dataclass(frozen=True)
class Geometry:
    kind: str
    params: tuple
    frame: str

    @property
    def label(self) -> str:
        return f"{self.kind}:" + ",".join(repr(float(p)) for p in self.params)


def parse_geometry(text: str, frame: str = "default") -> Geometry:
    kind, _, rest = text.partition(":")
    kind = kind.strip().replace("-", "_")
    try:
        params = tuple(float(v) for v in rest.split(",")) if rest.strip() else ()
    except ValueError:
        raise UsageError(f"bad geometry parameters in {text!r}") from None
    defaults = {"wedge": (3,), "corridor": (0.6,), "cone": (1.0,),
                "quarter_stadium": (0.6, 1.2), "circle": (1.0,)}
    if kind not in defaults:
        raise UsageError(f"unknown geometry {kind!r}; expected one of {sorted(defaults)}")
    if not params:
        params = defaults[kind]
    if len(params) != len(defaults[kind]):
        raise UsageError(f"{kind} takes {len(defaults[kind])} parameter(s)")
    if any(not p > 0 for p in params):
        raise UsageError("geometry parameters must be positive")
    if kind == "wedge" and params[0] != int(params[0]):
        raise UsageError("wedge order must be an integer")
    frames = {"wedge": ("bisector", "canonical"), "cone": ("bisector",),
              "corridor": ("centered", "stadium"), "quarter_stadium": ("stadium",),
              "circle": ("centered",)}
    if frame == "default":
        frame = frames[kind][0]
    if frame not in frames[kind]:
        raise UsageError(f"frame {frame!r} not available for {kind}; use one of {frames[kind]}")
    return Geometry(kind, params, frame)


def _wedge_n(geo: Geometry) -> int:
    return 3 if geo.kind == "cone" else int(geo.params[0])


def _corridor_a(geo: Geometry) -> float:
    return float(geo.params[0])


def _y_shift(geo: Geometry) -> float:
    return 0.5 * _corridor_a(geo) if geo.frame == "stadium" else 0.0


def _boundary(geo: Geometry):
    if geo.kind == "cone":
        return make_cone(geo.params[0])
    if geo.kind == "quarter_stadium":
        return make_quarter_stadium(*geo.params)
    if geo.kind == "circle":
        return make_circle(geo.params[0])
    raise UsageError(f"{geo.kind} is not a closed billiard; use cone, quarter_stadium or circle")


def _side(cfg) -> float:
    side = cfg["side"]
    if side is None:
        side = 4 * 2 * math.pi / cfg["k"]
    if not side > 0:
        raise UsageError("side must be positive")
    cfg["side"] = side
    return side


def _check_common(cfg):
    if not cfg["k"] > 0:
        raise UsageError("k must be positive")
    if cfg["resolution"] < 3 or cfg["resolution"] % 2 == 0:
        raise UsageError("resolution must be an odd integer >= 3")


def _inside(geo: Geometry, pts):
    pts = np.asarray(pts, dtype=float)
    if geo.kind == "wedge":
        return wedge_group(_wedge_n(geo), geo.frame).contains(pts)
    if geo.kind == "corridor":
        half = 0.5 * _corridor_a(geo) + 1e-10
        return (pts[..., 0] >= -1e-10) & (np.abs(pts[..., 1] - _y_shift(geo)) <= half)
    return _boundary(geo).contains(pts)


def _probe_inside(geo: Geometry, cfg):
    if not bool(np.all(_inside(geo, cfg["probe"]))):
        raise UsageError(f"probe {tuple(cfg['probe'])} lies outside the {geo.kind} domain")


def _report_containment(geo: Geometry, cfg, side: float, info: dict):
    """Warn (do not clip) when the grid leaves the physical domain."""
    pts = grid_points(cfg["probe"], side, cfg["resolution"]).reshape(-1, 2)
    frac = 1.0 - float(np.mean(_inside(geo, pts)))
    info["result.grid_outside_fraction"] = frac
    if frac > 0:
        log.warning("%.1f%% of the grid lies outside the %s domain", 100 * frac, geo.kind)


# --- theory helpers -------------------------------------------------------------

def _theory_grid(geo: Geometry, cfg, k: float, side: float, method: str = "images"):
    """Closed-form grid for the geometry's idealisation (wedge or corridor)."""
    probe, res = cfg["probe"], cfg["resolution"]
    if geo.kind in ("wedge", "cone"):
        return theory_correlation(wedge_group(_wedge_n(geo), geo.frame), k, probe, side, res)
    if geo.kind in ("corridor", "quarter_stadium"):
        a = _corridor_a(geo)
        if method == "modes":
            return corridor_mode_theory(k, a, probe, side, res, _y_shift(geo))
        return corridor_theory(k, a, probe, side, res, cfg["cutoff"], _y_shift(geo))
    raise UsageError(f"no closed-form theory for {geo.kind}")


def _randwave_images(geo: Geometry, k: float):
    if geo.kind in ("wedge", "cone"):
        return wedge_group(_wedge_n(geo), geo.frame)
    if geo.kind in ("corridor", "quarter_stadium"):
        cell = corridor_cell_group(_corridor_a(geo), k)
        shift = _y_shift(geo)
        return conjugate(cell, translation((0.0, shift))) if shift else cell
    raise UsageError(f"no adapted random-wave model for {geo.kind}")


def _base_manifest(command: str, cfg, geo: Geometry) -> dict:
    out = {"command": command}
    for key in DEFAULTS:
        value = cfg[key]
        if key == "geometry":
            value = geo.label
        elif key == "frame":
            value = geo.frame
        out[key] = "None" if value is None else value
    out["run.version"] = __version__
    out["run.numpy"] = np.__version__
    out["run.scipy"] = scipy.__version__
    return out


def _finish(out_dir: Path, manifest: dict, outputs: list, started: float):
    manifest["run.outputs"] = ",".join(str(Path(p).name) for p in outputs)
    manifest["run.seconds"] = round(time.time() - started, 3)
    bio.write_manifest(out_dir / "manifest.txt", manifest)


# --- commands -----------------------------------------------------------------

def cmd_theory(args, cfg) -> int:
    started = time.time()
    geo = parse_geometry(cfg["geometry"], cfg["frame"])
    _check_common(cfg)
    _probe_inside(geo, cfg)
    side = _side(cfg)
    out = Path(args.out)
    manifest = _base_manifest("theory", cfg, geo)
    if geo.kind in ("corridor", "quarter_stadium"):
        cutoff = cfg["cutoff"] if cfg["cutoff"] is not None else default_cutoff(cfg["k"])
        change, grid, _ = corridor_truncation_change(cfg["k"], _corridor_a(geo), cfg["probe"],
                                                     side, cfg["resolution"], cutoff,
                                                     _y_shift(geo))
        manifest["result.cutoff"] = cutoff
        manifest["result.truncation_change"] = change
        print(f"cutoff doubling changes the grid by {change:.3e} (sup norm)")
    else:
        grid = _theory_grid(geo, cfg, cfg["k"], side)
    _report_containment(geo, cfg, side, manifest)
    path = grid.to_csv(out / "theory.csv")
    manifest["result.images"] = grid.meta.get("images", "")
    _finish(out, manifest, [path], started)
    print(f"wrote {path}")
    return 0


def cmd_randwave_ensemble(args, cfg) -> int:
    """Record an ensemble.  Waves are keyed by (seed, index), so the manifest
    alone regenerates it; ``--write-waves`` also stores every component."""
    started = time.time()
    geo = parse_geometry(cfg["geometry"], cfg["frame"])
    if not cfg["k"] > 0:
        raise UsageError("k must be positive")
    if cfg["n_waves"] < 2:
        raise UsageError("n-waves must be at least 2")
    images = _randwave_images(geo, cfg["k"])
    out = Path(args.out)
    manifest = _base_manifest("randwave-ensemble", cfg, geo)
    manifest["source"] = "randwave"
    outputs = []
    if args.write_waves:
        waves = (sample_wave(cfg["k"], images, cfg["components"], cfg["seed"], i)
                 for i in range(cfg["n_waves"]))
        path = out / "waves.csv"
        waves_to_csv(path, waves)
        outputs.append(path)
    _finish(out, manifest, outputs, started)
    print(f"randwave ensemble: {cfg['n_waves']} realisations, seed {cfg['seed']}, "
          f"manifest {out / 'manifest.txt'}")
    return 0


def cmd_bim_ensemble(args, cfg) -> int:
    started = time.time()
    geo = parse_geometry(cfg["geometry"], cfg["frame"])
    boundary = _boundary(geo)
    if not cfg["k"] > 0:
        raise UsageError("k must be positive")
    if cfg["ensemble_size"] < 1:
        raise UsageError("ensemble-size must be positive")
    es = ensemble_of_states(boundary, cfg["k"], cfg["ensemble_size"],
                            cfg["nodes_per_wavelength"], threads=cfg["threads"])
    out = Path(args.out)
    es.save(out / "states")
    manifest = _base_manifest("bim-ensemble", cfg, geo)
    manifest["source"] = "bim"
    manifest["result.count"] = len(es)
    manifest["result.k_min"] = float(es.ks.min())
    manifest["result.k_max"] = float(es.ks.max())
    manifest["result.max_sigma"] = max(s.sigma for s in es)
    _finish(out, manifest, [out / "states"], started)
    print(f"{len(es)} states in [{es.ks.min():.6f}, {es.ks.max():.6f}] -> {out / 'states'}")
    return 0


def _load_ensemble(path):
    path = Path(path)
    man = path / "manifest.txt"
    if not man.exists():
        raise UsageError(f"no ensemble manifest at {man}")
    entries = bio.read_manifest(man)
    source = entries.get("source")
    if source not in ("randwave", "bim"):
        raise UsageError(f"{man} does not describe an ensemble")
    return source, entries


def cmd_empirical(args, cfg) -> int:
    started = time.time()
    source, ens = _load_ensemble(args.ensemble)
    # the ensemble fixes geometry, k and seeds; the probe and grid come from cfg
    for key in ("geometry", "frame", "k", "n_waves", "components", "seed", "ensemble_size",
                "nodes_per_wavelength"):
        cfg[key] = _convert(key, ens[key])
    geo = parse_geometry(cfg["geometry"], cfg["frame"])
    _check_common(cfg)
    _probe_inside(geo, cfg)
    side = _side(cfg)
    out = Path(args.out)
    manifest = _base_manifest("empirical", cfg, geo)
    manifest["ensemble"] = str(Path(args.ensemble))
    if source == "randwave":
        images = _randwave_images(geo, cfg["k"])
        emp = randwave_correlation(images, cfg["k"], cfg["probe"], side, cfg["resolution"],
                                   cfg["n_waves"], cfg["components"], cfg["seed"],
                                   cfg["threads"])
        theory = _theory_grid(geo, cfg, cfg["k"], side, method="images"
                              if geo.kind in ("wedge", "cone") else "modes")
    else:
        es = EigenstateSet.load(Path(args.ensemble) / "states")
        emp = eigenstate_correlation(es, cfg["probe"], side, cfg["resolution"])
        if geo.kind == "circle":
            theory = None
        else:
            if cfg["theory_k"] not in ("center", "mean"):
                raise UsageError("theory-k must be 'center' or 'mean'")
            if cfg["theory_k"] == "mean":
                theory = mean_theory(lambda kv: _theory_grid(geo, cfg, kv, side, "modes"),
                                     es.ks)
            else:
                theory = _theory_grid(geo, cfg, cfg["k"], side, "modes")
    paths = [emp.to_csv(out / "empirical.csv")]
    profile = angular_average(emp, cfg["bins"])
    paths.append(profile.to_csv(out / "angular.csv"))
    if theory is not None:
        paths.append(theory.to_csv(out / "theory.csv"))
        metric = error_metric(emp, theory)
        paths.append(residual_grid(emp, theory).to_csv(out / "residual.csv"))
        manifest["result.error_metric"] = metric
        print(f"error metric {metric:.6g}")
    _finish(out, manifest, paths, started)
    return 0


def cmd_compare(args, cfg) -> int:
    started = time.time()
    try:
        theory = CorrelationGrid.from_csv(args.theory)
        emp = CorrelationGrid.from_csv(args.empirical)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read grids: {exc}") from None
    if not emp.same_geometry(theory):
        raise UsageError("grids differ in probe, side or resolution")
    metric = error_metric(emp, theory)
    out = Path(args.out)
    path = residual_grid(emp, theory).to_csv(out / "residual.csv")
    manifest = {"command": "compare", "theory": args.theory, "empirical": args.empirical,
                "result.error_metric": metric, "run.version": __version__}
    _finish(out, manifest, [path], started)
    print(f"error metric {metric:.6g}")
    return 0


def cmd_angular_average(args, cfg) -> int:
    started = time.time()
    try:
        grid = CorrelationGrid.from_csv(args.grid)
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read grid: {exc}") from None
    profile = angular_average(grid, cfg["bins"])
    out = Path(args.out)
    path = profile.to_csv(out / "angular.csv")
    dev = profile.means - bessel_j0(grid.k * profile.mean_radii)
    rms = float(np.sqrt(np.mean(dev ** 2)))
    manifest = {"command": "angular-average", "grid": args.grid, "bins": len(profile.radii),
                "result.rms_vs_j0": rms, "run.version": __version__}
    _finish(out, manifest, [path], started)
    print(f"rms deviation from J0(kr): {rms:.4g}")
    return 0


def circle_levels(count: int):
    """The lowest ``count`` distinct Dirichlet levels of the unit disk (zeros of J_m)."""
    from scipy.special import jn_zeros
    zeros = np.sort(np.concatenate([jn_zeros(m, count) for m in range(count)]))
    return zeros[:count]


def cmd_validate_circle(args, cfg) -> int:
    started = time.time()
    count = cfg["count"]
    if count < 1:
        raise UsageError("count must be positive")
    ref = circle_levels(count)
    boundary = make_circle(1.0)
    k_hi = 0.5 * (ref[-1] + circle_levels(count + 1)[-1])
    ks = eigen_scan(boundary, 1.0, k_hi, nodes_per_wavelength=cfg["nodes_per_wavelength"],
                    threads=cfg["threads"])
    ok = len(ks) == count
    rel = np.full(count, np.inf)
    if ok:
        rel = np.abs(ks - ref) / ref
    worst = float(np.max(rel))
    out = Path(args.out)
    table = np.column_stack([np.arange(1, count + 1), ref,
                             ks if ok else np.full(count, np.nan), rel])
    table = np.nan_to_num(table, nan=-1.0, posinf=-1.0)
    path = bio.write_table(out / "circle.csv", {"type": "circle_validation", "count": count},
                           table, ["n", "bessel_zero", "bim", "relative_error"])
    manifest = {"command": "validate-circle", "count": count,
                "nodes_per_wavelength": cfg["nodes_per_wavelength"],
                "result.found": len(ks), "result.max_relative_error": worst,
                "run.version": __version__}
    _finish(out, manifest, [path], started)
    print(f"found {len(ks)} levels below {k_hi:.4f}; max relative error {worst:.3e}")
    if not ok or worst > 1e-4:
        print("circle validation FAILED", file=sys.stderr)
        return 1
    return 0


# --- argument parsing -----------------------------------------------------------

def _add_common(p, *names):
    flags = {
        "geometry": dict(help="kind:params, e.g. wedge:3, corridor:0.6, cone:1, "
                              "quarter_stadium:0.6,1.2, circle:1"),
        "frame": dict(help="coordinate frame (wedge: bisector|canonical; corridor: "
                           "centered|stadium)"),
        "k": dict(help="wavenumber"),
        "probe": dict(help="probe point x,y"),
        "side": dict(help="grid side length (default 4 wavelengths)"),
        "resolution": dict(help="grid points per side (odd)"),
        "n-waves": dict(help="random-wave realisations"),
        "components": dict(help="plane waves per realisation"),
        "ensemble-size": dict(help="number of eigenstates"),
        "seed": dict(help="random seed"),
        "cutoff": dict(help="corridor image cutoff distance"),
        "nodes-per-wavelength": dict(help="BIM boundary nodes per wavelength"),
        "threads": dict(help="worker threads (default: all cores)"),
        "count": dict(help="number of circle levels"),
        "bins": dict(help="radial bins for angular averages"),
        "theory-k": dict(choices=("center", "mean"),
                         help="BIM ensembles: theory at the nominal k (center) or "
                              "averaged over the state wavenumbers (mean)"),
    }
    for name in names:
        p.add_argument(f"--{name}", dest=name.replace("-", "_"), default=None,
                       **flags[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="billiardcorr", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, func, helptext, *flags):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="key=value file (e.g. a previous manifest)")
        p.add_argument("--out", required=True, help="output directory")
        _add_common(p, *flags)
        p.set_defaults(func=func)
        return p

    grid = ("probe", "side", "resolution", "bins")
    command("theory", cmd_theory, "closed-form correlation grid",
            "geometry", "frame", "k", "cutoff", "probe", "side", "resolution")
    p = command("randwave-ensemble", cmd_randwave_ensemble, "record a random-wave ensemble",
                "geometry", "frame", "k", "n-waves", "components", "seed", "threads")
    p.add_argument("--write-waves", action="store_true", help="also write every component")
    command("bim-ensemble", cmd_bim_ensemble, "eigenstates of a billiard near k",
            "geometry", "k", "ensemble-size", "nodes-per-wavelength", "threads")
    p = command("empirical", cmd_empirical, "ensemble correlation, error metric, angular average",
                *grid, "threads", "cutoff", "theory-k")
    p.add_argument("--ensemble", required=True, help="directory written by an ensemble command")
    p = command("compare", cmd_compare, "error metric between two grids")
    p.add_argument("theory")
    p.add_argument("empirical")
    p = command("angular-average", cmd_angular_average, "radial profile of a grid", "bins")
    p.add_argument("grid")
    command("validate-circle", cmd_validate_circle, "BIM levels of the unit disk vs Bessel zeros",
            "count", "nodes-per-wavelength", "threads")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        print(f"billiardcorr {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError) as exc:
        print(f"billiardcorr {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
