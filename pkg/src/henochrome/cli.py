"""
Command-line entry point ``heno``.

Every command accepts ``--config PATH`` (JSON) plus flag overrides and writes
its resolved configuration to ``run_config.json`` next to its outputs.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import exact, gauge, io, paraxial, slices, verify
from .grid import SPECTRAL, ResolutionError, TransverseGrid

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    grid: dict = field(default_factory=lambda: {"n": 256, "L": 300.0})
    k: float = 1.0
    modes: list = field(default_factory=list)
    out: str = "."
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def transverse_grid(self) -> TransverseGrid:
        try:
            return TransverseGrid(self.grid["n"], self.grid["L"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def write(self, directory):
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / "run_config.json").write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")


def _complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        return complex(v.replace(" ", ""))
    return complex(v)


def parse_tol_overrides(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--tol-override expects KEY=VAL, got {item!r}")
        key, val = item.split("=", 1)
        if key not in verify.DEFAULT_TOLERANCES:
            raise ConfigError(f"unknown tolerance key {key!r}")
        out[key] = float(val)
    return out


def resolve(args) -> RunConfig:
    """Merge the JSON config file with command-line flags (flags win)."""
    raw = {}
    if getattr(args, "config", None):
        raw = json.loads(Path(args.config).read_text())
    cfg = RunConfig(command=args.command)
    if "grid" in raw:
        cfg.grid = {"n": raw["grid"].get("n", 256), "L": raw["grid"].get("L", 300.0)}
    cfg.k = float(raw.get("k", cfg.k))
    if "mode" in raw:
        cfg.modes = [raw["mode"]]
    cfg.modes = raw.get("modes", cfg.modes)
    cfg.seed = int(raw.get("seed", cfg.seed))
    cfg.tolerances = dict(raw.get("tolerances", {}))
    cfg.options = {key: v for key, v in raw.items()
                   if key not in {"grid", "k", "mode", "modes", "seed", "tolerances", "out"}}
    cfg.out = raw.get("out", cfg.out)
    if args.grid_n is not None:
        cfg.grid["n"] = args.grid_n
    if args.grid_L is not None:
        cfg.grid["L"] = args.grid_L
    if args.k is not None:
        cfg.k = args.k
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    cfg.tolerances.update(parse_tol_overrides(args.tol_override))
    return cfg


# -- commands ----------------------------------------------------------------

def _mode_from_entry(entry: dict, pol, carrier, grid):
    family = entry.get("family", "hermite")
    idx = entry.get("indices", [0, 0])
    w0 = float(entry["waist"])
    if family == "hermite":
        return paraxial.hermite_gauss(int(idx[0]), int(idx[1]), w0, pol, carrier, grid)
    if family == "laguerre":
        return paraxial.laguerre_gauss(int(idx[0]), int(idx[1]), w0, pol, carrier, grid)
    raise ConfigError(f"unknown mode family {family!r}")


def cmd_gen(cfg: RunConfig) -> int:
    if not cfg.modes:
        raise ConfigError("gen needs a 'mode' or 'modes' entry in the config")
    grid = cfg.transverse_grid()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for i, entry in enumerate(cfg.modes):
        carrier = paraxial.Carrier(float(entry.get("k", cfg.k)))
        pols = entry.get("polarizations") or [entry.get("polarization", [1, 0])]
        for j, pol in enumerate(pols):
            vec = np.array([_complex(p) for p in pol])
            mode = _mode_from_entry(entry, vec, carrier, grid)
            idx = "_".join(str(v) for v in entry.get("indices", [0, 0]))
            path = out / f"{entry.get('family', 'hermite')}_{idx}_m{i}_p{j}.heno"
            io.dump_field(mode.spectral, path)
            written.append({"file": str(path), "norm": mode.norm()})
    cfg.write(out)
    print(json.dumps({"written": written}, indent=2))
    return EXIT_OK


def cmd_lift(cfg: RunConfig, infile: str, outfile: str) -> int:
    field_ = io.load_field(infile)
    if field_.space != SPECTRAL or field_.d != 2:
        raise ConfigError(f"lift needs a 2-component spectral file, got d={field_.d} {field_.space}")
    k = cfg.options.get("k_from_flag") or field_.k or cfg.k
    mode = paraxial.ParaxialMode(paraxial.Carrier(k), field_.replace(k=k))
    h = gauge.heno_lift(mode)
    Path(outfile).parent.mkdir(parents=True, exist_ok=True)
    io.dump_field(h.spectral3, outfile)
    res = gauge.gauge_residual(h)
    tol = cfg.tolerances.get("gauge", verify.DEFAULT_TOLERANCES["gauge"])
    cfg.write(Path(outfile).parent)
    print(json.dumps({"file": outfile, "k": k, "gauge_residual": res,
                      "beyond_paraxial_mass": gauge.beyond_paraxial_mass(h)}, indent=2))
    return EXIT_OK if res <= tol else EXIT_FAIL


def cmd_check(cfg: RunConfig, infile: str) -> int:
    f = io.load_field(infile)
    info = {"file": infile, "n": f.grid.n, "L": f.grid.extent, "k": f.k, "space": f.space,
            "components": f.d, "norm": f.norm()}
    ok = True
    if f.d == 3 and f.space == SPECTRAL:
        h = gauge.HenoAmplitude(paraxial.Carrier(f.k or cfg.k), f)
        info["gauge_residual"] = gauge.gauge_residual(h)
        ok = info["gauge_residual"] <= cfg.tolerances.get("gauge", verify.DEFAULT_TOLERANCES["gauge"])
    print(json.dumps(info, indent=2))
    return EXIT_OK if ok else EXIT_FAIL


def _load_for_kind(path: str, kind: str, cfg: RunConfig, lift: bool = False):
    if kind == "planewave":
        return io.load_profile(path)
    f = io.load_field(path)
    if f.space != SPECTRAL:
        raise ConfigError("sampling needs a spectral-space file")
    k = f.k or cfg.k
    if kind == "heno":
        if lift and f.d == 2:
            return gauge.heno_lift(paraxial.ParaxialMode(paraxial.Carrier(k), f))
        if f.d != 3:
            raise ConfigError("kind 'heno' needs a lifted 3-component file")
        return gauge.HenoAmplitude(paraxial.Carrier(k), f)
    if f.d != 2:
        raise ConfigError(f"kind {kind!r} needs a 2-component paraxial file")
    mode = paraxial.ParaxialMode(paraxial.Carrier(k), f)
    if kind == "paraxial":
        return mode
    if kind == "mono":
        return exact.mc_complete(mode, k)
    raise ConfigError(f"unknown kind {kind!r}")


def cmd_sample(cfg: RunConfig, infile: str, points: str, kind: str, outfile: str) -> int:
    obj = _load_for_kind(infile, kind, cfg)
    pts = io.read_points(points)
    if kind == "planewave":
        vals = exact.plane_wave_field(obj, pts)
    else:
        vals = slices._as_evaluator(obj, kind)(pts)
    Path(outfile).parent.mkdir(parents=True, exist_ok=True)
    io.write_samples(vals, outfile)
    cfg.write(Path(outfile).parent)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, suite: str, figures: bool = True) -> int:
    names = verify.SUITE_NAMES if suite == "all" else (suite,)
    for n in names:
        if n not in verify.SUITES:
            raise verify.UnknownSuiteError(
                f"unknown suite {n!r}; choose from all, {', '.join(verify.SUITE_NAMES)}")
    vcfg = verify.VerifyConfig.from_dict({**cfg.options, "seed": cfg.seed, "k": cfg.k,
                                          "grid_n": cfg.grid["n"], "grid_L": cfg.grid["L"],
                                          "tolerances": cfg.tolerances})
    reports = verify.run_all(vcfg, names, threads=gauge._threads())
    out = Path(cfg.out)
    path = verify.write_report(reports[0] if len(reports) == 1 else reports, out / "report.json")
    (out / "timings.json").write_text(json.dumps({r.suite: r.timings for r in reports}, indent=2))
    if figures:
        from . import plotting
        for r in reports:
            plotting.plot_report(r, out)
    cfg.write(out)
    for r in reports:
        for c in r.checks:
            flag = "PASS" if c.passed else "FAIL"
            print(f"{flag} [{r.suite}] {c.claim}: {c.value:.3e} {c.relation} {c.tolerance:.1e}")
        if r.error:
            print(f"FAIL [{r.suite}] aborted: {r.error}")
    print(f"report: {path}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_profile(cfg: RunConfig) -> int:
    rng = np.random.default_rng(cfg.seed)
    o = cfg.options
    prof = exact.random_plane_wave_profile(
        rng, cfg.transverse_grid(), cfg.k, width=float(o.get("width", 0.2)),
        nkz=int(o.get("nkz", 192)), q_max=o.get("q_max"), rho_choice=o.get("rho", exact.UNIFORM3D))
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    io.dump_profile(prof, out / "profile.heno")
    cfg.write(out)
    lo, hi = exact.k_support(prof)
    print(json.dumps({"file": str(out / "profile.heno"), "k_support": [lo, hi]}, indent=2))
    return EXIT_OK


def parse_kgrid(text: str, profile) -> np.ndarray:
    """``auto:N`` spans the profile's k-support; ``kmin:kmax:N`` is explicit."""
    parts = text.split(":")
    try:
        if parts[0] == "auto" and len(parts) == 2:
            lo, hi = exact.k_support(profile)
            return np.linspace(lo, hi, int(parts[1]))
        if len(parts) == 3:
            return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
    except ValueError as exc:
        raise ConfigError(f"bad k-grid {text!r}") from exc
    raise ConfigError(f"bad k-grid {text!r}; use auto:N or kmin:kmax:N")


def cmd_decompose(cfg: RunConfig, profile_file: str, kgrid: str) -> int:
    prof = io.load_profile(profile_file)
    ks = parse_kgrid(kgrid, prof)
    dec = exact.decompose_heno(prof, ks)
    index = io.dump_decomposition(dec, cfg.out)
    cfg.write(cfg.out)
    print(json.dumps({"index": str(index), "carriers": len(ks)}, indent=2))
    return EXIT_OK


def cmd_reconstruct(cfg: RunConfig, index_file: str, points: str, outfile: str) -> int:
    dec, weights = io.load_decomposition(index_file)
    vals = exact.reconstruct_from_heno(dec, io.read_points(points), weights)
    Path(outfile).parent.mkdir(parents=True, exist_ok=True)
    io.write_samples(vals, outfile)
    cfg.write(Path(outfile).parent)
    return EXIT_OK


def cmd_plotdata(cfg: RunConfig, infile: str, kind: str, plane: str, z: float, t: float | None,
                 y: float, zmax: float | None, nz: int, window: float | None,
                 figures: bool = True) -> int:
    # plotting a paraxial file as "heno" lifts it first
    obj = _load_for_kind(infile, kind, cfg, lift=True)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(infile).stem
    if plane == "xy":
        sl = slices.xy_slice(obj, kind, z, z if t is None else t, window)
    elif plane == "xz":
        if zmax is None or nz < 1:
            raise slices.EmptySliceError("an xz slice needs --zmax and --nz >= 1")
        zs = np.linspace(0.0, zmax, nz)
        sl = slices.xz_slice(obj, kind, zs, y, window)
        widths = slices.widths_along_z(sl)
        with open(out / f"{stem}_{kind}_widths.csv", "w") as fh:
            fh.write("z,fwhm\n")
            for zz, ww in zip(zs, widths):
                fh.write(f"{float(zz)!r},{float(ww)!r}\n")
        if figures and "waist" in cfg.options and np.isfinite(widths).all():
            from . import plotting
            w0 = float(cfg.options["waist"])
            plotting.plot_widths(zs, widths, widths[0], paraxial.rayleigh_range(w0, getattr(obj, "k", None) or obj.k0),
                                 out / f"{stem}_{kind}_widths.png")
    else:
        raise ConfigError(f"unknown plane {plane!r}")
    csv_path = out / f"{stem}_{kind}_{plane}.csv"
    sl.write_csv(csv_path)
    if figures:
        from . import plotting
        plotting.plot_slice(sl.u, sl.v, sl.intensity, sl.phase, out / f"{stem}_{kind}_{plane}.png",
                            sl.labels, title=f"{kind} {plane}")
    cfg.write(out)
    print(json.dumps({"csv": str(csv_path)}, indent=2))
    return EXIT_OK


# -- argument parsing --------------------------------------------------------

def _common(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-n", type=int, dest="grid_n")
    p.add_argument("--grid-L", type=float, dest="grid_L")
    p.add_argument("--k", type=float)
    p.add_argument("--out")
    p.add_argument("--tol-override", action="append", dest="tol_override", metavar="KEY=VAL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="heno", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate HG/LG paraxial modes")
    _common(p)

    p = sub.add_parser("lift", help="lift a paraxial file to its henochromatic amplitude")
    _common(p)
    p.add_argument("infile")

    p = sub.add_parser("check", help="print norm and gauge diagnostics of a field file")
    _common(p)
    p.add_argument("infile")

    p = sub.add_parser("sample", help="evaluate a field at points from CSV")
    _common(p)
    p.add_argument("infile")
    p.add_argument("points")
    p.add_argument("--kind", required=True, choices=["paraxial", "heno", "mono", "planewave"])

    p = sub.add_parser("verify", help="run verification suites")
    _common(p)
    p.add_argument("suite", help="suite name or 'all'")
    p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("profile", help="write a seeded random plane-wave profile")
    _common(p)

    p = sub.add_parser("decompose", help="split a plane-wave profile into carriers")
    _common(p)
    p.add_argument("profile")
    p.add_argument("--kgrid", default="auto:64", help="auto:N or kmin:kmax:N")

    p = sub.add_parser("reconstruct", help="sum henochromatic components at points")
    _common(p)
    p.add_argument("index")
    p.add_argument("points")

    p = sub.add_parser("plotdata", help="export |A|^2 and phase on a 2-D slice")
    _common(p)
    p.add_argument("infile")
    p.add_argument("--kind", default="paraxial", choices=list(slices.KINDS))
    p.add_argument("--plane", default="xy", choices=["xy", "xz"])
    p.add_argument("--z", type=float, default=0.0)
    p.add_argument("--t", type=float, default=None, help="time (default: z / c)")
    p.add_argument("--y", type=float, default=0.0)
    p.add_argument("--zmax", type=float)
    p.add_argument("--nz", type=int, default=0)
    p.add_argument("--window", type=float, help="keep |x|, |y| <= window")
    p.add_argument("--no-figures", action="store_true")
    return parser


def _default_out(args, fallback):
    if args.out is None:
        args.out = fallback


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "lift":
            if args.k is not None:
                cfg.options["k_from_flag"] = args.k
            out = cfg.out if cfg.out.endswith(".heno") else str(
                Path(cfg.out) / (Path(args.infile).stem + "_heno.heno"))
            return cmd_lift(cfg, args.infile, out)
        if args.command == "check":
            return cmd_check(cfg, args.infile)
        if args.command == "sample":
            out = cfg.out if cfg.out.endswith(".csv") else str(Path(cfg.out) / "samples.csv")
            return cmd_sample(cfg, args.infile, args.points, args.kind, out)
        if args.command == "verify":
            return cmd_verify(cfg, args.suite, figures=not args.no_figures)
        if args.command == "profile":
            return cmd_profile(cfg)
        if args.command == "decompose":
            return cmd_decompose(cfg, args.profile, args.kgrid)
        if args.command == "reconstruct":
            out = cfg.out if cfg.out.endswith(".csv") else str(Path(cfg.out) / "reconstructed.csv")
            return cmd_reconstruct(cfg, args.index, args.points, out)
        if args.command == "plotdata":
            return cmd_plotdata(cfg, args.infile, args.kind, args.plane, args.z, args.t, args.y,
                                args.zmax, args.nz, args.window, figures=not args.no_figures)
    except (ConfigError, ResolutionError, verify.UnknownSuiteError, io.FormatError,
            slices.EmptySliceError, exact.CoverageError, FileNotFoundError, ValueError) as exc:
        print(f"heno {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
