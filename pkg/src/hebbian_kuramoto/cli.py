"""Command-line frontend: every experiment as a configured run with file outputs.

Each subcommand resolves its configuration as defaults < ``--config`` JSON
file < explicit flags, writes its outputs plus ``manifest.json`` into
``--out`` (default: ``$HEBBIAN_KURAMOTO_OUT`` or the working directory), and
exits 0 only when every output was written. Failures print one JSON object
``{"error": ..., "message": ..., "command": ...}`` to stderr; usage and
parameter errors exit 2, anything else exits 1.

``rerun MANIFEST`` repeats a run from its manifest's resolved configuration.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__, cubic
from . import ensemble as ens
from . import orbit, pair, regions
from .io import RunManifest, default_out_dir, write_array_csv, write_csv, write_json
from .ode import IntegratorConfig

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D401 - argparse hook
        raise UsageError(message)


# --------------------------------------------------------------------------
# defaults

PAIR_SIMULATE = dict(m=1.0, omega=3.0, alpha=5.0, n=50, horizon=100.0, seed=0, sample_interval=0.05,
                     abs_tol=1e-9, rel_tol=1e-9)
PAIR_ANALYZE = dict(m=1.0, omega=3.0, alpha=10.0)
GAMMA_RASTER = dict(m=[1.0], grid=1000)
ORBIT_APPROX = dict(omega=3.0, alpha=5.0, horizon=300.0, transient=100.0, sample_interval=0.01, n_bins=64)
REGION_SWEEP = {k: (list(v) if isinstance(v, tuple) else v) for k, v in regions.SweepConfig().to_dict().items()}
REGION_SWEEP["jobs"] = 1
ENSEMBLE_RUN = dict(N=50, m=1.0, alpha=1.0, sigma2=0.1, horizon=200.0, seed=0, sample_interval=0.1,
                    method="auto", step=0.01, q=2, snapshots=False, snapshot_every=10, preset=None)

SMOKE_SWEEP = dict(grid=[30, 30], n_initial_conditions=5)

# (alpha, sigma2) for the light-mass and heavy-mass ensemble figures
PRESETS = {
    "light": dict(m=1.0, sets=[(1.0, 0.1), (1.0, 0.3), (1.0, 1.0), (1.0, 1.0), (5.0, 1.0), (10.0, 1.0)]),
    "heavy": dict(m=100.0, sets=[(1.0, 0.01), (1.0, 0.05), (1.0, 0.1), (10.0, 1.0), (20.0, 1.0), (100.0, 1.0)]),
}


def _resolve(defaults: dict, args: argparse.Namespace, keys: list[str]) -> dict:
    cfg = json.loads(json.dumps(defaults))
    if getattr(args, "config", None):
        with open(args.config) as fh:
            extra = json.load(fh)
        unknown = set(extra) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(extra)
    for key in keys:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


# --------------------------------------------------------------------------
# runners: (config, out_dir) -> (outputs, seed)

def run_pair_simulate(cfg: dict, out: Path):
    p = pair.PairParams(cfg["m"], cfg["omega"], cfg["alpha"])
    n = int(cfg["n"])
    if n < 0:
        raise ValueError("n must be >= 0")
    icfg = IntegratorConfig(horizon=cfg["horizon"], abs_tol=cfg["abs_tol"], rel_tol=cfg["rel_tol"],
                            sample_interval=cfg["sample_interval"])
    rng = np.random.default_rng(cfg["seed"])
    x0s = rng.uniform(-np.pi, np.pi, size=(n, 3))
    outputs, proj = [], []
    for i, x0 in enumerate(x0s):
        traj = pair.simulate(p, x0, icfg)
        phi = pair.wrap_phase(traj.states[:, 0])
        table = np.column_stack([traj.times, phi, traj.states[:, 1], traj.states[:, 2]])
        outputs.append(write_array_csv(out / f"traj_{i:03d}.csv", ["t", "phi", "gamma", "k"], table))
        proj.append(np.column_stack([np.full(len(traj), i), traj.states[:, 1], traj.states[:, 2]]))
    data = np.vstack(proj) if proj else np.empty((0, 3))
    outputs.append(write_array_csv(out / "projection_gamma_k.csv", ["trajectory", "gamma", "k"], data))
    write_csv(out / "initial_conditions.csv", ["trajectory", "phi", "gamma", "k"],
              [(i, *x) for i, x in enumerate(x0s)])
    outputs.append(out / "initial_conditions.csv")
    return outputs, cfg["seed"]


def _complex_list(zs):
    return [[float(z.real), float(z.imag)] for z in zs]


def analyze(p: pair.PairParams) -> dict:
    report: dict = {"params": {"m": p.m, "omega": p.omega, "alpha": p.alpha}, "divergence": pair.divergence(p)}
    eqs = pair.equilibria(p)
    if not eqs:
        report.update(region="Omega1", equilibria="none", uv=None)
        return report
    point = pair.uv(p)
    report["region"] = "saddle-node" if p.degenerate else "Omega2-or-Omega3"
    report["uv"] = {"u": point.u, "v": point.v}
    report["gamma_bound"] = pair.gamma_bound(p.m)
    rows = []
    for e in eqs:
        rep = pair.classify(e.label, p)
        coeffs = pair.characteristic_cubic(e.label, p)
        rows.append({
            "label": e.label,
            "phi": e.state.phi, "gamma": e.state.gamma, "k": e.state.k,
            "degenerate": e.degenerate,
            "saddle_node": e.degenerate,
            "stability": rep.stability,
            "in_gamma_region": rep.in_gamma_region,
            "eigenvalues": _complex_list(rep.eigenvalues),
            "oracle_eigenvalues": _complex_list(rep.oracle_eigenvalues),
            "oracle_deviation": rep.oracle_deviation,
            "characteristic_cubic": list(coeffs),
            "discriminant": float(cubic.discriminant(*coeffs)),
        })
    report["equilibria"] = rows
    return report


def run_pair_analyze(cfg: dict, out: Path):
    p = pair.PairParams(cfg["m"], cfg["omega"], cfg["alpha"])
    report = analyze(p)
    path = write_json(out / "analysis.json", report)
    return [path], None


def run_gamma_raster(cfg: dict, out: Path):
    ms = cfg["m"] if isinstance(cfg["m"], list) else [cfg["m"]]
    header = ["u", "v", "m", "in_gamma1", "in_gamma2", "discriminant_p1p3", "discriminant_p2p4"]
    outputs = []
    for m in ms:
        r = pair.gamma_raster(float(m), int(cfg["grid"]))
        rows = r.rows()
        path = out / f"gamma_raster_m{float(m):g}.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            # membership flags as integers, everything else round-trip exact
            np.savetxt(fh, rows, fmt=["%.17g", "%.17g", "%.17g", "%d", "%d", "%.17g", "%.17g"], delimiter=",")
        outputs.append(path)
    return outputs, None


def run_orbit_approx(cfg: dict, out: Path):
    p = pair.PairParams(1.0, cfg["omega"], cfg["alpha"])
    if p.alpha >= 2 * p.omega:
        raise pair.DomainError(f"alpha={p.alpha} >= 2*omega={2 * p.omega}: no rotating orbit to approximate")
    appx = orbit.approximate(p)
    err = orbit.approximation_error(p, cfg["horizon"], cfg["transient"], sample_interval=cfg["sample_interval"],
                                    n_bins=cfg["n_bins"])
    report = {
        "params": {"m": 1.0, "omega": p.omega, "alpha": p.alpha},
        "zeta": appx.zeta,
        "cubic_residual": abs(cubic.polyval(orbit.zeta_cubic(p), appx.zeta)),
        "a": appx.a, "b": appx.b, "c": appx.c, "d": appx.d,
        "rms_gamma_k": err.rms_gamma_k,
        "sup_gamma_k": err.sup_gamma_k,
        "k_amplitude": err.k_amplitude,
        "rms_relative_to_k_amplitude": err.rms_gamma_k / err.k_amplitude,
        "n_samples": err.n_samples,
    }
    j = write_json(out / "orbit.json", report)
    rows = orbit.overlay_rows(p, cfg["horizon"], cfg["transient"], sample_interval=cfg["sample_interval"])
    c = write_array_csv(out / "overlay.csv", ["phi", "gamma_sim", "k_sim", "gamma_approx", "k_approx"], rows)
    return [j, c], None


def _sweep_config(cfg: dict) -> regions.SweepConfig:
    fields = {k: v for k, v in cfg.items() if k != "jobs"}
    for key in ("alpha_range", "omega_range", "grid"):
        fields[key] = tuple(fields[key])
    return regions.SweepConfig(**fields)


def run_region_sweep(cfg: dict, out: Path):
    sc = _sweep_config(cfg)
    result = regions.sweep(sc, jobs=int(cfg["jobs"]))
    csv = write_csv(out / "sweep.csv", ["alpha", "omega", "label", "mean_crossings", "max_crossings"], result.rows())
    anchors = []
    for a, w, expected in regions.ANCHORS:
        r = regions.classify_point(a, w, sc)
        anchors.append({"alpha": a, "omega": w, "label": r.label, "expected": expected,
                        "mean_crossings": r.mean_crossings, "max_crossings": r.max_crossings})
    A, W = np.meshgrid(result.alphas, result.omegas)
    omega1 = result.labels == "Omega1"
    labels, counts = np.unique(result.labels.astype(str), return_counts=True)
    trans = regions.row_transitions(result)
    summary = {
        "config": sc.to_dict(),
        "jobs": int(cfg["jobs"]),
        "anchors": anchors,
        "label_counts": dict(zip(labels.tolist(), counts.tolist())),
        "omega1_matches_alpha_lt_2omega": bool(np.array_equal(omega1, A < 2 * W)),
        "monotone_rows": int(sum(t["monotone"] for t in trans)),
        "rows": len(trans),
        "row_transitions": trans,
    }
    js = write_json(out / "summary.json", summary)
    return [csv, js], sc.seed


def _ensemble_config(p: ens.EnsembleParams, cfg: dict) -> IntegratorConfig:
    method = cfg["method"]
    if method == "auto":
        return ens.default_config(p, cfg["horizon"], cfg["sample_interval"])
    return IntegratorConfig(method=method, horizon=cfg["horizon"], step=cfg["step"], abs_tol=1e-8, rel_tol=1e-8,
                            sample_interval=cfg["sample_interval"])


def _one_ensemble(cfg: dict, out: Path) -> tuple[list[Path], dict]:
    p = ens.EnsembleParams(int(cfg["N"]), cfg["m"], cfg["alpha"], cfg["sigma2"], int(cfg["seed"]))
    icfg = _ensemble_config(p, cfg)
    q = int(cfg["q"])
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    run = ens.simulate(p, cfg["horizon"], cfg["sample_interval"], cfg=icfg, with_r1=(q == 1))
    s = run.series
    outputs = [write_array_csv(out / "r2.csv", ["t", "r2"], np.column_stack([s.times, s.r2]))]
    if q == 1:
        outputs.append(write_array_csv(out / "r1.csv", ["t", "r1"], np.column_stack([s.times, s.r1])))
    if cfg["snapshots"]:
        N = p.N
        idx = np.arange(0, len(s.times), max(1, int(cfg["snapshot_every"])))
        X = run.trajectory.states[idx]
        t = run.trajectory.times[idx]
        hdr = ["t"] + [f"phi_{i}" for i in range(N)] + [f"v_{i}" for i in range(N)]
        outputs.append(write_array_csv(out / "state.csv", hdr, np.column_stack([t, X[:, :2 * N]])))
        iu, ju = np.triu_indices(N, 1)
        hdr = ["t"] + [f"K_{i}_{j}" for i, j in zip(iu, ju)]
        outputs.append(write_array_csv(out / "coupling.csv", hdr, np.column_stack([t, X[:, 2 * N:]])))
        write_array_csv(out / "frequencies.csv", ["omega"], run.final.frequencies[:, None])
        outputs.append(out / "frequencies.csv")
    info = {
        "N": p.N, "m": p.mass, "alpha": p.alpha, "sigma2": p.sigma2, "seed": p.seed,
        "integrator": {"method": icfg.method, "step": icfg.step, "abs_tol": icfg.abs_tol, "rel_tol": icfg.rel_tol},
        "final_r2": float(s.r2[-1]),
        "max_abs_coupling": float(np.abs(run.trajectory.states[:, 2 * p.N:]).max()),
    }
    return outputs, info


def run_ensemble(cfg: dict, out: Path):
    preset = cfg.get("preset")
    if preset is None:
        outputs, info = _one_ensemble(cfg, out)
        outputs.append(write_json(out / "run.json", info))
        return outputs, cfg["seed"]
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    spec = PRESETS[preset]
    outputs, infos = [], []
    for i, (alpha, sigma2) in enumerate(spec["sets"]):
        sub = dict(cfg, m=spec["m"], alpha=alpha, sigma2=sigma2, seed=int(cfg["seed"]) + i, preset=None)
        paths, info = _one_ensemble(sub, out / f"set_{i}")
        outputs += paths
        infos.append(info)
    outputs.append(write_json(out / "preset_summary.json", {"preset": preset, "runs": infos}))
    return outputs, cfg["seed"]


RUNNERS: dict[str, Callable] = {
    "pair-simulate": run_pair_simulate,
    "pair-analyze": run_pair_analyze,
    "gamma-raster": run_gamma_raster,
    "orbit-approx": run_orbit_approx,
    "region-sweep": run_region_sweep,
    "ensemble-run": run_ensemble,
}


# --------------------------------------------------------------------------
# argument parsing

def _positive_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hebbian-kuramoto", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", type=Path, default=None, help="output directory")
        sp.add_argument("--config", type=Path, default=None, help="JSON file with configuration overrides")

    sp = sub.add_parser("pair-simulate", help="trajectories of the reduced system from random starts")
    sp.add_argument("-m", "--m", type=float)
    sp.add_argument("-w", "--omega", type=float)
    sp.add_argument("-a", "--alpha", type=float)
    sp.add_argument("-n", "--n", type=_positive_int, help="number of trajectories")
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sample-interval", dest="sample_interval", type=float)
    common(sp)

    sp = sub.add_parser("pair-analyze", help="equilibria, eigenvalues and stability classes")
    sp.add_argument("-m", "--m", type=float)
    sp.add_argument("-w", "--omega", type=float)
    sp.add_argument("-a", "--alpha", type=float)
    common(sp)

    sp = sub.add_parser("gamma-raster", help="rasterize the three-real-root regions in the (u, v) plane")
    sp.add_argument("-m", "--m", type=float, nargs="+")
    sp.add_argument("--grid", type=int, help="points per side")
    common(sp)

    sp = sub.add_parser("orbit-approx", help="constant-rotation approximation of the rotating orbit (m = 1)")
    sp.add_argument("-w", "--omega", type=float)
    sp.add_argument("-a", "--alpha", type=float)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--transient", type=float)
    sp.add_argument("--sample-interval", dest="sample_interval", type=float)
    common(sp)

    sp = sub.add_parser("region-sweep", help="classify an (alpha, omega) grid by section crossings")
    sp.add_argument("--n-alpha", type=int)
    sp.add_argument("--n-omega", type=int)
    sp.add_argument("--alpha-max", type=float)
    sp.add_argument("--omega-max", type=float)
    sp.add_argument("--ics", dest="n_initial_conditions", type=int, help="initial conditions per cell")
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--threshold", dest="crossing_threshold", type=int)
    sp.add_argument("-m", "--m", type=float)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--smoke", action="store_true", help="30 x 30 grid with 5 starts per cell")
    common(sp)

    sp = sub.add_parser("ensemble-run", help="N oscillators with Hebbian coupling; order-parameter series")
    sp.add_argument("-N", "--N", type=int)
    sp.add_argument("-m", "--m", type=float)
    sp.add_argument("-a", "--alpha", type=float)
    sp.add_argument("--sigma2", type=float)
    sp.add_argument("--horizon", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sample-interval", dest="sample_interval", type=float)
    sp.add_argument("--method", choices=["auto", "rk4", "adaptive"])
    sp.add_argument("--step", type=float)
    sp.add_argument("--q", type=int, choices=[1, 2], help="1 also writes the standard order parameter")
    sp.add_argument("--snapshots", action="store_const", const=True)
    sp.add_argument("--snapshot-every", dest="snapshot_every", type=int)
    sp.add_argument("--preset", choices=sorted(PRESETS), help="run the six light- or heavy-mass parameter sets")
    common(sp)

    sp = sub.add_parser("rerun", help="repeat a run from its manifest")
    sp.add_argument("manifest", type=Path)
    sp.add_argument("--out", type=Path, default=None)
    return parser


_KEYS = {
    "pair-simulate": (PAIR_SIMULATE, ["m", "omega", "alpha", "n", "horizon", "seed", "sample_interval"]),
    "pair-analyze": (PAIR_ANALYZE, ["m", "omega", "alpha"]),
    "gamma-raster": (GAMMA_RASTER, ["m", "grid"]),
    "orbit-approx": (ORBIT_APPROX, ["omega", "alpha", "horizon", "transient", "sample_interval"]),
    "region-sweep": (REGION_SWEEP, ["n_initial_conditions", "horizon", "seed", "crossing_threshold", "m", "jobs"]),
    "ensemble-run": (ENSEMBLE_RUN, ["N", "m", "alpha", "sigma2", "horizon", "seed", "sample_interval", "method",
                                    "step", "q", "snapshots", "snapshot_every", "preset"]),
}


def resolve_config(args: argparse.Namespace) -> dict:
    defaults, keys = _KEYS[args.command]
    if args.command == "region-sweep" and args.smoke:
        defaults = dict(defaults, **SMOKE_SWEEP)
    cfg = _resolve(defaults, args, keys)
    if args.command == "region-sweep":
        grid = list(cfg["grid"])
        if args.n_alpha is not None:
            grid[0] = args.n_alpha
        if args.n_omega is not None:
            grid[1] = args.n_omega
        cfg["grid"] = grid
        if args.alpha_max is not None:
            cfg["alpha_range"] = [cfg["alpha_range"][0], args.alpha_max]
        if args.omega_max is not None:
            cfg["omega_range"] = [cfg["omega_range"][0], args.omega_max]
    return cfg


def execute(command: str, cfg: dict, out: Path) -> RunManifest:
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    outputs, seed = RUNNERS[command](cfg, out)
    manifest = RunManifest(command, cfg, seed, wall_time_s=time.perf_counter() - t0,
                           outputs=[str(Path(o).relative_to(out)) for o in outputs])
    missing = [o for o in outputs if not Path(o).exists()]
    if missing:
        raise RuntimeError(f"outputs not produced: {missing}")
    manifest.write(out)
    return manifest


def _fail(code: int, kind: str, message: str, command: str | None) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message, "command": command}) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        out = args.out if args.out is not None else default_out_dir()
        if command == "rerun":
            m = RunManifest.load(args.manifest)
            command = m.command
            if command not in RUNNERS:
                raise UsageError(f"manifest names unknown command {command!r}")
            cfg = m.config
        else:
            cfg = resolve_config(args)
        manifest = execute(command, cfg, Path(out))
    except UsageError as exc:
        return _fail(EXIT_USAGE, "usage", str(exc), command)
    except (ValueError, TypeError) as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, str(exc), command)
    except Exception as exc:  # noqa: BLE001 - surfaced as a JSON error
        return _fail(EXIT_FAILURE, type(exc).__name__, str(exc), command)
    print(json.dumps({"command": manifest.command, "out": str(out), "outputs": manifest.outputs,
                      "wall_time_s": round(manifest.wall_time_s, 3)}))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
