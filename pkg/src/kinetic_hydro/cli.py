"""Command-line front end: run, sweep, compare, validate.

Configs are TOML with named presets only (schema in the README).  A run
directory holds everything needed to reproduce and audit the run:

    manifest.json      config hash, grids, dt, step count, snapshot times
    fields/w_####.csv  density snapshots as 'x,value'
    fields/g_####.csv  kinetic snapshots as 'x,v,value' (when stored)
    traces.npz         per-step wall records for contraction comparisons
    report.json/.txt   diagnostics entries with pass/fail
    convergence.csv    (sweeps) epsilon, l1_error, floor, passed

Exit status: 0 all checks pass, 1 a diagnostic failed (report still
written), 2 invalid configuration (message names the violated invariant).
Identical configs produce byte-identical CSV outputs.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:                      # Python < 3.11
    import tomli as tomllib

from . import __version__
from .diagnostics import (
    DiagnosticsReport,
    LedgerParts,
    ReferenceOracle,
    ReportEntry,
    RiemannOracle,
    TestFunctionFamily,
    bv_and_lipschitz_monitor,
    hydrodynamic_limit_sweep,
    kinetic_entropy_residual,
    kruzhkov_k_grid,
    ledger_from_parts,
    standard_report,
)
from .equilibrium import VelocityGrid
from .errors import ConfigError, KineticHydroError, ManifestMismatchError
from .flux_models import from_name as flux_from_name
from .kinetic_solver import RunConfig, RunResult, SpatialGrid, solve
from .presets import ScenarioInfo, parse_boundary, parse_initial, parse_source, write_field_csv
from .reference_solver import MacroBoundary

OUT_ENV = "KINETIC_HYDRO_OUT"


@dataclass
class ExperimentConfig:
    """A parsed, validated experiment: one run or one sweep."""

    raw: dict
    run_config: RunConfig
    scenario: ScenarioInfo
    flux_name: str
    sweep_epsilons: Optional[list] = None
    sweep_oracle: Optional[str] = None
    sweep_floor: object = "auto"
    checks: list = field(default_factory=lambda: ["standard"])
    out_dir: Optional[str] = None
    config_hash: str = ""

    @property
    def is_sweep(self) -> bool:
        return self.sweep_epsilons is not None


def _require(table: dict, key: str, section: str):
    if key not in table:
        raise ConfigError(f"missing '{key}' in [{section}]")
    return table[key]


def load_config(path, snapshot_every: Optional[int] = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file '{path}' not readable")
    raw = tomllib.loads(path.read_text())
    digest = hashlib.sha256(
        json.dumps(raw, sort_keys=True, default=str).encode()).hexdigest()

    sc = raw.get("scenario", {})
    nm = raw.get("numerics", {})
    flux_name = _require(sc, "flux", "scenario")
    flux = flux_from_name(flux_name)

    try:
        spatial = SpatialGrid(int(_require(nm, "n_x", "numerics")))
        velocity = VelocityGrid(float(_require(nm, "v_min", "numerics")),
                                float(_require(nm, "v_max", "numerics")),
                                int(_require(nm, "n_v", "numerics")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    scenario = parse_initial(_require(sc, "initial", "scenario"), spatial, velocity)
    boundary = parse_boundary(sc.get("boundary", "from-initial"), velocity, scenario)
    source = parse_source(sc.get("source", "none"), velocity)

    checks = list(raw.get("diagnostics", {}).get("checks", ["standard"]))
    store_g = bool(nm.get("store_g", False))
    if any(c in checks for c in ("entropy", "bv")):
        store_g = True

    run_config = RunConfig(
        spatial=spatial, velocity=velocity, flux=flux,
        epsilon=float(nm.get("epsilon", 1e-3)),
        t_end=float(_require(nm, "t_end", "numerics")),
        boundary=boundary, initial=scenario.initial,
        cfl=float(nm.get("cfl", 0.9)),
        source=source,
        n_snapshots=int(nm.get("snapshots", 32)),
        store_g=store_g,
        relax_enabled=bool(nm.get("relax", True)),
    )
    if snapshot_every is not None:
        _, n_steps = run_config.pick_dt()
        run_config.n_snapshots = max(2, n_steps // max(1, snapshot_every) + 1)
    run_config.validate()

    cfg = ExperimentConfig(raw=raw, run_config=run_config, scenario=scenario,
                           flux_name=flux_name, checks=checks,
                           out_dir=raw.get("output", {}).get("dir"),
                           config_hash=digest)

    if "sweep" in raw:
        sw = raw["sweep"]
        eps = [float(e) for e in _require(sw, "epsilons", "sweep")]
        if any(eps[i] <= eps[i + 1] for i in range(len(eps) - 1)):
            raise ConfigError("[sweep] epsilons must be strictly descending")
        oracle = sw.get("oracle", "reference")
        if oracle not in ("riemann", "reference"):
            raise ConfigError(f"unknown sweep oracle '{oracle}'")
        if oracle == "riemann" and scenario.riemann is None:
            raise ConfigError("riemann oracle needs a riemann initial preset")
        cfg.sweep_epsilons = eps
        cfg.sweep_oracle = oracle
        cfg.sweep_floor = sw.get("floor", "auto")
    return cfg


def _resolve_out(cfg: ExperimentConfig, cli_out: Optional[str],
                 config_path) -> Path:
    if cli_out:
        return Path(cli_out)
    if cfg.out_dir:
        return Path(cfg.out_dir)
    root = os.environ.get(OUT_ENV, ".")
    return Path(root) / (Path(config_path).stem + "-out")


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def build_manifest(cfg: ExperimentConfig) -> dict:
    rc = cfg.run_config
    dt, n_steps = rc.pick_dt()
    n_snap = min(rc.n_snapshots, n_steps + 1)
    snap_steps = np.unique(np.round(np.linspace(0, n_steps, n_snap)).astype(int))
    return {
        "version": __version__,
        "config_hash": cfg.config_hash,
        "scenario": cfg.raw.get("scenario", {}),
        "flux": cfg.flux_name,
        "epsilon": rc.epsilon,
        "relax_enabled": rc.relax_enabled,
        "t_end": rc.t_end,
        "cfl": rc.cfl,
        "n_x": rc.spatial.n_cells,
        "dx": rc.spatial.dx,
        "n_v": rc.velocity.n_cells,
        "v_min": rc.velocity.v_min,
        "v_max": rc.velocity.v_max,
        "dv": rc.velocity.dv,
        "dt": dt,
        "n_steps": n_steps,
        "snapshot_steps": [int(s) for s in snap_steps],
        "snapshot_times": [float(s * dt) for s in snap_steps],
        "store_g": rc.store_g,
        "checks": cfg.checks,
        "has_source": rc.source is not None,
    }


def save_run(run: RunResult, out: Path) -> None:
    fields = out / "fields"
    fields.mkdir(parents=True, exist_ok=True)
    x = run.spatial.centers
    for i in range(run.times.size):
        write_field_csv(fields / f"w_{i:04d}.csv", x, run.w_history[i])
        if run.g_history is not None:
            write_field_csv(fields / f"g_{i:04d}.csv", x, run.g_history[i],
                            v=run.velocity.centers)
    cfg = run.config
    payload = {
        "times": run.times,
        "w_history": run.w_history,
        "g_init": cfg.initial.build(cfg.spatial, cfg.velocity),
        "g_final": run.final.g,
        "trace0": run.trace0, "trace1": run.trace1,
        "inflow0": run.inflow0, "inflow1": run.inflow1,
        "sup_g": run.sup_g, "sup_w": run.sup_w,
        "support_v": run.support_v, "support_x": run.support_x,
        "mass_defect": run.mass_defect,
        "outflow_totals": np.array([run.final.outflow_0, run.final.outflow_1]),
    }
    if run.s_prime_sup is not None:
        payload["s_prime_sup"] = run.s_prime_sup
    np.savez_compressed(out / "traces.npz", **payload)


def _data_range(run: RunResult) -> tuple:
    w0 = run.w_history[0]
    cfg = run.config
    lo = min(float(np.min(w0)), 0.0)
    hi = max(float(np.max(w0)), 0.0)
    for s in (cfg.boundary.support0, cfg.boundary.support1):
        lo, hi = min(lo, s[0]), max(hi, s[1])
    return lo, hi


def run_diagnostics(run: RunResult, checks) -> DiagnosticsReport:
    report = standard_report(run)
    if "entropy" in checks:
        lo, hi = _data_range(run)
        ks, sent_lo, sent_hi = kruzhkov_k_grid(lo, hi, run.velocity)
        fam = TestFunctionFamily(run.config.t_end)
        members = fam.default_members()
        worst = -float("inf")
        worst_tol = 0.0
        for psi in members:
            for k in ks:
                r = kinetic_entropy_residual(run, float(k), psi)
                if r.excess - r.tol_q > worst:
                    worst = r.excess - r.tol_q
                    worst_tol = r.tol_q
        report.add(ReportEntry(
            name="kinetic-entropy-worst-excess",
            value=worst + worst_tol, bound=worst_tol, tolerance=0.0,
            provenance="entropy inequality of the kinetic solution"))
        for sk, sgn, tag in ((sent_lo, +1, "low"), (sent_hi, -1, "high")):
            d = max(kinetic_entropy_residual(run, sk, psi, sentinel_sign=sgn
                                             ).sign_defect for psi in members)
            report.add(ReportEntry(
                name=f"entropy-sentinel-{tag}", value=d, bound=0.0,
                tolerance=1e-10 * max(1.0, float(np.max(run.sup_g))),
                provenance="telescoping of the entropy layer outside the range"))
    if "bv" in checks:
        report.extend(bv_and_lipschitz_monitor(run))
    return report


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config, snapshot_every=args.snapshot_every)
    except (ConfigError, KineticHydroError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = _resolve_out(cfg, args.out, args.config)
    out.mkdir(parents=True, exist_ok=True)
    manifest = build_manifest(cfg)
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True))
    if args.dry_run:
        print(f"dry run: manifest written to {out}")
        return 0

    if cfg.is_sweep:
        return _run_sweep(cfg, out, jobs=args.jobs)

    run = solve(cfg.run_config)
    save_run(run, out)
    report = run_diagnostics(run, cfg.checks)
    report.metadata["config_hash"] = cfg.config_hash
    _atomic_write(out / "report.json", report.to_json())
    _atomic_write(out / "report.txt", report.to_text() + "\n")
    print(report.to_text())
    return 0 if report.all_passed else 1


def _run_sweep(cfg: ExperimentConfig, out: Path, jobs: int) -> int:
    rc = cfg.run_config
    if cfg.sweep_oracle == "riemann":
        wl, wr, x0 = cfg.scenario.riemann
        oracle = RiemannOracle(wl, wr, x0)
    else:
        boundary = MacroBoundary.from_kinetic(rc.boundary, rc.velocity, rc.flux)
        source_macro = None
        if rc.source is not None:
            src = rc.source
            source_macro = lambda x, t, w: src.S(x, t, w)
        oracle = ReferenceOracle(boundary=boundary, source_macro=source_macro,
                                 speed_bound=rc.grid_max_speed())
    if cfg.sweep_floor == "auto":
        floor = 5.0 * rc.spatial.dx * max(cfg.scenario.tv, 1e-12)
    else:
        floor = float(cfg.sweep_floor)

    result = hydrodynamic_limit_sweep(rc, cfg.sweep_epsilons, oracle,
                                      floor=floor, jobs=max(1, jobs),
                                      keep_runs=True)
    _atomic_write(out / "convergence.csv", result.to_csv())
    finest = min(result.runs) if result.runs else None
    if finest is not None:
        run = result.runs[finest]
        save_run(run, out)
        oracle_fields = oracle.fields(run.config, run.times)
        for i in range(run.times.size):
            write_field_csv(out / "fields" / f"oracle_w_{i:04d}.csv",
                            rc.spatial.centers, oracle_fields[i])
        report = run_diagnostics(run, cfg.checks)
    else:
        report = DiagnosticsReport()
    report.metadata.update({"sweep_floor": floor, "config_hash": cfg.config_hash,
                            "sweep_passed": result.all_passed})
    _atomic_write(out / "report.json", report.to_json())
    _atomic_write(out / "report.txt", report.to_text() + "\n")
    for row in result.rows:
        note = f"  [{row.note}]" if row.note else ""
        print(f"eps={row.epsilon:<10.3g} l1_error={row.l1_error:.6e} "
              f"floor={row.floor:.3e} {'pass' if row.passed else 'FAIL'}{note}")
    ok = result.all_passed and report.all_passed
    return 0 if ok else 1


_COMPAT_KEYS = ("n_x", "n_v", "v_min", "v_max", "dt", "n_steps", "flux", "epsilon")


def _load_parts(run_dir: Path) -> tuple:
    mpath = run_dir / "manifest.json"
    tpath = run_dir / "traces.npz"
    if not mpath.is_file() or not tpath.is_file():
        raise ManifestMismatchError(f"'{run_dir}' is not a saved run directory")
    manifest = json.loads(mpath.read_text())
    data = np.load(tpath)
    flux = flux_from_name(manifest["flux"])
    velocity = VelocityGrid(manifest["v_min"], manifest["v_max"], manifest["n_v"])
    parts = LedgerParts(
        speeds=np.asarray(flux.a(velocity.centers), dtype=float),
        dx=manifest["dx"], dv=manifest["dv"], dt=manifest["dt"],
        g_init=data["g_init"], g_final=data["g_final"],
        trace0=data["trace0"], trace1=data["trace1"],
        inflow0=data["inflow0"], inflow1=data["inflow1"],
        s_prime_sup=data["s_prime_sup"] if "s_prime_sup" in data else None,
    )
    return manifest, parts


def cmd_compare(args) -> int:
    try:
        man_a, parts_a = _load_parts(Path(args.run_a))
        man_b, parts_b = _load_parts(Path(args.run_b))
        bad = [k for k in _COMPAT_KEYS if man_a.get(k) != man_b.get(k)]
        if bad:
            raise ManifestMismatchError(
                f"manifests differ in {', '.join(bad)}; runs are not comparable")
        entry = ledger_from_parts(parts_a, parts_b)
    except (ManifestMismatchError, KineticHydroError) as exc:
        print(f"compare error: {exc}", file=sys.stderr)
        return 2
    report = DiagnosticsReport(metadata={"run_a": str(args.run_a),
                                         "run_b": str(args.run_b)})
    report.add(entry)
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        _atomic_write(outdir / "report.json", report.to_json())
    print(report.to_text())
    return 0 if report.all_passed else 1


def cmd_validate(args) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, KineticHydroError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    dt, n_steps = cfg.run_config.pick_dt()
    kind = "sweep" if cfg.is_sweep else "single run"
    print(f"ok: {kind}, dt={dt:.6g}, {n_steps} steps, hash {cfg.config_hash[:12]}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kinetic-hydro",
        description="kinetic relaxation solver and verification harness on (0,1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a run or sweep from a config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help=f"output dir (default from "
                       f"config or ${OUT_ENV})")
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--dry-run", action="store_true")
    p_run.add_argument("--snapshot-every", type=int, default=None,
                       help="snapshot stride in steps")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="alias of run requiring a [sweep] section")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--dry-run", action="store_true")
    p_sweep.add_argument("--snapshot-every", type=int, default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="contraction ledger of two saved runs")
    p_cmp.add_argument("run_a")
    p_cmp.add_argument("run_b")
    p_cmp.add_argument("--out", default=None)
    p_cmp.set_defaults(func=cmd_compare)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("--config", required=True)
    p_val.set_defaults(func=cmd_validate)

    args = parser.parse_args(argv)
    return args.func(args)


def cmd_sweep(args) -> int:
    try:
        cfg = load_config(args.config, snapshot_every=args.snapshot_every)
    except (ConfigError, KineticHydroError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if not cfg.is_sweep:
        print("config error: 'sweep' subcommand needs a [sweep] section",
              file=sys.stderr)
        return 2
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
