"""Batch front door: JSON configs in, CSV/JSON artifacts out.

Subcommands
-----------
forward    one solve; writes density CSV, field CSV, metadata JSON
farfield   plane-wave far-field table (source route), optional flux-integral
           cross-check recorded in the metadata
acoustic   medium pipeline: far-field table per requested frequency
oracle     partial-wave reference far field on the same CSV schema
verify     standard harness bundle; exit code 3 if any report fails
compare    L^2 / max relative distance between two far-field CSVs

Exit codes: 0 ok, 1 compute failure, 2 config error, 3 verification failure.
Outputs embed the config digest and the convention block; identical configs
produce byte-identical files (fixed quadrature orders and reduction orders).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import acoustic as ac
from . import harness as hn
from . import mie
from .boundary import DeltaSpec, DeltaSystem, density_to_csv_rows, eval_total_field
from .farfield import (
    CONVENTIONS,
    FarFieldPattern,
    direction_grid,
    farfield_kirchhoff,
    farfield_source,
    load_farfield_csv,
    save_farfield_csv,
)
from .geometry import load_mesh, make_sphere_mesh, make_volume_grid
from .kernels import plane_wave, sigma_pair_for_xi
from .volume import PotentialSample

__all__ = ["main", "ConfigError", "run_command"]


class ConfigError(ValueError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# Strict config validation
# ---------------------------------------------------------------------------

_BUMP_KEYS = {"amplitude", "center", "width"}
_SCHEMAS = {
    "mesh": {"kind", "radius", "subdivisions", "path"},
    "grid": {"bbox", "n"},
    "cutoff": {"r_inner", "r_outer"},
    "incident": {"kind", "direction"},
    "observations": {"n_theta", "n_phi"},
    "incidences": {"n_theta", "n_phi", "directions"},
    "kirchhoff": {"radius", "n_theta", "n_phi"},
    "medium": {"shell_density", "rho_bumps", "v_bumps", "cutoff"},
    "oracle": {"a", "alpha", "shells", "L"},
    "verify": {"subdivision", "grid_n", "k", "w", "xi", "R"},
    "tolerances": {"compare_rel_l2"},
}
_TOP_KEYS = {
    "forward": {"k", "mesh", "alpha", "potential_bumps", "cutoff", "grid", "incident", "output"},
    "farfield": {"k", "mesh", "alpha", "potential_bumps", "cutoff", "grid",
                 "incidences", "observations", "kirchhoff", "output"},
    "acoustic": {"frequencies", "mesh", "medium", "grid", "incidences", "observations", "output"},
    "oracle": {"k", "oracle", "incidences", "observations", "output"},
    "verify": {"verify", "output"},
    "compare": {"tolerances"},
}


def _check_keys(obj: dict, allowed: set, path: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"config section '{path}' must be an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown config key '{path}{key}'")
        if key in _SCHEMAS and isinstance(obj[key], dict):
            _check_keys(obj[key], _SCHEMAS[key], f"{path}{key}.")
        if key in ("rho_bumps", "v_bumps", "potential_bumps") and obj[key] is not None:
            for i, bump in enumerate(obj[key]):
                _check_keys(bump, _BUMP_KEYS, f"{path}{key}[{i}].")


def validate_config(cfg: dict, command: str) -> None:
    if command not in _TOP_KEYS:
        raise ConfigError(f"unknown command '{command}'")
    _check_keys(cfg, _TOP_KEYS[command], "")


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Config -> objects
# ---------------------------------------------------------------------------

def _build_mesh(cfg: dict):
    spec = cfg.get("mesh")
    if spec is None:
        raise ConfigError("missing 'mesh' section")
    kind = spec.get("kind")
    if kind == "sphere":
        return make_sphere_mesh(float(spec.get("radius", 1.0)), int(spec.get("subdivisions", 2)))
    if kind == "off":
        return load_mesh(spec["path"])
    raise ConfigError(f"mesh.kind must be 'sphere' or 'off', got {kind!r}")


def _build_grid(cfg: dict):
    spec = cfg.get("grid")
    if spec is None:
        return None
    bbox = spec.get("bbox")
    if isinstance(bbox, (int, float)):
        bbox = (-abs(bbox), abs(bbox))
    return make_volume_grid(tuple(bbox), int(spec["n"]))


def _build_bumps(entries):
    return tuple(
        ac.GaussianBump(
            amplitude=float(b["amplitude"]),
            center=tuple(float(c) for c in b["center"]),
            width=float(b["width"]),
        )
        for b in (entries or [])
    )


def _build_cutoff(spec):
    if spec is None:
        return ac.RadialCutoff(2.0, 3.0)
    return ac.RadialCutoff(float(spec["r_inner"]), float(spec["r_outer"]))


def _build_potential(cfg: dict, grid):
    bumps = _build_bumps(cfg.get("potential_bumps"))
    if not bumps or grid is None:
        return None
    cutoff = _build_cutoff(cfg.get("cutoff"))
    x = grid.cell_center
    vals = np.zeros(len(x))
    for b in bumps:
        v, _, _ = b.fields(x)
        vals += v
    c_val, _, _ = cutoff.fields(x)
    return PotentialSample(grid=grid, values=vals * c_val)


def _alpha_array(cfg: dict, mesh):
    spec = cfg.get("alpha", 0.0)
    if isinstance(spec, (int, float)):
        return np.full(mesh.n_panels, float(spec))
    if isinstance(spec, dict) and "csv" in spec:
        vals = np.loadtxt(spec["csv"], delimiter=",")
        return np.asarray(vals, dtype=float).reshape(mesh.n_panels)
    raise ConfigError("alpha must be a number or {'csv': path}")


def _direction_set(spec, default_nt=16, default_np=32):
    if spec is None:
        spec = {}
    if "directions" in spec:
        dirs = np.asarray(spec["directions"], dtype=float)
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        weights = np.full(len(dirs), 4.0 * np.pi / len(dirs))
        return dirs, weights, None
    nt = int(spec.get("n_theta", default_nt))
    np_ = int(spec.get("n_phi", default_np))
    g = direction_grid(nt, np_)
    return g.normals, g.weights, g


_SINGLE_INCIDENCE = {"directions": [[0.0, 0.0, 1.0]]}


def _metadata(cfg: dict, extra: dict) -> dict:
    md = {"config_digest": config_digest(cfg), "conventions": CONVENTIONS}
    md.update(extra)
    return md


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_forward(cfg: dict, out: Path, quiet: bool) -> int:
    mesh = _build_mesh(cfg)
    grid = _build_grid(cfg)
    k = float(cfg["k"])
    delta = DeltaSpec(mesh=mesh, alpha=_alpha_array(cfg, mesh))
    V = _build_potential(cfg, grid)
    inc_spec = cfg.get("incident", {"kind": "plane", "direction": [0.0, 0.0, 1.0]})
    if inc_spec.get("kind", "plane") != "plane":
        raise ConfigError("forward supports plane-wave incidence")
    inc = plane_wave(np.asarray(inc_spec["direction"], dtype=float))

    sol = DeltaSystem(V, delta, k).solve(inc)

    prefix = (cfg.get("output") or {}).get("prefix", "forward")
    dens_path = out / f"{prefix}_density.csv"
    with open(dens_path, "w") as fh:
        fh.write("panel,cx,cy,cz,re_eta,im_eta,alpha\n")
        for row in density_to_csv_rows(sol):
            fh.write(f"{row[0]}," + ",".join(_fmt(v) for v in row[1:]) + "\n")

    field_path = out / f"{prefix}_field.csv"
    if grid is not None:
        if V is not None:
            values = sol.volume_field.values
        else:
            values = np.asarray(eval_total_field(sol, grid.cell_center, near_warning=False))
        with open(field_path, "w") as fh:
            fh.write("cell,x,y,z,re_psi,im_psi\n")
            for i, (c, v) in enumerate(zip(grid.cell_center, values)):
                fh.write(f"{i},{_fmt(c[0])},{_fmt(c[1])},{_fmt(c[2])},{_fmt(v.real)},{_fmt(v.imag)}\n")

    _write_json(out / f"{prefix}_metadata.json", _metadata(cfg, {
        "k": k,
        "residual": sol.residual,
        "alpha_l4_norm": delta.lp_norm(4.0),
        "n_panels": mesh.n_panels,
        "n_support_cells": int(len(sol.support)),
    }))
    if not quiet:
        print(f"forward: residual {sol.residual:.2e}, wrote {dens_path.name}")
    return 0


def cmd_farfield(cfg: dict, out: Path, quiet: bool) -> int:
    mesh = _build_mesh(cfg)
    grid = _build_grid(cfg)
    k = float(cfg["k"])
    delta = DeltaSpec(mesh=mesh, alpha=_alpha_array(cfg, mesh))
    V = _build_potential(cfg, grid)
    inc_dirs, _, _ = _direction_set(cfg.get("incidences", _SINGLE_INCIDENCE))
    obs_dirs, obs_w, _ = _direction_set(cfg.get("observations"))

    system = DeltaSystem(V, delta, k)
    values = np.empty((len(inc_dirs), len(obs_dirs)), dtype=complex)
    extra = {}
    for i, d in enumerate(inc_dirs):
        sol = system.solve(plane_wave(d))
        values[i] = farfield_source(sol, obs_dirs)
        if i == 0 and "kirchhoff" in cfg:
            kc = cfg["kirchhoff"]
            row = farfield_kirchhoff(sol, float(kc["radius"]), obs_dirs,
                                     int(kc.get("n_theta", 24)), int(kc.get("n_phi", 48)))
            num = float(np.linalg.norm(row - values[0]))
            den = float(np.linalg.norm(values[0])) or 1.0
            extra["kirchhoff_vs_source_rel_l2"] = num / den

    ff = FarFieldPattern(k=k, values=values, observations=obs_dirs,
                         obs_weights=obs_w, incidence=inc_dirs)
    prefix = (cfg.get("output") or {}).get("prefix", "farfield")
    save_farfield_csv(ff, out / f"{prefix}.csv", _metadata(cfg, extra))
    if not quiet:
        print(f"farfield: wrote {prefix}.csv" + (
            f" (two-route gap {extra['kirchhoff_vs_source_rel_l2']:.2e})" if extra else ""))
    return 0


def cmd_acoustic(cfg: dict, out: Path, quiet: bool) -> int:
    mesh = _build_mesh(cfg)
    grid = _build_grid(cfg)
    if grid is None:
        raise ConfigError("acoustic runs need a 'grid' section")
    med_cfg = cfg.get("medium", {})
    shell = med_cfg.get("shell_density", 0.0)
    if isinstance(shell, dict):
        shell = np.loadtxt(shell["csv"], delimiter=",").reshape(mesh.n_panels)
    medium = ac.MediumSpec(
        gamma=mesh,
        shell_density=np.asarray(shell, dtype=float) if not np.isscalar(shell) else float(shell),
        rho_bumps=_build_bumps(med_cfg.get("rho_bumps")),
        v_bumps=_build_bumps(med_cfg.get("v_bumps")),
        cutoff=_build_cutoff(med_cfg.get("cutoff")),
    )
    inc_dirs, _, _ = _direction_set(cfg.get("incidences", _SINGLE_INCIDENCE))
    obs_dirs, obs_w, obs_grid = _direction_set(cfg.get("observations"))
    if obs_grid is None:
        raise ConfigError("acoustic observations must be a (n_theta, n_phi) grid")

    prefix = (cfg.get("output") or {}).get("prefix", "acoustic")
    for omega in cfg.get("frequencies", [1.0]):
        ff = ac.acoustic_farfield(medium, float(omega), inc_dirs, obs_grid, grid)
        save_farfield_csv(ff, out / f"{prefix}_w{omega:g}.csv", _metadata(cfg, {"omega": omega}))
        if not quiet:
            print(f"acoustic: wrote {prefix}_w{omega:g}.csv")
    return 0


def cmd_oracle(cfg: dict, out: Path, quiet: bool) -> int:
    spec = cfg.get("oracle", {})
    k = float(cfg["k"])
    medium = mie.RadialMedium(
        a=float(spec.get("a", 1.0)),
        alpha=float(spec.get("alpha", 0.0)),
        shells=tuple((float(r), float(v)) for r, v in spec.get("shells", [])),
    )
    psol = mie.solve_partial_waves(medium, k, spec.get("L"))
    inc_dirs, _, _ = _direction_set(cfg.get("incidences", _SINGLE_INCIDENCE))
    obs_dirs, obs_w, _ = _direction_set(cfg.get("observations"))
    values = np.stack([mie.mie_farfield_values(psol, d, obs_dirs) for d in inc_dirs])
    ff = FarFieldPattern(k=k, values=values, observations=obs_dirs,
                         obs_weights=obs_w, incidence=inc_dirs)
    prefix = (cfg.get("output") or {}).get("prefix", "oracle")
    save_farfield_csv(ff, out / f"{prefix}.csv", _metadata(cfg, {"L": psol.L}))
    if not quiet:
        print(f"oracle: wrote {prefix}.csv (L = {psol.L})")
    return 0


def cmd_verify(cfg: dict, out: Path, quiet: bool) -> int:
    spec = cfg.get("verify", {})
    subdivision = int(spec.get("subdivision", 2))
    grid_n = int(spec.get("grid_n", 10))
    k = float(spec.get("k", 1.0))
    w = float(spec.get("w", 0.5))
    xi = np.asarray(spec.get("xi", [1.0, 0.0, 0.0]), dtype=float)
    R = float(spec.get("R", 1.8))

    mesh = make_sphere_mesh(1.0, subdivision)
    grid = make_volume_grid((-1.6, 1.6), grid_n)

    def bump_potential(amp):
        x = grid.cell_center
        b = ac.GaussianBump(amplitude=amp, center=(0.0, 0.0, 0.0), width=0.45)
        cut = ac.RadialCutoff(1.05, 1.40)
        v, _, _ = b.fields(x)
        c, _, _ = cut.fields(x)
        return PotentialSample(grid=grid, values=v * c)

    from .acoustic import SchrodingerData

    d1 = SchrodingerData(V=bump_potential(0.35), delta=DeltaSpec(mesh=mesh, alpha=np.full(mesh.n_panels, 1.0)), omega=k)
    d2 = SchrodingerData(V=bump_potential(-0.25), delta=DeltaSpec(mesh=mesh, alpha=np.full(mesh.n_panels, 1.5)), omega=k)
    rho1, rho2 = sigma_pair_for_xi(xi, k, w)

    reports = [
        hn.green_pairing_check(d1, d2, rho1, rho2, R),
        hn.green_pairing_check(d1, d1, rho1, rho2, R),
        hn.fourier_identity_check(d1, d2, xi, w, k),
    ]

    sys1 = DeltaSystem(d1.V, d1.delta, k)
    sol = sys1.solve(plane_wave(np.array([0.0, 0.0, 1.0])))
    reports.append(hn.sommerfeld_check(sol, k))

    g = direction_grid(6, 12)
    values = np.empty((len(g.normals), len(g.normals)), dtype=complex)
    for i, d in enumerate(g.normals):
        values[i] = farfield_source(sys1.solve(plane_wave(d)), g.normals)
    ff = FarFieldPattern(k=k, values=values, observations=g.normals,
                         obs_weights=g.weights, incidence=g.normals)
    reports.append(hn.reciprocity_check(ff, rel_tol=0.01))

    bundle = {
        "config_digest": config_digest(cfg),
        "conventions": CONVENTIONS,
        "reports": [r.to_dict() for r in reports],
        "all_pass": all(r.passed for r in reports),
    }
    prefix = (cfg.get("output") or {}).get("prefix", "verify")
    _write_json(out / f"{prefix}_reports.json", bundle)
    if not quiet:
        for r in reports:
            print(f"  [{'PASS' if r.passed else 'FAIL'}] {r.name} ({r.seconds:.1f}s)")
    return 0 if bundle["all_pass"] else 3


def cmd_compare(path_a: str, path_b: str, out: Path, quiet: bool,
                tol: float | None = None) -> int:
    fa = load_farfield_csv(path_a)
    fb = load_farfield_csv(path_b)
    l2 = fa.rel_l2_distance(fb)
    mx = fa.max_rel_distance(fb)
    report = {
        "file_a": str(path_a),
        "file_b": str(path_b),
        "rel_l2_distance": l2,
        "max_rel_distance": mx,
        "tolerance": tol,
        "pass": (l2 <= tol) if tol is not None else None,
    }
    _write_json(out / "compare_report.json", report)
    if not quiet:
        print(f"compare: rel L2 {l2:.4e}, max {mx:.4e}")
    if tol is not None and l2 > tol:
        return 3
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _set_threads(n: int | None) -> None:
    if not n:
        return
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(int(n))
    except ImportError:
        import os

        os.environ.setdefault("OMP_NUM_THREADS", str(n))


def run_command(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="deltashell",
                                     description="delta-shell scattering engine")
    parser.add_argument("--config", type=str, help="JSON config path")
    parser.add_argument("--out", type=str, default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("forward", "farfield", "acoustic", "oracle", "verify"):
        sub.add_parser(name)
    pc = sub.add_parser("compare")
    pc.add_argument("file_a")
    pc.add_argument("file_b")
    pc.add_argument("--tol", type=float, default=None)

    args = parser.parse_args(argv)
    _set_threads(args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.command == "compare":
        return cmd_compare(args.file_a, args.file_b, out, args.quiet, args.tol)

    if not args.config:
        raise ConfigError(f"command '{args.command}' needs --config")
    with open(args.config) as fh:
        cfg = json.load(fh)
    validate_config(cfg, args.command)
    handler = {
        "forward": cmd_forward,
        "farfield": cmd_farfield,
        "acoustic": cmd_acoustic,
        "oracle": cmd_oracle,
        "verify": cmd_verify,
    }[args.command]
    return handler(cfg, out, args.quiet)


def main(argv=None) -> int:
    try:
        code = run_command(argv)
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # compute failure
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
