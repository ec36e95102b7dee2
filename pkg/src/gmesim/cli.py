"""Command-line runner.

Subcommands
-----------
simulate     prep, interaction, dephasing, tomography and scores for each run point
sweep        entanglement versus interaction time at fixed phase
fieldtheory  J, K and |D| tables plus the near-field residual
gme-phase    gravitational phase calculator
parse        canonical printout of a pulse program

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
Outputs are deterministic for a fixed config and seed; the wall time goes to stderr.

CSV columns
-----------
simulate: run, phi_rad, tau_s, delta_rad_s, concurrence, concurrence_std, tangle, eof,
    entangled, fidelity, then ``rho_zz_<i><j>_re|im`` and ``rho_num_<i><j>_re|im``
    (row-major, 1-based indices)
sweep: index, tau_s, delta_rad_s, phi_rad, concurrence, concurrence_std, tangle, eof,
    fidelity
fieldtheory: table (J|K|D), x (eta, eta' or s in units of r/c), re, im, abs,
    quad_error, residual, gd_max, status
"""
import argparse
import csv
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import fieldqed as FQ
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .dsl import ParseError, format_program, parse
from .gme import GmeParams, PUBLISHED_SET, mass_correction, phase_report
from .noise import NoiseModel
from .protocol import fig1c_program, simulate, simulate_program, sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass(frozen=True)
class RunRecord:
    inputs: dict
    run: int
    phi: float
    tau: float
    delta: float
    rho_number: np.ndarray
    rho_zz: np.ndarray
    fidelity: float
    report: object
    concurrence_std: float = None
    setting_seeds: tuple = None
    wall_time: float = None  # not serialised: it would break byte-identical output

    def to_dict(self):
        return {
            "run": self.run,
            "phi_rad": self.phi,
            "tau_s": self.tau,
            "delta_rad_s": self.delta,
            "fidelity": self.fidelity,
            "entanglement": asdict(self.report),
            "concurrence_std": self.concurrence_std,
            "setting_seeds": list(self.setting_seeds) if self.setting_seeds else None,
            "rho_number": _matrix_json(self.rho_number),
            "rho_zz": _matrix_json(self.rho_zz),
        }


def _matrix_json(m):
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def _matrix_cols(prefix, m):
    cols = {}
    for i in range(4):
        for j in range(4):
            cols[f"{prefix}_{i + 1}{j + 1}_re"] = float(m[i, j].real)
            cols[f"{prefix}_{i + 1}{j + 1}_im"] = float(m[i, j].imag)
    return cols


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv(rows, columns):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _emit(text, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _overrides(args):
    ov = {}
    if getattr(args, "seed", None) is not None:
        ov["seed"] = args.seed
    if getattr(args, "shots", None) is not None:
        ov["shots"] = args.shots
        ov["infinite_shots"] = False
    if getattr(args, "infinite_shots", False):
        ov["infinite_shots"] = True
    if getattr(args, "format", None):
        ov["fmt"] = args.format
    if getattr(args, "bootstrap", None) is not None:
        ov["n_boot"] = args.bootstrap
    return ov


def _config(args):
    if args.config:
        return load_config(args.config, _overrides(args))
    return parse_config("", "<defaults>", _overrides(args))


def _program(cfg, args):
    if cfg.program == "fig1c":
        return None
    p = Path(cfg.program)
    if not p.is_absolute() and args.config:
        p = Path(args.config).parent / p
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"[run] program: cannot read {p}: {exc.strerror}") from None
    return parse(text)


def run_simulate(cfg, program=None):
    """All run points of ``cfg`` as :class:`RunRecord` objects."""
    shots = None if cfg.infinite_shots else cfg.shots
    noise = cfg.noise if cfg.noise is not None else NoiseModel.noiseless()
    records = []
    if program is not None:
        pts = [None]
    else:
        pts = cfg.points()
    for k, pt in enumerate(pts):
        t0 = time.perf_counter()
        seed = None if shots is None else cfg.seed + k
        if pt is None:
            res = simulate_program(program, cfg.atom, noise, shots, seed, cfg.n_boot)
        else:
            res = simulate(pt[0], pt[1], cfg.atom, noise, shots, seed, cfg.n_boot)
        delta = res.phi / res.tau if res.tau > 0 else math.inf
        records.append(
            RunRecord(
                cfg.echo(),
                k,
                res.phi,
                res.tau,
                delta,
                res.reconstruction.number.data,
                res.reconstruction.zz.data,
                res.fidelity,
                res.report,
                res.concurrence_std,
                res.setting_seeds,
                time.perf_counter() - t0,
            )
        )
    return records


SIM_COLUMNS = [
    "run", "phi_rad", "tau_s", "delta_rad_s", "concurrence", "concurrence_std",
    "tangle", "eof", "entangled", "fidelity",
] + [f"rho_{p}_{i}{j}_{part}" for p in ("zz", "num") for i in range(1, 5) for j in range(1, 5) for part in ("re", "im")]


def format_simulate(records, fmt):
    if fmt == "json":
        inputs = records[0].inputs if records else None
        return _json({"inputs": inputs, "runs": [r.to_dict() for r in records]})
    rows = []
    for r in records:
        row = {
            "run": r.run,
            "phi_rad": r.phi,
            "tau_s": r.tau,
            "delta_rad_s": r.delta,
            "concurrence": r.report.concurrence,
            "concurrence_std": r.concurrence_std,
            "tangle": r.report.tangle,
            "eof": r.report.eof,
            "entangled": r.report.entangled,
            "fidelity": r.fidelity,
        }
        row.update(_matrix_cols("rho_zz", r.rho_zz))
        row.update(_matrix_cols("rho_num", r.rho_number))
        rows.append(row)
    return _csv(rows, SIM_COLUMNS)


SWEEP_COLUMNS = ["index", "tau_s", "delta_rad_s", "phi_rad", "concurrence", "concurrence_std", "tangle", "eof", "fidelity"]


def run_sweep(cfg, jobs=1):
    if not cfg.sweep_tau:
        raise ConfigError("[sweep] tau list is empty")
    shots = None if cfg.infinite_shots else cfg.shots
    noise = cfg.noise if cfg.noise is not None else NoiseModel()
    return sweep(cfg.sweep_tau, cfg.sweep_phi, cfg.atom, noise, shots, cfg.seed, cfg.n_boot, jobs)


def format_sweep(points, fmt, cfg):
    rows = []
    for p in points:
        d = asdict(p)
        d["tau_s"], d["delta_rad_s"], d["phi_rad"] = d.pop("tau"), d.pop("delta"), d.pop("phi")
        rows.append(d)
    if fmt == "json":
        return _json({"inputs": cfg.echo(), "points": rows})
    return _csv(rows, SWEEP_COLUMNS)


FIELD_COLUMNS = ["table", "x", "re", "im", "abs", "quad_error", "residual", "gd_max", "status"]


def near_field_residual(grid, eta_prime, ratio=0.5):
    """Relative max deviation of the assembled coupling from the static dipolar form.

    Spin 1 splits by ``eta' c / r`` and spin 2 by ``ratio`` times that; with equal
    splittings the dissipative part cancels identically. Also returns
    ``max |G_D| / max |G_P|``.
    """
    omega = eta_prime * FQ.K.C_LIGHT / grid.r
    cfg = FQ.FieldKernelConfig.spin_pair(grid.gamma1, grid.gamma2, grid.r, grid.rhat, omega, ratio * omega)
    h = FQ.assemble_HF(cfg, dissipative=False)
    ref = FQ.dipolar_hamiltonian(FQ.dipolar_lambda(grid.gamma1, grid.gamma2, grid.r), grid.rhat)
    gp, gd = FQ.couplings(cfg)
    residual = np.abs(h - ref).max() / np.abs(ref).max()
    gd_rel = max(abs(v) for v in gd.values()) / max(abs(v) for v in gp.values())
    return float(residual), float(gd_rel)


def _diag_pair(grid):
    m1 = FQ.spin_moments(grid.gamma1)[("u", "u")]
    m2 = FQ.spin_moments(grid.gamma2)[("u", "u")]
    return FQ.DipolePair(tuple(np.real(m1)), tuple(np.real(m2)), grid.r, grid.rhat)


def run_fieldtheory(grid):
    """Rows of the J, K and D tables; failed quadratures are reported in ``status``."""
    pair = _diag_pair(grid)
    rows = []
    c_over_r = pair.c / pair.r
    for eta in grid.eta:
        v = FQ.spectral_density_J(eta * c_over_r, pair)
        rows.append({"table": "J", "x": float(eta), "re": float(np.real(v)), "im": float(np.imag(v)),
                     "abs": float(abs(v)), "status": "ok"})
    for ep in grid.eta_prime:
        v = FQ.principal_kernel_K(ep * c_over_r, pair)
        res, gd = near_field_residual(grid, ep)
        rows.append({"table": "K", "x": float(ep), "re": float(np.real(v)), "im": float(np.imag(v)),
                     "abs": float(abs(v)), "residual": res, "gd_max": gd, "status": "ok"})
    for s in grid.s_light:
        row = {"table": "D", "x": float(s)}
        try:
            v, err = FQ.memory_kernel_D(s / c_over_r, pair, grid.cutoff_light * c_over_r)
            row.update(re=float(v.real), im=float(v.imag), abs=float(abs(v)), quad_error=float(err), status="ok")
        except FQ.QuadratureError as exc:
            row.update(abs=exc.estimate, quad_error=exc.error, status=f"quadrature failed: {exc}")
        rows.append(row)
    return rows


def format_fieldtheory(rows, fmt, grid):
    if fmt == "json":
        meta = {
            "regulator": f"exp(-omega/omega_cut), omega_cut = {grid.cutoff_light!r} c/r (chosen, not physical)",
            "r_m": grid.r,
            "rhat": list(grid.rhat),
            "gamma1_rad_s_t": grid.gamma1,
            "gamma2_rad_s_t": grid.gamma2,
        }
        return _json({"metadata": meta, "rows": rows})
    return _csv(rows, FIELD_COLUMNS)


def gme_output(args):
    omega = None
    if args.omega_up is not None or args.omega_down is not None:
        omega = (args.omega_up or 0.0, args.omega_down or 0.0)
    p = GmeParams(args.mass, args.d_uu, args.d_ud, args.tau, omega_spin=omega)
    out = phase_report(p)
    if omega is not None:
        out["correction"], out["ratio"] = mass_correction(p, tuple(args.branch))
    else:
        out["correction"] = out["ratio"] = None
    return out


def _add_run_flags(sp):
    sp.add_argument("--config", help="INI experiment config")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--shots", type=int, help="shots per tomography setting (default 500)")
    sp.add_argument("--infinite-shots", action="store_true", help="use exact probabilities")
    sp.add_argument("--bootstrap", type=int, help="readout-seed replicates for the concurrence spread")
    sp.add_argument("--out", help="write output here instead of stdout")
    sp.add_argument("--format", choices=("csv", "json"))


def build_parser():
    ap = argparse.ArgumentParser(prog="gmesim", description="Spin-spin analog of gravity-mediated entanglement.")
    sub = ap.add_subparsers(dest="cmd", required=True)
    _add_run_flags(sub.add_parser("simulate", help="run the full protocol for each configured point"))
    sp = sub.add_parser("sweep", help="entanglement versus interaction time")
    _add_run_flags(sp)
    sp.add_argument("--jobs", type=int, default=1, help="points evaluated concurrently")
    sp = sub.add_parser("fieldtheory", help="field-mediated coupling tables")
    sp.add_argument("--config")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp = sub.add_parser("gme-phase", help="gravitational phase calculator")
    sp.add_argument("--mass", type=float, default=PUBLISHED_SET["m"], help="kg")
    sp.add_argument("--d-uu", type=float, default=PUBLISHED_SET["d_uu"], help="m")
    sp.add_argument("--d-ud", type=float, default=PUBLISHED_SET["d_ud"], help="m")
    sp.add_argument("--tau", type=float, default=PUBLISHED_SET["tau"], help="s")
    sp.add_argument("--omega-up", type=float, help="internal angular frequency, rad/s")
    sp.add_argument("--omega-down", type=float, help="internal angular frequency, rad/s")
    sp.add_argument("--branch", default="uu", choices=("uu", "ud", "du", "dd"))
    sp.add_argument("--out")
    sp = sub.add_parser("parse", help="print a pulse program in canonical form")
    sp.add_argument("path", help="program file, or 'fig1c' for the built-in program")
    sp.add_argument("--out")
    return ap


def _dispatch(args):
    if args.cmd == "simulate":
        cfg = _config(args)
        recs = run_simulate(cfg, _program(cfg, args))
        for r in recs:
            print(f"run {r.run}: wall-time {r.wall_time:.3f} s", file=sys.stderr)
        return format_simulate(recs, cfg.fmt)
    if args.cmd == "sweep":
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        cfg = _config(args)
        return format_sweep(run_sweep(cfg, args.jobs), cfg.fmt, cfg)
    if args.cmd == "fieldtheory":
        grid = load_config(args.config, {"infinite_shots": True}).grid if args.config else ExperimentConfig(
            phi=(0.0,), infinite_shots=True
        ).grid
        rows = run_fieldtheory(grid)
        failed = [r for r in rows if r["status"] != "ok"]
        text = format_fieldtheory(rows, args.format, grid)
        if failed:
            _emit(text, args.out)
            for r in failed:
                print(f"D(s={r['x']}): {r['status']}", file=sys.stderr)
            return EXIT_NUMERIC
        return text
    if args.cmd == "gme-phase":
        try:
            return _json(gme_output(args))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(str(exc)) from None
    if args.cmd == "parse":
        if args.path == "fig1c" and not Path(args.path).exists():
            prog = fig1c_program()
        else:
            try:
                text = Path(args.path).read_text(encoding="utf-8")
            except OSError as exc:
                raise ConfigError(f"cannot read {args.path}: {exc.strerror}") from None
            try:
                prog = parse(text)
            except ParseError as exc:
                raise ConfigError(f"{args.path}:{exc.line}:{exc.col}: {exc.message}") from None
        return format_program(prog)
    raise AssertionError(args.cmd)


def main(argv=None):
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", RuntimeWarning)
            out = _dispatch(args)
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, RuntimeError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if caught:
        print(f"{len(caught)} runtime warning(s); first: {caught[0].message}", file=sys.stderr)
    if isinstance(out, int):
        return out
    _emit(out, getattr(args, "out", None))
    print(f"wall-time {time.perf_counter() - t0:.3f} s", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
