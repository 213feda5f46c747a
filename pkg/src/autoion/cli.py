"""Command-line front end.

    autoion spectrum --config configs/fig2a.json --out runs/fig2a
    autoion evolve   --config configs/fig6.json --oracle
    autoion zeros    --config my.json --format json
    autoion sweep    --config configs/fig9.json --threads 4

A config is one JSON document with a parameter block (``physical`` with
:class:`SystemParams` fields, or ``reduced`` with ``q_a, q_b, gamma_a,
gamma_b, Omega, E_a, E_b, E_L, J_ab``), an optional ``grid`` block
(``E_min, E_max, n_points``), a ``workflow`` block and an optional
``output`` block (``dir``, ``format``).  Complex numbers are ``[re, im]``.

Exit codes: 0 success, 2 bad config, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import scipy

from . import __version__, numerics, oracle, spectra, zeros
from .errors import NumericalError
from .model import pole_set
from .params import ReducedParams, SystemParams, derive_reduced, realize_couplings
from .spectra import EnergyGrid

MODES = ("spectrum", "evolve", "zeros", "sweep")
FORMATS = ("csv", "json", "both")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
SWEEP_SUCCESS = 0.9
REDUCED_KEYS = ("q_a", "q_b", "gamma_a", "gamma_b", "Omega", "E_a", "E_b", "E_L", "J_ab")
REDUCED_DEFAULTS = {"E_a": 1.0, "E_b": 1.0, "E_L": 1.0, "J_ab": 0.0}
WORKFLOW_KEYS = {
    "spectrum": {"omegas"},
    "evolve": {"times", "omega", "oracle"},
    "zeros": {"omegas", "channels"},
    "sweep": {"omega_range", "omega_count", "channels", "gap"},
}
ORACLE_DEFAULTS = {"n_bins": oracle.DEFAULT_BINS, "half_width": oracle.DEFAULT_HALF_WIDTH, "rtol": oracle.RTOL, "atol": oracle.ATOL}


class ConfigError(ValueError):
    pass


def _complex(value, name):
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ConfigError(f"{name}: complex values are [re, im] pairs")
        value = complex(float(value[0]), float(value[1]))
    if isinstance(value, bool) or not isinstance(value, (int, float, complex)):
        raise ConfigError(f"{name}: expected a number, got {value!r}")
    return value


def _real(value, name):
    v = _complex(value, name)
    if isinstance(v, complex):
        if v.imag != 0:
            raise ConfigError(f"{name} must be real")
        v = v.real
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    return v


def _json_value(v):
    """Numbers and numpy scalars to JSON-safe values; complex as [re, im]."""
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_json_value(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, (np.integer, np.bool_)):
        return v.item()
    return v


@dataclass
class RunConfig:
    """Validated config with every default filled in."""

    mode: str
    params: SystemParams
    style: str  # "physical" or "reduced"
    block: dict
    grid: EnergyGrid
    workflow: dict
    out_dir: Path
    fmt: str
    threads: int = 1

    def echo(self) -> dict:
        return {
            "mode": self.mode,
            self.style: self.block,
            "grid": {"E_min": self.grid.E_min, "E_max": self.grid.E_max, "n_points": self.grid.n_points},
            "workflow": self.workflow,
            "output": {"dir": str(self.out_dir), "format": self.fmt},
            "threads": self.threads,
        }


def _parameters(doc: dict):
    has_phys, has_red = "physical" in doc, "reduced" in doc
    if has_phys == has_red:
        raise ConfigError("give exactly one of the 'physical' and 'reduced' parameter blocks")
    if has_phys:
        raw = doc["physical"]
        if not isinstance(raw, dict):
            raise ConfigError("'physical' must be an object")
        block = {}
        for key, value in raw.items():
            if key not in SystemParams.__dataclass_fields__:
                raise ConfigError(f"unknown physical parameter {key!r}")
            block[key] = _real(value, key) if key in ("E_a", "E_b", "E_L") else _complex(value, key)
        p = SystemParams(**block)
        return p, "physical", _json_value(p.to_dict())
    raw = doc["reduced"]
    if not isinstance(raw, dict):
        raise ConfigError("'reduced' must be an object")
    unknown = set(raw) - set(REDUCED_KEYS)
    if unknown:
        raise ConfigError(f"unknown reduced parameter(s) {sorted(unknown)}")
    missing = {"q_a", "q_b", "gamma_a", "gamma_b", "Omega"} - set(raw)
    if missing:
        raise ConfigError(f"reduced block lacks {sorted(missing)}")
    block = {**REDUCED_DEFAULTS, **raw}
    vals = {k: (_complex(block[k], k) if k == "J_ab" else _real(block[k], k)) for k in REDUCED_KEYS}
    try:
        r = ReducedParams(vals["q_a"], vals["q_b"], vals["gamma_a"], vals["gamma_b"], vals["Omega"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    p = realize_couplings(r, vals["E_a"], vals["E_b"], vals["E_L"], J_ab=vals["J_ab"])
    return p, "reduced", _json_value(vals)


def _omega_of(p: SystemParams, style: str, block: dict) -> float:
    if style == "reduced":
        return block["Omega"]
    if p.Gamma <= 0:
        return float("nan")
    return float(derive_reduced(p).Omega)


def _times(raw):
    if not isinstance(raw, list) or not raw:
        raise ConfigError("evolve needs a nonempty 'times' list")
    out = []
    for t in raw:
        if isinstance(t, str) and t.lower() in ("inf", "infinity"):
            out.append("inf")
            continue
        v = _real(t, "times")
        if v < 0:
            raise ConfigError("times must be nonnegative")
        out.append(v)
    return out


def _workflow(mode: str, raw: dict, p: SystemParams, style: str, block: dict) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError("'workflow' must be an object")
    unknown = set(raw) - WORKFLOW_KEYS[mode] - {"mode"}
    if unknown:
        raise ConfigError(f"workflow keys {sorted(unknown)} do not apply to mode {mode!r}")
    if "mode" in raw and raw["mode"] != mode:
        raise ConfigError(f"config is for mode {raw['mode']!r}, not {mode!r}")
    wf = {}
    if mode in ("spectrum", "zeros"):
        om = raw.get("omegas")
        if om is None:
            wf["omegas"] = None
        else:
            if not isinstance(om, list) or not om:
                raise ConfigError("'omegas' must be a nonempty list")
            wf["omegas"] = [_real(x, "omegas") for x in om]
    if mode == "zeros" or mode == "sweep":
        ch = raw.get("channels", [0, 1])
        if not isinstance(ch, list) or not ch or any(c not in (0, 1) for c in ch):
            raise ConfigError("'channels' must be a nonempty subset of [0, 1]")
        wf["channels"] = sorted(set(ch))
    if mode == "evolve":
        wf["times"] = _times(raw.get("times"))
        wf["omega"] = None if raw.get("omega") is None else _real(raw["omega"], "omega")
        orc = raw.get("oracle", {}) or {}
        if not isinstance(orc, dict) or set(orc) - set(ORACLE_DEFAULTS):
            raise ConfigError(f"'oracle' accepts {sorted(ORACLE_DEFAULTS)}")
        orc = {**ORACLE_DEFAULTS, **orc}
        orc["n_bins"] = int(_real(orc["n_bins"], "n_bins"))
        if orc["n_bins"] < 1:
            raise ConfigError("n_bins must be positive")
        wf["oracle"] = orc
    if mode == "sweep":
        rng = raw.get("omega_range")
        if not isinstance(rng, list) or len(rng) != 2:
            raise ConfigError("sweep needs 'omega_range': [lo, hi]")
        lo, hi = (_real(x, "omega_range") for x in rng)
        count = int(_real(raw.get("omega_count", 200), "omega_count"))
        if count < 2 or not hi > lo:
            raise ConfigError("sweep needs hi > lo and at least 2 samples")
        wf["omega_range"] = [lo, hi]
        wf["omega_count"] = count
        wf["gap"] = _real(raw.get("gap", zeros.BRANCH_GAP), "gap")
        if p.Gamma <= 0:
            raise ConfigError("sweeps need a positive total width")
    return wf


def load_config(path, mode: str, out=None, fmt=None, threads=None) -> RunConfig:
    """Parse and validate a config file; command-line values win over the file."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    if "mode" in doc and doc["mode"] != mode:
        raise ConfigError(f"config is for mode {doc['mode']!r}, not {mode!r}")
    try:
        p, style, block = _parameters(doc)
    except ValueError as exc:  # includes undefined Fano parameters
        raise ConfigError(str(exc)) from None
    g = doc.get("grid") or {}
    if not isinstance(g, dict) or set(g) - {"E_min", "E_max", "n_points"}:
        raise ConfigError("'grid' accepts E_min, E_max, n_points")
    default = EnergyGrid.default(p)
    try:
        grid = EnergyGrid(
            _real(g.get("E_min", default.E_min), "E_min"),
            _real(g.get("E_max", default.E_max), "E_max"),
            int(_real(g.get("n_points", default.n_points), "n_points")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    wf = _workflow(mode, doc.get("workflow") or {}, p, style, block)
    o = doc.get("output") or {}
    if not isinstance(o, dict):
        raise ConfigError("'output' must be an object")
    out_dir = Path(out or o.get("dir") or ".")
    fmt = fmt or o.get("format", "both")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be one of {FORMATS}")
    threads = int(threads or doc.get("threads", 1))
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    if out_dir.exists() and not out_dir.is_dir():
        raise ConfigError(f"output path {out_dir} is not a directory")
    return RunConfig(mode, p, style, block, grid, wf, out_dir, fmt, threads)


# ---------------------------------------------------------------------------
# results and persistence


@dataclass
class Table:
    header: list
    rows: np.ndarray


@dataclass
class ResultBundle:
    metadata: dict
    payload: dict
    tables: dict = field(default_factory=dict)  # file stem -> Table


def _tolerances() -> dict:
    return {
        "numerics": {"merge": numerics.MERGE_TOL, "residual": numerics.RESIDUAL_TOL, "max_iter": numerics.MAX_ITER,
                     "trim": numerics.TRIM_TOL, "defective_cond": numerics.DEFECTIVE_COND},
        "spectra": {"long_time_factor": spectra.LONG_TIME_FACTOR, "dark": spectra.DARK_TOL},
        "zeros": {"real": zeros.REAL_TOL, "near_real": zeros.NEAR_REAL_TOL, "root_residual": zeros.ROOT_RESIDUAL_TOL,
                  "double_root": zeros.DOUBLE_ROOT_TOL, "merge": zeros.MERGE_REAL_TOL, "resolve": zeros.RESOLVE_TOL,
                  "tail_limit": zeros.TAIL_LIMIT, "mismatch": zeros.MISMATCH_TOL, "common_root": zeros.COMMON_ROOT_TOL, "zero_residual": zeros.ZERO_RESIDUAL_TOL,
                  "branch_gap": zeros.BRANCH_GAP},
    }


def _metadata(cfg: RunConfig) -> dict:
    return {
        "tool": "autoion",
        "version": __version__,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "config": cfg.echo(),
        "tolerances": _tolerances(),
    }


def _fmt(x) -> str:
    return format(float(x), ".17g")


def write_bundle(bundle: ResultBundle, out_dir: Path, fmt: str, stem: str) -> list:
    """Write all files at once, after every computation has finished."""
    for name, tab in bundle.tables.items():
        if not np.all(np.isfinite(tab.rows)):
            raise NumericalError(f"non-finite values in table {name!r}")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt in ("csv", "both"):
        for name, tab in bundle.tables.items():
            path = out_dir / f"{name}.csv"
            with path.open("w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(tab.header)
                w.writerows([_fmt(v) for v in row] for row in tab.rows)
            written.append(path)
    doc = {"metadata": bundle.metadata, "payload": _json_value(bundle.payload)}
    if fmt in ("json", "both"):
        doc["payload"]["tables"] = {
            name: {"header": tab.header, "rows": tab.rows.tolist()} for name, tab in bundle.tables.items()
        }
        path = out_dir / f"{stem}.json"
    else:
        path = out_dir / f"{stem}.meta.json"
    path.write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")
    written.append(path)
    return written


# ---------------------------------------------------------------------------
# workflows


def _map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _pump_points(cfg: RunConfig, omegas):
    """``(label, params)`` for each requested pump parameter."""
    base_omega = _omega_of(cfg.params, cfg.style, cfg.block)
    if omegas is None:
        return [(base_omega, cfg.params)]
    if cfg.params.Gamma <= 0:
        raise ConfigError("'omegas' needs a positive total width")
    return [(om, zeros.params_at_omega(cfg.params, om)) for om in omegas]


def _complex_list(z):
    return [[float(v.real), float(v.imag)] for v in np.ravel(z)]


def cmd_spectrum(cfg: RunConfig) -> ResultBundle:
    points = _pump_points(cfg, cfg.workflow["omegas"])
    E = cfg.grid.values

    def one(item):
        om, p = item
        sol = spectra.solve(p)
        return om, p, spectra.decompose(sol, cfg.grid), pole_set(p), sol.t_trapped

    results = _map(one, points, cfg.threads)
    header = ["E", "I_lt", "I_st_0", "I_st_1", "I_osc", "phi"]
    tables, runs = {}, []
    for i, (om, p, dec, ps, t_trap) in enumerate(results):
        name = "spectrum" if len(results) == 1 else f"spectrum_{i:03d}"
        tables[name] = Table(header, np.column_stack([E, dec.I_lt, dec.I_st_0, dec.I_st_1, dec.I_osc, dec.phi]))
        runs.append(
            {
                "table": name,
                "Omega": om,
                "params": p.to_dict(),
                "norm_const": dec.norm_const,
                "delta_xi": dec.delta_xi,
                "t_min": dec.t_min if math.isfinite(dec.t_min) else None,
                "t_trapped": t_trap if math.isfinite(t_trap) else None,
                "poles": [
                    {"j": j, "k": k + 1, "E_r": [float(ps.poles[j, k].real), float(ps.poles[j, k].imag)]}
                    for j in range(ps.poles.shape[0])
                    for k in range(2)
                ],
            }
        )
    return ResultBundle(_metadata(cfg), {"runs": runs}, tables)


def _evolve_params(cfg: RunConfig):
    om = cfg.workflow["omega"]
    if om is None:
        return _omega_of(cfg.params, cfg.style, cfg.block), cfg.params
    return _pump_points(cfg, [om])[0]


def _time_label(t) -> str:
    return "I_t=inf" if t == "inf" else f"I_t={_fmt(t)}"


def cmd_evolve(cfg: RunConfig, use_oracle: bool = False) -> ResultBundle:
    om, p = _evolve_params(cfg)
    times = cfg.workflow["times"]
    E = cfg.grid.values
    sol = spectra.solve(p)

    def curve(t):
        if t == "inf":
            return spectra.decompose(sol, cfg.grid).I_lt
        if t == 0:
            return np.zeros_like(E)
        d0, d1 = spectra.amplitude(sol, E, t)
        return np.abs(d0) ** 2 + np.abs(d1) ** 2

    cols = _map(curve, times, cfg.threads)
    tables = {"evolve": Table(["E"] + [_time_label(t) for t in times], np.column_stack([E] + cols))}
    payload = {"Omega": om, "params": p.to_dict(), "times": times, "t_min": sol.t_min if math.isfinite(sol.t_min) else None,
               "normalization": "I(E, inf) divided by its trapezoid integral; finite-time curves unnormalized"}
    finite = [t for t in times if t != "inf" and t > 0]
    if use_oracle and finite:
        oc = cfg.workflow["oracle"]
        disc = oracle.ContinuumDiscretization.default(p, n_bins=oc["n_bins"], half_width=oc["half_width"])
        run = oracle.integrate(p, disc, times=[0.0] + finite, rtol=oc["rtol"], atol=oc["atol"])
        rep = oracle.compare(run, p)
        Eo = run.energies
        oc_cols, hdr = [Eo], ["E"]
        for i, t in enumerate(finite, start=1):
            d0, d1 = spectra.amplitude(sol, Eo, t)
            oc_cols += [run.spectrum(i), np.abs(d0) ** 2 + np.abs(d1) ** 2]
            hdr += [f"oracle_t={_fmt(t)}", f"analytic_t={_fmt(t)}"]
        tables["oracle"] = Table(hdr, np.column_stack(oc_cols))
        payload["oracle"] = {**rep, "settings": oc, "window": [disc.E_min, disc.E_max]}
    elif use_oracle:
        payload["oracle"] = {"note": "no positive finite times requested"}
    return ResultBundle(_metadata(cfg), payload, tables)


def cmd_zeros(cfg: RunConfig) -> ResultBundle:
    points = _pump_points(cfg, cfg.workflow["omegas"])
    channels = tuple(cfg.workflow["channels"])

    def one(item):
        om, p = item
        return om, p, zeros.fano_zeros(p, cfg.grid), zeros.dynamical_zeros(p, channels, cfg.grid), zeros.weak_pump_zeros(p)

    results = _map(one, points, cfg.threads)
    rows, runs = [], []
    kinds = {"exact": 0, "common-root": 1, "weak-pump": 2, "dynamical": 3}
    for i, (om, p, fz, dz, wz) in enumerate(results):
        G, Eb = p.Gamma, p.E_b
        norm = (lambda e: (e - Eb) / G) if G > 0 else (lambda e: float("nan"))
        entries = []
        for z in fz + wz:
            entries.append({"kind": z.kind, "E": z.E_F, "normalized": norm(z.E_F), "residual": float(z.residual)})
            rows.append([i, om, kinds[z.kind], -1, z.E_F, norm(z.E_F), float(z.residual)])
        for z in dz:
            entries.append(
                {
                    "kind": "dynamical",
                    "channel": z.channel,
                    "E": z.E_D,
                    "normalized": norm(z.E_D),
                    "min_intensity": z.min_intensity,
                    "branch_mismatch": z.branch_mismatch,
                    "t_D": z.t_D,
                    "t_D_phase": z.t_D_phase,
                }
            )
            rows.append([i, om, kinds["dynamical"], z.channel, z.E_D, norm(z.E_D), z.min_intensity])
        runs.append({"Omega": om, "params": p.to_dict(), "zeros": entries})
    header = ["run", "Omega", "kind", "channel", "E", "(E-E_b)/Gamma", "diagnostic"]
    rows = np.array(rows, dtype=float).reshape(-1, len(header))
    rows = rows[np.isfinite(rows).all(axis=1)] if rows.size else rows
    payload = {"runs": runs, "kind_codes": kinds}
    return ResultBundle(_metadata(cfg), payload, {"zeros": Table(header, rows)})


def cmd_sweep(cfg: RunConfig) -> ResultBundle:
    lo, hi = cfg.workflow["omega_range"]
    grid = np.linspace(lo, hi, cfg.workflow["omega_count"])
    traj = zeros.sweep(cfg.params, grid, channels=tuple(cfg.workflow["channels"]), gap=cfg.workflow["gap"], threads=cfg.threads)
    pts = np.array(traj.points, dtype=float).reshape(-1, 4)
    ev_rows = np.array(
        [[e["channel"], e["Omega_from"], e["Omega_to"], e["count_from"], e["count_to"], e["count_to"] - e["count_from"]] for e in traj.events],
        dtype=float,
    ).reshape(-1, 6)
    tables = {
        "sweep": Table(["Omega", "branch_id", "channel", "(E_D-E_b)/Gamma"], pts),
        "events": Table(["channel", "Omega_from", "Omega_to", "count_from", "count_to", "change"], ev_rows),
    }
    payload = {
        "omega_values": grid,
        "events": traj.events,
        "failures": traj.failures,
        "success_fraction": traj.success_fraction,
        "counts": {str(k): traj.counts(k) for k in cfg.workflow["channels"]},
    }
    return ResultBundle(_metadata(cfg), payload, tables)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="autoion", description="Photoelectron spectra and their zeros for an autoionizing atom next to a pumped two-level atom.")
    sub = ap.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode)
        sp.add_argument("--config", required=True, metavar="PATH")
        sp.add_argument("--out", metavar="DIR", default=None)
        sp.add_argument("--format", choices=FORMATS, default=None)
        sp.add_argument("--threads", type=int, default=None, metavar="N")
        if mode == "evolve":
            sp.add_argument("--oracle", action="store_true", help="also integrate the discretized continuum")
    return ap


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.mode, out=args.out, fmt=args.format, threads=args.threads)
        if args.mode == "spectrum":
            bundle = cmd_spectrum(cfg)
        elif args.mode == "evolve":
            bundle = cmd_evolve(cfg, use_oracle=args.oracle)
        elif args.mode == "zeros":
            bundle = cmd_zeros(cfg)
        else:
            bundle = cmd_sweep(cfg)
        files = write_bundle(bundle, cfg.out_dir, cfg.fmt, args.mode)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in files:
        print(f)
    if args.mode == "sweep":
        frac = bundle.payload["success_fraction"]
        if frac < SWEEP_SUCCESS:
            print(f"only {frac:.0%} of sweep points succeeded", file=sys.stderr)
            return EXIT_NUMERIC
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
