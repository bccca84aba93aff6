"""Sweep driver: config parsing, per-point optimisation and CSV output.

Usage::

    edgelatency --sweep k --seed 7 --out results/
    edgelatency --config my.json --sweep beta --decoder user --trials 20000

Each sweep point draws its own common random numbers from
``SeedSequence([seed, point index])``; all schemes and both bounds at a
point see the same straggling times.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from importlib import resources

import numpy as np

from .bounds import lower_bounds_from
from .fountain import failure_bound, robust_soliton
from .mds import BinaryMDSWarning
from .model import DesignError, Scheme, SystemParams, psi
from .placement import assignment_for
from .runtime import StoppingSetUnreachable, draw_matrix
from .search import DECODERS, NoFeasibleDesign, default_phi_prime, rateless_decode_ops, search_ir, search_mdsr

HEADER = ["sweep_var", "value", "scheme", "decoder", "comp_s", "dec_s", "comm_s", "total_s", "total_norm",
          "param1", "param2", "param3", "ci95_norm"]
SCHEME_ORDER = [s.value for s in Scheme]
BOUND_ROW = "bound"
LOCAL_ROW = "local"


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def default_config() -> dict:
    text = resources.files(__package__).joinpath("default_config.json").read_text()
    return json.loads(text)


def _merge(base: dict, over: dict, path: str, problems: list[str]) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        where = f"{path}.{key}" if path else key
        if key not in base:
            problems.append(f"unknown key {where!r}")
        elif isinstance(base[key], dict) and key != "soliton":
            if not isinstance(val, dict):
                problems.append(f"{where} must be an object")
            else:
                out[key] = _merge(base[key], val, where, problems)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def _is_num(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _system_kwargs(system: dict, var: str | None = None, value=None) -> dict:
    kw = dict(system)
    if var is not None:
        kw[var] = value
    if kw.get("r") is None:
        kw["r"] = kw["k"]
    return kw


def validate(config: dict | None) -> tuple[dict, list[str]]:
    """Fill defaults and collect every problem. Returns (normalised config, problems)."""
    problems: list[str] = []
    if config is None:
        config = {}
    if not isinstance(config, dict):
        return default_config(), ["config must be a JSON object"]
    cfg = _merge(default_config(), config, "", problems)
    system, schemes, sweep, mc = cfg["system"], cfg["schemes"], cfg["sweep"], cfg["mc"]

    for name, val in system.items():
        if not (val is None and name == "r") and not _is_num(val):
            problems.append(f"system.{name} must be a number")
    enabled = schemes["enabled"]
    if not isinstance(enabled, list) or not enabled:
        problems.append("schemes.enabled must be a nonempty list")
    else:
        for name in enabled:
            if name not in SCHEME_ORDER:
                problems.append(f"unknown scheme {name!r}")
    if schemes["grid_thin"] is not None and not (_is_int(schemes["grid_thin"]) and schemes["grid_thin"] >= 2):
        problems.append("schemes.grid_thin must be null or an integer >= 2")
    rl = schemes["rateless-ir"]
    if not (_is_num(rl["Pf"]) and 0 < rl["Pf"] <= 1):
        problems.append("schemes.rateless-ir.Pf must lie in (0, 1]")
    if rl["phi_prime"] is not None and not (_is_int(rl["phi_prime"]) and rl["phi_prime"] >= 0):
        problems.append("schemes.rateless-ir.phi_prime must be null or a nonnegative integer")
    if not (_is_int(rl["decode_samples"]) and rl["decode_samples"] >= 1):
        problems.append("schemes.rateless-ir.decode_samples must be a positive integer")
    sol = rl["soliton"]
    if not isinstance(sol, dict) or set(sol) != set(DECODERS):
        problems.append("schemes.rateless-ir.soliton needs exactly the keys 'user' and 'edge'")
    else:
        for d, gz in sol.items():
            if not (isinstance(gz, list) and len(gz) == 2 and _is_int(gz[0]) and gz[0] >= 1
                    and _is_num(gz[1]) and 0 < gz[1] < 1):
                problems.append(f"schemes.rateless-ir.soliton.{d} must be [gamma >= 1, 0 < zeta < 1]")

    if sweep["var"] not in ("k", "beta"):
        problems.append(f"sweep.var must be 'k' or 'beta', got {sweep['var']!r}")
    for var in ("k", "beta"):
        vals = sweep[var]
        check = _is_int if var == "k" else _is_num
        if not isinstance(vals, list) or not vals or not all(check(v) for v in vals):
            problems.append(f"sweep.{var} must be a nonempty list of {'integers' if var == 'k' else 'numbers'}")

    for name in ("trials", "coarse_trials", "pilot_trials", "shortlist", "jobs"):
        if not (_is_int(mc[name]) and mc[name] >= 1):
            problems.append(f"mc.{name} must be a positive integer")
    if not (_is_int(mc["seed"]) and 0 <= mc["seed"] < 2**64):
        problems.append("mc.seed must be an unsigned 64-bit integer")

    # physical constraints are checked whenever the system values are numbers,
    # at every sweep value when the sweep itself is usable
    if not any(p.startswith("system.") for p in problems):
        var = sweep["var"]
        if var in ("k", "beta") and not any(p.startswith(f"sweep.{var} ") for p in problems):
            points = [(_system_kwargs(system, var, v), f" (at {var}={v})") for v in sweep[var]]
            if len(points) == 1:
                points = [(points[0][0], "")]
        else:
            points = [(_system_kwargs(system), "")]
        seen = set()
        for kw, where in points:
            for msg in SystemParams.check(**kw):
                if msg not in seen:
                    seen.add(msg)
                    problems.append(msg + where)
    return cfg, problems


def _params_at(cfg: dict, value) -> SystemParams:
    return SystemParams(**_system_kwargs(cfg["system"], cfg["sweep"]["var"], value))


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def evaluate_point(cfg: dict, index: int, decoders=DECODERS) -> dict:
    """All rows (as dicts, keyed by decoder) for one sweep point."""
    var = cfg["sweep"]["var"]
    value = cfg["sweep"][var][index]
    params = _params_at(cfg, value)
    mc, sch = cfg["mc"], cfg["schemes"]
    rng = np.random.default_rng(np.random.SeedSequence([mc["seed"], index]))
    lam_c = draw_matrix(params.beta, params.e, mc["coarse_trials"], rng)
    lam_f = draw_matrix(params.beta, params.e, mc["trials"], rng)
    ps = psi(params)
    enabled = [s for s in SCHEME_ORDER if s in sch["enabled"]]
    rows = {d: [] for d in decoders}
    designs = {}

    def emit(scheme, d, bd_comp, bd_dec, bd_comm, params3, hw, flag=None):
        total = bd_comp + bd_dec + bd_comm
        rows[d].append({"sweep_var": var, "value": value, "scheme": scheme, "decoder": d, "comp_s": bd_comp,
                        "dec_s": bd_dec, "comm_s": bd_comm, "total_s": total, "total_norm": total / ps,
                        "param1": params3[0], "param2": params3[1], "param3": params3[2],
                        "ci95_norm": hw / ps, "binary_mds_missing": flag})

    for name in enabled:
        scheme = Scheme.parse(name)
        if scheme is Scheme.MDS_R:
            res = search_mdsr(params, decoders)
        else:
            kw = {}
            if scheme is Scheme.RATELESS_IR:
                rl = sch["rateless-ir"]
                phi = rl["phi_prime"] if rl["phi_prime"] is not None else default_phi_prime(params)
                soliton = {d: (int(g), float(z)) for d, (g, z) in rl["soliton"].items()}
                for d in decoders:
                    g, z = soliton[d]
                    pf = failure_bound(params.k, phi, params.q, robust_soliton(params.k, min(g, params.k), z))
                    if pf > rl["Pf"]:
                        raise NoFeasibleDesign(f"soliton ({g}, {z}) for {d} decoding gives failure bound {pf:.3g} "
                                               f"> Pf={rl['Pf']:g} at k={params.k}")
                dec_ops = {d: rateless_decode_ops(params, phi, *soliton[d], rl["decode_samples"], rng)
                           for d in DECODERS}
                kw = dict(phi_prime=phi, dec_ops=dec_ops, soliton=soliton)
            res = search_ir(params, scheme, lam_c, lam_f, thin=sch["grid_thin"], shortlist=mc["shortlist"],
                            pilot=mc["pilot_trials"], decoders=decoders, **kw)
        for d in decoders:
            c = res.best[d]
            bd = c.breakdown
            designs[name, d] = c.design
            flag = bool(bd.extras.get("binary_mds_missing", False)) if scheme is not Scheme.RATELESS_IR else False
            emit(name, d, bd.comp, bd.dec, bd.comm, c.design.triplet(), c.halfwidth, flag)

    bu, be = lower_bounds_from(params, lam_f)
    for d in decoders:
        b = bu if d == "user" else be
        emit(BOUND_ROW, d, b.mean, 0.0, 0.0, (None, None, None), b.halfwidth)
        emit(LOCAL_ROW, d, ps, 0.0, 0.0, (None, None, None), 0.0)
    return {"rows": rows, "designs": designs, "params": params}


def _write_csv(path: str, rows: list[dict], warn_column: bool) -> None:
    header = HEADER + (["binary_mds_missing"] if warn_column else [])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            out = [_fmt(row[h]) for h in HEADER]
            if warn_column:
                flag = row["binary_mds_missing"]
                out.append("" if flag is None else str(int(flag)))
            w.writerow(out)


def run(config_path: str | None = None, overrides: dict | None = None) -> int:
    """Run one sweep; returns the process exit code."""
    overrides = dict(overrides or {})
    try:
        raw = {}
        if config_path:
            with open(config_path) as fh:
                raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    if isinstance(raw, dict):
        for key, section in (("seed", "mc"), ("trials", "mc"), ("jobs", "mc")):
            if overrides.get(key) is not None:
                raw.setdefault(section, {})[key] = overrides[key]
        if overrides.get("sweep") is not None:
            raw.setdefault("sweep", {})["var"] = overrides["sweep"]
        if overrides.get("schemes") is not None:
            raw.setdefault("schemes", {})["enabled"] = overrides["schemes"]
    cfg, problems = validate(raw)
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return 2

    decoder = overrides.get("decoder") or "both"
    decoders = DECODERS if decoder == "both" else (decoder,)
    out_dir = overrides.get("out") or "."
    warn = bool(overrides.get("warn_binary_mds"))
    os.makedirs(out_dir, exist_ok=True)

    var = cfg["sweep"]["var"]
    n_points = len(cfg["sweep"][var])
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BinaryMDSWarning)
            if cfg["mc"]["jobs"] > 1 and n_points > 1:
                with ProcessPoolExecutor(max_workers=min(cfg["mc"]["jobs"], n_points)) as ex:
                    results = list(ex.map(evaluate_point, [cfg] * n_points, range(n_points),
                                          [decoders] * n_points))
            else:
                results = []
                for i in range(n_points):
                    results.append(evaluate_point(cfg, i, decoders))
                    if overrides.get("verbose"):
                        print(f"{var}={cfg['sweep'][var][i]} done", file=sys.stderr)
    except (NoFeasibleDesign, StoppingSetUnreachable, DesignError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    for d in decoders:
        rows = [row for res in results for row in res["rows"][d]]
        _write_csv(os.path.join(out_dir, f"sweep_{var}_{d}.csv"), rows, warn)
    if warn:
        for res in results:
            for row in res["rows"][decoders[0]]:
                if row["binary_mds_missing"]:
                    print(f"warning: {row['scheme']} at {var}={row['value']} uses Ro={row['param2']}, "
                          f"for which no binary MDS code exists; its row is a lower bound", file=sys.stderr)
    if overrides.get("dump_assignments"):
        first = results[0]
        k, e = first["params"].k, first["params"].e
        for (name, d), design in first["designs"].items():
            if d != decoders[0]:
                continue
            A = assignment_for(k, e, design.scheme, design.Ro, design.Ri)
            A.to_csv(os.path.join(out_dir, f"assignment_{name}.csv"))
    return 0


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="edgelatency",
                                 description="Latency sweeps for coded distributed inference at the edge.")
    ap.add_argument("--config", help="JSON config (keys: system, schemes, sweep, mc)")
    ap.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    ap.add_argument("--trials", type=int, help="Monte Carlo trials per sweep point")
    ap.add_argument("--sweep", choices=["k", "beta"], help="swept variable")
    ap.add_argument("--beta-sweep", action="store_const", const="beta", dest="sweep", help="same as --sweep beta")
    ap.add_argument("--schemes", help="comma-separated subset of " + ",".join(SCHEME_ORDER))
    ap.add_argument("--decoder", choices=["user", "edge", "both"], default="both")
    ap.add_argument("--out", default=".", help="output directory")
    ap.add_argument("--jobs", type=int, help="worker processes for sweep points")
    ap.add_argument("--warn-binary-mds", action="store_true",
                    help="flag MDS rows whose outer rate has no binary MDS code (extra CSV column)")
    ap.add_argument("--dump-assignments", action="store_true",
                    help="write assignment_<scheme>.csv for the optima at the first sweep point")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    overrides = {
        "seed": args.seed, "trials": args.trials, "sweep": args.sweep, "jobs": args.jobs,
        "schemes": [s.strip() for s in args.schemes.split(",") if s.strip()] if args.schemes else None,
        "decoder": args.decoder, "out": args.out, "warn_binary_mds": args.warn_binary_mds,
        "dump_assignments": args.dump_assignments, "verbose": args.verbose,
    }
    return run(args.config, overrides)


if __name__ == "__main__":
    sys.exit(main())
