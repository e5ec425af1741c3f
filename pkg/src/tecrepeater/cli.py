"""Command-line front end.

Subcommands: ``station``, ``verify``, ``rate``, ``cutoff``, ``sweep``.
Values are resolved as flags > ``--config`` JSON file > environment
(``TECREP_SEED``, ``TECREP_WORKERS``) > built-in defaults, and the resolved
set is written next to every result.

Exit codes: 0 success, 1 invalid arguments, 2 verification failure,
3 resource-cap refusal.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from tecrepeater import __version__
from tecrepeater.bounds import direct_rate, plob, tgw
from tecrepeater.chain import DEFAULT_SAMPLES, METHODS, CapExceeded, ChainSpec, cg_rate, chain_rate
from tecrepeater.core import ChannelParams, CodeParams
from tecrepeater.oracle import adjudicate_dx, compare_with_analytic, simulate_station
from tecrepeater.station import DEFAULT_DX_FORM, DX_FORMS, StationTable, build_station_table
from tecrepeater.sweep import GridSpec, MCSpec, positive_key_cutoff, scan_region

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_CAP = 0, 1, 2, 3

DEFAULTS = {
    "n": 2,
    "m": 2,
    "eta0": 0.9,
    "e": 0.0,
    "eta_c": 1.0,
    "l_att": 20.0,
    "dx_form": DEFAULT_DX_FORM,
    "seed": 0,
    "workers": 1,
    "samples": DEFAULT_SAMPLES,
    "format": None,
    "out": None,
    "n_stations": 1,
    "method": "auto",
    "trials": 10**6,
    "table": None,
    "ground_truth": "fixed",
    "eta0_range": [0.70, 0.995, 0.005],
    "l_range": [50.0, 1400.0, 10.0],
    "no_fg": False,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p):
    p.add_argument("-n", type=int, help="sub-blocks per code block (>= 2)")
    p.add_argument("-m", type=int, help="photons per sub-block (>= 2)")
    p.add_argument("--eta0", type=float, help="segment transmission")
    p.add_argument("--e", type=float, help="physical flip rate")
    p.add_argument("--eta-c", dest="eta_c", type=float, help="coupling efficiency")
    p.add_argument("--l-att", dest="l_att", type=float, help="attenuation length in km")
    p.add_argument("--dx-form", dest="dx_form", choices=DX_FORMS, help="X-vote draw probability reading")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--config", help="JSON file of parameter values")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tecrepeater", description="Key rates of lossy, noisy parity-code repeater chains.")
    parser.add_argument("--version", action="version", version=f"tecrepeater {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("station", help="per-class station statistics")
    _common(p)

    p = sub.add_parser("verify", help="compare analytic station statistics with the bit-level oracle")
    _common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--table", help="analytic StationTable JSON to check instead of computing one")
    p.add_argument("--ground-truth", dest="ground_truth", choices=("fixed", "random"))

    p = sub.add_parser("rate", help="FG/CG rates of an N-station chain with the repeaterless bounds")
    _common(p)
    p.add_argument("--n-stations", dest="n_stations", type=int)
    p.add_argument("--method", choices=("auto",) + METHODS)
    p.add_argument("--samples", type=int)

    p = sub.add_parser("cutoff", help="largest station count with a positive key")
    _common(p)
    p.add_argument("--method", choices=("CG", "FG"))
    p.add_argument("--samples", type=int)

    p = sub.add_parser("sweep", help="region map over (eta0, L_tot)")
    _common(p)
    p.add_argument("--method", choices=("auto", "FG_exact", "FG_multinomial", "FG_monte_carlo"))
    p.add_argument("--samples", type=int)
    p.add_argument("--eta0-range", dest="eta0_range", type=float, nargs=3, metavar=("LO", "HI", "STEP"))
    p.add_argument("--l-range", dest="l_range", type=float, nargs=3, metavar=("LO", "HI", "STEP"))
    p.add_argument("--no-fg", dest="no_fg", action="store_const", const=True, help="CG regions only")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Merge defaults, environment, config file and flags (highest last)."""
    cfg = dict(DEFAULTS)
    if args.command == "cutoff":
        cfg["method"] = "CG"
    if os.environ.get("TECREP_SEED"):
        cfg["seed"] = int(os.environ["TECREP_SEED"])
    if os.environ.get("TECREP_WORKERS"):
        cfg["workers"] = int(os.environ["TECREP_WORKERS"])
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        cfg[key] = value
    cfg["command"] = args.command
    return cfg


def _params(cfg):
    code = CodeParams(cfg["n"], cfg["m"])
    channel = ChannelParams(cfg["eta0"], cfg["e"], cfg["eta_c"], cfg["l_att"])
    return code, channel


def _emit(cfg, text: str):
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(cfg, payload: dict):
    doc = {"tool": "tecrepeater", "version": __version__, "config": _public(cfg), **payload}
    _emit(cfg, json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n")


def _public(cfg):
    return {k: v for k, v in cfg.items() if k not in ("out",)}


def cmd_station(cfg) -> int:
    code, channel = _params(cfg)
    table = build_station_table(code, channel, cfg["dx_form"])
    _emit_json(cfg, {"station": table.to_dict()})
    return EXIT_OK


def cmd_verify(cfg) -> int:
    if cfg["table"]:
        with open(cfg["table"]) as fh:
            doc = json.load(fh)
        table = StationTable.from_dict(doc.get("station", doc))
        code, channel = table.code, table.channel
    else:
        code, channel = _params(cfg)
        table = build_station_table(code, channel, cfg["dx_form"])
    if cfg["trials"] < 1:
        raise UsageError("--trials must be at least 1")
    oracle = simulate_station(code, channel, cfg["trials"], cfg["seed"], cfg["ground_truth"], cfg["workers"])
    report = compare_with_analytic(table, oracle)
    adj = adjudicate_dx(oracle)
    summary = ", ".join(
        f"{form}: flagged={r.n_flagged} max|z|={r.max_abs_z:.3g}" for form, r in adj["reports"].items()
    )
    _emit_json(
        cfg,
        {
            "oracle": {k: v for k, v in oracle.to_dict().items() if k != "classes"},
            "report": report.to_dict(),
            "dx_adjudication": {
                "preferred": adj["preferred"],
                "line": f"D_X adjudication -> {adj['preferred']} ({summary})",
                "forms": {f: {"n_flagged": r.n_flagged, "max_abs_z": r.max_abs_z, "chi2": r.chi2}
                          for f, r in adj["reports"].items()},
            },
        },
    )
    print(f"D_X adjudication -> {adj['preferred']} ({summary})", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_VERIFY


def cmd_rate(cfg) -> int:
    code, channel = _params(cfg)
    table = build_station_table(code, channel, cfg["dx_form"])
    spec = ChainSpec(table, cfg["n_stations"])
    method = cfg["method"]
    fg = chain_rate(spec, "auto" if method in ("auto", "CG") else method, cfg["samples"], cfg["seed"])
    cg = cg_rate(spec)
    eta_tot = math.exp(spec.n_stations * math.log(channel.eta0))
    l_tot = spec.n_stations * channel.unit_distance_km()
    bounds = {
        "eta_tot": eta_tot,
        "r_plob": plob(eta_tot) if eta_tot > 0 else 0.0,
        "r_tgw": tgw(eta_tot) if eta_tot > 0 else 0.0,
        "r_direct": direct_rate(eta_tot) if eta_tot > 0 else 0.0,
    }
    _emit_json(
        cfg,
        {
            "n_stations": spec.n_stations,
            "l_tot_km": l_tot,
            "p0": table.p0,
            "e0": table.e0,
            "fg": fg.to_dict(),
            "cg": cg.to_dict(),
            "r_fg": fg.r_per_mode,
            "r_cg": cg.r_per_mode,
            **bounds,
            "fg_beats_plob": fg.r_per_mode - 3.0 * (fg.r_per_mode_se or 0.0) > bounds["r_plob"],
            "cg_beats_plob": cg.r_per_mode > bounds["r_plob"],
        },
    )
    return EXIT_OK


def cmd_cutoff(cfg) -> int:
    code, channel = _params(cfg)
    if cfg["method"] not in ("CG", "FG"):
        raise UsageError("cutoff --method must be CG or FG")
    n_star = positive_key_cutoff(code, channel, cfg["method"], cfg["samples"], cfg["seed"], cfg["dx_form"])
    _emit_json(cfg, {"method": cfg["method"], "n_star": n_star, "l_tot_km": n_star * channel.unit_distance_km()})
    return EXIT_OK


def cmd_sweep(cfg) -> int:
    code = CodeParams(cfg["n"], cfg["m"])
    ChannelParams(0.5, cfg["e"], cfg["eta_c"], cfg["l_att"])  # validates e, eta_c, l_att
    grid = GridSpec.ranges(tuple(cfg["eta0_range"]), tuple(cfg["l_range"]))
    region = scan_region(
        code,
        cfg["e"],
        cfg["eta_c"],
        grid,
        MCSpec(cfg["samples"], cfg["seed"]),
        cfg["dx_form"],
        cfg["l_att"],
        compute_fg=not cfg["no_fg"],
        fg_method=cfg["method"],
        workers=cfg["workers"],
    )
    fmt = cfg["format"] or ("json" if (cfg["out"] or "").endswith(".json") else "csv")
    if fmt == "json":
        doc = region.to_dict()
        doc["config"] = _public(cfg)
        _emit(cfg, json.dumps(doc, indent=2) + "\n")
    else:
        _emit(cfg, region.to_csv())
        meta = {**region.metadata(), "config": _public(cfg)}
        if cfg["out"]:
            with open(cfg["out"] + ".meta.json", "w") as fh:
                fh.write(json.dumps(meta, indent=2) + "\n")
        else:
            print(json.dumps(meta), file=sys.stderr)
    return EXIT_OK


COMMANDS = {
    "station": cmd_station,
    "verify": cmd_verify,
    "rate": cmd_rate,
    "cutoff": cmd_cutoff,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except CapExceeded as exc:
        print(f"tecrepeater: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ValueError, TypeError, KeyError) as exc:
        print(f"tecrepeater: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
