"""Batch command-line front-end: acquire, loop, sweep, selftest.

Loads a declarative scenario config (or the built-in default profile),
runs the requested experiment, and writes CSV / JSON-lines artifacts with
a deterministic metadata sidecar per output file.

Exit codes: 0 success, 1 config error, 2 runtime error, 3 selftest failure.
"""

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import ConfigError, config_hash, load_config, parse_config
from .strategy import gamma_sweep, run_closed_loop, run_once

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2
EXIT_SELFTEST = 3


def _write_sidecar(path: Path, meta: dict) -> None:
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header, rows, meta: dict) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    _write_sidecar(path, meta)


def _fmt(value):
    if isinstance(value, float):
        return repr(float(value))
    return value


def _load(args):
    if args.config is not None:
        scenario, strategy, sweep = load_config(args.config)
    else:
        scenario, strategy, sweep = parse_config({})
    if getattr(args, "strategy", None):
        strategy = replace(strategy, kind=args.strategy)
    if getattr(args, "ris_share", None) is not None:
        strategy = replace(strategy, ris_share=args.ris_share)
    return scenario, strategy, sweep


def _meta(scenario, strategy, sweep, seed, command) -> dict:
    return {"artifact_version": __version__,
            "config_hash": config_hash(scenario, strategy, sweep),
            "seed": seed, "command": command}


def cmd_acquire(args) -> int:
    scenario, strategy, sweep = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = run_once(scenario, strategy, args.seed)
    meta = _meta(scenario, strategy, sweep, args.seed, "acquire")
    for label, est in sorted(result.estimates.items()):
        if est is None:
            raise RuntimeError(
                f"{label} branch received too few slow-time slots to extract; "
                f"adjust ris_share or the duration")
        disp = est.displacement
        _write_csv(out / f"{label}_displacement.csv",
                   ["time_s", "displacement_m"],
                   zip(disp.times.tolist(), disp.samples.tolist()),
                   meta | {"path": label})
        _write_csv(out / f"{label}_spectrum.csv", ["freq_Hz", "power"],
                   zip(est.spectrum.freqs.tolist(), est.spectrum.power.tolist()),
                   meta | {"path": label, "peak_freq_Hz": est.peak_freq,
                           "prominence_db": est.peak_prominence_db})
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario, strategy, sweep = _load(args)
    gammas = sweep["gammas"]
    if args.gammas is not None:
        try:
            gammas = [float(g) for g in args.gammas.split(",") if g != ""]
        except ValueError:
            raise ConfigError(f"bad --gammas list: {args.gammas!r}") from None
    n_seeds = args.seeds if args.seeds is not None else sweep["seeds"]
    if not gammas:
        raise ConfigError("sweep gamma grid is empty")
    if any(not 0.0 <= g <= 1.0 for g in gammas):
        raise ConfigError("sweep gammas must lie in [0, 1]")
    kind = strategy.kind if strategy.kind in ("spatial", "temporal") \
        else "spatial"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = gamma_sweep(scenario, kind, gammas, range(n_seeds))
    _write_csv(out / "sweep.csv",
               ["gamma", "path", "seed", "peak_freq_Hz", "prominence_db"],
               ([r["gamma"], r["path"], r["seed"], r["peak_freq_Hz"],
                 r["prominence_db"]] for r in rows),
               _meta(scenario, strategy, sweep, None, "sweep")
               | {"kind": kind, "gammas": gammas, "seeds": n_seeds})
    return EXIT_OK


def cmd_loop(args) -> int:
    scenario, strategy, sweep = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    logs = run_closed_loop(scenario, strategy, args.windows, seed=args.seed)
    path = out / "loop.jsonl"
    with path.open("w") as fh:
        for entry in logs:
            fh.write(json.dumps(entry.to_json_dict(), sort_keys=True) + "\n")
    _write_sidecar(path, _meta(scenario, strategy, sweep, args.seed, "loop")
                   | {"windows": args.windows})
    return EXIT_OK


def cmd_selftest(args) -> int:
    from . import acceptance
    results = acceptance.run_all(stream=sys.stdout)
    failed = [r for r in results if not r.passed]
    total = sum(r.runtime_s for r in results)
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed "
          f"in {total:.1f} s")
    return EXIT_SELFTEST if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="risvital",
        description="RIS-assisted radar vital-sign monitoring simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_out=True):
        p.add_argument("--config", help="scenario YAML (defaults built in)")
        if needs_out:
            p.add_argument("--out", required=True, help="output directory")

    p_acq = sub.add_parser("acquire", help="run one acquisition, write "
                                           "displacement and spectrum CSVs")
    common(p_acq)
    p_acq.add_argument("--seed", type=int, default=0)
    p_acq.add_argument("--strategy", choices=("spatial", "temporal",
                                              "opportunistic"))
    p_acq.add_argument("--ris-share", type=float, dest="ris_share")
    p_acq.set_defaults(func=cmd_acquire)

    p_sweep = sub.add_parser("sweep", help="sweep the RIS resource share")
    common(p_sweep)
    p_sweep.add_argument("--gammas", help="comma-separated share grid")
    p_sweep.add_argument("--seeds", type=int, help="number of seeds")
    p_sweep.add_argument("--strategy", choices=("spatial", "temporal"))
    p_sweep.set_defaults(func=cmd_sweep)

    p_loop = sub.add_parser("loop", help="run the closed sensing loop")
    common(p_loop)
    p_loop.add_argument("--windows", type=int, default=5)
    p_loop.add_argument("--seed", type=int, default=0)
    p_loop.add_argument("--strategy", choices=("spatial", "temporal",
                                               "opportunistic"))
    p_loop.add_argument("--ris-share", type=float, dest="ris_share")
    p_loop.set_defaults(func=cmd_loop)

    p_self = sub.add_parser("selftest", help="run the acceptance suite")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
