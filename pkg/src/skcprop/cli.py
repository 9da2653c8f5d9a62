"""Command line entry point: ``skcprop <subcommand> --config FILE --out FILE``.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 Monte Carlo validation failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, replace
from pathlib import Path

from .config import CRITERIA, parse_config
from .errors import ConfigError, DomainError, NumericalError
from .montecarlo import _jsonable
from .sweep import (
    RHO_COLUMNS,
    run_mc_validate,
    run_rho_sweep,
    run_skc_sweep,
    skc_columns,
    solve_admissible_distance,
    to_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3

log = logging.getLogger("skcprop")

DISTANCE_COLUMNS = ("spectrum", "criterion", "target_bits", "distance_wl", "distance_m",
                    "status", "lower_bound_at_distance", "diagnostics")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _sidecar(out: Path, spec, extra=None):
    resolved = dict(spec.resolved)
    if extra:
        resolved.update(extra)
    _write(out.with_suffix(".config.json"),
           json.dumps(_jsonable(resolved), indent=2, sort_keys=True) + "\n")


def _cmd_rho_sweep(spec, args):
    rows = run_rho_sweep(spec)
    _write(args.out, to_csv(rows, RHO_COLUMNS))
    _sidecar(args.out, spec)
    failed = [r for r in rows if r["status"] != "ok"]
    return EXIT_NUMERICAL if failed else EXIT_OK


def _cmd_skc_sweep(spec, args):
    rows = run_skc_sweep(spec)
    _write(args.out, to_csv(rows, skc_columns(spec.outputs)))
    _sidecar(args.out, spec)
    return EXIT_NUMERICAL if any(r.status != "ok" for r in rows) else EXIT_OK


def _cmd_distance(spec, args):
    criterion = args.criterion or spec.criterion
    target = args.target if args.target is not None else spec.target_bits
    if criterion == "lb_target" and target is None:
        raise ConfigError("criterion lb_target needs --target or distance.target_bits",
                          key="distance.target_bits")
    results = solve_admissible_distance(spec, criterion, target)
    rows = [asdict(r) for r in results]
    for r in rows:
        r["target_bits"] = "" if r["target_bits"] is None else r["target_bits"]
    _write(args.out, to_csv(rows, DISTANCE_COLUMNS))
    _sidecar(args.out, spec, {"distance": {"criterion": criterion, "target_bits": target}})
    for r in results:
        log.info("%s: %s %s", r.spectrum, r.status, r.distance_wl)
    return EXIT_OK


def _cmd_mc_validate(spec, args):
    reports = run_mc_validate(spec)
    gated = [r for r in reports if r.gated]
    passed = all(r.passed for r in gated)
    doc = {"pass": passed, "reports": [r.as_dict() for r in reports]}
    _write(args.out, json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    for r in reports:
        log.info("%s %s: %s %s", r.spectrum, r.displacement, "pass" if r.passed else "FAIL",
                 ",".join(r.failed()))
    return EXIT_OK if passed else EXIT_VALIDATION


COMMANDS = {
    "rho-sweep": (_cmd_rho_sweep, "correlation |rho| versus distance (CSV)"),
    "skc-sweep": (_cmd_skc_sweep, "key-capacity bounds versus distance (CSV)"),
    "distance": (_cmd_distance, "minimal admissible Bob-Eve distance (CSV)"),
    "mc-validate": (_cmd_mc_validate, "Monte Carlo cross-validation (JSON report)"),
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="skcprop", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)
    for name, (_, help_text) in COMMANDS.items():
        s = sub.add_parser(name, help=help_text)
        s.add_argument("--config", required=True, type=Path)
        s.add_argument("--out", required=True, type=Path)
        s.add_argument("--seed", type=int, default=None, help="override mc.seed")
        s.add_argument("--samples", type=int, default=None, help="override mc.num_observations")
        if name == "distance":
            s.add_argument("--criterion", choices=CRITERIA, default=None)
            s.add_argument("--target", type=float, default=None, help="bits, for lb_target")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        spec = parse_config(args.config)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("seed must be in [0, 2**64)", key="--seed")
        if args.samples is not None and args.samples < 2:
            raise ConfigError("samples must be >= 2", key="--samples")
        if args.seed is not None or args.samples is not None:
            mc = replace(
                spec.mc,
                seed=spec.mc.seed if args.seed is None else args.seed,
                num_observations=spec.mc.num_observations if args.samples is None else args.samples,
            )
            resolved = dict(spec.resolved)
            resolved["mc"] = dict(resolved["mc"], seed=mc.seed,
                                  num_observations=mc.num_observations)
            spec = replace(spec, mc=mc, resolved=resolved)
        handler = COMMANDS[args.cmd][0]
        return handler(spec, args)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
