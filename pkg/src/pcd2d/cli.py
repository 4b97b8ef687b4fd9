"""``pcd2d`` command line: simulate, verify, tradeoff, bound.

Every flag may also come from ``--config FILE``, a flat JSON object whose
keys are the flag names without dashes (``{"K": 6, "S": 2, "t": 2}``).
Flags given on the command line win. Exit status: 0 success, 1 validation
error, 2 decode or invariant failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time

from . import harness

EXIT_OK, EXIT_INVALID, EXIT_FAILURE = 0, 1, 2

DEFAULTS = {
    "K": None, "S": 0, "N": None, "t": None, "B": None, "seed": 0, "field": "auto",
    "selfish": None, "demands": None, "mode": "default", "out": None,
    "max_K": 4, "samples": 1000, "jobs": 1, "grid": 200,
}

log = logging.getLogger("pcd2d")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON file of flag values")
    common.add_argument("--K", type=int, help="number of users")
    common.add_argument("--S", type=int, help="number of selfish users")
    common.add_argument("--N", type=int, help="number of files (default K)")
    common.add_argument("--t", help="caching parameter, or a range like 0-5")
    common.add_argument("--B", type=int, help="file size in symbols (default F)")
    common.add_argument("--seed", type=int, help="64-bit library seed")
    common.add_argument("--field", help="field order: auto, 256 or 65536")
    common.add_argument("--selfish", help="selfish users, e.g. '4,5', or 'all'")
    common.add_argument("--demands", help="demand vector '1,2,3', 'exhaustive' or 'random:COUNT'")
    common.add_argument("--mode", choices=["default", "coordinated"], help="delivery mode")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="pcd2d", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="run delivery rounds on a random library")
    v = sub.add_parser("verify", parents=[common], help="exhaustive decodability check")
    v.add_argument("--max-K", dest="max_K", type=int)
    v.add_argument("--samples", type=int, help="demand vectors per configuration for K >= 5")
    v.add_argument("--jobs", type=int, help="worker processes")
    for name, text in (("tradeoff", "achievable trade-off sweep"), ("bound", "lower-bound sweep")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("--grid", type=int, help="number of memory grid points")
    return p


def _merge(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS)
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a flat JSON object")
        for key, value in loaded.items():
            key = key.lstrip("-").replace("-", "_")
            if key not in DEFAULTS:
                raise ValueError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _t_values(choice, K: int) -> list[int]:
    if choice is None:
        raise ValueError("--t is required")
    choice = str(choice)
    if "-" in choice.strip("-"):
        lo, hi = choice.split("-", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(choice)]


def _require(cfg, *names):
    for n in names:
        if cfg[n] is None:
            raise ValueError(f"--{n} is required")
    if cfg["N"] is None:
        cfg["N"] = cfg["K"]


def _emit(cfg, text: str):
    if cfg["out"]:
        with open(cfg["out"], "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_simulate(cfg) -> int:
    _require(cfg, "K")
    K, S, N = cfg["K"], cfg["S"], cfg["N"]
    rows, failed = [], False
    for t in _t_values(cfg["t"], K):
        start = time.perf_counter()
        reports = harness.simulate(K, S, N, t, B=cfg["B"], seed=cfg["seed"], field_order=cfg["field"],
                                   selfish=cfg["selfish"], demands=cfg["demands"], mode=cfg["mode"])
        elapsed = time.perf_counter() - start
        for rep in reports:
            rows.extend(harness.simulate_rows(rep))
            failed |= not rep.ok
        n_ok = sum(o.ok for rep in reports for o in rep.outcomes)
        n_all = sum(len(rep.outcomes) for rep in reports)
        log.info("K=%d S=%d N=%d t=%d: %d/%d user decodes ok over %d rounds, %d transmissions/round, "
                 "load %s, %.3fs", K, S, N, t, n_ok, n_all, len(reports), reports[0].transmissions,
                 harness.fmt_rational(reports[0].observed_load), elapsed)
    _emit(cfg, harness.to_csv(harness.SIMULATE_HEADER, rows))
    return EXIT_FAILURE if failed else EXIT_OK


def cmd_verify(cfg) -> int:
    start = time.perf_counter()
    try:
        rows = harness.verify(cfg["max_K"], samples=cfg["samples"], seed=cfg["seed"],
                              mode=cfg["mode"], jobs=cfg["jobs"])
    except harness.VerificationFailure as e:
        log.error("%s", e)
        return EXIT_FAILURE
    log.info("verified %d configurations, %d rounds in %.1fs", len(rows),
             sum(r[7] for r in rows), time.perf_counter() - start)
    _emit(cfg, harness.to_csv(harness.VERIFY_HEADER, rows))
    return EXIT_OK


def cmd_tradeoff(cfg) -> int:
    _require(cfg, "K")
    rows = harness.tradeoff_rows(cfg["K"], cfg["S"], cfg["N"], cfg["grid"])
    _emit(cfg, harness.to_csv(harness.TRADEOFF_HEADER, rows))
    return EXIT_OK


def cmd_bound(cfg) -> int:
    _require(cfg, "K")
    rows = harness.bound_rows(cfg["K"], cfg["S"], cfg["N"], cfg["grid"])
    if rows and rows[0][6]:
        log.info("optimal regime starts at M1 = %s", rows[0][6])
    _emit(cfg, harness.to_csv(harness.BOUND_HEADER, rows))
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "verify": cmd_verify, "tradeoff": cmd_tradeoff, "bound": cmd_bound}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = _merge(args)
        return COMMANDS[args.command](cfg)
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"pcd2d: error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
