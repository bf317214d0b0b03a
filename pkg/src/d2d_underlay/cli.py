"""``simulate`` command line entry point.

Exit codes: 0 success, 2 configuration error, 1 runtime failure. Progress goes
to standard error; CSV goes to ``<prefix>.csv`` or standard output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys

from .experiments import PRESETS, emit_csv, load_spec, preset, run_sweep
from .radio import EstimateMode
from .topology import ConfigError

log = logging.getLogger("d2d_underlay")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="simulate", description="D2D underlay sweeps and figure presets.")
    ap.add_argument("preset", nargs="?", help=f"one of {', '.join(PRESETS)}")
    ap.add_argument("--spec", help="JSON sweep specification instead of a preset")
    ap.add_argument("--trials", type=int, help="trials (or Monte Carlo samples) per grid point")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--cells", type=int, choices=(1, 7))
    ap.add_argument("--mode", choices=[m.value for m in EstimateMode])
    ap.add_argument("--ni", choices=("on", "off"), help="network information for route metrics")
    ap.add_argument("--out", help="output prefix; writes <prefix>.csv (default: stdout)")
    ap.add_argument("--dump-topologies", action="store_true", help="write <prefix>.topologies.jsonl")
    ap.add_argument("--dump-limit", type=int, default=100, help="trials dumped per grid point")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--timing", action="store_true", help="record wall_time_s (output no longer reproducible)")
    ap.add_argument("-q", "--quiet", action="store_true")
    return ap


def _spec_from_args(args):
    if args.spec and args.preset:
        raise ConfigError("preset", "give either a preset or --spec, not both")
    overrides = {}
    if args.cells is not None:
        overrides["cells"] = args.cells
    if args.ni is not None:
        overrides["ni_enabled"] = args.ni == "on"
    if args.spec:
        spec = load_spec(args.spec)
        base = spec.base
        if args.trials is not None:
            overrides["trials"] = args.trials
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.mode is not None:
            overrides["mode"] = args.mode
        if overrides:
            spec = dataclasses.replace(spec, base=base.replace(**overrides))
        return spec
    if not args.preset:
        raise ConfigError("preset", "a preset name or --spec is required")
    kw = {}
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.mode is not None:
        overrides["mode"] = args.mode
        overrides["modes"] = (args.mode,)
    return preset(args.preset, **kw, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else logging.INFO,
        stream=sys.stderr,
        format="%(asctime)s %(message)s",
    )
    try:
        if args.trials is not None and args.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        spec = _spec_from_args(args)
        prefix = args.out or spec.outputs
        if args.dump_topologies and not prefix:
            raise ConfigError("dump-topologies", "needs --out to name the dump file")
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        dump_fh = open(f"{prefix}.topologies.jsonl", "w") if args.dump_topologies else None
        dump = (lambda doc: dump_fh.write(json.dumps(doc) + "\n")) if dump_fh else None
        try:
            rows = run_sweep(spec, workers=args.workers, timing=args.timing, dump=dump, dump_limit=args.dump_limit)
        finally:
            if dump_fh:
                dump_fh.close()
        if prefix:
            emit_csv(rows, f"{prefix}.csv")
            log.info("wrote %s.csv (%d rows)", prefix, len(rows))
        else:
            emit_csv(rows, sys.stdout)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
