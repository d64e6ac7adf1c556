"""Command-line entry point: ``ncsat run|validate|min-antennas|preset``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .constellation import build_joint
from .engine import detection_set, find_min_antennas, sweep
from .errors import ConfigError, RejectedConstellationError
from .io import RunManifest, dump_config, emit_results, load_config, override_config
from .scenario import PRESETS, get_preset

log = logging.getLogger("ncsat")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load(args):
    try:
        config = load_config(args.config)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    if args.seed is not None:
        config = override_config(config, master_seed=args.seed)
    return config


def cmd_run(args) -> int:
    config = _load(args)
    build_joint(detection_set(config)).require_valid()
    records = sweep(config, workers=args.workers)
    manifest = RunManifest(
        config=config,
        output_dir=Path(args.out),
        config_path=str(args.config),
        tool_version=__version__,
    )
    csv_path, manifest_path = emit_results(records, manifest)
    for r in records:
        print(f"n_ele={r.n_ele:3d} R={r.R:5d} snr={r.snr_db:7.2f} dB  BER={r.aggregate_ber:.3e}")
    print(f"wrote {csv_path} and {manifest_path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load(args)
    joint = build_joint(detection_set(config))
    joint.require_valid()
    print(
        f"{config.name}: {config.num_users} users, {config.psk_order}-PSK, "
        f"{joint.size} joint points, min distance {joint.min_distance:.4f}: OK"
    )
    return EXIT_OK


def cmd_min_antennas(args) -> int:
    config = _load(args)
    n = find_min_antennas(config, args.snr, args.target, workers=args.workers)
    if n is None:
        print(f"not-found: no n_ele in {config.n_ele} reaches BER <= {args.target:g} at {args.snr:g} dB")
    else:
        print(f"n_ele={n} R={n * n}")
    return EXIT_OK


def cmd_preset(args) -> int:
    try:
        config = get_preset(args.name)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    sys.stdout.write(dump_config(config))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override master_seed")
    common.add_argument("--out", default="results", help="output directory (run)")
    common.add_argument("--workers", type=int, default=1, help="worker processes; never changes results")

    parser = argparse.ArgumentParser(prog="ncsat", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run the full sweep and write CSV + manifest")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", parents=[common], help="parse config and check the joint constellation")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("min-antennas", parents=[common], help="smallest n_ele meeting a target BER")
    p.add_argument("config")
    p.add_argument("--snr", type=float, required=True, help="per-user SNR in dB")
    p.add_argument("--target", type=float, required=True, help="target aggregate BER")
    p.set_defaults(func=cmd_min_antennas)

    p = sub.add_parser("preset", parents=[common], help="print a preset config document")
    p.add_argument("name", choices=sorted(PRESETS))
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        return args.func(args)
    except (ConfigError, RejectedConstellationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - mapped to the runtime exit code
        log.debug("runtime failure", exc_info=True)
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
