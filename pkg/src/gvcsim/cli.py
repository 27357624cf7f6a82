"""Command-line front end: ``gvcsim run|compare|sweep --config FILE``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime error
(e.g. a trace that ends before the session does).
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import sys

from . import experiment as ex
from .config import ENV_LOG_LEVEL, ConfigError, from_mapping, load_config, resolve_output_dir
from .metrics import summary_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

log = logging.getLogger("gvcsim")


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        raw = cfg.to_mapping()
        raw["seed"] = args.seed
        cfg = from_mapping(raw, base_dir=cfg.base_dir)
    return cfg


def cmd_run(cfg, out_dir, stamp=False):
    """One session per configured controller at repetition 0."""
    results = ex.run_many(
        [(cfg, spec, cfg.band, 0, True) for spec in cfg.controllers], jobs=cfg.jobs
    )
    rows = []
    for i, res in enumerate(results):
        ident = f"{i:02d}_{res.label.lower()}"
        metrics = None
        if res.log.records:
            metrics = {"avq": res.avq, "rr_percent": res.rr_percent, "objective": res.objective, "band": res.band}
        extra = {"metrics": metrics}
        if stamp:
            extra["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
        ex.write_atomic(out_dir / f"session_{ident}.json", res.log.to_json(**extra))
        ex.write_atomic(out_dir / f"chunks_{ident}.csv", res.log.to_csv())
        if res.log.records:
            rows.append({"controller": res.label, "band": res.band, "avq": res.avq,
                         "rr_percent": res.rr_percent, "objective": res.objective})
        log.info("%s: avq=%.3f rr=%.3f%% status=%s", res.label, res.avq, res.rr_percent, res.status)
    ex.write_atomic(out_dir / "summary.csv", summary_csv(rows))
    return _status(results)


def cmd_compare(cfg, out_dir):
    rows, results = ex.compare(cfg)
    ex.write_atomic(out_dir / "summary.csv", summary_csv(rows))
    ex.write_atomic(out_dir / "repetitions.csv", ex.repetitions_csv(results))
    for row in rows:
        log.info("%s: avq=%.3f rr=%.3f%%", row["controller"], row["avq"], row["rr_percent"])
    return _status(results)


def cmd_sweep(cfg, out_dir):
    rows, results = ex.sweep(cfg)
    ex.write_atomic(out_dir / "summary.csv", summary_csv(rows))
    ex.write_atomic(out_dir / "repetitions.csv", ex.repetitions_csv(results))
    ex.write_atomic(out_dir / "sweep_plot.csv", ex.band_plot_csv(rows, cfg.bands))
    for row in rows:
        log.info("%s: avq=%.3f rr=%.3f%%", row["band"], row["avq"], row["rr_percent"])
    return _status(results)


def _status(results):
    bad = ex.incomplete(results)
    for r in bad:
        print(f"error: {r.label} rep {r.rep}: {r.message}", file=sys.stderr)
    return EXIT_RUNTIME if bad else EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="gvcsim", description="Trace-driven quality control simulator for generated video."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "simulate one session per configured controller"),
        ("compare", "compare controllers over repeated traces"),
        ("sweep", "run the Proposed controller across bandwidth bands"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--out", help="output directory (overrides config and $GVCSIM_OUT_DIR)")
        p.add_argument("--seed", type=int, help="seed base (overrides config)")
        p.add_argument("--jobs", type=int, help="worker processes for repetitions")
        p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
        p.add_argument("-v", "--verbose", action="count", default=0)
        if name == "run":
            p.add_argument("--stamp", action="store_true", help="add a generated_at field to session JSON")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK

    level = os.environ.get(ENV_LOG_LEVEL) or ("DEBUG" if args.verbose > 1 else "INFO" if args.verbose else "WARNING")
    logging.basicConfig(level=level.upper(), format="%(levelname)s %(name)s: %(message)s")

    try:
        cfg = _load(args)
    except FileNotFoundError as exc:
        print(f"error: config file not found: {exc.filename}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.print_config:
        sys.stdout.write(cfg.dump())
        return EXIT_OK
    if args.jobs is not None:
        if args.jobs < 1:
            print("error: --jobs must be >= 1", file=sys.stderr)
            return EXIT_CONFIG
        cfg.jobs = args.jobs
    if args.command == "compare" and len(cfg.controllers) < 2:
        print("error: compare needs at least two controllers in 'controllers'", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "sweep":
        if cfg.trace["source"] != "synth":
            print("error: sweep needs trace.source: synth", file=sys.stderr)
            return EXIT_CONFIG
        if not any(s.type.lower() == "proposed" for s in cfg.controllers):
            print("error: sweep needs a Proposed controller in 'controllers'", file=sys.stderr)
            return EXIT_CONFIG

    out_dir = resolve_output_dir(cfg, args.out)
    try:
        if args.command == "run":
            return cmd_run(cfg, out_dir, stamp=args.stamp)
        if args.command == "compare":
            return cmd_compare(cfg, out_dir)
        return cmd_sweep(cfg, out_dir)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
