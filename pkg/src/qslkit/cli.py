"""Command-line entry point: ``qslkit run | sweep | acceptance | version``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance failure.  QSLKIT_SEED, when set, overrides the config seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .config import from_dict, load_config
from .errors import ConfigError, QslkitError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ACCEPTANCE = 4

log = logging.getLogger("qslkit")


def _seed_override(cfg):
    raw = os.environ.get("QSLKIT_SEED")
    if raw is None or raw == "":
        return cfg
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"QSLKIT_SEED must be an integer, got {raw!r}") from None
    return cfg.with_updates(seed=seed)


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text.strip()


def _sweep_configs(cfg, param, values):
    """One validated config per value; raises ConfigError on a bad key or value."""
    raw = asdict(cfg)
    if param not in raw or param == "scenario":
        raise ConfigError(f"cannot sweep over {param!r}")
    out = []
    for v in values:
        d = dict(raw)
        d[param] = _parse_value(v) if isinstance(v, str) else v
        out.append((v, from_dict(d)))
    return out


def _run_one(args):
    from .scenarios import run_scenario

    cfg, out_dir = args
    return run_scenario(cfg, out_dir)


def cmd_run(ns):
    cfg = _seed_override(load_config(ns.config))
    out = Path(ns.out) if ns.out else Path(cfg.output_dir) / cfg.scenario
    summary = _run_one((cfg, out))
    print(f"{cfg.scenario}: wrote {out} in {summary['wall_time_s']:.2f} s")
    return EXIT_OK


def cmd_sweep(ns):
    cfg = _seed_override(load_config(ns.config))
    values = [v for v in ns.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("--values is empty")
    jobs = _sweep_configs(cfg, ns.param, values)
    root = Path(ns.out) if ns.out else Path(cfg.output_dir) / f"{cfg.scenario}-sweep-{ns.param}"
    tasks = [(c, root / f"{ns.param}={v.strip()}") for v, c in jobs]
    if ns.workers == 1:
        summaries = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=ns.workers) as pool:
            summaries = list(pool.map(_run_one, tasks))
    for (_, out), s in zip(tasks, summaries):
        print(f"{out}: {s['wall_time_s']:.2f} s")
    return EXIT_OK


def cmd_acceptance(ns):
    from .acceptance import run_acceptance

    results = run_acceptance()
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def cmd_version(ns):
    print(f"qslkit {__version__}")
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="qslkit", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run one scenario")
    r.add_argument("--config", required=True)
    r.add_argument("--out", help="output directory (default: <output_dir>/<scenario>)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a scenario for several values of one parameter")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True)
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--out", help="root directory; one subdirectory per value")
    s.add_argument("--workers", type=int, default=None, help="worker processes (default: CPU count)")
    s.set_defaults(func=cmd_sweep)

    a = sub.add_parser("acceptance", help="run the acceptance suite")
    a.set_defaults(func=cmd_acceptance)

    v = sub.add_parser("version", help="print the version")
    v.set_defaults(func=cmd_version)
    return p


def main(argv=None):
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return ns.func(ns)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QslkitError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
