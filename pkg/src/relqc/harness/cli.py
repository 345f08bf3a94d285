"""Command-line entry point: ``relqc <experiment> [flags]`` or ``relqc verify-all``.

Exit status is 0 when every row passes, 1 when any check fails and 2 for a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from ..errors import ConfigError
from ..rng import DEFAULT_SEED
from .criteria import verify_all
from .experiments import EXPERIMENTS, ExperimentConfig, run_experiment

OUT_ENV = "RELQC_OUT_DIR"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _param(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value.strip()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="relqc", description="Run J-measurement protocol experiments and the acceptance suite.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in EXPERIMENTS:
        s = sub.add_parser(name, help=f"run the {name} experiment")
        s.add_argument("--seed", type=_seed, default=None)
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
        mode = s.add_mutually_exclusive_group()
        mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
        mode.add_argument("--sample", dest="mode", action="store_const", const="sample")
        s.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE")
        s.add_argument("--config", default=None, help="JSON file with seed, trials, mode, parameters")
    v = sub.add_parser("verify-all", help="run the acceptance criteria")
    v.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    v.add_argument("--out", default=None, help="write verify_all.json into this directory")
    return p


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    allowed = {"experiment", "seed", "trials", "mode", "parameters", "output_path"}
    if set(data) - allowed:
        raise ConfigError(f"unknown config keys {sorted(set(data) - allowed)}")
    return data


def config_from_args(args) -> ExperimentConfig:
    base = _load_config(args.config) if args.config else {}
    if base.get("experiment", args.command) != args.command:
        raise ConfigError(f"config is for {base['experiment']!r}, not {args.command!r}")
    params = dict(base.get("parameters") or {})
    params.update(dict(args.param))
    out = args.out or base.get("output_path") or os.environ.get(OUT_ENV) or "results"
    return ExperimentConfig(
        experiment=args.command,
        seed=args.seed if args.seed is not None else base.get("seed", DEFAULT_SEED),
        trials=args.trials if args.trials is not None else base.get("trials"),
        parameters=params,
        output_path=out,
        mode=args.mode or base.get("mode"),
    )


def _run(argv) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify-all":
        report = verify_all(args.seed, on_result=lambda r: print(r.line(), flush=True))
        out = args.out or os.environ.get(OUT_ENV)
        if out:
            try:
                os.makedirs(out, exist_ok=True)
                with open(os.path.join(out, "verify_all.json"), "w", encoding="utf-8") as f:
                    f.write(report.to_json())
            except OSError as e:
                raise ConfigError(f"cannot write to {out}: {e}") from e
        print("ALL PASS" if report.passed else "SOME CRITERIA FAILED")
        return EXIT_OK if report.passed else EXIT_FAIL
    cfg = config_from_args(args)
    report = run_experiment(cfg)
    for r in report.failures:
        print(f"FAIL {r.quantity} {r.keys} observed={r.observed!r} target={r.target!r}", file=sys.stderr)
    print(f"{cfg.experiment}: {len(report.rows) - len(report.failures)}/{len(report.rows)} checks passed; "
          f"wrote {os.path.join(cfg.output_path, cfg.experiment)}.csv/.json")
    return EXIT_OK if report.passed else EXIT_FAIL


def main(argv=None) -> int:
    try:
        return _run(argv)
    except ConfigError as e:
        print(f"relqc: config error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
