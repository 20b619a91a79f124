"""Command-line front end: ``rrgedge <campaign> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from . import tracy_widom
from .errors import ConfigError
from .experiments import CAMPAIGNS, ExperimentConfig, load_config_file

EXIT_OK = 0
EXIT_IDENTITY_FAILURE = 2
EXIT_CONFIG_ERROR = 3

# argparse dest -> ExperimentConfig field
_FLAG_FIELDS = {
    "n": "n",
    "d": "d",
    "graphs": "num_graphs",
    "seed": "seed",
    "threads": "threads",
    "out": "output_path",
    "t": "t",
    "burnin": "mcmc_burnin",
    "method": "method",
    "r_max": "r_max",
    "timing": "timing",
    "inject_fault": "inject_fault",
}

_DEFAULT_N = {"identities": 64, "interp": 1000}
_DEFAULT_D = {"identities": 4, "interp": 10}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="number of vertices")
    common.add_argument("--d", type=int, help="degree")
    common.add_argument("--graphs", type=int, help="number of sampled graphs")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--threads", type=int, help="worker processes")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="key=value config file; flags override it")
    common.add_argument("--burnin", type=int, help="switching-chain proposals per graph")
    common.add_argument("--method", choices=["auto", "pairing", "switching"])
    common.add_argument("--timing", action="store_true", default=None,
                        help="fill the wall_ms column of samples.csv")

    p = _Parser(prog="rrgedge", description="Edge statistics of random regular graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("ramanujan", parents=[common], help="fraction of Ramanujan graphs")
    sub.add_parser("edge-fluct", parents=[common], help="edge fluctuations against TW1")
    rig = sub.add_parser("rigidity", parents=[common], help="eigenvalue rigidity")
    rig.add_argument("--r-max", type=float, dest="r_max", help="allowed 99th-percentile ratio")
    ident = sub.add_parser("identities", parents=[common], help="exact identity suite")
    ident.add_argument("--inject-fault", action="store_true", default=None, dest="inject_fault",
                       help="corrupt one Green's function entry before the Ward check")
    interp = sub.add_parser("interp", parents=[common], help="graph plus GOE interpolation")
    interp.add_argument("--t", type=float, help="interpolation time")
    tw = sub.add_parser("tw-table", help="write the Tracy-Widom table as CSV")
    tw.add_argument("--order", type=int, choices=[1, 2], default=1)
    tw.add_argument("--out", help="output directory (stdout when omitted)")
    return p


def resolve_config(command: str, args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for dest, name in _FLAG_FIELDS.items():
        v = getattr(args, dest, None)
        if v is not None:
            values[name] = v
    values.setdefault("n", _DEFAULT_N.get(command))
    values.setdefault("d", _DEFAULT_D.get(command))
    if values["n"] is None or values["d"] is None:
        raise ConfigError("--n and --d are required (flag or config file)")
    return ExperimentConfig.from_mapping(values)


def _tw_table(args) -> int:
    text = tracy_widom.get_table(args.order).to_csv()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"tw{args.order}.csv").write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "tw-table":
        return _tw_table(args)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            cfg = resolve_config(args.command, args)
        report = CAMPAIGNS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    if cfg.output_path:
        report.write(cfg.output_path, timing=cfg.timing)
    summary = {"campaign": report.campaign, "passed": report.passed, **report.aggregate}
    print(json.dumps(summary, indent=2, default=str))
    if args.command == "identities":
        for c in report.checks:
            status = "PASS" if c["passed"] else "FAIL"
            print(f"{status} {c['name']}: residual {c['residual']:.3e} (tol {c['tol']:g})")
        if not report.passed:
            return EXIT_IDENTITY_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
