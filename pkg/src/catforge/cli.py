"""Command-line interface.

Subcommands: ``generate-bank``, ``validate-bank``, ``simulate`` and ``plot``.
Exit status is 0 on success, 1 for usage or configuration errors and 2 for
runtime failures. Diagnostics go to stderr; stdout only carries the path of
the main output (the manifest, or the SVG for ``plot``).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import bank as bank_mod
from . import plot, report
from .config import ConfigError, build_bank, build_components, load_config
from .simulation import Simulator

log = logging.getLogger("catforge")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _corr(text: str) -> float:
    value = float(text)
    if not -1.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"correlation must lie in [-1, 1], got {text}")
    return value


def cmd_generate_bank(args) -> int:
    bank = bank_mod.generate_item_bank(args.size, args.model, args.corr, seed=args.seed)
    out = Path(args.out)
    bank_mod.save_csv(bank, out)
    for name, col in zip("abcd", bank.params.T):
        log.info("%s: mean %.4f  sd %.4f  min %.4f  max %.4f", name, col.mean(), col.std(), col.min(), col.max())
    manifest = report.RunManifest(
        command="generate-bank",
        seed=args.seed,
        config={"size": args.size, "model": args.model, "corr": args.corr, "seed": args.seed},
        outputs={"bank": out.name},
        summary={f"mean_{n}": float(c.mean()) for n, c in zip("abcd", bank.params.T)},
    )
    print(manifest.write(out.with_name(out.name + ".manifest.json")))
    return EXIT_OK


def cmd_validate_bank(args) -> int:
    try:
        bank = bank_mod.load_csv(_existing(args.bank))
    except bank_mod.ItemBankError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    log.info("%s: %d items, valid (%s)", args.bank, len(bank), bank.model)
    return EXIT_OK


def cmd_simulate(args) -> int:
    config = load_config(_existing(args.config))
    bank = build_bank(config)
    components = build_components(config)
    examinees = config["examinees"]
    population = examinees["count"] if "count" in examinees else examinees["thetas"]
    sim = Simulator(bank, population, seed=config["seed"])
    result = sim.simulate(*components, workers=args.workers)
    charts = config.get("output", {}).get("charts", True)
    print(report.write_result(result, config, args.out, charts=charts))
    return EXIT_OK


def _existing(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"{path}: no such file")
    return path


def _result_file(result_dir: Path, name: str) -> Path:
    path = result_dir / name
    if not path.exists():
        raise UsageError(f"{path}: not found, is {result_dir} a simulation output directory?")
    return path


def cmd_plot(args) -> int:
    if args.chart == "item-curve":
        bank = bank_mod.load_csv(_existing(args.bank))
        if not 0 <= args.item < len(bank):
            raise UsageError(f"item index {args.item} out of range for a bank of {len(bank)} items")
        chart = plot.item_curve(bank.params[args.item], args.type)
    elif args.chart == "test-progress":
        result_dir = Path(args.result)
        people = report.read_examinees(_result_file(result_dir, "examinees.csv"))
        if not people:
            raise UsageError(f"{result_dir}: the simulation has no examinees")
        if not 0 <= args.examinee < len(people):
            raise UsageError(f"examinee index {args.examinee} out of range for {len(people)} examinees")
        traj = report.read_trajectory(_result_file(result_dir, f"trajectories/examinee_{args.examinee:04d}.csv"))
        traces = [t for t in plot.PROGRESS_TRACES if getattr(args, t) or args.all]
        person = people[args.examinee]
        chart = plot.test_progress(
            [person["initial_theta"]] + traj["theta_hat"],
            info=traj["info"],
            var=traj["var"],
            see=traj["see"],
            true_theta=person["true_theta"] if (args.true_theta or args.all) else None,
            traces=traces,
            title=f"Test progress, examinee {args.examinee}",
        )
    else:
        if (args.result is None) == (args.bank is None):
            raise UsageError("item-exposure needs exactly one of --result or --bank")
        if args.result is not None:
            bank = bank_mod.load_csv(_result_file(Path(args.result), "bank.csv"))
        else:
            bank = bank_mod.load_csv(_existing(args.bank))
        chart = plot.item_exposure(bank.params, bank.exposure_rates, par=args.par, ptype=args.style)
    svg_path, _ = chart.write(args.out)
    print(svg_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="catforge", description="Computerized adaptive testing simulator.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate-bank", help="draw a random item bank")
    p.add_argument("--size", type=_positive_int, required=True)
    p.add_argument("--model", choices=bank_mod.MODELS, default="4PL")
    p.add_argument("--corr", type=_corr, default=0.0, help="correlation between a and b")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV file to write")
    p.set_defaults(func=cmd_generate_bank)

    p = sub.add_parser("validate-bank", help="check an item bank CSV")
    p.add_argument("bank")
    p.set_defaults(func=cmd_validate_bank)

    p = sub.add_parser("simulate", help="run a simulation from a JSON config (or a manifest)")
    p.add_argument("config")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=_positive_int, default=1, help="examinees simulated concurrently")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("plot", help="draw an SVG chart")
    charts = p.add_subparsers(dest="chart", required=True, parser_class=_Parser)
    c = charts.add_parser("item-curve", help="characteristic and/or information curve of one item")
    c.add_argument("--bank", required=True)
    c.add_argument("--item", type=int, required=True)
    c.add_argument("--type", choices=("icc", "iic", "both"), default="both")
    c.add_argument("--out", required=True)
    c = charts.add_parser("test-progress", help="one examinee's estimates and measurements")
    c.add_argument("--result", required=True, help="simulation output directory")
    c.add_argument("--examinee", type=int, default=0)
    for flag in plot.PROGRESS_TRACES:
        c.add_argument(f"--{flag}", action="store_true")
    c.add_argument("--true-theta", action="store_true", help="draw the true proficiency")
    c.add_argument("--all", action="store_true", help="all traces and the true proficiency")
    c.add_argument("--out", required=True)
    c = charts.add_parser("item-exposure", help="exposure rates of a bank")
    c.add_argument("--result", help="simulation output directory")
    c.add_argument("--bank", help="bank CSV with an r column")
    c.add_argument("--par", choices=("a", "b", "c", "d"))
    c.add_argument("--style", choices=("bar", "line"), default="bar")
    c.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        return args.func(args)
    except (UsageError, ConfigError, bank_mod.ItemBankError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
