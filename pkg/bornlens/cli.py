"""
Command-line entry point for BornLens.

    bornlens double-slit --config studies.json --set sigma=0.3 --seed 42
    bornlens gravity --set h=1.5 --out results/
    bornlens validate

Exit codes: 0 success, 1 study error, 2 configuration or usage error.
"""

import argparse
import logging
import sys
from typing import Any, List, Optional

from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .config import BornLensConfig, load_study_config, resolve_spec
from .exceptions import BornLensException, ConfigurationException
from .orchestrator import BornLensOrchestrator, RunResult
from .registry import StudyRegistry
from .validation import run_validation_suite

logger = logging.getLogger(__name__)

console = Console()
err_console = Console(stderr=True)

EXIT_OK = 0
EXIT_STUDY_ERROR = 1
EXIT_CONFIG_ERROR = 2


def _common_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--threads", type=int, default=None, help="Worker threads (0 = one per CPU)")
    parent.add_argument("--verbose", "-v", action="store_true", help="Debug logging")
    return parent


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="bornlens",
        description="BornLens: Nelson trajectories relaxing to the Born density",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Double slit with the default sigma grid
  bornlens double-slit --out results

  # One gravity altitude, fixed seed
  bornlens gravity --config studies.json --set h=1.5 --seed 42

  # Property suite
  bornlens validate
        """,
    )
    subparsers = parser.add_subparsers(dest="command", metavar="command")

    for verb in StudyRegistry.list_studies():
        study_class = StudyRegistry.get(verb)
        sub = subparsers.add_parser(verb, parents=[common], help=(study_class.__doc__ or verb).strip().splitlines()[0])
        sub.add_argument("--config", default=None, help="JSON document with one object per scenario")
        sub.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="Override a configuration key (repeatable)",
        )
        sub.add_argument("--out", default=None, help="Output directory")
        sub.add_argument("--seed", type=int, default=None, help="Master seed")

    subparsers.add_parser("validate", parents=[common], help="Run the property suite")
    return parser


def setup_logging(level: str):
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _settings(args: argparse.Namespace) -> BornLensConfig:
    config = BornLensConfig.from_env()
    if args.threads is not None:
        if args.threads < 0:
            raise ConfigurationException(f"--threads must be >= 0, got {args.threads}")
        config.threads = args.threads
    if args.verbose:
        config.verbose = True
        config.log_level = "DEBUG"
    if getattr(args, "out", None):
        config.output_dir = args.out
    return config


def _format(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.4g}"
    if isinstance(value, dict):
        return ", ".join(f"{k}: {_format(v)}" for k, v in value.items())
    return str(value)


def print_run_summary(result: RunResult):
    report = result.report
    table = Table(title=f"{report.scenario} (seed {report.master_seed})", box=box.ROUNDED)
    columns = []
    for point in report.points:
        for key in point:
            if key not in columns and key != "errors":
                columns.append(key)
    for key in columns:
        table.add_column(key, style="cyan" if key == columns[0] else "white")
    table.add_column("errors", style="red")
    for point in report.points:
        errors = point.get("errors") or {}
        table.add_row(*[_format(point.get(key)) for key in columns], str(len(errors)) if errors else "")
    console.print(table)
    console.print(f"Wrote {len(result.files) + 1} file(s); manifest at {result.manifest_path}")


def run_validate() -> int:
    results = run_validation_suite()
    table = Table(title="BornLens property suite", box=box.ROUNDED)
    table.add_column("Check", style="cyan", no_wrap=True)
    table.add_column("Result")
    table.add_column("Detail", style="white")
    for result in results:
        table.add_row(result.name, "[green]pass[/green]" if result.passed else "[red]FAIL[/red]", result.detail)
    console.print(table)
    return EXIT_OK if all(r.passed for r in results) else EXIT_STUDY_ERROR


def run_study(args: argparse.Namespace, config: BornLensConfig) -> int:
    try:
        document = load_study_config(args.config)
        spec = resolve_spec(args.command, document, args.overrides, seed=args.seed)
    except ConfigurationException as e:
        err_console.print(f"[red]Configuration error:[/red] {e}")
        return EXIT_CONFIG_ERROR

    orchestrator = BornLensOrchestrator(config)
    try:
        result = orchestrator.run(args.command, spec, output_dir=config.output_dir)
    except BornLensException as e:
        err_console.print(f"[red]Study error:[/red] {type(e).__name__}: {e}")
        return EXIT_STUDY_ERROR
    except OSError as e:
        err_console.print(f"[red]Could not write results:[/red] {e}")
        return EXIT_STUDY_ERROR
    print_run_summary(result)
    return EXIT_OK


def parse_and_dispatch(argv: Optional[List[str]] = None) -> int:
    """
    Parse argv, run the requested verb and return the exit code

    Args:
        argv: Arguments without the program name

    Returns:
        0 on success, 1 on study error, 2 on configuration or usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CONFIG_ERROR

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG_ERROR

    try:
        config = _settings(args)
    except ConfigurationException as e:
        err_console.print(f"[red]Configuration error:[/red] {e}")
        return EXIT_CONFIG_ERROR
    setup_logging(config.log_level)

    if args.command == "validate":
        return run_validate()
    return run_study(args, config)


def main():
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
