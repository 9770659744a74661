import sys
import argparse
from pathlib import Path
from typing import List, Optional
from .commands import analyze, build_lexicon, detect, render
from .config import logger, load_config, set_verbosity, PipelineConfig
from .utils.errors import SkillweaverError
from .version import __version__

description = """
Skillweaver mines soft skills from job advertisements and measures what they are worth.

  build-lexicon   clean, score, filter and cluster crowd-sourced skill phrases
  detect          find skill clusters in every job ad
  analyze         salary rewards, salary bands, female-share regression, stereotype tables
  render          pretty-print any report

Settings come from a dotenv-style --config file (REPLICATES=1000, CORPUS=train.csv, ...);
command-line flags win over the file.
"""

SUBCOMMANDS = (build_lexicon, detect, analyze, render)


def _common_arguments() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="dotenv-style config file")
    common.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    common.add_argument("--corpus", type=Path, help="job-ad CSV")
    common.add_argument("--corpus-format", dest="corpus_format", choices=("canonical", "adzuna"))
    common.add_argument("--output-dir", dest="output_dir", type=Path)
    common.add_argument("--stopwords", type=Path)
    common.add_argument("--seed", type=int)
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_arguments()
    parser = argparse.ArgumentParser(
        prog="skillweaver",
        description=description,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in SUBCOMMANDS:
        module.register(_Subparsers(subparsers, common))
    return parser


class _Subparsers:
    """Adds the common flags to every subcommand parser."""

    def __init__(self, subparsers, common: argparse.ArgumentParser):
        self.subparsers = subparsers
        self.common = common

    def add_parser(self, name: str, **kwargs) -> argparse.ArgumentParser:
        return self.subparsers.add_parser(name, parents=[self.common], **kwargs)


def config_from_args(args: argparse.Namespace) -> PipelineConfig:
    overrides = {field: getattr(args, field, None) for field in PipelineConfig.model_fields}
    return load_config(args.config, **overrides)


def main(argv: Optional[List[str]] = None) -> int:
    """Run one subcommand; returns 0 on success, 1 on validation errors and 2 on I/O errors."""
    args = build_parser().parse_args(argv)
    set_verbosity(args.verbose)
    try:
        config = config_from_args(args)
        args.handler(config, args)
    except SkillweaverError as e:
        logger.error(f"{args.command}: {e.message}")
        return e.exit_code
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return 2
    return 0


def start_app():
    sys.exit(main())


if __name__ == "__main__":
    start_app()
