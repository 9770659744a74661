import json
from pathlib import Path
import pandas as pd
from ..config import PipelineConfig
from ..utils.errors import InputFileError
from ..utils.reports import read_report

COMMAND = "render"


def register(subparsers) -> None:
    parser = subparsers.add_parser(COMMAND, help="pretty-print a TSV or JSON report")
    parser.add_argument("report", type=Path)
    parser.add_argument("--rows", type=int, default=50, help="maximum rows to show")
    parser.set_defaults(handler=lambda config, args: run(config, args.report, args.rows))


def render(path: Path, rows: int = 50) -> str:
    path = Path(path)
    if not path.is_file():
        raise InputFileError(path)
    report = read_report(path)
    if isinstance(report, pd.DataFrame):
        with pd.option_context("display.max_rows", rows, "display.width", 160, "display.max_columns", None):
            return report.to_string(index=False, max_rows=rows, float_format=lambda v: f"{v:.3f}")
    return json.dumps(report, indent=2)


def run(config: PipelineConfig, report: Path, rows: int = 50) -> None:
    print(render(report, rows))
