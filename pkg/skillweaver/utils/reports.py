import json
import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Union
import pandas as pd
from ksuid import ksuid
from pydantic import BaseModel, Field
from ..config import logger, PipelineConfig
from ..version import __version__
from .errors import InputFileError, SchemaError


def file_digest(path: Union[str, Path]) -> str:
    sha = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            sha.update(block)
    return sha.hexdigest()


class RunManifest(BaseModel):
    """What one subcommand read and wrote, with digests so runs can be compared."""

    run_id: str = Field(default_factory=lambda: str(ksuid()))
    command: str
    version: str = __version__
    config_digest: str
    started: str = Field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished: Optional[str] = None
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @classmethod
    def start(cls, command: str, config: PipelineConfig) -> "RunManifest":
        return cls(command=command, config_digest=config.digest())

    def header(self) -> str:
        """Comment lines stamped at the top of every TSV report."""
        return (
            f"# skillweaver {self.version} {self.command}\n"
            f"# config_sha256 {self.config_digest}\n"
        )

    def add_input(self, path: Optional[Union[str, Path]]) -> None:
        if path is not None and Path(path).is_file():
            self.inputs[str(path)] = file_digest(path)

    def add_output(self, path: Union[str, Path]) -> None:
        self.outputs[str(path)] = file_digest(path)

    def write(self, output_dir: Union[str, Path]) -> Path:
        self.finished = datetime.now(timezone.utc).isoformat()
        path = Path(output_dir) / f"manifest-{self.command}.json"
        with open(path, "w", encoding="utf-8") as f:
            f.write(self.model_dump_json(indent=2))
        logger.info(f"Wrote run manifest {path} (run {self.run_id})")
        return path


def write_tsv(rows: Iterable[Mapping[str, object]], path: Union[str, Path], manifest: RunManifest,
              columns: Optional[List[str]] = None) -> Path:
    frame = pd.DataFrame(list(rows), columns=columns)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(manifest.header())
        frame.to_csv(f, sep="\t", index=False, na_rep="NA", float_format="%.6g")
    manifest.add_output(path)
    logger.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_json(payload: Mapping[str, object], path: Union[str, Path], manifest: RunManifest) -> Path:
    path = Path(path)
    document = {"config_sha256": manifest.config_digest, **payload}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, default=str)
    manifest.add_output(path)
    logger.info(f"Wrote {path}")
    return path


def read_report(path: Union[str, Path]) -> Union[pd.DataFrame, dict]:
    """Load a TSV or JSON report; TSV comment headers are skipped.

    Raises:
        InputFileError when the report is not UTF-8, SchemaError when it cannot be parsed
    """
    path = Path(path)
    try:
        if path.suffix == ".json":
            with open(path, encoding="utf-8") as f:
                return json.load(f)
        return pd.read_csv(path, sep="\t", comment="#", encoding="utf-8")
    except UnicodeDecodeError as e:
        raise InputFileError(path, f"not UTF-8 ({e.reason})")
    except (json.JSONDecodeError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise SchemaError(path, reason=f"malformed report ({str(e).strip()})")
