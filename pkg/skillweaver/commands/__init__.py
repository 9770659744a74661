import time
from contextlib import contextmanager
from pathlib import Path
from ..config import logger, PipelineConfig
from ..utils.errors import ConfigurationError, MissingPrerequisiteError, SkillweaverError

# Files each subcommand leaves in the output directory for the next one.
LEXICON_FILE = "lexicon.tsv"
CLUSTERS_FILE = "clusters.tsv"
DETECTIONS_FILE = "detections.tsv"


@contextmanager
def stage(name: str):
    """Log a pipeline stage's timing; errors are re-raised after naming the stage."""
    logger.info(f"[{name}] started")
    started = time.time()
    try:
        yield
    except SkillweaverError:
        logger.error(f"[{name}] failed")
        raise
    logger.info(f"[{name}] finished in {time.time() - started:.2f}s")


def require_input(config: PipelineConfig, field: str, command: str) -> Path:
    value = getattr(config, field)
    if value is None:
        raise ConfigurationError(f"'{command}' needs --{field.replace('_', '-')} (or {field.upper()} in the config file)")
    return value


def require_output(config: PipelineConfig, name: str, command: str) -> Path:
    path = Path(config.output_dir) / name
    if not path.is_file():
        raise MissingPrerequisiteError(path, command)
    return path
