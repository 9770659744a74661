import os
import json
import hashlib
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple
from termcolor import colored
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from .utils.errors import ConfigurationError, InputFileError


##############################################################################################
###                                  Logging Configuration                                 ###
##############################################################################################

class ColoredConsoleHandler(logging.StreamHandler):
    COLORS = {
        'DEBUG': 'blue',
        'INFO': 'green',
        'WARNING': 'yellow',
        'ERROR': 'red',
        'CRITICAL': 'magenta',
    }

    def emit(self, record):
        try:
            log_message = self.format(record)
            color = self.COLORS.get(record.levelname, 'white')
            self.stream.write(colored(log_message, color) + self.terminator)
            self.flush()
        except Exception:
            self.handleError(record)

# Create a logger
logger = logging.getLogger("skillweaver")
logger.setLevel(logging.DEBUG)
logger.propagate = False

# Create the colored console handler
console_handler = ColoredConsoleHandler()
console_handler.setLevel(os.getenv("SKILLWEAVER_LOG_LEVEL", "INFO").upper())

formatter = logging.Formatter('%(asctime)s - %(message)s', datefmt='%Y-%m-%d %H:%M:%S')
console_handler.setFormatter(formatter)

# Add the handlers to the logger
if not logger.handlers:
    logger.addHandler(console_handler)


def set_verbosity(verbose: bool) -> None:
    console_handler.setLevel(logging.DEBUG if verbose else logging.INFO)

##############################################################################################
###                                   Shipped Data Files                                   ###
##############################################################################################

DATA_DIR = Path(__file__).resolve().parent / "data"
STOPWORDS_FILE = DATA_DIR / "stopwords.txt"
ADJECTIVES_FILE = DATA_DIR / "superfluous_adjectives.txt"
COMPETENCE_TERMS_FILE = DATA_DIR / "competence_terms.txt"
GENDER_MAP_FILE = DATA_DIR / "gender_map.tsv"
STEREOTYPE_MAP_FILE = DATA_DIR / "stereotype_map.tsv"

DEFAULT_BANDS: List[Tuple[float, float]] = [
    (0.0, 20000.0),
    (20000.0, 40000.0),
    (40000.0, 60000.0),
    (60000.0, 80000.0),
]

##############################################################################################
###                                  Pipeline Configuration                                ###
##############################################################################################

class PipelineConfig(BaseModel):
    """Every path, threshold and seed one pipeline run depends on.

    Values come from, in increasing precedence: the defaults below, a dotenv-style
    config file (``REPLICATES=500``), and command-line flags.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    # inputs
    corpus: Optional[Path] = None
    corpus_format: str = "canonical"
    submissions: Optional[Path] = None
    annotations: Optional[Path] = None
    embeddings: Optional[Path] = None
    whitelist: Optional[Path] = None
    lexicon_edits: Optional[Path] = None
    cluster_edits: Optional[Path] = None
    stopwords: Path = STOPWORDS_FILE
    competence_terms: Path = COMPETENCE_TERMS_FILE
    gender_map: Path = GENDER_MAP_FILE
    stereotype_map: Path = STEREOTYPE_MAP_FILE
    output_dir: Path = Path("output")

    # thresholds
    confidence: float = Field(0.7, ge=0.0, le=1.0)
    max_gap: int = Field(2, ge=0)
    min_title_count: int = Field(2, ge=1)
    min_count: int = Field(50, ge=0)
    min_skills: int = Field(3, ge=0)
    female_threshold: float = Field(60.0, ge=0.0, le=100.0)
    male_threshold: float = Field(40.0, ge=0.0, le=100.0)
    regression_alpha: float = Field(0.01, gt=0.0, lt=1.0)
    cluster_target: int = Field(190, ge=1)
    snippets_per_skill: int = Field(10, ge=1)

    # resampling
    replicates: int = Field(1000, ge=1)
    bootstrap_replicates: int = Field(1000, ge=1)
    bands: List[Tuple[float, float]] = Field(default_factory=lambda: list(DEFAULT_BANDS))
    seed: int = 20190101

    @field_validator("corpus_format")
    @classmethod
    def known_format(cls, value: str) -> str:
        if value not in ("canonical", "adzuna"):
            raise ValueError(f"unknown corpus format '{value}' (expected canonical or adzuna)")
        return value

    @field_validator("bands", mode="before")
    @classmethod
    def parse_bands(cls, value):
        if isinstance(value, str):
            return parse_bands(value)
        return value

    @field_validator("bands")
    @classmethod
    def ordered_bands(cls, value: List[Tuple[float, float]]) -> List[Tuple[float, float]]:
        if not value:
            raise ValueError("at least one salary band is required")
        previous_high = None
        for low, high in value:
            if low >= high:
                raise ValueError(f"salary band ({low}, {high}] is empty")
            if previous_high is not None and low < previous_high:
                raise ValueError(f"salary band ({low}, {high}] overlaps the previous band")
            previous_high = high
        return value

    @model_validator(mode="after")
    def split_is_ordered(self):
        if self.male_threshold >= self.female_threshold:
            raise ValueError("male_threshold must be below female_threshold")
        return self

    def digest(self) -> str:
        """SHA-256 over the canonical JSON dump; stamped into every report."""
        payload = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def parse_bands(text: str) -> List[Tuple[float, float]]:
    """Parse ``"0-20000,20000-40000"`` into ``[(0, 20000), (20000, 40000)]``."""
    bands = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        low, sep, high = chunk.partition("-")
        if not sep:
            raise ValueError(f"salary band '{chunk}' is not of the form low-high")
        bands.append((float(low), float(high)))
    return bands


def read_config_file(path: Optional[Path]) -> Dict[str, str]:
    """Read a dotenv-style config file into lower-cased field names."""
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise InputFileError(path, "config file not found")
    values = {key.lower(): value for key, value in dotenv_values(path).items() if value is not None}
    unknown = sorted(set(values) - set(PipelineConfig.model_fields))
    if unknown:
        raise ConfigurationError(f"Unknown config keys in {path}: {', '.join(unknown)}")
    return values


def load_config(config_file: Optional[Path] = None, **overrides) -> PipelineConfig:
    """Build a PipelineConfig with precedence flag > file > default.

    Overrides whose value is None are treated as "flag not given".
    """
    values = read_config_file(config_file)
    values.update({key: value for key, value in overrides.items() if value is not None})
    try:
        config = PipelineConfig(**values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigurationError(f"Invalid configuration: {problems}")
    logger.debug(f"Configuration digest {config.digest()[:12]}")
    return config
