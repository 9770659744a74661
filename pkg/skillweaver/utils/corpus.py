import re
import math
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union
import pandas as pd
from pydantic import ValidationError
from ..config import logger, STOPWORDS_FILE
from ..models import JobAd, LoadReport, NormalizedTitle, StopwordList, TokenSequence
from .errors import DuplicateAdError, EmptyTitleError, InputFileError, NoSalaryError, SchemaError

CANONICAL_COLUMNS = ["Id", "Title", "FullDescription", "Category", "SalaryMin", "SalaryMax"]
ADZUNA_COLUMNS = ["Id", "Title", "FullDescription", "Category", "SalaryRaw", "SalaryNormalized"]
FORMATS = {"canonical": CANONICAL_COLUMNS, "adzuna": ADZUNA_COLUMNS}

TOKEN_RE = re.compile(r"[^\W_]+(?:['’][^\W_]+)*")
NUMBER = r"(\d+(?:,\d{3})*(?:\.\d+)?)\s*([kK])?"
RANGE_RE = re.compile(NUMBER + r"\s*(?:-|–|—|to)\s*\D{0,3}?" + NUMBER)
SINGLE_RE = re.compile(NUMBER)

T = TypeVar("T")

##############################################################################################
###                                       Text Helpers                                     ###
##############################################################################################

def tokenize(text: str) -> TokenSequence:
    """Split text into case-folded word tokens with the offset of each token's first character.

    Tokens are runs of Unicode letters and digits. Hyphens, underscores and
    punctuation separate tokens; apostrophes inside a word are kept ("don't" stays
    one token).
    """
    tokens = []
    offsets = []
    for match in TOKEN_RE.finditer(text or ""):
        tokens.append(match.group().casefold().replace("’", "'"))
        offsets.append(match.start())
    return TokenSequence(tuple(tokens), tuple(offsets))


def read_word_list(path: Union[str, Path]) -> List[str]:
    """One entry per line, '#' comments and blank lines skipped, case-folded."""
    path = Path(path)
    if not path.is_file():
        raise InputFileError(path)
    words = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            entry = line.split("#", 1)[0].strip().casefold()
            if entry:
                words.append(entry)
    return words


def load_stopwords(path: Optional[Union[str, Path]] = None) -> StopwordList:
    words = read_word_list(path or STOPWORDS_FILE)
    return StopwordList(frozenset(words))


def normalize_title(title: str, stopwords: StopwordList) -> NormalizedTitle:
    """Order- and stopword-insensitive title key used to match ads.

    Raises:
        EmptyTitleError when nothing but stopwords remains
    """
    tokens = sorted(token for token in tokenize(title).tokens if token not in stopwords)
    if not tokens:
        raise EmptyTitleError(title)
    return NormalizedTitle(" ".join(tokens))

##############################################################################################
###                                         Salaries                                       ###
##############################################################################################

def _to_number(digits: str, thousands: Optional[str]) -> float:
    value = float(digits.replace(",", ""))
    return value * 1000 if thousands else value


def parse_salary_range(raw: Optional[str]) -> Optional[Tuple[float, float]]:
    """Parse "20000-30000", "£20,000 - £30,000 per annum", "25k" or "25000"."""
    if raw is None:
        return None
    text = str(raw).strip()
    if not text:
        return None
    match = RANGE_RE.search(text)
    if match:
        low = _to_number(match.group(1), match.group(2) or match.group(4))
        high = _to_number(match.group(3), match.group(4))
    else:
        match = SINGLE_RE.search(text)
        if not match:
            return None
        low = high = _to_number(match.group(1), match.group(2))
    if low <= 0 or high <= 0 or low > high or not (math.isfinite(low) and math.isfinite(high)):
        return None
    return low, high


def _parse_float(raw: str) -> Optional[float]:
    try:
        value = float(str(raw).replace(",", "").strip())
    except ValueError:
        return None
    return value if math.isfinite(value) and value > 0 else None


def _canonical_salary(row: Dict[str, str]) -> Optional[Tuple[float, float]]:
    """SalaryMin/SalaryMax as a range.

    A lone bound becomes a degenerate range; free text in SalaryMin (with SalaryMax
    empty) goes through parse_salary_range.
    """
    low = _parse_float(row["SalaryMin"])
    high = _parse_float(row["SalaryMax"])
    if low is None and high is None:
        return parse_salary_range(row["SalaryMin"])
    if low is None or high is None:
        if str(row["SalaryMin" if low is None else "SalaryMax"]).strip():
            return None
        bound = low if high is None else high
        return bound, bound
    if low > high:
        return None
    return low, high


def _adzuna_salary(row: Dict[str, str]) -> Optional[Tuple[float, float]]:
    """Adzuna ships a free-text SalaryRaw and an annualised SalaryNormalized.

    The raw range is used when it is annual, i.e. when it brackets the normalised
    value; otherwise (hourly or daily rates, unparseable text) the normalised value
    becomes a degenerate range.
    """
    normalized = _parse_float(row["SalaryNormalized"])
    parsed = parse_salary_range(row["SalaryRaw"])
    if parsed is not None and (normalized is None or parsed[0] <= normalized <= parsed[1]):
        return parsed
    if normalized is not None:
        return normalized, normalized
    return None


def salary_point(ad: JobAd) -> float:
    """Midpoint of the advertised salary range.

    Raises:
        NoSalaryError when the ad carries no salary
    """
    if not ad.has_salary:
        raise NoSalaryError(ad.id)
    return (ad.salary_low + ad.salary_high) / 2

##############################################################################################
###                                      Loading & Saving                                  ###
##############################################################################################

def read_table(path: Union[str, Path], required: Sequence[str], sep: str = ",", comment: Optional[str] = None) -> pd.DataFrame:
    """Read a UTF-8 CSV or TSV with every cell as a string; an empty file gives an empty frame.

    Raises:
        InputFileError when the file is missing or not UTF-8, SchemaError when it
        cannot be parsed or lacks a required column
    """
    path = Path(path)
    if not path.is_file():
        raise InputFileError(path)
    try:
        frame = pd.read_csv(path, sep=sep, dtype=str, keep_default_na=False, comment=comment, encoding="utf-8")
    except pd.errors.EmptyDataError:
        return pd.DataFrame(columns=list(required), dtype=str)
    except pd.errors.ParserError as e:
        raise SchemaError(path, reason=f"malformed table ({str(e).strip()})")
    except UnicodeDecodeError as e:
        raise InputFileError(path, f"not UTF-8 ({e.reason})")
    frame.columns = [str(column).strip() for column in frame.columns]
    missing = [column for column in required if column not in frame.columns]
    if missing:
        raise SchemaError(path, missing)
    return frame


def parse_cell(path: Union[str, Path], row_number: int, column: str, raw: str, convert: Callable[[str], T]) -> T:
    """Convert one table cell, reporting the file, row and column when the value is malformed.

    Raises:
        SchemaError on a value `convert` rejects
    """
    try:
        return convert(raw.strip())
    except ValueError:
        raise SchemaError(path, reason=f"row {row_number}: invalid {column} '{raw}'")


def load_ads(path: Union[str, Path], format: str = "canonical") -> Tuple[List[JobAd], LoadReport]:
    """Load a job-advertisement CSV.

    Parameters:
        path: UTF-8 CSV with a header row.
        format: "canonical" (Id, Title, FullDescription, Category, SalaryMin, SalaryMax)
            or "adzuna" (Id, Title, FullDescription, Category, SalaryRaw, SalaryNormalized, ...).

    Returns:
        The accepted ads and a LoadReport. Columns outside the schema are kept in
        JobAd.extras.

    Raises:
        InputFileError when the file is missing, SchemaError when a column is missing
    """
    path = Path(path)
    if format not in FORMATS:
        raise ValueError(f"Unknown corpus format '{format}'")
    required = FORMATS[format]
    frame = read_table(path, required)

    salary_of = _canonical_salary if format == "canonical" else _adzuna_salary
    extra_columns = [column for column in frame.columns if column not in required]
    report = LoadReport()
    ads = []
    for row in frame.to_dict("records"):
        ad_id = row["Id"].strip()
        if not ad_id:
            report.reject("missing id")
            continue
        if not row["FullDescription"].strip():
            report.reject("empty description")
            continue
        salary = salary_of(row)
        if salary is None:
            report.missing_salary += 1
        category = row["Category"].strip() or None
        if category is None:
            report.missing_category += 1
        try:
            ad = JobAd(
                id=ad_id,
                title=row["Title"],
                description=row["FullDescription"],
                category=category,
                salary_low=salary[0] if salary else None,
                salary_high=salary[1] if salary else None,
                extras={column: row[column] for column in extra_columns},
            )
        except ValidationError as e:
            report.reject(e.errors()[0]["msg"])
            continue
        ads.append(ad)
        report.accepted += 1
    logger.info(f"Loaded {report.accepted} ads from {path.name} ({report.rejected} rejected, {report.missing_salary} without salary)")
    return ads, report


def _format_salary(value: Optional[float]) -> str:
    return "" if value is None else repr(float(value))


def save_ads(ads: Iterable[JobAd], path: Union[str, Path]) -> None:
    """Write ads in the canonical CSV layout; extras become additional columns."""
    ads = list(ads)
    extra_columns = sorted({key for ad in ads for key in ad.extras})
    rows = []
    for ad in ads:
        row = {
            "Id": ad.id,
            "Title": ad.title,
            "FullDescription": ad.description,
            "Category": ad.category or "",
            "SalaryMin": _format_salary(ad.salary_low),
            "SalaryMax": _format_salary(ad.salary_high),
        }
        row.update({column: ad.extras.get(column, "") for column in extra_columns})
        rows.append(row)
    frame = pd.DataFrame(rows, columns=CANONICAL_COLUMNS + extra_columns, dtype=str)
    frame.to_csv(path, index=False, encoding="utf-8")


def check_unique_ids(ads: Iterable[JobAd]) -> None:
    seen = set()
    for ad in ads:
        if ad.id in seen:
            raise DuplicateAdError(ad.id)
        seen.add(ad.id)
