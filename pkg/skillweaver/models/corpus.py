from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, Optional, Tuple
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

REQUIRED_STOPWORDS = frozenset({"the", "a", "an", "of", "to", "in", "and", "with"})


class JobAd(BaseModel):
    """One job advertisement. Salary bounds are currency units per year."""

    model_config = ConfigDict(frozen=True)

    id: str
    title: str
    description: str
    category: Optional[str] = None
    salary_low: Optional[float] = None
    salary_high: Optional[float] = None
    extras: Dict[str, str] = {}

    @field_validator("description")
    @classmethod
    def description_not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("description is empty")
        return value

    @model_validator(mode="after")
    def salary_range_is_valid(self):
        low, high = self.salary_low, self.salary_high
        if (low is None) != (high is None):
            raise ValueError("salary_low and salary_high must be given together")
        if low is not None:
            if low <= 0 or high <= 0:
                raise ValueError("salary bounds must be positive")
            if low > high:
                raise ValueError("salary_low exceeds salary_high")
        return self

    @property
    def has_salary(self) -> bool:
        return self.salary_low is not None


@dataclass(frozen=True)
class TokenSequence:
    tokens: Tuple[str, ...]
    offsets: Tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[str]:
        return iter(self.tokens)

    def __getitem__(self, index):
        return self.tokens[index]


@dataclass(frozen=True)
class NormalizedTitle:
    """Sorted non-stopword title tokens, space joined."""

    key: str

    @property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(self.key.split(" ")) if self.key else ()


@dataclass(frozen=True)
class StopwordList:
    words: FrozenSet[str]

    def __post_init__(self):
        if not self.words:
            raise ValueError("stopword list is empty")
        missing = REQUIRED_STOPWORDS - self.words
        if missing:
            raise ValueError(f"stopword list lacks {', '.join(sorted(missing))}")

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def __len__(self) -> int:
        return len(self.words)


@dataclass
class LoadReport:
    accepted: int = 0
    rejected: int = 0
    missing_salary: int = 0
    missing_category: int = 0
    reasons: Counter = field(default_factory=Counter)

    def reject(self, reason: str) -> None:
        self.rejected += 1
        self.reasons[reason] += 1
