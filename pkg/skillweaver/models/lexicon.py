from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional
from pydantic import BaseModel, ConfigDict, Field, field_validator


class Vote(Enum):
    candidate = "Candidate"
    company = "Company"
    other = "Other"

    @classmethod
    def parse(cls, raw: str) -> "Vote":
        text = raw.strip().lower()
        if text.startswith("candidate"):
            return cls.candidate
        if text.startswith("company"):
            return cls.company
        if text == "other":
            return cls.other
        raise ValueError(f"unknown vote '{raw}'")


class RawSkillSubmission(BaseModel):
    model_config = ConfigDict(frozen=True)

    text: str
    source_ad: str

    @field_validator("text")
    @classmethod
    def not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("submission text is empty")
        return value


@dataclass(frozen=True)
class SkillPhrase:
    phrase: str
    token_count: int
    competence_terms_removed: bool = False
    confidence: Optional[float] = None
    needs_review: bool = False
    keep_competence: Optional[bool] = None
    cluster_id: Optional[int] = None

    @property
    def scored(self) -> bool:
        return self.confidence is not None

    def with_confidence(self, confidence: float) -> "SkillPhrase":
        return replace(self, confidence=confidence)


class AnnotationRecord(BaseModel):
    """One crowd vote on one snippet; trust is the worker's platform accuracy."""

    model_config = ConfigDict(frozen=True)

    skill: str
    snippet_id: str
    worker_id: str
    vote: Vote
    trust: float = Field(gt=0.0, le=1.0)


@dataclass(frozen=True)
class Snippet:
    skill: str
    ad_id: str
    window: str
    start_token: int


@dataclass
class FilterReport:
    retained: List[SkillPhrase]
    scored: int = 0
    scored_retained: int = 0
    unscored_short: int = 0
    discarded_by_length: Dict[int, float] = field(default_factory=dict)

    @property
    def retention(self) -> float:
        return self.scored_retained / self.scored if self.scored else 0.0
