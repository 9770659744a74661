from dataclasses import dataclass
from typing import Optional, Tuple
from pydantic import BaseModel, ConfigDict, Field


@dataclass(frozen=True)
class MatchedGroup:
    skill: int
    category: str
    title_key: str
    with_salaries: Tuple[float, ...]
    without_salaries: Tuple[float, ...]

    @property
    def count_with(self) -> int:
        return len(self.with_salaries)

    @property
    def count_without(self) -> int:
        return len(self.without_salaries)

    @property
    def weight(self) -> int:
        return min(self.count_with, self.count_without)


def stars(p_value: Optional[float]) -> str:
    if p_value is None:
        return ""
    if p_value <= 0.01:
        return "**"
    if p_value <= 0.05:
        return "*"
    return ""


@dataclass(frozen=True)
class RewardResult:
    skill: int
    r_s: float
    count: int
    p_value: Optional[float] = None
    label: Optional[str] = None

    @property
    def significance(self) -> str:
        return stars(self.p_value)


class PermutationConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    replicates: int = Field(1000, ge=1)
    seed: int = 0
    alpha: float = 0.05


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p: float
    degenerate: bool = False


@dataclass(frozen=True)
class SalaryBandSummary:
    band: Tuple[float, float]
    n_ads: int
    mean_skills: Optional[float]
    ci_low: Optional[float]
    ci_high: Optional[float]

    @property
    def empty(self) -> bool:
        return self.n_ads == 0
