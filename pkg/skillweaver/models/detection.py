from dataclasses import dataclass
from typing import FrozenSet, Optional, Tuple


@dataclass(frozen=True)
class SkillPattern:
    cluster_id: int
    phrase: str
    tokens: Tuple[str, ...]
    keep_competence: bool


@dataclass(frozen=True)
class MatchOccurrence:
    ad_id: str
    cluster_id: int
    phrase: str
    span: Tuple[int, int]


@dataclass(frozen=True)
class AdSkillSet:
    ad_id: str
    clusters: FrozenSet[int]

    def __len__(self) -> int:
        return len(self.clusters)

    def __contains__(self, cluster_id: int) -> bool:
        return cluster_id in self.clusters


@dataclass(frozen=True)
class DistinctivenessRow:
    cluster_id: int
    category: str
    pct_in_category: float
    pct_overall: float
    delta: float
    label: Optional[str] = None


@dataclass(frozen=True)
class DetectionSummary:
    ads: int
    with_any: int
    with_three: int
    mean_clusters: float

    @property
    def coverage(self) -> Optional[float]:
        return self.with_any / self.ads if self.ads else None

    @property
    def coverage_three(self) -> Optional[float]:
        return self.with_three / self.ads if self.ads else None
