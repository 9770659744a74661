from dataclasses import dataclass, field
from typing import Dict, List, Optional


@dataclass(frozen=True)
class CategoryShare:
    ons_category: Optional[str]
    female_share: Optional[float]

    @property
    def available(self) -> bool:
        return self.female_share is not None


@dataclass
class CategoryGenderMap:
    rows: Dict[str, CategoryShare]

    def share(self, category: str) -> Optional[float]:
        return self.rows[category].female_share


@dataclass(frozen=True)
class DominanceSplit:
    female_threshold: float = 60.0
    male_threshold: float = 40.0

    def side(self, share: Optional[float]) -> Optional[str]:
        if share is None:
            return None
        if share >= self.female_threshold:
            return "female"
        if share <= self.male_threshold:
            return "male"
        return None


@dataclass
class RegressionResult:
    cluster_ids: List[int]
    coefficients: Dict[int, float]
    intercept: float
    r_squared: float
    p_values: Dict[int, Optional[float]]
    counts: Dict[int, int]
    n_observations: int
    rank_deficient: bool = False
    flagged: List[int] = field(default_factory=list)
    dropped: List[int] = field(default_factory=list)


@dataclass(frozen=True)
class StereotypeEntry:
    trait: str
    gender: str
    cluster_id: int
    label: str


@dataclass
class StereotypeMap:
    entries: List[StereotypeEntry]

    def by_gender(self, gender: str) -> List[StereotypeEntry]:
        return [entry for entry in self.entries if entry.gender == gender]


@dataclass(frozen=True)
class StereotypePrevalence:
    trait: str
    gender: str
    cluster_id: int
    label: str
    p_f: float
    p_m: float
    rel_diff: Optional[float]
    reward: Optional[float] = None
    stars: str = ""


@dataclass(frozen=True)
class StereotypeAverage:
    gender: str
    reward: Optional[float]
    p_f: float
    p_m: float
    rel_diff: Optional[float]


@dataclass
class StereotypeTable:
    rows: List[StereotypePrevalence]
    averages: Dict[str, StereotypeAverage]
    split: DominanceSplit
    n_female_ads: int
    n_male_ads: int
