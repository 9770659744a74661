from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union
import numpy as np


@dataclass
class EmbeddingTable:
    """Word vectors as one float32 matrix; `index` maps a token to its row."""

    dimension: int
    index: Dict[str, int]
    matrix: np.ndarray
    duplicates: int = 0
    skipped: int = 0

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __len__(self) -> int:
        return len(self.index)

    def __getitem__(self, token: str) -> np.ndarray:
        return self.matrix[self.index[token]]

    def get(self, token: str) -> Optional[np.ndarray]:
        row = self.index.get(token)
        return None if row is None else self.matrix[row]


@dataclass(frozen=True)
class PhraseVector:
    phrase: str
    vector: np.ndarray
    covered_tokens: int


@dataclass(frozen=True)
class SkillCluster:
    cluster_id: int
    members: Tuple[str, ...]
    label: str


@dataclass
class ClusterSet:
    clusters: List[SkillCluster]
    linkage_heights: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.clusters)

    def phrases(self) -> List[str]:
        return [phrase for cluster in self.clusters for phrase in cluster.members]

    def by_id(self) -> Dict[int, SkillCluster]:
        return {cluster.cluster_id: cluster for cluster in self.clusters}

    def labels(self) -> Dict[int, str]:
        return {cluster.cluster_id: cluster.label for cluster in self.clusters}

    def membership(self) -> Dict[str, int]:
        return {phrase: cluster.cluster_id for cluster in self.clusters for phrase in cluster.members}


@dataclass(frozen=True)
class SplitDirective:
    cluster_id: int
    parts: Tuple[Tuple[str, ...], ...]


@dataclass(frozen=True)
class MergeDirective:
    cluster_ids: Tuple[int, ...]


@dataclass(frozen=True)
class MoveDirective:
    phrase: str
    target: int


@dataclass(frozen=True)
class LabelDirective:
    cluster_id: int
    name: str


ClusterDirective = Union[SplitDirective, MergeDirective, MoveDirective, LabelDirective]
