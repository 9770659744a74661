from .corpus import JobAd, LoadReport, NormalizedTitle, StopwordList, TokenSequence
from .lexicon import AnnotationRecord, FilterReport, RawSkillSubmission, SkillPhrase, Snippet, Vote
from .clusters import (
    ClusterDirective,
    ClusterSet,
    EmbeddingTable,
    LabelDirective,
    MergeDirective,
    MoveDirective,
    PhraseVector,
    SkillCluster,
    SplitDirective,
)
from .detection import AdSkillSet, DetectionSummary, DistinctivenessRow, MatchOccurrence, SkillPattern
from .stats import MatchedGroup, PermutationConfig, RewardResult, SalaryBandSummary, TTestResult, stars
from .gender import (
    CategoryGenderMap,
    CategoryShare,
    DominanceSplit,
    RegressionResult,
    StereotypeAverage,
    StereotypeEntry,
    StereotypeMap,
    StereotypePrevalence,
    StereotypeTable,
)
