import time
from bisect import bisect_right
from collections import Counter, defaultdict
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union
from ..config import logger, COMPETENCE_TERMS_FILE
from ..models import (
    AdSkillSet,
    ClusterSet,
    DetectionSummary,
    DistinctivenessRow,
    JobAd,
    MatchOccurrence,
    SkillPattern,
    StopwordList,
    TokenSequence,
)
from .corpus import parse_cell, read_table, read_word_list, tokenize
from .errors import PatternError, UnknownCategoryError


def load_competence_terms(path: Optional[Union[str, Path]] = None) -> Set[str]:
    return set(read_word_list(path or COMPETENCE_TERMS_FILE))

##############################################################################################
###                                     Pattern Compilation                                ###
##############################################################################################

def _pattern_tokens(phrase: str, competence_terms: Set[str], stopwords: StopwordList, keep: Optional[bool]) -> Tuple[Tuple[str, ...], bool]:
    tokens = list(tokenize(phrase).tokens)
    stripped = [token for token in tokens if token not in competence_terms]
    if keep is None:
        # "communication skills" would otherwise match "communication technologies"
        keep = len(stripped) < len(tokens) and len([t for t in stripped if t not in stopwords]) == 1
    chosen = tokens if keep else stripped
    content = [token for token in chosen if token not in stopwords]
    return tuple(content or chosen), keep


def compile_patterns(clusters: ClusterSet, competence_terms: Iterable[str], stopwords: StopwordList,
                     keep_competence: Optional[Mapping[str, Optional[bool]]] = None) -> List[SkillPattern]:
    """One pattern per lexicon phrase, tagged with the phrase's cluster.

    Competence terms ("able", "skills", ...) are stripped unless the phrase is flagged
    to keep them; phrases without a flag keep them when stripping would leave a
    single content word. Stopwords are dropped from the pattern and skipped at match
    time, unless the pattern consists of nothing else.

    Raises:
        PatternError when a phrase is left without tokens
    """
    competence_terms = set(competence_terms)
    keep_competence = keep_competence or {}
    patterns = []
    seen = set()
    for cluster in clusters.clusters:
        for phrase in cluster.members:
            tokens, keep = _pattern_tokens(phrase, competence_terms, stopwords, keep_competence.get(phrase))
            if not tokens:
                raise PatternError(phrase)
            if (cluster.cluster_id, tokens) in seen:
                continue
            seen.add((cluster.cluster_id, tokens))
            patterns.append(SkillPattern(cluster_id=cluster.cluster_id, phrase=phrase, tokens=tokens, keep_competence=keep))
    logger.info(f"Compiled {len(patterns)} patterns for {len(clusters)} clusters")
    return patterns


class PatternIndex:
    """Patterns keyed by their first token so an ad is scanned once for all of them."""

    def __init__(self, patterns: Iterable[SkillPattern]):
        self.patterns = list(patterns)
        self.by_first: Dict[str, List[SkillPattern]] = defaultdict(list)
        for pattern in self.patterns:
            self.by_first[pattern.tokens[0]].append(pattern)

    def __len__(self) -> int:
        return len(self.patterns)

##############################################################################################
###                                          Matching                                      ###
##############################################################################################

def _complete(pattern: SkillPattern, k: int, position: int, positions: Dict[str, List[int]],
              content_before: List[int], max_gap: int, failed: Set[Tuple[int, int]]) -> Optional[int]:
    """End position of the first in-order completion of pattern.tokens[k:] after `position`."""
    if k == len(pattern.tokens):
        return position
    if (k, position) in failed:
        return None
    candidates = positions.get(pattern.tokens[k], [])
    for q in candidates[bisect_right(candidates, position):]:
        # non-stopwords strictly between the previous matched token and q
        if content_before[q] - content_before[position + 1] > max_gap:
            break
        end = _complete(pattern, k + 1, q, positions, content_before, max_gap, failed)
        if end is not None:
            return end
    failed.add((k, position))
    return None


def detect_in_ad(ad: Union[JobAd, TokenSequence], patterns: Union[PatternIndex, Sequence[SkillPattern]],
                 stopwords: StopwordList, max_gap: int = 2, ad_id: Optional[str] = None) -> Tuple[AdSkillSet, List[MatchOccurrence]]:
    """Find every skill cluster mentioned in one ad.

    A pattern matches when its tokens appear in order and at most `max_gap`
    non-stopword words (plus any number of stopwords) sit between consecutive
    pattern tokens. Word order is never relaxed and tokens are not lemmatized.
    One occurrence is recorded per starting position of each pattern.
    """
    if isinstance(ad, JobAd):
        ad_id = ad.id if ad_id is None else ad_id
        sequence = tokenize(ad.description)
    else:
        sequence = ad
    ad_id = ad_id or ""
    index = patterns if isinstance(patterns, PatternIndex) else PatternIndex(patterns)
    tokens = sequence.tokens

    positions: Dict[str, List[int]] = defaultdict(list)
    content_before = [0] * (len(tokens) + 1)
    for i, token in enumerate(tokens):
        positions[token].append(i)
        content_before[i + 1] = content_before[i] + (token not in stopwords)

    found = set()
    occurrences = []
    failures: Dict[SkillPattern, Set[Tuple[int, int]]] = defaultdict(set)
    for start, token in enumerate(tokens):
        for pattern in index.by_first.get(token, ()):
            end = _complete(pattern, 1, start, positions, content_before, max_gap, failures[pattern])
            if end is None:
                continue
            found.add(pattern.cluster_id)
            occurrences.append(MatchOccurrence(ad_id=ad_id, cluster_id=pattern.cluster_id, phrase=pattern.phrase, span=(start, end)))
    return AdSkillSet(ad_id=ad_id, clusters=frozenset(found)), occurrences


def detect_corpus(corpus: Iterable[JobAd], patterns: Union[PatternIndex, Sequence[SkillPattern]],
                  stopwords: StopwordList, max_gap: int = 2) -> Dict[str, AdSkillSet]:
    started = time.time()
    index = patterns if isinstance(patterns, PatternIndex) else PatternIndex(patterns)
    detections = {}
    for ad in corpus:
        skill_set, _ = detect_in_ad(ad, index, stopwords, max_gap)
        detections[ad.id] = skill_set
    summary = summarize_detections(detections)
    logger.info(
        f"Detected skills in {summary.with_any}/{summary.ads} ads "
        f"({summary.with_three} with at least 3) in {time.time() - started:.2f}s"
    )
    return detections


def summarize_detections(detections: Mapping[str, AdSkillSet], min_skills: int = 3) -> DetectionSummary:
    sizes = [len(skill_set) for skill_set in detections.values()]
    return DetectionSummary(
        ads=len(sizes),
        with_any=sum(1 for size in sizes if size >= 1),
        with_three=sum(1 for size in sizes if size >= min_skills),
        mean_clusters=sum(sizes) / len(sizes) if sizes else 0.0,
    )

##############################################################################################
###                                      Distinctiveness                                   ###
##############################################################################################

def _percentages(ads: Sequence[JobAd], detections: Mapping[str, AdSkillSet]) -> Counter:
    counts = Counter()
    for ad in ads:
        skill_set = detections.get(ad.id)
        if skill_set is not None:
            counts.update(skill_set.clusters)
    return Counter({cluster_id: 100.0 * count / len(ads) for cluster_id, count in counts.items()})


def distinctiveness(detections: Mapping[str, AdSkillSet], corpus: Sequence[JobAd], category: str,
                    labels: Optional[Mapping[int, str]] = None) -> List[DistinctivenessRow]:
    """Per cluster: % of the category's ads mentioning it, % overall and the difference.

    Raises:
        UnknownCategoryError when no ad carries the category
    """
    in_category = [ad for ad in corpus if ad.category == category]
    if not in_category:
        raise UnknownCategoryError(category)
    overall = _percentages(corpus, detections)
    local = _percentages(in_category, detections)
    labels = labels or {}
    rows = [
        DistinctivenessRow(
            cluster_id=cluster_id,
            category=category,
            pct_in_category=local[cluster_id],
            pct_overall=overall[cluster_id],
            delta=local[cluster_id] - overall[cluster_id],
            label=labels.get(cluster_id),
        )
        for cluster_id in overall
    ]
    return sorted(rows, key=lambda row: (-row.delta, row.cluster_id))


def top_distinctive(detections: Mapping[str, AdSkillSet], corpus: Sequence[JobAd], categories: Iterable[str],
                    k: int = 5, labels: Optional[Mapping[int, str]] = None) -> Dict[str, List[DistinctivenessRow]]:
    return {category: distinctiveness(detections, corpus, category, labels)[:k] for category in categories}

##############################################################################################
###                                       Detection File                                   ###
##############################################################################################

def write_detections(detections: Mapping[str, AdSkillSet], path: Union[str, Path], header: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        if header:
            f.write(header)
        f.write("ad_id\tclusters\n")
        for ad_id, skill_set in detections.items():
            f.write(f"{ad_id}\t{','.join(str(c) for c in sorted(skill_set.clusters))}\n")


def read_detections(path: Union[str, Path]) -> Dict[str, AdSkillSet]:
    frame = read_table(path, ("ad_id", "clusters"), sep="\t", comment="#")
    detections = {}
    for row_number, row in enumerate(frame.to_dict("records"), start=1):
        clusters = frozenset(parse_cell(path, row_number, "clusters", c, int) for c in row["clusters"].split(",") if c.strip())
        detections[row["ad_id"]] = AdSkillSet(ad_id=row["ad_id"], clusters=clusters)
    return detections
