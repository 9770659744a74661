import time
from collections import defaultdict
from itertools import combinations
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
import numpy as np
from scipy import sparse
from ..config import logger
from ..models import AdSkillSet, JobAd, MatchedGroup, PermutationConfig, RewardResult, SalaryBandSummary, StopwordList, TTestResult
from .corpus import normalize_title, salary_point
from .errors import EmptyTitleError, NoDataError, SampleSizeError
from .stats import bootstrap_mean_ci, welch_t_test

CellKey = Tuple[int, str, str]

# relative slack when comparing a shuffled reward against the observed one
P_VALUE_TOLERANCE = 1e-12

##############################################################################################
###                                       Matched Groups                                   ###
##############################################################################################

def reward_cell(group: MatchedGroup) -> float:
    """Percent salary difference of ads with the skill over matched ads without it."""
    treated = float(np.mean(group.with_salaries))
    control = float(np.mean(group.without_salaries))
    return (treated - control) / control * 100.0


def reward_aggregate(cells: Iterable[MatchedGroup]) -> RewardResult:
    """Average of the cell rewards weighted by min(C, C̄).

    Raises:
        NoDataError when the skill has no matched cell
    """
    cells = list(cells)
    if not cells:
        raise NoDataError("No matched cells for skill")
    weights = np.array([cell.weight for cell in cells], dtype=np.float64)
    rewards = np.array([reward_cell(cell) for cell in cells])
    return RewardResult(skill=cells[0].skill, r_s=float(rewards @ weights / weights.sum()), count=int(weights.sum()))


class MatchingStudy:
    """Salaried ads grouped by (category, normalised title), ready for reward computation.

    Only ads with a salary, a category and a non-empty title key take part, and only
    groups holding at least `min_title_count` such ads. Skill sets are kept as a
    sparse ad x cluster indicator matrix so a shuffled assignment is one row
    permutation away.
    """

    def __init__(self, corpus: Iterable[JobAd], detections: Mapping[str, AdSkillSet], stopwords: StopwordList,
                 min_title_count: int = 2):
        self.min_title_count = min_title_count
        candidates = []
        for ad in corpus:
            if not ad.has_salary or not ad.category:
                continue
            try:
                key = normalize_title(ad.title, stopwords).key
            except EmptyTitleError as e:
                logger.debug(e.message)
                continue
            candidates.append((ad, (ad.category, key)))
        sizes = defaultdict(int)
        for _, group_key in candidates:
            sizes[group_key] += 1
        kept = [(ad, group_key) for ad, group_key in candidates if sizes[group_key] >= min_title_count]

        self.ad_ids = [ad.id for ad, _ in kept]
        self.group_keys = sorted({group_key for _, group_key in kept})
        group_index = {group_key: g for g, group_key in enumerate(self.group_keys)}
        self.group_of = np.array([group_index[group_key] for _, group_key in kept], dtype=np.int64)
        self.salaries = np.array([salary_point(ad) for ad, _ in kept], dtype=np.float64)
        empty = AdSkillSet(ad_id="", clusters=frozenset())
        skill_sets = [detections.get(ad.id, empty).clusters for ad, _ in kept]
        self.skills = sorted({cluster_id for clusters in skill_sets for cluster_id in clusters})
        skill_index = {cluster_id: s for s, cluster_id in enumerate(self.skills)}

        n, g, k = len(kept), len(self.group_keys), len(self.skills)
        rows = np.array([i for i, clusters in enumerate(skill_sets) for _ in clusters], dtype=np.int64)
        cols = np.array([skill_index[c] for clusters in skill_sets for c in clusters], dtype=np.int64)
        self.indicator = sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, k))
        self.groups = sparse.csr_matrix((np.ones(n), (self.group_of, np.arange(n))), shape=(g, n))
        self.weighted_groups = sparse.csr_matrix((self.salaries, (self.group_of, np.arange(n))), shape=(g, n))
        self.group_sizes = np.asarray(self.groups.sum(axis=1)).ravel()
        self.group_totals = np.asarray(self.weighted_groups.sum(axis=1)).ravel()
        logger.info(f"Matching study: {n} salaried ads in {g} title groups (min {min_title_count}), {k} skills")

    def __len__(self) -> int:
        return len(self.ad_ids)

    def cells(self) -> Dict[CellKey, MatchedGroup]:
        members = defaultdict(list)
        for i, g in enumerate(self.group_of):
            members[g].append(i)
        indicator = self.indicator.tocsc()
        cells = {}
        for s, skill in enumerate(self.skills):
            has_skill = np.zeros(len(self), dtype=bool)
            has_skill[indicator[:, s].indices] = True
            for g, group_key in enumerate(self.group_keys):
                rows = members[g]
                treated = tuple(float(self.salaries[i]) for i in rows if has_skill[i])
                control = tuple(float(self.salaries[i]) for i in rows if not has_skill[i])
                if treated and control:
                    cells[(skill, group_key[0], group_key[1])] = MatchedGroup(
                        skill=skill, category=group_key[0], title_key=group_key[1],
                        with_salaries=treated, without_salaries=control,
                    )
        return cells

    def rewards(self, order: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
        """Per-skill r_s and count when ad i carries the skill set of ad order[i].

        A skill without any valid cell gets r_s = 0 and count 0.
        """
        indicator = self.indicator if order is None else self.indicator[order]
        treated = (self.groups @ indicator).toarray()
        treated_total = (self.weighted_groups @ indicator).toarray()
        control = self.group_sizes[:, None] - treated
        control_total = self.group_totals[:, None] - treated_total
        valid = (treated > 0) & (control > 0)
        with np.errstate(divide="ignore", invalid="ignore"):
            treated_mean = treated_total / treated
            control_mean = control_total / control
            cell_reward = np.where(valid, (treated_mean - control_mean) / control_mean * 100.0, 0.0)
        weight = np.where(valid, np.minimum(treated, control), 0.0)
        count = weight.sum(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            r_s = np.where(count > 0, (cell_reward * weight).sum(axis=0) / count, 0.0)
        return r_s, count

    def p_values(self, config: PermutationConfig) -> np.ndarray:
        """Fraction of shuffles whose |r_s| reaches the observed |r_s|, per skill.

        Every replicate draws one permutation of the skill sets over the study's ads
        from its own child of SeedSequence(config.seed), so results do not depend on
        the order replicates are evaluated in.
        """
        started = time.time()
        observed, _ = self.rewards()
        threshold = np.abs(observed) * (1.0 - P_VALUE_TOLERANCE)
        exceed = np.zeros(len(self.skills))
        for child in np.random.SeedSequence(config.seed).spawn(config.replicates):
            order = np.random.default_rng(child).permutation(len(self))
            shuffled, _ = self.rewards(order)
            exceed += np.abs(shuffled) >= threshold
        logger.info(f"Ran {config.replicates} permutation replicates for {len(self.skills)} skills in {time.time() - started:.2f}s")
        return exceed / config.replicates


def build_matched_groups(corpus: Iterable[JobAd], detections: Mapping[str, AdSkillSet], stopwords: StopwordList,
                         min_title_count: int = 2) -> Dict[CellKey, MatchedGroup]:
    """Matched cells keyed by (skill, category, title_key); cells lacking either arm are dropped."""
    return MatchingStudy(corpus, detections, stopwords, min_title_count).cells()


def permutation_test(corpus: Iterable[JobAd], detections: Mapping[str, AdSkillSet], skill: int,
                     config: PermutationConfig, stopwords: StopwordList, min_title_count: int = 2) -> float:
    """Permutation p-value of one skill's reward.

    Raises:
        NoDataError when the skill has no matched cell
    """
    study = MatchingStudy(corpus, detections, stopwords, min_title_count)
    if skill not in study.skills:
        raise NoDataError(f"Skill {skill} does not occur among matched ads")
    s = study.skills.index(skill)
    _, count = study.rewards()
    if count[s] == 0:
        raise NoDataError(f"Skill {skill} has no matched cell")
    return float(study.p_values(config)[s])


def reward_table(study: MatchingStudy, config: Optional[PermutationConfig] = None,
                 labels: Optional[Mapping[int, str]] = None, min_count: int = 0) -> List[RewardResult]:
    """r_s, count and (with a config) permutation p-value for every skill, highest r_s first.

    Skills with count below `min_count` or no matched cell are left out.
    """
    r_s, count = study.rewards()
    p_values = study.p_values(config) if config is not None else None
    labels = labels or {}
    results = []
    for s, skill in enumerate(study.skills):
        if count[s] == 0 or count[s] < min_count:
            continue
        results.append(RewardResult(
            skill=skill,
            r_s=float(r_s[s]),
            count=int(count[s]),
            p_value=None if p_values is None else float(p_values[s]),
            label=labels.get(skill),
        ))
    return sorted(results, key=lambda result: (-result.r_s, result.skill))

##############################################################################################
###                                        Salary Bands                                    ###
##############################################################################################

def skills_by_salary_band(corpus: Iterable[JobAd], detections: Mapping[str, AdSkillSet], bands: Sequence[Tuple[float, float]],
                          replicates: int = 1000, seed: int = 0) -> Tuple[List[SalaryBandSummary], Dict[Tuple[int, int], Optional[TTestResult]]]:
    """Mean number of distinct skills per ad for each salary band (low, high].

    Returns the band summaries with bootstrap intervals and the pairwise two-tailed
    Welch tests keyed by band index; a pair involving a band with fewer than two ads
    maps to None.
    """
    counts: List[List[int]] = [[] for _ in bands]
    for ad in corpus:
        if not ad.has_salary:
            continue
        point = salary_point(ad)
        for b, (low, high) in enumerate(bands):
            if low < point <= high:
                skill_set = detections.get(ad.id)
                counts[b].append(len(skill_set) if skill_set is not None else 0)
                break

    summaries = []
    for b, band in enumerate(bands):
        if not counts[b]:
            logger.warning(f"Salary band ({band[0]:.0f}, {band[1]:.0f}] has no ads")
            summaries.append(SalaryBandSummary(band=tuple(band), n_ads=0, mean_skills=None, ci_low=None, ci_high=None))
            continue
        mean, low, high = bootstrap_mean_ci(counts[b], replicates, seed + b)
        summaries.append(SalaryBandSummary(band=tuple(band), n_ads=len(counts[b]), mean_skills=mean, ci_low=low, ci_high=high))

    tests = {}
    for i, j in combinations(range(len(bands)), 2):
        try:
            tests[(i, j)] = welch_t_test(counts[i], counts[j])
        except SampleSizeError as e:
            logger.warning(f"No Welch test between salary bands {i} and {j}: {e.message}")
            tests[(i, j)] = None
    return summaries, tests
