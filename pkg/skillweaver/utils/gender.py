import warnings
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union
import numpy as np
import statsmodels.api as sm
from scipy import linalg
from ..config import logger, GENDER_MAP_FILE, STEREOTYPE_MAP_FILE
from ..models import (
    AdSkillSet,
    CategoryGenderMap,
    CategoryShare,
    ClusterSet,
    DominanceSplit,
    JobAd,
    RegressionResult,
    RewardResult,
    StereotypeAverage,
    StereotypeEntry,
    StereotypeMap,
    StereotypePrevalence,
    StereotypeTable,
    TTestResult,
    stars,
)
from .corpus import parse_cell, read_table
from .errors import ConfigurationError, PreconditionError, UnmappedCategoryError
from .stats import equal_var_t_test, welch_t_test

NOT_AVAILABLE = {"", "n/a", "na", "-"}

##############################################################################################
###                                     Female Share Map                                   ###
##############################################################################################

def load_gender_map(path: Optional[Union[str, Path]] = None) -> CategoryGenderMap:
    """Job category -> (official category, % women employed); N/A shares stay None."""
    path = Path(path or GENDER_MAP_FILE)
    frame = read_table(path, ("category", "ons_category", "female_share"), sep="\t", comment="#")
    rows = {}
    for row_number, row in enumerate(frame.to_dict("records"), start=1):
        raw = row["female_share"].strip()
        share = None if raw.lower() in NOT_AVAILABLE else parse_cell(path, row_number, "female_share", raw, float)
        if share is not None and not 0.0 <= share <= 100.0:
            raise ConfigurationError(f"{path}: female share {share} for '{row['category']}' is outside [0, 100]")
        ons = row["ons_category"].strip()
        rows[row["category"].strip()] = CategoryShare(ons_category=None if ons.lower() in NOT_AVAILABLE else ons, female_share=share)
    return CategoryGenderMap(rows=rows)


def attach_female_share(corpus: Iterable[JobAd], gender_map: CategoryGenderMap) -> Tuple[Dict[str, float], int]:
    """Female share of each ad's category.

    Returns the shares keyed by ad id and the number of ads left out because their
    category has no share (or no category at all).

    Raises:
        UnmappedCategoryError listing every corpus category missing from the map
    """
    corpus = list(corpus)
    unmapped = {ad.category for ad in corpus if ad.category and ad.category not in gender_map.rows}
    if unmapped:
        raise UnmappedCategoryError(unmapped)
    shares = {}
    excluded = 0
    for ad in corpus:
        share = gender_map.share(ad.category) if ad.category else None
        if share is None:
            excluded += 1
        else:
            shares[ad.id] = share
    logger.info(f"Attached female share to {len(shares)} ads ({excluded} in categories without statistics)")
    return shares, excluded

##############################################################################################
###                                        Regression                                      ###
##############################################################################################

def build_design(shares: Mapping[str, float], detections: Mapping[str, AdSkillSet], min_skills: int = 3,
                 cluster_ids: Optional[Sequence[int]] = None) -> Tuple[np.ndarray, np.ndarray, List[int], List[int]]:
    """Cluster-indicator design over ads with at least `min_skills` distinct clusters.

    Returns (design, target, kept cluster ids, dropped cluster ids); clusters that
    never occur among the qualifying ads are dropped.

    Raises:
        PreconditionError when no ad qualifies
    """
    ads = [ad_id for ad_id in shares if ad_id in detections and len(detections[ad_id]) >= min_skills]
    if not ads:
        raise PreconditionError(f"No ad with a female share mentions at least {min_skills} skill clusters")
    universe = sorted(cluster_ids) if cluster_ids is not None else sorted({c for ad_id in ads for c in detections[ad_id].clusters})
    column = {cluster_id: j for j, cluster_id in enumerate(universe)}
    design = np.zeros((len(ads), len(universe)))
    for i, ad_id in enumerate(ads):
        for cluster_id in detections[ad_id].clusters:
            if cluster_id in column:
                design[i, column[cluster_id]] = 1.0
    present = design.any(axis=0)
    kept = [cluster_id for cluster_id, used in zip(universe, present) if used]
    dropped = [cluster_id for cluster_id, used in zip(universe, present) if not used]
    if dropped:
        logger.info(f"Dropped {len(dropped)} clusters absent from the qualifying ads")
    target = np.array([shares[ad_id] for ad_id in ads], dtype=np.float64)
    return design[:, present], target, kept, dropped


def ols_fit(design: np.ndarray, target: np.ndarray, cluster_ids: Optional[Sequence[int]] = None) -> RegressionResult:
    """Least squares with an intercept and classical (homoskedastic) p-values.

    Full-rank designs are solved through a Cholesky factorisation of the normal
    equations. Otherwise the minimum-norm solution is used, the result is marked
    rank deficient and the columns found dependent by pivoted QR are flagged (their
    p-values are None). R^2 and the p-values come from a statsmodels OLS fit of the
    same design.
    """
    design = np.asarray(design, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    n, k = design.shape
    if n == 0:
        raise PreconditionError("Regression needs at least one observation")
    cluster_ids = list(cluster_ids) if cluster_ids is not None else list(range(k))
    X = np.hstack([np.ones((n, 1)), design])
    p = k + 1

    _, R, pivots = linalg.qr(X, mode="economic", pivoting=True)
    diagonal = np.abs(np.diag(R))
    tolerance = max(n, p) * np.finfo(float).eps * (diagonal[0] if len(diagonal) else 0.0)
    rank = int((diagonal > tolerance).sum())

    if rank == p:
        beta = linalg.cho_solve(linalg.cho_factor(X.T @ X), X.T @ target)
        dependent = set()
    else:
        beta = linalg.lstsq(X, target)[0]
        dependent = {int(j) for j in pivots[rank:]}
        logger.warning(f"Design matrix is rank deficient ({rank} of {p} columns independent)")

    # zero residual degrees of freedom or a constant target make statsmodels divide by zero
    with warnings.catch_warnings(), np.errstate(divide="ignore", invalid="ignore"):
        warnings.simplefilter("ignore")
        fit = sm.OLS(target, X).fit()
        centered = target - target.mean()
        r_squared = float(fit.rsquared) if float(centered @ centered) > 0 else 0.0
        raw_p_values = np.asarray(fit.pvalues, dtype=np.float64)

    p_values: Dict[int, Optional[float]] = {}
    for j, cluster_id in enumerate(cluster_ids, start=1):
        value = raw_p_values[j]
        p_values[cluster_id] = None if j in dependent or not np.isfinite(value) else float(value)

    return RegressionResult(
        cluster_ids=cluster_ids,
        coefficients={cluster_id: float(beta[j]) for j, cluster_id in enumerate(cluster_ids, start=1)},
        intercept=float(beta[0]),
        r_squared=r_squared,
        p_values=p_values,
        counts={cluster_id: int(design[:, j - 1].sum()) for j, cluster_id in enumerate(cluster_ids, start=1)},
        n_observations=n,
        rank_deficient=rank < p,
        flagged=[cluster_ids[j - 1] for j in sorted(dependent) if j > 0],
    )


def regress_female_share(corpus: Iterable[JobAd], detections: Mapping[str, AdSkillSet], gender_map: CategoryGenderMap,
                         min_skills: int = 3) -> RegressionResult:
    """Predict an ad's category female share from the skill clusters it mentions."""
    shares, _ = attach_female_share(corpus, gender_map)
    design, target, kept, dropped = build_design(shares, detections, min_skills)
    result = ols_fit(design, target, kept)
    result.dropped = dropped
    logger.info(f"Female-share regression over {result.n_observations} ads: R^2 = {result.r_squared:.3f}")
    return result


def significant_coefficients(result: RegressionResult, min_count: int = 50, alpha: float = 0.01) -> List[int]:
    """Clusters worth reporting: frequent enough and significant, largest coefficient first."""
    keep = [
        cluster_id for cluster_id in result.cluster_ids
        if result.counts[cluster_id] >= min_count and result.p_values[cluster_id] is not None and result.p_values[cluster_id] < alpha
    ]
    return sorted(keep, key=lambda cluster_id: -result.coefficients[cluster_id])

##############################################################################################
###                                  Gender-dominated Industries                           ###
##############################################################################################

def _split_ads(corpus: Iterable[JobAd], gender_map: CategoryGenderMap, split: DominanceSplit) -> Dict[str, List[JobAd]]:
    sides = {"female": [], "male": []}
    for ad in corpus:
        if not ad.category or ad.category not in gender_map.rows:
            continue
        side = split.side(gender_map.share(ad.category))
        if side is not None:
            sides[side].append(ad)
    return sides


def skills_by_dominance(corpus: Iterable[JobAd], detections: Mapping[str, AdSkillSet], gender_map: CategoryGenderMap,
                        split: DominanceSplit) -> Dict[str, object]:
    """Mean distinct-cluster count in female- vs male-dominated ads with a Welch test."""
    sides = _split_ads(corpus, gender_map, split)
    counts = {
        side: [len(detections[ad.id]) if ad.id in detections else 0 for ad in ads]
        for side, ads in sides.items()
    }
    test: TTestResult = welch_t_test(counts["female"], counts["male"])
    return {
        "female_threshold": split.female_threshold,
        "male_threshold": split.male_threshold,
        "n_female": len(counts["female"]),
        "n_male": len(counts["male"]),
        "mean_female": float(np.mean(counts["female"])),
        "mean_male": float(np.mean(counts["male"])),
        "t": test.t,
        "df": test.df,
        "p": test.p,
    }

##############################################################################################
###                                    Stereotypical Skills                                ###
##############################################################################################

def load_stereotype_map(clusters: ClusterSet, path: Optional[Union[str, Path]] = None) -> StereotypeMap:
    """Read trait -> (gender, cluster); the cluster column holds an id or a cluster label.

    Raises:
        ConfigurationError on an unknown gender, an unresolvable cluster or a repeated trait
    """
    path = Path(path or STEREOTYPE_MAP_FILE)
    frame = read_table(path, ("bem_trait", "gender", "cluster"), sep="\t", comment="#")
    labels = clusters.labels()
    by_label = {label: cluster_id for cluster_id, label in labels.items()}
    membership = clusters.membership()
    entries = []
    seen = set()
    for row in frame.to_dict("records"):
        trait, gender, reference = row["bem_trait"].strip(), row["gender"].strip().lower(), row["cluster"].strip()
        if gender not in ("feminine", "masculine"):
            raise ConfigurationError(f"{path}: trait '{trait}' has unknown gender '{gender}'")
        if trait in seen:
            raise ConfigurationError(f"{path}: trait '{trait}' is mapped twice")
        seen.add(trait)
        if reference.isdigit() and int(reference) in labels:
            cluster_id = int(reference)
        elif reference in by_label:
            cluster_id = by_label[reference]
        elif reference in membership:
            cluster_id = membership[reference]
        else:
            raise ConfigurationError(f"{path}: trait '{trait}' refers to unknown cluster '{reference}'")
        entries.append(StereotypeEntry(trait=trait, gender=gender, cluster_id=cluster_id, label=labels[cluster_id]))
    return StereotypeMap(entries=entries)


def relative_difference(p_f: float, p_m: float) -> Optional[float]:
    largest = max(p_f, p_m)
    if largest == 0:
        return None
    return (p_f - p_m) / largest * 100.0


def _mean(values: List[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


def stereotype_prevalence(detections: Mapping[str, AdSkillSet], corpus: Iterable[JobAd], stereotype_map: StereotypeMap,
                          gender_map: CategoryGenderMap, split: DominanceSplit,
                          rewards: Optional[Mapping[int, RewardResult]] = None) -> StereotypeTable:
    """Share of ads in female- and male-dominated industries mentioning each stereotyped skill.

    Raises:
        PreconditionError when either side of the split has no ads
    """
    sides = _split_ads(corpus, gender_map, split)
    if not sides["female"] or not sides["male"]:
        raise PreconditionError(
            f"Dominance split leaves {len(sides['female'])} female- and {len(sides['male'])} male-dominated ads"
        )
    rewards = rewards or {}

    def prevalence(ads: List[JobAd], cluster_id: int) -> float:
        hits = sum(1 for ad in ads if ad.id in detections and cluster_id in detections[ad.id])
        return 100.0 * hits / len(ads)

    rows = []
    for entry in stereotype_map.entries:
        p_f = prevalence(sides["female"], entry.cluster_id)
        p_m = prevalence(sides["male"], entry.cluster_id)
        reward = rewards.get(entry.cluster_id)
        rows.append(StereotypePrevalence(
            trait=entry.trait,
            gender=entry.gender,
            cluster_id=entry.cluster_id,
            label=entry.label,
            p_f=p_f,
            p_m=p_m,
            rel_diff=relative_difference(p_f, p_m),
            reward=None if reward is None else reward.r_s,
            stars=stars(None if reward is None else reward.p_value),
        ))

    averages = {}
    for gender in ("feminine", "masculine"):
        members = [row for row in rows if row.gender == gender]
        averages[gender] = StereotypeAverage(
            gender=gender,
            reward=_mean([row.reward for row in members if row.reward is not None]),
            p_f=_mean([row.p_f for row in members]) or 0.0,
            p_m=_mean([row.p_m for row in members]) or 0.0,
            rel_diff=_mean([row.rel_diff for row in members if row.rel_diff is not None]),
        )
    return StereotypeTable(rows=rows, averages=averages, split=split,
                           n_female_ads=len(sides["female"]), n_male_ads=len(sides["male"]))


def stereotype_reward_comparison(stereotype_map: StereotypeMap, rewards: Mapping[int, RewardResult]) -> Tuple[float, float, TTestResult]:
    """(feminine mean r, masculine mean r, one-tailed test that masculine skills pay more).

    Raises:
        PreconditionError when a mapped cluster has no reward or a gender has no traits
    """
    groups = {}
    for gender in ("feminine", "masculine"):
        entries = stereotype_map.by_gender(gender)
        if not entries:
            raise PreconditionError(f"No {gender} traits in the stereotype map")
        missing = [entry.trait for entry in entries if entry.cluster_id not in rewards]
        if missing:
            raise PreconditionError(f"No reward for the clusters of: {', '.join(missing)}")
        groups[gender] = [rewards[entry.cluster_id].r_s for entry in entries]
    test = equal_var_t_test(groups["masculine"], groups["feminine"], one_tailed=True)
    return _mean(groups["feminine"]), _mean(groups["masculine"]), test
