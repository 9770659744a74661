from pathlib import Path
from ..config import logger, PipelineConfig, STEREOTYPE_MAP_FILE
from ..models import DominanceSplit, PermutationConfig, stars
from ..utils.clustering import read_clusters
from ..utils.corpus import check_unique_ids, load_ads, load_stopwords
from ..utils.detection import read_detections, top_distinctive
from ..utils.errors import ConfigurationError, PreconditionError, SampleSizeError
from ..utils.gender import (
    load_gender_map,
    load_stereotype_map,
    regress_female_share,
    significant_coefficients,
    skills_by_dominance,
    stereotype_prevalence,
    stereotype_reward_comparison,
)
from ..utils.matching import MatchingStudy, reward_table, skills_by_salary_band
from ..utils.reports import RunManifest, write_json, write_tsv
from . import CLUSTERS_FILE, DETECTIONS_FILE, require_input, require_output, stage

COMMAND = "analyze"
DISTINCTIVE_PER_CATEGORY = 10


def register(subparsers) -> None:
    parser = subparsers.add_parser(COMMAND, help="salary rewards, salary bands, female-share regression and stereotype tables")
    parser.add_argument("--min-title-count", dest="min_title_count", type=int)
    parser.add_argument("--replicates", type=int, help="permutation replicates")
    parser.add_argument("--bootstrap-replicates", dest="bootstrap_replicates", type=int)
    parser.add_argument("--min-count", dest="min_count", type=int, help="hide skills with a smaller matched count")
    parser.add_argument("--bands", help="salary bands, e.g. 0-20000,20000-40000")
    parser.add_argument("--min-skills", dest="min_skills", type=int)
    parser.add_argument("--female-threshold", dest="female_threshold", type=float)
    parser.add_argument("--male-threshold", dest="male_threshold", type=float)
    parser.add_argument("--regression-alpha", dest="regression_alpha", type=float)
    parser.add_argument("--gender-map", dest="gender_map", type=Path)
    parser.add_argument("--stereotype-map", dest="stereotype_map", type=Path)
    parser.set_defaults(handler=lambda config, args: run(config))


def run(config: PipelineConfig) -> RunManifest:
    manifest = RunManifest.start(COMMAND, config)
    output_dir = Path(config.output_dir)
    detections_path = require_output(config, DETECTIONS_FILE, "detect")
    clusters_path = require_output(config, CLUSTERS_FILE, "build-lexicon")
    corpus_path = require_input(config, "corpus", COMMAND)
    for path in (detections_path, clusters_path, corpus_path, config.stopwords, config.gender_map, config.stereotype_map):
        manifest.add_input(path)

    with stage("load"):
        ads, _ = load_ads(corpus_path, config.corpus_format)
        check_unique_ids(ads)
        stopwords = load_stopwords(config.stopwords)
        detections = read_detections(detections_path)
        clusters = read_clusters(clusters_path)
        labels = clusters.labels()

    with stage("rewards"):
        study = MatchingStudy(ads, detections, stopwords, config.min_title_count)
        permutation = PermutationConfig(replicates=config.replicates, seed=config.seed)
        rewards = reward_table(study, permutation, labels)
        by_skill = {result.skill: result for result in rewards}
        write_tsv(
            (
                {"cluster_id": r.skill, "label": r.label, "r_s": r.r_s, "count": r.count, "p_value": r.p_value,
                 "stars": r.significance, "replicates": config.replicates, "seed": config.seed}
                for r in rewards if r.count >= config.min_count
            ),
            output_dir / "rewards.tsv", manifest,
            columns=["cluster_id", "label", "r_s", "count", "p_value", "stars", "replicates", "seed"],
        )

    with stage("salary bands"):
        summaries, tests = skills_by_salary_band(ads, detections, config.bands, config.bootstrap_replicates, config.seed)
        write_json({
            "bootstrap_replicates": config.bootstrap_replicates,
            "seed": config.seed,
            "bands": [
                {"low": s.band[0], "high": s.band[1], "n_ads": s.n_ads, "mean_skills": s.mean_skills,
                 "ci_low": s.ci_low, "ci_high": s.ci_high}
                for s in summaries
            ],
            "welch_tests": [
                {"band_a": i, "band_b": j, "t": None if test is None else test.t, "df": None if test is None else test.df,
                 "p": None if test is None else test.p}
                for (i, j), test in tests.items()
            ],
        }, output_dir / "salary_bands.json", manifest)

    with stage("distinctiveness"):
        categories = sorted({ad.category for ad in ads if ad.category})
        table = top_distinctive(detections, ads, categories, DISTINCTIVE_PER_CATEGORY, labels)
        write_tsv(
            (
                {"category": row.category, "cluster_id": row.cluster_id, "label": row.label,
                 "pct_in_category": row.pct_in_category, "pct_overall": row.pct_overall, "delta": row.delta}
                for category in categories for row in table[category]
            ),
            output_dir / "distinctiveness.tsv", manifest,
            columns=["category", "cluster_id", "label", "pct_in_category", "pct_overall", "delta"],
        )

    split = DominanceSplit(config.female_threshold, config.male_threshold)
    gender_map = load_gender_map(config.gender_map)
    with stage("regression"):
        try:
            result = regress_female_share(ads, detections, gender_map, config.min_skills)
        except PreconditionError as e:
            logger.warning(f"Skipping the female-share regression: {e.message}")
            result = None
        if result is not None:
            reported = set(significant_coefficients(result, config.min_count, config.regression_alpha))
            rows = []
            for cluster_id in sorted(result.cluster_ids, key=lambda c: -result.coefficients[c]):
                reward = by_skill.get(cluster_id)
                rows.append({
                    "cluster_id": cluster_id,
                    "label": labels.get(cluster_id),
                    "coefficient": result.coefficients[cluster_id],
                    "p_value": result.p_values[cluster_id],
                    "r_s": None if reward is None else reward.r_s,
                    "reward_stars": "" if reward is None else stars(reward.p_value),
                    "count": result.counts[cluster_id],
                    "flagged": cluster_id in result.flagged,
                    "reported": cluster_id in reported,
                })
            write_tsv(rows, output_dir / "regression.tsv", manifest,
                      columns=["cluster_id", "label", "coefficient", "p_value", "r_s", "reward_stars", "count", "flagged", "reported"])
        write_json({
            "intercept_included": True,
            "min_skills": config.min_skills,
            "n_observations": None if result is None else result.n_observations,
            "intercept": None if result is None else result.intercept,
            "r_squared": None if result is None else result.r_squared,
            "rank_deficient": None if result is None else result.rank_deficient,
            "flagged": [] if result is None else result.flagged,
            "dropped": [] if result is None else result.dropped,
        }, output_dir / "regression.json", manifest)

    with stage("dominance"):
        try:
            dominance = skills_by_dominance(ads, detections, gender_map, split)
        except SampleSizeError as e:
            logger.warning(f"Skipping the dominance comparison: {e.message}")
            dominance = {"female_threshold": split.female_threshold, "male_threshold": split.male_threshold, "error": e.message}
        dominance["threshold_note"] = "female/male-dominated thresholds are a configuration choice"
        write_json(dominance, output_dir / "dominance.json", manifest)

    with stage("stereotypes"):
        try:
            stereotype_map = load_stereotype_map(clusters, config.stereotype_map)
        except ConfigurationError as e:
            if Path(config.stereotype_map) != STEREOTYPE_MAP_FILE:
                raise
            logger.warning(f"The shipped stereotype map does not fit these clusters ({e.message}); skipping the stereotype report")
            stereotype_map = None
        if stereotype_map is not None:
            _write_stereotypes(stereotype_map, detections, ads, gender_map, split, by_skill, manifest, output_dir)

    manifest.write(output_dir)
    return manifest


def _write_stereotypes(stereotype_map, detections, ads, gender_map, split, by_skill, manifest, output_dir) -> None:
    try:
        table = stereotype_prevalence(detections, ads, stereotype_map, gender_map, split, by_skill)
    except PreconditionError as e:
        logger.warning(f"Skipping the stereotype tables: {e.message}")
        write_json({"error": e.message}, output_dir / "stereotypes.json", manifest)
        return
    rows = [
        {"trait": row.trait, "gender": row.gender, "cluster_id": row.cluster_id, "label": row.label, "r_s": row.reward,
         "stars": row.stars, "p_f": row.p_f, "p_m": row.p_m, "rel_diff": row.rel_diff}
        for row in table.rows
    ]
    for gender, average in table.averages.items():
        rows.append({"trait": "Average", "gender": gender, "cluster_id": None, "label": None, "r_s": average.reward,
                     "stars": "", "p_f": average.p_f, "p_m": average.p_m, "rel_diff": average.rel_diff})
    write_tsv(rows, output_dir / "stereotypes.tsv", manifest,
              columns=["trait", "gender", "cluster_id", "label", "r_s", "stars", "p_f", "p_m", "rel_diff"])

    summary = {
        "female_threshold": split.female_threshold,
        "male_threshold": split.male_threshold,
        "threshold_note": "female/male-dominated thresholds are a configuration choice",
        "n_female_ads": table.n_female_ads,
        "n_male_ads": table.n_male_ads,
    }
    try:
        feminine, masculine, test = stereotype_reward_comparison(stereotype_map, by_skill)
        summary.update({"feminine_mean_reward": feminine, "masculine_mean_reward": masculine,
                        "t": test.t, "df": test.df, "p_one_tailed": test.p})
    except (PreconditionError, SampleSizeError) as e:
        logger.warning(f"Skipping the stereotype reward comparison: {e.message}")
        summary["comparison_error"] = e.message
    write_json(summary, output_dir / "stereotypes.json", manifest)
