from pathlib import Path
import numpy as np
import pytest
from scipy.stats import linregress
from skillweaver.models import (
    AdSkillSet,
    CategoryGenderMap,
    CategoryShare,
    ClusterSet,
    DominanceSplit,
    JobAd,
    RewardResult,
    SkillCluster,
    StereotypeEntry,
    StereotypeMap,
)
from skillweaver.utils.corpus import load_ads
from skillweaver.utils.errors import ConfigurationError, PreconditionError, SchemaError, UnmappedCategoryError
from skillweaver.utils.gender import (
    attach_female_share,
    build_design,
    load_gender_map,
    load_stereotype_map,
    ols_fit,
    regress_female_share,
    relative_difference,
    significant_coefficients,
    skills_by_dominance,
    stereotype_prevalence,
    stereotype_reward_comparison,
)

TEST_FILES = Path(__file__).parent / "test_files"
gender_map = load_gender_map()

FIXTURE_CLUSTERS = ClusterSet(clusters=[
    SkillCluster(0, ("communication skills",), "communication skills"),
    SkillCluster(1, ("team player",), "team player"),
    SkillCluster(2, ("leadership",), "leadership"),
    SkillCluster(3, ("empathy", "polite"), "polite"),
    SkillCluster(4, ("ability to work under pressure",), "ability to work under pressure"),
])
FIXTURE_DETECTIONS = {
    ad_id: AdSkillSet(ad_id, frozenset(clusters)) for ad_id, clusters in {
        "1": {0, 1, 3}, "2": {3}, "3": {1, 2, 3}, "4": {3}, "5": {0, 4}, "6": {0, 2, 4}, "7": {2},
        "8": set(), "9": {1}, "10": set(), "11": {0, 2}, "12": set(), "13": {0, 1}, "14": {1, 3},
    }.items()
}
MASCULINE_REWARDS = [1.4, 2.9, 0.5, 7.4, 1.9, 3.0, 1.3]
FEMININE_REWARDS = [-1.3, -5.9, 0.3, 3.0, -4.6]


def fixture_ads():
    return load_ads(TEST_FILES / "ads.csv")[0]


def test_shipped_gender_map():
    assert gender_map.share("Teaching Jobs") == 71.5
    assert gender_map.share("Graduate Jobs") is None
    assert gender_map.rows["Graduate Jobs"].ons_category is None
    assert gender_map.rows["Trade & Construction Jobs"].ons_category == "Construction"


def test_load_gender_map_bad_share(tmp_path):
    path = tmp_path / "gender_map.tsv"
    path.write_text("category\tons_category\tfemale_share\nTeaching Jobs\tEducation\tseventy\n", encoding="utf-8")
    with pytest.raises(SchemaError) as e:
        load_gender_map(path)
    assert e.value.exit_code == 1
    assert "female_share" in e.value.message


def test_attach_female_share():
    shares, excluded = attach_female_share(fixture_ads(), gender_map)
    assert excluded == 1
    assert "13" not in shares
    assert shares["1"] == 80.62
    assert shares["6"] == 19.21


def test_unmapped_category():
    ads = [JobAd(id="1", title="diver", description="d", category="Underwater Jobs")]
    with pytest.raises(UnmappedCategoryError):
        attach_female_share(ads, gender_map)


def test_build_design_drops_unused_clusters():
    shares = {"a": 50.0, "b": 60.0, "c": 70.0}
    detections = {
        "a": AdSkillSet("a", frozenset({1, 2, 3})),
        "b": AdSkillSet("b", frozenset({1, 2, 4})),
        "c": AdSkillSet("c", frozenset({1})),
    }
    design, target, kept, dropped = build_design(shares, detections, min_skills=3, cluster_ids=[1, 2, 3, 4, 5])
    assert kept == [1, 2, 3, 4]
    assert dropped == [5]
    assert design.tolist() == [[1, 1, 1, 0], [1, 1, 0, 1]]
    assert target.tolist() == [50.0, 60.0]
    with pytest.raises(PreconditionError):
        build_design(shares, detections, min_skills=4)


def random_regression(seed=0, n=1000, k=10, noise=0.1):
    rng = np.random.default_rng(seed)
    design = (rng.random((n, k)) < 0.5).astype(float)
    beta = rng.uniform(-3, 3, k)
    target = 40.0 + design @ beta + rng.normal(0, noise, n)
    return design, target, beta


def test_ols_recovers_coefficients():
    design, target, beta = random_regression()
    result = ols_fit(design, target)
    assert not result.rank_deficient
    assert [result.coefficients[j] for j in range(10)] == pytest.approx(beta, abs=0.2)
    assert result.intercept == pytest.approx(40.0, abs=0.2)
    assert result.r_squared > 0.99
    assert result.counts[0] == int(design[:, 0].sum())
    reference = np.linalg.lstsq(np.hstack([np.ones((1000, 1)), design]), target, rcond=None)[0]
    assert [result.intercept] + [result.coefficients[j] for j in range(10)] == pytest.approx(reference, abs=1e-8)


def test_ols_residuals_are_orthogonal():
    design, target, _ = random_regression(seed=1)
    result = ols_fit(design, target)
    fitted = result.intercept + design @ np.array([result.coefficients[j] for j in range(10)])
    residuals = target - fitted
    assert abs(residuals.sum()) < 1e-8
    assert np.abs(design.T @ residuals).max() < 1e-8


def test_ols_scales_with_target():
    design, target, _ = random_regression(seed=2)
    once = ols_fit(design, target)
    twice = ols_fit(design, 2 * target)
    for j in range(10):
        assert twice.coefficients[j] == pytest.approx(2 * once.coefficients[j], rel=1e-9, abs=1e-9)
    assert twice.r_squared == pytest.approx(once.r_squared)


def test_ols_constant_target():
    design, _, _ = random_regression(seed=3, n=50, k=3)
    result = ols_fit(design, np.full(50, 44.0))
    assert result.r_squared == 0.0
    assert result.intercept == pytest.approx(44.0)


def test_ols_single_column_matches_linregress():
    design, target, _ = random_regression(seed=6, n=300, k=1, noise=2.0)
    result = ols_fit(design, target)
    reference = linregress(design[:, 0], target)
    assert result.coefficients[0] == pytest.approx(reference.slope)
    assert result.intercept == pytest.approx(reference.intercept)
    assert result.p_values[0] == pytest.approx(reference.pvalue, rel=1e-6, abs=1e-300)
    assert result.r_squared == pytest.approx(reference.rvalue ** 2)


def test_ols_flags_duplicated_column():
    design, target, _ = random_regression(seed=4, n=200, k=3)
    duplicated = np.hstack([design, design[:, [1]]])
    result = ols_fit(duplicated, target, cluster_ids=[10, 11, 12, 13])
    assert result.rank_deficient
    assert len(result.flagged) == 1
    assert result.flagged[0] in (11, 13)
    assert result.p_values[result.flagged[0]] is None
    assert result.p_values[10] is not None


def test_significant_coefficients():
    design, target, _ = random_regression(seed=5)
    result = ols_fit(design, target)
    chosen = significant_coefficients(result, min_count=50, alpha=0.01)
    assert chosen
    assert all(result.p_values[c] < 0.01 for c in chosen)
    assert [result.coefficients[c] for c in chosen] == sorted((result.coefficients[c] for c in chosen), reverse=True)
    assert significant_coefficients(result, min_count=10_000) == []


def test_fixture_regression_is_rank_deficient():
    result = regress_female_share(fixture_ads(), FIXTURE_DETECTIONS, gender_map)
    assert result.n_observations == 3
    assert result.rank_deficient
    assert result.cluster_ids == [0, 1, 2, 3, 4]


def test_relative_difference():
    assert relative_difference(0.94, 0.12) == pytest.approx(87.23, abs=0.01)
    assert relative_difference(0.12, 0.94) == pytest.approx(-87.23, abs=0.01)
    assert relative_difference(0.0, 0.0) is None


def test_relative_difference_is_antisymmetric():
    rng = np.random.default_rng(10)
    for p_f, p_m in rng.uniform(0, 100, (500, 2)):
        assert relative_difference(p_m, p_f) == pytest.approx(-relative_difference(p_f, p_m))
        assert -100.0 <= relative_difference(p_f, p_m) <= 100.0


def test_dominance_split():
    split = DominanceSplit()
    assert split.side(80.62) == "female"
    assert split.side(60.0) == "female"
    assert split.side(45.72) is None
    assert split.side(40.0) == "male"
    assert split.side(None) is None


def test_skills_by_dominance_fixture():
    report = skills_by_dominance(fixture_ads(), FIXTURE_DETECTIONS, gender_map, DominanceSplit())
    assert (report["n_female"], report["n_male"]) == (5, 5)
    assert report["mean_female"] == pytest.approx(2.0)
    assert report["mean_male"] == pytest.approx(1.0)
    assert report["t"] > 0


def test_load_stereotype_map_resolves_members_and_labels():
    stereotype_map = load_stereotype_map(FIXTURE_CLUSTERS, TEST_FILES / "stereotype_map.tsv")
    by_trait = {entry.trait: entry for entry in stereotype_map.entries}
    assert by_trait["Compassionate"].cluster_id == 3
    assert by_trait["Compassionate"].label == "polite"
    assert by_trait["Has leadership abilities"].cluster_id == 2
    assert len(stereotype_map.by_gender("feminine")) == 3
    assert len(stereotype_map.by_gender("masculine")) == 3


def test_load_stereotype_map_unknown_cluster(tmp_path):
    path = tmp_path / "map.tsv"
    path.write_text("bem_trait\tgender\tcluster\nAmbitious\tmasculine\tambitious\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_stereotype_map(FIXTURE_CLUSTERS, path)
    path.write_text("bem_trait\tgender\tcluster\nAmbitious\tneutral\t2\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_stereotype_map(FIXTURE_CLUSTERS, path)


def test_stereotype_prevalence_fixture():
    stereotype_map = load_stereotype_map(FIXTURE_CLUSTERS, TEST_FILES / "stereotype_map.tsv")
    rewards = {2: RewardResult(skill=2, r_s=4.0, count=3, p_value=0.003)}
    table = stereotype_prevalence(FIXTURE_DETECTIONS, fixture_ads(), stereotype_map, gender_map, DominanceSplit(), rewards)
    assert (table.n_female_ads, table.n_male_ads) == (5, 5)
    rows = {row.trait: row for row in table.rows}
    assert (rows["Compassionate"].p_f, rows["Compassionate"].p_m) == (80.0, 0.0)
    assert rows["Compassionate"].rel_diff == pytest.approx(100.0)
    assert rows["Warm"].rel_diff == pytest.approx(50.0)
    assert rows["Has leadership abilities"].rel_diff == pytest.approx(-50.0)
    assert rows["Has leadership abilities"].reward == 4.0
    assert rows["Has leadership abilities"].stars == "**"
    assert rows["Self-sufficient"].rel_diff == pytest.approx(0.0)
    feminine = table.averages["feminine"]
    assert feminine.p_f == pytest.approx((80 + 40 + 80) / 3)
    assert feminine.reward is None
    masculine = table.averages["masculine"]
    assert masculine.rel_diff == pytest.approx(0.0)
    assert masculine.reward == 4.0


def test_stereotype_prevalence_mirrored_shares():
    mirrored = CategoryGenderMap(rows={
        category: CategoryShare(row.ons_category, None if row.female_share is None else 100.0 - row.female_share)
        for category, row in gender_map.rows.items()
    })
    stereotype_map = load_stereotype_map(FIXTURE_CLUSTERS, TEST_FILES / "stereotype_map.tsv")
    table = stereotype_prevalence(FIXTURE_DETECTIONS, fixture_ads(), stereotype_map, gender_map, DominanceSplit())
    swapped = stereotype_prevalence(FIXTURE_DETECTIONS, fixture_ads(), stereotype_map, mirrored, DominanceSplit())
    assert (swapped.n_female_ads, swapped.n_male_ads) == (table.n_male_ads, table.n_female_ads)
    for row, other in zip(table.rows, swapped.rows):
        assert (other.p_f, other.p_m) == (row.p_m, row.p_f)
        if row.rel_diff is None:
            assert other.rel_diff is None
        else:
            assert other.rel_diff == pytest.approx(-row.rel_diff)


def test_stereotype_prevalence_needs_both_sides():
    ads = [ad for ad in fixture_ads() if ad.category != "Trade & Construction Jobs"]
    stereotype_map = load_stereotype_map(FIXTURE_CLUSTERS, TEST_FILES / "stereotype_map.tsv")
    with pytest.raises(PreconditionError):
        stereotype_prevalence(FIXTURE_DETECTIONS, ads, stereotype_map, gender_map, DominanceSplit())


def test_stereotype_reward_comparison():
    entries, rewards = [], {}
    for gender, values in (("feminine", FEMININE_REWARDS), ("masculine", MASCULINE_REWARDS)):
        for value in values:
            cluster_id = len(entries)
            entries.append(StereotypeEntry(trait=f"trait {cluster_id}", gender=gender, cluster_id=cluster_id, label=f"c{cluster_id}"))
            rewards[cluster_id] = RewardResult(skill=cluster_id, r_s=value, count=100)
    feminine, masculine, test = stereotype_reward_comparison(StereotypeMap(entries), rewards)
    assert feminine == pytest.approx(-1.7)
    assert masculine == pytest.approx(2.6286, abs=1e-4)
    assert test.p == pytest.approx(0.014, abs=0.002)


def test_stereotype_reward_comparison_missing_reward():
    stereotype_map = StereotypeMap([
        StereotypeEntry("Warm", "feminine", 0, "c0"),
        StereotypeEntry("Assertive", "masculine", 1, "c1"),
    ])
    with pytest.raises(PreconditionError):
        stereotype_reward_comparison(stereotype_map, {0: RewardResult(skill=0, r_s=1.0, count=5)})
