from itertools import product
from pathlib import Path
import numpy as np
import pytest
from skillweaver.models import AdSkillSet, ClusterSet, JobAd, SkillCluster, SkillPattern, TokenSequence
from skillweaver.utils.corpus import load_ads, load_stopwords, tokenize
from skillweaver.utils.detection import (
    PatternIndex,
    compile_patterns,
    detect_corpus,
    detect_in_ad,
    distinctiveness,
    load_competence_terms,
    read_detections,
    summarize_detections,
    top_distinctive,
    write_detections,
)
from skillweaver.utils.errors import PatternError, SchemaError, UnknownCategoryError

TEST_FILES = Path(__file__).parent / "test_files"
stopwords = load_stopwords()
competence_terms = load_competence_terms()

FIXTURE_CLUSTERS = ClusterSet(clusters=[
    SkillCluster(0, ("communication skills",), "communication skills"),
    SkillCluster(1, ("team player",), "team player"),
    SkillCluster(2, ("leadership",), "leadership"),
    SkillCluster(3, ("empathy", "polite"), "polite"),
    SkillCluster(4, ("ability to work under pressure",), "ability to work under pressure"),
])


def single(phrase, cluster_id=0):
    return ClusterSet(clusters=[SkillCluster(cluster_id, (phrase,), phrase)])


def found(text, phrase, max_gap=2):
    patterns = compile_patterns(single(phrase), competence_terms, stopwords)
    skill_set, _ = detect_in_ad(tokenize(text), patterns, stopwords, max_gap)
    return 0 in skill_set


def test_compile_strips_competence_terms():
    patterns = compile_patterns(single("capable of handling multiple tasks"), competence_terms, stopwords)
    assert patterns[0].tokens == ("handling", "multiple", "tasks")
    assert patterns[0].keep_competence is False


def test_compile_keeps_competence_term_of_single_word_skill():
    patterns = compile_patterns(single("communication skills"), competence_terms, stopwords)
    assert patterns[0].tokens == ("communication", "skills")
    assert patterns[0].keep_competence is True
    assert compile_patterns(single("team player"), competence_terms, stopwords)[0].tokens == ("team", "player")


def test_compile_explicit_flag_leaving_nothing():
    with pytest.raises(PatternError):
        compile_patterns(single("skills"), competence_terms, stopwords, keep_competence={"skills": False})


def test_compile_deduplicates_within_cluster():
    clusters = ClusterSet(clusters=[SkillCluster(0, ("team player", "the team player"), "team player")])
    assert len(compile_patterns(clusters, competence_terms, stopwords)) == 1


def test_gap_tolerant_examples():
    assert found("excellent verbal communication skills", "communication skills")
    assert not found("new communication technologies", "communication skills")
    assert not found("skills in communication", "communication skills")
    assert found("handling of many simultaneous multiple tasks", "capable of handling multiple tasks")
    assert not found("handling of many simultaneous multiple tasks", "capable of handling multiple tasks", max_gap=1)


def test_job_ad_uses_description_only():
    ad = JobAd(id="9", title="Team Player", description="Bricklayer needed.")
    skill_set, occurrences = detect_in_ad(ad, compile_patterns(single("team player"), competence_terms, stopwords), stopwords)
    assert skill_set.ad_id == "9"
    assert len(skill_set) == 0
    assert occurrences == []


def test_occurrences_per_start():
    patterns = compile_patterns(single("team player"), competence_terms, stopwords)
    skill_set, occurrences = detect_in_ad(tokenize("team player, team of a player"), patterns, stopwords)
    assert skill_set.clusters == frozenset({0})
    assert [o.span for o in occurrences] == [(0, 1), (2, 5)]


def brute_force_starts(tokens, pattern, max_gap):
    """Every in-order choice of positions for the pattern tokens, checked one by one."""
    content = [token not in stopwords for token in tokens]
    candidates = [[i for i, token in enumerate(tokens) if token == wanted] for wanted in pattern.tokens]
    starts = set()
    for path in product(*candidates):
        if any(q <= p for p, q in zip(path, path[1:])):
            continue
        if all(sum(content[p + 1:q]) <= max_gap for p, q in zip(path, path[1:])):
            starts.add(path[0])
    return starts


def random_case(rng):
    vocabulary = ["x", "y", "z", "the", "of"]
    tokens = [vocabulary[i] for i in rng.integers(0, len(vocabulary), int(rng.integers(0, 31)))]
    patterns = [
        SkillPattern(cluster_id=c, phrase=f"p{c}", tokens=tuple(["x", "y", "z"][i] for i in rng.integers(0, 3, int(rng.integers(1, 4)))), keep_competence=False)
        for c in range(int(rng.integers(1, 4)))
    ]
    return tokens, patterns


def sequence(tokens):
    return TokenSequence(tokens=tuple(tokens), offsets=tuple(range(len(tokens))))


def test_detection_matches_brute_force():
    rng = np.random.default_rng(5)
    for _ in range(10000):
        tokens, patterns = random_case(rng)
        max_gap = int(rng.integers(0, 3))
        skill_set, occurrences = detect_in_ad(sequence(tokens), patterns, stopwords, max_gap)
        expected = {(p.phrase, s) for p in patterns for s in brute_force_starts(tokens, p, max_gap)}
        assert {(o.phrase, o.span[0]) for o in occurrences} == expected
        assert skill_set.clusters == frozenset(int(phrase[1:]) for phrase, _ in expected)


def test_gap_monotonicity_and_stopword_insertion():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        tokens, patterns = random_case(rng)
        index = PatternIndex(patterns)
        narrow, _ = detect_in_ad(sequence(tokens), index, stopwords, 1)
        wide, _ = detect_in_ad(sequence(tokens), index, stopwords, 2)
        assert narrow.clusters <= wide.clusters
        padded = list(tokens)
        padded.insert(int(rng.integers(0, len(padded) + 1)), "the")
        again, _ = detect_in_ad(sequence(padded), index, stopwords, 1)
        assert again.clusters == narrow.clusters


def test_repeated_sentence_gives_same_skills():
    patterns = compile_patterns(FIXTURE_CLUSTERS, competence_terms, stopwords)
    text = "A team player with good communication skills."
    once, _ = detect_in_ad(tokenize(text), patterns, stopwords)
    twice, _ = detect_in_ad(tokenize(f"{text} {text}"), patterns, stopwords)
    assert once.clusters == twice.clusters == frozenset({0, 1})
    rng = np.random.default_rng(11)
    barrier = ["w"] * 3
    for _ in range(1000):
        tokens, patterns = random_case(rng)
        max_gap = int(rng.integers(0, 3))
        single_copy, _ = detect_in_ad(sequence(tokens), patterns, stopwords, max_gap)
        doubled, _ = detect_in_ad(sequence(tokens + barrier + tokens), patterns, stopwords, max_gap)
        assert doubled.clusters == single_copy.clusters


def test_fixture_corpus():
    ads, _ = load_ads(TEST_FILES / "ads.csv")
    patterns = compile_patterns(FIXTURE_CLUSTERS, competence_terms, stopwords)
    detections = detect_corpus(ads, patterns, stopwords)
    assert {ad_id: sorted(s.clusters) for ad_id, s in detections.items()} == {
        "1": [0, 1, 3], "2": [3], "3": [1, 2, 3], "4": [3], "5": [0, 4], "6": [0, 2, 4], "7": [2],
        "8": [], "9": [1], "10": [], "11": [0, 2], "12": [], "13": [0, 1], "14": [1, 3],
    }
    summary = summarize_detections(detections)
    assert (summary.ads, summary.with_any, summary.with_three) == (14, 11, 3)
    assert summary.mean_clusters == pytest.approx(1.5)


def test_empty_summary():
    summary = summarize_detections({})
    assert summary.coverage is None
    assert summary.mean_clusters == 0.0


def planted_corpus():
    ads = [JobAd(id=str(i), title="t", description="d", category="A" if i < 5 else "B") for i in range(10)]
    detections = {ad.id: set() for ad in ads}
    for ad in ads:
        detections[ad.id].add(1)
    for i in range(4):
        detections[str(i)].add(0)
    return ads, {ad_id: AdSkillSet(ad_id, frozenset(c)) for ad_id, c in detections.items()}


def test_distinctiveness_planted_skill():
    ads, detections = planted_corpus()
    rows = distinctiveness(detections, ads, "A", labels={0: "leadership"})
    assert rows[0].cluster_id == 0
    assert rows[0].label == "leadership"
    assert rows[0].pct_in_category == pytest.approx(80.0)
    assert rows[0].pct_overall == pytest.approx(40.0)
    assert rows[0].delta == pytest.approx(40.0)
    # present in every ad: no difference anywhere
    assert rows[1].cluster_id == 1
    assert rows[1].delta == pytest.approx(0.0)
    assert top_distinctive(detections, ads, ["B"], k=1)["B"][0].cluster_id == 1


def test_distinctiveness_unknown_category():
    ads, detections = planted_corpus()
    with pytest.raises(UnknownCategoryError):
        distinctiveness(detections, ads, "Teaching Jobs")


def test_detection_file(tmp_path):
    ads, detections = planted_corpus()
    path = tmp_path / "detections.tsv"
    write_detections(detections, path, header="# test\n")
    assert read_detections(path) == detections


def test_read_detections_bad_cluster(tmp_path):
    path = tmp_path / "detections.tsv"
    path.write_text("ad_id\tclusters\n1\t0,2\n2\t1,x\n", encoding="utf-8")
    with pytest.raises(SchemaError) as e:
        read_detections(path)
    assert "row 2" in e.value.message and "clusters" in e.value.message
