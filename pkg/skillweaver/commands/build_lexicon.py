from dataclasses import replace
from pathlib import Path
from ..config import logger, PipelineConfig
from ..utils.clustering import apply_cluster_edits, build_cluster_set, write_clusters
from ..utils.corpus import load_ads, load_stopwords, read_word_list
from ..utils.embeddings import embed_phrases, load_embeddings, phrase_vocabulary
from ..utils.errors import NoSubmissionsError
from ..utils.lexicon import (
    apply_lexicon_edits,
    clean_submissions,
    discovery_curve,
    extract_snippets,
    filter_lexicon,
    load_annotations,
    load_submissions,
    score_lexicon,
    write_lexicon,
)
from ..utils.reports import RunManifest, write_json, write_tsv
from . import CLUSTERS_FILE, LEXICON_FILE, require_input, stage

COMMAND = "build-lexicon"
SNIPPET_MAX_TOKENS = 3


def register(subparsers) -> None:
    parser = subparsers.add_parser(COMMAND, help="clean, score, filter and cluster crowd-sourced skill phrases")
    parser.add_argument("--submissions", type=Path, help="CSV of raw phrases (text, source_ad)")
    parser.add_argument("--annotations", type=Path, help="CSV of crowd votes (skill, snippet_id, worker_id, vote, trust)")
    parser.add_argument("--embeddings", type=Path, help="word2vec text or .bin file")
    parser.add_argument("--whitelist", type=Path, help="word list used to correct typos")
    parser.add_argument("--lexicon-edits", dest="lexicon_edits", type=Path)
    parser.add_argument("--cluster-edits", dest="cluster_edits", type=Path)
    parser.add_argument("--confidence", type=float)
    parser.add_argument("--cluster-target", dest="cluster_target", type=int)
    parser.add_argument("--snippets-per-skill", dest="snippets_per_skill", type=int)
    parser.set_defaults(handler=lambda config, args: run(config))


def run(config: PipelineConfig) -> RunManifest:
    manifest = RunManifest.start(COMMAND, config)
    output_dir = Path(config.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    submissions_path = require_input(config, "submissions", COMMAND)
    annotations_path = require_input(config, "annotations", COMMAND)
    embeddings_path = require_input(config, "embeddings", COMMAND)
    for path in (submissions_path, annotations_path, embeddings_path, config.whitelist,
                 config.lexicon_edits, config.cluster_edits, config.stopwords):
        manifest.add_input(path)

    with stage("clean"):
        submissions = load_submissions(submissions_path)
        if not submissions:
            raise NoSubmissionsError(submissions_path)
        whitelist = read_word_list(config.whitelist) if config.whitelist else None
        phrases, per_ad = clean_submissions(submissions, whitelist=whitelist)
        if config.lexicon_edits:
            phrases = apply_lexicon_edits(phrases, Path(config.lexicon_edits).read_text(encoding="utf-8"))
        pending = [phrase.phrase for phrase in phrases if phrase.needs_review]
        if pending:
            logger.warning(f"{len(pending)} phrases still need review: {', '.join(pending[:10])}")

    with stage("score"):
        records = load_annotations(annotations_path)
        report = filter_lexicon(score_lexicon(phrases, records), config.confidence)

    with stage("cluster"):
        stopwords = load_stopwords(config.stopwords)
        table = load_embeddings(embeddings_path, vocabulary=phrase_vocabulary(report.retained, stopwords))
        vectors, uncovered = embed_phrases(report.retained, table, stopwords)
        clusters = build_cluster_set(vectors, uncovered, config.cluster_target)
        if config.cluster_edits:
            clusters = apply_cluster_edits(clusters, Path(config.cluster_edits).read_text(encoding="utf-8"))

    with stage("write"):
        membership = clusters.membership()
        lexicon = [replace(phrase, cluster_id=membership[phrase.phrase]) for phrase in report.retained]
        write_lexicon(lexicon, output_dir / LEXICON_FILE, header=manifest.header())
        manifest.add_output(output_dir / LEXICON_FILE)
        write_clusters(clusters, output_dir / CLUSTERS_FILE, header=manifest.header())
        manifest.add_output(output_dir / CLUSTERS_FILE)
        write_tsv(
            ({"annotated_ads": ads, "distinct_skills": skills} for ads, skills in discovery_curve(per_ad)),
            output_dir / "discovery_curve.tsv", manifest, columns=["annotated_ads", "distinct_skills"],
        )
        write_json({
            "submissions": len(submissions),
            "distinct_phrases": len(phrases),
            "needs_review": pending,
            "threshold": config.confidence,
            "scored": report.scored,
            "scored_retained": report.scored_retained,
            "retention": report.retention,
            "unscored_short": report.unscored_short,
            "discarded_by_length": {str(length): share for length, share in report.discarded_by_length.items()},
            "retained": len(report.retained),
            "clusters": len(clusters),
            "phrases_without_vectors": uncovered,
        }, output_dir / "lexicon_report.json", manifest)

    if config.corpus:
        with stage("snippets"):
            ads, _ = load_ads(config.corpus, config.corpus_format)
            manifest.add_input(config.corpus)
            rows = []
            for phrase in phrases:
                if phrase.token_count > SNIPPET_MAX_TOKENS:
                    continue
                for snippet in extract_snippets(phrase, ads, config.snippets_per_skill, config.seed):
                    rows.append({"skill": snippet.skill, "ad_id": snippet.ad_id, "start_token": snippet.start_token,
                                 "snippet": " ".join(snippet.window.split())})
            write_tsv(rows, output_dir / "snippets.tsv", manifest, columns=["skill", "ad_id", "start_token", "snippet"])

    manifest.write(output_dir)
    return manifest
