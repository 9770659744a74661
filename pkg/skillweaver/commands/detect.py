from pathlib import Path
from ..config import PipelineConfig
from ..utils.clustering import read_clusters
from ..utils.corpus import check_unique_ids, load_ads, load_stopwords
from ..utils.detection import compile_patterns, detect_corpus, load_competence_terms, summarize_detections, write_detections
from ..utils.lexicon import read_lexicon
from ..utils.reports import RunManifest, write_json
from . import CLUSTERS_FILE, DETECTIONS_FILE, LEXICON_FILE, require_input, require_output, stage

COMMAND = "detect"


def register(subparsers) -> None:
    parser = subparsers.add_parser(COMMAND, help="find skill clusters in every job ad")
    parser.add_argument("--max-gap", dest="max_gap", type=int, help="extra non-stopword words allowed before each pattern token")
    parser.add_argument("--competence-terms", dest="competence_terms", type=Path)
    parser.add_argument("--min-skills", dest="min_skills", type=int)
    parser.set_defaults(handler=lambda config, args: run(config))


def run(config: PipelineConfig) -> RunManifest:
    manifest = RunManifest.start(COMMAND, config)
    output_dir = Path(config.output_dir)
    lexicon_path = require_output(config, LEXICON_FILE, "build-lexicon")
    clusters_path = require_output(config, CLUSTERS_FILE, "build-lexicon")
    corpus_path = require_input(config, "corpus", COMMAND)
    for path in (lexicon_path, clusters_path, corpus_path, config.stopwords, config.competence_terms):
        manifest.add_input(path)

    with stage("load"):
        ads, load_report = load_ads(corpus_path, config.corpus_format)
        check_unique_ids(ads)
        stopwords = load_stopwords(config.stopwords)
        clusters = read_clusters(clusters_path)
        keep = {phrase.phrase: phrase.keep_competence for phrase in read_lexicon(lexicon_path)}

    with stage("detect"):
        patterns = compile_patterns(clusters, load_competence_terms(config.competence_terms), stopwords, keep)
        detections = detect_corpus(ads, patterns, stopwords, config.max_gap)
        summary = summarize_detections(detections, config.min_skills)

    with stage("write"):
        write_detections(detections, output_dir / DETECTIONS_FILE, header=manifest.header())
        manifest.add_output(output_dir / DETECTIONS_FILE)
        write_json({
            "max_gap": config.max_gap,
            "patterns": len(patterns),
            "ads": summary.ads,
            "rejected_rows": load_report.rejected,
            "with_any": summary.with_any,
            "with_min_skills": summary.with_three,
            "min_skills": config.min_skills,
            "coverage": summary.coverage,
            "coverage_min_skills": summary.coverage_three,
            "mean_clusters": summary.mean_clusters,
        }, output_dir / "coverage.json", manifest)

    manifest.write(output_dir)
    return manifest
