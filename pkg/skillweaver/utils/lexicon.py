import math
from collections import defaultdict
from dataclasses import replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union
import numpy as np
from nltk.metrics.distance import edit_distance
from pydantic import ValidationError
from ..config import logger, ADJECTIVES_FILE
from ..models import AnnotationRecord, FilterReport, JobAd, RawSkillSubmission, SkillPhrase, Snippet, Vote
from .corpus import TOKEN_RE, parse_cell, read_table, read_word_list, tokenize
from .errors import LexiconEditError, PhraseRejected, PreconditionError

SNIPPET_CONTEXT = 25
LEXICON_COLUMNS = ["phrase", "token_count", "confidence", "cluster_id", "keep_competence"]


def default_adjectives() -> Set[str]:
    return set(read_word_list(ADJECTIVES_FILE))

##############################################################################################
###                                        Cleaning                                        ###
##############################################################################################

def _strip_adjectives(tokens: List[str], adjectives: Sequence[Tuple[str, ...]]) -> List[str]:
    stripped = True
    while stripped and tokens:
        stripped = False
        for adjective in adjectives:
            if tuple(tokens[:len(adjective)]) == adjective:
                tokens = tokens[len(adjective):]
                stripped = True
                break
    return tokens


def _deletions(word: str) -> Set[str]:
    return {word[:i] + word[i + 1:] for i in range(len(word))}


class TypoCorrector:
    """Whitelist lookup for edit-distance-1 typo correction.

    Every whitelist word is indexed under itself and its single-character deletions;
    two words one edit apart always share a key, so a lookup only measures the
    distance to the few words found under the token's own keys.
    """

    def __init__(self, whitelist: Iterable[str] = ()):
        self.words = frozenset(token for word in whitelist for token in tokenize(word).tokens)
        self._index: Dict[str, Set[str]] = defaultdict(set)
        for word in self.words:
            for key in _deletions(word) | {word}:
                self._index[key].add(word)

    def __bool__(self) -> bool:
        return bool(self.words)

    def __contains__(self, token: str) -> bool:
        return token in self.words

    def correct(self, token: str) -> Optional[str]:
        """Return the unique whitelist token within edit distance 1, else None."""
        nearby = set()
        for key in _deletions(token) | {token}:
            nearby.update(self._index.get(key, ()))
        candidates = [word for word in nearby if edit_distance(token, word) == 1]
        if len(candidates) == 1:
            return candidates[0]
        return None


def clean_phrase(raw: Union[RawSkillSubmission, str], adjective_list: Optional[Iterable[str]] = None,
                 whitelist: Optional[Union[TypoCorrector, Iterable[str]]] = None) -> SkillPhrase:
    """Normalise one crowd-submitted phrase.

    Case-folds, drops punctuation and extra whitespace, corrects tokens outside the
    whitelist to the single whitelist token one edit away, then strips leading
    superfluous adjectives. Tokens that cannot be corrected unambiguously leave the
    phrase flagged with needs_review. Cleaning a cleaned phrase returns it unchanged.

    Raises:
        PhraseRejected when nothing is left after cleaning
    """
    text = raw.text if isinstance(raw, RawSkillSubmission) else raw
    adjectives = sorted(
        (tuple(tokenize(adjective).tokens) for adjective in (adjective_list if adjective_list is not None else default_adjectives())),
        key=len,
        reverse=True,
    )
    corrector = whitelist if isinstance(whitelist, TypoCorrector) else TypoCorrector(whitelist or ())

    tokens = list(tokenize(text).tokens)
    unresolved = [False] * len(tokens)
    if corrector:
        for i, token in enumerate(tokens):
            if token in corrector:
                continue
            replacement = corrector.correct(token)
            if replacement is None:
                unresolved[i] = True
            else:
                logger.debug(f"Corrected '{token}' to '{replacement}' in '{text}'")
                tokens[i] = replacement

    # after correction, so a misspelt adjective is stripped as well
    kept = _strip_adjectives(tokens, [a for a in adjectives if a])
    if not kept:
        raise PhraseRejected(text, "empty after cleaning")
    needs_review = any(unresolved[len(tokens) - len(kept):])
    return SkillPhrase(phrase=" ".join(kept), token_count=len(kept), needs_review=needs_review)


def clean_submissions(submissions: Iterable[RawSkillSubmission], adjective_list=None, whitelist=None) -> Tuple[List[SkillPhrase], List[Tuple[str, List[str]]]]:
    """Clean every submission and dedupe by phrase.

    Returns:
        The distinct phrases in first-seen order, and the per-ad phrase lists
        (in submission order) used by the discovery curve.
    """
    adjectives = list(adjective_list) if adjective_list is not None else sorted(default_adjectives())
    corrector = TypoCorrector(whitelist or ())
    phrases: Dict[str, SkillPhrase] = {}
    per_ad: Dict[str, List[str]] = {}
    rejected = 0
    for submission in submissions:
        per_ad.setdefault(submission.source_ad, [])
        try:
            phrase = clean_phrase(submission, adjectives, corrector)
        except PhraseRejected as e:
            logger.debug(e.message)
            rejected += 1
            continue
        if phrase.phrase in phrases:
            previous = phrases[phrase.phrase]
            phrase = replace(previous, needs_review=previous.needs_review and phrase.needs_review)
        phrases[phrase.phrase] = phrase
        per_ad[submission.source_ad].append(phrase.phrase)
    flagged = sum(1 for phrase in phrases.values() if phrase.needs_review)
    logger.info(f"Cleaned submissions into {len(phrases)} distinct phrases ({rejected} rejected, {flagged} flagged for review)")
    return list(phrases.values()), list(per_ad.items())

##############################################################################################
###                                      Manual Curation                                   ###
##############################################################################################

def parse_lexicon_edits(text: str) -> List[Tuple[int, str, str, Optional[str]]]:
    """Parse `drop <phrase>`, `keep <phrase>` and `rewrite <phrase> -> <phrase>` lines."""
    directives = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        verb, _, rest = line.partition(" ")
        rest = rest.strip()
        if verb == "rewrite":
            source, arrow, target = rest.partition("->")
            if not arrow or not source.strip() or not target.strip():
                raise LexiconEditError(line_number, "expected 'rewrite <phrase> -> <phrase>'")
            directives.append((line_number, verb, " ".join(tokenize(source).tokens), target.strip()))
        elif verb in ("drop", "keep"):
            if not rest:
                raise LexiconEditError(line_number, f"'{verb}' needs a phrase")
            directives.append((line_number, verb, " ".join(tokenize(rest).tokens), None))
        else:
            raise LexiconEditError(line_number, f"unknown directive '{verb}'")
    return directives


def apply_lexicon_edits(phrases: Iterable[SkillPhrase], script: str) -> List[SkillPhrase]:
    """Replay a curation script over cleaned phrases, in order.

    `keep` approves a phrase flagged for review; `rewrite` renames a phrase,
    merging into the target if it already exists.
    """
    current: Dict[str, SkillPhrase] = {phrase.phrase: phrase for phrase in phrases}
    for line_number, verb, source, target in parse_lexicon_edits(script):
        if source not in current:
            raise LexiconEditError(line_number, f"phrase '{source}' is not in the lexicon")
        if verb == "drop":
            del current[source]
        elif verb == "keep":
            current[source] = replace(current[source], needs_review=False)
        else:
            tokens = tokenize(target).tokens
            if not tokens:
                raise LexiconEditError(line_number, f"rewrite target '{target}' is empty")
            new_phrase = " ".join(tokens)
            del current[source]
            if new_phrase not in current:
                current[new_phrase] = SkillPhrase(phrase=new_phrase, token_count=len(tokens))
    logger.info(f"Lexicon edits left {len(current)} phrases")
    return list(current.values())

##############################################################################################
###                                     Snippets & Votes                                   ###
##############################################################################################

def _occurrences(phrase_tokens: Tuple[str, ...], ad_tokens: Tuple[str, ...]) -> List[int]:
    width = len(phrase_tokens)
    first = phrase_tokens[0]
    return [
        i for i in range(len(ad_tokens) - width + 1)
        if ad_tokens[i] == first and ad_tokens[i:i + width] == phrase_tokens
    ]


def extract_snippets(skill: Union[SkillPhrase, str], corpus: Iterable[JobAd], n: int = 10, seed: int = 0,
                     context: int = SNIPPET_CONTEXT) -> List[Snippet]:
    """Sample up to n occurrences of a skill with `context` words on each side.

    Occurrences are collected in corpus order and sampled without replacement with
    a seeded generator, so the result is reproducible.
    """
    phrase = skill.phrase if isinstance(skill, SkillPhrase) else skill
    phrase_tokens = tokenize(phrase).tokens
    if not phrase_tokens:
        return []
    found = []
    for ad in corpus:
        sequence = tokenize(ad.description)
        for start in _occurrences(phrase_tokens, sequence.tokens):
            found.append((ad, sequence, start))
    if len(found) > n:
        rng = np.random.default_rng(seed)
        chosen = sorted(rng.choice(len(found), size=n, replace=False).tolist())
        found = [found[i] for i in chosen]

    snippets = []
    for ad, sequence, start in found:
        first = max(0, start - context)
        last = min(len(sequence) - 1, start + len(phrase_tokens) - 1 + context)
        begin = sequence.offsets[first]
        end = TOKEN_RE.match(ad.description, sequence.offsets[last]).end()
        snippets.append(Snippet(skill=phrase, ad_id=ad.id, window=ad.description[begin:end], start_token=start))
    return snippets


def load_annotations(path: Union[str, Path]) -> List[AnnotationRecord]:
    """Crowd votes on snippets; rows with an unknown vote or a trust outside (0, 1] are skipped."""
    frame = read_table(path, ("skill", "snippet_id", "worker_id", "vote", "trust"))
    records = []
    skipped = 0
    for row in frame.to_dict("records"):
        try:
            records.append(AnnotationRecord(
                skill=" ".join(tokenize(row["skill"]).tokens),
                snippet_id=row["snippet_id"],
                worker_id=row["worker_id"],
                vote=Vote.parse(row["vote"]),
                trust=float(row["trust"]),
            ))
        except (ValueError, ValidationError) as e:
            skipped += 1
            logger.warning(f"Skipping annotation row {row}: {e}")
    logger.info(f"Loaded {len(records)} annotation records ({skipped} skipped)")
    return records


def compute_confidence(records: Sequence[AnnotationRecord]) -> float:
    """Trust-weighted share of Candidate votes, pooled over all snippets of one skill."""
    if not records:
        raise PreconditionError("compute_confidence needs at least one annotation record")
    total = math.fsum(record.trust for record in records)
    candidate = math.fsum(record.trust for record in records if record.vote is Vote.candidate)
    return candidate / total


def score_lexicon(phrases: Iterable[SkillPhrase], records: Iterable[AnnotationRecord], max_tokens: int = 3) -> List[SkillPhrase]:
    """Attach confidence scores to phrases of at most `max_tokens` tokens that were annotated."""
    by_skill = defaultdict(list)
    for record in records:
        by_skill[record.skill].append(record)
    scored = []
    for phrase in phrases:
        if phrase.token_count <= max_tokens and by_skill.get(phrase.phrase):
            phrase = phrase.with_confidence(compute_confidence(by_skill[phrase.phrase]))
        scored.append(phrase)
    return scored


def filter_lexicon(skills: Iterable[SkillPhrase], threshold: float = 0.7, max_scored_tokens: int = 3) -> FilterReport:
    """Keep skills whose confidence reaches the threshold, and every skill longer than
    `max_scored_tokens` tokens. Short skills without a score are left out.
    """
    skills = list(skills)
    retained = []
    report = FilterReport(retained=retained)
    scored_by_length = defaultdict(int)
    discarded_by_length = defaultdict(int)
    for skill in skills:
        if skill.token_count > max_scored_tokens:
            retained.append(skill)
            continue
        if not skill.scored:
            report.unscored_short += 1
            continue
        report.scored += 1
        scored_by_length[skill.token_count] += 1
        if skill.confidence >= threshold:
            retained.append(skill)
            report.scored_retained += 1
        else:
            discarded_by_length[skill.token_count] += 1
    report.discarded_by_length = {
        length: discarded_by_length[length] / count for length, count in sorted(scored_by_length.items())
    }
    if report.unscored_short:
        logger.warning(f"{report.unscored_short} short skills carry no confidence score and were left out")
    logger.info(f"Confidence filter at {threshold}: retained {report.retention:.1%} of {report.scored} scored skills")
    return report


def discovery_curve(annotated_ads: Iterable[Tuple[object, Iterable[str]]]) -> List[Tuple[int, int]]:
    """Cumulative number of distinct skills after each annotated ad."""
    seen = set()
    curve = []
    for index, (_, skills) in enumerate(annotated_ads, start=1):
        seen.update(skills)
        curve.append((index, len(seen)))
    return curve

##############################################################################################
###                                         Lexicon I/O                                    ###
##############################################################################################

def load_submissions(path: Union[str, Path]) -> List[RawSkillSubmission]:
    frame = read_table(path, ("text", "source_ad"))
    submissions = []
    for row in frame.to_dict("records"):
        if row["text"].strip():
            submissions.append(RawSkillSubmission(text=row["text"], source_ad=row["source_ad"]))
    return submissions


def _optional(convert):
    return lambda raw: convert(raw) if raw else None


def _flag(value: Optional[bool]) -> str:
    return "" if value is None else ("1" if value else "0")


def write_lexicon(phrases: Iterable[SkillPhrase], path: Union[str, Path], header: Optional[str] = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        if header:
            f.write(header)
        f.write("\t".join(LEXICON_COLUMNS) + "\n")
        for phrase in sorted(phrases, key=lambda p: (p.cluster_id if p.cluster_id is not None else math.inf, p.phrase)):
            confidence = "" if phrase.confidence is None else f"{phrase.confidence:.6f}"
            cluster = "" if phrase.cluster_id is None else str(phrase.cluster_id)
            f.write(f"{phrase.phrase}\t{phrase.token_count}\t{confidence}\t{cluster}\t{_flag(phrase.keep_competence)}\n")


def read_lexicon(path: Union[str, Path]) -> List[SkillPhrase]:
    frame = read_table(path, ("phrase", "cluster_id"), sep="\t", comment="#")
    phrases = []
    for row_number, row in enumerate(frame.to_dict("records"), start=1):
        tokens = tokenize(row["phrase"]).tokens
        keep = row.get("keep_competence", "").strip()
        confidence = row.get("confidence", "").strip()
        cluster = row["cluster_id"].strip()
        phrases.append(SkillPhrase(
            phrase=" ".join(tokens),
            token_count=len(tokens),
            confidence=parse_cell(path, row_number, "confidence", confidence, _optional(float)),
            keep_competence=None if not keep else keep.lower() in ("1", "true", "yes", "keep"),
            cluster_id=parse_cell(path, row_number, "cluster_id", cluster, _optional(int)),
        ))
    return phrases
