from pathlib import Path
from typing import AbstractSet, Dict, Iterable, List, Optional, Tuple, Union
import numpy as np
from ..config import logger
from ..models import EmbeddingTable, PhraseVector, SkillPhrase, StopwordList
from .corpus import tokenize
from .errors import EmbeddingParseError, InputFileError


def _parse_header(path: Path, line: str) -> Tuple[int, int]:
    parts = line.split()
    if len(parts) != 2:
        raise EmbeddingParseError(path, 1, "header must be 'count dimension'")
    try:
        count, dimension = int(parts[0]), int(parts[1])
    except ValueError:
        raise EmbeddingParseError(path, 1, "header must be 'count dimension'")
    if count < 0 or dimension < 1:
        raise EmbeddingParseError(path, 1, f"invalid header '{line.strip()}'")
    return count, dimension


class _TableBuilder:
    """Collects vectors into one float32 matrix, growing it when the header count is short."""

    def __init__(self, count: int, dimension: int, vocabulary: Optional[AbstractSet[str]]):
        capacity = count if vocabulary is None else min(count, len(vocabulary))
        self.dimension = dimension
        self.vocabulary = vocabulary
        self.matrix = np.empty((max(capacity, 1), dimension), dtype=np.float32)
        self.index: Dict[str, int] = {}
        self.duplicates = 0
        self.skipped = 0

    def wanted(self, token: str) -> bool:
        if self.vocabulary is not None and token not in self.vocabulary:
            self.skipped += 1
            return False
        if token in self.index:
            self.duplicates += 1
            return False
        return True

    def add(self, token: str, vector: np.ndarray) -> None:
        row = len(self.index)
        if row == len(self.matrix):
            self.matrix = np.concatenate([self.matrix, np.empty_like(self.matrix)])
        self.matrix[row] = vector
        self.index[token] = row

    def build(self) -> EmbeddingTable:
        return EmbeddingTable(
            dimension=self.dimension,
            index=self.index,
            matrix=self.matrix[:len(self.index)].copy(),
            duplicates=self.duplicates,
            skipped=self.skipped,
        )


def _load_text(path: Path, vocabulary: Optional[AbstractSet[str]]) -> EmbeddingTable:
    with open(path, encoding="utf-8") as f:
        count, dimension = _parse_header(path, f.readline())
        builder = _TableBuilder(count, dimension, vocabulary)
        for line_number, line in enumerate(f, start=2):
            parts = line.split()
            if not parts or not builder.wanted(parts[0]):
                continue
            if len(parts) != dimension + 1:
                raise EmbeddingParseError(path, line_number, f"expected {dimension} components, found {len(parts) - 1}")
            try:
                vector = np.array(parts[1:], dtype=np.float64)
            except ValueError:
                raise EmbeddingParseError(path, line_number, "non-numeric component")
            if not np.all(np.isfinite(vector)):
                raise EmbeddingParseError(path, line_number, "NaN or infinite component")
            builder.add(parts[0], vector)
    return builder.build()


def _load_binary(path: Path, vocabulary: Optional[AbstractSet[str]]) -> EmbeddingTable:
    """word2vec binary layout: ASCII header, then `token<space>` + dim little-endian float32 per entry."""
    with open(path, "rb") as f:
        count, dimension = _parse_header(path, f.readline().decode("utf-8"))
        builder = _TableBuilder(count, dimension, vocabulary)
        width = 4 * dimension
        for index in range(count):
            line_number = index + 2
            token = bytearray()
            while True:
                ch = f.read(1)
                if not ch:
                    raise EmbeddingParseError(path, line_number, "unexpected end of file in token")
                if ch == b" ":
                    break
                if ch != b"\n" or token:
                    token.extend(ch)
            raw = f.read(width)
            if len(raw) != width:
                raise EmbeddingParseError(path, line_number, f"expected {dimension} components, found {len(raw) // 4}")
            word = token.decode("utf-8", errors="replace")
            if not builder.wanted(word):
                continue
            vector = np.frombuffer(raw, dtype="<f4")
            if not np.all(np.isfinite(vector)):
                raise EmbeddingParseError(path, line_number, "NaN or infinite component")
            builder.add(word, vector)
    return builder.build()


def load_embeddings(path: Union[str, Path], binary: Optional[bool] = None,
                    vocabulary: Optional[Iterable[str]] = None) -> EmbeddingTable:
    """Load pretrained word vectors in word2vec text or binary format.

    Parameters:
        path: embedding file.
        binary: force the layout; by default files ending in ``.bin`` are read as binary.
        vocabulary: when given, only these tokens are kept; every other record is
            skipped without being parsed.

    Returns:
        EmbeddingTable holding float32 vectors. When a token repeats, its first
        vector wins and the repeat is counted in ``duplicates``.

    Raises:
        InputFileError when the file is missing, EmbeddingParseError naming the line
        on malformed entries
    """
    path = Path(path)
    if not path.is_file():
        raise InputFileError(path)
    if binary is None:
        binary = path.suffix == ".bin"
    wanted = None if vocabulary is None else frozenset(vocabulary)
    table = _load_binary(path, wanted) if binary else _load_text(path, wanted)
    logger.info(
        f"Loaded {len(table)} embeddings of dimension {table.dimension} from {path.name} "
        f"({table.duplicates} duplicates ignored, {table.skipped} outside the vocabulary skipped)"
    )
    return table


def phrase_vocabulary(phrases: Iterable[Union[SkillPhrase, str]], stopwords: StopwordList) -> List[str]:
    """Non-stopword tokens of the phrases: the only rows embed_phrase will look up."""
    tokens = set()
    for phrase in phrases:
        text = phrase.phrase if isinstance(phrase, SkillPhrase) else phrase
        tokens.update(token for token in tokenize(text).tokens if token not in stopwords)
    return sorted(tokens)


def embed_phrase(phrase: Union[SkillPhrase, str], table: EmbeddingTable, stopwords: StopwordList) -> Optional[PhraseVector]:
    """Average the vectors of the phrase's non-stopword tokens found in the table.

    Returns None when no token is covered; such phrases end up as singleton clusters.
    """
    text = phrase.phrase if isinstance(phrase, SkillPhrase) else phrase
    vectors = [table[token] for token in tokenize(text).tokens if token not in stopwords and token in table]
    if not vectors:
        return None
    return PhraseVector(phrase=text, vector=np.mean(np.asarray(vectors, dtype=np.float64), axis=0), covered_tokens=len(vectors))


def embed_phrases(phrases: Iterable[Union[SkillPhrase, str]], table: EmbeddingTable, stopwords: StopwordList) -> Tuple[List[PhraseVector], List[str]]:
    """Embed every phrase; returns the vectors and the phrases left without one."""
    vectors = []
    uncovered = []
    for phrase in phrases:
        vector = embed_phrase(phrase, table, stopwords)
        if vector is None:
            uncovered.append(phrase.phrase if isinstance(phrase, SkillPhrase) else phrase)
        else:
            vectors.append(vector)
    if uncovered:
        logger.warning(f"{len(uncovered)} phrases have no covered tokens and become singleton clusters")
    return vectors, uncovered
