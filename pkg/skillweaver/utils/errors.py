from pathlib import Path
from typing import Iterable, Optional, Union


class SkillweaverError(Exception):
    """Base of every pipeline error; whoever handles one logs it."""

    exit_code = 1

    def __init__(self, message):
        self.message = message
        super().__init__(self.message)

##############################################################################################
###                                    Validation Errors                                   ###
##############################################################################################

class SchemaError(SkillweaverError):
    """A table is missing columns, cannot be parsed or holds a value of the wrong type."""

    def __init__(self, path: Union[str, Path], missing: Iterable[str] = (), reason: Optional[str] = None):
        self.path = path
        self.missing = sorted(missing)
        super().__init__(f"{path}: {reason or 'missing column(s) ' + ', '.join(self.missing)}")


class ConfigurationError(SkillweaverError):
    pass


class PatternError(SkillweaverError):
    def __init__(self, phrase: str):
        self.phrase = phrase
        super().__init__(f"Skill phrase '{phrase}' has no tokens left after removing competence terms and stopwords")


class EmbeddingParseError(SkillweaverError):
    def __init__(self, path: Union[str, Path], line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"{path}, line {line_number}: {reason}")


class LexiconEditError(SkillweaverError):
    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        super().__init__(f"Lexicon edit script, line {line_number}: {reason}")


class ClusterEditError(SkillweaverError):
    def __init__(self, index: int, reason: str):
        self.index = index
        super().__init__(f"Cluster edit directive #{index}: {reason}")


class ClusteringError(SkillweaverError):
    pass


class UnknownCategoryError(SkillweaverError):
    def __init__(self, category: str):
        self.category = category
        super().__init__(f"Unknown job category '{category}'")


class UnmappedCategoryError(SkillweaverError):
    def __init__(self, categories: Iterable[str]):
        self.categories = sorted(categories)
        super().__init__(f"Categories missing from the gender map: {', '.join(self.categories)}")


class DuplicateAdError(SkillweaverError):
    def __init__(self, ad_id: str):
        self.ad_id = ad_id
        super().__init__(f"Duplicate ad id '{ad_id}'")


class SampleSizeError(SkillweaverError):
    def __init__(self, sizes):
        super().__init__(f"Each sample needs at least 2 observations, got sizes {tuple(sizes)}")


class PreconditionError(SkillweaverError):
    pass


class PhraseRejected(SkillweaverError):
    def __init__(self, text: str, reason: str):
        self.reason = reason
        super().__init__(f"Rejected skill submission '{text}': {reason}")


class NoSubmissionsError(SkillweaverError):
    def __init__(self, path: Union[str, Path]):
        super().__init__(f"no submissions in {path}")


class MissingPrerequisiteError(SkillweaverError):
    def __init__(self, path: Union[str, Path], command: str):
        self.command = command
        super().__init__(f"{path} not found; run 'skillweaver {command}' first")

##############################################################################################
###                                   No-data Signals                                      ###
##############################################################################################

class NoDataError(SkillweaverError):
    """Raised where an item has nothing to compute on; callers usually skip the item."""


class NoSalaryError(NoDataError):
    def __init__(self, ad_id: str):
        super().__init__(f"Ad '{ad_id}' has no salary")


class EmptyTitleError(NoDataError):
    def __init__(self, title: str):
        super().__init__(f"Title '{title}' consists only of stopwords")

##############################################################################################
###                                       I/O Errors                                       ###
##############################################################################################

class InputFileError(SkillweaverError):
    exit_code = 2

    def __init__(self, path: Union[str, Path], reason: str = "file not found"):
        self.path = path
        super().__init__(f"{path}: {reason}")
