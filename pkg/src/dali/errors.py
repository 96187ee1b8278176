"""Exception hierarchy.

Every error raised on purpose by the toolkit derives from :class:`DaliError`.
Each class carries an ``exit_code`` used by the command line driver, so a
failing stage can be told apart by its status alone.
"""


class DaliError(Exception):
    exit_code = 1


class ParameterError(DaliError, ValueError):
    exit_code = 2


class ParseError(DaliError, ValueError):
    exit_code = 3

    def __init__(self, message, lineno=None, path=None):
        where = ""
        if path is not None:
            where += f"{path}:"
        if lineno is not None:
            where += f"{lineno}:"
        super().__init__(f"{where} {message}" if where else message)
        self.lineno = lineno
        self.path = path


class DataError(DaliError, ValueError):
    """Values are well formed but unusable (non-finite, out of range, ...)."""

    exit_code = 4


class RangeError(DataError):
    pass


class DegenerateVectorError(DataError):
    pass


class AlignmentError(DaliError):
    """Two inputs that must be line-aligned are not."""

    exit_code = 5


class EmptyError(DaliError):
    exit_code = 6


class EmptyCorpusError(EmptyError):
    pass


class EmptyVocabularyError(EmptyError):
    pass


class EmptyLexiconError(EmptyError):
    pass


class EmptyOverlapError(EmptyError):
    pass


class RefinementFailedError(DaliError):
    exit_code = 7


class DependencyError(DaliError):
    """A pipeline stage was asked to run before the stage it depends on."""

    exit_code = 8


class LockError(DaliError):
    exit_code = 9
