"""Exception hierarchy shared by the library and the CLI exit-code contract."""


class QmFormsError(Exception):
    """Base class for all errors raised by qmforms."""


class ValidationError(QmFormsError, ValueError):
    """Input violates a documented precondition (CLI exit code 2)."""


class WordSyntaxError(ValidationError):
    def __init__(self, message, offset):
        super().__init__(f"{message} at byte offset {offset}")
        self.offset = offset


class GeneratorRangeError(ValidationError):
    pass


class RankMismatchError(ValidationError):
    pass


class NotInCommutatorSubgroupError(ValidationError):
    pass


class ResourceLimitError(QmFormsError):
    """A configured size cap would be exceeded (CLI exit code 3)."""
