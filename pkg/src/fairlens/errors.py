"""Exception types shared across the package."""


class FairlensError(Exception):
    """Base class for all package errors."""


class UnknownCategory(FairlensError):
    def __init__(self, feature, value):
        super().__init__(f"unknown category {value!r} for feature {feature!r}")
        self.feature = feature
        self.value = value


class MissingColumn(FairlensError):
    pass


class NonNumericCell(FairlensError):
    pass


class EmptyDataset(FairlensError):
    pass


class NoMembers(FairlensError):
    def __init__(self, group):
        super().__init__(f"sensitive group {group} has no members")
        self.group = group


class InvalidMask(FairlensError):
    pass


class SingleClassData(FairlensError):
    pass


class DimensionMismatch(FairlensError):
    pass


class LengthMismatch(FairlensError):
    pass


class UndefinedRate(FairlensError):
    pass


class InvalidBounds(FairlensError):
    pass


class NotFound(FairlensError):
    pass


class CorruptRecord(FairlensError):
    pass
