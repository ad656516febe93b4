"""Exception hierarchy shared by all adjviz modules."""


class AdjvizError(ValueError):
    """Base class for every error raised on bad input data."""


class ParseError(AdjvizError):
    def __init__(self, path, lineno, message):
        self.path = str(path)
        self.lineno = lineno
        super().__init__(f"{self.path}:{lineno}: {message}")


class DuplicateKey(AdjvizError):
    pass


class DuplicateTrial(DuplicateKey):
    pass


class DuplicateClassifierId(AdjvizError):
    pass


class MissingTrial(AdjvizError):
    pass


class NonFiniteScore(AdjvizError):
    pass


class UnmappedTrial(AdjvizError):
    pass


class LengthMismatch(AdjvizError):
    pass


class DegenerateColumn(AdjvizError):
    """Kendall tau is undefined because a column has no untied pair."""

    def __init__(self, message, classifier=None):
        self.classifier = classifier
        super().__init__(message)


class OutOfRange(AdjvizError):
    pass


class InvalidMatrix(AdjvizError):
    pass


class DimensionTooLarge(AdjvizError):
    pass


class MissingLabel(AdjvizError):
    pass


class SingleClass(AdjvizError):
    pass


class EmptyInput(AdjvizError):
    pass


class NonPositiveWeight(AdjvizError):
    pass
