"""Exception hierarchy shared by all modules."""


class BCPError(Exception):
    """Base class for every error raised by this package."""


class ParseError(BCPError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class PopulationTooSmall(BCPError):
    pass


class NotEnabled(BCPError):
    pass


class EmptyConfiguration(BCPError):
    pass


class BudgetExceeded(BCPError):
    def __init__(self, explored, budget, what="configurations"):
        super().__init__(f"explored {explored} {what}, budget is {budget}")
        self.explored = explored
        self.budget = budget


class ArityMismatch(BCPError):
    pass


class MissingBoundDeclaration(BCPError):
    pass


class CounterCountTooLarge(BCPError):
    pass


class NotNBounded(BCPError):
    pass


class AlphabetMismatch(BCPError):
    pass


class NoLeaders(BCPError):
    pass


class UnknownName(BCPError):
    pass


class InvalidProtocol(BCPError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class BoundExceeded(BudgetExceeded):
    """Exploration left the counter range promised by the declared bound."""

    def __init__(self, config, bound):
        BCPError.__init__(self, f"reached {config}, outside declared bound {bound}")
        self.config = config
        self.explored = None
        self.budget = bound
