# Exception hierarchy shared by the library and the CLI


class QilineError(Exception):
    """Base class for every error raised by qiline."""


class MapSyntaxError(QilineError):
    """A map expression could not be parsed."""

    def __init__(self, message, position):
        self.position = position
        super().__init__(f"{message} at position {position}")


class InvariantViolation(QilineError):
    """A value breaks one of its structural constraints."""

    def __init__(self, constraint):
        self.constraint = constraint
        super().__init__(constraint)


class DomainViolation(QilineError):
    """Evaluation requested outside the region where a map is defined."""

    def __init__(self, x, threshold, what="germ domain"):
        self.x = x
        self.threshold = threshold
        super().__init__(f"x={x!r} lies below the {what} threshold {threshold!r}")


class ConvergenceFailure(QilineError):
    pass


class NotFullLineError(QilineError):
    def __init__(self, expr_text):
        self.expr_text = expr_text
        super().__init__(f"{expr_text} is only defined as a germ at +infinity")


class DegenerateGrid(QilineError):
    pass


class PreconditionError(QilineError):
    pass


class NoWitnessError(QilineError):
    """No displacement above the witness threshold was found on the grid."""

    def __init__(self, expr_text, max_displacement, threshold):
        self.expr_text = expr_text
        self.max_displacement = max_displacement
        self.threshold = threshold
        super().__init__(
            f"no witness for {expr_text}: max |f(x)-x| = {max_displacement:.6g} "
            f"does not exceed {threshold:g}"
        )


class ClassificationAbort(QilineError):
    """A map changes the sign of its displacement along a witness tail."""

    def __init__(self, expr_text, stage, evidence):
        self.expr_text = expr_text
        self.stage = stage
        self.evidence = evidence
        super().__init__(f"cannot assign a sign to {expr_text} at stage {stage}")


class BudgetExceeded(QilineError):
    pass


class FixedPointEncountered(QilineError):
    def __init__(self, location):
        self.location = location
        super().__init__(f"orbit stalls at a fixed point near x={location!r}")


class NonCommutingError(QilineError):
    pass


class OrbitCollision(QilineError):
    def __init__(self, first_word, second_word, x):
        self.words = (first_word, second_word)
        self.x = x
        super().__init__(f"words {first_word} and {second_word} both reach x={x!r}")


class OverlappingIntervals(QilineError):
    pass


class ReportWriteError(QilineError):
    pass


class InexactExpression(QilineError):
    """An expression outside the exact rational subsystem was given to an exact operation."""

    def __init__(self, expr_text):
        self.expr_text = expr_text
        super().__init__(f"{expr_text} has no exact rational evaluation")
