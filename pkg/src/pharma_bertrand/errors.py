"""Exception and warning types raised by the model, solver, oracle and CLI."""


class ModelError(Exception):
    """Base class for numerical failures of the pricing model."""


class DegenerateDenominator(ModelError):
    """A threshold or FOC denominator vanished.

    ``name`` is the symbolic denominator, e.g. ``"alpha-1"`` or ``"2alpha-theta-1"``.
    """

    def __init__(self, name, value=0.0):
        self.name = name
        self.value = value
        super().__init__(f"degenerate denominator {name} = {value!r}")


class SingularDenominator(ModelError):
    """The shared denominator of the closed-form prices is zero."""

    def __init__(self, value):
        self.value = value
        super().__init__(
            f"closed-form price denominator m*(2 + 4*alpha*(theta-4) + 11*theta - theta^2) = {value!r}"
        )


class SingularSystem(ModelError):
    def __init__(self, cond):
        self.cond = cond
        super().__init__(f"first-order-condition system is singular (condition number {cond:.3e})")


class TieCase(ModelError):
    """Two compared thresholds coincide, so the demand case is a measure-zero boundary."""

    def __init__(self, left, right, value):
        self.left = left
        self.right = right
        self.value = value
        super().__init__(f"tie between {left} and {right} at {value!r}")


class BracketMiss(ModelError):
    def __init__(self, root, bracket):
        self.root = root
        self.bracket = tuple(bracket)
        super().__init__(f"first-order root {root!r} lies outside bracket {self.bracket}")


class ConditionViolated(UserWarning):
    """alpha <= (1 + theta)/2: the stationary point is not a profit maximum."""


class InvalidSpec(ValueError):
    pass


class InsufficientData(ValueError):
    pass


class ScenarioError(ValueError):
    """Invalid scenario file contents."""


class MissingField(ScenarioError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing field: {name}")


class UnknownField(ScenarioError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"unknown field: {name}")


class FieldTypeError(ScenarioError, TypeError):
    def __init__(self, name, value):
        self.name = name
        super().__init__(f"field {name} must be a number, got {value!r}")
