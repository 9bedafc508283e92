class ParameterError(ValueError):
    """An argument violates an operation's precondition."""


class ConstructionError(ValueError):
    """A set construction is geometrically inconsistent (e.g. overlapping cells)."""


class SimulationError(RuntimeError):
    """A simulator could not produce a valid path."""


class BudgetExceeded(RuntimeError):
    pass
