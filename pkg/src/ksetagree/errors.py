"""Shared exception types."""


class BudgetExceeded(RuntimeError):
    """An enumeration or search exceeded its configured budget.

    Raised instead of silently truncating; callers that want a tri-state
    outcome (e.g. the solvability oracle) catch this and report it.
    """

    def __init__(self, what: str, budget: int) -> None:
        super().__init__(f"{what} exceeded budget of {budget}")
        self.what = what
        self.budget = budget
