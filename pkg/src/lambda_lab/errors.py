class TheoremViolation(ArithmeticError):
    """Computed data contradicts a proven identity; never expected in practice."""


class PrecisionError(ArithmeticError):
    """Not enough p-adic precision to decide a question."""
