"""Step skew products over the full 2-shift with interval fiber maps."""

__version__ = "0.1.0"

from .errors import (BudgetExhausted, CommutationViolated, DegenerateRoot, NotFound,  # noqa: E402
                     NumericalError, SkewprodError, ValidationError)
from .fiber import (FiberModel, arctan_model, check_hypotheses, glued_model,  # noqa: E402
                    mobius_model, pld_model, quartic_model)
from .dynamics import SkewSystem, fiber_fixed_points, lyapunov_finite, twin_pair  # noqa: E402

__all__ = [
    "BudgetExhausted", "CommutationViolated", "DegenerateRoot", "NotFound", "NumericalError",
    "SkewprodError", "ValidationError", "FiberModel", "arctan_model", "check_hypotheses",
    "glued_model", "mobius_model", "pld_model", "quartic_model", "SkewSystem",
    "fiber_fixed_points", "lyapunov_finite", "twin_pair",
]
