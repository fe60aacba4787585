"""Exception hierarchy.

Every error carries a stable ``code`` used by the CLI when it reports
failures as JSON on standard error.
"""

from __future__ import annotations


class SnowcertError(Exception):
    code = "snowcert_error"

    def details(self) -> dict:
        return {}

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self), "details": self.details()}


# -- metric validation -------------------------------------------------------


class MetricError(SnowcertError, ValueError):
    code = "invalid_metric"


class NotSquare(MetricError):
    code = "not_square"


class ShapeMismatch(MetricError):
    code = "shape_mismatch"


class NonFiniteEntry(MetricError):
    code = "non_finite_entry"

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"entry ({i}, {j}) is not finite")

    def details(self):
        return {"i": self.i, "j": self.j}


class Asymmetric(MetricError):
    code = "asymmetric"

    def __init__(self, i: int, j: int, gap: float):
        self.i, self.j, self.gap = i, j, gap
        super().__init__(f"d[{i}][{j}] != d[{j}][{i}] (gap {gap:.3g})")

    def details(self):
        return {"i": self.i, "j": self.j, "gap": self.gap}


class NegativeEntry(MetricError):
    code = "negative_entry"

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"d[{i}][{j}] is negative")

    def details(self):
        return {"i": self.i, "j": self.j}


class NonzeroDiagonal(MetricError):
    code = "nonzero_diagonal"

    def __init__(self, i: int):
        self.i = i
        super().__init__(f"d[{i}][{i}] is not zero")

    def details(self):
        return {"i": self.i}


class TriangleViolation(MetricError):
    code = "triangle_violation"

    def __init__(self, i: int, j: int, m: int, slack: float):
        self.i, self.j, self.m, self.slack = i, j, m, slack
        super().__init__(
            f"d[{i}][{j}] exceeds d[{i}][{m}] + d[{m}][{j}] by {slack:.6g}"
        )

    def details(self):
        return {"i": self.i, "j": self.j, "m": self.m, "slack": self.slack}


class DuplicatePoints(MetricError):
    code = "duplicate_points"

    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"points {i} and {j} are at distance 0")

    def details(self):
        return {"i": self.i, "j": self.j}


# -- parameter errors --------------------------------------------------------


class ParameterError(SnowcertError, ValueError):
    code = "invalid_parameter"


class AlphaOutOfRange(ParameterError):
    code = "alpha_out_of_range"


class BetaOutOfRange(ParameterError):
    code = "beta_out_of_range"


class NonpositiveScale(ParameterError):
    code = "nonpositive_scale"


class IndexOutOfRange(ParameterError, IndexError):
    code = "index_out_of_range"


class SizeOverflow(ParameterError):
    code = "size_overflow"


class ResolutionTooSmall(ParameterError):
    code = "resolution_too_small"


class CapTooSmall(ParameterError):
    code = "cap_too_small"


# -- search errors -----------------------------------------------------------


class SearchError(SnowcertError):
    code = "search_error"


class NoAdmissibleChain(SearchError):
    code = "no_admissible_chain"


class BudgetExhausted(SearchError):
    """Exact search stopped before completing.

    ``alpha_bound`` is the best value seen so far (an upper bound on the
    true optimum) and ``chain`` the chain attaining it, or ``None``.
    """

    code = "budget_exhausted"

    def __init__(self, message, alpha_bound=None, chain=None, chains_examined=0):
        super().__init__(message)
        self.alpha_bound = alpha_bound
        self.chain = chain
        self.chains_examined = chains_examined

    def details(self):
        return {
            "alpha_bound": self.alpha_bound,
            "chain": None if self.chain is None else list(self.chain),
            "chains_examined": self.chains_examined,
            "certified": False,
        }


class CertificationUnavailable(SearchError):
    code = "certification_unavailable"


class RegimeMismatch(SearchError):
    code = "regime_mismatch"


class ReportInvariantError(SnowcertError):
    code = "report_invariant"


class FormatError(SnowcertError, ValueError):
    code = "format_error"
