"""2x2 contingency tables: expected counts, Pearson and deviance statistics, risks.

Layout convention: rows are outcome categories (adverse first), columns are
conditions being compared::

             cond 1   cond 2
    adverse     a        b
    other       c        d
"""
import math
from dataclasses import dataclass

from .errors import DegenerateTableError, DomainError
from .special import as_probability, chi2_sf

__all__ = [
    "Table2x2",
    "ExpectedCounts",
    "TestResult",
    "RiskSummary",
    "expected_counts",
    "pearson_chi2_stat",
    "deviance_stat",
    "chi2_test",
    "risk_summary",
]


@dataclass(frozen=True)
class Table2x2:
    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or value < 0:
                raise DomainError(f"cell {name} must be a non-negative integer, got {value!r}")
            object.__setattr__(self, name, int(value))
        if self.total == 0:
            raise DegenerateTableError("table has no observations")

    @classmethod
    def from_rows(cls, row1, row2):
        return cls(row1[0], row1[1], row2[0], row2[1])

    @property
    def cells(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def total(self):
        return self.a + self.b + self.c + self.d

    @property
    def row_totals(self):
        return (self.a + self.b, self.c + self.d)

    @property
    def col_totals(self):
        return (self.a + self.c, self.b + self.d)

    def scaled(self, m):
        return Table2x2(self.a * m, self.b * m, self.c * m, self.d * m)

    def swap_rows(self):
        return Table2x2(self.c, self.d, self.a, self.b)

    def swap_cols(self):
        return Table2x2(self.b, self.a, self.d, self.c)

    def check_margins(self):
        if 0 in self.row_totals or 0 in self.col_totals:
            raise DegenerateTableError(f"table {self.cells} has a zero margin")


@dataclass(frozen=True)
class ExpectedCounts:
    e11: float
    e12: float
    e21: float
    e22: float

    @property
    def cells(self):
        return (self.e11, self.e12, self.e21, self.e22)


@dataclass(frozen=True)
class TestResult:
    statistic: float
    df: float
    p_value: float

    # keep pytest from trying to collect this as a test class
    __test__ = False


@dataclass(frozen=True)
class RiskSummary:
    risk1: float
    risk2: float
    relative_risk: float  # math.inf when risk2 == 0 < risk1; nan when both are zero
    absolute_risk_difference: float


def expected_counts(t):
    """Expected cell counts under independence, row total x column total / N."""
    t.check_margins()
    (r1, r2), (c1, c2), n = t.row_totals, t.col_totals, t.total
    return ExpectedCounts(r1 * c1 / n, r1 * c2 / n, r2 * c1 / n, r2 * c2 / n)


def _pearson(t, correction):
    e = expected_counts(t).cells
    total = 0.0
    for o, ei in zip(t.cells, e):
        diff = abs(o - ei)
        if correction:
            diff = max(0.0, diff - 0.5)
        total += diff * diff / ei
    return total


def pearson_chi2_stat(t):
    """Pearson's sum of (observed - expected)^2 / expected over the four cells."""
    return _pearson(t, correction=False)


def deviance_stat(t):
    """Likelihood-ratio statistic 2 * sum O ln(O/E), taking 0 ln 0 = 0."""
    e = expected_counts(t).cells
    total = 0.0
    for o, ei in zip(t.cells, e):
        if o > 0:
            total += o * math.log(o / ei)
    return max(0.0, 2.0 * total)


def chi2_test(t, continuity_correction=False):
    """Pearson's chi-squared test of independence on one degree of freedom.

    Parameters
    ----------
    t : Table2x2
    continuity_correction : bool
        Apply Yates' correction, shrinking each ``|O - E|`` by 0.5 (floored at 0).
    """
    stat = _pearson(t, correction=continuity_correction)
    return TestResult(statistic=stat, df=1.0, p_value=chi2_sf(stat, 1))


def risk_summary(t):
    """Per-column adverse proportions, their ratio and their difference."""
    c1, c2 = t.col_totals
    if c1 == 0 or c2 == 0:
        raise DegenerateTableError(f"table {t.cells} has an empty column")
    risk1 = as_probability(t.a / c1)
    risk2 = as_probability(t.b / c2)
    if risk2 > 0:
        rr = risk1 / risk2
    elif risk1 > 0:
        rr = math.inf
    else:
        rr = math.nan
    return RiskSummary(risk1, risk2, rr, risk1 - risk2)
