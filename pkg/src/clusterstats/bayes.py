"""Probability/odds conversions and Bayes-rule updating on the odds scale."""
import enum
import math
from dataclasses import dataclass

from .errors import DomainError
from .special import as_probability

__all__ = [
    "Orientation",
    "Odds",
    "TestCharacteristics",
    "PopulationTable",
    "prob_to_odds_against",
    "prob_to_odds",
    "odds_to_prob",
    "bayes_update",
    "likelihood_ratio_from_test",
    "population_table",
]


class Orientation(enum.Enum):
    AGAINST = "against"
    IN_FAVOUR = "in_favour"


@dataclass(frozen=True)
class Odds:
    """Odds of ``magnitude`` to 1, either against or in favour of a hypothesis.

    A bare number is ambiguous, so the orientation is always carried along.
    """

    magnitude: float
    orientation: Orientation = Orientation.AGAINST

    def __post_init__(self):
        m = float(self.magnitude)
        if math.isnan(m) or m < 0:
            raise DomainError(f"odds magnitude must be non-negative, got {self.magnitude!r}")
        object.__setattr__(self, "magnitude", m)
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    @property
    def in_favour(self):
        """Magnitude on the in-favour scale."""
        if self.orientation is Orientation.IN_FAVOUR:
            return self.magnitude
        return math.inf if self.magnitude == 0 else 1.0 / self.magnitude

    @property
    def against(self):
        if self.orientation is Orientation.AGAINST:
            return self.magnitude
        return math.inf if self.magnitude == 0 else 1.0 / self.magnitude

    def oriented(self, orientation):
        orientation = Orientation(orientation)
        if orientation is self.orientation:
            return self
        value = self.against if orientation is Orientation.AGAINST else self.in_favour
        return Odds(value, orientation)

    def flip(self):
        other = Orientation.IN_FAVOUR if self.orientation is Orientation.AGAINST else Orientation.AGAINST
        return self.oriented(other)

    def __str__(self):
        word = "against" if self.orientation is Orientation.AGAINST else "in favour"
        return f"{self.magnitude:.4g} to 1 {word}"


@dataclass(frozen=True)
class TestCharacteristics:
    sensitivity: float
    specificity: float

    __test__ = False

    def __post_init__(self):
        for name in ("sensitivity", "specificity"):
            value = as_probability(getattr(self, name))
            if value == 0.0:
                raise DomainError(f"{name} must be in (0, 1]")
            object.__setattr__(self, name, value)

    @property
    def false_positive_rate(self):
        return 1.0 - self.specificity


@dataclass(frozen=True)
class PopulationTable:
    """Expected counts by disease status and test result (real-valued)."""

    n_total: float
    n_diseased: float
    n_well: float
    pos_diseased: float
    pos_well: float
    neg_diseased: float
    neg_well: float

    @property
    def n_positive(self):
        return self.pos_diseased + self.pos_well

    @property
    def n_negative(self):
        return self.neg_diseased + self.neg_well

    @property
    def posterior_positive(self):
        """P(disease | positive test)."""
        return self.pos_diseased / self.n_positive

    @property
    def posterior_negative(self):
        return self.neg_diseased / self.n_negative


def prob_to_odds_against(p):
    """Odds ``(1/p) - 1`` to 1 against an event of probability ``p``."""
    p = as_probability(p)
    if p == 0.0 or p == 1.0:
        raise DomainError(f"odds are unbounded at probability {p}")
    return Odds((1.0 - p) / p, Orientation.AGAINST)


def prob_to_odds(p, orientation=Orientation.AGAINST):
    return prob_to_odds_against(p).oriented(orientation)


def odds_to_prob(odds):
    """Probability of the event the odds refer to."""
    if odds.orientation is Orientation.AGAINST:
        return 1.0 / (odds.magnitude + 1.0)
    if math.isinf(odds.magnitude):
        return 1.0
    return odds.magnitude / (odds.magnitude + 1.0)


def bayes_update(prior, lr, orientation=None):
    """Posterior odds = prior odds x likelihood ratio.

    ``lr`` is P(E | H1) / P(E | H2) where the odds are for H1. The result is
    reported in ``orientation``, defaulting to the prior's.
    """
    lr = float(lr)
    if math.isnan(lr) or lr <= 0:
        raise DomainError(f"likelihood ratio must be positive, got {lr!r}")
    posterior = Odds(prior.in_favour * lr, Orientation.IN_FAVOUR)
    return posterior.oriented(orientation or prior.orientation)


def likelihood_ratio_from_test(tc):
    """Sensitivity over false positive rate; ``math.inf`` for a perfectly specific test."""
    fpr = tc.false_positive_rate
    if fpr == 0.0:
        return math.inf
    return tc.sensitivity / fpr


def population_table(n, prevalence, tc):
    n = float(n)
    if not n > 0:
        raise DomainError(f"population size must be positive, got {n!r}")
    prevalence = as_probability(prevalence)
    if prevalence in (0.0, 1.0):
        raise DomainError("prevalence must lie strictly between 0 and 1")
    diseased = n * prevalence
    well = n - diseased
    pos_d = diseased * tc.sensitivity
    neg_w = well * tc.specificity
    return PopulationTable(
        n_total=n,
        n_diseased=diseased,
        n_well=well,
        pos_diseased=pos_d,
        pos_well=well - neg_w,
        neg_diseased=diseased - pos_d,
        neg_well=neg_w,
    )
