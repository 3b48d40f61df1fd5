"""Conditional (margins-fixed) inference on 2x2 tables.

With all margins fixed, the top-left cell ``a`` follows a hypergeometric law
under independence and Fisher's noncentral hypergeometric law when the odds
ratio is psi. Only the "less" alternative is provided: evidence that cell
(1,1) is smaller than independence predicts. Orientation is chosen through
table layout.
"""
import math
from dataclasses import dataclass

from .errors import DomainError
from .special import as_probability, hypergeom_logpmf, hypergeom_support, log_choose, logsumexp

__all__ = [
    "ExactTestResult",
    "fisher_less",
    "cond_mle_odds_ratio",
    "noncentral_log_weights",
    "noncentral_pmf",
    "noncentral_mean",
]

_LOG_PSI_BOUNDS = (-30.0, 30.0)
_GOLDEN_TOL = 1e-10
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class ExactTestResult:
    p_value: float
    odds_ratio_cmle: float  # 0 or math.inf at the edges of the support
    alternative: str = "less"


def _margins(t):
    t.check_margins()
    n = t.total
    row1 = t.a + t.b
    col1 = t.a + t.c
    lo, hi = hypergeom_support(n, row1, col1)
    return n, row1, col1, lo, hi


def noncentral_log_weights(t):
    """Support values and log binomial weights of cell ``a`` given the margins.

    The noncentral pmf at odds ratio psi is proportional to
    ``exp(weight_k + k * log(psi))``.
    """
    n, row1, col1, lo, hi = _margins(t)
    ks = range(lo, hi + 1)
    weights = [log_choose(col1, k) + log_choose(n - col1, row1 - k) for k in ks]
    return list(ks), weights


def _log_probs(ks, weights, log_psi):
    terms = [w + k * log_psi for k, w in zip(ks, weights)]
    norm = logsumexp(terms)
    return [x - norm for x in terms]


def noncentral_pmf(t, psi):
    """Fisher noncentral hypergeometric pmf of cell ``a`` as ``{k: prob}``."""
    if not psi > 0 or math.isinf(psi):
        raise DomainError(f"odds ratio must be finite and positive, got {psi!r}")
    ks, weights = noncentral_log_weights(t)
    return {k: math.exp(lp) for k, lp in zip(ks, _log_probs(ks, weights, math.log(psi)))}


def _moments(ks, weights, log_psi):
    probs = [math.exp(lp) for lp in _log_probs(ks, weights, log_psi)]
    mean = math.fsum(k * p for k, p in zip(ks, probs))
    var = math.fsum((k - mean) ** 2 * p for k, p in zip(ks, probs))
    return mean, var


def noncentral_mean(t, psi):
    ks, weights = noncentral_log_weights(t)
    return _moments(ks, weights, math.log(psi))[0]


def fisher_less(t):
    """One-sided Fisher exact test, P(K <= a) with all margins fixed."""
    n, row1, col1, lo, hi = _margins(t)
    logs = [hypergeom_logpmf(k, n, row1, col1) for k in range(lo, t.a + 1)]
    p = as_probability(math.exp(logsumexp(logs)))
    return ExactTestResult(p_value=p, odds_ratio_cmle=cond_mle_odds_ratio(t))


def cond_mle_odds_ratio(t):
    """Conditional maximum-likelihood estimate of the odds ratio.

    Maximizes the noncentral hypergeometric likelihood of the observed ``a``
    over log(psi) in [-30, 30] by golden-section search, then polishes with
    Newton steps on the score ``E[K] - a``. Returns 0 or ``math.inf`` when
    ``a`` sits at the bottom or top of its feasible range.
    """
    ks, weights = noncentral_log_weights(t)
    lo, hi = ks[0], ks[-1]
    a = t.a
    if a == lo:
        return 0.0
    if a == hi:
        return math.inf

    def loglik(theta):
        return a * theta - logsumexp(w + k * theta for k, w in zip(ks, weights))

    left, right = _LOG_PSI_BOUNDS
    x1 = right - _INVPHI * (right - left)
    x2 = left + _INVPHI * (right - left)
    f1, f2 = loglik(x1), loglik(x2)
    while right - left > _GOLDEN_TOL:
        if f1 < f2:
            left, x1, f1 = x1, x2, f2
            x2 = left + _INVPHI * (right - left)
            f2 = loglik(x2)
        else:
            right, x2, f2 = x2, x1, f1
            x1 = right - _INVPHI * (right - left)
            f1 = loglik(x1)
    theta = 0.5 * (left + right)

    # the likelihood is flat near its peak, so finish on the score equation
    for _ in range(20):
        mean, var = _moments(ks, weights, theta)
        if var <= 0.0:
            break
        step = (a - mean) / var
        theta += step
        if abs(step) < 1e-14:
            break
    return math.exp(theta)
