"""Special functions behind every p-value and exact probability.

Everything here is a pure function of floats/ints, so it is safe to call from
any thread. Log-gamma uses the Lanczos approximation (g=7, 9 coefficients);
the regularized incomplete gamma function uses the power series below
``s + 1`` and a Lentz continued fraction above it.
"""
import math

from .errors import DomainError

__all__ = [
    "PROB_TOLERANCE",
    "as_probability",
    "log_gamma",
    "gammainc_lower",
    "gammainc_upper",
    "chi2_sf",
    "chi2_cdf",
    "log_choose",
    "hypergeom_logpmf",
    "hypergeom_pmf",
    "hypergeom_support",
    "poisson_logpmf",
    "poisson_tail",
    "logsumexp",
]

# floating noise within this band of [0, 1] is clamped, anything further is an error
PROB_TOLERANCE = 1e-12

_LANCZOS_G = 7
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)

# below this, ln((n-1)!) from exact integer arithmetic beats the approximation
_EXACT_FACTORIAL_MAX = 171
_EXACT_COMB_MAX = 5000

_EPS = 1e-16
_FPMIN = 1e-300
_MAX_ITER = 100_000


def as_probability(value):
    """Validate ``value`` as a probability, clamping tiny floating overshoot."""
    value = float(value)
    if not math.isfinite(value) or value < -PROB_TOLERANCE or value > 1.0 + PROB_TOLERANCE:
        raise DomainError(f"{value!r} is not a probability")
    return min(1.0, max(0.0, value))


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires a finite positive argument, got {x!r}")
    if x.is_integer() and x <= _EXACT_FACTORIAL_MAX:
        return math.log(math.factorial(int(x) - 1))
    if x < 0.5:
        # Lanczos is tuned for x >= 0.5; shift up once.
        return log_gamma(x + 1.0) - math.log(x)
    x -= 1.0
    series = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        series += _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (x + 0.5) * math.log(t) - t + math.log(series)


def _gamma_prefactor(s, x):
    # x**s * exp(-x) / Gamma(s), in log space
    return math.exp(s * math.log(x) - x - log_gamma(s))


def _lower_series(s, x):
    total = term = 1.0 / s
    n = s
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * _gamma_prefactor(s, x)
    raise DomainError(f"incomplete gamma series did not converge for s={s}, x={x}")


def _upper_continued_fraction(s, x):
    # modified Lentz evaluation
    b = x + 1.0 - s
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h * _gamma_prefactor(s, x)
    raise DomainError(f"incomplete gamma continued fraction did not converge for s={s}, x={x}")


def _check_gamma_args(s, x):
    s = float(s)
    x = float(x)
    if not (math.isfinite(s) and s > 0.0):
        raise DomainError(f"shape must be finite and positive, got {s!r}")
    if math.isnan(x) or x < 0.0:
        raise DomainError(f"argument must be non-negative, got {x!r}")
    return s, x


def gammainc_lower(s, x):
    """Regularized lower incomplete gamma P(s, x)."""
    s, x = _check_gamma_args(s, x)
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if x < s + 1.0:
        return as_probability(_lower_series(s, x))
    return as_probability(1.0 - _upper_continued_fraction(s, x))


def gammainc_upper(s, x):
    """Regularized upper incomplete gamma Q(s, x) = 1 - P(s, x)."""
    s, x = _check_gamma_args(s, x)
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < s + 1.0:
        return as_probability(1.0 - _lower_series(s, x))
    return as_probability(_upper_continued_fraction(s, x))


def chi2_sf(x, df):
    """Upper tail P(X >= x) of a chi-squared variable with ``df`` degrees of freedom."""
    if float(df) <= 0.0 or math.isnan(float(df)):
        raise DomainError(f"degrees of freedom must be positive, got {df!r}")
    if math.isnan(float(x)) or float(x) < 0.0:
        raise DomainError(f"chi-squared statistic must be non-negative, got {x!r}")
    return gammainc_upper(0.5 * float(df), 0.5 * float(x))


def chi2_cdf(x, df):
    if float(df) <= 0.0 or math.isnan(float(df)):
        raise DomainError(f"degrees of freedom must be positive, got {df!r}")
    if math.isnan(float(x)) or float(x) < 0.0:
        raise DomainError(f"chi-squared statistic must be non-negative, got {x!r}")
    return gammainc_lower(0.5 * float(df), 0.5 * float(x))


def _check_count(name, value):
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise DomainError(f"{name} must be a non-negative integer, got {value!r}")
    return int(value)


def log_choose(n, k):
    """ln C(n, k); exact integer arithmetic for moderate ``n``."""
    n = _check_count("n", n)
    k = _check_count("k", k)
    if k > n:
        raise DomainError(f"log_choose requires k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return 0.0
    if n <= _EXACT_COMB_MAX:
        return math.log(math.comb(n, k))
    return log_gamma(n + 1) - log_gamma(k + 1) - log_gamma(n - k + 1)


def hypergeom_support(pop, succ, draws):
    """Feasible range ``(lo, hi)`` of successes among ``draws`` items."""
    pop = _check_count("pop", pop)
    succ = _check_count("succ", succ)
    draws = _check_count("draws", draws)
    if succ > pop or draws > pop:
        raise DomainError(f"inconsistent hypergeometric margins: pop={pop}, succ={succ}, draws={draws}")
    return max(0, draws + succ - pop), min(draws, succ)


def hypergeom_logpmf(k, pop, succ, draws):
    lo, hi = hypergeom_support(pop, succ, draws)
    if k < lo or k > hi or int(k) != k:
        return -math.inf
    k = int(k)
    return log_choose(succ, k) + log_choose(pop - succ, draws - k) - log_choose(pop, draws)


def hypergeom_pmf(k, pop, succ, draws):
    """P(K = k) when ``draws`` items are taken from ``pop`` containing ``succ`` successes."""
    return as_probability(math.exp(hypergeom_logpmf(k, pop, succ, draws)))


def logsumexp(values):
    values = list(values)
    top = max(values)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def poisson_logpmf(j, lam):
    return j * math.log(lam) - lam - log_gamma(j + 1)


def poisson_tail(k, lam):
    """P(X >= k) for X ~ Poisson(lam).

    The shorter side of the distribution is summed: the upper tail directly
    when ``k`` exceeds the mean, otherwise one minus the lower tail.
    """
    k = _check_count("k", k)
    lam = float(lam)
    if not math.isfinite(lam) or lam <= 0.0:
        raise DomainError(f"Poisson mean must be finite and positive, got {lam!r}")
    if k == 0:
        return 1.0
    if k > lam:
        terms = []
        j = k
        while True:
            t = poisson_logpmf(j, lam)
            terms.append(t)
            # terms decrease geometrically once j > lam
            if t < terms[0] - 40.0 or j > k + 10_000:
                break
            j += 1
        return as_probability(math.exp(logsumexp(terms)))
    lower = math.fsum(math.exp(poisson_logpmf(j, lam)) for j in range(k))
    return as_probability(1.0 - lower)
