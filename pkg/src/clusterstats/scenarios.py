"""Worked bias scenarios, multiple-testing adjustment and cluster-coincidence probabilities."""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .contingency import Table2x2
from .errors import DomainError
from .exact import fisher_less
from .glm import anova_sequential
from .special import as_probability, log_choose, logsumexp

__all__ = [
    "BiasScenario",
    "ScenarioArm",
    "ScenarioReport",
    "ClusterEstimate",
    "classify_suspicious",
    "evaluate_example1",
    "evaluate_example2",
    "bonferroni_adjust",
    "max_bin_cluster_prob",
    "single_bin_cluster_prob",
    "SHARD_SIZE",
]

# replicates per Monte Carlo shard; fixed so results do not depend on worker count
SHARD_SIZE = 5000
MIN_REPLICATES = 1000


@dataclass(frozen=True)
class BiasScenario:
    """Fractions of deaths an investigation labels suspicious.

    ``unbiased_rate`` applies to a fair review of every period. A biased
    review uses ``on_duty_rate`` when it believes the suspect was present and
    ``off_duty_rate`` otherwise.
    """

    unbiased_rate: float
    on_duty_rate: float
    off_duty_rate: float

    def __post_init__(self):
        for name in ("unbiased_rate", "on_duty_rate", "off_duty_rate"):
            object.__setattr__(self, name, as_probability(getattr(self, name)))


@dataclass(frozen=True)
class ScenarioArm:
    data: object
    p_values: dict
    relative_risk: float | None = None
    details: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioReport:
    kind: str
    unbiased: ScenarioArm
    biased: ScenarioArm


@dataclass(frozen=True)
class ClusterEstimate:
    estimate: float
    std_error: float
    replicates: int
    seed: int


def _count(name, value, minimum=0):
    if isinstance(value, bool) or int(value) != value or value < minimum:
        raise DomainError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _suspicious(rate, deaths):
    # round() is round-half-to-even
    return int(round(rate * deaths))


def classify_suspicious(deaths_before, deaths_after, s):
    """Expected suspicious-death tables under a fair and a biased review.

    Returns ``(unbiased, biased)`` tables laid out as
    ``[[suspicious before, suspicious after], [other before, other after]]``.
    """
    before = _count("deaths_before", deaths_before)
    after = _count("deaths_after", deaths_after)

    def table(rate_before, rate_after):
        sb, sa = _suspicious(rate_before, before), _suspicious(rate_after, after)
        return Table2x2(sb, sa, before - sb, after - sa)

    return table(s.unbiased_rate, s.unbiased_rate), table(s.off_duty_rate, s.on_duty_rate)


def _period_rr(t, patients_before, patients_after):
    if patients_before is None or patients_after is None:
        patients_before = patients_after = 1
    before = t.a / patients_before
    after = t.b / patients_after
    if before == 0:
        return math.inf if after > 0 else math.nan
    return after / before


def evaluate_example1(deaths_before, deaths_after, s, patients_before=None, patients_after=None):
    """Fisher "less" tests and after/before risk ratios for fair and biased reviews.

    Risk ratios are suspicious deaths per patient; when patient numbers are
    not given the two periods are taken to have equal patient counts.
    """
    unbiased, biased = classify_suspicious(deaths_before, deaths_after, s)
    arms = []
    for t in (unbiased, biased):
        res = fisher_less(t)
        arms.append(
            ScenarioArm(
                data=t,
                p_values={"fisher_less": res.p_value},
                relative_risk=_period_rr(t, patients_before, patients_after),
                details={"fisher": res},
            )
        )
    return ScenarioReport("example1", arms[0], arms[1])


def evaluate_example2(data_unbiased, data_biased, suspect="nurse", confounders=("morning",)):
    """p-values for the suspect effect, ignoring and allowing for confounders."""
    if data_unbiased.factors != data_biased.factors or sorted(r.levels for r in data_unbiased.rows) != sorted(
        r.levels for r in data_biased.rows
    ):
        raise DomainError("both datasets must share the same factors and level combinations")
    arms = []
    for data in (data_unbiased, data_biased):
        ignoring = anova_sequential(data, [suspect])
        allowing = anova_sequential(data, [*confounders, suspect])
        arms.append(
            ScenarioArm(
                data=data,
                p_values={
                    "ignoring": ignoring.row(suspect).p_value,
                    "allowing": allowing.row(suspect).p_value,
                },
                details={"ignoring": ignoring, "allowing": allowing},
            )
        )
    return ScenarioReport("example2", arms[0], arms[1])


def bonferroni_adjust(p_values):
    p_values = [as_probability(p) for p in p_values]
    if not p_values:
        raise DomainError("no p-values to adjust")
    m = len(p_values)
    return [min(1.0, m * p) for p in p_values]


def single_bin_cluster_prob(n_events, n_bins, threshold):
    """Exact P(a given bin receives >= ``threshold`` of ``n_events`` uniform events)."""
    n = _count("n_events", n_events)
    bins = _count("n_bins", n_bins, 1)
    k = _count("threshold", threshold)
    if k == 0:
        return 1.0
    if k > n:
        return 0.0
    if bins == 1:
        return 1.0
    log_p = -math.log(bins)
    log_q = math.log1p(-1.0 / bins)
    terms = [log_choose(n, j) + j * log_p + (n - j) * log_q for j in range(k, n + 1)]
    return as_probability(math.exp(logsumexp(terms)))


def _shard_hits(n_events, n_bins, threshold, size, seed, shard):
    # substream depends only on (seed, shard index)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(shard,))))
    counts = rng.multinomial(n_events, np.full(n_bins, 1.0 / n_bins), size=size)
    return int(np.count_nonzero(counts.max(axis=1) >= threshold))


def max_bin_cluster_prob(n_events, n_bins, threshold, replicates=100_000, seed=0, workers=1):
    """Monte Carlo P(the fullest of ``n_bins`` bins holds >= ``threshold`` events).

    Replicates are split into fixed shards of ``SHARD_SIZE``; shard ``i``
    draws from PCG64 seeded by ``SeedSequence(seed, spawn_key=(i,))``, so the
    estimate is reproducible for a given seed regardless of ``workers``.
    """
    n = _count("n_events", n_events, 1)
    bins = _count("n_bins", n_bins, 1)
    k = _count("threshold", threshold, 1)
    reps = _count("replicates", replicates, MIN_REPLICATES)
    seed = _count("seed", seed)
    workers = _count("workers", workers, 1)
    if k > n:
        return ClusterEstimate(0.0, 0.0, reps, seed)

    sizes = [SHARD_SIZE] * (reps // SHARD_SIZE)
    if reps % SHARD_SIZE:
        sizes.append(reps % SHARD_SIZE)
    jobs = [(n, bins, k, size, seed, i) for i, size in enumerate(sizes)]
    if workers == 1:
        hits = [_shard_hits(*job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(lambda job: _shard_hits(*job), jobs))
    p = sum(hits) / reps
    return ClusterEstimate(p, math.sqrt(p * (1.0 - p) / reps), reps, seed)
