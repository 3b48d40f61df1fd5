"""Statistics for evaluating suspicious clusters of adverse medical events."""

__version__ = "0.1.0"

from .bayes import (  # noqa: E402
    Odds,
    Orientation,
    PopulationTable,
    TestCharacteristics,
    bayes_update,
    likelihood_ratio_from_test,
    odds_to_prob,
    population_table,
    prob_to_odds_against,
)
from .contingency import (  # noqa: E402
    Table2x2,
    chi2_test,
    deviance_stat,
    expected_counts,
    pearson_chi2_stat,
    risk_summary,
)
from .errors import (  # noqa: E402
    ClusterStatsError,
    DegenerateTableError,
    DomainError,
    FitError,
    ParseError,
    RankDeficientError,
)
from .exact import cond_mle_odds_ratio, fisher_less  # noqa: E402
from .glm import (  # noqa: E402
    FrequencyDataset,
    anova_sequential,
    build_design,
    fit_poisson,
    saturated_2x2_analysis,
)
from .records import ingest  # noqa: E402
from .scenarios import (  # noqa: E402
    BiasScenario,
    bonferroni_adjust,
    classify_suspicious,
    evaluate_example1,
    evaluate_example2,
    max_bin_cluster_prob,
    single_bin_cluster_prob,
)
from .special import chi2_sf, hypergeom_pmf, log_choose, log_gamma, poisson_tail  # noqa: E402
