"""Acceptance gate: one test per criterion, each at its stated tolerance.

Every test records its outcome in ``ACCEPTANCE`` before asserting, and the
conftest hook prints a PASS/FAIL line per criterion after the run.
"""
import io
import json
import math
import random

import numpy as np

from clusterstats.bayes import Odds, TestCharacteristics, bayes_update, population_table
from clusterstats.cli import run
from clusterstats.contingency import Table2x2, chi2_test, deviance_stat, pearson_chi2_stat, risk_summary
from clusterstats.exact import fisher_less
from clusterstats.glm import FrequencyDataset, anova_sequential, build_design, fit_poisson, saturated_2x2_analysis
from clusterstats.scenarios import max_bin_cluster_prob, single_bin_cluster_prob

from .conftest import ACCEPTANCE, FIXTURES, shift_groups
from .oracles import fisher_less_by_enumeration


def record(number, description, checks):
    """Store the verdict, then fail with the names of the checks that did not hold."""
    failed = [name for name, ok in checks if not ok]
    ACCEPTANCE[number] = (description, not failed)
    assert not failed, f"criterion {number} failed: {failed}"


def near(x, target, tol):
    return abs(x - target) <= tol


def near_rel(x, target, rel):
    return abs(x - target) <= rel * abs(target)


def rounds_to(x, printed, decimals):
    return round(x, decimals) == printed


def cli_json(*argv):
    out = io.StringIO()
    code = run([str(a) for a in argv] + ["--json"], stdout=out, stderr=io.StringIO())
    assert code == 0
    return json.loads(out.getvalue())["results"]


def test_criterion_1_contingency_goldens():
    t = Table2x2(15, 9, 25, 31)
    scaled = chi2_test(t.scaled(10))
    record(
        1,
        "contingency goldens (Pearson, deviance, x10 scaling)",
        [
            ("pearson", near(pearson_chi2_stat(t), 2.142857, 1e-6)),
            ("deviance", near(deviance_stat(t), 2.160122, 1e-6)),
            ("scaled statistic", near(scaled.statistic, 21.43, 0.01)),
            ("scaled p", near(scaled.p_value, 4e-6, 1e-6)),
        ],
    )


RISK_CASES = [
    ((10, 5, 30, 35), 2.051282, 0.1520781, 2.0, 0.125),
    ((100, 50, 300, 350), 20.51282, 5.923318e-06, 2.0, 0.125),
    ((10, 5, 390, 395), 1.698514, 0.1924825, 2.0, 0.0125),
    ((55, 5, 345, 395), 45.04505, 1.925539e-11, 11.0, 0.125),
]


def test_criterion_2_risk_goldens():
    checks = []
    for label, (cells, stat, p, rr, ard) in zip("abcd", RISK_CASES):
        t = Table2x2(*cells)
        res, risks = chi2_test(t), risk_summary(t)
        checks += [
            (f"({label}) statistic", near(res.statistic, stat, 1e-5)),
            (f"({label}) p", near_rel(res.p_value, p, 1e-4)),
            (f"({label}) RR", risks.relative_risk == rr),
            (f"({label}) ARD", risks.absolute_risk_difference == ard),
        ]
    record(2, "risk goldens, cases (a)-(d)", checks)


def test_criterion_3_exact_goldens():
    biased = fisher_less(Table2x2.from_rows((5, 30), (95, 170)))
    unbiased = fisher_less(Table2x2.from_rows((10, 20), (90, 180)))
    record(
        3,
        "Fisher exact goldens (p-values and conditional MLE odds ratios)",
        [
            ("biased p", near(biased.p_value, 0.006818, 1e-5)),
            ("biased odds ratio", near(biased.odds_ratio_cmle, 0.2992371, 1e-4)),
            ("unbiased p", near(unbiased.p_value, 0.5876, 1e-4)),
            ("unbiased odds ratio", near(unbiased.odds_ratio_cmle, 1.0, 1e-6)),
        ],
    )


def test_criterion_4_glm_goldens():
    unbiased, biased = shift_groups([7, 3, 2, 4]), shift_groups([8, 4, 1, 3])
    nurse_only = anova_sequential(unbiased, ["nurse"])
    both = anova_sequential(unbiased, ["morning", "nurse"])
    fit1 = fit_poisson(unbiased, build_design(unbiased, ["nurse"]))
    fit2 = fit_poisson(unbiased, build_design(unbiased, ["morning", "nurse"]))
    fitted1 = np.max(np.abs(fit1.fitted - [5.333333, 4.666667, 0.4, 5.6]))
    fitted2 = np.max(np.abs(fit2.fitted - [7.872829, 2.127171, 1.127171, 4.872829]))
    record(
        4,
        "Poisson GLM goldens (fitted values, analysis of deviance)",
        [
            ("nurse-only p", near(nurse_only.row("nurse").p_value, 0.01728, 1e-4)),
            ("nurse-only fitted", fitted1 <= 1e-5),
            ("morning deviance", near(both.row("morning").deviance, 8.6617, 1e-4)),
            ("morning p", near(both.row("morning").p_value, 0.00325, 1e-4)),
            ("nurse deviance", near(both.row("nurse").deviance, 0.7756, 1e-4)),
            ("nurse p", near(both.row("nurse").p_value, 0.37849, 1e-4)),
            ("morning+nurse fitted", fitted2 <= 1e-5),
            ("null deviance", near(both.row("NULL").resid_dev, 10.570, 1e-3)),
            ("biased ignoring", near_rel(anova_sequential(biased, ["nurse"]).row("nurse").p_value, 0.0007, 0.15)),
            (
                "biased allowing",
                near_rel(anova_sequential(biased, ["morning", "nurse"]).row("nurse").p_value, 0.031, 0.15),
            ),
        ],
    )


def test_criterion_5_bayes_goldens():
    table = population_table(1e6, 0.001, TestCharacteristics(0.9, 0.99))
    posterior = bayes_update(Odds(999, "against"), 90)
    record(
        5,
        "Bayes goldens (population table, odds update)",
        [
            ("positives among diseased", table.pos_diseased == 900),
            ("positives among well", table.pos_well == 9990),
            ("all positives", table.n_positive == 10890),
            ("posterior", table.posterior_positive == 900 / 10890),
            ("posterior odds", near(posterior.against, 11.1, 0.05)),
        ],
    )


def test_criterion_6_cluster_probabilities():
    single = single_bin_cluster_prob(1000, 365, 8)
    est = max_bin_cluster_prob(1000, 365, 8, replicates=100_000, seed=0)
    record(
        6,
        "cluster probabilities (exact single bin, Monte Carlo any bin)",
        [
            ("single bin below 0.01", single < 0.01),
            ("any bin above 0.93", est.estimate > 0.93),
            ("standard error reported", math.isfinite(est.std_error) and 0 < est.std_error < 0.01),
        ],
    )


def _random_table(rng, max_total=40):
    while True:
        n = rng.randint(1, max_total)
        cuts = sorted(rng.randint(0, n) for _ in range(3))
        t = Table2x2(cuts[0], cuts[1] - cuts[0], cuts[2] - cuts[1], n - cuts[2])
        if 0 not in t.row_totals and 0 not in t.col_totals:
            return t


def _random_dataset(rng):
    return FrequencyDataset.from_columns(
        {"nurse": ["yes", "yes", "no", "no"], "morning": ["yes", "no", "yes", "no"]},
        exposure=[rng.uniform(0.5, 30.0) for _ in range(4)],
        events=[rng.randint(0, 15) for _ in range(4)],
    )


def test_criterion_7_oracle_properties():
    rng = random.Random(2022)
    fisher_err = max(
        abs(fisher_less(t).p_value - float(fisher_less_by_enumeration(*t.cells)))
        for t in (_random_table(rng) for _ in range(500))
    )

    score_err = 0.0
    for _ in range(200):
        data = _random_dataset(rng)
        design = build_design(data, ["morning", "nurse"])
        fit = fit_poisson(data, design)
        score_err = max(score_err, float(np.max(np.abs(design.matrix.T @ (data.events - fit.fitted)))))

    saturated_err = 0.0
    for _ in range(200):
        t = _random_table(rng, max_total=200)
        inter = saturated_2x2_analysis(t).row("outcome:condition")
        saturated_err = max(saturated_err, abs(inter.deviance - deviance_stat(t)))

    record(
        7,
        "oracle properties (Fisher vs enumeration, IRLS score, saturated interaction)",
        [
            (f"fisher max error {fisher_err:.2e}", fisher_err <= 1e-10),
            (f"score max error {score_err:.2e}", score_err <= 1e-6),
            (f"saturated max error {saturated_err:.2e}", saturated_err <= 1e-6),
        ],
    )


def test_criterion_8_scenarios_end_to_end():
    ex1 = cli_json("bias-example1", FIXTURES / "periods_before_after.csv")
    ex2 = cli_json(
        "bias-example2", FIXTURES / "shifts_unbiased.csv", FIXTURES / "shifts_biased.csv"
    )
    record(
        8,
        "bias scenarios end to end from CSV fixtures via the CLI",
        [
            ("example 1 biased", rounds_to(ex1["biased"]["p_value"], 0.0068, 4)),
            ("example 1 unbiased", rounds_to(ex1["unbiased"]["p_value"], 0.5876, 4)),
            ("example 2 unbiased ignoring", rounds_to(ex2["unbiased"]["p_ignoring"], 0.017, 3)),
            ("example 2 unbiased allowing", rounds_to(ex2["unbiased"]["p_allowing"], 0.378, 3)),
            ("example 2 biased ignoring", near_rel(ex2["biased"]["p_ignoring"], 0.0007, 0.15)),
            ("example 2 biased allowing", near_rel(ex2["biased"]["p_allowing"], 0.031, 0.15)),
        ],
    )
