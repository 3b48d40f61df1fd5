"""Command-line interface.

Exit codes: 0 success, 1 analysis or input error, 2 usage error.
"""
import argparse
import contextlib
import functools
import sys

from . import __version__
from .bayes import Odds, Orientation, TestCharacteristics, bayes_update, likelihood_ratio_from_test
from .bayes import odds_to_prob, population_table, prob_to_odds_against
from .contingency import Table2x2, chi2_test, deviance_stat, expected_counts, pearson_chi2_stat, risk_summary
from .errors import ClusterStatsError, DomainError
from .exact import fisher_less
from .glm import anova_sequential, build_design, fit_poisson
from .records import dataset_to_dict, ingest
from .report import ReportDocument, fmt_p, fmt_stat
from .scenarios import (
    BiasScenario,
    bonferroni_adjust,
    evaluate_example1,
    evaluate_example2,
    max_bin_cluster_prob,
    single_bin_cluster_prob,
)
from .special import poisson_tail

__all__ = ["run", "main", "build_parser"]


def _csv_list(text):
    return [part.strip() for part in text.split(",") if part.strip()]


def _table_arg(text):
    parts = _csv_list(text)
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected four comma-separated counts a,b,c,d")
    try:
        return tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"counts must be integers: {text!r}") from None


def check_table_usage(parser, args):
    if (args.table is None) == (args.file is None):
        parser.error("give exactly one of a CSV file or --table a,b,c,d")


def _load_table(args):
    if args.table is not None:
        return Table2x2(*args.table), {"table": list(args.table)}
    data = ingest(args.file)
    if len(data.factors) != 2:
        raise DomainError(f"a 2x2 table needs exactly two factors, found {list(data.factors)}")
    row_f, col_f = data.factors
    row_levels, col_levels = data.levels(row_f), data.levels(col_f)
    if len(row_levels) != 2 or len(col_levels) != 2:
        raise DomainError("both factors must have exactly two levels")
    counts = {r.levels: r.events for r in data.rows}
    cells = [counts.get((rl, cl), 0) for rl in row_levels for cl in col_levels]
    return Table2x2(*cells), dataset_to_dict(data)


def _table_lines(t):
    return [
        f"table: [[{t.a}, {t.b}], [{t.c}, {t.d}]]",
    ]


def cmd_tabulate(args):
    data = ingest(args.file, factors=_csv_list(args.factors) if args.factors else None)
    payload = dataset_to_dict(data)
    header = [*data.factors, "exposure", "events"]
    rows = [[*r.levels, fmt_stat(r.exposure), str(r.events)] for r in data.rows]
    widths = [max(len(h), *(len(row[i]) for row in rows)) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(row, widths)) for row in rows]
    return ReportDocument("tabulate", payload, {"factors": list(data.factors)}, payload, lines=lines)


def cmd_chisq(args):
    t, inputs = _load_table(args)
    res = chi2_test(t, continuity_correction=args.correction)
    e = expected_counts(t)
    dev = deviance_stat(t)
    results = {
        "observed": list(t.cells),
        "expected": list(e.cells),
        "statistic": res.statistic,
        "df": res.df,
        "p_value": res.p_value,
        "deviance_statistic": dev,
    }
    lines = _table_lines(t) + [
        "expected: " + ", ".join(fmt_stat(x) for x in e.cells),
        f"statistic: {fmt_stat(res.statistic)}",
        f"df: {fmt_stat(res.df)}",
        f"p-value: {fmt_p(res.p_value)}",
        f"deviance statistic: {fmt_stat(dev)}",
    ]
    return ReportDocument("chisq", inputs, {"continuity_correction": args.correction}, results, lines=lines)


def cmd_fisher(args):
    t, inputs = _load_table(args)
    res = fisher_less(t)
    results = {"p_value": res.p_value, "odds_ratio_cmle": res.odds_ratio_cmle, "alternative": res.alternative}
    lines = _table_lines(t) + [
        f"alternative: true odds ratio is {res.alternative} than 1",
        f"p-value: {fmt_p(res.p_value)}",
        f"odds ratio (conditional MLE): {fmt_stat(res.odds_ratio_cmle)}",
    ]
    return ReportDocument("fisher", inputs, {"alternative": args.alternative}, results, lines=lines)


def cmd_risk(args):
    t, inputs = _load_table(args)
    rs = risk_summary(t)
    ct = chi2_test(t, continuity_correction=args.correction)
    results = {
        "risk1": rs.risk1,
        "risk2": rs.risk2,
        "relative_risk": rs.relative_risk,
        "absolute_risk_difference": rs.absolute_risk_difference,
        "statistic": ct.statistic,
        "p_value": ct.p_value,
    }
    lines = _table_lines(t) + [
        f"statistic: {fmt_stat(ct.statistic)}",
        f"p-value: {fmt_p(ct.p_value)}",
        f"risks: {fmt_stat(rs.risk1)} {fmt_stat(rs.risk2)}",
        f"relative risk: {fmt_stat(rs.relative_risk)}",
        f"absolute risk difference: {fmt_stat(rs.absolute_risk_difference)}",
    ]
    return ReportDocument("risk", inputs, {"continuity_correction": args.correction}, results, lines=lines)


def _anova_lines(table):
    header = ["Term", "Df", "Deviance", "Resid. Df", "Resid. Dev", "P(>Chi)"]
    body = [
        [
            r.term,
            "" if r.df is None else str(r.df),
            fmt_stat(r.deviance),
            str(r.resid_df),
            fmt_stat(r.resid_dev),
            fmt_p(r.p_value),
        ]
        for r in table.rows
    ]
    widths = [max(len(h), *(len(row[i]) for row in body)) for i, h in enumerate(header)]
    out = ["  ".join(h.ljust(widths[0]) if i == 0 else h.rjust(widths[i]) for i, h in enumerate(header))]
    for row in body:
        out.append("  ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(row)))
    return out


def _anova_dict(table):
    return [
        {
            "term": r.term,
            "df": r.df,
            "deviance": r.deviance,
            "resid_df": r.resid_df,
            "resid_dev": r.resid_dev,
            "p_value": r.p_value,
        }
        for r in table.rows
    ]


def cmd_glm_anova(args):
    data = ingest(args.file)
    terms = _csv_list(args.terms) if args.terms else []
    table = anova_sequential(data, terms)
    fit = fit_poisson(data, build_design(data, terms))
    fitted = [
        {"levels": dict(zip(data.factors, r.levels)), "events": r.events, "fitted": mu}
        for r, mu in zip(data.rows, fit.fitted)
    ]
    results = {
        "anova": _anova_dict(table),
        "coefficients": dict(zip(fit.labels, fit.coefficients.tolist())),
        "fitted": fitted,
        "converged": fit.converged,
        "iterations": fit.iterations,
    }
    lines = ["Analysis of deviance (Poisson, log link, log-exposure offset)", "Terms added sequentially (first to last)", ""]
    lines += _anova_lines(table)
    lines += ["", "Fitted values:"]
    for item in fitted:
        label = ", ".join(f"{k}={v}" for k, v in item["levels"].items())
        lines.append(f"  {label}: observed {item['events']}, fitted {fmt_stat(item['fitted'])}")
    return ReportDocument(
        "glm-anova", dataset_to_dict(data), {"terms": terms}, results, warnings=list(table.warnings), lines=lines
    )


def check_bayes_usage(parser, args):
    if (args.prior_against is None) == (args.prevalence is None):
        parser.error("give exactly one of --prior-against or --prevalence")
    if (args.sensitivity is None) != (args.specificity is None):
        parser.error("--sensitivity and --specificity must be given together")
    if (args.lr is None) == (args.sensitivity is None):
        parser.error("give exactly one of --lr or --sensitivity/--specificity")


def cmd_bayes(args):
    if args.prior_against is not None:
        prior = Odds(args.prior_against, Orientation.AGAINST)
    else:
        prior = prob_to_odds_against(args.prevalence)

    tc = None
    if args.sensitivity is not None:
        tc = TestCharacteristics(args.sensitivity, args.specificity)
    lr = args.lr if args.lr is not None else likelihood_ratio_from_test(tc)

    posterior = bayes_update(prior, lr, Orientation.AGAINST)
    prob = odds_to_prob(posterior.oriented(Orientation.IN_FAVOUR))
    results = {
        "prior_odds_against": prior.against,
        "likelihood_ratio": lr,
        "posterior_odds_against": posterior.against,
        "posterior_probability": prob,
    }
    lines = [
        f"prior odds against: {fmt_stat(prior.against)}",
        f"likelihood ratio: {fmt_stat(lr)}",
        f"posterior odds against: {fmt_p(posterior.against)}",
        f"posterior probability: {fmt_p(prob)}",
    ]
    params = {k: getattr(args, k) for k in ("prior_against", "prevalence", "lr", "sensitivity", "specificity")}
    if tc is not None and args.prevalence is not None:
        pt = population_table(args.population, args.prevalence, tc)
        results["population_table"] = {
            "n_total": pt.n_total,
            "n_diseased": pt.n_diseased,
            "n_well": pt.n_well,
            "pos_diseased": pt.pos_diseased,
            "pos_well": pt.pos_well,
            "neg_diseased": pt.neg_diseased,
            "neg_well": pt.neg_well,
            "posterior_positive": pt.posterior_positive,
        }
        params["population"] = args.population
        lines += [
            "",
            f"population {fmt_stat(pt.n_total)}: diseased {fmt_stat(pt.n_diseased)}, well {fmt_stat(pt.n_well)}",
            f"positive tests: diseased {fmt_stat(pt.pos_diseased)}, well {fmt_stat(pt.pos_well)}, "
            f"total {fmt_stat(pt.n_positive)}",
            f"negative tests: diseased {fmt_stat(pt.neg_diseased)}, well {fmt_stat(pt.neg_well)}",
            f"chances of disease after a positive test: 1 in {fmt_p(1.0 / pt.posterior_positive)}",
        ]
    return ReportDocument("bayes", params, params, results, lines=lines)


def cmd_bias_example1(args):
    data = ingest(args.file)
    if args.period_factor not in data.factors or len(data.factors) != 1:
        raise DomainError(f"expected a single factor {args.period_factor!r}, found {list(data.factors)}")
    by_level = {r.levels[0]: r for r in data.rows}
    missing = [lvl for lvl in (args.before, args.after) if lvl not in by_level]
    if missing or len(by_level) != 2:
        raise DomainError(f"{args.period_factor!r} must have exactly the levels {args.before!r} and {args.after!r}")
    before, after = by_level[args.before], by_level[args.after]
    scenario = BiasScenario(args.unbiased_rate, args.on_duty_rate, args.off_duty_rate)
    report = evaluate_example1(
        before.events, after.events, scenario, patients_before=before.exposure, patients_after=after.exposure
    )
    results = {}
    lines = [
        f"deaths before: {before.events} (exposure {fmt_stat(before.exposure)}), "
        f"after: {after.events} (exposure {fmt_stat(after.exposure)})",
        "",
        f"{'':<12}{'suspicious before':>19}{'suspicious after':>18}{'relative risk':>15}{'p-value':>10}",
    ]
    for name in ("biased", "unbiased"):
        arm = getattr(report, name)
        t = arm.data
        results[name] = {
            "suspicious_before": t.a,
            "suspicious_after": t.b,
            "table": list(t.cells),
            "relative_risk": arm.relative_risk,
            "p_value": arm.p_values["fisher_less"],
            "odds_ratio_cmle": arm.details["fisher"].odds_ratio_cmle,
        }
        lines.append(
            f"{name:<12}{t.a:>19}{t.b:>18}{fmt_stat(arm.relative_risk):>15}{fmt_p(arm.p_values['fisher_less']):>10}"
        )
    params = {
        "unbiased_rate": scenario.unbiased_rate,
        "on_duty_rate": scenario.on_duty_rate,
        "off_duty_rate": scenario.off_duty_rate,
        "period_factor": args.period_factor,
        "before": args.before,
        "after": args.after,
    }
    return ReportDocument("bias-example1", dataset_to_dict(data), params, results, lines=lines)


def cmd_bias_example2(args):
    unbiased = ingest(args.unbiased)
    biased = ingest(args.biased)
    confounders = _csv_list(args.confounders)
    report = evaluate_example2(unbiased, biased, suspect=args.suspect, confounders=confounders)
    results = {}
    lines = [
        f"p-values for the {args.suspect} effect",
        f"{'':<12}{'ignoring ' + ','.join(confounders):>22}{'allowing ' + ','.join(confounders):>22}",
    ]
    for name in ("unbiased", "biased"):
        arm = getattr(report, name)
        results[name] = {
            "p_ignoring": arm.p_values["ignoring"],
            "p_allowing": arm.p_values["allowing"],
            "anova_ignoring": _anova_dict(arm.details["ignoring"]),
            "anova_allowing": _anova_dict(arm.details["allowing"]),
        }
        lines.append(f"{name:<12}{fmt_p(arm.p_values['ignoring']):>22}{fmt_p(arm.p_values['allowing']):>22}")
    inputs = {"unbiased": dataset_to_dict(unbiased), "biased": dataset_to_dict(biased)}
    params = {"suspect": args.suspect, "confounders": confounders}
    return ReportDocument("bias-example2", inputs, params, results, lines=lines)


def cmd_cluster_prob(args):
    single = single_bin_cluster_prob(args.events, args.bins, args.threshold)
    approx = poisson_tail(args.threshold, args.events / args.bins)
    est = max_bin_cluster_prob(
        args.events, args.bins, args.threshold, replicates=args.replicates, seed=args.seed, workers=args.workers
    )
    params = {
        "events": args.events,
        "bins": args.bins,
        "threshold": args.threshold,
        "replicates": args.replicates,
        "seed": args.seed,
    }
    results = {
        "single_bin_probability": single,
        "single_bin_poisson_approximation": approx,
        "max_bin_probability": est.estimate,
        "max_bin_std_error": est.std_error,
        "generator": "PCG64 via SeedSequence(seed, spawn_key=(shard,))",
    }
    lines = [
        f"P(a particular bin has >= {args.threshold} events): {fmt_p(single)}",
        f"  Poisson approximation: {fmt_p(approx)}",
        f"P(some bin has >= {args.threshold} events): {fmt_p(est.estimate)} "
        f"(Monte Carlo standard error {fmt_p(est.std_error)}, {est.replicates} replicates, seed {est.seed})",
    ]
    return ReportDocument("cluster-prob", params, params, results, lines=lines)


def cmd_adjust(args):
    values = []
    for chunk in args.p:
        for part in _csv_list(chunk):
            try:
                values.append(float(part))
            except ValueError:
                raise DomainError(f"not a p-value: {part!r}") from None
    adjusted = bonferroni_adjust(values)
    results = {"method": "bonferroni", "p_values": values, "adjusted": adjusted}
    lines = [f"Bonferroni adjustment over {len(values)} tests"]
    lines += [f"p {fmt_p(p)} -> adjusted {fmt_p(q)}" for p, q in zip(values, adjusted)]
    return ReportDocument("adjust", {"p": values}, {"method": "bonferroni"}, results, lines=lines)


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return value


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the report as JSON")

    parser = argparse.ArgumentParser(prog="clusterstats", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("tabulate", parents=[common], help="aggregate shift records by factor levels")
    p.add_argument("file")
    p.add_argument("--factors", help="comma list of factor columns (default: all non-reserved columns)")
    p.set_defaults(func=cmd_tabulate)

    def table_parser(name, helptext):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("file", nargs="?", help="CSV with two two-level factors and an events column")
        q.add_argument("--table", type=_table_arg, help="cells a,b,c,d (rows: outcome, columns: condition)")
        q.set_defaults(check_usage=functools.partial(check_table_usage, q))
        return q

    p = table_parser("chisq", "Pearson chi-squared test on a 2x2 table")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--no-correction", dest="correction", action="store_false", help="no continuity correction (default)")
    grp.add_argument("--correction", dest="correction", action="store_true", help="apply Yates' continuity correction")
    p.set_defaults(func=cmd_chisq, correction=False)

    p = table_parser("fisher", "one-sided Fisher exact test and conditional MLE odds ratio")
    p.add_argument("--alternative", choices=["less"], default="less")
    p.set_defaults(func=cmd_fisher)

    p = table_parser("risk", "relative risk and absolute risk difference")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--no-correction", dest="correction", action="store_false")
    grp.add_argument("--correction", dest="correction", action="store_true")
    p.set_defaults(func=cmd_risk, correction=False)

    p = sub.add_parser("glm-anova", parents=[common], help="Poisson log-linear sequential analysis of deviance")
    p.add_argument("file")
    p.add_argument("--terms", default="", help="comma list of terms, added in order")
    p.set_defaults(func=cmd_glm_anova)

    p = sub.add_parser("bayes", parents=[common], help="update odds by a likelihood ratio")
    p.add_argument("--prior-against", type=float)
    p.add_argument("--prevalence", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--sensitivity", type=float)
    p.add_argument("--specificity", type=float)
    p.add_argument("--population", type=float, default=1e6)
    p.set_defaults(func=cmd_bayes, check_usage=functools.partial(check_bayes_usage, p))

    p = sub.add_parser("bias-example1", parents=[common], help="before/after suspicious deaths under biased review")
    p.add_argument("file", help="CSV with a period factor; exposure = patients, events = deaths")
    p.add_argument("--unbiased-rate", type=float, default=0.10)
    p.add_argument("--on-duty-rate", type=float, default=0.15)
    p.add_argument("--off-duty-rate", type=float, default=0.05)
    p.add_argument("--period-factor", default="period")
    p.add_argument("--before", default="before")
    p.add_argument("--after", default="after")
    p.set_defaults(func=cmd_bias_example1)

    p = sub.add_parser("bias-example2", parents=[common], help="suspect effect with and without confounders")
    p.add_argument("unbiased")
    p.add_argument("biased")
    p.add_argument("--suspect", default="nurse")
    p.add_argument("--confounders", default="morning")
    p.set_defaults(func=cmd_bias_example2)

    p = sub.add_parser("cluster-prob", parents=[common], help="chance of a cluster in one bin vs any bin")
    p.add_argument("--events", type=_positive_int, default=1000)
    p.add_argument("--bins", type=_positive_int, default=365)
    p.add_argument("--threshold", type=_positive_int, default=8)
    p.add_argument("--replicates", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.set_defaults(func=cmd_cluster_prob)

    p = sub.add_parser("adjust", parents=[common], help="Bonferroni adjustment of p-values")
    p.add_argument("--p", action="append", required=True, help="p-value(s); repeat or comma-separate")
    p.set_defaults(func=cmd_adjust)
    return parser


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI and return the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        # argparse prints help and usage errors itself; keep them on our streams
        with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
            args = parser.parse_args(argv)
            if getattr(args, "check_usage", None):
                args.check_usage(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        doc = args.func(args)
    except ClusterStatsError as exc:
        print(f"clusterstats {args.command}: error: {exc}", file=stderr)
        return 1
    stdout.write(doc.to_json() if args.json else doc.to_text())
    return 0


def main():
    sys.exit(run())
