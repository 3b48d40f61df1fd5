"""Poisson log-linear models for event rates with exposure offsets.

Linear predictor ``eta = X beta + log(exposure)``, log link, fitted by
iteratively reweighted least squares. Factors use treatment coding with the
lexicographically smallest level as reference. Terms may be a factor name or
an interaction ``"f:g"`` of factors, coded as products of their indicators.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClusterStatsError, DomainError, FitError, RankDeficientError
from .special import chi2_sf

__all__ = [
    "DatasetRow",
    "FrequencyDataset",
    "DesignMatrix",
    "GlmFit",
    "DevianceRow",
    "DevianceTable",
    "build_design",
    "fit_poisson",
    "poisson_deviance",
    "poisson_loglik",
    "anova_sequential",
    "saturated_2x2_analysis",
]

MAX_ITER = 50
TOLERANCE = 1e-10
SEPARATION_BOUND = 30.0
FITTED_FLOOR = 1e-8


@dataclass(frozen=True)
class DatasetRow:
    levels: tuple
    exposure: float
    events: int


@dataclass(frozen=True)
class FrequencyDataset:
    """Aggregated event counts, one row per distinct combination of factor levels."""

    factors: tuple
    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(set(self.factors)) != len(self.factors):
            raise DomainError(f"duplicate factor names in {self.factors}")
        seen = set()
        for i, row in enumerate(self.rows):
            if len(row.levels) != len(self.factors):
                raise DomainError(f"row {i} has {len(row.levels)} levels for {len(self.factors)} factors")
            if not (math.isfinite(row.exposure) and row.exposure > 0):
                raise DomainError(f"row {i}: exposure must be positive, got {row.exposure!r}")
            if isinstance(row.events, bool) or int(row.events) != row.events or row.events < 0:
                raise DomainError(f"row {i}: events must be a non-negative integer, got {row.events!r}")
            if row.levels in seen:
                raise DomainError(f"row {i}: factor levels {row.levels} appear more than once")
            seen.add(row.levels)

    @classmethod
    def from_columns(cls, factors, exposure, events):
        """Build from ``{factor: [level, ...]}`` plus parallel exposure/event lists."""
        names = tuple(factors)
        columns = [list(map(str, factors[name])) for name in names]
        rows = [
            DatasetRow(tuple(col[i] for col in columns), float(exposure[i]), int(events[i]))
            for i in range(len(events))
        ]
        return cls(names, rows)

    def __len__(self):
        return len(self.rows)

    @property
    def events(self):
        return np.array([r.events for r in self.rows], dtype=float)

    @property
    def exposure(self):
        return np.array([r.exposure for r in self.rows], dtype=float)

    def column(self, factor):
        try:
            j = self.factors.index(factor)
        except ValueError:
            raise DomainError(f"unknown factor {factor!r}; have {list(self.factors)}") from None
        return [r.levels[j] for r in self.rows]

    def levels(self, factor):
        return sorted(set(self.column(factor)))


@dataclass(frozen=True)
class DesignMatrix:
    labels: tuple
    matrix: np.ndarray


@dataclass(frozen=True)
class GlmFit:
    labels: tuple
    coefficients: np.ndarray
    fitted: np.ndarray
    deviance: float
    residual_df: int
    converged: bool
    iterations: int
    warnings: tuple = ()


@dataclass(frozen=True)
class DevianceRow:
    term: str
    df: int | None
    deviance: float | None
    resid_df: int
    resid_dev: float
    p_value: float | None


@dataclass(frozen=True)
class DevianceTable:
    rows: tuple
    warnings: tuple = field(default=())

    def row(self, term):
        for r in self.rows:
            if r.term == term:
                return r
        raise KeyError(term)


def _term_columns(data, term):
    labels, cols = [], []
    parts = term.split(":")
    for factor in parts:
        if factor not in data.factors:
            raise DomainError(f"unknown factor {factor!r} in term {term!r}; have {list(data.factors)}")
    # indicator columns per factor, reference level dropped
    per_factor = []
    for factor in parts:
        values = data.column(factor)
        per_factor.append(
            [(f"{factor}[{lvl}]", np.array([v == lvl for v in values], dtype=float)) for lvl in data.levels(factor)[1:]]
        )
    combos = [("", np.ones(len(data)))]
    for options in per_factor:
        combos = [
            (f"{lab}:{olab}" if lab else olab, vec * ovec) for lab, vec in combos for olab, ovec in options
        ]
    for lab, vec in combos:
        labels.append(lab)
        cols.append(vec)
    return labels, cols


def build_design(data, terms):
    """Intercept plus treatment-coded indicator columns for each term, in order."""
    labels = ["(Intercept)"]
    cols = [np.ones(len(data))]
    for term in terms:
        tl, tc = _term_columns(data, term)
        labels.extend(tl)
        cols.extend(tc)
    matrix = np.column_stack(cols) if cols else np.ones((len(data), 1))
    rank = 0
    for j in range(matrix.shape[1]):
        r = np.linalg.matrix_rank(matrix[:, : j + 1])
        if r == rank:
            raise RankDeficientError(labels[j])
        rank = r
    return DesignMatrix(tuple(labels), matrix)


def poisson_deviance(y, mu):
    """2 * sum[y ln(y/mu) - (y - mu)] with 0 ln 0 = 0."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    pos = y > 0
    term = np.where(pos, y * np.log(np.where(pos, y, 1.0) / mu), 0.0) - (y - mu)
    return max(0.0, 2.0 * float(np.sum(term)))


def poisson_loglik(y, mu):
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return float(np.sum(y * np.log(mu) - mu - np.array([math.lgamma(v + 1.0) for v in y])))


def fit_poisson(data, design):
    """Maximum-likelihood Poisson log-linear fit by IRLS.

    Starts from ``mu = y + 0.5`` and stops when the deviance changes by less
    than ``1e-10 * (|deviance| + 0.1)``, or after 50 iterations. Each step is
    a weighted least-squares solve via QR of the weighted design.
    """
    X = np.asarray(design.matrix, dtype=float)
    y = data.events
    offset = np.log(data.exposure)
    n, p = X.shape
    if n != len(data):
        raise FitError(f"design has {n} rows but data has {len(data)}")
    if np.linalg.matrix_rank(X) < p:
        raise RankDeficientError("<design>")

    mu = y + 0.5
    eta = np.log(mu)
    dev = poisson_deviance(y, mu)
    beta = np.zeros(p)
    converged = False
    it = 0
    for it in range(1, MAX_ITER + 1):
        z = eta - offset + (y - mu) / mu
        w = np.sqrt(mu)
        q, r = np.linalg.qr(X * w[:, None])
        beta = np.linalg.solve(r, q.T @ (w * z))
        eta = X @ beta + offset
        mu = np.exp(eta)
        dev_new = poisson_deviance(y, mu)
        if abs(dev_new - dev) / (abs(dev_new) + 0.1) < TOLERANCE:
            dev = dev_new
            converged = True
            break
        dev = dev_new

    warnings = []
    if not converged:
        warnings.append(f"IRLS did not converge in {MAX_ITER} iterations (deviance {dev:.6g})")
    if np.any(np.abs(beta) > SEPARATION_BOUND):
        big = [lab for lab, b in zip(design.labels, beta) if abs(b) > SEPARATION_BOUND]
        warnings.append(f"coefficients diverging (possible separation): {', '.join(big)}")
    elif np.any(mu < FITTED_FLOOR * max(1.0, float(np.mean(y)))):
        warnings.append("fitted values collapsing to zero (possible separation)")
    return GlmFit(
        labels=tuple(design.labels),
        coefficients=beta,
        fitted=mu,
        deviance=dev,
        residual_df=n - p,
        converged=converged,
        iterations=it,
        warnings=tuple(warnings),
    )


def anova_sequential(data, terms):
    """Analysis of deviance with terms added one at a time, first to last."""
    terms = list(terms)
    rows = []
    warnings = []
    prev = None
    for k in range(len(terms) + 1):
        name = "NULL" if k == 0 else terms[k - 1]
        try:
            design = build_design(data, terms[:k])
            fit = fit_poisson(data, design)
        except ClusterStatsError as exc:
            raise FitError(f"model with terms {terms[:k]}: {exc}") from exc
        warnings.extend(f"{name}: {w}" for w in fit.warnings)
        if prev is None:
            rows.append(DevianceRow(name, None, None, fit.residual_df, fit.deviance, None))
        else:
            df = prev.residual_df - fit.residual_df
            drop = max(0.0, prev.deviance - fit.deviance)
            rows.append(DevianceRow(name, df, drop, fit.residual_df, fit.deviance, chi2_sf(drop, df)))
        prev = fit
    return DevianceTable(tuple(rows), tuple(warnings))


def saturated_2x2_analysis(t):
    """Sequential deviance for outcome, condition and their interaction on a 2x2 table.

    The interaction row is the likelihood-ratio test of independence.
    """
    t.check_margins()
    data = FrequencyDataset.from_columns(
        {"outcome": ["r1", "r1", "r2", "r2"], "condition": ["c1", "c2", "c1", "c2"]},
        exposure=[1.0] * 4,
        events=list(t.cells),
    )
    return anova_sequential(data, ["outcome", "condition", "outcome:condition"])
