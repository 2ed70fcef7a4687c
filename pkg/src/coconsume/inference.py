"""OLS regressions of openness scores on country covariates, with diagnostics.

All variables entering :func:`run_models` are min-max rescaled to the
unit interval first, so coefficients are comparable across predictors.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import pandas as pd
from scipy import linalg, stats
from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .exceptions import AnalysisError, RankDeficientError

CULTURE_COLUMNS = ("IDV", "UAI", "PDI", "MAS")
NONCULTURE_COLUMNS = ("log10_gdp_pc", "language_evc", "internet_users")
OUTCOMES = ("betweenness", "closeness", "composite_openness")
MODELS = ("full", "nonculture", "culture")
RANK_RTOL = 1e-10
# 1 - R_j^2 below this counts as perfect collinearity in vif()
VIF_COLLINEAR_TOL = 1e-12


def stars(p):
    if p is None or not np.isfinite(p):
        return ""
    if p < 0.001:
        return "***"
    if p < 0.01:
        return "**"
    if p < 0.05:
        return "*"
    return ""


def rescale_unit(table, columns=None):
    """Return a copy of ``table`` with ``columns`` mapped onto [0, 1].

    Raises ValueError naming the first constant column.
    """
    out = table.copy()
    columns = list(table.columns if columns is None else columns)
    for col in columns:
        if col not in out.columns:
            raise KeyError(f"missing column {col!r}")
        x = out[col].astype(float)
        lo, hi = x.min(), x.max()
        if not hi > lo:
            raise ValueError(f"column {col!r} is constant and cannot be rescaled")
        out[col] = (x - lo) / (hi - lo)
    return out


class UnitIntervalScaler(TransformerMixin, BaseEstimator):
    """Column-wise min-max scaling to [0, 1]; refuses constant columns."""

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        self.data_min_ = X.min(axis=0)
        self.data_range_ = X.max(axis=0) - self.data_min_
        bad = np.flatnonzero(~(self.data_range_ > 0))
        if bad.size:
            raise ValueError(f"constant column(s) at position(s) {bad.tolist()}")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "data_range_")
        X = check_array(X, dtype=float)
        return (X - self.data_min_) / self.data_range_

    def inverse_transform(self, X):
        check_is_fitted(self, "data_range_")
        return check_array(X, dtype=float) * self.data_range_ + self.data_min_


@dataclass
class RegressionResult:
    names: list
    coef: np.ndarray
    se: np.ndarray
    t: np.ndarray
    p: np.ndarray
    intercept: Optional[float]
    intercept_se: Optional[float]
    intercept_t: Optional[float]
    intercept_p: Optional[float]
    r2: float
    adj_r2: float
    n: int
    df_resid: int
    sigma2: float
    residuals: np.ndarray = field(repr=False)
    fitted: np.ndarray = field(repr=False)
    vif: Optional[dict] = None
    bp_statistic: Optional[float] = None
    bp_p: Optional[float] = None

    def coef_table(self):
        rows = {
            name: {"coef": b, "se": s, "t": t, "p": p}
            for name, b, s, t, p in zip(self.names, self.coef, self.se, self.t, self.p)
        }
        if self.intercept is not None:
            rows = {"Intercept": {"coef": self.intercept, "se": self.intercept_se,
                                  "t": self.intercept_t, "p": self.intercept_p}, **rows}
        df = pd.DataFrame.from_dict(rows, orient="index")
        if self.vif is not None:
            df["vif"] = pd.Series(self.vif)
        return df


def _as_design(X, names=None):
    if isinstance(X, pd.DataFrame):
        names = list(X.columns) if names is None else list(names)
        X = X.to_numpy(dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if names is None:
        names = [f"x{j}" for j in range(X.shape[1])]
    if len(names) != X.shape[1]:
        raise ValueError("names must match the number of predictor columns")
    return X, list(names)


def _collinear_columns(A, labels):
    """Names of columns taking part in a linear dependency of ``A``."""
    _, r, piv = linalg.qr(A, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > RANK_RTOL * diag[0])) if diag.size and diag[0] > 0 else 0
    kept, dropped = piv[:rank], piv[rank:]
    involved = set()
    for j in dropped:
        involved.add(labels[j])
        if rank:
            coef = np.linalg.lstsq(A[:, kept], A[:, j], rcond=None)[0]
            scale = np.abs(coef).max() if coef.size else 0.0
            involved.update(labels[kept[k]] for k in np.flatnonzero(np.abs(coef) > 1e-8 * max(scale, 1)))
    return rank, [lab for lab in labels if lab in involved]


def _fit_ls(A, y):
    """Least squares through a QR decomposition; returns (beta, R)."""
    q, r = np.linalg.qr(A, mode="reduced")
    beta = linalg.solve_triangular(r, q.T @ y)
    return beta, r


def ols_fit(y, X, intercept=True, names=None, diagnostics=True):
    """Ordinary least squares with classical standard errors.

    Parameters
    ----------
    y : array-like, shape (n,)
    X : array-like or DataFrame, shape (n, p)
        Predictors, without the constant column. ``p`` may be 0.
    intercept : bool
    names : list of str, optional
    diagnostics : bool
        Fill ``vif`` (needs at least two predictors) and the
        Breusch-Pagan score test.

    Raises
    ------
    RankDeficientError
        When the design is numerically rank deficient; the exception names
        the columns involved.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.shape[0]
    if X is None:
        X, names = np.empty((n, 0)), []
    X, names = _as_design(X, names)
    if X.shape[0] != n:
        raise ValueError(f"X has {X.shape[0]} rows but y has {n}")
    p = X.shape[1]
    k = p + int(intercept)
    if k == 0:
        raise ValueError("model has no terms")
    if n <= k:
        raise AnalysisError(f"need more observations than parameters (n={n}, parameters={k})")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in regression input")
    A = np.column_stack([np.ones(n), X]) if intercept else X
    labels = (["Intercept"] if intercept else []) + names
    rank, involved = _collinear_columns(A, labels)
    if rank < k:
        raise RankDeficientError(f"design matrix is rank deficient; collinear columns: {involved}", involved)

    beta, r = _fit_ls(A, y)
    fitted = A @ beta
    resid = y - fitted
    df_resid = n - k
    rss = float(resid @ resid)
    sigma2 = rss / df_resid
    r_inv = linalg.solve_triangular(r, np.eye(k))
    cov = sigma2 * (r_inv @ r_inv.T)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(se > 0, beta / np.where(se > 0, se, 1.0), np.where(beta == 0, np.nan, np.sign(beta) * np.inf))
    pvals = np.where(np.isnan(t), np.nan, 2.0 * stats.t.sf(np.abs(t), df_resid))

    tss = float(np.sum((y - y.mean()) ** 2)) if intercept else float(y @ y)
    if tss > 0:
        r2 = 1.0 - rss / tss
    else:
        r2 = 1.0 if rss == 0 else 0.0
    r2 = min(max(r2, 0.0), 1.0)
    adj_r2 = 1.0 - (1.0 - r2) * (n - int(intercept)) / df_resid

    off = int(intercept)
    res = RegressionResult(
        names=names,
        coef=beta[off:],
        se=se[off:],
        t=t[off:],
        p=pvals[off:],
        intercept=float(beta[0]) if intercept else None,
        intercept_se=float(se[0]) if intercept else None,
        intercept_t=float(t[0]) if intercept else None,
        intercept_p=float(pvals[0]) if intercept else None,
        r2=r2,
        adj_r2=adj_r2,
        n=n,
        df_resid=df_resid,
        sigma2=sigma2,
        residuals=resid,
        fitted=fitted,
    )
    if diagnostics:
        if p >= 2:
            res.vif = dict(zip(names, vif(X)))
        if p >= 1:
            res.bp_statistic, res.bp_p = bp_score_test(res, X)
    return res


def vif(X):
    """Variance inflation factors ``1 / (1 - R_j^2)``.

    Each column is regressed on the others plus an intercept. A column that
    the others reproduce exactly gets ``inf``.
    """
    X, _ = _as_design(X)
    n, p = X.shape
    if p < 2:
        raise ValueError("VIF needs at least two predictors")
    out = np.empty(p)
    for j in range(p):
        xj = X[:, j]
        others = np.column_stack([np.ones(n), np.delete(X, j, axis=1)])
        coef = np.linalg.lstsq(others, xj, rcond=None)[0]
        resid = xj - others @ coef
        rss = float(resid @ resid)
        tss = float(np.sum((xj - xj.mean()) ** 2))
        if tss == 0 or rss <= VIF_COLLINEAR_TOL * tss:
            out[j] = np.inf
        else:
            out[j] = tss / rss
    return out


def bp_score_test(result, X, studentize=True):
    """Score test for non-constant error variance.

    Squared residuals, divided by their mean, are regressed on ``X`` (plus
    an intercept). With ``studentize`` (default) the statistic is ``n * R^2``
    of that auxiliary regression; otherwise it is half its explained sum of
    squares (the classical, normality-based form). Either is referred to a
    chi-squared law with ``X.shape[1]`` degrees of freedom.

    Returns
    -------
    (statistic, p_value)
    """
    X, _ = _as_design(X)
    e2 = np.asarray(result.residuals, dtype=float) ** 2
    n, df = X.shape
    scale = e2.mean()
    if not scale > 0:
        return 0.0, 1.0
    g = e2 / scale
    A = np.column_stack([np.ones(n), X])
    coef = np.linalg.lstsq(A, g, rcond=None)[0]
    fit = A @ coef
    tss = float(np.sum((g - g.mean()) ** 2))
    if tss <= 0:
        return 0.0, 1.0
    ess = float(np.sum((fit - g.mean()) ** 2))
    stat = n * ess / tss if studentize else ess / 2.0
    return float(stat), float(stats.chi2.sf(stat, df))


class OLSRegression(RegressorMixin, BaseEstimator):
    """Estimator facade over :func:`ols_fit`.

    After ``fit``: ``coef_``, ``intercept_``, ``result_`` (a
    :class:`RegressionResult`).
    """

    def __init__(self, fit_intercept=True, diagnostics=True):
        self.fit_intercept = fit_intercept
        self.diagnostics = diagnostics

    def fit(self, X, y):
        names = list(X.columns) if isinstance(X, pd.DataFrame) else None
        X, y = check_X_y(X, y, dtype=float, y_numeric=True)
        self.result_ = ols_fit(y, X, intercept=self.fit_intercept, names=names, diagnostics=self.diagnostics)
        self.coef_ = self.result_.coef
        self.intercept_ = self.result_.intercept if self.fit_intercept else 0.0
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        return X @ self.coef_ + self.intercept_


def read_covariates(path_or_buffer):
    """Covariate CSV: a ``country`` column plus numeric columns."""
    df = pd.read_csv(path_or_buffer, dtype={"country": str})
    if "country" not in df.columns:
        raise ValueError("covariate CSV needs a 'country' column")
    dup = df["country"][df["country"].duplicated()].unique().tolist()
    if dup:
        raise ValueError(f"duplicate country rows: {dup}")
    df = df.set_index("country").sort_index()
    for col in df.columns:
        df[col] = pd.to_numeric(df[col], errors="coerce")
    return df


def model_columns(model, extra_controls=(), culture=CULTURE_COLUMNS, nonculture=NONCULTURE_COLUMNS):
    base = {"full": list(nonculture) + list(culture), "nonculture": list(nonculture), "culture": list(culture)}
    if model not in base:
        raise ValueError(f"model must be one of {MODELS}, got {model!r}")
    return base[model] + [c for c in extra_controls if c not in base[model]]


def run_models(cov, scores, outcome="betweenness", extra_controls=(), models=MODELS,
                     culture=CULTURE_COLUMNS, nonculture=NONCULTURE_COLUMNS):
    """Fit the full, non-culture and culture models for one outcome.

    Parameters
    ----------
    cov : DataFrame indexed by country
    scores : DataFrame indexed by country holding the outcome column
        (e.g. ``CentralityScores.to_frame()`` joined with openness scores).
    outcome : str
    extra_controls : sequence of str
        Columns appended to every model (e.g. ``migration_degree``).

    Rows missing any variable of the full model are dropped before
    rescaling, so all models share the same countries.

    Returns
    -------
    dict model name -> RegressionResult
    """
    if outcome not in scores.columns:
        raise KeyError(f"missing outcome column {outcome!r}")
    needed = model_columns("full", extra_controls, culture, nonculture)
    missing = [c for c in needed if c not in cov.columns]
    if missing:
        raise KeyError(f"missing covariate column(s): {missing}")
    data = cov[needed].join(scores[[outcome]], how="inner").dropna()
    data = rescale_unit(data, needed + [outcome])
    out = {}
    for model in models:
        cols = model_columns(model, extra_controls, culture, nonculture)
        out[model] = ols_fit(data[outcome].to_numpy(), data[cols], intercept=True, names=cols)
    return out


def _cell(b, se, p):
    return f"{b:.3f}{stars(p)} ({se:.3f})"


def format_models(results, title=None):
    """Plain-text table with one column per model: coef+stars (SE), n, R^2, adj. R^2."""
    models = list(results)
    names = []
    for res in results.values():
        names += [n for n in res.names if n not in names]
    rows = [["", *[m for m in models]]]
    rows.append(["Intercept", *[_cell(r.intercept, r.intercept_se, r.intercept_p) for r in results.values()]])
    for name in names:
        row = [name]
        for res in results.values():
            if name in res.names:
                j = res.names.index(name)
                row.append(_cell(res.coef[j], res.se[j], res.p[j]))
            else:
                row.append("")
        rows.append(row)
    rows.append(["Sample size", *[str(r.n) for r in results.values()]])
    rows.append(["R^2", *[f"{r.r2:.3f}" for r in results.values()]])
    rows.append(["Adjusted R^2", *[f"{r.adj_r2:.3f}" for r in results.values()]])
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    lines = [title] if title else []
    lines += ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows]
    lines.append("* p<.05, ** p<.01, *** p<.001; variables rescaled to the unit interval.")
    return "\n".join(lines) + "\n"


def models_to_frame(results):
    """Long table: model, term, coef, se, t, p, stars, plus fit rows."""
    recs = []
    for model, res in results.items():
        table = res.coef_table()
        for term, row in table.iterrows():
            recs.append({"model": model, "term": term, "coef": row["coef"], "se": row["se"],
                         "t": row["t"], "p": row["p"], "stars": stars(row["p"]),
                         "vif": row.get("vif", np.nan)})
        recs.append({"model": model, "term": "n", "coef": float(res.n)})
        recs.append({"model": model, "term": "r2", "coef": res.r2})
        recs.append({"model": model, "term": "adj_r2", "coef": res.adj_r2})
        if res.bp_statistic is not None:
            recs.append({"model": model, "term": "bp_statistic", "coef": res.bp_statistic, "p": res.bp_p})
    return pd.DataFrame.from_records(recs, columns=["model", "term", "coef", "se", "t", "p", "stars", "vif"])
