import io

import mpmath
import numpy as np
import pandas as pd
import pytest
from oracles import aux_r2
from scipy import stats
from sklearn.base import clone
from statsmodels.stats.diagnostic import het_breuschpagan
from statsmodels.stats.outliers_influence import variance_inflation_factor

from coconsume.exceptions import AnalysisError, RankDeficientError
from coconsume.inference import (
    OLSRegression,
    UnitIntervalScaler,
    bp_score_test,
    format_models,
    models_to_frame,
    ols_fit,
    read_covariates,
    rescale_unit,
    run_models,
    stars,
    vif,
)


def bp_oracle(resid, X):
    """Explicit auxiliary regression: n * R^2 of e^2 / mean(e^2) on [1, X]."""
    g = resid ** 2 / np.mean(resid ** 2)
    return len(g) * aux_r2(g, X)


def test_rescale_examples():
    df = pd.DataFrame({"a": [2.0, 4.0, 6.0], "b": [0.0, 0.3, 1.0], "c": [5.0, 5.0, 5.0]})
    out = rescale_unit(df, ["a", "b"])
    assert out["a"].tolist() == [0.0, 0.5, 1.0]
    assert out["b"].tolist() == [0.0, 0.3, 1.0]
    assert out["c"].tolist() == [5.0, 5.0, 5.0]
    with pytest.raises(ValueError, match="'c'"):
        rescale_unit(df, ["c"])
    with pytest.raises(KeyError):
        rescale_unit(df, ["zz"])


def test_unit_scaler_roundtrip():
    X = np.array([[1.0, 10.0], [3.0, 20.0], [2.0, 30.0]])
    sc = UnitIntervalScaler().fit(X)
    Z = sc.transform(X)
    assert Z.min(axis=0).tolist() == [0, 0] and Z.max(axis=0).tolist() == [1, 1]
    assert np.allclose(sc.inverse_transform(Z), X)
    with pytest.raises(ValueError):
        UnitIntervalScaler().fit(np.ones((3, 1)))


def test_stars():
    assert [stars(p) for p in (0.2, 0.04, 0.009, 0.0009, float("nan"))] == ["", "*", "**", "***", ""]


def test_exact_line():
    x = np.arange(10.0)
    res = ols_fit(2 * x, x[:, None])
    assert res.coef[0] == pytest.approx(2.0, abs=1e-12)
    assert res.intercept == pytest.approx(0.0, abs=1e-12)
    assert res.r2 == 1.0 and res.se[0] == pytest.approx(0.0, abs=1e-12)


def test_intercept_only_is_mean():
    y = np.array([1.0, 4.0, 7.0, 10.0])
    res = ols_fit(y, None)
    assert res.intercept == pytest.approx(y.mean())
    assert res.intercept_se == pytest.approx(y.std(ddof=1) / 2)


def test_adjusted_r2_hand_computed():
    # slope 0.6, intercept 2.2, RSS 2.4, TSS 6 -> R^2 = 0.6, adj = 1 - 0.4 * 4/3 = 7/15
    res = ols_fit([2, 4, 5, 4, 5], np.array([[1], [2], [3], [4], [5]]))
    assert res.coef[0] == pytest.approx(0.6) and res.intercept == pytest.approx(2.2)
    assert res.r2 == pytest.approx(0.6, abs=1e-12)
    assert res.adj_r2 == pytest.approx(7 / 15, abs=1e-12)


def test_errors():
    x = np.arange(6.0)
    with pytest.raises(RankDeficientError) as info:
        ols_fit(x ** 2, pd.DataFrame({"a": x, "b": 2 * x, "c": np.sin(x)}))
    assert set(info.value.columns) >= {"a", "b"} and "c" not in info.value.columns
    with pytest.raises(AnalysisError):
        ols_fit([1.0, 2.0], np.array([[1.0], [2.0]]))
    with pytest.raises(ValueError):
        ols_fit([1.0, np.nan, 3.0, 4.0], np.arange(4.0)[:, None])


def test_matches_statsmodels():
    import statsmodels.api as sm

    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 3))
    y = X @ [1.0, -0.5, 0.2] + rng.normal(size=40)
    res = ols_fit(y, X)
    ref = sm.OLS(y, sm.add_constant(X)).fit()
    assert np.allclose(res.coef, ref.params[1:], atol=1e-10)
    assert np.allclose(res.se, ref.bse[1:], atol=1e-10)
    assert np.allclose(res.p, ref.pvalues[1:], atol=1e-10)
    assert res.adj_r2 == pytest.approx(ref.rsquared_adj, abs=1e-12)


def test_planted_coefficients_within_three_se():
    truth = np.array([0.4, -0.2])
    hits = np.zeros(2)
    reps = 1000
    for seed in range(reps):
        rng = np.random.default_rng(seed)
        X = rng.uniform(size=(58, 2))
        y = 0.1 + X @ truth + rng.normal(scale=0.05, size=58)
        res = ols_fit(y, X, diagnostics=False)
        hits += np.abs(res.coef - truth) <= 3 * res.se
    assert np.all(hits / reps >= 0.99)


def test_residuals_orthogonal():
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(58, 4))
    y = rng.uniform(size=58)
    res = ols_fit(y, X)
    A = np.column_stack([np.ones(58), X])
    assert np.max(np.abs(A.T @ res.residuals)) < 1e-8


def test_response_rescaling_affine_map():
    rng = np.random.default_rng(4)
    X = rng.uniform(size=(30, 3))
    y = X @ [3.0, -1.0, 0.5] + rng.normal(size=30) + 7
    scaled = (y - y.min()) / (y.max() - y.min())
    a, b = ols_fit(y, X), ols_fit(scaled, X)
    assert np.allclose(a.t, b.t, rtol=1e-10)
    assert np.allclose(a.coef, b.coef * (y.max() - y.min()), rtol=1e-10)


def test_vif_examples():
    # centered, mutually orthogonal columns
    X = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
    assert vif(X).tolist() == [1.0, 1.0]
    x = np.arange(8.0)
    assert np.all(np.isinf(vif(np.column_stack([x, x, np.cos(x)]))[:2]))
    with pytest.raises(ValueError):
        vif(x[:, None])


def test_vif_matches_auxiliary_regressions():
    rng = np.random.default_rng(5)
    for _ in range(10):
        x1 = rng.normal(size=50)
        X = np.column_stack([x1, x1 + rng.normal(scale=0.1, size=50), rng.normal(size=50)])
        got = vif(X)
        for j in range(3):
            expected = 1.0 / (1.0 - aux_r2(X[:, j], np.delete(X, j, axis=1)))
            assert got[j] == pytest.approx(expected, rel=1e-8)
        Xc = np.column_stack([np.ones(50), X])
        for j in range(3):
            assert got[j] == pytest.approx(variance_inflation_factor(Xc, j + 1), rel=1e-8)
        assert np.all(got >= 1)


def test_bp_matches_auxiliary_regression_and_statsmodels():
    rng = np.random.default_rng(6)
    for _ in range(10):
        X = rng.uniform(size=(60, 3))
        y = X @ [1.0, 2.0, 0.0] + rng.normal(size=60) * (0.2 + X[:, 0])
        res = ols_fit(y, X)
        stat, p = bp_score_test(res, X)
        assert stat == pytest.approx(bp_oracle(res.residuals, X), rel=1e-8)
        assert (res.bp_statistic, res.bp_p) == (stat, p)
        lm, lm_p, _, _ = het_breuschpagan(res.residuals, np.column_stack([np.ones(60), X]), robust=True)
        assert stat == pytest.approx(lm, rel=1e-8) and p == pytest.approx(lm_p, rel=1e-8)
        classic, _ = bp_score_test(res, X, studentize=False)
        lm2, _, _, _ = het_breuschpagan(res.residuals, np.column_stack([np.ones(60), X]), robust=False)
        assert classic == pytest.approx(lm2, rel=1e-8)


def test_bp_zero_residuals():
    x = np.arange(6.0)
    res = ols_fit(3 * x + 1, x[:, None])
    res.residuals = np.zeros(6)
    assert bp_score_test(res, x[:, None]) == (0.0, 1.0)


def test_bp_calibration_and_power():
    def rejection_rate(n, reps, hetero, seed0):
        hits = 0
        for seed in range(seed0, seed0 + reps):
            rng = np.random.default_rng(seed)
            x = rng.uniform(0.1, 1, size=(n, 1))
            sd = np.sqrt(x[:, 0]) if hetero else 1.0
            y = 1 + 2 * x[:, 0] + rng.normal(size=n) * sd * (3 if hetero else 1)
            hits += ols_fit(y, x).bp_p < 0.05
        return hits / reps

    assert 0.03 <= rejection_rate(58, 2000, False, 0) <= 0.07
    assert rejection_rate(200, 300, True, 10_000) > 0.8


def test_tail_probabilities_against_high_precision():
    # scipy supplies t and chi-squared tails; check them against mpmath
    mpmath.mp.dps = 40
    for df in (1, 5, 53, 200):
        for t in (0.1, 1.0, 2.5, 6.0):
            x = df / (df + t * t)
            ref = mpmath.betainc(df / 2, 0.5, 0, x, regularized=True)
            assert 2 * stats.t.sf(t, df) == pytest.approx(float(ref), rel=1e-10, abs=1e-300)
        for c in (0.5, 3.0, 12.0, 40.0):
            ref = mpmath.gammainc(df / 2, c / 2, mpmath.inf, regularized=True)
            assert stats.chi2.sf(c, df) == pytest.approx(float(ref), rel=1e-10, abs=1e-300)


def synthetic_covariates(seed, n=58, signal="culture"):
    rng = np.random.default_rng(seed)
    cols = ["IDV", "UAI", "PDI", "MAS", "log10_gdp_pc", "language_evc", "internet_users"]
    cov = pd.DataFrame(rng.uniform(size=(n, len(cols))), columns=cols,
                       index=[f"C{k:02d}" for k in range(n)])
    if signal == "culture":
        y = 0.8 * cov["IDV"] - 0.5 * cov["PDI"] + rng.normal(scale=0.15, size=n)
    else:
        y = pd.Series(rng.normal(size=n), index=cov.index)
    return cov, pd.DataFrame({"betweenness": y})


def test_planted_culture_signal_ordering():
    wins = 0
    for seed in range(20):
        cov, scores = synthetic_covariates(seed)
        res = run_models(cov, scores)
        wins += res["culture"].adj_r2 > res["nonculture"].adj_r2
        assert res["full"].r2 >= res["culture"].r2 - 1e-12
    assert wins == 20


def test_outcome_identical_to_predictor():
    cov, _ = synthetic_covariates(1)
    res = run_models(cov, pd.DataFrame({"closeness": cov["UAI"]}), outcome="closeness",
                           models=("culture",))
    r = res["culture"]
    assert r.coef[r.names.index("UAI")] == pytest.approx(1.0, abs=1e-10)
    assert r.r2 == pytest.approx(1.0, abs=1e-12)


def test_extra_control_adds_one_row_and_missing_columns():
    cov, scores = synthetic_covariates(2)
    base = run_models(cov, scores)
    cov["migration_degree"] = np.random.default_rng(0).uniform(size=len(cov))
    extra = run_models(cov, scores, extra_controls=["migration_degree"])
    for m in base:
        assert extra[m].names == base[m].names + ["migration_degree"]
    rows = format_models(extra).splitlines()
    assert len(rows) == len(format_models(base).splitlines()) + 1
    with pytest.raises(KeyError, match="IDV"):
        run_models(cov.drop(columns="IDV"), scores)
    with pytest.raises(KeyError, match="closeness"):
        run_models(cov, scores, outcome="closeness")


def test_incomplete_rows_dropped():
    cov, scores = synthetic_covariates(3)
    cov.iloc[0, 0] = np.nan
    res = run_models(cov, scores)
    assert all(r.n == 57 for r in res.values())
    frame = models_to_frame(res)
    assert set(frame["model"]) == {"full", "nonculture", "culture"}


def test_read_covariates():
    text = "country,IDV,UAI\nUSA,91,46\nDEU,67,x\n"
    df = read_covariates(io.StringIO(text))
    assert df.index.tolist() == ["DEU", "USA"] and np.isnan(df.loc["DEU", "UAI"])
    with pytest.raises(ValueError, match="USA"):
        read_covariates(io.StringIO(text + "USA,1,2\n"))
    with pytest.raises(ValueError):
        read_covariates(io.StringIO("iso,IDV\nUSA,1\n"))


def test_estimator():
    rng = np.random.default_rng(8)
    X = pd.DataFrame(rng.uniform(size=(20, 2)), columns=["u", "v"])
    y = 1 + 2 * X["u"] - X["v"]
    est = OLSRegression().fit(X, y)
    assert est.result_.names == ["u", "v"]
    assert np.allclose(est.predict(X), y)
    assert est.score(X, y) == pytest.approx(1.0)
    assert clone(est).get_params() == {"fit_intercept": True, "diagnostics": True}
