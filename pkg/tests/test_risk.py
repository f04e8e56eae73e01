import math

import numpy as np
import pytest

from mpshrink import linalg
from mpshrink.estimators import (
    DegenerateFError,
    JamesStein,
    PositivePartJS,
    Usual,
    constant_shrinkage,
    estimate,
    js_default_constant,
    positive_part_shrinkage,
)
from mpshrink.randgen import Identity, RngStream, Spiked, batch_normal_wishart
from mpshrink.risk import (
    RiskRow,
    ScenarioConfig,
    default_theta_norms,
    invariant_loss,
    mc_risk,
    risk_curve,
    run_replicates,
    scenario_with,
    summarize_losses,
    unbiased_risk_difference,
)


# ---------------------------------------------------------------------- loss

def test_invariant_loss_value():
    delta = np.array([2.0, 1.0])
    theta = np.array([1.0, -1.0])
    sigma_inv = np.diag([2.0, 3.0])
    assert invariant_loss(delta, theta, sigma_inv) == 14.0


def test_invariant_loss_zero_at_truth():
    theta = np.array([1.0, 2.0, 3.0])
    assert invariant_loss(theta, theta, np.eye(3)) == 0.0


def test_invariant_loss_shape_check():
    with pytest.raises(linalg.DimensionMismatchError):
        invariant_loss(np.zeros(3), np.zeros(2), np.eye(3))


# -------------------------------------------------- unbiased risk difference

S5 = np.diag([1.0, 1.0, 1.0, 0.0, 0.0])
E1 = np.array([1.0, 0.0, 0.0, 0.0, 0.0])  # F = 1, m = 3, p = 5


def test_risk_difference_zero_shrinkage():
    assert unbiased_risk_difference(E1, S5, constant_shrinkage(0.0), n=3) == 0.0


def test_risk_difference_constant_example():
    # r = 0.25: 0.0625 * (3 + 5 - 6 + 3) - 2 * 0.25 * 1 = 0.3125 - 0.5
    got = unbiased_risk_difference(E1, S5, constant_shrinkage(0.25), n=3)
    assert got == pytest.approx(-0.1875, abs=1e-14)


def test_risk_difference_includes_derivative_term():
    # min(2, F) at F = 1: r = 1, r' = 1, so 5 - 2 - 4 * 1 * 2 = -5
    got = unbiased_risk_difference(E1, S5, positive_part_shrinkage(2.0), n=3)
    assert got == pytest.approx(-5.0, abs=1e-14)


def test_risk_difference_negative_inside_admissible_range():
    # anywhere strictly inside (0, bound) the integrand at F = 1, m = 3 is negative
    for a in (0.1, 0.2, 0.3, 0.39):
        got = unbiased_risk_difference(E1, S5, constant_shrinkage(a), n=3)
        assert got < 0.0


def test_risk_difference_degenerate_raises():
    x = np.array([0.0, 0.0, 0.0, 1.0, 1.0])  # orthogonal to the column space
    with pytest.raises(DegenerateFError):
        unbiased_risk_difference(x, S5, constant_shrinkage(0.25), n=3)


def test_risk_difference_validation():
    with pytest.raises(linalg.DimensionMismatchError):
        unbiased_risk_difference(np.zeros((2, 2)), np.eye(2), constant_shrinkage(0.1), n=3)
    with pytest.raises(ValueError):
        unbiased_risk_difference(E1, S5, constant_shrinkage(0.1), n=0)
    with pytest.raises(linalg.DimensionMismatchError):
        unbiased_risk_difference(np.zeros(3), S5, constant_shrinkage(0.1), n=3)


# ------------------------------------------------------------- configuration

def test_default_theta_norms_grid():
    norms = default_theta_norms(4)
    assert norms[0] == 0.0
    assert norms[-1] == pytest.approx(12.0)
    assert len(norms) == 13
    assert np.allclose(np.diff(norms), 1.0)


def test_scenario_defaults():
    cfg = ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[Usual()])
    assert np.allclose(cfg.theta_direction, 0.5 * np.ones(4))
    assert np.linalg.norm(cfg.theta_direction) == pytest.approx(1.0)
    assert len(cfg.theta_norms) == 13


def test_scenario_normalizes_direction():
    cfg = ScenarioConfig(
        p=3, n=3, cov=Identity(), estimators=[], theta_direction=[3.0, 0.0, 4.0]
    )
    assert np.allclose(cfg.theta_direction, [0.6, 0.0, 0.8])


def test_scenario_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(p=2, n=10, cov=Identity(), estimators=[])
    with pytest.raises(ValueError):
        ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[], replicates=0)
    with pytest.raises(ValueError):
        ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[], theta_direction=[1.0, 0.0])
    with pytest.raises(ValueError):
        ScenarioConfig(
            p=4, n=3, cov=Identity(), estimators=[], theta_direction=np.zeros(4)
        )
    with pytest.raises(ValueError):
        ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[], theta_norms=[2.0, 1.0])
    with pytest.raises(ValueError):
        ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[], theta_norms=[-1.0, 0.0])


def test_scenario_with_revalidates():
    cfg = ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[Usual()])
    bumped = scenario_with(cfg, replicates=77, name="bumped")
    assert bumped.replicates == 77 and bumped.name == "bumped"
    assert cfg.replicates == 10_000
    with pytest.raises(ValueError):
        scenario_with(cfg, n=2)


def test_summarize_losses():
    est = summarize_losses(np.array([1.0, 2.0, 3.0]))
    assert est.mean_loss == 2.0
    assert est.std_error == pytest.approx(1.0 / math.sqrt(3.0))
    assert est.losses is None
    single = summarize_losses(np.array([4.0]))
    assert single.std_error == 0.0


# -------------------------------------------------------------------- engine

SMALL = ScenarioConfig(
    p=6,
    n=4,
    cov=Spiked(),
    estimators=[Usual(), JamesStein(0.5), PositivePartJS(0.5)],
    replicates=64,
    master_seed=99,
    name="small",
)


def test_js_zero_equals_usual_bitwise():
    study = run_replicates(SMALL, [Usual(), JamesStein(0.0)], theta_norm=2.0)
    assert np.array_equal(study.losses[0], study.losses[1])


def test_engine_matches_per_draw_estimates():
    # rebuild the exact draws and push each through estimate()
    from mpshrink.randgen import build_covariance

    theta_norm = 1.5
    study = run_replicates(SMALL, SMALL.estimators, theta_norm)
    sigma = build_covariance(SMALL.cov, SMALL.p)
    sqrt_sigma = linalg.sym_sqrt_pd(sigma)
    sigma_inv = linalg.inv_pd(sigma)
    theta = theta_norm * SMALL.theta_direction
    x, y = batch_normal_wishart(
        SMALL.p, SMALL.n, theta, sqrt_sigma, SMALL.master_seed, 0, SMALL.replicates
    )
    for i in range(SMALL.replicates):
        s = y[i].T @ y[i]
        for k, spec in enumerate(SMALL.estimators):
            out = estimate(spec, x[i], s)
            want = invariant_loss(out.delta, theta, sigma_inv)
            assert study.losses[k, i] == pytest.approx(want, rel=1e-10, abs=1e-12)


def test_engine_bitwise_reproducible():
    a = run_replicates(SMALL, SMALL.estimators, 3.0)
    b = run_replicates(SMALL, SMALL.estimators, 3.0)
    assert np.array_equal(a.losses, b.losses)


def test_jobs_do_not_change_results():
    cfg = scenario_with(SMALL, replicates=2100)  # spans two chunks
    serial = run_replicates(cfg, cfg.estimators, 1.0, jobs=1)
    threaded = run_replicates(cfg, cfg.estimators, 1.0, jobs=4)
    assert np.array_equal(serial.losses, threaded.losses)


def test_usual_losses_do_not_depend_on_theta_norm():
    # common draws: X - theta is the same noise at every theta_norm, up to
    # the one rounding taken by (theta + noise) - theta
    a = run_replicates(SMALL, [Usual()], 0.0)
    b = run_replicates(SMALL, [Usual()], 6.0)
    assert np.allclose(a.losses, b.losses, rtol=1e-12, atol=0.0)


def test_usual_risk_is_dimension():
    cfg = ScenarioConfig(
        p=5, n=4, cov=Identity(), estimators=[Usual()], replicates=2000, master_seed=5
    )
    est = mc_risk(cfg, Usual(), theta_norm=0.0)
    assert est.replicates == 2000
    assert abs(est.mean_loss - 5.0) < 5.0 * est.std_error


def test_james_stein_beats_usual_at_origin():
    cfg = ScenarioConfig(
        p=10,
        n=5,
        cov=Spiked(),
        estimators=[Usual(), JamesStein(js_default_constant(10, 5))],
        replicates=4000,
        master_seed=31,
    )
    study = run_replicates(cfg, cfg.estimators, theta_norm=0.0)
    usual = summarize_losses(study.losses[0])
    js = summarize_losses(study.losses[1])
    gap_se = math.sqrt(usual.std_error**2 + js.std_error**2)
    assert js.mean_loss < usual.mean_loss - 3.0 * gap_se


def test_mc_risk_keep_losses():
    est = mc_risk(SMALL, JamesStein(0.5), theta_norm=0.0, keep_losses=True)
    assert est.losses is not None and est.losses.shape == (64,)
    assert est.mean_loss == pytest.approx(est.losses.mean())


def test_sure_tracks_actual_risk_gap():
    # per replicate, loss - p - rho has mean zero; t-statistic stays small
    a = js_default_constant(8, 6)
    cfg = ScenarioConfig(
        p=8,
        n=6,
        cov=Identity(),
        estimators=[JamesStein(a)],
        replicates=4000,
        master_seed=44,
    )
    study = run_replicates(
        cfg, cfg.estimators, theta_norm=2.0, sure_r=constant_shrinkage(a)
    )
    diff = study.losses[0] - cfg.p - study.sure
    se = diff.std(ddof=1) / math.sqrt(diff.size)
    assert abs(diff.mean()) < 4.0 * se


# ---------------------------------------------------------------- risk table

def test_risk_curve_rows_and_grouping():
    cfg = ScenarioConfig(
        p=4,
        n=3,
        cov=Spiked(),
        estimators=[Usual(), JamesStein(0.25)],
        theta_norms=[0.0, 2.0],
        replicates=50,
        master_seed=1,
        name="grid",
    )
    rows = risk_curve(cfg)
    assert len(rows) == 4
    assert [r.estimator for r in rows] == ["usual", "usual", "js(0.25)", "js(0.25)"]
    assert [r.theta_norm for r in rows] == [0.0, 2.0, 0.0, 2.0]
    assert all(isinstance(r, RiskRow) for r in rows)
    assert all(r.scenario == "grid" and r.cov_model == "spiked" for r in rows)
    assert all(r.p == 4 and r.n == 3 and r.replicates == 50 for r in rows)
    # usual is invariant: identical risk in both cells
    assert rows[0].risk == rows[1].risk


def test_risk_curve_deterministic():
    cfg = ScenarioConfig(
        p=4,
        n=3,
        cov=Identity(),
        estimators=[JamesStein(0.25)],
        theta_norms=[0.0],
        replicates=60,
        master_seed=8,
    )
    first = risk_curve(cfg)
    second = risk_curve(cfg)
    assert [(r.risk, r.std_err) for r in first] == [(r.risk, r.std_err) for r in second]


def test_risk_curve_empty_estimators():
    cfg = ScenarioConfig(p=4, n=3, cov=Identity(), estimators=[])
    assert risk_curve(cfg) == []
