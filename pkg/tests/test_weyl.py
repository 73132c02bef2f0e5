import math

import numpy as np
import pytest
from scipy.special import j1

from upb import (
    ConfigError,
    IntegrationConfig,
    RangeError,
    UnsupportedStrategyError,
    ValidationError,
    ball_mass,
    ball_volume_fraction,
    log_total_mass,
    max_radius,
    normalizer_estimate,
    resolve_strategy,
    total_mass,
    weyl_density,
)


# --- independent oracles ----------------------------------------------------


def density_vandermonde(theta):
    """|det V|^2 with V the Vandermonde matrix of the eigenvalues: the
    definition of the density, computed through an unrelated code path."""
    z = np.exp(1j * np.asarray(theta, dtype=float))
    v = np.vander(z, increasing=True)
    return abs(np.linalg.det(v)) ** 2


def mass_riemann_2d(r, metric, cells=600):
    """Midpoint Riemann sum of the n=2 ball mass on the full angle box."""
    edges = np.linspace(-np.pi, np.pi, cells + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    h = edges[1] - edges[0]
    t1, t2 = np.meshgrid(mid, mid, indexing="ij")
    dens = np.abs(np.exp(1j * t1) - np.exp(1j * t2)) ** 2
    if metric == "euclidean":
        inside = np.sin(t1 / 2) ** 2 + np.sin(t2 / 2) ** 2 <= (r / 2.0) ** 2
    else:
        inside = t1**2 + t2**2 <= r * r
    return float((dens * inside).sum()) * h * h


def mass_bessel_riemannian_2(r):
    """Closed form for the n=2 riemannian ball, valid for r <= pi:
    integrate 2 - 2cos(t1 - t2) over the disk of radius r."""
    return 2.0 * math.pi * r * r - 2.0 * math.sqrt(2.0) * math.pi * r * j1(math.sqrt(2.0) * r)


def mass_circle_1(r, metric):
    """n=1 closed forms: the density is 1, so mass is arc length."""
    if metric == "euclidean":
        return 4.0 * math.asin(min(1.0, r / 2.0))
    return 2.0 * min(r, math.pi)


# --- density ------------------------------------------------------------------


def test_density_examples():
    assert weyl_density([0.3]) == pytest.approx(1.0)
    assert weyl_density([0.0, math.pi]) == pytest.approx(4.0)
    # equilateral triple: |1 - w|^2 |1 - w^2|^2 |w - w^2|^2 = 27
    assert weyl_density([0.0, 2 * math.pi / 3, -2 * math.pi / 3]) == pytest.approx(27.0)
    assert weyl_density([0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)


def test_density_matches_vandermonde_oracle():
    rng = np.random.default_rng(21)
    for n in (2, 3, 4, 5):
        for _ in range(5):
            theta = rng.uniform(-np.pi, np.pi, size=n)
            assert weyl_density(theta) == pytest.approx(
                density_vandermonde(theta), rel=1e-9
            )


def test_density_symmetries():
    rng = np.random.default_rng(22)
    theta = rng.uniform(-np.pi, np.pi, size=4)
    base = weyl_density(theta)
    assert weyl_density(theta[::-1]) == pytest.approx(base, rel=1e-12)
    assert weyl_density(theta + 0.7) == pytest.approx(base, rel=1e-9)
    assert base >= 0.0


# --- normalizer ----------------------------------------------------------------


def test_total_mass_closed_forms():
    assert total_mass(1) == pytest.approx(2 * math.pi)
    assert total_mass(2) == pytest.approx(8 * math.pi**2)
    assert total_mass(3) == pytest.approx(48 * math.pi**3)
    assert log_total_mass(4) == pytest.approx(math.log(total_mass(4)), rel=1e-13)


def test_total_mass_overflow_raises_range_error():
    with pytest.raises(RangeError):
        total_mass(200)
    log_total_mass(200)  # the log-domain value stays representable


def test_normalizer_estimate_agrees_with_total():
    est = normalizer_estimate(2, IntegrationConfig(strategy="mc", samples=200_000, seed=4))
    assert est.std_error > 0.0
    assert abs(est.value - total_mass(2)) / total_mass(2) < 0.01


# --- ball mass: exact anchors ---------------------------------------------------


@pytest.mark.parametrize("metric", ["euclidean", "riemannian"])
def test_ball_mass_n1_closed_form(metric, tensor_cfg):
    for r in (0.25, 0.5, 1.0, 1.5):
        est = ball_mass(1, r, metric, tensor_cfg)
        assert est.value == pytest.approx(mass_circle_1(r, metric), abs=1e-12)


def test_ball_mass_n1_examples(tensor_cfg):
    # euclidean r=1: 4 asin(1/2) = 2 pi / 3 ; riemannian r=pi/2: pi
    assert ball_mass(1, 1.0, "euclidean", tensor_cfg).value == pytest.approx(2 * math.pi / 3)
    assert ball_mass(1, math.pi / 2, "riemannian", tensor_cfg).value == pytest.approx(math.pi)


@pytest.mark.parametrize("metric", ["euclidean", "riemannian"])
def test_ball_mass_saturates_exactly(metric, tensor_cfg):
    for n in (1, 2, 3):
        rmax = max_radius(n, metric)
        assert ball_mass(n, rmax, metric, tensor_cfg).value == total_mass(n)
        assert ball_mass(n, rmax + 5.0, metric, tensor_cfg).value == total_mass(n)
        assert ball_mass(n, 0.0, metric, tensor_cfg).value == 0.0


def test_ball_mass_riemannian_2_matches_bessel(tensor_cfg):
    for r in (0.3, 0.8, 1.5, 2.4, 3.0):
        est = ball_mass(2, r, "riemannian", tensor_cfg)
        assert est.value == pytest.approx(mass_bessel_riemannian_2(r), rel=1e-12)


@pytest.mark.parametrize("metric", ["euclidean", "riemannian"])
def test_ball_mass_2_matches_riemann_sum(metric, tensor_cfg):
    for r in (0.8, 1.6, 2.4):
        est = ball_mass(2, r, metric, tensor_cfg)
        ref = mass_riemann_2d(r, metric)
        assert est.value == pytest.approx(ref, rel=2e-3)


def test_ball_volume_fraction_range(tensor_cfg):
    f_small = ball_volume_fraction(2, 0.5, "euclidean", tensor_cfg)
    f_full = ball_volume_fraction(2, max_radius(2, "euclidean"), "euclidean", tensor_cfg)
    assert 0.0 < f_small < 1.0
    assert f_full == pytest.approx(1.0)


# --- tensor properties -----------------------------------------------------------


def test_tensor_node_convergence():
    coarse = ball_mass(3, 1.7, "euclidean", IntegrationConfig(strategy="tensor", nodes_per_axis=32))
    fine = ball_mass(3, 1.7, "euclidean", IntegrationConfig(strategy="tensor", nodes_per_axis=96))
    assert coarse.value == pytest.approx(fine.value, rel=1e-10)


@pytest.mark.parametrize("metric", ["euclidean", "riemannian"])
def test_tensor_mass_monotone_and_continuous_at_switch(metric, tensor_cfg):
    switch = 2.0 if metric == "euclidean" else math.pi
    radii = np.linspace(0.1, max_radius(2, metric), 60)
    vals = [ball_mass(2, float(r), metric, tensor_cfg).value for r in radii]
    assert np.all(np.diff(vals) >= -1e-9)
    # the mass has a sqrt-type derivative spike at the branch switch, so it
    # is continuous but not Lipschitz there: check ordering and approach
    below = ball_mass(2, switch - 1e-9, metric, tensor_cfg).value
    at = ball_mass(2, switch, metric, tensor_cfg).value
    above = ball_mass(2, switch + 1e-9, metric, tensor_cfg).value
    assert below <= at <= above
    assert above - below < 1e-5


# --- Monte Carlo properties -------------------------------------------------------


@pytest.mark.parametrize("metric", ["euclidean", "riemannian"])
def test_mc_agrees_with_tensor(metric, mc_cfg, tensor_cfg):
    for n in (2, 3):
        rmax = max_radius(n, metric)
        for frac in (0.3, 0.6, 0.85):  # the last lands in the annulus branch
            r = frac * rmax
            mc = ball_mass(n, r, metric, mc_cfg)
            exact = ball_mass(n, r, metric, tensor_cfg).value
            assert mc.std_error > 0.0
            assert abs(mc.value - exact) <= 4.0 * mc.std_error + 1e-9 * exact


@pytest.mark.parametrize("metric", ["euclidean", "riemannian"])
def test_mc_mass_nondecreasing_in_radius(metric):
    # common random numbers make the estimator monotone in r, including
    # across the ball/annulus branch switch
    cfg = IntegrationConfig(strategy="mc", samples=50_000, seed=12)
    radii = np.linspace(0.05, max_radius(4, metric), 40)
    vals = [ball_mass(4, float(r), metric, cfg).value for r in radii]
    assert np.all(np.diff(vals) >= 0.0)


def test_mc_deterministic_given_seed():
    cfg = IntegrationConfig(strategy="mc", samples=50_000, seed=9)
    a = ball_mass(3, 1.2, "euclidean", cfg)
    b = ball_mass(3, 1.2, "euclidean", cfg)
    assert a.value == b.value and a.std_error == b.std_error


def test_mc_seed_changes_estimate():
    a = ball_mass(3, 1.2, "euclidean", IntegrationConfig(strategy="mc", samples=50_000, seed=1))
    b = ball_mass(3, 1.2, "euclidean", IntegrationConfig(strategy="mc", samples=50_000, seed=2))
    assert a.value != b.value


# --- strategy resolution and validation ---------------------------------------------


def test_resolve_strategy_auto_rules():
    assert resolve_strategy(3, IntegrationConfig()) == "tensor"
    assert resolve_strategy(4, IntegrationConfig()) == "monte-carlo"
    assert resolve_strategy(2, IntegrationConfig(strategy="mc")) == "monte-carlo"


def test_tensor_unsupported_above_three():
    with pytest.raises(UnsupportedStrategyError):
        ball_mass(4, 1.0, "euclidean", IntegrationConfig(strategy="tensor"))


def test_config_validation():
    with pytest.raises(ConfigError):
        IntegrationConfig(strategy="simpson")
    with pytest.raises(ConfigError):
        IntegrationConfig(samples=10)
    with pytest.raises(ConfigError):
        IntegrationConfig(nodes_per_axis=1)
    with pytest.raises(ConfigError):
        IntegrationConfig(rel_tol=0.0)


def test_ball_mass_validates_arguments(tensor_cfg):
    with pytest.raises(ValidationError):
        ball_mass(0, 1.0, "euclidean", tensor_cfg)
    with pytest.raises(ValidationError):
        ball_mass(2, -0.5, "euclidean", tensor_cfg)
    with pytest.raises(ValidationError):
        ball_mass(2, 1.0, "chordal", tensor_cfg)


def test_mass_estimate_bookkeeping(tensor_cfg, mc_cfg):
    t = ball_mass(2, 1.0, "euclidean", tensor_cfg)
    assert t.strategy == "tensor" and t.std_error == 0.0 and t.samples == 0
    m = ball_mass(2, 1.0, "euclidean", mc_cfg)
    assert m.strategy == "monte-carlo" and m.samples == mc_cfg.samples


def test_max_radius_values():
    assert max_radius(2, "euclidean") == pytest.approx(2 * math.sqrt(2.0))
    assert max_radius(3, "riemannian") == pytest.approx(math.pi * math.sqrt(3.0))
