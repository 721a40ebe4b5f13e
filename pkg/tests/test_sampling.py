import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from gstable import sampling
from gstable.gslaw import GammaParams, StableParams, gs_charfn, multivariate_gs_charfn, SpectralMeasure, stable_charfn

THETAS = np.array([0.25, 0.5, 1.0, 2.0, 4.0])


def test_frozen_draws():
    b = sampling.sample_gs(StableParams(1.5, 0.5), 2.0, 5, 7)
    np.testing.assert_allclose(b.values, [-1.88070807, -4.43560606, -0.68957519, -0.92092882, -0.85929753],
                               rtol=1e-7)


def test_determinism_and_jobs_independence():
    p = StableParams(0.8, -0.3)
    a = sampling.sample_gs(p, 1.5, 3 * sampling.CHUNK + 17, 11)
    b = sampling.sample_gs(p, 1.5, 3 * sampling.CHUNK + 17, 11, jobs=4)
    assert np.array_equal(a.values, b.values)
    c = sampling.sample_gs(p, 1.5, 100, 12)
    assert not np.array_equal(a.values[:100], c.values)
    # prefix property: a shorter batch is the start of a longer one
    d = sampling.sample_gs(p, 1.5, 100, 11)
    assert np.array_equal(a.values[:100], d.values)


def test_cms_params():
    assert sampling.cms_params(StableParams(1.0, 0.0)) == (0.0, 1.0)
    b_shift, s_scale = sampling.cms_params(StableParams(0.5, 1.0))
    assert b_shift == pytest.approx(math.pi / 2)
    assert s_scale == pytest.approx(2.0)


@pytest.mark.parametrize("a,b", [(2.0, 0.0), (1.0, 0.0), (1.5, 0.5), (0.5, 1.0), (0.7, -0.6)])
def test_stable_ecf(a, b):
    p = StableParams(a, b, 0.8)
    n = 10 ** 5
    batch = sampling.sample_stable(p, 1.3, n, 2024)
    err = np.abs(sampling.ecf(batch, THETAS) - stable_charfn(p, THETAS, 1.3))
    assert np.max(err) <= 4 / math.sqrt(n)


@pytest.mark.parametrize("a,b", [(2.0, 0.0), (1.0, 0.0), (1.5, 0.5), (0.5, 1.0)])
def test_gs_ecf(a, b):
    p = StableParams(a, b)
    n = 10 ** 5
    batch = sampling.sample_gs(p, 2.0, n, 99)
    err = np.abs(sampling.ecf(batch, THETAS) - gs_charfn(p, THETAS, 2.0))
    assert np.max(err) <= 4 / math.sqrt(n)


def test_gs_laplace_ks():
    batch = sampling.sample_gs(StableParams(2.0, 0.0), 1.0, 20000, 5)
    assert sampling.ks_statistic(batch, stats.laplace.cdf) <= sampling.ks_critical(20000)


def test_subordinator_positive():
    batch = sampling.sample_gs(StableParams(0.6, 1.0), 1.0, 20000, 3)
    assert np.all(batch.values > 0)


def test_gamma_sampler():
    batch = sampling.sample_gamma(GammaParams(2.0), 3.0, 20000, 8)
    assert sampling.ks_statistic(batch, stats.gamma(3.0, scale=0.5).cdf) <= sampling.ks_critical(20000)


def test_first_passage_sampler_matches_subordinated_levy():
    # T = z^2 / N^2 has the GS law alpha = 1/2, beta = 1, sigma = 1
    n = 10 ** 5
    batch = sampling.sample_first_passage_gamma_barrier(2.0, n, 17)
    err = np.abs(sampling.ecf(batch, THETAS) - gs_charfn(StableParams(0.5, 1.0, 1.0), THETAS, 2.0))
    assert np.max(err) <= 4 / math.sqrt(n)


@pytest.mark.parametrize("alpha", [2.0, 1.5, 0.7])
def test_isotropic_ecf(alpha):
    n = 10 ** 5
    batch = sampling.sample_isotropic_gs(alpha, 2, 2.0, n, 31)
    assert batch.values.shape == (n, 2)
    rng = np.random.default_rng(1)
    dirs = rng.normal(size=(5, 2))
    th = dirs / np.linalg.norm(dirs, axis=1, keepdims=True) * THETAS[:, None]
    iso = SpectralMeasure.isotropic_measure(2)
    err = np.abs(sampling.ecf(batch, th) - multivariate_gs_charfn(alpha, iso, th, 2.0))
    assert np.max(err) <= 4 / math.sqrt(n)


def test_isotropic_rotation_invariance():
    batch = sampling.sample_isotropic_gs(1.2, 3, 1.0, 30000, 4)
    r = np.linalg.norm(batch.values, axis=1)
    u = batch.values[:, 0] / r
    # the first coordinate of a uniform direction in 3-D is uniform on [-1, 1]
    assert sampling.ks_statistic(u, stats.uniform(-1, 2).cdf) <= sampling.ks_critical(30000)


def test_ks_critical_frozen():
    assert sampling.ks_critical(10 ** 5) == pytest.approx(0.005146997846583985, rel=1e-12)
    assert sampling.ks_critical(100, 100) == pytest.approx(0.2302, abs=1e-4)


def test_ks_two_sample_and_empty():
    a = sampling.sample_gs(StableParams(1.5), 1.0, 5000, 1)
    b = sampling.sample_gs(StableParams(1.5), 1.0, 5000, 2)
    assert sampling.ks_two_sample(a, b) <= sampling.ks_critical(5000, 5000)
    with pytest.raises(ValueError):
        sampling.ks_statistic(np.array([]), stats.norm.cdf)


def test_csv_and_sidecar():
    b = sampling.sample_isotropic_gs(1.5, 2, 1.0, 3, 5)
    buf = io.StringIO()
    b.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "index,v1,v2" and len(lines) == 4
    side = json.loads(b.sidecar_json())
    assert side == {"law": "isotropic-gs", "params": {"alpha": 1.5, "dim": 2}, "t": 1.0, "n": 3, "seed": 5}


@settings(deadline=None, max_examples=15)
@given(st.floats(0.2, 2.0).filter(lambda a: abs(a - 1) > 1e-3), st.floats(-1, 1), st.integers(0, 2 ** 32))
def test_samples_finite(a, b, seed):
    v = sampling.sample_gs(StableParams(a, b), 1.0, 500, seed).values
    assert np.all(np.isfinite(v))


def test_invalid_arguments():
    with pytest.raises(ValueError):
        sampling.sample_gs(StableParams(1.5), 0.0, 10, 1)
    with pytest.raises(ValueError):
        sampling.sample_isotropic_gs(2.5, 2, 1.0, 10, 1)
    with pytest.raises(ValueError):
        sampling.sample_stable(StableParams(1.5), -1.0, 10, 1)


def test_two_pipeline_first_passage():
    a = sampling.sample_gs(StableParams(0.5, 1.0, 1.0), 1.0, 20000, 21)
    b = sampling.sample_first_passage_gamma_barrier(1.0, 20000, 22)
    assert sampling.ks_two_sample(a, b) <= sampling.ks_critical(20000, 20000)


def test_ks_single_sample_at_median():
    assert sampling.ks_statistic(np.array([0.0]), stats.norm.cdf) == pytest.approx(0.5)


def test_gamma_moments():
    n = 10 ** 5
    v = sampling.sample_gamma(GammaParams(1.0), 2.0, n, 13).values
    assert abs(v.mean() - 2.0) <= 3 * math.sqrt(2.0 / n)
    assert abs(v.var() - 2.0) <= 0.05
    assert np.all(v >= 0)
