import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special, stats

from fdp_cnd import cnd as C
from fdp_cnd import tradeoff as T

X = np.linspace(-6.0, 6.0, 2001)
ALPHAS = np.linspace(0.0, 1.0, 1001)[1:-1]


@pytest.mark.parametrize("eps", [0.5, 1.0, 5.0])
def test_constructed_pure_dp_is_tulap(eps):
  built = C.construct_cnd(T.make_eps_delta(eps, 0.0))
  assert built.c == pytest.approx(1.0 / (1.0 + math.exp(eps)), abs=1e-12)
  np.testing.assert_allclose(built.cdf(X), C.tulap(eps).cdf(X), atol=1e-12)


@pytest.mark.parametrize("eps", [0.5, 1.0, 5.0])
def test_tulap_core_density(eps):
  core = np.linspace(-0.49, 0.49, 99)
  expected = (math.exp(eps) - 1.0) / (math.exp(eps) + 1.0)
  np.testing.assert_allclose(C.tulap(eps).pdf(core), expected, atol=1e-15)
  built = C.construct_cnd(T.make_eps_delta(eps, 0.0))
  np.testing.assert_allclose(built.pdf(core), expected, atol=1e-12)


def test_tulap_cell_values():
  F = C.tulap(1.0)
  q = math.exp(-1.0)
  # Survival at the start of cell k is q^k / (1 + q).
  for k in range(1, 5):
    assert F.sf(k - 0.5) == pytest.approx(q**k / (1 + q), rel=1e-13)
  assert F.cdf(0.0) == 0.5


@pytest.mark.parametrize("F", [
    C.tulap(0.7), C.GaussianCnd(1.3), C.LaplaceCnd(0.8), C.UniformCnd(0.3),
    C.construct_cnd(T.make_gdp(1.0)), C.construct_cnd(T.make_eps_delta(1.0,
                                                                       0.1)),
], ids=lambda F: F.kind.value)
def test_shift_tradeoff_reproduces_source(F):
  np.testing.assert_allclose(F.cdf(F.quantile(ALPHAS) - 1.0),
                             F.source_f(ALPHAS), atol=1e-10)


@pytest.mark.parametrize("F", [
    C.tulap(0.7), C.GaussianCnd(1.3), C.LaplaceCnd(0.8), C.UniformCnd(0.3),
    C.construct_cnd(T.make_gdp(1.0)),
], ids=lambda F: F.kind.value)
def test_quantile_inverts_cdf(F):
  np.testing.assert_allclose(F.cdf(F.quantile(ALPHAS)), ALPHAS, atol=1e-10)


@pytest.mark.parametrize("F", [
    C.tulap(0.7), C.GaussianCnd(1.3), C.LaplaceCnd(0.8),
    C.construct_cnd(T.make_gdp(1.0)),
], ids=lambda F: F.kind.value)
def test_symmetry(F):
  np.testing.assert_allclose(F.cdf(X), 1.0 - F.cdf(-X), atol=1e-14)


def test_closed_forms_against_scipy():
  np.testing.assert_allclose(C.GaussianCnd(2.0).cdf(X),
                             stats.norm(scale=0.5).cdf(X), atol=1e-15)
  np.testing.assert_allclose(C.LaplaceCnd(2.0).cdf(X),
                             stats.laplace(scale=0.5).cdf(X), atol=1e-15)
  np.testing.assert_allclose(C.UniformCnd(0.25).cdf(X),
                             stats.uniform(-2.0, 4.0).cdf(X), atol=1e-15)


def test_uniform_log_pdf_outside_support():
  F = C.UniformCnd(0.5)
  assert F.log_pdf(0.0) == pytest.approx(math.log(0.5))
  assert F.log_pdf(1.5) == -np.inf


def test_constructed_gdp_fixed_point():
  F = C.construct_cnd(T.make_gdp(1.0))
  assert F.c == pytest.approx(special.ndtr(-0.5), abs=1e-12)
  assert F.cdf(-0.5) == pytest.approx(F.c, abs=1e-15)


def test_construct_rejects_trivial_and_asymmetric():
  with pytest.raises(C.DegenerateTradeoffError):
    C.construct_cnd(T.identity())
  asym = T.TradeoffFunction(lambda a: a**2, symmetric=False)
  with pytest.raises(ValueError):
    C.construct_cnd(asym)


def test_constructed_recursion_depth_guard():
  F = C.construct_cnd(T.make_gdp(1.0))
  with pytest.raises(C.RecursionDepthError):
    F.cdf(-1e7)


def test_from_cnd_cdf_round_trip():
  for F in (C.tulap(1.0), C.GaussianCnd(0.5)):
    g = C.from_cnd_cdf(F)
    np.testing.assert_allclose(g(ALPHAS), F.source_f(ALPHAS), atol=1e-10)


def test_scale_group_closed_kinds():
  assert isinstance(C.scale_group(C.GaussianCnd(1.0), 3), C.GaussianCnd)
  assert C.scale_group(C.GaussianCnd(1.0), 3).mu == 3.0
  assert C.scale_group(C.LaplaceCnd(0.5), 2).eps == 1.0
  assert C.scale_group(C.UniformCnd(0.2), 2).delta == pytest.approx(0.4)
  F = C.tulap(1.0)
  assert C.scale_group(F, 1) is F


def test_scaled_tulap_targets_group_tradeoff():
  F = C.scale_group(C.tulap(0.5), 2)
  assert F.kind is C.CndKind.SCALED
  f = T.make_eps_delta(0.5, 0.0)
  np.testing.assert_allclose(F.cdf(F.quantile(ALPHAS) - 1.0), f(f(ALPHAS)),
                             atol=1e-10)


def test_sampling_matches_cdf():
  rng = np.random.default_rng(3)
  for F in (C.tulap(1.0), C.construct_cnd(T.make_gdp(1.0))):
    draws = F.sample(rng, 20_000)
    assert stats.kstest(draws, F.cdf).pvalue > 0.001


def test_tulap_fast_sampler():
  F = C.tulap(1.0)
  draws = F.sample_fast(np.random.default_rng(5), 20_000)
  assert stats.kstest(draws, F.cdf).pvalue > 0.001


@settings(max_examples=20, deadline=None)
@given(eps=st.floats(0.1, 6.0))
def test_tulap_is_constructed_cnd_property(eps):
  built = C.construct_cnd(T.make_eps_delta(eps, 0.0))
  x = np.linspace(-4.0, 4.0, 161)
  np.testing.assert_allclose(built.cdf(x), C.tulap(eps).cdf(x), atol=1e-12)
