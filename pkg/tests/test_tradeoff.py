import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fdp_cnd import tradeoff as T

ALPHAS = np.linspace(0.0, 1.0, 1001)


def test_eps_delta_hand_value():
  # max(0, 0.95 - 0.5 e, 0.45 / e) = 0.45 / e
  assert T.make_eps_delta(1.0, 0.05)(0.5) == pytest.approx(0.45 / math.e,
                                                           abs=1e-15)


def test_gdp_at_half_is_phi_minus_mu():
  assert T.make_gdp(1.0)(0.5) == pytest.approx(0.15865525393145707, abs=1e-15)


@pytest.mark.parametrize("eps", [0.3, 1.0, 2.5])
def test_laplace_at_half(eps):
  assert T.make_laplace_tf(eps)(0.5) == pytest.approx(0.5 * math.exp(-eps),
                                                      abs=1e-14)


def test_identity_is_identity():
  np.testing.assert_allclose(T.identity()(ALPHAS), ALPHAS, atol=0)
  assert T.identity().family.is_identity


@pytest.mark.parametrize("f", [
    T.make_eps_delta(1.0, 0.0), T.make_eps_delta(0.5, 0.2),
    T.make_eps_delta(0.0, 0.3), T.make_gdp(0.7), T.make_laplace_tf(1.5),
])
def test_closed_forms_are_valid_tradeoffs(f):
  assert T.check_tradeoff(f) == []


@pytest.mark.parametrize("f", [
    T.make_eps_delta(1.0, 0.0), T.make_eps_delta(0.5, 0.2), T.make_gdp(0.7),
    T.make_laplace_tf(1.5),
])
def test_closed_form_inverse(f):
  # f jumps to 1 at alpha = 1, so only (0, f(1)) is invertible.
  betas = np.linspace(0.01, 0.99, 99) * f(1.0)
  np.testing.assert_allclose(f(f.inv(betas)), betas, atol=1e-12)


def test_check_tradeoff_flags_violations():
  above = T.TradeoffFunction(lambda a: np.minimum(1.0, 1.1 * a),
                             symmetric=False)
  assert any("f(a) > a" in p for p in T.check_tradeoff(above))
  concave = T.TradeoffFunction(lambda a: np.sqrt(a) * 0.5, symmetric=False)
  assert any("convex" in p for p in T.check_tradeoff(concave))
  with pytest.raises(T.InvalidTradeoffError):
    T.validate(concave)


def test_check_tradeoff_flags_asymmetry():
  # A valid tradeoff (one linear branch) whose reflection differs from it.
  lopsided = T.TradeoffFunction(lambda a: np.maximum(0.0, (a - 0.2) / 2.0 *
                                                     1.25),
                                symmetric=True)
  assert any("symmetry" in p for p in T.check_tradeoff(lopsided))


@pytest.mark.parametrize("eps,delta", [(-1.0, 0.0), (1.0, -0.1), (1.0, 1.5)])
def test_eps_delta_rejects_bad_parameters(eps, delta):
  with pytest.raises(ValueError):
    T.make_eps_delta(eps, delta)


def test_compose_folds_families():
  g = T.compose(T.make_gdp(1.0), T.make_gdp(2.0))
  assert g.family == T.make_gdp(3.0).family
  lap = T.compose(T.make_laplace_tf(1.0), T.make_laplace_tf(0.5))
  np.testing.assert_allclose(lap(ALPHAS), T.make_laplace_tf(1.5)(ALPHAS),
                             atol=1e-12)
  zd = T.compose(T.make_eps_delta(0.0, 0.6), T.make_eps_delta(0.0, 0.7))
  assert zd.family.param("delta") == 1.0


def test_compose_of_pure_dp_is_not_pure_dp_at_double_eps():
  f = T.make_eps_delta(1.0, 0.0)
  g = T.compose(f, f)
  assert g(0.9) == pytest.approx(0.2678794411714424, abs=1e-14)
  assert T.make_eps_delta(2.0, 0.0)(0.9) == pytest.approx(0.26109439010693514,
                                                          abs=1e-14)
  # The group tradeoff dominates f_{2 eps, 0} and is strictly above it.
  assert np.all(g(ALPHAS) >= T.make_eps_delta(2.0, 0.0)(ALPHAS) - 1e-15)


def test_compose_of_non_commuting_functions_is_asymmetric():
  f, g = T.make_gdp(1.0), T.make_eps_delta(0.5, 0.1)
  h = T.compose(f, g)
  assert not h.symmetric
  forced = T.compose(f, g, check=False, symmetric=True)
  assert any("symmetry" in p for p in T.check_tradeoff(forced))


def test_compose_general_matches_pointwise():
  f, g = T.make_gdp(1.0), T.make_eps_delta(0.5, 0.1)
  h = T.compose(f, g)
  np.testing.assert_allclose(h(ALPHAS), f(g(ALPHAS)), atol=0)
  betas = np.linspace(0.05, 0.95, 19) * h(1.0)
  np.testing.assert_allclose(h(h.inv(betas)), betas, atol=1e-9)


def test_self_compose():
  np.testing.assert_allclose(T.self_compose(T.make_gdp(0.5), 4)(ALPHAS),
                             T.make_gdp(2.0)(ALPHAS), atol=1e-12)
  with pytest.raises(ValueError):
    T.self_compose(T.make_gdp(1.0), 0)


@pytest.mark.parametrize("delta", [0.0, 0.2, 0.5])
def test_fixed_point_zero_eps(delta):
  if delta == 0.0:
    assert T.fixed_point_c(T.identity()) == 0.5
  else:
    assert T.fixed_point_c(T.make_eps_delta(0.0, delta)) == pytest.approx(
        (1 - delta) / 2, abs=1e-12)


def test_fixed_point_pure_dp_and_gdp():
  assert T.fixed_point_c(T.make_eps_delta(1.0, 0.0)) == pytest.approx(
      1 / (1 + math.e), abs=1e-12)
  # Phi(-1/2) solves G_1(1 - c) = c.
  assert T.fixed_point_c(T.make_gdp(1.0)) == pytest.approx(0.3085375387259869,
                                                           abs=1e-12)


def test_tensor_closed_forms():
  g = T.tensor_closed_form(T.make_gdp(3.0), T.make_gdp(4.0))
  assert g.family.param("mu") == pytest.approx(5.0)
  zd = T.tensor_closed_form(T.make_eps_delta(0.0, 0.1),
                            T.make_eps_delta(0.0, 0.1))
  assert zd.family.param("delta") == pytest.approx(0.19, abs=1e-15)
  ed = T.tensor_closed_form(T.make_eps_delta(1.0, 0.0),
                            T.make_eps_delta(0.0, 0.05))
  assert ed.family == T.make_eps_delta(1.0, 0.05).family
  assert T.tensor_closed_form(T.make_gdp(1.0), T.make_laplace_tf(1.0)) is (
      T.UNSUPPORTED)


def test_tensor_fold_any_order():
  out = T.tensor_fold([T.make_eps_delta(0.0, 0.1), T.make_eps_delta(1.0, 0.0),
                       T.make_eps_delta(0.0, 0.1)])
  assert out.family.param("eps") == 1.0
  assert out.family.param("delta") == pytest.approx(0.19, abs=1e-15)
  assert T.tensor_fold([T.make_gdp(1.0), T.make_laplace_tf(1.0)]) is (
      T.UNSUPPORTED)


def test_json_round_trip():
  for f in (T.make_eps_delta(1.0, 0.1), T.make_gdp(0.5),
            T.make_laplace_tf(2.0)):
    g = T.from_json(f.to_json())
    np.testing.assert_allclose(g(ALPHAS), f(ALPHAS), atol=0)
  with pytest.raises(ValueError):
    T.from_json('{"family_tag": "bogus"}')


def test_divisible_families_are_monoids():
  for fam in (T.gdp_family(1.0), T.laplace_family(2.0),
              T.zero_delta_family(0.2)):
    lhs = T.compose(fam.at(0.25), fam.at(0.5), check=False)
    np.testing.assert_allclose(lhs(ALPHAS), fam.at(0.75)(ALPHAS), atol=1e-12)
    np.testing.assert_allclose(fam.at(0.0)(ALPHAS), ALPHAS, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(eps=st.floats(0.0, 4.0), delta=st.floats(0.0, 0.9))
def test_eps_delta_property(eps, delta):
  f = T.make_eps_delta(eps, delta)
  vals = f(ALPHAS)
  assert np.all(vals <= ALPHAS + 1e-12)
  assert np.all(np.diff(vals) >= -1e-12)
  assert f(1.0) == pytest.approx(1.0 - delta, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(mu1=st.floats(0.0, 3.0), mu2=st.floats(0.0, 3.0))
def test_gdp_tensor_hypot_property(mu1, mu2):
  out = T.tensor_closed_form(T.make_gdp(mu1), T.make_gdp(mu2))
  assert out.family.param("mu") == pytest.approx(math.hypot(mu1, mu2))
