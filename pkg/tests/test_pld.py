import math

import numpy as np
import pytest

from fdp_cnd import cnd as C
from fdp_cnd import pld
from fdp_cnd import tradeoff as T


def _within(curve, target):
  diff = curve.betas - target(curve.alphas)
  # 1e-8 absorbs float collapse of the last vertices onto alpha = 1.
  return diff.min() >= -1e-8 and diff.max() <= curve.band


def test_tulap_times_uniform_is_eps_delta():
  curve = pld.tensor_via_pld(C.tulap(1.0), C.UniformCnd(0.1))
  assert curve.band <= 0.01
  assert _within(curve, T.make_eps_delta(1.0, 0.1))
  assert not curve.horizontal


def test_two_gaussians_is_gdp_root_two():
  curve = pld.tensor_via_pld(C.GaussianCnd(1.0), C.GaussianCnd(1.0))
  assert curve.band <= 0.01
  assert _within(curve, T.make_gdp(math.sqrt(2.0)))


def test_identity_coordinate_is_neutral():
  curve = pld.tensor_via_pld(C.tulap(1.0), T.identity())
  assert _within(curve, T.make_eps_delta(1.0, 0.0))


def test_laplace_times_gaussian_is_bounded_by_both():
  curve = pld.tensor_via_pld(C.LaplaceCnd(1.0), C.GaussianCnd(1.0))
  a = curve.alphas
  assert np.all(curve.betas <= T.make_laplace_tf(1.0)(a) + 1e-9)
  assert np.all(curve.betas <= T.make_gdp(1.0)(a) + 1e-9)


def test_many_gaussians():
  curve = pld.tensor_via_pld_many([C.GaussianCnd(1.0)] * 3)
  assert _within(curve, T.make_gdp(math.sqrt(3.0)))


def test_coarse_grid_raises():
  with pytest.raises(pld.CoarseGridError):
    pld.tensor_via_pld(C.GaussianCnd(3.0), C.GaussianCnd(3.0), grid_size=1000)


def test_rejects_non_identity_tradeoff():
  with pytest.raises(TypeError):
    pld.tensor_via_pld(C.tulap(1.0), T.make_gdp(1.0))
  with pytest.raises(ValueError):
    pld.tensor_via_pld(C.tulap(1.0), C.tulap(1.0), grid_size=10)


def test_plrv_masses_sum_to_one():
  d = pld.plrv_of_cnd(C.UniformCnd(0.2), 0.01)
  assert d.p_mass.sum() + d.p_neg_inf == pytest.approx(1.0, abs=1e-12)
  assert d.q_mass.sum() + d.q_pos_inf == pytest.approx(1.0, abs=1e-12)
  assert d.p_neg_inf == pytest.approx(0.2, abs=1e-12)
