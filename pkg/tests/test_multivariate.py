import math

import numpy as np
import pytest
from scipy import integrate, stats

from fdp_cnd import cnd as C
from fdp_cnd import limit, norms
from fdp_cnd import multivariate as M
from fdp_cnd import tradeoff as T
from fdp_cnd.verify import dominance_check

ALPHAS = np.linspace(0.0, 1.0, 401)


# --- worst-case shifts ------------------------------------------------------

def test_gaussian_identity_linf_is_all_ones():
  res = M.worst_shift_gaussian(np.eye(3), norms.linf(3))
  np.testing.assert_array_equal(res.v_star, np.ones(3))
  assert res.objective == pytest.approx(math.sqrt(3.0), abs=1e-12)
  assert res.method is M.ShiftMethod.VERTEX_ENUMERATION
  assert res.certificate["passed"]


def test_gaussian_identity_l1_is_first_axis():
  res = M.worst_shift_gaussian(np.eye(3), norms.l1(3))
  np.testing.assert_array_equal(res.v_star, [1.0, 0.0, 0.0])
  assert res.objective == pytest.approx(1.0, abs=1e-12)


def test_gaussian_identity_l2_closed_form():
  res = M.worst_shift_gaussian(np.eye(3), norms.l2(3))
  assert res.method is M.ShiftMethod.CLOSED_FORM
  assert res.objective == pytest.approx(1.0, abs=1e-12)
  np.testing.assert_allclose(res.v_star, [1.0, 0.0, 0.0], atol=1e-12)


def test_gaussian_diag_linf():
  res = M.worst_shift_gaussian(np.diag([1.0, 4.0]), norms.linf(2))
  assert res.objective == pytest.approx(math.sqrt(1.25), abs=1e-12)


def test_gaussian_l2_picks_smallest_variance_axis():
  res = M.worst_shift_gaussian(np.diag([4.0, 0.25, 1.0]), norms.l2(3))
  np.testing.assert_allclose(np.abs(res.v_star), [0.0, 1.0, 0.0], atol=1e-12)
  assert res.objective == pytest.approx(2.0, abs=1e-12)


def test_gaussian_l2_rotation_invariance():
  rng = np.random.default_rng(0)
  q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
  sigma = np.diag([1.0, 2.0, 3.0])
  a = M.worst_shift_gaussian(sigma, norms.l2(3)).objective
  b = M.worst_shift_gaussian(q @ sigma @ q.T, norms.l2(3)).objective
  assert a == pytest.approx(b, abs=1e-10)


def test_gaussian_elliptical_generalized_eigen():
  a = np.diag([4.0, 1.0])
  res = M.worst_shift_gaussian(np.eye(2), norms.elliptical(a))
  # Unit ball of sqrt(x'Ax) is widest along the second axis.
  assert res.objective == pytest.approx(1.0, abs=1e-12)
  np.testing.assert_allclose(np.abs(res.v_star), [0.0, 1.0], atol=1e-12)


def test_high_dimension_falls_back_with_warning():
  res = M.worst_shift_gaussian(np.eye(21), norms.linf(21))
  assert res.method is M.ShiftMethod.PROJECTED_SEARCH
  assert "projected search" in res.warning
  assert res.objective <= math.sqrt(21) + 1e-9
  assert res.objective >= 0.95 * math.sqrt(21)


def test_uniform_worst_shift_values():
  res = M.worst_shift_uniform(0.2, norms.linf(3))
  assert res.objective == pytest.approx(0.8**3, abs=1e-12)
  res = M.worst_shift_uniform(0.2, norms.l1(3))
  assert res.objective == pytest.approx(0.8, abs=1e-12)


def test_canonical_sign():
  np.testing.assert_array_equal(M.canonical_sign([[0.0, -1.0, 2.0]]),
                                [[0.0, 1.0, -2.0]])


def test_non_spd_covariance_rejected():
  with pytest.raises(ValueError):
    M.worst_shift_gaussian(np.array([[1.0, 2.0], [2.0, 1.0]]), norms.l2(2))
  with pytest.raises(ValueError):
    M.worst_shift_gaussian(np.eye(2), norms.l2(3))


# --- constructions ----------------------------------------------------------

def test_linf_density_normalised():
  mech = M.linf_mechanism(1.3, 2)
  # Eight copies of the wedge 0 < y < x, where the density is smooth.
  val, _ = integrate.dblquad(lambda y, x: mech.pdf(np.array([x, y])),
                             0.0, 60.0, 0.0, lambda x: x, epsabs=1e-12)
  val *= 8.0
  assert val == pytest.approx(1.0, abs=1e-6)


def test_linf_radius_matches_gamma():
  mech = M.linf_mechanism(1.0, 3)
  r = np.max(np.abs(mech.sample(np.random.default_rng(4), 50_000)), axis=1)
  assert stats.kstest(r, lambda t: M.linf_radius_cdf(t, 1.0, 3)).pvalue > 1e-3


def test_linf_radius_cdf_oracle():
  # P(||X|| <= r) = int_0^r eps^d t^(d-1) e^(-eps t) / (d-1)! dt.
  eps, d, r = 0.7, 3, 2.5
  dens = lambda t: eps**d * t**(d - 1) * math.exp(-eps * t) / math.factorial(
      d - 1)
  val, _ = integrate.quad(dens, 0.0, r)
  assert M.linf_radius_cdf(r, eps, d) == pytest.approx(val, abs=1e-12)


def test_linf_plrv_values():
  assert M.linf_plrv([0.0, 0.0], 1.5) == 1.5
  assert M.linf_plrv([1.0, 0.0], 1.5) == 0.0
  assert M.linf_plrv([2.0, 0.0], 1.5) == -1.5
  assert M.linf_plrv([5.0, 1.0], 1.5) == -1.5


def test_split_delta():
  np.testing.assert_allclose(M.split_delta(0.19, 2), [0.1, 0.1], atol=1e-15)


def test_approx_dp_target_and_validation():
  mv = M.approx_dp_cnd(1.0, 0.1)
  assert mv.dim == 2
  assert mv.target_f.family == T.make_eps_delta(1.0, 0.1).family
  with pytest.raises(ValueError):
    M.approx_dp_cnd(1.0, 0.19, 2, deltas=[0.1, 0.05])


def test_product_single_component_keeps_target():
  mv = M.product_cnd([C.GaussianCnd(1.0)])
  assert mv.dim == 1 and mv.target_f.family == T.make_gdp(1.0).family


def test_product_gaussians_is_gdp_hypot():
  mv = M.product_cnd([C.GaussianCnd(3.0), C.GaussianCnd(4.0)])
  assert mv.target_f.family.param("mu") == pytest.approx(5.0)
  assert mv.target_error == 0.0


def test_product_tulap_uniform_is_eps_delta():
  mv = M.product_cnd([C.tulap(1.0), C.UniformCnd(0.1)])
  assert mv.target_f.family == T.make_eps_delta(1.0, 0.1).family


def test_product_unsupported_uses_pld_estimate():
  mv = M.product_cnd([C.GaussianCnd(1.0), C.LaplaceCnd(1.0)])
  assert 0.0 < mv.target_error <= 0.05
  assert mv.target_f(0.5) < min(T.make_gdp(1.0)(0.5),
                                T.make_laplace_tf(1.0)(0.5))


def test_iid_requires_log_concave():
  with pytest.raises(M.HypothesisError):
    M.iid_l1_cnd(C.tulap(1.0), 2)
  mv = M.iid_l1_cnd(C.LaplaceCnd(1.0), 3)
  np.testing.assert_array_equal(mv.worst_shift, [1.0, 0.0, 0.0])


def test_iid_accepts_limit_cnd():
  F, _ = limit.logconcave_limit(T.gdp_family(1.0), 0.01)
  assert M.iid_l1_cnd(F, 2).dim == 2


def test_log_pdf_shape_checks():
  mv = M.gaussian_mv_cnd(np.eye(2), norms.l2(2))
  assert mv.log_pdf(np.zeros((3, 4, 2))).shape == (3, 4)
  with pytest.raises(ValueError):
    mv.log_pdf(np.zeros(3))
  assert mv.log_pdf(np.zeros(2)) == pytest.approx(-math.log(2 * math.pi))


def test_uniform_cube_target():
  mv = M.uniform_cube_cnd(0.2, 3, norms.linf(3))
  assert mv.params["A"] == pytest.approx(0.512)
  assert mv.target_f.family.param("delta") == pytest.approx(0.488)


# --- verification -----------------------------------------------------------

def test_verify_linf_passes():
  report = M.verify_mv_cnd(M.linf_mechanism(1.0, 2), 20_000, seed=3,
                           n_shifts=4)
  assert report.passed, [e for e in report.entries if not e.passed]


def test_verify_misscaled_gaussian_fails_equality():
  mv = M.gaussian_mv_cnd(np.eye(2) / 4.0, norms.l2(2))
  mis = M.MvCnd(mv.kind, mv.dim, mv.norm, mv.shift, T.make_gdp(1.0),
                mv.log_density, mv.sampler, mv.params)
  report = M.verify_mv_cnd(mis, 20_000, seed=3, n_shifts=4)
  assert not report.entry("property2_equality_at_v_star").passed


def test_verify_rejects_shift_outside_ball():
  with pytest.raises(ValueError):
    M.verify_mv_cnd(M.linf_mechanism(1.0, 2), 20_000,
                    shift_grid=[[2.0, 0.0]])


def test_sampling_is_seeded():
  mv = M.approx_dp_cnd(1.0, 0.1, 2)
  a = mv.sample(np.random.default_rng(1), 10)
  b = mv.sample(np.random.default_rng(1), 10)
  np.testing.assert_array_equal(a, b)
  assert a.shape == (10, 3)
