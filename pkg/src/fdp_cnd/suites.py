"""End-to-end check suites behind ``fdp-cnd report``.

Each ``criterion_*`` function runs one acceptance criterion and returns its
report entries; the suites concatenate them into a ``TestReport``. Nothing
time-dependent goes into the entries, so a suite's JSON is a pure function
of its seed.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import special

from fdp_cnd import cnd, limit, multivariate as mv, norms, pld, tradeoff
from fdp_cnd.verify import (ReportEntry, TestReport, _exact, _seeds,
                            check_otimes_circ, dominance_check,
                            empirical_tradeoff, ks_test, verify_cnd)

SUITES = ("acceptance", "inequalities", "limits")
N_MC = 100_000
LEVEL = 0.01


def _entry(name, ok, stat, threshold, **details) -> ReportEntry:
  return ReportEntry(name, bool(ok), float(stat), float(threshold), details)


# ---------------------------------------------------------------------------
# Acceptance criteria
# ---------------------------------------------------------------------------

def criterion_tulap_identity() -> list[ReportEntry]:
  out = []
  x = np.linspace(-6.0, 6.0, 2001)
  core = np.linspace(-0.5, 0.5, 1001)[1:-1]
  for eps in (0.5, 1.0, 5.0):
    built = cnd.construct_cnd(tradeoff.make_eps_delta(eps, 0.0))
    gap = float(np.max(np.abs(built.cdf(x) - cnd.tulap(eps).cdf(x))))
    out.append(_entry(f"c01_tulap_cdf(eps={eps:g})", gap <= 1e-9, gap, 1e-9))
    expected = math.tanh(eps / 2.0)  # (e^eps - 1) / (e^eps + 1)
    dens = float(np.max(np.abs(built.pdf(core) - expected)))
    out.append(_entry(f"c01_core_density(eps={eps:g})", dens <= 1e-10, dens,
                      1e-10, expected=expected))
  return out


def shipped_cnds() -> list[cnd.Cnd]:
  """One instance of every 1-d CND kind the package ships."""
  gdp_limit, _ = limit.logconcave_limit(tradeoff.gdp_family(1.0), 0.01)
  return [
      cnd.tulap(1.0),
      cnd.GaussianCnd(1.0),
      cnd.LaplaceCnd(1.0),
      cnd.UniformCnd(0.2),
      cnd.construct_cnd(tradeoff.make_gdp(1.0)),
      cnd.construct_cnd(tradeoff.make_eps_delta(1.0, 0.1)),
      cnd.scale_group(cnd.tulap(0.5), 2),
      gdp_limit,
  ]


def recurrence_gaps(F: cnd.Cnd, x: np.ndarray) -> tuple[float, float]:
  """Largest violations of the two tail recursions of a CND.

  ``F(x) = f(F(x + 1))`` is only claimed where ``F(x + 1) < 1``, and
  ``F(x) = 1 - f(1 - F(x - 1))`` where ``F(x - 1) > 0``; outside, bounded
  supports break them legitimately.
  """
  f = F.source_f
  fx, ahead, behind = F.cdf(x), F.cdf(x + 1.0), F.cdf(x - 1.0)
  lower_gap = np.where(ahead < 1.0, np.abs(fx - f(ahead)), 0.0)
  upper_gap = np.where(behind > 0.0,
                       np.abs(fx - (1.0 - f(1.0 - behind))), 0.0)
  return float(np.max(lower_gap)), float(np.max(upper_gap))


def criterion_recurrence() -> list[ReportEntry]:
  out = []
  x = np.linspace(-5.0, 5.0, 1001)
  for F in shipped_cnds():
    lower, upper = recurrence_gaps(F, x)
    gap = max(lower, upper)
    out.append(_entry(f"c02_recurrence({F.kind.value}, {F.params})",
                      gap <= 1e-8, gap, 1e-8, lower=lower, upper=upper))
  return out


LIMIT_CASES = (
    ("gdp", tradeoff.gdp_family(1.0), special.ndtr),
    ("laplace", tradeoff.laplace_family(1.0), tradeoff.laplace_cdf),
    ("zero_delta", tradeoff.zero_delta_family(0.2),
     lambda t: np.clip((t + 2.5) / 5.0, 0.0, 1.0)),
)


def criterion_limits() -> list[ReportEntry]:
  out = []
  t = np.linspace(-5.0, 5.0, 2001)
  for name, family, reference in LIMIT_CASES:
    F, diag = limit.logconcave_limit(family, 0.01)
    err = float(np.max(np.abs(F.cdf(t) - reference(t))))
    out.append(_entry(f"c03_limit({name})", err <= 0.01, err, 0.01,
                      diagnostics=diag.to_dict()))
  return out


def criterion_doesnt_commute() -> list[ReportEntry]:
  e = check_otimes_circ(0.1, 0.1, 2)
  d_l, d_r = e.details["delta_left"], e.details["delta_right"]
  exact = (_exact(d_l) == Fraction(38, 100) and
           _exact(d_r) == Fraction(36, 100))
  return [_entry("c04_doesnt_commute", e.passed and exact, e.statistic, 0.0,
                 delta_left=d_l, delta_right=d_r)]


def criterion_linf(seed: int) -> list[ReportEntry]:
  out = []
  for d, s in zip((2, 3, 5), _seeds(seed, 3)):
    M = mv.linf_mechanism(1.0, d)
    draws = M.sample(np.random.default_rng(s), N_MC)
    stat = draws.max(axis=1) + draws.min(axis=1)
    ks = ks_test(stat, lambda z: tradeoff.laplace_cdf(z, 2.0), LEVEL,
                 f"c05_linf(d={d})_ks_max_plus_min")
    out.append(ks)
    report = mv.verify_mv_cnd(M, N_MC, seed=s, level=LEVEL)
    for e in report.entries:
      e = ReportEntry(f"c05_linf(d={d})_{e.name}", e.passed, e.statistic,
                      e.threshold, e.details)
      out.append(e)
  return out


def criterion_gaussian(seed: int) -> list[ReportEntry]:
  M = mv.gaussian_mv_cnd(np.eye(3), norms.linf(3))
  v_err = float(np.max(np.abs(M.worst_shift - 1.0)))
  mu_err = abs(M.shift.objective - math.sqrt(3.0))
  curve = empirical_tradeoff(M, M.worst_shift, N_MC, seed=seed, level=LEVEL)
  return [
      _entry("c06_gauss_v_star", v_err == 0.0, v_err, 0.0,
             v_star=M.worst_shift.tolist()),
      _entry("c06_gauss_mu", mu_err <= 1e-10, mu_err, 1e-10,
             mu=M.shift.objective),
      dominance_check(M.target_f, curve, one_sided=False,
                      name="c06_gauss_equality_at_v_star"),
  ]


def criterion_uniform(seed: int) -> list[ReportEntry]:
  delta, d = 0.2, 3
  M = mv.uniform_cube_cnd(delta, d, norms.linf(d))
  a = M.params["A"]
  expected = (1.0 - delta) ** d
  curve = empirical_tradeoff(M, M.worst_shift, N_MC, seed=seed, level=LEVEL)
  return [
      _entry("c07_uniform_A", a == expected, abs(a - expected), 0.0, A=a,
             expected=expected),
      dominance_check(M.target_f, curve, one_sided=False,
                      name="c07_uniform_equality_at_v_star"),
  ]


def _pld_entry(name: str, curve, target) -> ReportEntry:
  diff = curve.betas - target(curve.alphas)
  # The estimate is an upper bound within ``band`` of the truth; 1e-8 absorbs
  # float collapse of the last curve vertices onto alpha = 1.
  ok = curve.band <= 0.01 and diff.min() >= -1e-8 and diff.max() <= curve.band
  return _entry(name, ok, float(np.max(np.abs(diff))), curve.band,
                min_diff=float(diff.min()), max_diff=float(diff.max()))


def criterion_pld() -> list[ReportEntry]:
  eps, delta = 1.0, 0.1
  a = pld.tensor_via_pld(cnd.tulap(eps), cnd.UniformCnd(delta), 10_000)
  b = pld.tensor_via_pld(cnd.GaussianCnd(1.0), cnd.GaussianCnd(1.0), 10_000)
  return [
      _pld_entry("c08_pld_tulap_x_uniform", a,
                 tradeoff.make_eps_delta(eps, delta)),
      _pld_entry("c08_pld_gauss_x_gauss", b, tradeoff.make_gdp(math.sqrt(2))),
  ]


def otimes_circ_grid(points: int = 50) -> ReportEntry:
  """Exact ``delta_tensor <= delta_compose`` over a grid of (delta1, delta2)."""
  grid = [Fraction(i, points) for i in range(1, points + 1)]
  worst = None
  for d1 in grid:
    for d2 in grid:
      tensor = 1 - (1 - d1) * (1 - d2)
      comp = min(Fraction(1), d1 + d2)
      gap = tensor - comp
      worst = gap if worst is None else max(worst, gap)
  return _entry(f"otimes_circ_grid({points}x{points})", worst <= 0,
                float(worst), 0.0)


def iid_laplace_l1_dominance(seed: int) -> list[ReportEntry]:
  M = mv.iid_l1_cnd(cnd.LaplaceCnd(1.0), 2)
  shifts = mv.random_ball_shifts(M.norm, 20, seed)
  out = []
  for i, (v, s) in enumerate(zip(shifts, _seeds(seed, len(shifts)))):
    curve = empirical_tradeoff(M, v, N_MC, seed=s, level=LEVEL)
    out.append(dominance_check(M.target_f, curve, one_sided=True,
                               name=f"iid_laplace_l1_shift_{i:02d}"))
  return out


def criterion_inequalities(seed: int) -> list[ReportEntry]:
  entries = [otimes_circ_grid()] + iid_laplace_l1_dominance(seed)
  return [ReportEntry("c09_" + e.name, e.passed, e.statistic, e.threshold,
                      e.details) for e in entries]


def criterion_negative_controls(seed: int) -> list[ReportEntry]:
  report = verify_cnd(cnd.LaplaceCnd(1.0), tradeoff.make_eps_delta(1.0, 0.0),
                      n_mc=N_MC, seed=seed, level=LEVEL)
  eq = report.entry("property2_equality_at_1")
  dom = [e for e in report.entries if e.name.startswith("property1")]
  try:
    mv.iid_l1_cnd(cnd.tulap(1.0), 2)
    rejected, reason = False, "accepted"
  except mv.HypothesisError as err:
    rejected, reason = True, str(err)
  return [
      _entry("c10_laplace_vs_pure_dp_equality_fails", not eq.passed,
             eq.statistic, eq.threshold),
      _entry("c10_laplace_vs_pure_dp_dominance_holds",
             all(e.passed for e in dom), max(e.statistic for e in dom),
             dom[0].threshold),
      _entry("c10_iid_l1_rejects_tulap", rejected, 0.0, 0.0, reason=reason),
  ]


def acceptance_criteria(seed: int):
  """``(number, runner)`` pairs for the criteria run inside the suite."""
  s = _seeds(seed, 11)
  return [
      (1, criterion_tulap_identity),
      (2, criterion_recurrence),
      (3, criterion_limits),
      (4, criterion_doesnt_commute),
      (5, lambda: criterion_linf(s[5])),
      (6, lambda: criterion_gaussian(s[6])),
      (7, lambda: criterion_uniform(s[7])),
      (8, criterion_pld),
      (9, lambda: criterion_inequalities(s[9])),
      (10, lambda: criterion_negative_controls(s[10])),
  ]


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------

def acceptance_suite(seed: int) -> TestReport:
  report = TestReport(seed=seed, config={"suite": "acceptance", "n_mc": N_MC,
                                         "level": LEVEL})
  for _, run in acceptance_criteria(seed):
    for e in run():
      report.add(e)
  return report


def inequalities_suite(seed: int) -> TestReport:
  report = TestReport(seed=seed, config={"suite": "inequalities",
                                         "n_mc": N_MC, "level": LEVEL})
  report.add(check_otimes_circ(0.1, 0.1, 2))
  report.add(otimes_circ_grid())
  f_pure = tradeoff.make_eps_delta(1.0, 0.0)
  lap = tradeoff.make_laplace_tf(1.0)
  report.add(dominance_check(f_pure, lap, one_sided=True,
                             name="laplace_dominates_pure_dp"))
  strict = dominance_check(f_pure, lap, one_sided=False)
  report.add(_entry("laplace_strictly_above_pure_dp", not strict.passed,
                    strict.statistic, strict.threshold))
  report.add(dominance_check(tradeoff.make_eps_delta(0.0, 0.2),
                             tradeoff.make_eps_delta(0.0, 0.19),
                             one_sided=True,
                             name="smaller_delta_dominates"))
  for e in iid_laplace_l1_dominance(_seeds(seed, 1)[0]):
    report.add(e)
  return report


def limits_suite(seed: int) -> TestReport:
  report = TestReport(seed=seed, config={"suite": "limits"})
  for e in criterion_limits():
    report.add(ReportEntry(e.name[len("c03_"):], e.passed, e.statistic,
                           e.threshold, e.details))
  try:
    limit.logconcave_limit(tradeoff.point_mass_family(), 0.01)
    report.add(_entry("limit(point_mass)_rejected", False, 0.0, 0.0))
  except limit.NonConvergenceError as err:
    report.add(_entry("limit(point_mass)_rejected", True,
                      err.diagnostics.error_bound, 0.0,
                      diagnostics=err.diagnostics.to_dict()))
  return report


def run_suite(name: str, seed: int) -> TestReport:
  table = {"acceptance": acceptance_suite, "inequalities": inequalities_suite,
           "limits": limits_suite}
  if name not in table:
    raise ValueError(f"unknown suite {name!r}; expected one of {SUITES}")
  return table[name](seed)
