"""Monte-Carlo estimation of tradeoff functions and the checks built on it.

Tradeoff curves are estimated with the Neyman-Pearson test on the exact
log-likelihood ratio, using one sample stream under the null and an
independent one under the shifted alternative. Uniform DKW bands are applied
to both empirical cdfs, so an estimated point may sit up to ``band`` away
from the truth both horizontally and vertically.
"""

from __future__ import annotations

import dataclasses
import json
import math
from fractions import Fraction
from typing import Any, Optional, Sequence, Union

import numpy as np
from scipy import stats

from fdp_cnd import __version__
from fdp_cnd import cnd as cnd_lib
from fdp_cnd import tradeoff
from fdp_cnd.tradeoff import TradeoffFunction

DEFAULT_N = 100_000
DEFAULT_LEVEL = 0.01
DEFAULT_GRID_POINTS = 201
KS_LEVELS = (0.05, 0.01, 0.001)
LOSS_DECIMALS = 9


@dataclasses.dataclass(frozen=True)
class ReportEntry:
  name: str
  passed: bool
  statistic: float
  threshold: float
  details: dict = dataclasses.field(default_factory=dict)

  def to_dict(self) -> dict:
    return {"name": self.name, "passed": bool(self.passed),
            "statistic": _clean(self.statistic),
            "threshold": _clean(self.threshold),
            "details": _clean(self.details)}


@dataclasses.dataclass
class TestReport:
  entries: list[ReportEntry] = dataclasses.field(default_factory=list)
  seed: Optional[int] = None
  config: dict = dataclasses.field(default_factory=dict)

  __test__ = False  # not a pytest class

  @property
  def passed(self) -> bool:
    return all(e.passed for e in self.entries)

  def add(self, entry: ReportEntry) -> ReportEntry:
    self.entries.append(entry)
    return entry

  def extend(self, other: TestReport, prefix: str = "") -> None:
    for e in other.entries:
      self.entries.append(dataclasses.replace(e, name=prefix + e.name))

  def entry(self, name: str) -> ReportEntry:
    for e in self.entries:
      if e.name == name:
        return e
    raise KeyError(name)

  def to_dict(self) -> dict:
    return {"version": __version__, "seed": self.seed,
            "config": _clean(self.config), "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries]}

  def to_json(self) -> str:
    return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _clean(value: Any) -> Any:
  """Converts numpy scalars and non-finite floats into JSON-safe values."""
  if isinstance(value, dict):
    return {str(k): _clean(v) for k, v in value.items()}
  if isinstance(value, (list, tuple)):
    return [_clean(v) for v in value]
  if isinstance(value, np.ndarray):
    return [_clean(v) for v in value.tolist()]
  if isinstance(value, (bool, np.bool_)):
    return bool(value)
  if isinstance(value, (int, np.integer)):
    return int(value)
  if isinstance(value, (float, np.floating)):
    v = float(value)
    if math.isnan(v):
      return "nan"
    if math.isinf(v):
      return "inf" if v > 0 else "-inf"
    return v
  return value


# ---------------------------------------------------------------------------
# Empirical tradeoff curves
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class EmpiricalTradeoff:
  """Estimated tradeoff curve on an alpha grid.

  Attributes:
    alphas: the grid.
    betas: greatest convex minorant of the raw curve, evaluated on the grid.
    raw_betas: the raw threshold-sweep curve.
    band: uniform half-width. For Monte-Carlo estimates it bounds the error
      of both coordinates of every curve point; for discretised estimates
      it is a vertical error bound.
    horizontal: whether ``band`` also applies along the alpha axis.
  """
  alphas: np.ndarray
  betas: np.ndarray
  raw_betas: np.ndarray
  band: float
  n_samples: int
  seed: Optional[int]
  horizontal: bool = True

  def __call__(self, alpha):
    return np.interp(alpha, self.alphas, self.betas)

  def as_tradeoff(self) -> TradeoffFunction:
    return TradeoffFunction(lambda a: np.interp(a, self.alphas, self.betas),
                            tradeoff.Family(tradeoff.FamilyKind.COMPOSITE))

  def to_csv(self) -> str:
    lines = ["alpha,beta_hat,band"]
    for a, b in zip(self.alphas, self.betas):
      lines.append(f"{a!r},{float(b)!r},{self.band!r}")
    return "\n".join(lines) + "\n"


def dkw_band(n: int, level: float = DEFAULT_LEVEL) -> float:
  return math.sqrt(math.log(2.0 / level) / (2.0 * n))


def alpha_grid(points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
  return np.linspace(0.0, 1.0, points)


def lower_convex_hull(xs: np.ndarray, ys: np.ndarray):
  """Lower hull of points sorted by strictly increasing ``xs``."""
  hx: list[float] = []
  hy: list[float] = []
  for x, y in zip(xs.tolist(), ys.tolist()):
    while len(hx) >= 2 and ((hx[-1] - hx[-2]) * (y - hy[-2])
                            - (hy[-1] - hy[-2]) * (x - hx[-2])) <= 0:
      hx.pop()
      hy.pop()
    hx.append(x)
    hy.append(y)
  return np.array(hx), np.array(hy)


def curve_from_statistics(s0: np.ndarray, s1: np.ndarray,
                          grid: np.ndarray):
  """Tradeoff curve of the threshold tests on a statistic.

  ``s0`` are draws of the statistic under the null and ``s1`` under the
  alternative; large values favour the alternative. Sweeping the threshold
  with randomisation at ties joins consecutive ``(F0(t), F1(t))`` points by
  straight segments.

  Returns:
    ``(raw, convex)``: the raw curve and its greatest convex minorant on
    ``grid``.
  """
  s0 = np.sort(s0)
  s1 = np.sort(s1)
  u = np.unique(np.concatenate([s0, s1]))
  f0 = np.concatenate([[0.0], np.searchsorted(s0, u, side="right") / s0.size])
  f1 = np.concatenate([[0.0], np.searchsorted(s1, u, side="right") / s1.size])
  # At equal specificity keep the smallest type II error.
  x, first = np.unique(f0, return_index=True)
  y = f1[first]
  raw = np.interp(grid, x, y)
  hx, hy = lower_convex_hull(x, y)
  convex = np.interp(grid, hx, hy)
  return raw, convex


def empirical_tradeoff(dist, shift, n: int = DEFAULT_N,
                       grid: Optional[np.ndarray] = None, seed: int = 0,
                       level: float = DEFAULT_LEVEL) -> EmpiricalTradeoff:
  """Monte-Carlo estimate of ``T(N, N + shift)``.

  Args:
    dist: object with ``log_pdf(x)`` and ``sample(rng, n)``; samples of
      a d-dimensional distribution are rows.
    shift: scalar (1-d) or length-d vector.
    n: draws per hypothesis.
    grid: alpha grid; defaults to 201 points.
    seed: seed of the two independent streams.
    level: DKW level per empirical cdf.
  """
  if n < 10_000:
    raise ValueError(f"n must be >= 1e4, got {n}")
  grid = alpha_grid() if grid is None else np.asarray(grid, dtype=float)
  shift = np.asarray(shift, dtype=float)
  null_rng, alt_rng = (np.random.default_rng(s) for s in
                       np.random.SeedSequence(seed).spawn(2))
  x0 = dist.sample(null_rng, n)
  x1 = dist.sample(alt_rng, n) + shift
  s0 = _log_ratio(dist, x0, shift)
  s1 = _log_ratio(dist, x1, shift)
  raw, convex = curve_from_statistics(s0, s1, grid)
  return EmpiricalTradeoff(grid, convex, raw, dkw_band(n, level), n, seed)


def _log_ratio(dist, z, shift):
  with np.errstate(invalid="ignore"):
    s = dist.log_pdf(z - shift) - dist.log_pdf(z)
  if np.any(np.isnan(s)):
    raise ValueError("log-likelihood ratio undefined (density zero under both)")
  # Merge atoms split by rounding noise.
  return np.round(s, LOSS_DECIMALS)


def dominance_check(lower: TradeoffFunction,
                    upper: Union[EmpiricalTradeoff, TradeoffFunction],
                    one_sided: bool = True, name: str = "dominance",
                    extra_band: float = 0.0) -> ReportEntry:
  """Checks ``upper >= lower`` (one-sided) or ``upper == lower`` (two-sided).

  Both comparisons allow the band of an empirical curve; analytic curves are
  compared on a 1001-point grid with tolerance 1e-12.
  """
  if isinstance(upper, EmpiricalTradeoff):
    alphas, betas = upper.alphas, upper.betas
    band = upper.band + extra_band
    h = upper.band if upper.horizontal else 0.0
  else:
    alphas = np.linspace(0.0, 1.0, 1001)
    betas = upper(alphas)
    band = extra_band
    h = 0.0
  tol = band + 1e-12
  low_env = lower(np.clip(alphas - h, 0.0, 1.0)) - tol
  below = float(np.max(low_env + tol - betas))
  ok = bool(np.all(betas >= low_env))
  stat = below
  details = {"mode": "one-sided" if one_sided else "two-sided",
             "max_shortfall": below, "worst_alpha": float(
                 alphas[int(np.argmax(low_env - betas))])}
  if not one_sided:
    high_env = lower(np.clip(alphas + h, 0.0, 1.0)) + tol
    above = float(np.max(betas - (high_env - tol)))
    ok = ok and bool(np.all(betas <= high_env))
    stat = max(below, above)
    details["max_excess"] = above
  return ReportEntry(name, ok, stat, band, details)


# ---------------------------------------------------------------------------
# Inequalities and distributional checks
# ---------------------------------------------------------------------------

def _exact(x: float) -> Fraction:
  return Fraction(repr(float(x)))


def check_otimes_circ(delta1: float, delta2: float, k: int) -> ReportEntry:
  """Group-then-compose versus compose-then-group in the (0, delta) family.

  ``(f ⊗ g)^{∘k} <= f^{∘k} ⊗ g^{∘k}`` becomes ``delta_L >= delta_R`` because a
  larger delta is a smaller tradeoff function. Arithmetic is exact in the
  decimal values of the inputs.
  """
  d1, d2 = _exact(delta1), _exact(delta2)
  one = Fraction(1)
  left = min(one, k * (one - (one - d1) * (one - d2)))
  right = one - (one - min(one, k * d1)) * (one - min(one, k * d2))
  return ReportEntry(
      f"otimes_circ(delta1={delta1:g}, delta2={delta2:g}, k={k})",
      left >= right, float(left - right), 0.0,
      {"delta_left": float(left), "delta_right": float(right)})


def ks_test(samples, cdf, level: float = DEFAULT_LEVEL,
            name: str = "ks") -> ReportEntry:
  """Two-sided one-sample Kolmogorov-Smirnov test at a fixed level."""
  samples = np.asarray(samples, dtype=float)
  if level not in KS_LEVELS:
    raise ValueError(f"level must be one of {KS_LEVELS}")
  if samples.size < 1000:
    raise ValueError("ks_test needs at least 1e3 samples")
  if not np.all(np.isfinite(samples)):
    raise ValueError("non-finite samples")
  n = samples.size
  d = float(stats.kstest(samples, cdf).statistic)
  crit = float(stats.kstwo.ppf(1.0 - level, n))
  return ReportEntry(name, d <= crit, d, crit, {"n": n, "level": level})


# ---------------------------------------------------------------------------
# CND verification
# ---------------------------------------------------------------------------

def _seeds(seed: int, count: int) -> list[int]:
  return [int(s.generate_state(1)[0])
          for s in np.random.SeedSequence(seed).spawn(count)]


def verify_cnd(F: cnd_lib.Cnd, f: TradeoffFunction,
               m_grid: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
               n_mc: int = DEFAULT_N, seed: int = 0,
               level: float = DEFAULT_LEVEL,
               grid_points: int = DEFAULT_GRID_POINTS) -> TestReport:
  """Checks the four CND properties of ``F`` for ``f``.

  Property 4 (symmetry) and property 3 (``F(F^{-1}(a) - 1) = f(a)``) are
  checked on grids; property 2 compares the Monte-Carlo tradeoff at shift 1
  with ``f`` two-sided, and property 1 checks one-sided dominance at every
  shift in ``m_grid``.
  """
  if n_mc < 10_000:
    raise ValueError("n_mc must be >= 1e4")
  report = TestReport(seed=seed, config={
      "cnd": F.metadata(), "m_grid": list(m_grid), "n_mc": n_mc,
      "level": level, "grid_points": grid_points})
  x = np.linspace(-6.0, 6.0, 401)
  asym = float(np.max(np.abs(F.cdf(x) - (1.0 - F.cdf(-x)))))
  report.add(ReportEntry("property4_symmetry", asym <= 1e-9, asym, 1e-9))

  alphas = np.linspace(0.0, 1.0, 1001)[1:-1]
  gap = float(np.max(np.abs(F.cdf(F.quantile(alphas) - 1.0) - f(alphas))))
  report.add(ReportEntry("property3_cdf_identity", gap <= 1e-8, gap, 1e-8))

  grid = alpha_grid(grid_points)
  seeds = _seeds(seed, len(m_grid) + 1)
  curve = empirical_tradeoff(F, 1.0, n_mc, grid, seeds[0], level)
  report.add(dominance_check(f, curve, one_sided=False,
                             name="property2_equality_at_1"))
  for m, s in zip(m_grid, seeds[1:]):
    curve = empirical_tradeoff(F, m, n_mc, grid, s, level)
    report.add(dominance_check(f, curve, one_sided=True,
                               name=f"property1_dominance_m={m:g}"))
  return report


def group_scale_check(F: cnd_lib.Cnd, k: int, n: int = DEFAULT_N,
                      seed: int = 0) -> ReportEntry:
  """``F(k x)`` must be a CND for ``f^{∘k}``."""
  scaled = cnd_lib.scale_group(F, k)
  target = tradeoff.self_compose(F.source_f, k)
  report = verify_cnd(scaled, target, n_mc=n, seed=seed)
  failed = [e.name for e in report.entries if not e.passed]
  return ReportEntry(f"group_scale(k={k})", not failed, float(len(failed)),
                     0.0, {"failed": failed, "cnd": F.metadata()})
