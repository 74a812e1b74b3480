"""Multivariate canonical noise distributions.

A d-dimensional CND ``N`` for ``f`` with respect to a norm has a symmetric
density, satisfies ``T(N, N + v) >= f`` for every ``||v|| <= 1``, and attains
equality at a worst-case shift ``v*`` along which the likelihood ratio is
monotone. This module ships five constructions (independent products,
i.i.d. log-concave coordinates under l1, Gaussians, uniform cubes and the
l-infinity mechanism) and the optimisation of ``v*`` over norm balls.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import linalg, special, stats

from fdp_cnd import cnd as cnd_lib
from fdp_cnd import limit, norms, pld, tradeoff
from fdp_cnd.norms import NormKind, NormSpec
from fdp_cnd.tradeoff import TradeoffFunction
from fdp_cnd.verify import (DEFAULT_GRID_POINTS, DEFAULT_LEVEL, DEFAULT_N,
                            ReportEntry, TestReport, _seeds, alpha_grid,
                            dominance_check, empirical_tradeoff)

MAX_VERTEX_DIM = 20
SEARCH_CANDIDATES = 10_000
CERTIFICATE_POINTS = 2_000
TIE_TOL = 1e-12
CERTIFICATE_TOL = 1e-8
LOG_CONCAVITY_TOL = 1e-6


class HypothesisError(ValueError):
  """The inputs violate a hypothesis required by the construction."""


# ---------------------------------------------------------------------------
# Worst-case shifts
# ---------------------------------------------------------------------------

class ShiftMethod(enum.Enum):
  CLOSED_FORM = "ClosedForm"
  VERTEX_ENUMERATION = "VertexEnumeration"
  PROJECTED_SEARCH = "ProjectedSearch"


@dataclasses.dataclass(frozen=True, eq=False)
class WorstShiftResult:
  """Optimal shift over the unit ball and how it was found.

  Attributes:
    v_star: the shift, with ``norm(v_star) <= 1``.
    objective: the optimised functional evaluated at ``v_star``.
    method: how the optimum was located.
    certificate: result of comparing ``v_star`` against freshly sampled
      feasible points; ``max_improvement`` is the largest gain any of them
      achieved (non-positive when nothing beats ``v_star``).
    warning: set when a requested exact method had to be abandoned.
  """
  v_star: np.ndarray
  objective: float
  method: ShiftMethod
  certificate: dict
  warning: Optional[str] = None

  def to_dict(self) -> dict:
    return {"v_star": self.v_star.tolist(), "objective": self.objective,
            "method": self.method.value, "certificate": self.certificate,
            "warning": self.warning}


def canonical_sign(v: np.ndarray) -> np.ndarray:
  """Flips rows so that their first non-zero coordinate is positive."""
  v = np.atleast_2d(np.asarray(v, dtype=float))
  nz = np.abs(v) > 0
  first = np.where(nz.any(axis=1), nz.argmax(axis=1), 0)
  sign = np.where(v[np.arange(len(v)), first] < 0, -1.0, 1.0)
  return v * sign[:, None]


def _pick(cands: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, float]:
  """Best candidate; ties go to the lexicographically largest canonical row."""
  best = float(np.max(values))
  tied = canonical_sign(cands[values >= best - TIE_TOL * max(1.0, abs(best))])
  order = np.lexsort(tuple(-tied[:, j] for j in range(tied.shape[1] - 1, -1,
                                                      -1)))
  return tied[order[0]], best


def _sign_vertices(dim: int, chunk: int = 1 << 15):
  """Yields the 2^(d-1) sign vectors with a positive first coordinate."""
  total = 1 << (dim - 1)
  bits = np.arange(dim - 1, dtype=np.int64)
  for start in range(0, total, chunk):
    idx = np.arange(start, min(total, start + chunk), dtype=np.int64)
    rest = 1.0 - 2.0 * ((idx[:, None] >> bits[::-1]) & 1)
    yield np.hstack([np.ones((len(idx), 1)), rest])


def _vertex_search(objective, norm: NormSpec):
  if norm.kind is NormKind.L1:
    cands = np.eye(norm.dim)
    return _pick(cands, objective(cands))
  best_v, best = None, -np.inf
  for chunk in _sign_vertices(norm.dim):
    v, val = _pick(chunk, objective(chunk))
    if best_v is None or val > best + TIE_TOL * max(1.0, abs(best)):
      best_v, best = v, val
    elif val >= best - TIE_TOL * max(1.0, abs(best)):
      best_v, best = _pick(np.vstack([best_v, v]), np.array([best, val]))
  return best_v, best


def _random_boundary(norm: NormSpec, rng: np.random.Generator, n: int):
  d = norm.dim
  n_sign = n // 4
  signs = rng.choice([-1.0, 1.0], size=(n_sign, d))
  gauss = rng.standard_normal((n - n_sign, d))
  return norm.to_boundary(np.vstack([signs, gauss]))


def _projected_search(objective, norm: NormSpec, rng: np.random.Generator):
  d = norm.dim
  basis = np.vstack([np.eye(d), -np.eye(d)])
  cands = np.vstack([norm.to_boundary(basis),
                     _random_boundary(norm, rng, SEARCH_CANDIDATES - 2 * d)])
  values = objective(cands)
  starts = cands[np.argsort(values)[-10:]]
  for v in starts:
    val = float(objective(v[None])[0])
    step = 0.5
    for _ in range(300):
      trial = norm.to_boundary(v + step * rng.standard_normal((8, d)))
      tv = objective(trial)
      j = int(np.argmax(tv))
      if tv[j] > val:
        v, val = trial[j], float(tv[j])
      else:
        step *= 0.8
    cands = np.vstack([cands, v[None]])
    values = np.append(values, val)
  return _pick(cands, values)


def _certify(objective, norm: NormSpec, v: np.ndarray, value: float,
             seed: int, tol: float) -> dict:
  rng = np.random.default_rng(seed)
  pts = _random_boundary(norm, rng, CERTIFICATE_POINTS)
  pts = pts * rng.uniform(0.0, 1.0, (len(pts), 1)) ** (1.0 / norm.dim)
  pts = np.vstack([pts, _random_boundary(norm, rng, CERTIFICATE_POINTS)])
  gain = float(np.max(objective(pts)) - value)
  return {"n_checked": len(pts), "max_improvement": gain, "tolerance": tol,
          "passed": gain <= tol}


def optimize_over_ball(objective: Callable[[np.ndarray], np.ndarray],
                       norm: NormSpec, closed_form=None,
                       seed: int = 0) -> WorstShiftResult:
  """Maximises ``objective`` (vectorised over rows) over the unit ball.

  The maximum must be attained at an extreme point of the ball (true for
  convex objectives, and for minus a product of concave factors in
  ``|u_i|``). Polytope norms are solved by
  enumerating vertices, other norms by ``closed_form`` when given, and by a
  multi-start projected search otherwise.
  """
  warning = None
  method = None
  if closed_form is not None:
    v, value = closed_form()
    method = ShiftMethod.CLOSED_FORM
  elif norm.kind is NormKind.L1 or (norm.kind is NormKind.LINF and
                                    norm.dim <= MAX_VERTEX_DIM):
    v, value = _vertex_search(objective, norm)
    method = ShiftMethod.VERTEX_ENUMERATION
  else:
    if norm.kind is NormKind.LINF:
      warning = (f"dimension {norm.dim} > {MAX_VERTEX_DIM}: vertex "
                 "enumeration replaced by projected search")
    v, value = _projected_search(objective, norm,
                                 np.random.default_rng(seed))
    method = ShiftMethod.PROJECTED_SEARCH
  value = float(objective(v[None])[0])
  cert = _certify(objective, norm, v, value, seed + 1, CERTIFICATE_TOL)
  if method is ShiftMethod.PROJECTED_SEARCH:
    # No global guarantee: the gain is reported as slack, not judged.
    cert["tolerance"] = None
    cert["passed"] = None
  return WorstShiftResult(v, value, method, cert, warning)


def _check_spd(sigma) -> np.ndarray:
  sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
  if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
    raise ValueError("covariance must be a square matrix")
  if not np.allclose(sigma, sigma.T, atol=1e-12):
    raise ValueError("covariance must be symmetric")
  try:
    np.linalg.cholesky(sigma)
  except np.linalg.LinAlgError:
    raise ValueError("covariance must be positive definite") from None
  return sigma


def _lex_largest_in_span(vecs: np.ndarray) -> np.ndarray:
  """Lexicographically largest unit-combination of orthonormal columns."""
  for row in vecs:
    norm = np.linalg.norm(row)
    if norm > 1e-9:
      return vecs @ (row / norm)
  return vecs[:, 0]


def worst_shift_gaussian(sigma, norm: NormSpec,
                         seed: int = 0) -> WorstShiftResult:
  """Maximises ``||Sigma^{-1/2} u||_2`` over the unit ball of ``norm``."""
  sigma = _check_spd(sigma)
  if sigma.shape[0] != norm.dim:
    raise ValueError("covariance and norm dimensions differ")
  chol = np.linalg.cholesky(sigma)

  def objective(u):
    w = linalg.solve_triangular(chol, np.atleast_2d(u).T, lower=True)
    return np.sqrt(np.sum(w * w, axis=0))

  closed = None
  if norm.kind in (NormKind.L2, NormKind.ELLIPTICAL):
    a = np.eye(norm.dim) if norm.kind is NormKind.L2 else norm.matrix
    precision = np.linalg.inv(sigma)
    precision = 0.5 * (precision + precision.T)

    def closed():
      vals, vecs = linalg.eigh(precision, a)
      top = vals >= vals[-1] * (1.0 - 1e-10)
      v = _lex_largest_in_span(vecs[:, top])
      v = canonical_sign(v)[0]
      return v / norm(v), float(np.sqrt(vals[-1]))

  return optimize_over_ball(objective, norm, closed, seed)


def worst_shift_uniform(delta: float, norm: NormSpec,
                        seed: int = 0) -> WorstShiftResult:
  """Minimises ``prod(1 - delta |v_i|)`` over the unit ball of ``norm``.

  The result's ``objective`` is that product, ``A``.
  """
  def neg_product(u):
    u = np.atleast_2d(u)
    return -np.prod(np.maximum(0.0, 1.0 - delta * np.abs(u)), axis=1)

  res = optimize_over_ball(neg_product, norm, None, seed)
  return dataclasses.replace(res, objective=-res.objective)


# ---------------------------------------------------------------------------
# Multivariate CNDs
# ---------------------------------------------------------------------------

class MvKind(enum.Enum):
  PRODUCT = "product"
  IID_L1 = "iid_l1"
  GAUSSIAN_MV = "gaussian_mv"
  UNIFORM_CUBE = "uniform_cube"
  APPROX_DP = "approx_dp"
  LINF_MECH = "linf_mech"


@dataclasses.dataclass(frozen=True, eq=False)
class MvCnd:
  """A multivariate CND with its norm, worst-case shift and target.

  Attributes:
    kind: which construction produced it.
    dim: dimension.
    norm: sensitivity norm.
    shift: worst-case shift and how it was found.
    target_f: tradeoff function the distribution is canonical for.
    log_density: vectorised log density over rows.
    sampler: ``(rng, n) -> (n, dim)`` array of draws.
    params: constructor parameters, for metadata.
    target_error: known error of ``target_f`` when it is a numerical estimate.
  """
  kind: MvKind
  dim: int
  norm: NormSpec
  shift: WorstShiftResult
  target_f: TradeoffFunction
  log_density: Callable[[np.ndarray], np.ndarray]
  sampler: Callable[[np.random.Generator, int], np.ndarray]
  params: dict = dataclasses.field(default_factory=dict)
  target_error: float = 0.0

  @property
  def worst_shift(self) -> np.ndarray:
    return self.shift.v_star

  def log_pdf(self, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != self.dim:
      raise ValueError(f"expected trailing dimension {self.dim}")
    flat = x.reshape(-1, self.dim)
    return np.asarray(self.log_density(flat)).reshape(x.shape[:-1])

  def pdf(self, x) -> np.ndarray:
    return np.exp(self.log_pdf(x))

  def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
    return np.asarray(self.sampler(rng, int(n)), dtype=float).reshape(
        n, self.dim)

  def metadata(self) -> dict:
    return {"kind": self.kind.value, "dim": self.dim,
            "norm": self.norm.to_dict(), "v_star": self.worst_shift.tolist(),
            "worst_shift": self.shift.to_dict(),
            "target_f": _family_dict(self.target_f),
            "target_error": self.target_error, "params": self.params}

  def __repr__(self):
    return f"MvCnd({self.kind.value}, dim={self.dim}, {self.params})"


def _family_dict(f: TradeoffFunction) -> Optional[dict]:
  if f.family is None:
    return None
  return {"family": f.family.kind.value, "params": dict(f.family.params)}


def _fixed_shift(v: np.ndarray, norm: NormSpec,
                 note: str) -> WorstShiftResult:
  return WorstShiftResult(np.asarray(v, dtype=float), float(norm(v)),
                          ShiftMethod.CLOSED_FORM, {"note": note})


def _product_sampler(cnds: Sequence[cnd_lib.Cnd]):
  def sampler(rng, n):
    return np.column_stack([F.sample(rng, n) for F in cnds])
  return sampler


def _product_log_density(cnds: Sequence[cnd_lib.Cnd]):
  def log_density(x):
    out = np.zeros(len(x))
    with np.errstate(invalid="ignore"):
      for j, F in enumerate(cnds):
        out = out + F.log_pdf(x[:, j])
    return out
  return log_density


def product_cnd(cnds: Sequence[cnd_lib.Cnd],
                grid_size: int = 10_000) -> MvCnd:
  """Independent coordinates, each a 1-d CND: a CND under the l-infinity norm.

  The target is the tensor product of the coordinate tradeoffs: a closed
  form when the families allow it, otherwise the loss-distribution estimate
  with its error bound in ``target_error``.
  """
  cnds = list(cnds)
  if not cnds:
    raise ValueError("product_cnd needs at least one component")
  for F in cnds:
    if not isinstance(F, cnd_lib.Cnd):
      raise TypeError(f"{F!r} is not a Cnd")
    if not F.source_f.symmetric or not tradeoff.is_nontrivial(F.source_f):
      raise HypothesisError(
          f"{F!r} needs a symmetric, non-trivial tradeoff function")
  d = len(cnds)
  target = tradeoff.tensor_fold([F.source_f for F in cnds])
  error = 0.0
  if target is tradeoff.UNSUPPORTED:
    curve = pld.tensor_via_pld_many(cnds, grid_size)
    target, error = curve.as_tradeoff(), curve.band
  norm = norms.linf(d)
  return MvCnd(MvKind.PRODUCT, d, norm,
               _fixed_shift(np.ones(d), norm, "all-ones vertex"), target,
               _product_log_density(cnds), _product_sampler(cnds),
               {"components": [F.metadata() for F in cnds]}, error)


def _is_log_concave(F: cnd_lib.Cnd) -> bool:
  if F.kind in cnd_lib.LOG_CONCAVE_KINDS:
    return True
  if isinstance(F, limit.LimitCnd):
    # A finite-scale limit is a staircase with kinks at cell edges; the
    # log-concave shape it approximates shows at the cell centres.
    s = F.scale
    lo, hi = F.quantile(1e-4), F.quantile(1.0 - 1e-4)
    centres = s * np.arange(math.floor(lo / s), math.ceil(hi / s) + 1)
    return limit.log_concavity_excess(F, centres) <= LOG_CONCAVITY_TOL
  return False


def iid_l1_cnd(F: cnd_lib.Cnd, k: int) -> MvCnd:
  """``k`` i.i.d. copies of a log-concave CND: a CND under the l1 norm."""
  if k < 1:
    raise ValueError("k must be positive")
  if not _is_log_concave(F):
    raise HypothesisError(
        f"{F.kind.value} CND is not log-concave; the i.i.d. l1 construction "
        "requires a log-concave component")
  cnds = [F] * k
  norm = norms.l1(k)
  v = np.zeros(k)
  v[0] = 1.0
  return MvCnd(MvKind.IID_L1, k, norm, _fixed_shift(v, norm, "first axis"),
               F.source_f, _product_log_density(cnds),
               _product_sampler(cnds), {"component": F.metadata(), "k": k})


def gaussian_mv_cnd(sigma, norm: NormSpec, seed: int = 0) -> MvCnd:
  """``N(0, Sigma)``: a CND for ``G_mu`` with ``mu = ||Sigma^{-1/2} v*||_2``."""
  sigma = _check_spd(sigma)
  d = sigma.shape[0]
  chol = np.linalg.cholesky(sigma)
  log_norm = -0.5 * d * math.log(2 * math.pi) - float(
      np.sum(np.log(np.diag(chol))))
  shift = worst_shift_gaussian(sigma, norm, seed)

  def log_density(x):
    w = linalg.solve_triangular(chol, x.T, lower=True)
    return log_norm - 0.5 * np.sum(w * w, axis=0)

  def sampler(rng, n):
    return rng.standard_normal((n, d)) @ chol.T

  return MvCnd(MvKind.GAUSSIAN_MV, d, norm, shift,
               tradeoff.make_gdp(shift.objective), log_density, sampler,
               {"sigma": sigma.tolist(), "mu": shift.objective})


def _uniform_parts(deltas: Sequence[float]):
  deltas = np.asarray(deltas, dtype=float)
  half = 0.5 / deltas
  log_const = float(np.sum(np.log(deltas)))

  def log_density(x):
    inside = np.all(np.abs(x) <= half, axis=1)
    return np.where(inside, log_const, -np.inf)

  def sampler(rng, n):
    return rng.uniform(-half, half, size=(n, len(deltas)))

  return log_density, sampler


def uniform_cube_cnd(delta: float, dim: int, norm: NormSpec,
                     seed: int = 0) -> MvCnd:
  """I.i.d. ``U(-1/(2 delta), 1/(2 delta))`` coordinates: a CND for ``f_{0,1-A}``.

  ``A`` is the minimum of ``prod(1 - delta |v_i|)`` over the unit ball.
  """
  if not 0 < delta <= 1:
    raise ValueError(f"delta must lie in (0, 1], got {delta}")
  if norm.dim != dim:
    raise ValueError("norm dimension differs from dim")
  shift = worst_shift_uniform(delta, norm, seed)
  a = shift.objective
  log_density, sampler = _uniform_parts([delta] * dim)
  return MvCnd(MvKind.UNIFORM_CUBE, dim, norm, shift,
               tradeoff.make_eps_delta(0.0, 1.0 - a), log_density, sampler,
               {"delta": delta, "A": a})


def split_delta(delta: float, k: int) -> list[float]:
  """Equal split ``delta_i`` with ``prod(1 - delta_i) = 1 - delta``."""
  return [float(-np.expm1(np.log1p(-delta) / k))] * k


def approx_dp_cnd(eps: float, delta: float, k: int = 1,
                  deltas: Optional[Sequence[float]] = None) -> MvCnd:
  """One Tulap coordinate plus ``k`` uniform ones: a CND for ``f_{eps,delta}``.

  Args:
    eps: privacy parameter of the Tulap coordinate.
    delta: overall delta; the uniform coordinates' ``delta_i`` satisfy
      ``prod(1 - delta_i) = 1 - delta``.
    k: number of uniform coordinates.
    deltas: explicit split overriding the equal default.
  """
  if eps <= 0:
    raise ValueError("eps must be positive")
  if not 0 < delta <= 1:
    raise ValueError(f"delta must lie in (0, 1], got {delta}")
  if k < 1:
    raise ValueError("k must be positive")
  if deltas is None:
    deltas = split_delta(delta, k)
  deltas = [float(x) for x in deltas]
  if len(deltas) != k or not all(0 < x <= 1 for x in deltas):
    raise ValueError("deltas must be k values in (0, 1]")
  if abs(np.prod([1.0 - x for x in deltas]) - (1.0 - delta)) > 1e-12:
    raise ValueError("prod(1 - delta_i) must equal 1 - delta")
  cnds = [cnd_lib.tulap(eps)] + [cnd_lib.UniformCnd(x) for x in deltas]
  base = product_cnd(cnds)
  return dataclasses.replace(
      base, kind=MvKind.APPROX_DP,
      target_f=tradeoff.make_eps_delta(eps, delta),
      params={"eps": eps, "delta": delta, "k": k, "deltas": deltas})


def linf_mechanism(eps: float, dim: int) -> MvCnd:
  """Density ``exp(-eps ||x||_inf) / (d! (2/eps)^d)``: a CND for ``L_eps``."""
  if eps <= 0:
    raise ValueError("eps must be positive")
  if dim < 1:
    raise ValueError("dim must be positive")
  log_norm = -special.gammaln(dim + 1) - dim * math.log(2.0 / eps)

  def log_density(x):
    return log_norm - eps * np.max(np.abs(x), axis=1)

  def sampler(rng, n):
    radius = rng.exponential(1.0 / eps, size=(n, dim + 1)).sum(axis=1)
    return radius[:, None] * rng.uniform(-1.0, 1.0, size=(n, dim))

  norm = norms.linf(dim)
  return MvCnd(MvKind.LINF_MECH, dim, norm,
               _fixed_shift(np.ones(dim), norm, "all-ones vertex"),
               tradeoff.make_laplace_tf(eps), log_density, sampler,
               {"eps": eps})


def linf_plrv(x, eps: float) -> float:
  """Log-likelihood ratio of the l-infinity mechanism at ``x`` against shift 1."""
  x = np.asarray(x, dtype=float)
  s = np.max(x, axis=-1) + np.min(x, axis=-1)
  out = eps * np.clip(1.0 - s, -1.0, 1.0)
  return float(out) if np.ndim(out) == 0 else out


def linf_radius_cdf(r, eps: float, dim: int):
  """Cdf of ``||X||_inf`` for the l-infinity mechanism: Gamma(dim, rate eps)."""
  return stats.gamma.cdf(r, dim, scale=1.0 / eps)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

def random_ball_shifts(norm: NormSpec, count: int,
                       seed: int = 0) -> np.ndarray:
  """``count`` random points of the closed unit ball of ``norm``."""
  rng = np.random.default_rng(seed)
  pts = _random_boundary(norm, rng, max(count, 4))[:count]
  return pts * rng.uniform(0.0, 1.0, (count, 1))


def _monotone_ratio_violation(M: MvCnd, rng: np.random.Generator,
                              n_points: int = 200, n_t: int = 201) -> float:
  w = M.sample(rng, n_points)
  v = M.worst_shift
  span = 3.0 * max(1.0, float(np.max(np.abs(w))))
  t = np.linspace(-span, span, n_t)
  pts = w[:, None, :] + t[None, :, None] * v
  with np.errstate(invalid="ignore"):
    num = M.log_pdf(pts - v)
    den = M.log_pdf(pts)
    ratio = num - den
  worst = 0.0
  for row, ok in zip(ratio, np.isfinite(num) & np.isfinite(den)):
    r = row[ok]
    if r.size > 1:
      drop = -np.diff(r) / (1.0 + np.abs(r[1:]))
      worst = max(worst, float(np.max(drop)))
  return worst


def verify_mv_cnd(M: MvCnd, n_mc: int = DEFAULT_N,
                  shift_grid: Optional[Sequence] = None, seed: int = 0,
                  level: float = DEFAULT_LEVEL,
                  grid_points: int = DEFAULT_GRID_POINTS,
                  n_shifts: int = 20) -> TestReport:
  """Checks the four multivariate CND properties.

  Args:
    M: the distribution.
    n_mc: Monte-Carlo draws per hypothesis and curve.
    shift_grid: shifts for the dominance checks; ``n_shifts`` random points
      of the unit ball by default.
    seed: master seed.
    level: DKW level.
    grid_points: size of the alpha grid.
    n_shifts: number of random shifts when ``shift_grid`` is not given.
  """
  if n_mc < 10_000:
    raise ValueError("n_mc must be >= 1e4")
  seeds = _seeds(seed, 4)
  if shift_grid is None:
    shift_grid = random_ball_shifts(M.norm, n_shifts, seeds[0])
  shift_grid = np.atleast_2d(np.asarray(shift_grid, dtype=float))
  if np.any(np.asarray(M.norm(shift_grid)) > 1.0 + 1e-12):
    raise ValueError("shift_grid vectors must lie in the unit ball")
  report = TestReport(seed=seed, config={
      "mv_cnd": M.metadata(), "n_mc": n_mc, "level": level,
      "grid_points": grid_points, "shift_grid": shift_grid.tolist()})

  rng = np.random.default_rng(seeds[1])
  x = np.vstack([M.sample(rng, 2000), 3.0 * rng.standard_normal((500, M.dim))])
  a, b = M.log_pdf(x), M.log_pdf(-x)
  both_inf = np.isneginf(a) & np.isneginf(b)
  with np.errstate(invalid="ignore"):
    asym = float(np.max(np.where(both_inf, 0.0, np.abs(a - b))))
  report.add(ReportEntry("property4_symmetry", asym <= 1e-9, asym, 1e-9))

  drop = _monotone_ratio_violation(M, np.random.default_rng(seeds[2]))
  report.add(ReportEntry("property3_monotone_ratio", drop <= 1e-9, drop, 1e-9))

  norm_v = float(M.norm(M.worst_shift))
  report.add(ReportEntry("worst_shift_in_ball", norm_v <= 1.0 + 1e-12,
                         norm_v, 1.0))

  grid = alpha_grid(grid_points)
  curve_seeds = _seeds(seeds[3], len(shift_grid) + 1)
  curve = empirical_tradeoff(M, M.worst_shift, n_mc, grid, curve_seeds[0],
                             level)
  report.add(dominance_check(M.target_f, curve, one_sided=False,
                             name="property2_equality_at_v_star",
                             extra_band=M.target_error))
  for i, (v, s) in enumerate(zip(shift_grid, curve_seeds[1:])):
    curve = empirical_tradeoff(M, v, n_mc, grid, s, level)
    report.add(dominance_check(M.target_f, curve, one_sided=True,
                               name=f"property1_dominance_shift_{i:02d}",
                               extra_band=M.target_error))
  return report
