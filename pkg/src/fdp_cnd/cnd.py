"""One-dimensional canonical noise distributions.

A CND ``N`` for a symmetric tradeoff function ``f`` is symmetric about zero
and satisfies ``T(N, N + 1)(a) = F(F^{-1}(a) - 1) = f(a)``. Its cdf obeys the
recursion ``F(x) = f(F(x + 1))`` in the lower tail, which by symmetry is the
same as ``1 - F(x) = f(1 - F(x - 1))`` in the upper tail. All classes here
evaluate tails through a survival function ``sf`` so that small tail
probabilities keep their relative precision.
"""

from __future__ import annotations

import enum
import math
from typing import Optional

import numpy as np
from scipy import special

from fdp_cnd import tradeoff
from fdp_cnd.tradeoff import TradeoffFunction

MAX_RECURSION_DEPTH = 10**6
FD_STEP = 1e-6


class CndKind(enum.Enum):
  CONSTRUCTED = "constructed"
  TULAP = "tulap"
  GAUSSIAN = "gaussian"
  LAPLACE = "laplace"
  UNIFORM = "uniform"
  SCALED = "scaled"
  LIMIT = "limit"


LOG_CONCAVE_KINDS = (CndKind.GAUSSIAN, CndKind.LAPLACE, CndKind.UNIFORM)


class DegenerateTradeoffError(ValueError):
  """The tradeoff function is trivial, so no CND exists."""


class RecursionDepthError(ArithmeticError):
  """Cdf evaluation needed more than ``MAX_RECURSION_DEPTH`` steps."""


class Cnd:
  """Base class: a continuous distribution symmetric about zero.

  Subclasses provide ``sf`` (the survival function); everything else has a
  generic fallback. ``source_f`` is the tradeoff function the distribution is
  canonical for.
  """
  kind: CndKind
  source_f: TradeoffFunction

  @property
  def params(self) -> dict:
    return {}

  def sf(self, x):
    raise NotImplementedError

  def cdf(self, x):
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0, self.sf(-x), 1.0 - self.sf(np.abs(x)))
    return float(out) if out.ndim == 0 else out

  def pdf(self, x):
    """Central finite difference of the cdf, evaluated in the tail."""
    y = np.abs(np.asarray(x, dtype=float))
    h = FD_STEP
    out = (self.sf(y - h) - self.sf(y + h)) / (2 * h)
    out = np.maximum(out, 0.0)
    return float(out) if np.ndim(out) == 0 else out

  def log_pdf(self, x):
    with np.errstate(divide="ignore"):
      return np.log(self.pdf(x))

  def quantile(self, p):
    """Inverse cdf by bracket expansion from [-1, 1] and 80 bisections."""
    p = np.asarray(p, dtype=float)
    out = _bracket_bisect(self.cdf, p)
    return float(out) if out.ndim == 0 else out

  def sample(self, rng: np.random.Generator, size=None):
    return self.quantile(rng.uniform(size=size))

  def metadata(self) -> dict:
    tag = self.source_f.family
    source = None
    if tag is not None and tag.is_closed_form:
      source = {"family_tag": tag.kind.value, "params": dict(tag.params)}
    return {"kind": self.kind.value, "params": self.params,
            "source_f": source}

  def __repr__(self):
    params = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
    return f"{type(self).__name__}({params})"


def _bracket_bisect(cdf, p: np.ndarray, steps: int = 80) -> np.ndarray:
  flat = p.ravel()
  out = np.full(flat.shape, np.nan)
  out[flat <= 0] = -np.inf
  out[flat >= 1] = np.inf
  idx = np.flatnonzero((flat > 0) & (flat < 1))
  if idx.size:
    target = flat[idx]
    lo = np.full(idx.size, -1.0)
    hi = np.full(idx.size, 1.0)
    for _ in range(1100):
      low_bad = cdf(lo) >= target
      high_bad = cdf(hi) < target
      if not (low_bad.any() or high_bad.any()):
        break
      lo = np.where(low_bad, 2 * lo, lo)
      hi = np.where(high_bad, 2 * hi, hi)
    for _ in range(steps):
      mid = 0.5 * (lo + hi)
      below = cdf(mid) < target
      lo = np.where(below, mid, lo)
      hi = np.where(below, hi, mid)
    out[idx] = 0.5 * (lo + hi)
  return out.reshape(p.shape)


# ---------------------------------------------------------------------------
# Construction from an arbitrary symmetric tradeoff function
# ---------------------------------------------------------------------------

class ConstructedCnd(Cnd):
  """CND built from ``f`` by the recursion around a linear core.

  On [-1/2, 1/2] the cdf interpolates linearly between ``c`` and ``1 - c``
  where ``f(1 - c) = c``. Outside, each unit step applies ``f`` once more.
  """
  kind = CndKind.CONSTRUCTED

  def __init__(self, f: TradeoffFunction):
    if not f.symmetric:
      raise ValueError("construct_cnd needs a symmetric tradeoff function")
    if not tradeoff.is_nontrivial(f):
      raise DegenerateTradeoffError(f"{f!r} is trivial; no CND exists")
    c = tradeoff.fixed_point_c(f)
    if c >= 0.5 - 1e-12:
      raise DegenerateTradeoffError(f"{f!r} has fixed point c = 1/2")
    self.source_f = f
    self.c = c

  @property
  def params(self) -> dict:
    return {"c": self.c}

  def _core(self, x):
    return self.c + (1.0 - 2.0 * self.c) * (x + 0.5)

  def pdf(self, x):
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) < 0.5 - FD_STEP, 1.0 - 2.0 * self.c,
                   super().pdf(x))
    return float(out) if out.ndim == 0 else out

  def sf(self, x):
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty(flat.shape)
    out[flat == np.inf] = 0.0
    out[flat == -np.inf] = 1.0
    finite = np.isfinite(flat)
    steps = np.zeros(flat.shape, dtype=np.int64)
    steps[finite] = np.maximum(np.ceil(flat[finite] - 0.5), 0).astype(np.int64)
    if steps.max(initial=0) > MAX_RECURSION_DEPTH:
      raise RecursionDepthError(
          f"cdf evaluation at |x|={np.max(np.abs(flat[finite])):.3g} needs "
          f"more than {MAX_RECURSION_DEPTH} recursion steps")
    low = finite & (flat < -0.5)
    if low.any():
      out[low] = 1.0 - self.sf(-flat[low])
    mid = finite & (flat >= -0.5) & (flat <= 0.5)
    out[mid] = 1.0 - self._core(flat[mid])
    up = np.flatnonzero(finite & (flat > 0.5))
    if up.size:
      n = steps[up]
      order = np.argsort(-n, kind="stable")
      n_sorted = n[order]
      # Start from the point in the core shifted by whole steps.
      vals = self._core(-(flat[up][order] - n_sorted))
      counts = np.searchsorted(-n_sorted, -np.arange(1, n_sorted[0] + 1),
                               side="right")
      f = self.source_f
      for active in counts:
        vals[:active] = np.clip(f(vals[:active]), 0.0, 1.0)
      res = np.empty(up.size)
      res[order] = vals
      out[up] = res
    return float(out[0]) if x.ndim == 0 else out.reshape(x.shape)

  def quantile(self, p):
    """Inverse cdf by running the recursion backwards through ``f^{-1}``."""
    p = np.asarray(p, dtype=float)
    flat = p.ravel()
    lower = np.minimum(flat, 1.0 - flat)
    c = self.c
    v = lower.copy()
    n = np.zeros(flat.shape)
    active = np.flatnonzero((v < c) & (v > 0))
    for _ in range(MAX_RECURSION_DEPTH):
      if active.size == 0:
        break
      v[active] = self.source_f.inv(v[active])
      n[active] += 1
      active = active[v[active] < c]
    else:
      raise RecursionDepthError("quantile recursion too deep")
    # v now lies in the linear core, n unit steps to the right of the answer.
    with np.errstate(invalid="ignore"):
      x_lower = (v - c) / (1.0 - 2.0 * c) - 0.5 - n
    x_lower = np.where(lower <= 0, -np.inf, x_lower)
    out = np.where(flat > 0.5, -x_lower, x_lower)
    return float(out[0]) if p.ndim == 0 else out.reshape(p.shape)


def construct_cnd(f: TradeoffFunction) -> ConstructedCnd:
  return ConstructedCnd(f)


# ---------------------------------------------------------------------------
# Closed-form CNDs
# ---------------------------------------------------------------------------

class TulapCnd(Cnd):
  """``Tulap(0, exp(-eps), 0)``: uniform core with geometric tails.

  The density is ``a * q^|k|`` on the cell centred at integer ``k`` with
  ``q = exp(-eps)`` and ``a = (1 - q) / (1 + q)``.
  """
  kind = CndKind.TULAP

  def __init__(self, eps: float):
    if not eps > 0:
      raise ValueError(f"eps must be > 0, got {eps}")
    self.eps = float(eps)
    self.q = math.exp(-eps)
    self.a = (1.0 - self.q) / (1.0 + self.q)
    self.source_f = tradeoff.make_eps_delta(eps, 0.0)

  @property
  def params(self) -> dict:
    return {"eps": self.eps}

  @staticmethod
  def _cell(y):
    return np.maximum(np.ceil(y - 0.5), 0.0)

  def sf(self, x):
    x = np.asarray(x, dtype=float)
    y = np.abs(x)
    k = self._cell(np.where(np.isfinite(y), y, 0.0))
    qk = np.exp(-self.eps * k)
    upper = self.a * qk * (k + 0.5 - y) + self.a * qk * self.q / (1.0 - self.q)
    upper = np.where(np.isinf(y), 0.0, upper)
    out = np.where(x >= 0, upper, 1.0 - upper)
    return float(out) if out.ndim == 0 else out

  def pdf(self, x):
    y = np.abs(np.asarray(x, dtype=float))
    out = self.a * np.exp(-self.eps * self._cell(np.where(np.isfinite(y), y, 0)))
    out = np.where(np.isinf(y), 0.0, out)
    return float(out) if out.ndim == 0 else out

  def log_pdf(self, x):
    y = np.abs(np.asarray(x, dtype=float))
    return math.log(self.a) - self.eps * self._cell(y)

  def quantile(self, p):
    p = np.asarray(p, dtype=float)
    lower = np.minimum(p, 1.0 - p)
    with np.errstate(divide="ignore", invalid="ignore"):
      # Survival at the start of cell k >= 1 is q^k / (1 + q).
      k = np.floor(np.log(lower * (1.0 + self.q)) / -self.eps)
      k = np.maximum(k, 0.0)
      qk = np.exp(-self.eps * k)
      rest = self.a * qk * self.q / (1.0 - self.q)
      y = k + 0.5 - (lower - rest) / (self.a * qk)
    y = np.clip(y, np.maximum(k - 0.5, 0.0), k + 0.5)
    y = np.where(lower <= 0, np.inf, y)
    out = np.where(p > 0.5, y, -y)
    return float(out) if out.ndim == 0 else out

  def sample_fast(self, rng: np.random.Generator, size=None):
    """``G1 - G2 + U`` with geometric ``G1, G2`` and ``U ~ U(-1/2, 1/2)``."""
    p = 1.0 - self.q
    g1 = rng.geometric(p, size=size) - 1
    g2 = rng.geometric(p, size=size) - 1
    return g1 - g2 + rng.uniform(-0.5, 0.5, size=size)


class GaussianCnd(Cnd):
  """``N(0, 1/mu^2)``, the log-concave CND for ``G_mu``."""
  kind = CndKind.GAUSSIAN

  def __init__(self, mu: float):
    if not mu > 0:
      raise ValueError(f"mu must be > 0, got {mu}")
    self.mu = float(mu)
    self.source_f = tradeoff.make_gdp(mu)

  @property
  def params(self) -> dict:
    return {"mu": self.mu}

  def sf(self, x):
    return special.ndtr(-self.mu * np.asarray(x, dtype=float))

  def cdf(self, x):
    return special.ndtr(self.mu * np.asarray(x, dtype=float))

  def pdf(self, x):
    z = self.mu * np.asarray(x, dtype=float)
    return self.mu * np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)

  def log_pdf(self, x):
    z = self.mu * np.asarray(x, dtype=float)
    return math.log(self.mu) - 0.5 * z * z - 0.5 * math.log(2 * math.pi)

  def quantile(self, p):
    return special.ndtri(np.asarray(p, dtype=float)) / self.mu

  def sample(self, rng, size=None):
    return rng.normal(0.0, 1.0 / self.mu, size=size)


class LaplaceCnd(Cnd):
  """``Laplace(0, 1/eps)``, the log-concave CND for ``L_eps``."""
  kind = CndKind.LAPLACE

  def __init__(self, eps: float):
    if not eps > 0:
      raise ValueError(f"eps must be > 0, got {eps}")
    self.eps = float(eps)
    self.scale = 1.0 / eps
    self.source_f = tradeoff.make_laplace_tf(eps)

  @property
  def params(self) -> dict:
    return {"eps": self.eps}

  def sf(self, x):
    return tradeoff.laplace_cdf(-np.asarray(x, dtype=float), self.scale)

  def cdf(self, x):
    return tradeoff.laplace_cdf(x, self.scale)

  def pdf(self, x):
    return 0.5 * self.eps * np.exp(-self.eps * np.abs(np.asarray(x, float)))

  def log_pdf(self, x):
    return math.log(0.5 * self.eps) - self.eps * np.abs(np.asarray(x, float))

  def quantile(self, p):
    return tradeoff.laplace_quantile(p, self.scale)

  def sample(self, rng, size=None):
    return rng.laplace(0.0, self.scale, size=size)


class UniformCnd(Cnd):
  """``U(-1/(2 delta), 1/(2 delta))``, the log-concave CND for ``f_{0,delta}``."""
  kind = CndKind.UNIFORM

  def __init__(self, delta: float):
    if not 0 < delta <= 1:
      raise ValueError(f"delta must lie in (0, 1], got {delta}")
    self.delta = float(delta)
    self.half_width = 0.5 / delta
    self.source_f = tradeoff.make_eps_delta(0.0, delta)

  @property
  def params(self) -> dict:
    return {"delta": self.delta}

  def sf(self, x):
    x = np.asarray(x, dtype=float)
    return np.clip(0.5 - self.delta * x, 0.0, 1.0)

  def cdf(self, x):
    x = np.asarray(x, dtype=float)
    return np.clip(0.5 + self.delta * x, 0.0, 1.0)

  def pdf(self, x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= self.half_width, self.delta, 0.0)

  def log_pdf(self, x):
    x = np.asarray(x, dtype=float)
    return np.where(np.abs(x) <= self.half_width, math.log(self.delta), -np.inf)

  def quantile(self, p):
    return (np.asarray(p, dtype=float) - 0.5) / self.delta

  def sample(self, rng, size=None):
    return rng.uniform(-self.half_width, self.half_width, size=size)


def tulap(eps: float) -> TulapCnd:
  return TulapCnd(eps)


# ---------------------------------------------------------------------------
# Rescaling
# ---------------------------------------------------------------------------

class ScaledCnd(Cnd):
  """Distribution of ``N / k``; a CND for ``f^{∘k}`` when ``N`` is one for ``f``."""
  kind = CndKind.SCALED

  def __init__(self, base: Cnd, factor: float,
               source_f: Optional[TradeoffFunction] = None):
    self.base = base
    self.factor = float(factor)
    if source_f is None:
      source_f = tradeoff.self_compose(base.source_f, int(factor))
    self.source_f = source_f

  @property
  def params(self) -> dict:
    return {"base": self.base.metadata(), "factor": self.factor}

  def sf(self, x):
    return self.base.sf(self.factor * np.asarray(x, dtype=float))

  def cdf(self, x):
    return self.base.cdf(self.factor * np.asarray(x, dtype=float))

  def pdf(self, x):
    return self.factor * self.base.pdf(self.factor * np.asarray(x, dtype=float))

  def log_pdf(self, x):
    return math.log(self.factor) + self.base.log_pdf(
        self.factor * np.asarray(x, dtype=float))

  def quantile(self, p):
    return self.base.quantile(p) / self.factor

  def sample(self, rng, size=None):
    return self.base.sample(rng, size) / self.factor


def scale_group(F: Cnd, k: int) -> Cnd:
  """CND for the ``k``-fold group tradeoff ``f^{∘k}``: the law of ``N / k``."""
  if k < 1 or int(k) != k:
    raise ValueError(f"k must be a positive integer, got {k}")
  if k == 1:
    return F
  if isinstance(F, GaussianCnd):
    return GaussianCnd(k * F.mu)
  if isinstance(F, LaplaceCnd):
    return LaplaceCnd(k * F.eps)
  if isinstance(F, UniformCnd) and k * F.delta <= 1:
    return UniformCnd(k * F.delta)
  return ScaledCnd(F, k)


# ---------------------------------------------------------------------------
# Tradeoff function of a CND
# ---------------------------------------------------------------------------

def from_cnd_cdf(F: Cnd) -> TradeoffFunction:
  """``a -> F(F^{-1}(a) - 1)``, the shift-by-one tradeoff of a CND."""

  def fn(a):
    return F.cdf(F.quantile(a) - 1.0)

  def inverse(b):
    return F.cdf(F.quantile(b) + 1.0)

  return TradeoffFunction(fn, tradeoff.Family(tradeoff.FamilyKind.FROM_CDF),
                          symmetric=True, inverse=inverse)
