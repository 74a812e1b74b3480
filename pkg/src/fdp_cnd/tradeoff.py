"""Tradeoff functions and their algebra.

A tradeoff function maps a specificity ``alpha`` (one minus the type I error)
to the smallest achievable type II error. Valid tradeoff functions are convex,
continuous, non-decreasing and lie below the identity.

Closed-form families carry a :class:`Family` tag so that composition and
tensor products can be folded analytically where an identity is known.
"""

from __future__ import annotations

import dataclasses
import enum
import json
import math
from typing import Callable, Optional

import numpy as np
from scipy import optimize, special

ArrayFn = Callable[[np.ndarray], np.ndarray]

GRID_POINTS = 1001
N_RANDOM_POINTS = 100


class InvalidTradeoffError(ValueError):
  """Raised when a function fails the tradeoff-function checks."""


class FamilyKind(enum.Enum):
  EPS_DELTA = "eps_delta"
  GDP = "gdp"
  LAPLACE = "laplace"
  FROM_CDF = "from_cdf"
  COMPOSITE = "composite"


@dataclasses.dataclass(frozen=True)
class Family:
  """Closed-form family tag with its parameters."""
  kind: FamilyKind
  params: tuple[tuple[str, float], ...] = ()

  def param(self, name: str) -> float:
    return dict(self.params)[name]

  @property
  def is_closed_form(self) -> bool:
    return self.kind in (FamilyKind.EPS_DELTA, FamilyKind.GDP,
                         FamilyKind.LAPLACE)

  @property
  def is_identity(self) -> bool:
    if self.kind is FamilyKind.EPS_DELTA:
      return self.param("eps") == 0 and self.param("delta") == 0
    if self.kind in (FamilyKind.GDP,):
      return self.param("mu") == 0
    return False


@dataclasses.dataclass(frozen=True, eq=False)
class TradeoffFunction:
  """An evaluable tradeoff function on [0, 1].

  Attributes:
    fn: vectorised map from specificities to type II errors.
    family: optional closed-form tag.
    symmetric: whether ``T(P, Q) = T(Q, P)`` for the underlying pair.
    inverse: optional vectorised inverse on ``(0, 1]``; used to invert CND
      recursions without bisection.
  """
  fn: ArrayFn
  family: Optional[Family] = None
  symmetric: bool = True
  inverse: Optional[ArrayFn] = None

  def __call__(self, alpha):
    a = np.asarray(alpha, dtype=float)
    out = np.clip(self.fn(np.clip(a, 0.0, 1.0)), 0.0, 1.0)
    if out.ndim == 0:
      return float(out)
    return out

  def inv(self, beta):
    """Smallest alpha with ``f(alpha) >= beta`` for beta in (0, 1]."""
    b = np.asarray(beta, dtype=float)
    if self.inverse is not None:
      out = np.clip(self.inverse(np.clip(b, 0.0, 1.0)), 0.0, 1.0)
    else:
      out = _bisect_inverse(self, b)
    if out.ndim == 0:
      return float(out)
    return out

  def __repr__(self):
    if self.family is None:
      return "TradeoffFunction(<untagged>)"
    params = ", ".join(f"{k}={v:g}" for k, v in self.family.params)
    return f"TradeoffFunction({self.family.kind.value}: {params})"

  def grid(self, n: int = GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
    alphas = np.linspace(0.0, 1.0, n)
    return alphas, self(alphas)

  def to_json(self) -> str:
    if self.family is None or not self.family.is_closed_form:
      raise ValueError(f"{self!r} has no closed form to serialise")
    return json.dumps({"family_tag": self.family.kind.value,
                       "params": dict(self.family.params)}, sort_keys=True)


def _bisect_inverse(f: TradeoffFunction, beta: np.ndarray,
                    steps: int = 64) -> np.ndarray:
  lo = np.zeros_like(beta)
  hi = np.ones_like(beta)
  for _ in range(steps):
    mid = 0.5 * (lo + hi)
    below = f(mid) < beta
    lo = np.where(below, mid, lo)
    hi = np.where(below, hi, mid)
  return hi


def _tag(kind: FamilyKind, **params) -> Family:
  return Family(kind, tuple(sorted((k, float(v)) for k, v in params.items())))


def make_eps_delta(eps: float, delta: float) -> TradeoffFunction:
  """``f_{eps,delta}(a) = max(0, 1 - delta - e^eps + e^eps a, e^-eps (a - delta))``."""
  if not eps >= 0:
    raise ValueError(f"eps must be >= 0, got {eps}")
  if not 0 <= delta <= 1:
    raise ValueError(f"delta must lie in [0, 1], got {delta}")
  e = math.exp(eps)

  def fn(a):
    return np.maximum(0.0, np.maximum(1.0 - delta - e + e * a,
                                      (a - delta) / e))

  def inverse(b):
    # Both branches are increasing; the max is inverted by the min of inverses.
    return np.minimum((b - 1.0 + delta + e) / e, e * b + delta)

  return TradeoffFunction(fn, _tag(FamilyKind.EPS_DELTA, eps=eps, delta=delta),
                          inverse=inverse)


def identity() -> TradeoffFunction:
  return make_eps_delta(0.0, 0.0)


def make_gdp(mu: float) -> TradeoffFunction:
  """Gaussian tradeoff ``G_mu(a) = Phi(Phi^-1(a) - mu)``."""
  if not mu >= 0:
    raise ValueError(f"mu must be >= 0, got {mu}")

  def fn(a):
    return special.ndtr(special.ndtri(a) - mu)

  def inverse(b):
    return special.ndtr(special.ndtri(b) + mu)

  return TradeoffFunction(fn, _tag(FamilyKind.GDP, mu=mu), inverse=inverse)


def laplace_cdf(x, scale: float = 1.0):
  x = np.asarray(x, dtype=float) / scale
  return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0)),
                  1.0 - 0.5 * np.exp(-np.maximum(x, 0.0)))


def laplace_quantile(p, scale: float = 1.0):
  p = np.asarray(p, dtype=float)
  with np.errstate(divide="ignore"):
    lower = np.log(2.0 * np.minimum(p, 0.5))
    upper = -np.log(2.0 * (1.0 - np.maximum(p, 0.5)))
  return scale * np.where(p < 0.5, lower, upper)


def make_laplace_tf(eps: float) -> TradeoffFunction:
  """Laplace tradeoff ``L_eps = T(N, N + eps)`` for ``N ~ Laplace(0, 1)``."""
  if not eps > 0:
    raise ValueError(f"eps must be > 0, got {eps}")
  scale = 1.0 / eps

  def fn(a):
    return laplace_cdf(laplace_quantile(a, scale) - 1.0, scale)

  def inverse(b):
    return laplace_cdf(laplace_quantile(b, scale) + 1.0, scale)

  return TradeoffFunction(fn, _tag(FamilyKind.LAPLACE, eps=eps),
                          inverse=inverse)


def from_json(text: str) -> TradeoffFunction:
  data = json.loads(text)
  tag = data["family_tag"]
  params = data.get("params", {})
  if tag == "eps_delta":
    return make_eps_delta(params["eps"], params["delta"])
  if tag == "gdp":
    return make_gdp(params["mu"])
  if tag == "laplace":
    return make_laplace_tf(params["eps"])
  if tag == "piecewise_linear":
    from fdp_cnd.piecewise import PiecewiseLinearTf
    return PiecewiseLinearTf.from_dict(data).as_tradeoff()
  raise ValueError(f"unknown family tag {tag!r}")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def check_tradeoff(f: TradeoffFunction, n_grid: int = GRID_POINTS,
                   n_random: int = N_RANDOM_POINTS, tol: float = 1e-10,
                   seed: int = 0) -> list[str]:
  """Returns a list of violated tradeoff-function properties (empty if valid)."""
  rng = np.random.default_rng(seed)
  alphas = np.sort(np.concatenate([np.linspace(0.0, 1.0, n_grid),
                                   rng.uniform(size=n_random)]))
  vals = f(alphas)
  problems = []
  if not np.all(np.isfinite(vals)):
    problems.append("non-finite values")
    return problems
  if np.any(vals > alphas + max(tol, 1e-12)):
    worst = float(np.max(vals - alphas))
    problems.append(f"f(a) > a by {worst:.3g}")
  if np.any(np.diff(vals) < -tol):
    problems.append("not non-decreasing")
  lam = rng.uniform(size=n_random)
  a = rng.uniform(size=n_random)
  b = rng.uniform(size=n_random)
  lhs = f(lam * a + (1 - lam) * b)
  rhs = lam * f(a) + (1 - lam) * f(b)
  if np.any(lhs > rhs + tol):
    problems.append(f"not convex (excess {float(np.max(lhs - rhs)):.3g})")
  # A convex function below the identity can only jump at a = 1.
  h = 1.0 / (n_grid - 1)
  last = float(f(1.0) - f(1.0 - h))
  prev = float(f(1.0 - h) - f(1.0 - 2 * h))
  if last > max(10 * prev, 10 * h):
    problems.append("discontinuous at a = 1")
  if f.symmetric:
    grid = np.linspace(0.0, 1.0, n_grid)
    fa = f(grid)
    mask = fa > 0
    back = 1.0 - f(1.0 - fa[mask])
    if np.any(np.abs(back - grid[mask]) > 1e-8):
      problems.append("symmetry involution a -> 1 - f(1 - f(a)) fails")
  return problems


def validate(f: TradeoffFunction, **kwargs) -> TradeoffFunction:
  problems = check_tradeoff(f, **kwargs)
  if problems:
    raise InvalidTradeoffError(f"{f!r}: " + "; ".join(problems))
  return f


def is_nontrivial(f: TradeoffFunction, n_grid: int = GRID_POINTS) -> bool:
  alphas, vals = f.grid(n_grid)
  return bool(np.any(vals < alphas - 1e-12))


# ---------------------------------------------------------------------------
# Functional composition (group privacy)
# ---------------------------------------------------------------------------

def _compose_tags(outer: Optional[Family],
                  inner: Optional[Family]) -> Optional[Family]:
  if outer is None or inner is None:
    return None
  if outer.is_identity:
    return inner
  if inner.is_identity:
    return outer
  if outer.kind is inner.kind is FamilyKind.GDP:
    return _tag(FamilyKind.GDP, mu=outer.param("mu") + inner.param("mu"))
  if outer.kind is inner.kind is FamilyKind.LAPLACE:
    return _tag(FamilyKind.LAPLACE, eps=outer.param("eps") + inner.param("eps"))
  if (outer.kind is inner.kind is FamilyKind.EPS_DELTA
      and outer.param("eps") == 0 and inner.param("eps") == 0):
    return _tag(FamilyKind.EPS_DELTA, eps=0.0,
                delta=min(1.0, outer.param("delta") + inner.param("delta")))
  return None


def _from_tag(tag: Family) -> TradeoffFunction:
  if tag.kind is FamilyKind.EPS_DELTA:
    return make_eps_delta(tag.param("eps"), tag.param("delta"))
  if tag.kind is FamilyKind.GDP:
    return make_gdp(tag.param("mu"))
  if tag.kind is FamilyKind.LAPLACE:
    return make_laplace_tf(tag.param("eps"))
  raise ValueError(f"no closed form for {tag}")


def compose(f: TradeoffFunction, g: TradeoffFunction,
            check: bool = True,
            symmetric: Optional[bool] = None) -> TradeoffFunction:
  """Returns ``a -> f(g(a))``.

  Known monoid identities (GDP, Laplace-DP and (0, delta)-DP) are folded to
  the closed form; everything else evaluates the composition pointwise.

  The reflection of ``f ∘ g`` is ``g ∘ f``, so the composition of symmetric
  functions is symmetric only when they commute. By default that is assumed
  only for ``f is g``; pass ``symmetric`` to override.
  """
  tag = _compose_tags(f.family, g.family)
  if tag is not None:
    return _from_tag(tag)

  def fn(a):
    return f(g(a))

  inverse = None
  if f.inverse is not None and g.inverse is not None:
    def inverse(b):
      return g.inv(f.inv(b))

  if symmetric is None:
    symmetric = f is g and f.symmetric
  out = TradeoffFunction(fn, Family(FamilyKind.COMPOSITE),
                         symmetric=symmetric, inverse=inverse)
  return validate(out) if check else out


def self_compose(f: TradeoffFunction, k: int) -> TradeoffFunction:
  if k < 1 or int(k) != k:
    raise ValueError(f"k must be a positive integer, got {k}")
  out = f
  for _ in range(int(k) - 1):
    # Powers of f commute with f.
    out = compose(out, f, check=False, symmetric=f.symmetric)
  return validate(out) if k > 1 else out


def fixed_point_c(f: TradeoffFunction, max_steps: int = 200,
                  tol: float = 1e-12) -> float:
  """Solves ``f(1 - c) = c`` for ``c`` in [0, 1/2].

  ``c -> f(1 - c) - c`` is strictly decreasing, so the root is unique.
  """
  gap = lambda c: float(f(1.0 - c)) - c
  if gap(0.5) >= 0:
    return 0.5
  if gap(0.0) <= 0:
    return 0.0
  c = optimize.brentq(gap, 0.0, 0.5, xtol=1e-16, maxiter=max_steps)
  if abs(gap(c)) > tol:
    raise ArithmeticError(
        f"root finding for f(1-c)=c did not converge (residual "
        f"{abs(gap(c)):.3g}); f is probably malformed")
  return c


# ---------------------------------------------------------------------------
# Tensor product (mechanism composition), closed forms only
# ---------------------------------------------------------------------------

class Unsupported:
  """Marker returned when no closed-form tensor identity applies."""

  def __repr__(self):
    return "Unsupported"

  def __bool__(self):
    return False


UNSUPPORTED = Unsupported()


def _tensor_tags(a: Family, b: Family) -> Optional[Family]:
  if a.is_identity and b.is_closed_form:
    return b
  if b.is_identity and a.is_closed_form:
    return a
  if a.kind is b.kind is FamilyKind.GDP:
    return _tag(FamilyKind.GDP, mu=math.hypot(a.param("mu"), b.param("mu")))
  if a.kind is b.kind is FamilyKind.EPS_DELTA:
    ea, da = a.param("eps"), a.param("delta")
    eb, db = b.param("eps"), b.param("delta")
    if ea == 0 and eb == 0:
      return _tag(FamilyKind.EPS_DELTA, eps=0.0,
                  delta=1.0 - (1.0 - da) * (1.0 - db))
    if da == 0 and eb == 0:
      return _tag(FamilyKind.EPS_DELTA, eps=ea, delta=db)
    if db == 0 and ea == 0:
      return _tag(FamilyKind.EPS_DELTA, eps=eb, delta=da)
  return None


def tensor_closed_form(f: TradeoffFunction, g: TradeoffFunction):
  """Closed-form ``f ⊗ g`` when a known identity applies, else ``UNSUPPORTED``."""
  if f.family is None or g.family is None:
    return UNSUPPORTED
  tag = _tensor_tags(f.family, g.family)
  return UNSUPPORTED if tag is None else _from_tag(tag)


def _same_kind(f: TradeoffFunction, g: TradeoffFunction) -> bool:
  a, b = f.family, g.family
  if a.kind is not b.kind:
    return False
  if a.kind is FamilyKind.EPS_DELTA:
    return a.param("eps") == 0 and b.param("eps") == 0
  return True


def tensor_fold(fs: list[TradeoffFunction]):
  """Folds a list by closed-form tensor identities.

  Pairs within one family (GDP with GDP, (0, delta) with (0, delta)) are
  merged before mixed pairs, so ``f_{eps,0}`` with several ``f_{0,delta_i}``
  folds regardless of the order given.
  """
  pending = list(fs)
  if not pending:
    raise ValueError("empty list")
  while len(pending) > 1:
    pairs = [(i, j) for i in range(len(pending))
             for j in range(i + 1, len(pending))]
    pairs.sort(key=lambda ij: not (
        pending[ij[0]].family is not None and pending[ij[1]].family
        is not None and _same_kind(pending[ij[0]], pending[ij[1]])))
    for i, j in pairs:
      out = tensor_closed_form(pending[i], pending[j])
      if out is not UNSUPPORTED:
        pending = [p for k, p in enumerate(pending) if k not in (i, j)]
        pending.append(out)
        break
    else:
      return UNSUPPORTED
  return pending[0]


# ---------------------------------------------------------------------------
# Infinitely divisible families
# ---------------------------------------------------------------------------

class FamilyLabel(enum.Enum):
  GDP = "gdp"
  LAPLACE = "laplace"
  ZERO_DELTA = "zero_delta"
  POINT_MASS = "point_mass"


@dataclasses.dataclass(frozen=True)
class DivisibleFamily:
  """A composition monoid ``t -> f_t`` with ``f_s ∘ f_t = f_{s+t}``."""
  label: FamilyLabel
  param: float

  def at(self, t: float) -> TradeoffFunction:
    if t < 0:
      raise ValueError("t must be >= 0")
    if self.label is FamilyLabel.GDP:
      return make_gdp(t * self.param)
    if self.label is FamilyLabel.LAPLACE:
      if t == 0:
        return identity()
      return make_laplace_tf(t * self.param)
    if self.label is FamilyLabel.ZERO_DELTA:
      return make_eps_delta(0.0, min(1.0, t * self.param))
    if t == 0:
      return identity()
    return point_mass_tradeoff()


def gdp_family(mu: float) -> DivisibleFamily:
  return DivisibleFamily(FamilyLabel.GDP, mu)


def laplace_family(eps: float) -> DivisibleFamily:
  return DivisibleFamily(FamilyLabel.LAPLACE, eps)


def zero_delta_family(delta: float) -> DivisibleFamily:
  return DivisibleFamily(FamilyLabel.ZERO_DELTA, delta)


def point_mass_family() -> DivisibleFamily:
  """``f_s(a) = 1{a = 1}`` for s > 0: a monoid that never tends to Id."""
  return DivisibleFamily(FamilyLabel.POINT_MASS, 1.0)


def point_mass_tradeoff() -> TradeoffFunction:
  def fn(a):
    return np.where(a >= 1.0, 1.0, 0.0)
  return TradeoffFunction(fn, Family(FamilyKind.COMPOSITE), symmetric=True)
