"""Piecewise-linear tradeoff functions and the root-counting bound.

Composing piecewise-linear tradeoff functions only adds breakpoints:
the knots of ``f ∘ g`` are the knots of ``g`` together with the preimages
under ``g`` of the knots of ``f``. A function with ``k`` breakpoints that
is positive on (0, 1] therefore cannot be a ``(k+1)``-fold self-composition.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from typing import Optional

import numpy as np

from fdp_cnd import tradeoff

SLOPE_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class PiecewiseLinearTf:
  """Convex piecewise-linear tradeoff function stored as sorted knots."""
  xs: tuple[float, ...]
  ys: tuple[float, ...]

  def __post_init__(self):
    xs = np.asarray(self.xs)
    if len(xs) < 2 or xs[0] != 0.0 or xs[-1] != 1.0:
      raise ValueError("knots must start at 0 and end at 1")
    if np.any(np.diff(xs) <= 0):
      raise ValueError("knot abscissae must be strictly increasing")
    slopes = self.slopes
    if np.any(np.diff(slopes) < -SLOPE_TOL):
      raise ValueError("slopes must be non-decreasing (convexity)")
    if self.ys[-1] > 1.0 + 1e-12:
      raise ValueError("f(1) must be <= 1")

  @property
  def slopes(self) -> np.ndarray:
    return np.diff(self.ys) / np.diff(self.xs)

  @property
  def knots(self) -> list[tuple[float, float]]:
    return list(zip(self.xs, self.ys))

  def __call__(self, alpha):
    out = np.interp(alpha, self.xs, self.ys)
    return float(out) if np.ndim(out) == 0 else out

  def breakpoint_locations(self) -> list[float]:
    jumps = np.diff(self.slopes)
    return [self.xs[i + 1] for i in np.flatnonzero(jumps > SLOPE_TOL)]

  def simplified(self) -> PiecewiseLinearTf:
    """Drops interior knots where the slope does not change."""
    keep = [0]
    slopes = self.slopes
    for i in range(1, len(self.xs) - 1):
      if slopes[i] - slopes[i - 1] > SLOPE_TOL:
        keep.append(i)
    keep.append(len(self.xs) - 1)
    return PiecewiseLinearTf(tuple(self.xs[i] for i in keep),
                             tuple(self.ys[i] for i in keep))

  def preimage(self, y: float) -> Optional[float]:
    """Unique ``x`` with ``f(x) = y`` for ``y`` in (f(0), f(1)]."""
    xs, ys = np.asarray(self.xs), np.asarray(self.ys)
    if y <= ys[0] or y > ys[-1]:
      return None
    i = int(np.searchsorted(ys, y, side="left"))
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return float(x0 + (y - y0) * (x1 - x0) / (y1 - y0))

  def compose(self, inner: PiecewiseLinearTf) -> PiecewiseLinearTf:
    """Knot-exact ``self ∘ inner``."""
    cand = set(inner.xs)
    for b in self.xs[1:-1]:
      x = inner.preimage(b)
      if x is not None:
        cand.add(x)
    xs = np.array(sorted(cand))
    ys = self(inner(xs))
    return PiecewiseLinearTf(tuple(xs), tuple(np.asarray(ys))).simplified()

  def as_tradeoff(self) -> tradeoff.TradeoffFunction:
    return tradeoff.TradeoffFunction(
        lambda a: np.interp(a, self.xs, self.ys),
        tradeoff.Family(tradeoff.FamilyKind.COMPOSITE), symmetric=False)

  def to_dict(self) -> dict:
    return {"family_tag": "piecewise_linear",
            "knots": [[float(x), float(y)] for x, y in self.knots]}

  @classmethod
  def from_dict(cls, data: dict) -> PiecewiseLinearTf:
    xs, ys = zip(*data["knots"])
    return cls(tuple(xs), tuple(ys))

  @classmethod
  def from_lines(cls, lines: list[tuple[float, float]]) -> PiecewiseLinearTf:
    """Upper envelope on [0, 1] of lines ``a*x + b`` (plus the zero line)."""
    lines = list(lines) + [(0.0, 0.0)]
    cand = {0.0, 1.0}
    for i, (a1, b1) in enumerate(lines):
      for a2, b2 in lines[i + 1:]:
        if a1 != a2:
          x = (b2 - b1) / (a1 - a2)
          if 0.0 < x < 1.0:
            cand.add(x)
    xs = np.array(sorted(cand))
    ys = np.max([a * xs + b for a, b in lines], axis=0)
    return cls(tuple(xs), tuple(ys)).simplified()


def eps_delta_pl(eps: float, delta: float) -> PiecewiseLinearTf:
  """Knot representation of ``f_{eps,delta}``."""
  e = math.exp(eps)
  return PiecewiseLinearTf.from_lines([(e, 1.0 - delta - e), (1.0 / e, -delta / e)])


def breakpoints(f: PiecewiseLinearTf) -> int:
  """Number of interior knots where the slope strictly increases."""
  return len(f.breakpoint_locations())


class RootDecision(enum.Enum):
  IMPOSSIBLE = "impossible"
  UNKNOWN = "unknown"


@dataclasses.dataclass(frozen=True)
class RootVerdict:
  decision: RootDecision
  reason: str
  n_breakpoints: int


def decide_nth_root_exists(f: PiecewiseLinearTf, n: int) -> RootVerdict:
  """Decides whether some tradeoff ``g`` could satisfy ``g^{∘n} = f``.

  Only the impossibility direction is available: with ``k >= 1``
  breakpoints and ``f(x) = 0`` only at ``x = 0``, no ``n >= k + 1`` works.
  Every other case is reported as unknown, never as possible.
  """
  if n < 1:
    raise ValueError("n must be a positive integer")
  k = breakpoints(f)
  xs, ys = np.asarray(f.xs), np.asarray(f.ys)
  if np.allclose(ys, xs, atol=1e-12):
    return RootVerdict(RootDecision.UNKNOWN, "f is trivial (identity)", k)
  if np.any((xs > 0) & (ys <= 0)):
    return RootVerdict(RootDecision.UNKNOWN,
                       "hypothesis f(x)=0 => x=0 violated", k)
  if k < 1:
    return RootVerdict(RootDecision.UNKNOWN, "no breakpoints", k)
  if n >= k + 1:
    return RootVerdict(RootDecision.IMPOSSIBLE,
                       f"n={n} >= k+1={k + 1} for k={k} breakpoints", k)
  return RootVerdict(RootDecision.UNKNOWN,
                     f"n={n} <= k={k}: no decision procedure", k)
