"""Tensor products of CND tradeoff functions via privacy-loss distributions.

For independent coordinates the log-likelihood ratio of the product is the sum
of the per-coordinate ratios, so the tradeoff of ``(N1, N2)`` against
``(N1 + 1, N2 + 1)`` follows from convolving the per-coordinate loss
distributions under both hypotheses and sweeping a threshold.

Losses are rounded to a common grid of spacing ``h``. If every loss moves by
at most ``r`` in total, the rounded test is exactly optimal for a measure
within a factor ``e^{±r}`` of the alternative, which gives
``T <= T_disc <= T + (1 - e^{-2r}) T_disc``.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Union

import numpy as np
from scipy import signal

from fdp_cnd import cnd as cnd_lib
from fdp_cnd import tradeoff
from fdp_cnd.verify import EmpiricalTradeoff, alpha_grid

TAIL_MASS = 1e-15
X_CELLS = 200_000
MAX_REFINE_DEPTH = 40
MAX_ERROR_BOUND = 0.05


class CoarseGridError(ValueError):
  """The discretisation error bound exceeds ``MAX_ERROR_BOUND``."""


@dataclasses.dataclass(frozen=True, eq=False)
class PlrvDistribution:
  """Loss ``log q/p`` on the grid ``h * (offset + arange(len(p_mass)))``.

  Attributes:
    h: grid spacing.
    offset: integer index of the first grid point.
    p_mass, q_mass: masses under the null and the alternative.
    p_neg_inf: null mass at loss ``-inf`` (alternative impossible).
    q_pos_inf: alternative mass at ``+inf`` (null impossible).
    rounding: largest total displacement of any loss by the rounding.
    lost_mass: truncated probability, summed over both hypotheses.
  """
  h: float
  offset: int
  p_mass: np.ndarray
  q_mass: np.ndarray
  p_neg_inf: float = 0.0
  q_pos_inf: float = 0.0
  rounding: float = 0.0
  lost_mass: float = 0.0

  @classmethod
  def identity(cls, h: float) -> PlrvDistribution:
    return cls(h, 0, np.array([1.0]), np.array([1.0]))

  def convolve(self, other: PlrvDistribution) -> PlrvDistribution:
    if not math.isclose(self.h, other.h, rel_tol=1e-12):
      raise ValueError("grid spacings differ")
    p = np.clip(signal.convolve(self.p_mass, other.p_mass, method="direct"),
                0.0, None)
    q = np.clip(signal.convolve(self.q_mass, other.q_mass, method="direct"),
                0.0, None)
    p_fin = (1.0 - self.p_neg_inf) * (1.0 - other.p_neg_inf)
    q_fin = (1.0 - self.q_pos_inf) * (1.0 - other.q_pos_inf)
    return PlrvDistribution(
        self.h, self.offset + other.offset, p, q,
        p_neg_inf=1.0 - p_fin, q_pos_inf=1.0 - q_fin,
        rounding=self.rounding + other.rounding,
        lost_mass=self.lost_mass + other.lost_mass)

  def tradeoff_points(self):
    """Vertices ``(alpha, beta)`` of the threshold-sweep curve."""
    p = np.concatenate([[self.p_neg_inf], self.p_mass, [0.0]])
    q = np.concatenate([[0.0], self.q_mass, [self.q_pos_inf]])
    x = np.concatenate([[0.0], np.cumsum(p)])
    y = np.concatenate([[0.0], np.cumsum(q)])
    x = np.minimum(x / x[-1], 1.0)
    y = np.minimum(y / y[-1], 1.0)
    return x, y


def _loss(F: cnd_lib.Cnd, z):
  with np.errstate(invalid="ignore"):
    return F.log_pdf(z - 1.0) - F.log_pdf(z)


def _x_range(F: cnd_lib.Cnd) -> tuple[float, float]:
  lo = float(F.quantile(TAIL_MASS))
  hi = float(F.quantile(1.0 - TAIL_MASS)) + 1.0
  return lo, hi


def _cell_losses(F: cnd_lib.Cnd, left: np.ndarray, right: np.ndarray):
  """Loss at the centre of each cell and its spread across the cell."""
  width = right - left
  inset = np.minimum(1e-12 * np.maximum(1.0, np.abs(left)), 0.25 * width)
  centre = _loss(F, 0.5 * (left + right))
  a = _loss(F, left + inset)
  b = _loss(F, right - inset)
  with np.errstate(invalid="ignore"):
    spread = np.maximum(np.abs(a - centre), np.abs(b - centre))
  same_inf = np.isinf(centre) & (a == centre) & (b == centre)
  spread = np.where(same_inf, 0.0, spread)
  return centre, spread


def _masses(F: cnd_lib.Cnd, left: np.ndarray, right: np.ndarray):
  p = F.cdf(right) - F.cdf(left)
  q = F.cdf(right - 1.0) - F.cdf(left - 1.0)
  return np.clip(p, 0.0, None), np.clip(q, 0.0, None)


def plrv_cells(F: cnd_lib.Cnd, h: float):
  """Cells of the line with nearly constant loss, and their masses.

  Cells whose loss varies by more than ``h`` (jumps of a piecewise density,
  support edges) are split 16-fold until they do not, or until they are
  narrower than 1e-12; cells still unresolved then get an infinite spread.

  Returns:
    ``(loss, spread, p_mass, q_mass)`` arrays over the accepted cells.
  """
  lo, hi = _x_range(F)
  edges = np.linspace(lo, hi, X_CELLS + 1)
  left, right = edges[:-1], edges[1:]
  parts = []
  for depth in range(MAX_REFINE_DEPTH + 1):
    centre, spread = _cell_losses(F, left, right)
    p, q = _masses(F, left, right)
    weight = (p > 0) | (q > 0)
    good = weight & (spread <= h)
    parts.append((centre[good], spread[good], p[good], q[good]))
    bad = weight & ~good
    if not bad.any():
      break
    if depth == MAX_REFINE_DEPTH or np.all(right[bad] - left[bad] < 1e-12):
      parts.append((centre[bad], np.full(int(bad.sum()), np.inf), p[bad],
                    q[bad]))
      break
    frac = np.linspace(0.0, 1.0, 17)
    sub = left[bad][:, None] + (right[bad] - left[bad])[:, None] * frac
    left, right = sub[:, :-1].ravel(), sub[:, 1:].ravel()
  return tuple(np.concatenate(cols) for cols in zip(*parts))


def max_abs_loss(F: cnd_lib.Cnd) -> float:
  lo, hi = _x_range(F)
  z = np.linspace(lo, hi, X_CELLS + 1)
  loss = _loss(F, z)
  finite = np.isfinite(loss)
  return float(np.max(np.abs(loss[finite]))) if finite.any() else 0.0


def plrv_of_cnd(F: cnd_lib.Cnd, h: float) -> PlrvDistribution:
  """Discretised loss distribution of ``(F, F + 1)`` on spacing ``h``."""
  loss, spread, p, q = plrv_cells(F, h)
  unresolved = ~np.isfinite(spread)
  neg = np.isneginf(loss)
  pos = np.isposinf(loss)
  fin = np.isfinite(loss)
  k = np.rint(loss[fin] / h).astype(np.int64)
  shift = np.abs(loss[fin] - k * h) + spread[fin]
  ok = ~unresolved[fin]
  rounding = float(np.max(shift[ok])) if ok.any() else 0.0
  kmin = int(k.min()) if k.size else 0
  kmax = int(k.max()) if k.size else 0
  size = kmax - kmin + 1
  p_mass = np.bincount(k - kmin, weights=p[fin], minlength=size)
  q_mass = np.bincount(k - kmin, weights=q[fin], minlength=size)
  p_total = p.sum()
  q_total = q.sum()
  lost = 4 * TAIL_MASS + float(p[unresolved].sum() + q[unresolved].sum())
  return PlrvDistribution(
      h, kmin, p_mass / p_total, q_mass / q_total,
      p_neg_inf=float(p[neg].sum() / p_total),
      q_pos_inf=float(q[pos].sum() / q_total),
      rounding=rounding, lost_mass=lost)


Coordinate = Union[cnd_lib.Cnd, tradeoff.TradeoffFunction]


def _is_identity(item) -> bool:
  return (isinstance(item, tradeoff.TradeoffFunction)
          and item.family is not None and item.family.is_identity)


def tensor_via_pld_many(items, grid_size: int = 10_000,
                        grid=None) -> EmpiricalTradeoff:
  """Tradeoff function of the product of several CND coordinates.

  Args:
    items: CNDs, or identity tradeoff functions for perfectly private
      coordinates.
    grid_size: number of points of the loss grid.
    grid: alpha grid of the returned curve (1001 points by default).
  """
  if grid_size < 1000:
    raise ValueError("grid_size must be >= 1e3")
  cnds = []
  for item in items:
    if isinstance(item, cnd_lib.Cnd):
      cnds.append(item)
    elif not _is_identity(item):
      raise TypeError(f"{item!r} is neither a Cnd nor the identity")
  grid = alpha_grid(1001) if grid is None else np.asarray(grid, float)
  l_max = max([max_abs_loss(F) for F in cnds], default=0.0)
  h = 2.0 * l_max / (grid_size - 7) if l_max > 0 else 1.0
  total = PlrvDistribution.identity(h)
  for F in cnds:
    total = total.convolve(plrv_of_cnd(F, h))
  xs, ys = total.tradeoff_points()
  xs, first = np.unique(xs, return_index=True)
  betas = np.interp(grid, xs, ys[first])
  band = -math.expm1(-2.0 * total.rounding) + total.lost_mass
  if band > MAX_ERROR_BOUND:
    raise CoarseGridError(
        f"discretisation bound {band:.3g} exceeds {MAX_ERROR_BOUND}")
  return EmpiricalTradeoff(grid, betas, betas.copy(), band, 0, None,
                           horizontal=False)


def tensor_via_pld(f: Coordinate, g: Coordinate,
                   grid_size: int = 10_000, grid=None) -> EmpiricalTradeoff:
  """``f ⊗ g`` for CND-backed tradeoff functions, with an error bound.

  The true tensor product lies below the returned curve by at most
  ``band``.
  """
  return tensor_via_pld_many([f, g], grid_size, grid)
