"""Log-concave CNDs as limits of rescaled constructed CNDs.

For an infinitely divisible family ``f_t`` the constructed CND ``F_s`` for
``f_s``, read at ``t / s``, is an exact CND for ``f_1`` at every scale and
converges to the unique log-concave CND as ``s -> 0``. The sup-norm error of
the candidate is bounded by ``sup_a |a - f_s(a)|``, which is what we iterate
on.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from fdp_cnd import cnd
from fdp_cnd.tradeoff import DivisibleFamily, TradeoffFunction

GAP_GRID_POINTS = 2001
MAX_LEVEL = 40
PATIENCE = 5


class NonConvergenceError(ArithmeticError):
  """The sup gap stopped shrinking: the family is not a valid divisible family."""

  def __init__(self, message, diagnostics):
    super().__init__(message)
    self.diagnostics = diagnostics


@dataclasses.dataclass(frozen=True)
class LimitDiagnostics:
  scales_used: tuple[float, ...]
  sup_gap: tuple[float, ...]
  converged: bool
  error_bound: float

  def to_dict(self) -> dict:
    return dataclasses.asdict(self)

  def to_json(self) -> str:
    return json.dumps(self.to_dict(), sort_keys=True)


class LimitCnd(cnd.ScaledCnd):
  """``t -> F_s(t / s)`` for the constructed CND ``F_s`` of ``f_s``."""
  kind = cnd.CndKind.LIMIT

  def __init__(self, family: DivisibleFamily, scale: float):
    self.family = family
    self.scale = scale
    super().__init__(cnd.construct_cnd(family.at(scale)), 1.0 / scale,
                     source_f=family.at(1.0))

  @property
  def params(self) -> dict:
    return {"family": self.family.label.value, "param": self.family.param,
            "scale": self.scale}


def sup_gap(f: TradeoffFunction, n: int = GAP_GRID_POINTS) -> float:
  alphas = np.linspace(0.0, 1.0, n)
  return float(np.max(alphas - f(alphas)))


def logconcave_limit(family: DivisibleFamily, target_gap: float,
                     max_level: int = MAX_LEVEL):
  """Iterates dyadic scales until the sup gap drops below ``target_gap``.

  Returns:
    ``(LimitCnd, LimitDiagnostics)``. The candidate cdf is within
    ``diagnostics.error_bound`` of the log-concave CND everywhere.

  Raises:
    NonConvergenceError: the gap failed to decrease over ``PATIENCE``
      consecutive scales, or ``max_level`` was exceeded.
  """
  if not 0 < target_gap <= 0.1:
    raise ValueError(f"target_gap must lie in (0, 0.1], got {target_gap}")
  scales, gaps = [], []
  for level in range(max_level + 1):
    s = 2.0 ** -level
    f_s = family.at(s)
    cnd.construct_cnd(f_s)
    scales.append(s)
    gaps.append(sup_gap(f_s))
    if gaps[-1] <= target_gap:
      diag = LimitDiagnostics(tuple(scales), tuple(gaps), True, gaps[-1])
      return LimitCnd(family, s), diag
    recent = gaps[-PATIENCE - 1:]
    if len(recent) == PATIENCE + 1 and all(
        b >= a for a, b in zip(recent, recent[1:])):
      diag = LimitDiagnostics(tuple(scales), tuple(gaps), False, gaps[-1])
      raise NonConvergenceError(
          f"sup gap stuck at {gaps[-1]:.4g} over {PATIENCE} scales; "
          f"{family.label.value} is not a valid divisible family", diag)
  diag = LimitDiagnostics(tuple(scales), tuple(gaps), False, gaps[-1])
  raise NonConvergenceError(f"no convergence by level {max_level}", diag)


def log_concavity_excess(F: cnd.Cnd, t: np.ndarray,
                         min_density: float = 1e-3) -> float:
  """Largest positive second difference of ``log pdf`` over the grid.

  Only interior points whose three neighbours all have density above
  ``min_density`` are used.
  """
  dens = F.pdf(t)
  ok = (dens[2:] > min_density) & (dens[1:-1] > min_density) & (
      dens[:-2] > min_density)
  with np.errstate(divide="ignore", invalid="ignore"):
    logp = np.log(dens)
    second = logp[2:] - 2 * logp[1:-1] + logp[:-2]
  if not ok.any():
    return 0.0
  return float(max(0.0, np.max(second[ok])))
