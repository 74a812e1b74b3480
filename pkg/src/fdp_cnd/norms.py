"""Sensitivity norms on R^d, vectorised over the last axis."""

from __future__ import annotations

import dataclasses
import enum
from typing import Callable, Optional

import numpy as np


class NormKind(enum.Enum):
  L1 = "l1"
  L2 = "l2"
  LINF = "linf"
  ELLIPTICAL = "elliptical"
  CUSTOM = "custom"


POLYTOPE_KINDS = (NormKind.L1, NormKind.LINF)


@dataclasses.dataclass(frozen=True, eq=False)
class NormSpec:
  """A norm together with the dimension it acts on.

  Attributes:
    kind: which norm.
    dim: dimension of the space.
    matrix: positive-definite ``A`` of the elliptical norm ``sqrt(x' A x)``.
    func: callable for custom norms; must accept an ``(..., dim)`` array.
  """
  kind: NormKind
  dim: int
  matrix: Optional[np.ndarray] = None
  func: Optional[Callable[[np.ndarray], np.ndarray]] = None

  def __post_init__(self):
    if self.dim < 1:
      raise ValueError("dim must be positive")
    if self.kind is NormKind.ELLIPTICAL:
      a = np.asarray(self.matrix, dtype=float)
      if a.shape != (self.dim, self.dim) or not np.allclose(a, a.T):
        raise ValueError("elliptical norm needs a symmetric dim x dim matrix")
      np.linalg.cholesky(a)  # raises LinAlgError unless positive definite
      object.__setattr__(self, "matrix", a)
    if self.kind is NormKind.CUSTOM and self.func is None:
      raise ValueError("custom norm needs func")

  def __call__(self, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if self.kind is NormKind.L1:
      out = np.sum(np.abs(x), axis=-1)
    elif self.kind is NormKind.L2:
      out = np.linalg.norm(x, axis=-1)
    elif self.kind is NormKind.LINF:
      out = np.max(np.abs(x), axis=-1)
    elif self.kind is NormKind.ELLIPTICAL:
      out = np.sqrt(np.einsum("...i,ij,...j->...", x, self.matrix, x))
    else:
      out = np.asarray(self.func(x), dtype=float)
    return float(out) if np.ndim(out) == 0 else out

  @property
  def is_polytope(self) -> bool:
    return self.kind in POLYTOPE_KINDS

  def to_boundary(self, u: np.ndarray) -> np.ndarray:
    """Rescales non-zero rows of ``u`` onto the unit sphere of the norm."""
    u = np.asarray(u, dtype=float)
    n = np.asarray(self(u))
    return u / np.where(n > 0, n, 1.0)[..., None]

  def to_dict(self) -> dict:
    out = {"kind": self.kind.value, "dim": self.dim}
    if self.matrix is not None:
      out["matrix"] = self.matrix.tolist()
    return out


def l1(dim: int) -> NormSpec:
  return NormSpec(NormKind.L1, dim)


def l2(dim: int) -> NormSpec:
  return NormSpec(NormKind.L2, dim)


def linf(dim: int) -> NormSpec:
  return NormSpec(NormKind.LINF, dim)


def elliptical(matrix) -> NormSpec:
  matrix = np.asarray(matrix, dtype=float)
  return NormSpec(NormKind.ELLIPTICAL, matrix.shape[0], matrix=matrix)


def custom(func: Callable[[np.ndarray], np.ndarray], dim: int) -> NormSpec:
  return NormSpec(NormKind.CUSTOM, dim, func=func)


def by_name(name: str, dim: int) -> NormSpec:
  table = {"l1": l1, "l2": l2, "linf": linf}
  try:
    return table[name.lower()](dim)
  except KeyError:
    raise ValueError(f"unknown norm {name!r}; expected one of {sorted(table)}")


def check_norm(norm: NormSpec, n_samples: int = 200, seed: int = 0,
               tol: float = 1e-9) -> list[str]:
  """Samples the norm axioms; returns a list of violated properties."""
  rng = np.random.default_rng(seed)
  problems = []
  if abs(norm(np.zeros(norm.dim))) > tol:
    problems.append("norm(0) != 0")
  x = rng.standard_normal((n_samples, norm.dim))
  y = rng.standard_normal((n_samples, norm.dim))
  lam = rng.uniform(-5.0, 5.0, n_samples)
  nx, ny = norm(x), norm(y)
  if np.any(np.abs(norm(lam[:, None] * x) - np.abs(lam) * nx) >
            tol * (1.0 + np.abs(lam) * nx)):
    problems.append("not absolutely homogeneous")
  if np.any(norm(x + y) > nx + ny + tol):
    problems.append("triangle inequality fails")
  if np.any(nx <= 0):
    problems.append("not positive on non-zero vectors")
  return problems
