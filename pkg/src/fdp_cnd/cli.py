"""Command-line front end.

Examples:
  fdp-cnd tradeoff --family gdp --mu 1
  fdp-cnd cnd verify --kind tulap --eps 1 --n 100000 --seed 7
  fdp-cnd cnd limit --family gdp --mu 1 --gap 0.01
  fdp-cnd mv build --kind gauss --sigma identity --dim 2 --norm linf
  fdp-cnd report --suite acceptance --seed 7

Outputs go to stdout, or to fixed filenames under ``--output-dir``. Commands
that check something exit with status 1 when a check fails; invalid input
exits with status 2.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

import numpy as np

from fdp_cnd import cnd, io, limit, multivariate as mv, norms, suites, tradeoff
from fdp_cnd.verify import TestReport, alpha_grid, verify_cnd

EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(ValueError):
  pass


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _default_seed() -> int:
  raw = os.environ.get("FDP_SEED", "0")
  try:
    return int(raw)
  except ValueError:
    raise UsageError(f"FDP_SEED must be an integer, got {raw!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
  p.add_argument("--seed", type=int, default=None,
                 help="RNG seed (default: $FDP_SEED or 0)")
  p.add_argument("--output-dir", default=None,
                 help="write artifacts here instead of stdout")
  p.add_argument("--format", choices=("csv", "json"), default="csv")
  p.add_argument("--grid-points", type=int, default=201)
  p.add_argument("--level", type=float, default=0.01)


def _params(p: argparse.ArgumentParser) -> None:
  p.add_argument("--eps", type=float)
  p.add_argument("--delta", type=float)
  p.add_argument("--mu", type=float)


def _need(args, *names):
  missing = [n for n in names if getattr(args, n, None) is None]
  if missing:
    raise UsageError("missing " + ", ".join("--" + m for m in missing))
  return [getattr(args, n) for n in names]


def _tradeoff_from(family: str, args) -> tradeoff.TradeoffFunction:
  if family == "eps-delta":
    eps, delta = _need(args, "eps", "delta")
    return tradeoff.make_eps_delta(eps, delta)
  if family == "gdp":
    (mu,) = _need(args, "mu")
    return tradeoff.make_gdp(mu)
  if family == "laplace":
    (eps,) = _need(args, "eps")
    return tradeoff.make_laplace_tf(eps)
  raise UsageError(f"unknown family {family!r}")


def _cnd_from(args) -> cnd.Cnd:
  if args.f is not None:
    return cnd.construct_cnd(_tradeoff_from(args.f, args))
  kind = args.kind
  if kind == "tulap":
    return cnd.tulap(*_need(args, "eps"))
  if kind == "gaussian":
    return cnd.GaussianCnd(*_need(args, "mu"))
  if kind == "laplace":
    return cnd.LaplaceCnd(*_need(args, "eps"))
  if kind == "uniform":
    return cnd.UniformCnd(*_need(args, "delta"))
  raise UsageError("give --kind or --f")


def _component(spec: str) -> cnd.Cnd:
  name, _, value = spec.partition(":")
  table = {"tulap": cnd.tulap, "gaussian": cnd.GaussianCnd,
           "laplace": cnd.LaplaceCnd, "uniform": cnd.UniformCnd}
  if name not in table or not value:
    raise UsageError(f"component {spec!r} must look like kind:param with kind "
                     f"in {sorted(table)}")
  return table[name](float(value))


def _sigma(spec: str, dim: int) -> np.ndarray:
  if spec == "identity":
    return np.eye(dim)
  if spec.startswith("diag:"):
    diag = [float(v) for v in spec[5:].split(",")]
    if len(diag) != dim:
      raise UsageError("--sigma diag needs --dim entries")
    return np.diag(diag)
  raise UsageError("--sigma must be 'identity' or 'diag:v1,...,vd'")


def _mv_from(args) -> mv.MvCnd:
  kind = args.kind
  if kind == "linf":
    eps, dim = _need(args, "eps", "dim")
    return mv.linf_mechanism(eps, dim)
  if kind == "gauss":
    (dim,) = _need(args, "dim")
    return mv.gaussian_mv_cnd(_sigma(args.sigma, dim),
                              norms.by_name(args.norm, dim), seed=args.seed)
  if kind == "uniform":
    delta, dim = _need(args, "delta", "dim")
    return mv.uniform_cube_cnd(delta, dim, norms.by_name(args.norm, dim),
                               seed=args.seed)
  if kind == "approx-dp":
    eps, delta = _need(args, "eps", "delta")
    return mv.approx_dp_cnd(eps, delta, args.k)
  if kind == "iid-l1":
    (base,) = _need(args, "base")
    return mv.iid_l1_cnd(_component(base), args.k)
  if kind == "product":
    (components,) = _need(args, "components")
    return mv.product_cnd([_component(c) for c in components.split(",")])
  raise UsageError(f"unknown kind {kind!r}")


def _config(args) -> dict:
  skip = {"func", "output_dir"}
  return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _table(args, name: str, columns, rows, extra: Optional[dict] = None):
  """Emits a table as CSV, or as JSON columns plus ``extra``."""
  cfg = _config(args)
  if args.format == "json":
    payload = {"columns": list(columns),
               "rows": [[float(v) for v in r] for r in rows]}
    payload.update(extra or {})
    return io.emit(io.to_json(payload, args.seed, cfg), args.output_dir,
                   name + ".json")
  if extra:
    io.emit(io.to_json(extra, args.seed, cfg), args.output_dir,
            name + "_meta.json")
  return io.emit(io.to_csv(columns, rows, args.seed, cfg), args.output_dir,
                 name + ".csv")


def _report(args, name: str, report: TestReport):
  """Emits a report; JSON always, since entries are nested."""
  text = io.to_json({"report": report.to_dict()}, args.seed, _config(args))
  out = io.emit(text, args.output_dir, name + ".json")
  return out, (0 if report.passed else EXIT_FAIL)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_tradeoff(args):
  f = _tradeoff_from(args.family, args)
  alphas = alpha_grid(args.grid_points)
  return _table(args, "tradeoff", ("alpha", "beta"),
                zip(alphas, f(alphas))), 0


def cmd_cnd(args):
  if args.action == "limit":
    return _cnd_limit(args)
  F = _cnd_from(args)
  if args.action == "build":
    x = np.linspace(-args.span, args.span, args.grid_points)
    return _table(args, "cnd_build", ("x", "cdf", "pdf"),
                  zip(x, F.cdf(x), F.pdf(x)), {"cnd": F.metadata()}), 0
  if args.action == "sample":
    draws = F.sample(np.random.default_rng(args.seed), args.n)
    return _table(args, "cnd_sample", ("x",), ((v,) for v in draws)), 0
  report = verify_cnd(F, F.source_f, n_mc=args.n, seed=args.seed,
                      level=args.level, grid_points=args.grid_points)
  return _report(args, "cnd_verify", report)


def _cnd_limit(args):
  if args.family == "gdp":
    family = tradeoff.gdp_family(*_need(args, "mu"))
  elif args.family == "laplace":
    family = tradeoff.laplace_family(*_need(args, "eps"))
  elif args.family == "zero-delta":
    family = tradeoff.zero_delta_family(*_need(args, "delta"))
  else:
    raise UsageError("cnd limit needs --family gdp|laplace|zero-delta")
  F, diag = limit.logconcave_limit(family, args.gap)
  x = np.linspace(-args.span, args.span, args.grid_points)
  return _table(args, "cnd_limit", ("x", "cdf"), zip(x, F.cdf(x)),
                {"diagnostics": diag.to_dict()}), 0


def cmd_mv(args):
  M = _mv_from(args)
  if args.action == "build":
    text = io.to_json({"mv_cnd": M.metadata()}, args.seed, _config(args))
    return io.emit(text, args.output_dir, "mv_build.json"), 0
  if args.action == "sample":
    draws = M.sample(np.random.default_rng(args.seed), args.n)
    cols = [f"x{i}" for i in range(M.dim)]
    return _table(args, "mv_sample", cols, draws), 0
  report = mv.verify_mv_cnd(M, args.n, seed=args.seed, level=args.level,
                            grid_points=args.grid_points)
  return _report(args, "mv_verify", report)


def cmd_report(args):
  return _report(args, f"report_{args.suite}",
                 suites.run_suite(args.suite, args.seed))


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(
      prog="fdp-cnd",
      description="Tradeoff functions and canonical noise distributions.")
  sub = parser.add_subparsers(dest="command", required=True)

  p = sub.add_parser("tradeoff", help="tabulate a tradeoff function")
  p.add_argument("--family", required=True,
                 choices=("eps-delta", "gdp", "laplace"))
  _params(p)
  _common(p)
  p.set_defaults(func=cmd_tradeoff)

  p = sub.add_parser("cnd", help="one-dimensional CNDs")
  p.add_argument("action", choices=("build", "sample", "verify", "limit"))
  p.add_argument("--kind", choices=("tulap", "gaussian", "laplace", "uniform"))
  p.add_argument("--f", choices=("eps-delta", "gdp", "laplace"),
                 help="build the constructed CND of this tradeoff function")
  p.add_argument("--family", choices=("gdp", "laplace", "zero-delta"),
                 help="divisible family for 'limit'")
  p.add_argument("--gap", type=float, default=0.01)
  p.add_argument("--n", type=int, default=100_000)
  p.add_argument("--span", type=float, default=6.0)
  _params(p)
  _common(p)
  p.set_defaults(func=cmd_cnd)

  p = sub.add_parser("mv", help="multivariate CNDs")
  p.add_argument("action", choices=("build", "sample", "verify"))
  p.add_argument("--kind", required=True, choices=(
      "linf", "gauss", "uniform", "approx-dp", "iid-l1", "product"))
  p.add_argument("--dim", type=int)
  p.add_argument("--k", type=int, default=1)
  p.add_argument("--norm", default="linf", choices=("l1", "l2", "linf"))
  p.add_argument("--sigma", default="identity")
  p.add_argument("--base", help="iid-l1 component, e.g. laplace:1")
  p.add_argument("--components", help="product components, e.g. "
                 "tulap:1,uniform:0.1")
  p.add_argument("--n", type=int, default=100_000)
  _params(p)
  _common(p)
  p.set_defaults(func=cmd_mv)

  p = sub.add_parser("report", help="run a check suite")
  p.add_argument("--suite", required=True, choices=suites.SUITES)
  _common(p)
  p.set_defaults(func=cmd_report)
  return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
  parser = build_parser()
  args = parser.parse_args(argv)
  try:
    if args.seed is None:
      args.seed = _default_seed()
    if hasattr(args, "n") and args.n < 1000:
      raise UsageError("--n must be >= 1000")
    out, code = args.func(args)
  except (ValueError, ArithmeticError) as err:
    print(f"fdp-cnd: error: {err}", file=sys.stderr)
    return EXIT_USAGE
  if out is not None:
    sys.stdout.write(out)
  return code


if __name__ == "__main__":
  sys.exit(main())
