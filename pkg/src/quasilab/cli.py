"""Command-line interface: ``quasilab <command> [options]``.

Every option can also be given in a flat config file (``--config``) under
its dotted key, e.g. ``problem.n = 3``; command-line flags override the
file.  Reports are JSON with sorted keys, profiles are CSV.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional


from . import __version__
from .barrier import BarrierParams, forcing_function, moment_report
from .core import (Forcing, ProblemParams, RadialGrid,
                   parse_nonlinearity, parse_operator)
from .criterion import classify_criterion, regularize
from .errors import (CriterionDiverges, CriterionInconclusive, DivergentMass,
                     DivergentNorm, InvalidInput, NoConvergence, NonConvergence,
                     NonFinite, QuasilabError, SearchExhausted)
from .galerkin import convergence_study, hardy_check, parse_profile, weak_harnack_check
from .io import read_config, read_profile, rows_to_csv, to_json, write_json, write_profile
from .potential import RadialMeasure, wolff_sweep
from .quad import QuadratureSpec
from .radial import SearchSpec, certify_supersolution, delta_search, solve_radial

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DIVERGES = 10
EXIT_INCONCLUSIVE = 11
EXIT_SEARCH = 12
EXIT_NUMERIC = 13
EXIT_MASS = 14
EXIT_CERT_FAIL = 15

EXIT_CODES = """exit codes:
  0   success (criterion converges, certificate passes)
  2   invalid input or config (includes n <= p and non-monotone tables)
  10  critical integral diverges; construction refused
  11  criterion inconclusive; construction refused
  12  no admissible delta within the search budget
  13  numerical non-convergence (quadrature or nonlinear solver)
  14  infinite mass of the forcing
  15  supersolution certificate failed
"""


def _floats(text: str):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text: str):
    return [int(v) for v in str(text).split(",") if v.strip()]


@dataclass(frozen=True)
class Option:
    key: str
    flags: tuple
    convert: Callable
    default: object
    help: str
    choices: Optional[tuple] = None


_OPTIONS = {o.key: o for o in [
    Option("problem.n", ("--n",), int, None, "space dimension n"),
    Option("problem.p", ("--p",), float, None, "growth exponent p (1 < p < n)"),
    Option("problem.c1", ("--c1",), float, 1.0, "coercivity constant c1"),
    Option("problem.c2", ("--c2",), float, 1.0, "growth constant c2"),
    Option("f", ("--f",), str, None, "nonlinearity: power:q, powerlog:q,a, table:PATH, zero"),
    Option("eps", ("--eps",), float, None, "right end of the domain of f"),
    Option("forcing", ("--f", "--f-forcing"), str, "indicator",
           "radial density: indicator[:R], decay:k, zero"),
    Option("grid.near_nodes", ("--near-nodes",), int, 300, "uniform nodes on [0, 1]"),
    Option("grid.ratio", ("--ratio",), float, 1.01, "geometric ratio beyond r = 1"),
    Option("grid.r_max", ("--r-max",), float, 1e3, "outer radius of the grid"),
    Option("quad.rel_tol", ("--rel-tol",), float, 1e-10, "quadrature relative tolerance"),
    Option("quad.abs_tol", ("--abs-tol",), float, 1e-14, "quadrature absolute tolerance"),
    Option("quad.max_subdivisions", ("--max-subdivisions",), int, 2 ** 15,
           "quadrature panel budget"),
    Option("search.delta0", ("--delta0",), float, 1.0, "initial barrier width"),
    Option("search.shrink", ("--shrink",), float, 0.5, "factor applied to delta per step"),
    Option("search.max_iters", ("--max-iters",), int, 60, "maximal number of delta reductions"),
    Option("construct.report", ("--report",), str, None,
           "write the moment report at the chosen delta to this JSON file"),
    Option("certify.delta", ("--delta",), float, None, "barrier width to certify"),
    Option("certify.profile", ("--profile",), str, None,
           "CSV profile r,u to certify (default: solve for it)"),
    Option("wolff.d", ("--d",), _floats, [0.0], "comma-separated distances |x|"),
    Option("galerkin.R", ("--R",), float, 50.0, "truncation radius"),
    Option("galerkin.cells", ("--cells",), _ints, [250, 500, 1000, 2000],
           "comma-separated mesh sizes"),
    Option("galerkin.op", ("--op",), str, "model", "operator: model, scaled:c, scaled:sin2:A"),
    Option("galerkin.tol", ("--tol",), float, 1e-10, "nonlinear solver tolerance"),
    Option("galerkin.solution", ("--solution",), str, None,
           "write the finest Galerkin solution to this CSV"),
    Option("hardy.profile", ("--profile",), str, "exp", "profile: exp[:c], inv:a, gauss, bump[:k]"),
    Option("harnack.lambda", ("--lambda",), float, 1.0, "exponent of the lambda-mean"),
    Option("harnack.radii", ("--radii",), _floats, [1.0, 2.0, 4.0, 8.0, 16.0],
           "comma-separated radii"),
    Option("output.format", ("--format",), str, "json", "report format", ("json", "csv")),
    Option("output.path", ("--out",), str, None, "output file (construct: directory)"),
]}

_COMMON = ["problem.n", "problem.p", "problem.c1", "problem.c2", "quad.rel_tol",
           "quad.abs_tol", "quad.max_subdivisions", "output.format", "output.path"]
_GRID = ["grid.near_nodes", "grid.ratio", "grid.r_max"]

_COMMANDS = {
    "classify": (["f", "eps"], "decide convergence of the critical integral"),
    "construct": (["f", "eps", *_GRID, "search.delta0", "search.shrink", "search.max_iters",
                   "construct.report"],
                  "build the barrier supersolution and its certificate"),
    "certify": (["f", "eps", "certify.delta", "certify.profile", *_GRID],
                "check u <= b and f(b) >= f(u) for a given barrier width"),
    "wolff": (["forcing", "wolff.d"], "Wolff potential of a radial density"),
    "galerkin": (["forcing", "galerkin.R", "galerkin.cells", "galerkin.op", "galerkin.tol",
                  "galerkin.solution"], "Galerkin convergence study against the exact solver"),
    "hardy": (["hardy.profile"], "Hardy inequality for a named radial profile"),
    "harnack": (["forcing", "harnack.lambda", "harnack.radii", *_GRID],
                "weak Harnack ratios for the radial solution of -Delta_p u = F"),
}


def _dest(key: str) -> str:
    return key.replace(".", "__")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quasilab", description="Critical-exponent tools for -div A(x,u,Du) >= f(u).",
        epilog=EXIT_CODES, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    for name, (keys, help_text) in _COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text, epilog=EXIT_CODES,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.add_argument("--config", help="flat key = value config file with dotted keys")
        for key in _COMMON + keys:
            opt = _OPTIONS[key]
            p.add_argument(*opt.flags, dest=_dest(key), default=None, choices=opt.choices,
                           help=f"{opt.help} [{key}]")
    return parser


def resolve(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then explicit flags."""
    keys = _COMMON + _COMMANDS[args.command][0]
    values = {k: _OPTIONS[k].default for k in keys}
    if args.config:
        values.update(read_config(args.config, keys))
    for k in keys:
        v = getattr(args, _dest(k))
        if v is not None:
            values[k] = v
    out = {}
    for k, v in values.items():
        opt = _OPTIONS[k]
        if v is None or not isinstance(v, str) or opt.convert is str:
            out[k] = v
            continue
        try:
            out[k] = opt.convert(v)
        except ValueError:
            raise InvalidInput(f"{k}: cannot parse {v!r}") from None
    if out.get("output.format") not in ("json", "csv"):
        raise InvalidInput("output.format must be json or csv")
    return out


def _require(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise InvalidInput("missing required option(s): " + ", ".join(missing))


def _params(cfg) -> ProblemParams:
    _require(cfg, "problem.n", "problem.p")
    return ProblemParams(cfg["problem.n"], cfg["problem.p"], cfg["problem.c1"], cfg["problem.c2"])


def _spec(cfg) -> QuadratureSpec:
    return QuadratureSpec(cfg["quad.rel_tol"], cfg["quad.abs_tol"], cfg["quad.max_subdivisions"])


def _grid(cfg) -> RadialGrid:
    return RadialGrid.default(cfg["grid.near_nodes"], cfg["grid.ratio"], cfg["grid.r_max"])


def _nonlinearity(cfg):
    _require(cfg, "f")
    return parse_nonlinearity(cfg["f"], cfg.get("eps"))


def _emit(cfg, report, rows=None, columns=None) -> None:
    if cfg["output.format"] == "csv":
        if rows is None:
            raise InvalidInput("this command has no tabular output; use --format json")
        text = rows_to_csv(rows, columns)
    else:
        text = to_json(report)
    path = cfg.get("output.path")
    if path:
        Path(path).write_text(text, encoding="utf-8", newline="")
    else:
        sys.stdout.write(text)


def cmd_classify(cfg) -> int:
    params = _params(cfg)
    params.require_supercritical()
    rep = classify_criterion(_nonlinearity(cfg), params, _spec(cfg))
    _emit(cfg, rep.as_dict())
    return {"converges": EXIT_OK, "diverges": EXIT_DIVERGES}.get(rep.verdict, EXIT_INCONCLUSIVE)


def cmd_construct(cfg) -> int:
    params = _params(cfg)
    f = _nonlinearity(cfg)
    search = SearchSpec(cfg["search.delta0"], cfg["search.shrink"], cfg["search.max_iters"])
    cert = delta_search(f, params, cfg.get("eps"), search, _grid(cfg), _spec(cfg))
    report = cert.as_dict()
    out = cfg.get("output.path")
    if out:
        d = Path(out)
        d.mkdir(parents=True, exist_ok=True)
        write_profile(d / "u.csv", cert.u, "u")
        write_profile(d / "F.csv", cert.forcing, "F")
        write_json(d / "certificate.json", report)
    if cfg.get("construct.report"):
        bp = BarrierParams(cert.eps, cert.delta, params)
        write_json(cfg["construct.report"], moment_report(regularize(f, params), bp, _spec(cfg)).as_dict())
    sys.stdout.write(to_json(report))
    return EXIT_OK if cert.passed else EXIT_CERT_FAIL


def cmd_certify(cfg) -> int:
    params = _params(cfg)
    _require(cfg, "certify.delta")
    f = _nonlinearity(cfg)
    ft = regularize(f, params)
    eps = f.eps if cfg.get("eps") is None else cfg["eps"]
    bp = BarrierParams(eps, cfg["certify.delta"], params)
    if cfg.get("certify.profile"):
        u = read_profile(cfg["certify.profile"], "u")
    else:
        u = solve_radial(forcing_function(ft, bp), params, _grid(cfg), _spec(cfg))
    check = certify_supersolution(u, ft, bp)
    report = {**check.as_dict(), "delta": bp.delta, "eps": eps, "f": ft.describe(),
              "nodes": len(u.grid)}
    _emit(cfg, report)
    return EXIT_OK if check.passed else EXIT_CERT_FAIL


def cmd_wolff(cfg) -> int:
    params = _params(cfg)
    m = RadialMeasure(Forcing.parse(cfg["forcing"]), params, _spec(cfg))
    rows = wolff_sweep(m, cfg["wolff.d"])
    report = {"W": rows[0]["W"], "d": rows[0]["d"]} if len(rows) == 1 else {"rows": rows}
    report.update({"total_mass": m.total_mass, "forcing": m.density.label})
    _emit(cfg, report, rows, ["d", "W", "near", "far"])
    return EXIT_OK


def cmd_galerkin(cfg) -> int:
    params = _params(cfg)
    op = parse_operator(cfg["galerkin.op"], params.p)
    study = convergence_study(params, Forcing.parse(cfg["forcing"]), cfg["galerkin.R"],
                              cfg["galerkin.cells"], op, cfg["galerkin.tol"])
    if cfg.get("galerkin.solution"):
        from .galerkin import RadialFemSpace, assemble, solve_system
        mesh = RadialGrid.uniform(cfg["galerkin.R"], cfg["galerkin.cells"][-1])
        F = Forcing.parse(cfg["forcing"])
        exact = solve_radial(F, params, mesh)
        sol = solve_system(assemble(RadialFemSpace(mesh, float(exact.values[-1])), op, F, params),
                           tol=cfg["galerkin.tol"])
        write_profile(cfg["galerkin.solution"], sol.profile(), "u")
    _emit(cfg, study, study["rows"], ["cells", "h", "max_error"])
    return EXIT_OK


def cmd_hardy(cfg) -> int:
    params = _params(cfg)
    u, du, pts = parse_profile(cfg["hardy.profile"])
    rep = hardy_check(u, params, du, points=pts, spec=_spec(cfg))
    _emit(cfg, {**rep.as_dict(), "profile": cfg["hardy.profile"]})
    return EXIT_OK


def cmd_harnack(cfg) -> int:
    params = _params(cfg)
    grid = _grid(cfg).with_nodes(cfg["harnack.radii"])
    u = solve_radial(Forcing.parse(cfg["forcing"]), params, grid, _spec(cfg))
    rows = weak_harnack_check(u, params, cfg["harnack.lambda"], cfg["harnack.radii"])
    ratios = [r["ratio"] for r in rows]
    report = {"rows": rows, "lambda": cfg["harnack.lambda"], "spread": max(ratios) / min(ratios)}
    _emit(cfg, report, rows, ["r", "mean", "essinf", "ratio"])
    return EXIT_OK


_HANDLERS = {"classify": cmd_classify, "construct": cmd_construct, "certify": cmd_certify,
             "wolff": cmd_wolff, "galerkin": cmd_galerkin, "hardy": cmd_hardy,
             "harnack": cmd_harnack}


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, CriterionInconclusive):
        return EXIT_INCONCLUSIVE
    if isinstance(exc, CriterionDiverges):
        return EXIT_DIVERGES
    if isinstance(exc, SearchExhausted):
        return EXIT_SEARCH
    if isinstance(exc, DivergentMass):
        return EXIT_MASS
    if isinstance(exc, (NonConvergence, NoConvergence, NonFinite, DivergentNorm)):
        return EXIT_NUMERIC
    if isinstance(exc, (InvalidInput, ValueError)):
        return EXIT_INPUT
    return EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        return _HANDLERS[args.command](cfg)
    except (QuasilabError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
