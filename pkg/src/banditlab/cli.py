"""Command-line entry point: ``banditlab {value,breakeven,verify,explore}``.

Exit codes: 0 success, 1 verification violations, 2 usage or schema error,
3 numerical failure, 4 violated precondition (e.g. an irregular discount).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import discount as disc
from .engine import BanditInstance, value
from .errors import BanditLabError, SchemaError
from .expfam import ConjugateArm, arm_from_json, get_family
from .genprior import NormalGridPrior, lambda_b, lambda_n, vb_value, vn_value
from .indices import breakeven_observation, breakeven_value
from .orders import GridDensity
from .quad import GL_ORDER
from .verify import SuiteConfig, atomic_write, explore, run_suite

OPTION_KEYS = ("quad_order", "tol", "grid_size")


# -- output ----------------------------------------------------------------------

def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(format(obj, ".17g"))
        text = format(obj, ".17g")
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    return dumps(float(obj))


# -- instance files ----------------------------------------------------------------

def load_instance(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise SchemaError("an instance file holds a JSON object")
    for key in ("family", "arms", "discount"):
        if key not in obj:
            raise SchemaError(f"instance file lacks {key!r}")
    arms = obj["arms"]
    if not isinstance(arms, list) or len(arms) not in (1, 2):
        raise SchemaError("'arms' must list one or two arms")
    known = obj.get("known")
    if (len(arms) == 2) == (known is not None):
        raise SchemaError("give either two arms or one arm and a known value")
    options = obj.get("options", {}) or {}
    if not isinstance(options, dict) or set(options) - set(OPTION_KEYS):
        raise SchemaError(f"options may only hold {OPTION_KEYS}")
    return obj


def _options(obj: dict, args) -> dict:
    """Flags override file options, which override defaults."""
    opts = {"quad_order": GL_ORDER, "tol": None, "grid_size": None}
    opts.update({k: v for k, v in obj.get("options", {}).items() if v is not None})
    for key in OPTION_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            opts[key] = flag
    return opts


def _arm(family: str, obj):
    if not isinstance(obj, dict):
        raise SchemaError(f"bad arm {obj!r}")
    if "gamma" in obj:
        return arm_from_json(obj)
    if family == "bernoulli" and "grid" in obj:
        return GridDensity.from_json(obj)
    if family == "normal" and "theta_min" in obj:
        return NormalGridPrior.from_json(obj)
    raise SchemaError(f"arm {sorted(obj)} is neither conjugate nor a grid prior of the {family} family")


def _parse(obj: dict):
    fam = get_family(obj["family"])
    A = disc.from_json(obj["discount"])
    arms = [_arm(fam.name, a) for a in obj["arms"]]
    known = obj.get("known")
    if known is not None:
        try:
            known = float(known)
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"known value {known!r} is not a number") from exc
    return fam, A, arms, known


def _value(obj: dict, args) -> dict:
    fam, A, arms, known = _parse(obj)
    opts = _options(obj, args)
    if all(isinstance(a, ConjugateArm) for a in arms):
        inst = BanditInstance(fam, arms[0], A, arms[1] if len(arms) == 2 else None, known,
                              order=int(opts["quad_order"]))
        return value(inst).to_json()
    other = arms[1] if len(arms) == 2 else known
    if isinstance(other, ConjugateArm):
        raise SchemaError("mixing conjugate and grid priors is not supported")
    if fam.name == "bernoulli":
        return vb_value(arms[0], other, A).to_json()
    return vn_value(arms[0], other, A).to_json()


def _breakeven(obj: dict, args) -> dict:
    fam, A, arms, known = _parse(obj)
    if len(arms) != 1:
        raise SchemaError("break-even values need a one-armed instance")
    opts = _options(obj, args)
    tol = opts["tol"]
    arm = arms[0]
    if isinstance(arm, ConjugateArm):
        if args.observation:
            return {"b": breakeven_observation(fam, arm, A, tol)}
        return breakeven_value(fam, arm, A, tol).to_json()
    if args.observation:
        raise SchemaError("the break-even observation is defined for conjugate priors only")
    if fam.name == "bernoulli":
        return {"lambda": lambda_b(arm, A) if tol is None else lambda_b(arm, A, tol)}
    return {"lambda": lambda_n(arm, A) if tol is None else lambda_n(arm, A, tol)}


# -- suites ------------------------------------------------------------------------------

CONFIG_FLAGS = ("seed", "cases", "family", "n_min", "n_max", "tau_min", "tau_max", "tol",
                "grid_size", "grid_points", "discount", "beta", "budget")


def _suite_config(args, name: str) -> SuiteConfig:
    base = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                base = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise SchemaError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(base, dict):
            raise SchemaError("a config file holds a JSON object")
    base["suite"] = name
    for key in CONFIG_FLAGS:
        v = getattr(args, key, None)
        if v is not None:
            base[key] = v
    if getattr(args, "c_grid", None):
        base["c_grid"] = args.c_grid
    if getattr(args, "extended", False):
        base["extended"] = True
    return SuiteConfig.from_json(base)


def _write_report(report, out: str) -> tuple[str, str]:
    cfg = report.config
    stem = os.path.join(out, f"{report.suite}_{cfg.family}_seed{cfg.seed}")
    report.write(stem + ".csv", stem + ".json")
    if report.report_only:
        lines = ["statistic,value"] + [f"{k},{format(float(v), '.17g')}" for k, v in sorted(report.statistics.items())]
        atomic_write(stem + "_stats.csv", "\n".join(lines) + "\n")
    return stem + ".csv", stem + ".json"


def _summary_line(report, paths) -> dict:
    out = {"suite": report.suite, "status": report.status, "cases_run": report.cases_run,
           "checks": len(report.rows), "violations": len(report.violations),
           "worst_gap": report.worst_gap, "csv": paths[0], "summary": paths[1]}
    out.update(report.statistics)
    return out


# -- commands ----------------------------------------------------------------------------

def cmd_value(args) -> int:
    print(dumps(_value(load_instance(args.instance), args)))
    return 0


def cmd_breakeven(args) -> int:
    print(dumps(_breakeven(load_instance(args.instance), args)))
    return 0


def cmd_verify(args) -> int:
    report = run_suite(_suite_config(args, args.suite))
    paths = _write_report(report, args.out)
    print(dumps(_summary_line(report, paths)))
    return 0 if report.status == "pass" else 1


def cmd_explore(args) -> int:
    cfg = _suite_config(args, args.conjecture)
    if args.n is not None:
        cfg = cfg.with_(n_max=args.n, n_min=min(cfg.n_min, args.n))
    report = explore(cfg)
    paths = _write_report(report, args.out)
    print(dumps(_summary_line(report, paths)))
    return 0


def _suite_flags(p):
    p.add_argument("--config", help="JSON file with SuiteConfig fields; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--cases", type=int)
    p.add_argument("--family")
    p.add_argument("--tol", type=float)
    p.add_argument("--n-min", dest="n_min", type=int)
    p.add_argument("--n-max", dest="n_max", type=int)
    p.add_argument("--tau-min", dest="tau_min", type=float)
    p.add_argument("--tau-max", dest="tau_max", type=float)
    p.add_argument("--c-grid", dest="c_grid", type=float, nargs="+")
    p.add_argument("--grid-points", dest="grid_points", type=int)
    p.add_argument("--grid-size", dest="grid_size", type=int)
    p.add_argument("--discount", choices=("uniform", "geometric"))
    p.add_argument("--beta", type=float)
    p.add_argument("--budget", type=int)
    p.add_argument("--out", default="reports", help="output directory (default: reports)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="banditlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("value", help="optimal value of an instance file")
    p.add_argument("instance")
    p.add_argument("--quad-order", dest="quad_order", type=int)
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("breakeven", help="break-even value (or observation) of a one-armed instance")
    p.add_argument("instance")
    p.add_argument("--observation", action="store_true", help="report b instead of lambda")
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_breakeven)

    p = sub.add_parser("verify", help="run a seeded theorem suite")
    p.add_argument("--suite", required=True)
    _suite_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("explore", help="run a report-only conjecture explorer")
    p.add_argument("--conjecture", required=True, choices=("berry", "b-vs-lambda", "herschkorn"))
    p.add_argument("--n", type=int, help="largest horizon")
    p.add_argument("--extended", action="store_true", help="b-vs-lambda: add fractional priors and geometric weights")
    _suite_flags(p)
    p.set_defaults(func=cmd_explore)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except BanditLabError as exc:
        print(f"banditlab: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
