"""Experiment runner: convergence tables and verification reports.

Series go out as CSV (header ``n,window,a_n,support,ms``), structured
reports as JSON with sorted keys, so identical configurations produce byte
identical output.  Wall times are real measurements only under ``--timing``;
by default the ms column is written as 0 to keep the determinism contract.

Exit codes: 0 all requested checks passed, 1 a verification failed (the
report is still written), 2 input or usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import jsonio, maxstat, zoo
from .action import as_vec, check_cocycle, check_duality
from .errors import (
    ConstructionError,
    DegenerateInputError,
    DomainError,
    ExplorationLimitError,
    InvalidInputError,
    UnsupportedInputError,
)
from .hopf import hopf_decompose, krengel_normal_form, verify_equivalence
from .maharam import Rect, check_measure_preservation, extend, extension_stat
from .space import L1Function, rel_dev

OUT_DIR_ENV = "NSDYN_OUT_DIR"

_USAGE_ERRORS = (InvalidInputError, DomainError, UnsupportedInputError,
                 DegenerateInputError, ExplorationLimitError)


# ---------------------------------------------------------------------------
# argument parsing helpers

def _parse_param_value(text: str):
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    if "x" in text:
        parts = text.split("x")
        try:
            return [int(p) for p in parts]
        except ValueError:
            pass
    return text


def parse_params(text: str) -> dict:
    """Comma separated key=value pairs, values typed as int/float/bool/list."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        if "=" not in item:
            raise InvalidInputError(
                f"parameter {item!r} is not of the form key=value")
        key, _, raw = item.partition("=")
        out[key.strip()] = _parse_param_value(raw.strip())
    return out


def parse_atom(text: str):
    try:
        return jsonio.atom_from_json(json.loads(text))
    except json.JSONDecodeError:
        return text


def parse_vec(text: str, d: int) -> tuple:
    parts = text.split(",")
    try:
        vec = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse group element {text!r}") from exc
    if len(vec) == 1 and d > 1:
        raise InvalidInputError(
            f"group element {text!r} has 1 coordinate, the action has d={d}")
    return as_vec(vec if len(vec) > 1 else vec[0], d)


def parse_ns(text: str) -> list[int]:
    try:
        ns = [int(p) for p in text.split(",")]
    except ValueError as exc:
        raise InvalidInputError(f"cannot parse n list {text!r}") from exc
    if any(n < 1 for n in ns):
        raise InvalidInputError(f"window sizes must be >= 1: {ns}")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise InvalidInputError(f"window sizes must be strictly increasing: {ns}")
    return ns


def load_action(spec: str, params_text: str):
    """``zoo:<builder>`` (+ --params), ``fixture:<name>``, or a JSON file."""
    if spec.startswith("zoo:"):
        name = spec[len("zoo:"):]
        if name in zoo.FIXTURES and not params_text:
            return zoo.build_fixture(name)
        return zoo.build(zoo.ZooSpec(name, parse_params(params_text)))
    if spec.startswith("fixture:"):
        return zoo.build_fixture(spec[len("fixture:"):])
    if spec in zoo.FIXTURES:
        return zoo.build_fixture(spec)
    with open(spec) as fh:
        return jsonio.action_from_json(json.load(fh))


def parse_g(action, text: str) -> L1Function:
    """``atom:<id>``, ``ones``, ``exhaustion:<m>``, or ``@file.json``."""
    space = action.space
    if text.startswith("atom:"):
        return L1Function.indicator(space, [parse_atom(text[len("atom:"):])])
    if text == "ones":
        if not space.finite:
            raise InvalidInputError(
                "'ones' needs a finite space; use exhaustion:<m> instead")
        return L1Function.indicator(space, space.atoms)
    if text.startswith("exhaustion:"):
        m = int(text[len("exhaustion:"):])
        return L1Function.indicator(space, space.exhaustion(m))
    if text.startswith("@"):
        with open(text[1:]) as fh:
            return jsonio.l1_from_json(space, json.load(fh))
    raise InvalidInputError(
        f"cannot parse function spec {text!r}; use atom:<id>, ones, "
        "exhaustion:<m>, or @file.json")


def parse_atom_set(action, text: str) -> list:
    if text.startswith("exhaustion:"):
        return list(action.space.exhaustion(int(text[len("exhaustion:"):])))
    doc = json.loads(text)
    if not isinstance(doc, list):
        raise InvalidInputError("atom set must be a JSON array")
    return [jsonio.atom_from_json(a) for a in doc]


def _positive(value, flag: str) -> float:
    value = float(value)
    if value <= 0.0:
        raise InvalidInputError(f"{flag} must be positive, got {value}")
    return value


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _resolve_out(path: str) -> str:
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        return os.path.join(base, path)
    return path


def _emit(text: str, out: str | None):
    if out:
        path = _resolve_out(out)
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# per-command option resolution (CLI flag > config file > built-in default)

class _Options:
    def __init__(self, args: argparse.Namespace, config: dict):
        self._args = args
        self._config = config

    def get(self, key: str, default=None):
        val = getattr(self._args, key, None)
        if val is not None:
            return val
        if key in self._config:
            return self._config[key]
        return default

    def require(self, key: str, flag: str):
        val = self.get(key)
        if val is None:
            raise InvalidInputError(f"missing required option {flag}")
        return val


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise InvalidInputError("config file must hold a JSON object")
    return doc


# ---------------------------------------------------------------------------
# subcommand handlers; each returns (exit_code, output_text)

def _cmd_stat(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    g = parse_g(action, opt.require("g", "--g"))
    ns = parse_ns(opt.require("n", "--n"))
    kind = opt.get("window", "corner")
    series = maxstat.stat_series(action, g, ns, kind)
    return 0, series.to_csv(include_timing=bool(opt.get("timing", False)))


def _cmd_verdict(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    g_specs = opt.require("g", "--g")
    gs = [parse_g(action, spec) for spec in g_specs]
    ns = parse_ns(opt.require("n", "--n"))
    verdict = maxstat.conservativity_verdict(
        action, gs, ns,
        kind=opt.get("window", "corner"),
        theta_dec=_positive(opt.get("theta_dec", 0.1), "--theta-dec"),
        theta_stab=_positive(opt.get("theta_stab", 0.05), "--theta-stab"))
    return 0, _dump(verdict.as_dict())


def _cmd_cocycle_check(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    report = check_cocycle(action, int(opt.get("radius", 2)),
                           rel_tol=_positive(opt.get("tol", 1e-9), "--tol"))
    return (0 if report.passed else 1), _dump(report.as_dict())


def _cmd_duality_check(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    t = parse_vec(opt.require("t", "--t"), action.d)
    g = parse_g(action, opt.require("g", "--g"))
    atoms = parse_atom_set(action, opt.require("set", "--A"))
    tol = _positive(opt.get("tol", 1e-9), "--tol")
    lhs, rhs = check_duality(action, t, g, atoms)
    image = action.dual_apply(t, g)
    dev = rel_dev(lhs, rhs)
    norm_dev = rel_dev(image.norm, g.norm)
    passed = dev <= tol and norm_dev <= tol
    doc = {
        "t": list(t),
        "lhs": lhs,
        "rhs": rhs,
        "deviation": dev,
        "norm": g.norm,
        "dual_norm": image.norm,
        "norm_deviation": norm_dev,
        "rel_tol": tol,
        "passed": passed,
    }
    return (0 if passed else 1), _dump(doc)


def _default_rects(action) -> list[Rect]:
    return [Rect(atom, 0.0, 1.0) for atom in action.space.exhaustion(1)]


def _cmd_maharam_verify(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    ext = extend(action)  # raises ConstructionError with report on failure
    t = parse_vec(opt.get("t", "1" if action.d == 1 else
                          ",".join(["1"] * action.d)), action.d)
    rect_spec = opt.get("rects", "auto")
    if rect_spec == "auto":
        rects = _default_rects(action)
    else:
        path = rect_spec[1:] if rect_spec.startswith("@") else rect_spec
        with open(path) as fh:
            rects = jsonio.rects_from_json(json.load(fh))
    tol_measure = _positive(opt.get("tol_measure", 1e-9), "--tol-measure")
    tol_extension = _positive(opt.get("tol_extension", 1e-12), "--tol-extension")
    report = check_measure_preservation(ext, t, rects, rel_tol=tol_measure)
    ms = [int(x) for x in str(opt.get("m", "1,2")).split(",")]
    ns = parse_ns(opt.get("n", "2,4,8,16"))
    table = []
    ext_ok = True
    for m in ms:
        for n in ns:
            lhs, rhs = extension_stat(ext, m, n)
            dev = rel_dev(lhs, rhs)
            ext_ok = ext_ok and dev <= tol_extension
            table.append({"m": m, "n": n, "lhs": lhs, "rhs": rhs,
                          "deviation": dev})
    passed = report.passed and ext_ok
    doc = {
        "measure_preservation": report.as_dict(),
        "extension_stat": table,
        "tol_extension": tol_extension,
        "passed": passed,
    }
    return (0 if passed else 1), _dump(doc)


def _cmd_hopf(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    decomposition = hopf_decompose(action, int(opt.get("radius", 4)))
    return 0, _dump(decomposition.as_dict())


def _cmd_krengel(opt: _Options):
    action = load_action(opt.require("action", "--action"), opt.get("params", ""))
    radius = int(opt.get("radius", 4))
    form_path = opt.get("verify_form")
    if form_path:
        with open(form_path) as fh:
            form = jsonio.krengel_form_from_json(json.load(fh))
    else:
        region = parse_atom_set(action, opt.require("region", "--region"))
        form = krengel_normal_form(action, region, radius=radius)
    report = verify_equivalence(action, form, radius)
    doc = {
        "form": form.as_dict(),
        "equivalence": report.as_dict(),
    }
    return (0 if report.passed else 1), _dump(doc)


def _cmd_zoo(opt: _Options):
    what = opt.get("what") or "list"
    if what != "list":
        raise InvalidInputError(f"unknown zoo action {what!r}; try 'list'")
    return 0, _dump(zoo.zoo_list())


_HANDLERS = {
    "stat": _cmd_stat,
    "verdict": _cmd_verdict,
    "cocycle-check": _cmd_cocycle_check,
    "duality-check": _cmd_duality_check,
    "maharam-verify": _cmd_maharam_verify,
    "hopf": _cmd_hopf,
    "krengel": _cmd_krengel,
    "zoo": _cmd_zoo,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nsdyn",
        description="Exact diagnostics for nonsingular Z^d-actions on "
                    "atomic measure spaces.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--action", help="zoo:<builder>, fixture:<name>, or a "
                       "JSON action file")
        p.add_argument("--params", help="builder parameters, key=value pairs")
        p.add_argument("--config", help="JSON file of option defaults")
        p.add_argument("--out", help="output path (relative paths resolve "
                       f"against ${OUT_DIR_ENV})")

    p = sub.add_parser("stat", help="maximal-average statistic series as CSV")
    common(p)
    p.add_argument("--g", help="function spec: atom:<id>, ones, "
                   "exhaustion:<m>, @file.json")
    p.add_argument("--n", help="comma separated increasing window sizes")
    p.add_argument("--window", choices=["corner", "centered"])
    p.add_argument("--timing", action="store_const", const=True,
                   help="write measured wall times (breaks byte determinism)")

    p = sub.add_parser("verdict", help="conservativity verdict as JSON")
    common(p)
    p.add_argument("--g", action="append", help="function spec; repeat for "
                   "a sequence with increasing supports")
    p.add_argument("--n", help="comma separated increasing window sizes")
    p.add_argument("--window", choices=["corner", "centered"])
    p.add_argument("--theta-dec", dest="theta_dec", type=float)
    p.add_argument("--theta-stab", dest="theta_stab", type=float)

    p = sub.add_parser("cocycle-check", help="cocycle identity report")
    common(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("duality-check", help="duality pair and L1 isometry")
    common(p)
    p.add_argument("--t", help="group element, comma separated ints")
    p.add_argument("--g", help="function spec")
    p.add_argument("--A", dest="set", help="JSON atom array or exhaustion:<m>")
    p.add_argument("--tol", type=float)

    p = sub.add_parser("maharam-verify",
                       help="skew-product measure preservation and the "
                            "extension statistic table")
    common(p)
    p.add_argument("--t", help="group element for the rectangle check")
    p.add_argument("--rects", help="'auto' or a JSON rectangle file")
    p.add_argument("--m", help="comma separated exhaustion indices")
    p.add_argument("--n", help="comma separated window sizes")
    p.add_argument("--tol-measure", dest="tol_measure", type=float)
    p.add_argument("--tol-extension", dest="tol_extension", type=float)

    p = sub.add_parser("hopf", help="conservative/dissipative labels")
    common(p)
    p.add_argument("--radius", type=int)

    p = sub.add_parser("krengel", help="translation normal form plus its "
                       "equivalence report")
    common(p)
    p.add_argument("--region", help="JSON atom array or exhaustion:<m>")
    p.add_argument("--radius", type=int)
    p.add_argument("--verify-form", dest="verify_form",
                   help="verify an existing form JSON instead of building one")

    p = sub.add_parser("zoo", help="enumerate builders and fixtures")
    common(p)
    p.add_argument("what", nargs="?", default=None)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(getattr(args, "config", None))
        opt = _Options(args, config)
        code, text = _HANDLERS[args.command](opt)
        _emit(text, opt.get("out"))
        return code
    except ConstructionError as exc:
        if exc.report is not None:
            _emit(_dump(exc.report.as_dict()),
                  getattr(args, "out", None))
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _USAGE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
