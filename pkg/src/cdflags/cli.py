"""Command-line front end.

Usage::

    cdflags COMMAND [ACTION] [--config FILE] [--grid RxA] [--rmax R] [--dim N]
                    [--tol T] [--seed S] [--out PATH] [--kernel SPEC]
                    [--family NAME --k K]

Commands: ``curvature``, ``invariants``, ``equiv``, ``homog``, ``irred``,
``verify {rigidity|commutant|invariants|jets|all}`` and
``jet {validate|action|localize|classify}``.  Values in the JSON config
file override command-line flags.

Exit codes: 0 success / positive verdict, 1 negative verdict, 2 inconclusive
verdict or input error.
"""

import argparse
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import __version__
from ._validation import disk_grid
from .errors import CDFlagsError, ConfigError

COMMANDS = ("curvature", "invariants", "equiv", "homog", "irred", "verify", "jet")
VERIFY_ACTIONS = ("rigidity", "commutant", "invariants", "jets", "all")
JET_ACTIONS = ("validate", "action", "localize", "classify")
KERNEL_TYPES = ("binomial", "exponential", "coeffs")
OPERATOR_TYPES = ("flag", "jet", "sum")
DEFAULTS = {"N": 32, "tol": 1e-6, "seed": 0, "grid": {"radii": 5, "angles": 8, "rmax": 0.5}}

__all__ = ["RunConfig", "parse_config", "render", "run", "main"]


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration (all fields JSON-compatible)."""

    command: str
    action: str = None
    operands: tuple = ()
    kernel: dict = None
    specs: tuple = ()
    polynomial: tuple = ()
    point: tuple = (0.0, 0.0)
    grid: dict = field(default_factory=lambda: dict(DEFAULTS["grid"]))
    N: int = 32
    tol: float = 1e-6
    seed: int = 0
    output: str = None
    invariants: str = "ratio"
    necessary_only: bool = False


# ---------------------------------------------------------------------------
# normalization helpers (each appends to ``errors`` instead of raising)

def _num(x, what, errors, positive=False):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        errors.append(f"{what} must be a number, got {x!r}")
        return None
    x = float(x)
    if not math.isfinite(x) or (positive and x <= 0):
        errors.append(f"{what} must be {'positive and ' if positive else ''}finite, got {x!r}")
        return None
    return x


def _kernel(spec, what, errors):
    if not isinstance(spec, dict):
        errors.append(f"{what}: kernel spec must be an object, got {spec!r}")
        return None
    t = spec.get("type")
    if t not in KERNEL_TYPES:
        errors.append(f"{what}: malformed kernel spec, type must be one of {KERNEL_TYPES}, got {t!r}")
        return None
    radius = spec.get("radius", 0.8)
    r = _num(radius, f"{what}.radius", errors, positive=True)
    if r is not None and not r < 1:
        errors.append(f"{what}.radius must be < 1")
    out = {"type": t, "radius": r}
    if t == "binomial":
        out["lambda"] = _num(spec.get("lambda"), f"{what}.lambda", errors, positive=True)
        out["degree"] = spec.get("degree", 64)
    elif t == "exponential":
        out["degree"] = spec.get("degree", 64)
    else:
        vals = spec.get("values")
        if not isinstance(vals, list) or not vals:
            errors.append(f"{what}: malformed kernel spec, coeffs need a non-empty 'values' list")
            return None
        vs = [_num(v, f"{what}.values", errors, positive=True) for v in vals]
        out["values"] = vs
    if "degree" in out and (isinstance(out["degree"], bool) or not isinstance(out["degree"], int)
                            or out["degree"] < 1):
        errors.append(f"{what}.degree must be a positive integer")
    return out


def _mu_entry(x, what, errors):
    if isinstance(x, bool):
        errors.append(f"{what}: invalid entry {x!r}")
        return None
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else errors.append(f"{what}: non-finite entry")
    if isinstance(x, str):
        try:
            q = Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            errors.append(f"{what}: cannot parse entry {x!r}")
            return None
        return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
    errors.append(f"{what}: invalid entry {x!r}")
    return None


def _canonical_fraction(q):
    return q.numerator if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _mu(spec, what, errors):
    """Normalize a mu descriptor to explicit lower-triangular rows."""
    from .jets import mu_family, validate_mu

    if isinstance(spec, dict):
        fam, k = spec.get("family"), spec.get("k")
        if fam not in ("binomial", "inverse-factorial"):
            errors.append(f"{what}: unknown mu family {fam!r}")
            return None
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            errors.append(f"{what}: family needs a positive integer k")
            return None
        return [[_canonical_fraction(v) for v in row] for row in mu_family(fam, k)]
    if not isinstance(spec, list) or not spec or not all(isinstance(r, list) for r in spec):
        errors.append(f"{what}: mu must be a list of rows or a family object")
        return None
    k = len(spec)
    rows = []
    for p, r in enumerate(spec):
        if len(r) == k:
            if any(not (v == 0 or v == "0") for v in r[p + 1:]):
                errors.append(f"{what}: mu matrix not lower-triangular (row {p + 1})")
                return None
            r = r[: p + 1]
        elif len(r) != p + 1:
            errors.append(f"{what}: mu matrix not lower-triangular (row {p + 1} has {len(r)} entries)")
            return None
        rows.append([_mu_entry(v, what, errors) for v in r])
    if any(v is None for r in rows for v in r):
        return None
    v = validate_mu(rows)
    if not v.valid and what != "specs[validate]":
        errors.append(f"{what}: mu violates the multiplicativity constraints ({v.message})")
    return rows


def _operator(op, what, errors):
    if not isinstance(op, dict):
        errors.append(f"{what}: operator descriptor must be an object")
        return None
    t = op.get("type", "flag")
    if t not in OPERATOR_TYPES:
        errors.append(f"{what}: type must be one of {OPERATOR_TYPES}")
        return None
    out = {"type": t}
    if t == "jet":
        out["kernel"] = _kernel(op.get("kernel"), f"{what}.kernel", errors)
        mu = op.get("mu", [])
        if not isinstance(mu, list):
            errors.append(f"{what}.mu must be a list of superdiagonal multipliers")
            mu = []
        out["mu"] = [_num(m, f"{what}.mu", errors, positive=True) for m in mu]
    else:
        ks = op.get("kernels")
        if not isinstance(ks, list) or not ks:
            errors.append(f"{what}: needs a non-empty 'kernels' list")
            return None
        out["kernels"] = [_kernel(k, f"{what}.kernels[{i}]", errors) for i, k in enumerate(ks)]
        if t == "flag":
            mu = op.get("mu", [1.0] * (len(ks) - 1))
            if not isinstance(mu, list) or len(mu) != len(ks) - 1:
                errors.append(f"{what}: needs {len(ks) - 1} mu values")
                mu = []
            out["mu"] = [_num(m, f"{what}.mu", errors, positive=True) for m in mu]
            S = op.get("S", {})
            if not isinstance(S, dict):
                errors.append(f"{what}.S must map 'i,j' to a matrix of [re, im] pairs")
                S = {}
            out["S"] = {}
            for key, mat in sorted(S.items()):
                try:
                    i, j = (int(x) for x in key.split(","))
                    arr = np.asarray(mat, dtype=float)
                    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
                        raise ValueError
                except (ValueError, TypeError):
                    errors.append(f"{what}.S[{key!r}]: expected a square row-major matrix of [re, im] pairs")
                    continue
                out["S"][f"{i},{j}"] = arr.tolist()
    if "conjugate_seed" in op:
        s = op["conjugate_seed"]
        if isinstance(s, bool) or not isinstance(s, int):
            errors.append(f"{what}.conjugate_seed must be an integer")
        out["conjugate_seed"] = s
    return out


_ARITY = {"invariants": 1, "equiv": 2, "irred": 1}


def _validate(d):
    errors = []
    if not isinstance(d, dict):
        raise ConfigError(["config must be a JSON object"])
    known = set(RunConfig.__dataclass_fields__)
    for key in d:
        if key not in known:
            errors.append(f"unknown field {key!r}")
    cmd = d.get("command")
    if cmd not in COMMANDS:
        errors.append(f"unknown command {cmd!r}; expected one of {COMMANDS}")
    action = d.get("action")
    if cmd == "verify" and action not in VERIFY_ACTIONS:
        errors.append(f"verify requires an action in {VERIFY_ACTIONS}, got {action!r}")
    if cmd == "jet" and action not in JET_ACTIONS:
        errors.append(f"jet requires an action in {JET_ACTIONS}, got {action!r}")
    if cmd not in ("verify", "jet") and action is not None:
        errors.append(f"{cmd} takes no action, got {action!r}")

    grid = dict(DEFAULTS["grid"])
    g = d.get("grid", {})
    if not isinstance(g, dict):
        errors.append("grid must be an object with radii, angles, rmax")
        g = {}
    grid.update(g)
    for key in ("radii", "angles"):
        if isinstance(grid[key], bool) or not isinstance(grid[key], int) or grid[key] < 1:
            errors.append(f"grid.{key} must be a positive integer")
    rmax = _num(grid["rmax"], "grid.rmax", errors, positive=True)
    if rmax is not None and not rmax < 1:
        errors.append("grid must lie inside the unit disk (rmax < 1)")
    grid["rmax"] = rmax

    N = d.get("N", DEFAULTS["N"])
    if isinstance(N, bool) or not isinstance(N, int) or N < 4:
        errors.append(f"N must be an integer >= 4, got {N!r}")
    tol = _num(d.get("tol", DEFAULTS["tol"]), "tol", errors, positive=True)
    seed = d.get("seed", DEFAULTS["seed"])
    if isinstance(seed, bool) or not isinstance(seed, int):
        errors.append("seed must be an integer")
    output = d.get("output")
    if output is not None and not isinstance(output, str):
        errors.append("output must be a path string or null")
    inv = d.get("invariants", "ratio")
    if inv not in ("ratio", "theta"):
        errors.append("invariants must be 'ratio' or 'theta'")
    nec = d.get("necessary_only", False)
    if not isinstance(nec, bool):
        errors.append("necessary_only must be a boolean")

    kernel = None
    if d.get("kernel") is not None:
        kernel = _kernel(d["kernel"], "kernel", errors)
    ops = d.get("operands", [])
    if not isinstance(ops, list):
        errors.append("operands must be a list")
        ops = []
    operands = [_operator(op, f"operands[{i}]", errors) for i, op in enumerate(ops)]
    raw_specs = d.get("specs", [])
    if not isinstance(raw_specs, list):
        errors.append("specs must be a list of mu descriptors")
        raw_specs = []
    tag = "specs[validate]" if (cmd, action) == ("jet", "validate") else "specs"
    specs = [_mu(s, tag, errors) for s in raw_specs]
    poly = d.get("polynomial", [])
    if not isinstance(poly, list):
        errors.append("polynomial must be a list of coefficients")
        poly = []
    poly = [_num(c, "polynomial", errors) for c in poly]
    point = d.get("point", [0.0, 0.0])
    if not (isinstance(point, list) and len(point) == 2):
        errors.append("point must be [re, im]")
        point = [0.0, 0.0]
    point = [_num(c, "point", errors) for c in point]

    # arity and required inputs
    if cmd in _ARITY and len(ops) != _ARITY[cmd]:
        n = _ARITY[cmd]
        errors.append(f"{cmd} requires {'two operands' if n == 2 else 'one operand'}, got {len(ops)}")
    if cmd == "curvature" and kernel is None:
        errors.append("curvature requires a kernel")
    if cmd == "homog" and kernel is None and len(ops) != 1:
        errors.append("homog requires a kernel or one operand")
    if cmd == "jet":
        need = 2 if action == "classify" else 1
        if len(raw_specs) != need:
            errors.append(f"jet {action} requires {need} spec(s), got {len(raw_specs)}")
        if action in ("localize", "classify") and kernel is None:
            errors.append(f"jet {action} requires a kernel")
        if action == "action" and not poly:
            errors.append("jet action requires a polynomial")
    if errors:
        raise ConfigError(errors)
    return RunConfig(command=cmd, action=action, operands=tuple(operands), kernel=kernel,
                     specs=tuple(tuple(tuple(r) for r in s) for s in specs),
                     polynomial=tuple(poly), point=tuple(point), grid=grid, N=N, tol=tol, seed=seed,
                     output=output, invariants=inv, necessary_only=nec)


def parse_config(text):
    """Parse and validate a JSON run configuration.

    Parameters
    ----------
    text : str
        JSON object; see the README for the schema.

    Returns
    -------
    RunConfig

    Raises
    ------
    ConfigError
        Listing every validation error found.
    """
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"malformed JSON: {exc}"]) from exc
    return _validate(d)


def render(config):
    """Serialize a :class:`RunConfig` to canonical JSON text."""
    d = asdict(config)
    d["operands"] = list(config.operands)
    d["specs"] = [[list(r) for r in s] for s in config.specs]
    d["polynomial"] = list(config.polynomial)
    d["point"] = list(config.point)
    return json.dumps(d, sort_keys=True, indent=2) + "\n"


# ---------------------------------------------------------------------------
# building objects

def _build_kernel(spec):
    from .kernels import binomial_kernel, coefficient_kernel, exponential_kernel

    if spec["type"] == "binomial":
        return binomial_kernel(spec["lambda"], spec["degree"], spec["radius"])
    if spec["type"] == "exponential":
        return exponential_kernel(spec["degree"], spec["radius"])
    return coefficient_kernel(spec["values"], spec["radius"])


def _build_operator(op, N):
    from .flags import build_flag, build_jet_model, build_shift_block, direct_sum, random_phases

    if op["type"] == "jet":
        T = build_jet_model(_build_kernel(op["kernel"]), op["mu"], N)
    elif op["type"] == "sum":
        return direct_sum(*[build_shift_block(_build_kernel(k), N) for k in op["kernels"]])
    else:
        extra = {}
        for key, mat in op["S"].items():
            i, j = (int(x) for x in key.split(","))
            arr = np.asarray(mat, dtype=float)
            extra[(i, j)] = arr[..., 0] + 1j * arr[..., 1]
        kernels = [_build_kernel(k) for k in op["kernels"]]
        adjacent = {k: v for k, v in extra.items() if k[1] == k[0] + 1}
        T = build_flag(kernels, op["mu"], N, extra={k: v for k, v in extra.items() if k[1] >= k[0] + 2})
        if adjacent:
            from .flags import FlagOperator
            S = dict(T.intertwiners)
            S.update(adjacent)
            T = FlagOperator(T.blocks, S)
    if "conjugate_seed" in op:
        T = T.conjugate(random_phases(T, np.random.default_rng(op["conjugate_seed"])))
    return T


def _grid(config):
    g = config.grid
    return disk_grid(g["radii"], g["angles"], g["rmax"])


def _fmt(x):
    return "%.17g" % x


def _csv(header, rows):
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) if isinstance(v, (float, np.floating)) else str(v) for v in r) + "\n")
    return buf.getvalue()


def _kv(pairs):
    return "".join(f"{k}: {_fmt(v) if isinstance(v, float) else v}\n" for k, v in pairs)


# ---------------------------------------------------------------------------
# commands

def _cmd_curvature(c):
    from .geometry import curvature_line

    K = _build_kernel(c.kernel)
    rows = [[w.real, w.imag, curvature_line(K, w).value] for w in _grid(c)]
    return 0, _csv(["re", "im", "kappa"], rows), ""


def _cmd_invariants(c):
    from .invariants import invariant_report

    T = _build_operator(c.operands[0], c.N)
    r = invariant_report(T, _grid(c))
    summary = _kv([("n", T.n), ("N", T.N), ("strict_bidiagonal", str(T.strict_bidiagonal).lower())]
                  + [(f"extra_ratio_{k}_{l}_max", float(np.max(v))) for (k, l), v in sorted(r.extra_ratios.items())])
    return 0, _csv(r.columns(), r.rows()), summary


def _cmd_equiv(c):
    from .invariants import decide_equivalence

    A, B = (_build_operator(op, c.N) for op in c.operands)
    v = decide_equivalence(A, B, _grid(c), c.tol, c.invariants, c.necessary_only)
    text = _kv([("equivalent", str(v.equivalent).lower()), ("invariant_set", v.invariant_set),
                ("necessary_only", str(v.necessary_only).lower()),
                ("max_curvature_gap", float(v.max_curvature_gap)), ("max_ratio_gap", float(v.max_ratio_gap)),
                ("tolerance", float(v.tolerance_used))])
    return (0 if v.equivalent else 1), text, ""


def _cmd_homog(c):
    from .invariants import is_homogeneous_flag2, is_homogeneous_line

    if c.kernel is not None and not c.operands:
        lam = is_homogeneous_line(_build_kernel(c.kernel), _grid(c), c.tol)
        text = _kv([("homogeneous", str(lam is not None).lower())] + ([("lambda", lam)] if lam is not None else []))
        return (0 if lam is not None else 1), text, ""
    T = _build_operator(c.operands[0], c.N)
    d = is_homogeneous_flag2(T, _grid(c), c.tol)
    pairs = [("homogeneous", str(d.homogeneous).lower()), ("failed_condition", d.failed_condition or "none"),
             ("lambda_0", d.lambdas[0] if d.lambdas[0] is not None else "none"),
             ("lambda_1", d.lambdas[1] if d.lambdas[1] is not None else "none"),
             ("alpha", d.alpha if d.alpha is not None else "none"), ("detail", d.detail)]
    return (0 if d.homogeneous else 1), _kv(pairs), ""


def _cmd_irred(c):
    from .flags import FlagOperator
    from .invariants import sylvester_range_test
    from .verification import irreducibility_check

    T = _build_operator(c.operands[0], c.N)
    v = irreducibility_check(T, rng=c.seed)
    pairs = [("status", v.status), ("star_commutant_dimension", v.star_commutant_dimension),
             ("seeds_converged", f"{v.seeds_converged}/{v.seeds}")]
    if v.commutation_residual is not None:
        pairs.append(("projection_rank", int(round(np.trace(v.projection).real))))
        pairs.append(("commutation_residual", float(v.commutation_residual)))
    if isinstance(T, FlagOperator) and T.n == 2:
        s = sylvester_range_test(T.blocks[0], T.blocks[1], T.intertwiners[(0, 1)])
        pairs += [("sylvester_residual", float(s.residual)),
                  ("strongly_irreducible", f"{str(s.strongly_irreducible).lower()} ({s.label})")]
    code = {"irreducible": 0, "reducible": 1}.get(v.status, 2)
    return code, _kv(pairs), ""


def _cmd_verify(c):
    from .harness import exit_code, format_report, run_suite

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        results = run_suite(c.action, c.seed)
    return exit_code(results), format_report(results, f"verify {c.action} seed={c.seed}"), ""


def _cmd_jet(c):
    from .jets import (JetSpec, classify_localizations, find_violating_monomials, jet_action,
                       localization_kernel, validate_mu)

    if c.action == "validate":
        rows = [list(r) for r in c.specs[0]]
        v = validate_mu(rows)
        pairs = [("valid", str(v.valid).lower()), ("exact", str(v.exact).lower())]
        if not v.valid:
            pairs.append(("violation", v.violation))
            pairs.append(("message", v.message))
            hit = find_violating_monomials(rows)
            if hit is not None:
                pairs.append(("monomial_pair", f"z^{hit[0]}, z^{hit[1]} entry {hit[2]}"))
        return (0 if v.valid else 1), _kv(pairs), ""
    specs = [JetSpec(s) for s in c.specs]
    if c.action == "action":
        w = complex(*c.point)
        J = jet_action(specs[0], list(c.polynomial), w)
        rows = [[i + 1, j + 1, float(J[i, j].real), float(J[i, j].imag)] for i in range(J.shape[0])
                for j in range(J.shape[1])]
        return 0, _csv(["i", "j", "re", "im"], rows), ""
    K = _build_kernel(c.kernel)
    if c.action == "localize":
        rows = []
        for w in _grid(c):
            L = localization_kernel(specs[0], K, w, w)
            rows += [[w.real, w.imag, i + 1, j + 1, float(L[i, j].real), float(L[i, j].imag)]
                     for i in range(L.shape[0]) for j in range(L.shape[1])]
        return 0, _csv(["re", "im", "i", "j", "value_re", "value_im"], rows), ""
    v = classify_localizations(specs[0], specs[1], K, c.N, _grid(c), c.tol)
    text = _kv([("isomorphic", str(v.isomorphic).lower()), ("superdiagonals_equal", str(v.expected).lower()),
                ("consistent", str(v.consistent).lower()), ("max_curvature_gap", float(v.max_curvature_gap)),
                ("max_ratio_gap", float(v.max_ratio_gap))])
    return (0 if v.isomorphic else 1), text, ""


_COMMANDS = {"curvature": _cmd_curvature, "invariants": _cmd_invariants, "equiv": _cmd_equiv,
             "homog": _cmd_homog, "irred": _cmd_irred, "verify": _cmd_verify, "jet": _cmd_jet}


def run(config, stdout=None, stderr=None):
    """Execute a validated configuration.

    Returns
    -------
    int
        Exit code: 0 success / positive verdict, 1 negative verdict,
        2 inconclusive verdict or computation error.
    """
    stdout = stdout if stdout is not None else sys.stdout
    stderr = stderr if stderr is not None else sys.stderr
    try:
        code, text, summary = _COMMANDS[config.command](config)
    except CDFlagsError as exc:
        stderr.write(f"error: {exc}\n")
        return 2
    if config.output:
        with open(config.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    if summary:
        stderr.write(summary)
    return code


def _kernel_shorthand(s):
    """``binomial:2``, ``exponential`` or ``coeffs:1,2,3``."""
    name, _, arg = s.partition(":")
    if name == "binomial":
        return {"type": "binomial", "lambda": float(arg)}
    if name in ("exp", "exponential"):
        return {"type": "exponential"}
    if name == "coeffs":
        return {"type": "coeffs", "values": [float(v) for v in arg.split(",")]}
    raise argparse.ArgumentTypeError(f"unknown kernel shorthand {s!r}")


def _grid_shorthand(s):
    try:
        r, a = s.lower().replace("×", "x").split("x")
        return int(r), int(a)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"grid must look like RxA, got {s!r}") from exc


def build_parser():
    p = argparse.ArgumentParser(prog="cdflags", description=__doc__.split("\n\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("action", nargs="?")
    p.add_argument("--config", help="JSON config file; its values override flags")
    p.add_argument("--grid", type=_grid_shorthand, help="radii x angles, e.g. 5x8")
    p.add_argument("--rmax", type=float)
    p.add_argument("--dim", type=int, help="truncation size N")
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output path (default: standard output)")
    p.add_argument("--kernel", type=_kernel_shorthand, help="binomial:LAMBDA, exponential or coeffs:a0,a1,..")
    p.add_argument("--family", choices=("binomial", "inverse-factorial"), help="named mu family (jet)")
    p.add_argument("--k", type=int, help="order of the named mu family")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    d = {"command": args.command}
    if args.action is not None:
        d["action"] = args.action
    grid = {}
    if args.grid:
        grid["radii"], grid["angles"] = args.grid
    if args.rmax is not None:
        grid["rmax"] = args.rmax
    if grid:
        d["grid"] = grid
    for flag, key in (("dim", "N"), ("tol", "tol"), ("seed", "seed"), ("out", "output"), ("kernel", "kernel")):
        if getattr(args, flag) is not None:
            d[key] = getattr(args, flag)
    if args.family is not None:
        d["specs"] = [{"family": args.family, "k": args.k if args.k is not None else 2}]
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
            if not isinstance(file_cfg, dict):
                raise ConfigError(["config file must contain a JSON object"])
            for key in ("command", "action"):
                if key in file_cfg and key in d and file_cfg[key] != d[key]:
                    raise ConfigError([f"config file {key} {file_cfg[key]!r} conflicts with command line {d[key]!r}"])
            if "grid" in file_cfg and isinstance(file_cfg["grid"], dict) and "grid" in d:
                file_cfg["grid"] = {**d["grid"], **file_cfg["grid"]}
            d.update(file_cfg)
        config = _validate(json.loads(json.dumps(d)))
    except (ConfigError, OSError, json.JSONDecodeError) as exc:
        errs = exc.errors if isinstance(exc, ConfigError) else [str(exc)]
        for e in errs:
            sys.stderr.write(f"config error: {e}\n")
        return 2
    return run(config)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
