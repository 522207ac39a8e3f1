"""Command-line front end: ``deformedqm <command> [flags]``.

Commands: spectrum, corrections, eigenfunction, extensions-check,
minimal-length.  Settings come from built-in defaults, then a ``--recipe``
preset, then a ``--config`` file of ``key = value`` lines, then flags.
Output is CSV (17 significant digits) or JSON on stdout or ``--output``.

Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 check failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .algebra import (
    AlgebraContext,
    Deformation,
    ExpCbrt,
    ExpSqrt,
    PhysicalParams,
    PolyMinus,
    PolyPlus,
    Undeformed,
    compute_b,
)
from .eigenfunctions import bound_state, integral_equation_residual, state_norm
from .errors import (
    BoundaryConditionError,
    DomainError,
    FitError,
    PreconditionError,
    QuadratureError,
    RootFindingError,
)
from .extensions import (
    GridFunction,
    PositionEigenstate,
    apply_inverse_X,
    apply_inverse_X_spectral,
    apply_X,
    completeness_check,
    inverse_constant,
    orthonormality_defect,
    parity_map,
    parity_operator_defect,
    parity_sets_match,
)
from .numerics import QuadratureSpec, RootSpec
from .spectrum import (
    ExtensionParam,
    closed_form_energy,
    closed_form_solution,
    correction_vs_numeric,
    dq2_dbeta,
    formula_coefficient,
    leading_correction,
    nominal_exponent,
    solve_level,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_CHECK = 4

COMMANDS = ("spectrum", "corrections", "eigenfunction", "extensions-check", "minimal-length")
FAMILIES = ("none", "kempf", "polyplus", "polyminus", "expsqrt", "expcbrt")

DEFAULTS = {
    "family": "kempf",
    "beta": None,
    "k": None,
    "delta": None,
    "A": None,
    "levels": "0..3",
    "hbar": 1.0,
    "mass": 1.0,
    "alpha": 1.0,
    "tol": 1e-12,
    "format": "csv",
    "output": None,
    "n": 0,
    "samples": 101,
    "N": 200,
    "grid": 1025,
    "beta_range": None,
}

# each recipe reproduces one worked example; the tables carry the oracle columns
RECIPES = {
    "1a": ("spectrum", {"family": "kempf", "beta": 0.01, "delta": 0.5, "levels": "0..5"}),
    "1b": ("spectrum", {"family": "polyplus", "k": 1.5, "beta": 0.01, "delta": 0.5, "levels": "0..5"}),
    "1c": ("corrections", {"family": "polyplus", "k": 2.0, "beta": 1e-6, "delta": 0.5, "levels": "0..2"}),
    "2a": ("spectrum", {"family": "polyminus", "k": -1.0, "beta": 0.01, "delta": 0.5, "levels": "0..5"}),
    "2b": ("spectrum", {"family": "polyminus", "k": 0.5, "beta": 0.01, "delta": 0.5, "levels": "0..5"}),
    "2c": ("corrections", {"family": "polyminus", "k": 0.75, "beta": 1e-6, "delta": 0.5, "levels": "0..2"}),
    "3": ("corrections", {"family": "expcbrt", "beta": 1e-10, "delta": 0.5, "levels": "0..2"}),
    "3-expsqrt": ("corrections", {"family": "expsqrt", "beta": 1e-10, "delta": 0.5, "levels": "0..2"}),
}

# beta grids of the scaling fits: the exponential families need smaller beta
# before their relative subleading terms fade
_FIT_RANGES = {"expsqrt": (1e-12, 1e-8), "expcbrt": (1e-12, 1e-8)}
_FIT_RANGE_DEFAULT = (1e-8, 1e-4)
_FIT_POINTS = 9


class ConfigError(Exception):
    """Invalid or inconsistent settings (exit code 2)."""


class CheckFailure(Exception):
    """A verification report exceeded its thresholds (exit code 4)."""

    def __init__(self, message, table):
        super().__init__(message)
        self.table = table


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RunConfig:
    command: str
    family: Deformation
    params: PhysicalParams
    ext: ExtensionParam
    levels: tuple
    quad: QuadratureSpec
    root: RootSpec
    fmt: str
    output: str | None
    n: int
    samples: int
    N: int
    grid: int
    beta_range: tuple | None
    recipe: str | None = None
    raw: dict = field(default_factory=dict)


def parse_levels(text) -> tuple:
    """``"a..b"`` (inclusive) or a single integer."""
    s = str(text).strip()
    try:
        if ".." in s:
            lo, hi = s.split("..", 1)
            lo, hi = int(lo), int(hi)
        else:
            lo = hi = int(s)
    except ValueError as exc:
        raise ConfigError(f"levels must look like a..b, got {text!r}") from exc
    if hi < lo:
        raise ConfigError(f"empty level range {text!r}")
    return tuple(range(lo, hi + 1))


def parse_range(text) -> tuple:
    s = str(text).strip()
    try:
        lo, hi = (float(x) for x in s.split("..", 1))
    except ValueError as exc:
        raise ConfigError(f"beta range must look like lo..hi, got {text!r}") from exc
    if not (0 < lo < hi):
        raise ConfigError("beta range needs 0 < lo < hi")
    return lo, hi


def read_config_file(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; keys use flag names."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{num}: unknown key {key!r}")
        out[key] = value
    return out


def _num(settings, key, kind=float):
    v = settings[key]
    if v is None:
        return None
    try:
        return kind(v)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be a number, got {v!r}") from exc


def build_family(name: str, beta, k) -> Deformation:
    if name not in FAMILIES:
        raise ConfigError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    if name == "none":
        return Undeformed()
    if beta is None:
        raise ConfigError(f"family {name!r} needs --beta")
    try:
        if name == "kempf":
            if k is not None and k != 1.0:
                raise ConfigError("kempf fixes k = 1; use --family polyplus for other k")
            return PolyPlus(beta, 1.0)
        if name == "polyplus":
            return PolyPlus(beta, 1.0 if k is None else k)
        if name == "polyminus":
            return PolyMinus(beta, 0.5 if k is None else k)
        if k is not None:
            raise ConfigError(f"family {name!r} takes no k")
        return ExpSqrt(beta) if name == "expsqrt" else ExpCbrt(beta)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def resolve(command: str, flags: dict) -> RunConfig:
    """Merge defaults, recipe, config file and flags into a validated config."""
    settings = dict(DEFAULTS)
    recipe = flags.get("recipe")
    if recipe is not None:
        if recipe not in RECIPES:
            raise ConfigError(f"unknown recipe {recipe!r}; choose from {', '.join(RECIPES)}")
        rcmd, preset = RECIPES[recipe]
        if rcmd != command:
            raise ConfigError(f"recipe {recipe!r} runs under the {rcmd!r} command")
        settings.update(preset)
    if flags.get("config"):
        settings.update(read_config_file(flags["config"]))
    for key in DEFAULTS:
        if flags.get(key) is not None:
            settings[key] = flags[key]

    if settings["delta"] is not None and settings["A"] is not None:
        raise ConfigError("--delta and --A are mutually exclusive")
    try:
        if settings["A"] is not None:
            ext = ExtensionParam.from_A(_num(settings, "A"))
        else:
            ext = ExtensionParam(0.5 if settings["delta"] is None else _num(settings, "delta"))
        params = PhysicalParams(_num(settings, "hbar"), _num(settings, "mass"), _num(settings, "alpha"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    family = build_family(str(settings["family"]), _num(settings, "beta"), _num(settings, "k"))
    tol = _num(settings, "tol")
    if not (tol is not None and 0 < tol < 1e-2):
        raise ConfigError("tol must lie in (0, 1e-2)")
    fmt = str(settings["format"])
    if fmt not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    ints = {}
    for key, lo in (("n", None), ("samples", 2), ("N", 0), ("grid", 16)):
        v = _num(settings, key, float)
        if v is None or v != int(v) or (lo is not None and v < lo):
            raise ConfigError(f"{key} must be an integer" + (f" >= {lo}" if lo is not None else ""))
        ints[key] = int(v)
    beta_range = None if settings["beta_range"] is None else parse_range(settings["beta_range"])
    return RunConfig(
        command=command,
        family=family,
        params=params,
        ext=ext,
        levels=parse_levels(settings["levels"]),
        quad=QuadratureSpec(rel_tol=tol, abs_tol=min(1e-14, tol)),
        root=RootSpec(tol=tol),
        fmt=fmt,
        output=settings["output"],
        n=ints["n"],
        samples=ints["samples"],
        N=ints["N"],
        grid=ints["grid"],
        beta_range=beta_range,
        recipe=recipe,
        raw=settings,
    )


def _context(cfg: RunConfig) -> AlgebraContext:
    return AlgebraContext.build(cfg.family, cfg.params, cfg.quad)


def _check_levels(cfg: RunConfig, levels):
    for n in levels:
        nu = n + cfg.ext.delta
        if nu == 0:
            raise ConfigError("level n = 0 with delta = 0 has no bound state (excluded pair)")
        if (nu > 0) != (cfg.params.alpha > 0):
            raise ConfigError(f"level n = {n} needs n + delta with the sign of alpha")


# ---------------------------------------------------------------------------
# tables


@dataclass
class Table:
    columns: list
    rows: list
    summary: dict = field(default_factory=dict)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, np.integer):
        return int(v)
    return v


def render(table: Table, fmt: str) -> str:
    if fmt == "json":
        doc = {
            "columns": table.columns,
            "rows": [{c: _json_value(r.get(c)) for c in table.columns} for r in table.rows],
            "summary": {k: _json_value(v) for k, v in table.summary.items()},
        }
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    buf.write(",".join(table.columns) + "\n")
    for r in table.rows:
        buf.write(",".join(_fmt(r.get(c)) for c in table.columns) + "\n")
    for k, v in table.summary.items():
        buf.write(f"# {k},{_fmt(v)}\n")
    return buf.getvalue()


def _rel(a, b):
    if a is None or b is None:
        return None
    return abs(a - b) / abs(b) if b != 0 else abs(a - b)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(cfg: RunConfig) -> Table:
    """Levels with closed-form comparison where one is known."""
    _check_levels(cfg, cfg.levels)
    ctx = _context(cfg)
    rows = []
    for n in cfg.levels:
        lvl = solve_level(ctx, n, cfg.ext, cfg.quad, cfg.root)
        closed_E = oracle_res = None
        try:
            form = closed_form_energy(cfg.family, cfg.params, n, cfg.ext)
        except PreconditionError:
            form = None
        if callable(form):
            oracle_res = form(lvl.q)
            closed_E = closed_form_solution(cfg.family, cfg.params, n, cfg.ext, cfg.root)
        elif form is not None:
            closed_E = form
        rows.append({
            "n": n,
            "delta": cfg.ext.delta,
            "q": lvl.q,
            "E": lvl.E,
            "closed_form_E": closed_E,
            "rel_diff": _rel(lvl.E, closed_E),
            "oracle_residual": oracle_res,
            "residual": lvl.residual,
        })
    summary = {"family": cfg.family.label(), "b": ctx.b, "l0": ctx.l0}
    diffs = [r["rel_diff"] for r in rows if r["rel_diff"] is not None]
    if diffs:
        summary["max_rel_diff"] = max(diffs)
    res = [abs(r["oracle_residual"]) for r in rows if r["oracle_residual"] is not None]
    if res:
        summary["max_oracle_residual"] = max(res)
    if cfg.recipe:
        summary["recipe"] = cfg.recipe
    cols = ["n", "delta", "q", "E", "closed_form_E", "rel_diff", "oracle_residual", "residual"]
    return Table(cols, rows, summary)


def _fit_grid(cfg: RunConfig):
    lo, hi = cfg.beta_range or _FIT_RANGES.get(cfg.family.name, _FIT_RANGE_DEFAULT)
    return np.logspace(math.log10(lo), math.log10(hi), _FIT_POINTS)


def cmd_corrections(cfg: RunConfig) -> Table:
    """Leading-correction formula against a numeric scaling fit, plus the beta derivative check."""
    if isinstance(cfg.family, Undeformed):
        raise ConfigError("corrections need a deformed family")
    try:
        p0 = nominal_exponent(cfg.family)
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from exc
    _check_levels(cfg, cfg.levels)
    beta = cfg.family.beta
    ctx = _context(cfg)
    grid = _fit_grid(cfg)
    rows = []
    for n in cfg.levels:
        fit = correction_vs_numeric(cfg.family, cfg.params, n, cfg.ext, grid)
        coef = formula_coefficient(cfg.family, cfg.params, n, cfg.ext)
        dE_formula = leading_correction(cfg.family, cfg.params, n, cfg.ext)
        if fit.offset is not None:
            dE_fit = beta**fit.exponent * (fit.offset + fit.coefficient * math.log(beta))
        else:
            dE_fit = fit.coefficient * beta**p0
        lvl = solve_level(ctx, n, cfg.ext, cfg.quad, cfg.root)
        deriv = dq2_dbeta(ctx, lvl.q, cfg.quad)
        h = 1e-5 * beta
        qp = solve_level(AlgebraContext.build(cfg.family.with_beta(beta + h), cfg.params, cfg.quad),
                         n, cfg.ext, cfg.quad, cfg.root).q
        qm = solve_level(AlgebraContext.build(cfg.family.with_beta(beta - h), cfg.params, cfg.quad),
                         n, cfg.ext, cfg.quad, cfg.root).q
        fd = (qp * qp - qm * qm) / (2.0 * h)
        rows.append({
            "n": n,
            "dE_formula": dE_formula,
            "dE_fit": dE_fit,
            "exponent_fit": fit.exponent,
            "exponent_nominal": p0,
            "coef_formula": coef,
            "coef_fit": fit.coefficient,
            "coef_rel_diff": None if coef == 0 else _rel(fit.coefficient, coef),
            "dq2_dbeta": deriv,
            "fd_check": _rel(deriv, fd),
        })
    summary = {
        "family": cfg.family.label(),
        "fit_beta_min": float(grid[0]),
        "fit_beta_max": float(grid[-1]),
        "fit_points": len(grid),
    }
    if cfg.recipe:
        summary["recipe"] = cfg.recipe
    cols = ["n", "dE_formula", "dE_fit", "exponent_fit", "exponent_nominal", "coef_formula",
            "coef_fit", "coef_rel_diff", "dq2_dbeta", "fd_check"]
    return Table(cols, rows, summary)


def cmd_eigenfunction(cfg: RunConfig) -> Table:
    """Sampled modulus and phase of level ``n`` on ``[-b, b]``."""
    _check_levels(cfg, (cfg.n,))
    ctx = _context(cfg)
    if math.isinf(ctx.b):
        raise ConfigError("eigenfunction sampling needs a finite pseudo-momentum bound")
    lvl = solve_level(ctx, cfg.n, cfg.ext, cfg.quad, cfg.root)
    state = bound_state(ctx, lvl, cfg.quad, cfg.root)
    p = np.linspace(-ctx.b, ctx.b, cfg.samples)
    p[0], p[-1] = -ctx.b, ctx.b
    mod, ph = state.modulus_phase(p)
    rows = [{"p": float(x), "abs_amplitude": float(m), "phase": float(f)} for x, m, f in zip(p, mod, ph)]
    residual = integral_equation_residual(state, cfg.ext)
    summary = {
        "family": cfg.family.label(),
        "n": cfg.n,
        "delta": cfg.ext.delta,
        "E": lvl.E,
        "q": lvl.q,
        "C": state.C,
        "norm": state_norm(state),
        "residual": residual,
        "residual_over_E": residual / abs(lvl.E),
        "phase_b": state.phase_b,
    }
    return Table(["p", "abs_amplitude", "phase"], rows, summary)


# thresholds of the extensions report
_THRESHOLDS = {
    "orthonormality_formula": 1e-12,
    "orthonormality_quadrature": 1e-12,
    "parseval_defect": 1e-4,
    "inverse_two_sided": 1e-8,
    "parity_operator": 1e-10,
}


def _bump(b):
    return lambda p: (1.0 - (p / b) ** 2) ** 3 * (1.0 + 0.5 * np.sin(p / b))


def cmd_extensions_check(cfg: RunConfig) -> Table:
    """Self-adjoint extension invariants for the family's bound ``b``."""
    ctx = _context(cfg)
    if math.isinf(ctx.b):
        raise ConfigError("no discrete position eigenbasis: the minimal length is zero")
    b, ext, hbar = ctx.b, cfg.ext, cfg.params.hbar
    rows = []

    def add(name, value, threshold, status=None):
        if status is None:
            status = "pass" if value <= threshold else "fail"
        rows.append({"check": name, "value": value, "threshold": threshold, "status": status})

    f_err, q_err = orthonormality_defect(b, ext, 10, hbar)
    add("orthonormality_formula", f_err, _THRESHOLDS["orthonormality_formula"])
    add("orthonormality_quadrature", q_err, _THRESHOLDS["orthonormality_quadrature"])
    bump = GridFunction.from_function(_bump(b), b, cfg.grid)
    add("parseval_defect", completeness_check(ext, bump, cfg.N), _THRESHOLDS["parseval_defect"])

    if ext.delta == 0.0:
        add("inverse_two_sided", None, _THRESHOLDS["inverse_two_sided"], "skipped: 1/X undefined at delta = 0")
        add("inverse_integral_vs_spectral", None, None, "skipped: 1/X undefined at delta = 0")
    else:
        grid = 513
        combo = GridFunction(np.zeros(grid), b)
        for n, c in zip(range(-2, 3), (1.0, 0.5 - 0.25j, -0.75, 0.3j, 0.2 + 0.1j)):
            combo = combo + PositionEigenstate(n, ext, b, hbar).on_grid(grid).scale(c)
        err1 = (apply_X(apply_inverse_X(combo, ext, hbar), ext, hbar) - combo).max_abs()
        err2 = (apply_inverse_X(apply_X(combo, ext, hbar), ext, hbar) - combo).max_abs()
        add("inverse_two_sided", max(err1, err2), _THRESHOLDS["inverse_two_sided"])
        spectral, tail = apply_inverse_X_spectral(bump, ext, hbar)
        diff = (spectral - apply_inverse_X(bump, ext, hbar)).l2_norm()
        add("inverse_integral_vs_spectral", diff, 2.0 * tail + 1e-10)
    if ext.delta == 0.5:
        c = inverse_constant(1.0, ext, hbar)
        add("c_half_real_part", abs(c.real), 0.0)

    partner = parity_map(ext)
    test = PositionEigenstate(1, partner, b, hbar).on_grid(64)
    add("parity_operator", parity_operator_defect(test, ext, hbar), _THRESHOLDS["parity_operator"])
    match = parity_sets_match(ext)
    rows.append({"check": "parity_sets", "value": 1.0 if match else 0.0, "threshold": 1.0,
                 "status": "pass" if match else "fail"})

    summary = {"family": cfg.family.label(), "delta": ext.delta, "b": b, "l0": ctx.l0, "N": cfg.N}
    table = Table(["check", "value", "threshold", "status"], rows, summary)
    failed = [r["check"] for r in rows if r["status"] == "fail"]
    summary["all_pass"] = not failed
    if failed:
        raise CheckFailure("checks failed: " + ", ".join(failed), table)
    return table


def cmd_minimal_length(cfg: RunConfig) -> Table:
    ctx = _context(cfg)
    row = {
        "family": cfg.family.label(),
        "a": cfg.family.a,
        "b": ctx.b,
        "l0": ctx.l0,
        "b_numeric": compute_b(cfg.family, cfg.quad) if cfg.family.b_closed() is not None else None,
    }
    return Table(["family", "a", "b", "l0", "b_numeric"], [row])


_DISPATCH = {
    "spectrum": cmd_spectrum,
    "corrections": cmd_corrections,
    "eigenfunction": cmd_eigenfunction,
    "extensions-check": cmd_extensions_check,
    "minimal-length": cmd_minimal_length,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deformedqm",
        description="Coulomb bound states in deformed Heisenberg algebras with minimal length.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--family", choices=FAMILIES)
        p.add_argument("--beta", type=float)
        p.add_argument("--k", type=float)
        grp = p.add_mutually_exclusive_group()
        grp.add_argument("--delta", type=float)
        grp.add_argument("--A", type=float)
        p.add_argument("--levels", help="inclusive level range a..b")
        p.add_argument("--hbar", type=float)
        p.add_argument("--mass", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--tol", type=float)
        p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--output", help="write here instead of stdout")
        p.add_argument("--recipe", choices=tuple(RECIPES))
        p.add_argument("--config", help="key = value settings file; flags override it")
        if name == "eigenfunction":
            p.add_argument("--n", type=int)
            p.add_argument("--samples", type=int)
        if name == "extensions-check":
            p.add_argument("--N", type=int, help="Parseval truncation")
            p.add_argument("--grid", type=int, help="samples of the Parseval test function")
        if name == "corrections":
            p.add_argument("--beta-range", dest="beta_range", help="fit grid lo..hi")
    return parser


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    flags = {k: v for k, v in vars(args).items() if k != "command"}
    try:
        cfg = resolve(args.command, flags)
        table = _DISPATCH[args.command](cfg)
    except CheckFailure as exc:
        _emit(render(exc.table, cfg.fmt), cfg.output)
        print(f"deformedqm: {exc}", file=sys.stderr)
        return EXIT_CHECK
    except (ConfigError, PreconditionError, DomainError, BoundaryConditionError) as exc:
        print(f"deformedqm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, RootFindingError, FitError, ArithmeticError) as exc:
        print(f"deformedqm: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _emit(render(table, cfg.fmt), cfg.output)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
