"""Command-line front end.

Usage::

    kkmfix check    --config problem.ini
    kkmfix solve    --config problem.ini [--override-conditions]
    kkmfix vi       [--config vi.ini]
    kkmfix kkm      [--scenario canonical] [--m 20] [--tol 1e-9]
    kkmfix selftest

Exit codes: 0 success, 2 conditions violated, 3 non-convergence (or a failed
self-test), 4 configuration or parse error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import math
import sys
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import convex, kkm, vi
from .errors import (
    ConditionsViolatedError,
    KKMFixError,
    NotApplicableError,
    ProjectionNonconvergenceError,
)
from .fixpoint import IterationConfig
from .fredholm import IntegralProblem, Kernel, check_conditions, solve
from .operators import Affine, ResidualOperator, Rotation
from .space import Element, Space, make_grid

EXIT_OK = 0
EXIT_CONDITIONS = 2
EXIT_NONCONVERGENCE = 3
EXIT_CONFIG = 4

KKM_SCENARIOS = ("canonical", "threshold-negative", "p-mapping-rotation")

log = logging.getLogger(__name__)


class ConfigError(KKMFixError):
    pass


# ---------------------------------------------------------------- config


def load_config(path: Optional[str]) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    if path is None:
        return cp
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file {path} not found")
    try:
        cp.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    cp.base_dir = p.parent  # type: ignore[attr-defined]
    return cp


def _get(cp, section, key, default=None, required=False):
    if cp.has_option(section, key):
        return cp.get(section, key).strip()
    if required:
        raise ConfigError(f"missing required field [{section}] {key}")
    return default


def _real(cp, section, key, default=None, required=False) -> Optional[float]:
    raw = _get(cp, section, key, None, required)
    if raw is None:
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a real number") from None
    if not math.isfinite(value):
        raise ConfigError(f"[{section}] {key} must be finite")
    return value


def _int(cp, section, key, default):
    value = _real(cp, section, key, None)
    if value is None:
        return default
    if value != int(value):
        raise ConfigError(f"[{section}] {key} must be an integer")
    return int(value)


def _vector(raw: str, what: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in raw.replace(",", " ").split()])
    except ValueError:
        raise ConfigError(f"{what} = {raw!r} is not a list of reals") from None


def _read_values(cp, name: str) -> np.ndarray:
    base = getattr(cp, "base_dir", Path("."))
    path = Path(name)
    if not path.is_absolute():
        path = base / path
    try:
        lines = [ln.strip() for ln in path.read_text().splitlines() if ln.strip()]
        values = np.array([float(ln) for ln in lines])
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read node values from {path}: {exc}") from exc
    if not np.all(np.isfinite(values)):
        raise ConfigError(f"{path} contains non-finite values")
    return values


def problem_from_config(cp) -> IntegralProblem:
    a = _real(cp, "problem", "a", required=True)
    b = _real(cp, "problem", "b", required=True)
    lam = _real(cp, "problem", "lambda", required=True)
    rule = _get(cp, "grid", "rule", "gauss-legendre")
    n = _int(cp, "grid", "n", 64)
    grid = make_grid(a, b, n, rule)

    kernel_file = _get(cp, "problem", "kernel_file")
    if kernel_file is not None:
        values = _read_values(cp, kernel_file)
        if values.size != grid.n * grid.n:
            raise ConfigError(f"kernel file has {values.size} values, need {grid.n ** 2}")
        kernel = Kernel(values.reshape(grid.n, grid.n))
    else:
        kernel = Kernel(_get(cp, "problem", "kernel", required=True))

    f_file = _get(cp, "problem", "f_file")
    if f_file is not None:
        f = _read_values(cp, f_file)
        if f.size != grid.n:
            raise ConfigError(f"f file has {f.size} values, need {grid.n}")
    else:
        f = _get(cp, "problem", "f", required=True)
    p = IntegralProblem(a, b, lam, kernel, f, grid)
    # force evaluation so expression errors surface as config errors
    p.kernel_matrix, p.f_values
    return p


def iteration_config(cp, default_tol=1e-10) -> IterationConfig:
    return IterationConfig(
        alpha=_real(cp, "solver", "alpha", 0.5),
        max_iters=_int(cp, "solver", "max_iters", 10_000),
        tol_residual=_real(cp, "solver", "tol", default_tol),
    )


# ---------------------------------------------------------------- reports


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render(items: Iterable[tuple[str, object]], fmt: str) -> str:
    rows = [(k, _fmt(v)) for k, v in items]
    if fmt == "keyvalue":
        return "".join(f"{k} = {v}\n" for k, v in rows)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k:<{width}}  {v}\n" for k, v in rows)


def condition_items(cond) -> list[tuple[str, object]]:
    items = [
        ("conditions.gamma", cond.gamma),
        ("conditions.kernel_l2", cond.kernel_l2),
        ("conditions.f_norm", cond.f_norm),
        ("conditions.banach_product", cond.banach_product),
        ("conditions.l2_product", cond.l2_product),
        ("conditions.l2_product_squared", cond.l2_product_squared),
        ("conditions.banach_ok", cond.banach_ok),
        ("conditions.l2_ok", cond.l2_ok),
        ("conditions.f_is_zero", cond.f_is_zero),
    ]
    if cond.r_min is not None:
        items.append(("conditions.r_min", cond.r_min))
    items.extend((f"conditions.note.{i}", note) for i, note in enumerate(cond.notes))
    return items


def convergence_items(report, prefix="solver") -> list[tuple[str, object]]:
    items = [
        (f"{prefix}.method", report.method),
        (f"{prefix}.status", report.status),
        (f"{prefix}.iterations", report.iterations),
        (f"{prefix}.residual", report.last_residual),
    ]
    if report.error_bound is not None:
        items.append((f"{prefix}.error_bound", report.error_bound))
    items.extend(
        (f"{prefix}.history.{i:05d}", r) for i, r in enumerate(report.residual_history)
    )
    return items


def _emit(args, cp, items) -> None:
    fmt = args.format or _get(cp, "output", "format", "table")
    if fmt not in ("table", "keyvalue"):
        raise ConfigError(f"unknown output format {fmt!r}")
    text = render(items, fmt)
    target = args.output or _get(cp, "output", "report")
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def run_check(args, cp) -> int:
    p = problem_from_config(cp)
    cond = check_conditions(p)
    _emit(args, cp, condition_items(cond))
    return EXIT_OK if cond.any_ok else EXIT_CONDITIONS


def run_solve(args, cp) -> int:
    p = problem_from_config(cp)
    cfg = iteration_config(cp)
    method = _get(cp, "solver", "method", "auto")
    if method not in ("auto", "picard", "km"):
        raise ConfigError(f"unknown solver method {method!r}")
    radius = _real(cp, "solver", "radius")
    x0_src = _get(cp, "solver", "x0")
    x0 = p.element(x0_src) if x0_src is not None else None
    try:
        u, report, cond = solve(p, method, cfg, radius=radius, x0=x0, override=args.override_conditions)
    except ConditionsViolatedError as exc:
        log.error("%s", exc)
        _emit(args, cp, condition_items(check_conditions(p)))
        return EXIT_CONDITIONS
    except NotApplicableError as exc:
        raise ConfigError(str(exc)) from exc
    items = condition_items(cond) + convergence_items(report)
    items.append(("solution.norm", p.space.norm_coords(u.coords)))
    for i, (x, v) in enumerate(zip(p.grid.nodes, u.coords)):
        items.append((f"solution.node.{i:04d}", x))
        items.append((f"solution.value.{i:04d}", v))
    _emit(args, cp, items)
    return EXIT_OK if report.converged else EXIT_NONCONVERGENCE


def _vi_problem(cp):
    dim = _int(cp, "problem", "dim", 2)
    space = Space.euclidean(dim)
    kind = _get(cp, "problem", "operator", "rotation")
    if kind == "rotation":
        A = Rotation(_real(cp, "problem", "angle", math.pi / 2), dim=dim)
    elif kind == "identity":
        A = Affine.identity(dim)
    elif kind == "zero":
        A = Affine.zero(dim)
    elif kind == "affine":
        rows = _get(cp, "problem", "matrix", required=True).split(";")
        matrix = np.array([_vector(r, "matrix row") for r in rows])
        shift_raw = _get(cp, "problem", "shift")
        shift = _vector(shift_raw, "shift") if shift_raw else None
        try:
            A = Affine(matrix, shift)
        except KKMFixError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        raise ConfigError(f"unknown operator {kind!r}")

    set_kind = _get(cp, "problem", "set", "ball")
    if set_kind == "ball":
        center_raw = _get(cp, "problem", "center")
        center = _vector(center_raw, "center") if center_raw else np.zeros(dim)
        M = convex.Ball(Element(center, space), _real(cp, "problem", "radius", 1.0))
    elif set_kind == "box":
        lo = _vector(_get(cp, "problem", "lower", required=True), "lower")
        hi = _vector(_get(cp, "problem", "upper", required=True), "upper")
        M = convex.Box(Element(lo, space), Element(hi, space))
    elif set_kind == "simplex":
        M = convex.Simplex.standard(dim)
    else:
        raise ConfigError(f"unknown set {set_kind!r}")

    x0_raw = _get(cp, "problem", "x0")
    x0 = Element(_vector(x0_raw, "x0"), space) if x0_raw else M.project(space.zeros())
    lip = _real(cp, "problem", "lipschitz", 2.0)
    return vi.VIProblem(ResidualOperator(A), M, lip), x0


def run_vi(args, cp) -> int:
    problem, x0 = _vi_problem(cp)
    cfg = iteration_config(cp)
    x_hat, report = vi.solve_vi_extragradient(problem, x0, cfg)
    minty = vi.minty_residuals(problem, x_hat, _int(cp, "solver", "samples", 500), args.seed)
    items = convergence_items(report)
    items.extend((f"solution.x.{i}", v) for i, v in enumerate(x_hat.coords))
    items += [
        ("minty.primal", minty.primal),
        ("minty.dual", minty.dual),
        ("minty.max_gap", minty.max_gap),
        ("minty.samples", minty.samples),
        ("minty.seed", minty.seed),
    ]
    _emit(args, cp, items)
    return EXIT_OK if report.converged else EXIT_NONCONVERGENCE


def kkm_scenario(name: str) -> kkm.SetValuedMap:
    if name == "canonical":
        return kkm.canonical_cover(2)
    if name == "threshold-negative":
        return kkm.threshold_cover(1, 0.99)
    if name == "p-mapping-rotation":
        space = Space.euclidean(2)
        anchors = [Element(v, space) for v in ((1, 0), (0, 1), (-1, 0), (0, -1))]
        return kkm.build_p_mapping(ResidualOperator(Rotation(math.pi / 2)), anchors)
    raise ConfigError(f"unknown kkm scenario {name!r}; choose from {', '.join(KKM_SCENARIOS)}")


def run_kkm(args, cp) -> int:
    name = args.scenario or _get(cp, "problem", "scenario", "canonical")
    m = args.m if args.m is not None else _int(cp, "kkm", "m", 20)
    tol = args.tol if args.tol is not None else _real(cp, "kkm", "tol", 1e-9)
    kmap = kkm_scenario(name)
    report = kkm.check_kkm_covering(kmap, m, tol)
    w = report.intersection_witness
    items = [
        ("kkm.scenario", name),
        ("kkm.m", m),
        ("kkm.tol", tol),
        ("kkm.faces_checked", report.faces_checked),
        ("kkm.points_checked", report.points_checked),
        ("kkm.covering_ok", report.covering_ok),
        ("kkm.violations", len(report.violations)),
    ]
    for j, (S, z) in enumerate(report.violations[:20]):
        items.append((f"kkm.violation.{j}.face", "-".join(map(str, S))))
        items.extend((f"kkm.violation.{j}.point.{i}", v) for i, v in enumerate(z))
    items.append(("kkm.witness.found", w.found))
    items.append(("kkm.witness.max_defect", w.max_defect))
    items.extend((f"kkm.witness.point.{i}", v) for i, v in enumerate(w.point))
    _emit(args, cp, items)
    if not report.covering_ok:
        return EXIT_CONDITIONS
    return EXIT_OK if w.found else EXIT_NONCONVERGENCE


def run_selftest(args, cp) -> int:
    from .acceptance import run_all

    results = run_all()
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        sys.stdout.write(f"{r.number:>2}  {r.name:<{width}}  {status}  {r.detail}\n")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NONCONVERGENCE


COMMANDS = {
    "check": run_check,
    "solve": run_solve,
    "vi": run_vi,
    "kkm": run_kkm,
    "selftest": run_selftest,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kkmfix", description=__doc__.split("\n\n")[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="INI file with [problem], [grid], [solver], [output]")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--format", choices=("table", "keyvalue"))
    parser.add_argument("--override-conditions", action="store_true")
    parser.add_argument("--scenario", choices=KKM_SCENARIOS)
    parser.add_argument("--m", type=int)
    parser.add_argument("--tol", type=float)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    needs_config = args.command in ("check", "solve")
    try:
        if needs_config and args.config is None:
            raise ConfigError(f"`{args.command}` needs --config")
        cp = load_config(args.config)
        return COMMANDS[args.command](args, cp)
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except ConditionsViolatedError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONDITIONS
    except ProjectionNonconvergenceError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NONCONVERGENCE
    except KKMFixError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
