"""Command line front end: ``r4curv compute|classify|flow|verify|fit-sphere``.

Exit status: 0 success / pass, 1 mathematical verdict failure, 2 input error.
"""
from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import fixtures
from .classify import classify_surface
from .core import DegenerateImmersion
from .dsl import (
    DomainError,
    EvaluationError,
    ParseError,
    SurfaceDef,
    SurfaceFileError,
    evaluate_surface,
    parse_expression,
    parse_surface_file,
)
from .grid import GridSpec, analyze_grid, map_rows
from .integrate import FAMILY, FIELDS, FieldSpec, SeedDegenerate, integrate_line_field
from .theorems import DegenerateCloud, fit_hypersphere, verify_equivalences
from .tolerance import DEFAULT, ToleranceSet

COMPUTE_HEADER = ("u,v,E,F,G,e1,f1,g1,e2,f2,g2,H1,H2,kN,K,Delta,"
                  "ellipse_kind,ellipse_a,ellipse_b")
CLASSIFY_HEADER = "type,u,v,residual,index"
FLOW_HEADER = "curve_id,vertex,u,v,x,y,z,w"
DEFAULT_GRID = {"compute": "32x32", "classify": "32x32", "flow": "4x4", "verify": "32x32", "fit-sphere": "32x32"}
STYLE = {
    "asymptotic": 'stroke="#1f4e99" stroke-width="1"',
    "mean": 'stroke="#b2361b" stroke-width="1" stroke-dasharray="4 2"',
    "nu-principal": 'stroke="#2d7a2d" stroke-width="1"',
    "axial": 'stroke="#7a3c99" stroke-width="1" stroke-dasharray="1 2"',
}


class InputError(Exception):
    pass


def num(x) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# config


def load_surface(spec: str) -> SurfaceDef:
    if spec.startswith("builtin:"):
        try:
            return fixtures.load(spec.split(":", 1)[1])
        except KeyError as exc:
            raise InputError(exc.args[0]) from None
    path = Path(spec)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"cannot read surface file {spec}: {exc.strerror}") from None
    try:
        return parse_surface_file(text)
    except (ParseError, SurfaceFileError, DomainError, ValueError) as exc:
        raise InputError(f"{spec}: {exc}") from None


def tolerances(args) -> ToleranceSet:
    kw = {name: getattr(args, f"tol_{name}") for name in ToleranceSet.names()}
    try:
        return DEFAULT.with_overrides(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def grid_of(args) -> GridSpec:
    try:
        return GridSpec.parse(args.grid or DEFAULT_GRID[args.command], args.inset)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _writer(path):
    if path is None or path == "-":
        return sys.stdout, False
    try:
        return open(path, "w", newline=""), True
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _emit(text: str, path):
    fh, close = _writer(path)
    fh.write(text)
    if close:
        fh.close()


# ---------------------------------------------------------------------------
# commands


def cmd_compute(args) -> int:
    s, grid, tol = load_surface(args.surface), grid_of(args), tolerances(args)
    pts = analyze_grid(s, grid, tol)
    out = io.StringIO()
    out.write(COMPUTE_HEADER + "\n")
    for (u, v), p in zip(grid.points(s), pts):
        if p is None:
            out.write(f"{num(u)},{num(v)}" + ",nan" * 14 + ",irregular,nan,nan\n")
            continue
        b, inv = p.forms, p.inv
        a, bb = p.ellipse.semi_axes
        vals = [u, v, *b.as_array(), inv.H1, inv.H2, inv.kN, inv.K, inv.Delta]
        out.write(",".join(num(x) for x in vals) + f",{p.ellipse.kind},{num(a)},{num(bb)}\n")
    _emit(out.getvalue(), args.out)
    return 0


def cmd_classify(args) -> int:
    s, grid, tol = load_surface(args.surface), grid_of(args), tolerances(args)
    c = classify_surface(s, grid, tol)
    out = io.StringIO()
    out.write(CLASSIFY_HEADER + "\n")
    if c.everywhere:
        out.write(f"degenerate_everywhere,,,{num(c.everywhere_residual)},{';'.join(c.everywhere)}\n")
    for p in c.points:
        out.write(f"{p.kind},{num(p.u)},{num(p.v)},{num(p.residual)},{p.index}\n")
    _emit(out.getvalue(), args.out)
    return 0


def parse_seeds(text: str, s: SurfaceDef, grid: GridSpec) -> list[tuple[float, float]]:
    if text == "auto":
        us, vs = grid.axes(s)
        hu, hv = (us[1] - us[0]) / 2, (vs[1] - vs[0]) / 2
        seeds = []
        for a in us + hu:
            for b in vs + hv:
                if s.contains(a, b):
                    seeds.append(tuple(float(x) for x in s.wrap(a, b)))
        return seeds
    seeds = []
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        try:
            a, b = (float(x) for x in item.split(","))
        except ValueError:
            raise InputError(f"bad seed {item!r}; expected 'u,v' pairs separated by ';'") from None
        seeds.append((a, b))
    if not seeds:
        raise InputError("no seeds given")
    return seeds


def _nu_exprs(args, s: SurfaceDef):
    if not args.nu:
        return None
    parts = args.nu.split(",")
    if len(parts) != 4:
        raise InputError("--nu needs four comma-separated expressions")
    try:
        return tuple(parse_expression(p, tuple(s.parameters)) for p in parts)
    except ParseError as exc:
        raise InputError(f"--nu: {exc}") from None


def cmd_flow(args) -> int:
    s, grid = load_surface(args.surface), grid_of(args)
    names = [f.strip() for f in args.field.split(",") if f.strip()]
    nu = _nu_exprs(args, s)
    try:
        specs = [FieldSpec(n, nu) for n in names]
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if args.step <= 0 or args.max_steps < 1:
        raise InputError("--step must be positive and --max-steps at least 1")
    seeds = parse_seeds(args.seeds, s, grid)
    tasks = [(sp, seed) for sp in specs for seed in seeds]

    def run(task):
        sp, seed = task
        try:
            return integrate_line_field(s, sp, seed, args.step, args.max_steps), None
        except SeedDegenerate as exc:
            return None, f"warning: seed ({num(seed[0])}, {num(seed[1])}) skipped for {sp.name}: {exc}"

    results = map_rows(run, tasks)
    out = io.StringIO()
    out.write(FLOW_HEADER + "\n")
    curves, skipped = [], []
    for (sp, seed), (curve, warn) in zip(tasks, results):
        if warn:
            print(warn, file=sys.stderr)
            skipped.append(seed)
            continue
        cid = len(curves)
        curves.append(curve)
        for k, ((u, v), x) in enumerate(zip(curve.vertices, curve.lifted)):
            out.write(f"{cid},{k},{num(u)},{num(v)}," + ",".join(num(c) for c in x) + "\n")
    _emit(out.getvalue(), args.out)
    if args.svg:
        _emit(render_svg(s, curves, skipped), args.svg)
    return 0


def render_svg(s: SurfaceDef, curves, skipped, size: int = 600) -> str:
    """Chart-domain drawing: one path per curve, singular ends and skipped seeds marked."""
    (u0, u1), (v0, v1) = s.u_range, s.v_range
    pad = 10

    def xy(u, v):
        return pad + (u - u0) / (u1 - u0) * size, pad + (v1 - v) / (v1 - v0) * size

    w = size + 2 * pad
    lines = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{w}" viewBox="0 0 {w} {w}">',
             f'<rect x="{pad}" y="{pad}" width="{size}" height="{size}" fill="none" stroke="#999"/>']
    marks = []
    for c in curves:
        cmds, prev = [], None
        for u, v in c.vertices:
            x, y = xy(u, v)
            jump = prev is not None and (abs(u - prev[0]) > (u1 - u0) / 2 or abs(v - prev[1]) > (v1 - v0) / 2)
            cmds.append(f"{'M' if prev is None or jump else 'L'}{x:.3f},{y:.3f}")
            prev = (u, v)
        style = STYLE[FAMILY[c.field]]
        lines.append(f'<path class="{c.field}" fill="none" {style} d="{" ".join(cmds)}"/>')
        for end, (u, v) in zip(c.ends, (c.vertices[0], c.vertices[-1])):
            if end == "singularity":
                marks.append(xy(u, v))
    for u, v in skipped:
        marks.append(xy(u, v))
    for x, y in sorted(set(marks)):
        lines.append(f'<circle class="singular" cx="{x:.3f}" cy="{y:.3f}" r="3" fill="#000"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def cmd_verify(args) -> int:
    s, grid, tol = load_surface(args.surface), grid_of(args), tolerances(args)
    rep = verify_equivalences(s, grid, tol)
    sys.stdout.write(rep.to_text())
    if args.out:
        _emit(rep.to_json(), args.out)
    return 0 if rep.overall else 1


def cmd_fit_sphere(args) -> int:
    s, grid, tol = load_surface(args.surface), grid_of(args), tolerances(args)
    cloud = np.array([evaluate_surface(s, u, v) for u, v in grid.points(s)])
    try:
        fit = fit_hypersphere(cloud)
    except DegenerateCloud as exc:
        _emit(f"degenerate-cloud: {exc}\n", args.out)
        return 1
    verdict = fit.rms_residual <= tol.sphere_fit
    text = (f"center: {' '.join(num(x) for x in fit.center)}\n"
            f"radius: {num(fit.radius)}\n"
            f"rms_residual: {num(fit.rms_residual)}\n"
            f"condition_indicator: {num(fit.condition_indicator)}\n"
            f"hyperspherical: {'yes' if verdict else 'no'}\n")
    _emit(text, args.out)
    return 0 if verdict else 1


COMMANDS = {"compute": cmd_compute, "classify": cmd_classify, "flow": cmd_flow,
            "verify": cmd_verify, "fit-sphere": cmd_fit_sphere}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", required=True, help="surface file or builtin:<name>")
    common.add_argument("--grid", help="sample grid NUxNV")
    common.add_argument("--inset", type=float, default=0.0, help="margin from open chart edges")
    common.add_argument("--out", help="output path (default stdout)")
    for name in ToleranceSet.names():
        common.add_argument(f"--tol-{name}", type=float, default=None, metavar="X",
                            help=f"default {getattr(DEFAULT, name):g}")

    p = argparse.ArgumentParser(prog="r4curv", description="Curvature of surfaces in R^4.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("compute", parents=[common], help="curvature table on a grid")
    sub.add_parser("classify", parents=[common], help="isolated singular points")
    fl = sub.add_parser("flow", parents=[common], help="integral curves of line fields")
    fl.add_argument("--field", default="asym1,asym2", help=f"comma list from {', '.join(FIELDS)}")
    fl.add_argument("--seeds", default="auto", help="'auto' or 'u,v;u,v;...'")
    fl.add_argument("--nu", help="normal field x,y,z,w expressions for nu-principal fields")
    fl.add_argument("--step", type=float, default=0.01)
    fl.add_argument("--max-steps", type=int, default=20000)
    fl.add_argument("--svg", help="also draw the curves as SVG")
    sub.add_parser("verify", parents=[common], help="check the equivalent conditions")
    sub.add_parser("fit-sphere", parents=[common], help="fit a 3-sphere to the sampled surface")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"r4curv: error: {exc}", file=sys.stderr)
        return 2
    except (EvaluationError, DomainError, DegenerateImmersion) as exc:
        print(f"r4curv: error: surface cannot be evaluated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
