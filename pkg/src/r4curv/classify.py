"""Locating isolated singular points (inflection, minimal, axiumbilic, nu-umbilic) on a chart."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .core import DegenerateImmersion, analyze
from .dsl import DomainError, EvaluationError, SurfaceDef
from .grid import GridSpec, analyze_grid
from .integrate import FieldUndefined, IndexUnresolved, SingularOnLoop, singularity_index
from .tolerance import DEFAULT, ToleranceSet

TYPES = ("inflection", "minimal", "axiumbilic", "nu-umbilic")
# field whose singularities sit at each type of point
INDEX_FIELD = {"inflection": "asym1", "minimal": "mean1", "axiumbilic": "axial-large"}


@dataclass(frozen=True)
class SingularPoint:
    kind: str
    u: float
    v: float
    residual: float
    index: str = ""


@dataclass(frozen=True)
class Classification:
    points: list[SingularPoint]
    everywhere: tuple[str, ...]
    everywhere_residual: float = 0.0


def _residual(p, kind):
    if kind == "nu-umbilic":
        return p.ellipse.semi_axes[1]
    return p.cls.residuals[kind]


def _threshold(kind, tol: ToleranceSet, scale: float):
    return {"inflection": tol.inflection, "minimal": tol.minimal,
            "axiumbilic": tol.ellipse * scale, "nu-umbilic": tol.ellipse * scale}[kind]


def _flagged(p, kind):
    return {"inflection": p.cls.inflection, "minimal": p.cls.minimal,
            "axiumbilic": p.cls.axiumbilic, "nu-umbilic": p.cls.nu_umbilic_candidate}[kind]


def _strict_minima(R, periodic_u, periodic_v):
    nu, nv = R.shape
    out = []
    for i in range(nu):
        for j in range(nv):
            r = R[i, j]
            if not np.isfinite(r):
                continue
            ok = True
            for di in (-1, 0, 1):
                for dj in (-1, 0, 1):
                    if di == dj == 0:
                        continue
                    a, b = i + di, j + dj
                    if periodic_u:
                        a %= nu
                    if periodic_v:
                        b %= nv
                    if not (0 <= a < nu and 0 <= b < nv):
                        ok = False
                        continue
                    if not (r < R[a, b]):
                        ok = False
            if ok:
                out.append((i, j))
    return out


def classify_surface(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT,
                     threads: int | None = None, index_radius: float | None = None) -> Classification:
    """Singular points as refined strict local minima of each type's residual.

    A type flagged at every regular grid point is reported once as
    "everywhere" instead of as points.  nu-umbilicity everywhere is the
    hyperspherical situation checked by the verifier and is not listed.
    """
    pts = analyze_grid(s, grid, tol, threads)
    us, vs = grid.axes(s)
    du, dv = us[1] - us[0], vs[1] - vs[0]
    regular = [p for p in pts if p is not None]
    scale = max([p.forms.scale() / max(p.forms.E, p.forms.G) for p in regular] + [1.0])
    everywhere, found = [], []
    ev_res = 0.0
    for kind in TYPES:
        if regular and all(_flagged(p, kind) for p in regular):
            if kind != "nu-umbilic":
                everywhere.append(kind)
                ev_res = max(ev_res, max(_residual(p, kind) for p in regular))
            continue
        R = np.array([np.nan if p is None else _residual(p, kind) for p in pts]).reshape(len(us), len(vs))
        thr = _threshold(kind, tol, scale)
        lo, hi = np.nanmin(R), np.nanmax(R)
        if hi - lo <= 1e-8 * (abs(hi) + thr):
            # constant up to round-off: no isolated structure to find
            continue
        for i, j in _strict_minima(R, s.periodic_u, s.periodic_v):
            sp = _refine(s, kind, us[i], vs[j], du, dv, tol, thr)
            if sp is not None and not any(q.kind == kind and math.hypot(q.u - sp.u, q.v - sp.v) < 1e-6
                                          for q in found):
                found.append(sp)
    radius = index_radius or 0.25 * min(du, dv)
    out = [SingularPoint(p.kind, p.u, p.v, p.residual, _index(s, p, radius)) for p in found]
    out.sort(key=lambda p: (TYPES.index(p.kind), p.u, p.v))
    return Classification(out, tuple(everywhere), ev_res)


def _refine(s, kind, u0, v0, du, dv, tol, thr):
    def f(x):
        try:
            if not s.contains(x[0], x[1]):
                return 1e300
            return _residual(analyze(s, float(x[0]), float(x[1]), tol), kind)
        except (DegenerateImmersion, EvaluationError, DomainError):
            return 1e300

    simplex = np.array([[u0, v0], [u0 + 0.5 * du, v0], [u0, v0 + 0.5 * dv]])
    res = minimize(f, [u0, v0], method="Nelder-Mead",
                   options={"initial_simplex": simplex, "xatol": 1e-12, "fatol": 1e-16, "maxiter": 2000})
    if not res.fun < thr:
        return None
    if abs(res.x[0] - u0) > 2 * du or abs(res.x[1] - v0) > 2 * dv:
        return None
    # isolated: on a small circle around the zero the residual stays away from 0,
    # whereas a curve of zeros crosses the circle
    delta = 0.25 * min(du, dv)

    def ring(t):
        return f(res.x + delta * np.array([math.cos(t), math.sin(t)]))

    ts = np.arange(64) * (2 * np.pi / 64)
    vals = np.array([ring(t) for t in ts])
    k = int(np.argmin(vals))
    low = minimize_scalar(ring, bounds=(ts[k] - np.pi / 32, ts[k] + np.pi / 32), method="bounded",
                          options={"xatol": 1e-10}).fun
    if low < thr or low < 1e-4 * vals.max():
        return None
    u, v = s.wrap(float(res.x[0]), float(res.x[1]))
    return SingularPoint(kind, u, v, float(res.fun))


def _index(s, p: SingularPoint, radius) -> str:
    name = INDEX_FIELD.get(p.kind)
    if name is None:
        return ""
    try:
        return str(singularity_index(s, name, (p.u, p.v), radius))
    except (IndexUnresolved, SingularOnLoop, FieldUndefined):
        return ""
