"""Integral curves of unoriented line fields and winding indices of their singularities."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .core import DegenerateImmersion, FormBundle, frame_at, fundamental_forms
from .dsl import DomainError, EvaluationError, ExprNode, SurfaceDef, evaluate, evaluate_surface
from .fields import (
    TangentDirection,
    asymptotic_directions,
    axial_directions_quartic,
    line_angle_distance,
    mean_directional_directions,
    nu_principal_split,
)

FIELDS = ("asym1", "asym2", "mean1", "mean2", "nu-min", "nu-max", "axial-large", "axial-small")
FAMILY = {
    "asym1": "asymptotic", "asym2": "asymptotic",
    "mean1": "mean", "mean2": "mean",
    "nu-min": "nu-principal", "nu-max": "nu-principal",
    "axial-large": "axial", "axial-small": "axial",
}


class SeedDegenerate(ValueError):
    """The requested field is undefined at the seed point."""


class FieldUndefined(ValueError):
    pass


class IndexUnresolved(ValueError):
    pass


class SingularOnLoop(ValueError):
    pass


@dataclass(frozen=True)
class FieldSpec:
    """A line field on a surface: family selector plus, for nu-principal fields, the normal field."""

    name: str
    nu: tuple[ExprNode, ExprNode, ExprNode, ExprNode] | None = None
    tol: float = 1e-6

    def __post_init__(self):
        if self.name not in FIELDS:
            raise ValueError(f"unknown field {self.name!r}; expected one of {', '.join(FIELDS)}")
        if FAMILY[self.name] == "nu-principal" and self.nu is None:
            raise ValueError(f"field {self.name} needs a normal vector field nu")

    @property
    def branch(self) -> int:
        return 1 if self.name in ("asym2", "mean2") else 0


def nu_at(surface: SurfaceDef, nu, u: float, v: float, frame) -> np.ndarray:
    """Unit normal obtained by projecting the user's vector field onto the normal plane."""
    raw = np.array([evaluate(c, u, v, surface.parameters) for c in nu])
    n = (raw @ frame.n1) * frame.n1 + (raw @ frame.n2) * frame.n2
    norm = np.linalg.norm(n)
    if norm < 1e-12 * max(1.0, np.linalg.norm(raw)):
        raise FieldUndefined("nu has no normal component here")
    return n / norm


def field_directions(surface: SurfaceDef, spec: FieldSpec, u: float, v: float) -> tuple[list[TangentDirection], FormBundle]:
    """Candidate directions of the field at (u, v); raises FieldUndefined at singular points."""
    try:
        frame = frame_at(surface, u, v)
    except (DegenerateImmersion, EvaluationError) as exc:
        raise FieldUndefined(str(exc)) from None
    b = fundamental_forms(frame)
    fam = FAMILY[spec.name]
    if fam == "asymptotic":
        ds = asymptotic_directions(b, spec.tol)
    elif fam == "mean":
        ds = mean_directional_directions(b, spec.tol)
    elif fam == "axial":
        ds = axial_directions_quartic(b, spec.tol)
        if ds.degenerate or not ds.crosses:
            raise FieldUndefined("axiumbilic point")
        return list(ds.large if spec.name == "axial-large" else ds.small), b
    else:
        nu = nu_at(surface, spec.nu, u, v, frame)
        sec = (float(frame.s_uu @ nu), float(frame.s_uv @ nu), float(frame.s_vv @ nu))
        split = nu_principal_split(b.first, sec, spec.tol)
        if split is None:
            raise FieldUndefined("nu-umbilic point")
        return [split[0] if spec.name == "nu-min" else split[1]], b
    if ds.degenerate:
        raise FieldUndefined(f"{fam} equation vanishes identically")
    if len(ds) < 2:
        raise FieldUndefined(f"no real {fam} directions")
    return list(ds.directions), b


@dataclass(frozen=True)
class IntegralCurve:
    vertices: np.ndarray
    lifted: np.ndarray
    termination: str
    ends: tuple[str, str] = ("", "")
    field: str = ""
    seed: tuple[float, float] = (0.0, 0.0)

    def __len__(self):
        return len(self.vertices)


def _min_image(d, surface: SurfaceDef):
    d = np.array(d, dtype=float)
    for k, (rng, per) in enumerate(((surface.u_range, surface.periodic_u), (surface.v_range, surface.periodic_v))):
        if per:
            L = rng[1] - rng[0]
            d[k] = (d[k] + L / 2) % L - L / 2
    return d


def _pick(cands, heading, b: FormBundle, ambiguity: float):
    """Oriented I-unit chart velocity of the candidate nearest ``heading`` (mod pi)."""
    h_ang = math.atan2(heading[1], heading[0])
    dists = sorted((line_angle_distance(c.angle, h_ang), k) for k, c in enumerate(cands))
    if len(dists) > 1 and dists[1][0] - dists[0][0] < ambiguity:
        raise FieldUndefined("ambiguous continuation")
    vel = cands[dists[0][1]].i_unit(*b.first)
    return vel if vel @ heading >= 0 else -vel


class _Tracer:
    def __init__(self, surface, spec, step, max_steps, ambiguity=1e-3):
        self.s = surface
        self.spec = spec
        self.step = step
        self.max_steps = max_steps
        self.ambiguity = ambiguity

    def velocity(self, p, heading):
        u, v = self.s.wrap(float(p[0]), float(p[1]))
        cands, b = field_directions(self.s, self.spec, u, v)
        return _pick(cands, heading, b, self.ambiguity)

    def run(self, seed, heading, closable=True):
        s, h = self.s, self.step
        pts = [np.array(seed, dtype=float)]
        p = pts[0]
        armed = False
        seed_heading = heading.copy()
        for _ in range(self.max_steps):
            try:
                k1 = self.velocity(p, heading)
                k2 = self.velocity(p + 0.5 * h * k1, k1)
                k3 = self.velocity(p + 0.5 * h * k2, k2)
                k4 = self.velocity(p + h * k3, k3)
            except DomainError:
                return pts, "boundary"
            except FieldUndefined:
                return pts, "singularity"
            vel = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            q = p + h * vel
            if not s.contains(q[0], q[1]):
                return pts, "boundary"
            q = np.array(s.wrap(q[0], q[1]), dtype=float)
            seg = _min_image(q - p, s)
            chart_len = float(np.linalg.norm(seg))
            rel = _min_image(np.asarray(seed) - p, s)
            if closable:
                if not armed and np.linalg.norm(_min_image(q - np.asarray(seed), s)) > 4 * chart_len:
                    armed = True
                elif armed:
                    t = np.clip(rel @ seg / max(seg @ seg, 1e-300), 0.0, 1.0)
                    gap = np.linalg.norm(rel - t * seg)
                    cosang = abs(vel @ seed_heading) / (np.linalg.norm(vel) * np.linalg.norm(seed_heading))
                    if gap < 0.5 * max(chart_len, 1e-300) and cosang > math.cos(0.1):
                        pts.append(np.array(seed, dtype=float))
                        return pts, "closed"
            pts.append(q)
            heading = vel
            p = q
        return pts, "max_steps"


def integrate_line_field(surface: SurfaceDef, spec: FieldSpec | str, seed: Sequence[float], step: float = 1e-3,
                         max_steps: int = 20000, singularity_tol: float | None = None,
                         branch: int | None = None) -> IntegralCurve:
    """Trace the field through ``seed`` in both directions with fixed-step RK4.

    The field is unoriented: at every stage the root nearest the previous
    heading (mod pi) is taken and oriented along it.  Tracing stops at the
    chart boundary, at singular points, when the curve closes up on the seed,
    or after ``max_steps`` steps in each direction.
    """
    if isinstance(spec, str):
        spec = FieldSpec(spec)
    if singularity_tol is not None:
        spec = FieldSpec(spec.name, spec.nu, singularity_tol)
    try:
        u0, v0 = surface.wrap(float(seed[0]), float(seed[1]))
    except DomainError as exc:
        raise SeedDegenerate(str(exc)) from None
    try:
        cands, b = field_directions(surface, spec, u0, v0)
    except FieldUndefined as exc:
        raise SeedDegenerate(f"{spec.name} undefined at seed ({u0:g}, {v0:g}): {exc}") from None
    pick = spec.branch if branch is None else branch
    d0 = cands[min(pick, len(cands) - 1)].i_unit(*b.first)

    tracer = _Tracer(surface, spec, step, max_steps)
    fwd, why_f = tracer.run((u0, v0), d0)
    if why_f == "closed":
        verts = fwd
        ends = ("closed", "closed")
    else:
        bwd, why_b = tracer.run((u0, v0), -d0, closable=False)
        verts = bwd[:0:-1] + fwd
        ends = (why_b, why_f)
    verts = np.array(verts)
    lifted = np.array([evaluate_surface(surface, a, c) for a, c in verts])
    termination = "closed" if why_f == "closed" else why_f
    return IntegralCurve(verts, lifted, termination, ends, spec.name, (u0, v0))


# ---------------------------------------------------------------------------
# indices


def winding_index(candidates: Callable[[float, float], Sequence[float]], center: Sequence[float], radius: float,
                  samples: int = 256, period: float = math.pi, branch: int = 0,
                  max_residual: float = 0.1) -> tuple[Fraction, float]:
    """Index of a line or cross field around a circle in the chart.

    ``candidates(u, v)`` returns the field's line angles at a point (chart
    angles, meaningful mod pi); one line is followed continuously around the
    loop by nearest-angle matching.  ``period`` is the field's rotational
    symmetry (pi for line fields, pi/2 for cross fields) and bounds the
    admissible jump between samples.  Returns the index rounded to a
    multiple of 1/4 and the raw value.
    """
    cu, cv = center
    ts = 2 * math.pi * np.arange(samples + 1) / samples
    phi = None
    start = None
    for t in ts:
        try:
            angs = list(candidates(cu + radius * math.cos(t), cv + radius * math.sin(t)))
        except FieldUndefined as exc:
            raise SingularOnLoop(f"field undefined on the loop at angle {t:.4f}: {exc}") from None
        if not angs:
            raise SingularOnLoop(f"field undefined on the loop at angle {t:.4f}")
        if phi is None:
            phi = start = angs[min(branch, len(angs) - 1)]
            continue
        deltas = sorted((((a - phi + math.pi / 2) % math.pi) - math.pi / 2 for a in angs), key=abs)
        d = deltas[0]
        if abs(d) > period / 4 or (len(deltas) > 1 and abs(deltas[1]) - abs(d) < 2 * abs(d)):
            raise IndexUnresolved(f"angle jump {d:.3g} rad at loop angle {t:.4f}; increase samples or shrink radius")
        phi += d
    raw = (phi - start) / (2 * math.pi)
    q = round(4 * raw)
    if abs(raw - q / 4) >= max_residual:
        raise IndexUnresolved(f"winding {raw:.4f} is not close to a multiple of 1/4")
    return Fraction(q, 4), raw


def singularity_index(surface: SurfaceDef, spec: FieldSpec | str, center: Sequence[float], radius: float,
                      samples: int = 256) -> Fraction:
    """Index of the field's singularity inside the chart circle around ``center``."""
    if isinstance(spec, str):
        spec = FieldSpec(spec)

    def cands(u, v):
        try:
            u, v = surface.wrap(u, v)
        except DomainError as exc:
            raise FieldUndefined(str(exc)) from None
        dirs, _ = field_directions(surface, spec, u, v)
        return [d.angle for d in dirs]

    period = math.pi / 2 if FAMILY[spec.name] in ("axial", "mean") else math.pi
    idx, _ = winding_index(cands, center, radius, samples, period, spec.branch)
    return idx
