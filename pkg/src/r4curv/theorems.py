"""Numerical checks of the characterizations of hyperspherical surfaces in R^4.

Every check samples a grid, evaluates a pointwise residual and reduces it to a
report entry.  Points where the condition's object is undefined (for instance
asymptotic lines at inflection points) are excluded and counted instead of
being scored.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from .core import (
    DegenerateImmersion,
    FormBundle,
    FrameData,
    PointData,
    curvature_ellipse,
    frame_at,
    fundamental_forms,
)
from .dsl import SurfaceDef
from .fields import (
    _normalized,
    asymptotic_directions,
    axial_directions_quartic,
    axial_quartic_coefficients,
    factorization_product,
    nu_principal_directions,
    set_angle_distance,
)
from .grid import GridSpec, analyze_grid
from .tolerance import DEFAULT, ToleranceSet

CONDITIONS = ("a", "b", "c", "d", "e", "f", "g", "h")
ENTRY_IDS = CONDITIONS + ("codazzi", "projection", "sphere_fit")


class FrameDiscontinuity(ValueError):
    """The frame field jumps across a finite-difference step."""


class EllipseNotSegment(ValueError):
    """No unit normal makes II_nu proportional to I at this point."""


class DegenerateCloud(ValueError):
    """The sample does not determine a unique 3-sphere."""


# ---------------------------------------------------------------------------
# Christoffel symbols and frame coefficients


@dataclass(frozen=True)
class StructureCoefficients:
    """Christoffel symbols gamma<k>_<ij> and frame coefficients a<k>_<ij>; unset parts are nan."""

    gamma1_11: float = math.nan
    gamma2_11: float = math.nan
    gamma1_12: float = math.nan
    gamma2_12: float = math.nan
    gamma1_22: float = math.nan
    gamma2_22: float = math.nan
    a1_11: float = math.nan
    a2_11: float = math.nan
    a3_11: float = math.nan
    a1_12: float = math.nan
    a2_12: float = math.nan
    a3_12: float = math.nan
    a1_21: float = math.nan
    a2_21: float = math.nan
    a1_22: float = math.nan
    a2_22: float = math.nan

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in dc_fields(self)}


def metric_derivatives(f: FrameData) -> tuple[float, float, float, float, float, float]:
    """(E_u, E_v, F_u, F_v, G_u, G_v), exact from the second-order jets."""
    tu, tv = f.t_u, f.t_v
    return (
        float(2 * f.s_uu @ tu), float(2 * f.s_uv @ tu),
        float(f.s_uu @ tv + tu @ f.s_uv), float(f.s_uv @ tv + tu @ f.s_vv),
        float(2 * f.s_uv @ tv), float(2 * f.s_vv @ tv),
    )


def christoffel_from_frame(f: FrameData) -> StructureCoefficients:
    E, F, G = float(f.t_u @ f.t_u), float(f.t_u @ f.t_v), float(f.t_v @ f.t_v)
    Eu, Ev, Fu, Fv, Gu, Gv = metric_derivatives(f)
    D2 = 2 * (E * G - F * F)
    return StructureCoefficients(
        gamma1_11=(G * Eu - 2 * F * Fu + F * Ev) / D2,
        gamma2_11=(2 * E * Fu - E * Ev - F * Eu) / D2,
        gamma1_12=(G * Ev - F * Gu) / D2,
        gamma2_12=(E * Gu - F * Ev) / D2,
        gamma1_22=(2 * G * Fv - G * Gu - F * Gv) / D2,
        gamma2_22=(E * Gv - 2 * F * Fv + F * Gu) / D2,
    )


def christoffel_symbols(s: SurfaceDef, u: float, v: float) -> StructureCoefficients:
    """Christoffel symbols of the induced metric at (u, v) for a general chart."""
    return christoffel_from_frame(frame_at(s, u, v))


def orthogonal_christoffel(E, G, Eu, Ev, Gu, Gv) -> tuple[float, ...]:
    """Closed forms valid when F = 0, in the order gamma1_11, gamma2_11, gamma1_12, gamma2_12, gamma1_22, gamma2_22."""
    return (Eu / (2 * E), -Ev / (2 * G), Ev / (2 * E), Gu / (2 * G), -Gu / (2 * E), Gv / (2 * G))


def _tangential_coefficients(b: FormBundle) -> dict[str, float]:
    E, F, G = b.first
    D = b.det
    return {
        "a1_11": (b.f1 * F - b.e1 * G) / D, "a2_11": (b.e1 * F - b.f1 * E) / D,
        "a1_12": (b.g1 * F - b.f1 * G) / D, "a2_12": (b.f1 * F - b.g1 * E) / D,
        "a1_21": (b.f2 * F - b.e2 * G) / D, "a2_21": (b.e2 * F - b.f2 * E) / D,
        "a1_22": (b.g2 * F - b.f2 * G) / D, "a2_22": (b.f2 * F - b.g2 * E) / D,
    }


def segment_adapted(f: FrameData, reference: np.ndarray | None = None, tol: float = DEFAULT.ellipse) -> FrameData:
    """Frame (nu_perp, nu) with nu normal to the ellipse's major axis.

    The sign of nu makes lambda = <H, nu> non-negative, or, when ``reference``
    is given, keeps nu on the same side as ``reference`` (continuity for
    finite differences).  nu_perp completes a positive frame.
    """
    ell = curvature_ellipse(fundamental_forms(f), tol)
    major = np.linalg.norm(ell.axis_a)
    hn = np.linalg.norm(ell.center)
    if ell.kind == "point" or major == 0.0:
        c = ell.center / hn if hn > 0 else np.array([0.0, 1.0])
    else:
        d = ell.axis_a / major
        c = np.array([-d[1], d[0]])
    nu = f.from_normal_coords(c)
    if reference is not None:
        if nu @ reference < 0:
            nu = -nu
    elif c @ ell.center < 0:
        nu = -nu
    a, b = nu @ f.n1, nu @ f.n2
    return f.with_normals(b * f.n1 - a * f.n2, nu)


def _frame_field(s: SurfaceDef, u: float, v: float, rule: str):
    """Centre frame plus a builder for frames of the same smooth field nearby."""
    c = frame_at(s, u, v)
    if rule == "default":
        return c, lambda a, b: frame_at(s, a, b, selection=c.selection)
    if rule == "segment":
        c = segment_adapted(c)
        return c, lambda a, b: segment_adapted(frame_at(s, a, b, selection=c.selection), reference=c.n2)
    raise ValueError(f"unknown frame rule {rule!r}")


def _neighbours(s, u, v, h, build, centre, max_turn=0.1):
    out = {}
    for key, (a, b) in {"u+": (u + h, v), "u-": (u - h, v), "v+": (u, v + h), "v-": (u, v - h)}.items():
        a, b = s.wrap(a, b)
        nb = build(a, b)
        turn = max(np.linalg.norm(nb.n1 - centre.n1), np.linalg.norm(nb.n2 - centre.n2))
        if turn > max_turn:
            raise FrameDiscontinuity(f"normal frame turns by {turn:.3g} across a step of {h:g} at ({u:g}, {v:g})")
        out[key] = nb
    return out


def structure_coefficients(s: SurfaceDef, u: float, v: float, rule: str = "default",
                           h: float = 1e-5) -> StructureCoefficients:
    """All Christoffel symbols and frame coefficients at (u, v).

    The tangential coefficients use the closed forms in II; the normal
    connection a3_11 = <(n1)_u, n2>, a3_12 = <(n1)_v, n2> comes from central
    differences of the frame field (``rule`` "default" or "segment").
    """
    c, build = _frame_field(s, u, v, rule)
    nb = _neighbours(s, u, v, h, build, c)
    a3_11 = float((nb["u+"].n1 - nb["u-"].n1) @ c.n2 / (2 * h))
    a3_12 = float((nb["v+"].n1 - nb["v-"].n1) @ c.n2 / (2 * h))
    g = christoffel_from_frame(c).as_dict()
    g = {k: val for k, val in g.items() if k.startswith("gamma")}
    return StructureCoefficients(**g, **_tangential_coefficients(fundamental_forms(c)), a3_11=a3_11, a3_12=a3_12)


def codazzi_residuals(s: SurfaceDef, u: float, v: float, h: float = 1e-5, rule: str = "default",
                      printed_c1: bool = False) -> np.ndarray:
    """Left minus right of the four Codazzi equations of a surface in R^4.

    With (n1, n2) a smooth normal frame and a3_11, a3_12 its connection
    coefficients, the u/v derivatives of e_i, f_i, g_i are central
    differences of the form coefficients.  ``printed_c1`` evaluates the first
    equation with the opposite sign on its normal-connection terms, which is
    only an identity when the normal connection vanishes.
    """
    c, build = _frame_field(s, u, v, rule)
    nb = _neighbours(s, u, v, h, build, c)
    b = fundamental_forms(c)
    fb = {k: fundamental_forms(x) for k, x in nb.items()}

    def du(name):
        return (getattr(fb["u+"], name) - getattr(fb["u-"], name)) / (2 * h)

    def dv(name):
        return (getattr(fb["v+"], name) - getattr(fb["v-"], name)) / (2 * h)

    g = christoffel_from_frame(c)
    t11, t211, t12, t212, t122, t222 = (g.gamma1_11, g.gamma2_11, g.gamma1_12, g.gamma2_12, g.gamma1_22, g.gamma2_22)
    p = float((nb["u+"].n1 - nb["u-"].n1) @ c.n2 / (2 * h))
    q = float((nb["v+"].n1 - nb["v-"].n1) @ c.n2 / (2 * h))
    e1, f1, g1, e2, f2, g2 = b.e1, b.f1, b.g1, b.e2, b.f2, b.g2

    sgn = -1.0 if printed_c1 else 1.0
    c1 = dv("e1") - du("f1") - (t12 * e1 + (t212 - t11) * f1 - t211 * g1 + sgn * (q * e2 - p * f2))
    c2 = du("g1") - dv("f1") - (-t122 * e1 + (t12 - t222) * f1 + t212 * g1 + p * g2 - q * f2)
    c3 = dv("e2") - du("f2") - (t12 * e2 + (t212 - t11) * f2 - t211 * g2 - q * e1 + p * f1)
    c4 = du("g2") - dv("f2") - (-t122 * e2 + (t12 - t222) * f2 + t212 * g2 - p * g1 + q * f1)
    return np.array([c1, c2, c3, c4])


def structure_residuals(s: SurfaceDef, u: float, v: float, h: float = 1e-5, rule: str = "default") -> np.ndarray:
    """Norms of the four frame derivative equations (n_i)_u, (n_i)_v = tangential part + connection part."""
    c, build = _frame_field(s, u, v, rule)
    nb = _neighbours(s, u, v, h, build, c)
    sc = structure_coefficients(s, u, v, rule, h)
    d = {
        "n1u": (nb["u+"].n1 - nb["u-"].n1) / (2 * h), "n1v": (nb["v+"].n1 - nb["v-"].n1) / (2 * h),
        "n2u": (nb["u+"].n2 - nb["u-"].n2) / (2 * h), "n2v": (nb["v+"].n2 - nb["v-"].n2) / (2 * h),
    }
    tu, tv = c.t_u, c.t_v
    r1 = d["n1u"] - (sc.a1_11 * tu + sc.a2_11 * tv + sc.a3_11 * c.n2)
    r2 = d["n1v"] - (sc.a1_12 * tu + sc.a2_12 * tv + sc.a3_12 * c.n2)
    r3 = d["n2u"] - (sc.a1_21 * tu + sc.a2_21 * tv - sc.a3_11 * c.n1)
    r4 = d["n2v"] - (sc.a1_22 * tu + sc.a2_22 * tv - sc.a3_12 * c.n1)
    return np.array([np.linalg.norm(r) for r in (r1, r2, r3, r4)])


# ---------------------------------------------------------------------------
# report plumbing


@dataclass
class ReportEntry:
    condition: str
    max_residual: float
    worst_point: tuple[float, float] | None
    verdict: str
    tolerance: float
    counted: int = 0
    excluded: int = 0
    failed: int = 0
    note: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != "fail"

    def to_dict(self) -> dict:
        return {
            "max_residual": _jsonable(self.max_residual),
            "worst_point": list(self.worst_point) if self.worst_point else None,
            "verdict": self.verdict,
            "tolerance": self.tolerance,
            "counted": self.counted,
            "excluded": self.excluded,
            "failed": self.failed,
            "note": self.note,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    return x


class _Acc:
    """Accumulates per-point residuals in canonical order."""

    def __init__(self, name, tol):
        self.name, self.tol = name, tol
        self.max = 0.0
        self.worst = None
        self.counted = self.excluded = self.failed = 0
        self.reasons: dict[str, int] = {}

    def skip(self, reason="degenerate"):
        self.excluded += 1
        self.reasons[reason] = self.reasons.get(reason, 0) + 1

    def add(self, res, pt):
        self.counted += 1
        if not math.isfinite(res) or res >= self.tol:
            self.failed += 1
        if self.worst is None or res > self.max:
            self.max, self.worst = float(res), pt

    def fail(self, pt, reason):
        self.reasons[reason] = self.reasons.get(reason, 0) + 1
        self.add(math.inf, pt)

    def entry(self, note="", **details) -> ReportEntry:
        if self.failed:
            verdict = "fail"
        elif self.counted == 0:
            verdict = "vacuous"
        else:
            verdict = "pass"
        reasons = ", ".join(f"{k}: {v}" for k, v in sorted(self.reasons.items()))
        note = "; ".join(x for x in (note, reasons) if x)
        return ReportEntry(self.name, self.max, self.worst, verdict, self.tol, self.counted,
                           self.excluded, self.failed, note, details)


def _data(s, grid, tol, data, threads):
    if data is None:
        data = analyze_grid(s, grid, tol, threads)
    return data


# ---------------------------------------------------------------------------
# conditions


def check_orthogonal_asymptotics(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT,
                                 data=None, threads=None) -> ReportEntry:
    """a) two real asymptotic directions, I-orthogonal, at every non-inflection point."""
    acc = _Acc("a", tol.orthogonality)
    for p in _data(s, grid, tol, data, threads):
        if p is None:
            acc.skip("irregular")
            continue
        ds = asymptotic_directions(p.forms, tol.degenerate)
        if ds.degenerate or p.cls.inflection:
            acc.skip("inflection")
        elif len(ds) < 2:
            acc.fail((p.u, p.v), "no real asymptotic pair")
        else:
            d1, d2 = ds.directions
            acc.add(abs(d1.i_cos(d2, *p.forms.first)), (p.u, p.v))
    return acc.entry()


def check_semiumbilicity(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT, data=None,
                         threads=None) -> tuple[ReportEntry, ReportEntry]:
    """b) kN = 0 everywhere and d) every point semiumbilic; same residual, separate tolerances."""
    out = []
    for name, t in (("b", tol.kN), ("d", tol.semiumbilic)):
        acc = _Acc(name, t)
        for p in _data(s, grid, tol, data, threads):
            if p is None:
                acc.skip("irregular")
            else:
                acc.add(abs(p.inv.kN), (p.u, p.v))
        out.append(acc.entry())
    return out[0], out[1]


@dataclass(frozen=True)
class UmbilicalNormal:
    nu: np.ndarray
    lam: float
    residual: float
    coords: np.ndarray


def umbilical_normal_at(p: PointData) -> UmbilicalNormal:
    """Unit normal nu with II_nu = lambda I (lambda >= 0), from a segment or point ellipse."""
    ell = p.ellipse
    if ell.kind not in ("segment", "point"):
        raise EllipseNotSegment(f"ellipse is a {ell.kind} at ({p.u:g}, {p.v:g})")
    H = ell.center
    if ell.kind == "point":
        hn = np.linalg.norm(H)
        c = H / hn if hn > 0 else np.array([0.0, 1.0])
    else:
        d = ell.axis_a / np.linalg.norm(ell.axis_a)
        c = np.array([-d[1], d[0]])
    lam = float(c @ H)
    if lam < 0:
        c, lam = -c, -lam
    b = p.forms
    e = c[0] * b.e1 + c[1] * b.e2
    f = c[0] * b.f1 + c[1] * b.f2
    g = c[0] * b.g1 + c[1] * b.g2
    res = max(abs(e - lam * b.E), abs(f - lam * b.F), abs(g - lam * b.G)) / max(b.E, b.G)
    return UmbilicalNormal(p.frame.from_normal_coords(c), lam, float(res), c)


def find_umbilical_normal(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT, data=None, threads=None):
    """c) and e): nu-umbilicity with lambda = <H, nu> >= 0.

    Returns (nu samples (n, 4), lambda samples (n,), entry c, entry e); samples
    are nan where the ellipse is not a segment or the chart is singular.
    """
    pts = _data(s, grid, tol, data, threads)
    nus = np.full((len(pts), 4), np.nan)
    lams = np.full(len(pts), np.nan)
    ac, ae = _Acc("c", tol.umbilicity), _Acc("e", tol.umbilicity)
    for k, p in enumerate(pts):
        if p is None:
            ac.skip("irregular")
            ae.skip("irregular")
            continue
        try:
            un = umbilical_normal_at(p)
        except EllipseNotSegment:
            ac.fail((p.u, p.v), "ellipse not a segment")
            ae.fail((p.u, p.v), "ellipse not a segment")
            continue
        nus[k], lams[k] = un.nu, un.lam
        ac.add(un.residual, (p.u, p.v))
        if un.lam < tol.minimal:
            ae.skip("lambda = 0")
        else:
            ae.add(un.residual, (p.u, p.v))
    fin = lams[np.isfinite(lams)]
    stats = {}
    if fin.size:
        stats = {"lambda_min": float(fin.min()), "lambda_max": float(fin.max()),
                 "lambda_spread": float(fin.max() - fin.min())}
    return nus, lams, ac.entry(**stats), ae.entry(**stats)


def check_quartic_factorization(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT, data=None,
                                threads=None) -> ReportEntry:
    """h) the axial quartic is a multiple of (mean-directional quadratic) x (asymptotic quadratic)."""
    acc = _Acc("h", tol.factorization)
    for p in _data(s, grid, tol, data, threads):
        if p is None:
            acc.skip("irregular")
            continue
        nb = _normalized(p.forms)
        if nb is None or p.cls.inflection:
            acc.skip("inflection")
            continue
        A = np.array(axial_quartic_coefficients(nb))
        P = factorization_product(nb)
        na, npr = np.linalg.norm(A), np.linalg.norm(P)
        if na <= tol.degenerate and npr <= tol.degenerate:
            acc.skip("both forms vanish")
        elif na <= tol.degenerate or npr <= tol.degenerate:
            acc.fail((p.u, p.v), "one form vanishes")
        else:
            a, q = A / na, P / npr
            # sine of the angle, computed without cancellation
            acc.add(float(np.linalg.norm(a - (a @ q) * q)), (p.u, p.v))
    return acc.entry()


def check_axial_asymptotic_coincidence(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT, data=None,
                                       threads=None) -> tuple[ReportEntry, ReportEntry]:
    """f) asymptotic pair = large-axis cross; g) asymptotic pair = nu_perp-principal directions."""
    af, ag = _Acc("f", tol.angle), _Acc("g", tol.angle)
    for p in _data(s, grid, tol, data, threads):
        if p is None:
            af.skip("irregular")
            ag.skip("irregular")
            continue
        pt = (p.u, p.v)
        asym = asymptotic_directions(p.forms, tol.degenerate)
        if asym.degenerate or p.cls.inflection:
            af.skip("inflection")
            ag.skip("inflection")
            continue
        if len(asym) < 2:
            af.fail(pt, "no real asymptotic pair")
            ag.fail(pt, "no real asymptotic pair")
            continue
        ax = axial_directions_quartic(p.forms, tol.degenerate)
        if ax.degenerate or not ax.crosses:
            af.skip("axiumbilic")
        else:
            af.add(set_angle_distance(asym.directions, ax.large), pt)
        try:
            un = umbilical_normal_at(p)
        except EllipseNotSegment:
            ag.fail(pt, "ellipse not a segment")
            continue
        c = un.coords
        perp = np.array([c[1], -c[0]])
        b = p.forms
        sec = (perp[0] * b.e1 + perp[1] * b.e2, perp[0] * b.f1 + perp[1] * b.f2, perp[0] * b.g1 + perp[1] * b.g2)
        pd = nu_principal_directions(b.first, sec, tol.degenerate)
        if pd.degenerate or len(pd) < 2:
            ag.skip("nu_perp-umbilic")
        else:
            ag.add(set_angle_distance(asym.directions, pd.directions), pt)
    return af.entry(), ag.entry()


def check_constant_projection(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT, data=None,
                              threads=None, lambdas=None) -> tuple[float, ReportEntry]:
    """Constant distance r = lambda of the ellipse's projection, plus the side condition K != r^2."""
    pts = _data(s, grid, tol, data, threads)
    if lambdas is None:
        _, lambdas, _, _ = find_umbilical_normal(s, grid, tol, pts)
    regular = [(k, p) for k, p in enumerate(pts) if p is not None]
    bad = [p for k, p in regular if not np.isfinite(lambdas[k])]
    if not regular:
        return math.nan, ReportEntry("projection", math.nan, None, "vacuous", tol.projection, note="no regular points")
    if bad:
        return math.nan, ReportEntry("projection", math.inf, (bad[0].u, bad[0].v), "fail", tol.projection,
                                     counted=len(regular), failed=len(bad), note="ellipse not a segment")
    r_all = np.array([lambdas[k] for k, _ in regular])
    r = float(np.median(r_all))
    dev = np.abs(r_all - r)
    w = int(np.argmax(dev))
    worst = (regular[w][1].u, regular[w][1].v)
    gap = np.array([abs(p.inv.K - r * r) for _, p in regular])
    details = {"r": r, "lambda_spread": float(dev.max()), "min_abs_K_minus_r2": float(gap.min())}
    entry = ReportEntry("projection", float(dev.max()), worst, "pass", tol.projection, counted=len(regular),
                        details=details)
    if r < tol.minimal:
        entry.verdict, entry.note = "n/a", "lambda vanishes; constant projection needs lambda > 0"
    elif dev.max() >= tol.projection:
        entry.verdict, entry.note = "fail", "lambda is not constant"
        entry.failed = int(np.sum(dev >= tol.projection))
    elif gap.min() <= tol.projection:
        entry.verdict, entry.note = "fail", "K = r^2 somewhere"
        entry.failed = int(np.sum(gap <= tol.projection))
        entry.details["hypothesis_K_ne_r2"] = False
    else:
        entry.details["hypothesis_K_ne_r2"] = True
    return r, entry


# ---------------------------------------------------------------------------
# hypersphere fit


@dataclass(frozen=True)
class SphereFit:
    center: np.ndarray
    radius: float
    rms_residual: float
    condition_indicator: float


def fit_hypersphere(points, min_condition: float = 1e-10) -> SphereFit:
    """Algebraic least-squares 3-sphere through points in R^4.

    Solves |x|^2 = 2 <x, c> + d on centred, scaled data; ``condition_indicator``
    is the ratio of extreme eigenvalues of the normal matrix.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[1] != 4:
        raise ValueError(f"expected points of shape (n, 4), got {X.shape}")
    if len(X) < 6:
        raise ValueError(f"need at least 6 points, got {len(X)}")
    if not np.all(np.isfinite(X)):
        raise ValueError("points contain non-finite values")
    mu = X.mean(axis=0)
    scale = math.sqrt(np.mean(np.sum((X - mu) ** 2, axis=1)))
    if scale == 0.0:
        raise DegenerateCloud("all points coincide")
    Y = (X - mu) / scale
    A = np.column_stack([2 * Y, np.ones(len(Y))])
    rhs = np.sum(Y * Y, axis=1)
    sv = np.linalg.svd(A, compute_uv=False)
    cond = float((sv[-1] / sv[0]) ** 2)
    if cond < min_condition:
        raise DegenerateCloud(f"sphere not determined by the sample (condition indicator {cond:.3g})")
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    cy, d = sol[:4], sol[4]
    r2 = d + cy @ cy
    if r2 <= 0:
        raise DegenerateCloud("fitted squared radius is not positive")
    c = mu + scale * cy
    R = scale * math.sqrt(r2)
    rms = float(np.sqrt(np.mean((np.linalg.norm(X - c, axis=1) - R) ** 2)))
    return SphereFit(c, float(R), rms, cond)


# ---------------------------------------------------------------------------
# codazzi over a sub-grid


def check_codazzi(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT, h: float = 1e-5,
                  max_side: int = 12) -> ReportEntry:
    acc = _Acc("codazzi", tol.codazzi)
    us, vs = grid.axes(s)
    iu = np.unique(np.linspace(0, len(us) - 1, min(max_side, len(us))).round().astype(int))
    iv = np.unique(np.linspace(0, len(vs) - 1, min(max_side, len(vs))).round().astype(int))
    smax = 0.0
    for i in iu:
        for j in iv:
            u, v = float(us[i]), float(vs[j])
            try:
                r = codazzi_residuals(s, u, v, h)
                sr = structure_residuals(s, u, v, h)
            except FrameDiscontinuity:
                acc.skip("frame discontinuity")
                continue
            except DegenerateImmersion:
                acc.skip("irregular")
                continue
            smax = max(smax, float(sr.max()))
            acc.add(float(max(np.abs(r).max(), sr.max())), (u, v))
    return acc.entry(step=h, structure_max=smax)


# ---------------------------------------------------------------------------
# the full report


@dataclass
class VerificationReport:
    surface: str
    grid: dict
    tolerances: dict
    entries: dict[str, ReportEntry]
    consistent: bool
    overall: bool
    flags: list[str] = field(default_factory=list)
    irregular: int = 0

    def to_dict(self) -> dict:
        return {
            "surface": self.surface,
            "grid": self.grid,
            "tolerances": self.tolerances,
            "overall": "pass" if self.overall else "fail",
            "consistent": self.consistent,
            "flags": list(self.flags),
            "irregular_points": self.irregular,
            "conditions": {k: e.to_dict() for k, e in self.entries.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_text(self) -> str:
        lines = [f"surface: {self.surface}",
                 f"grid: {self.grid['nu']}x{self.grid['nv']} inset {self.grid['inset']!r}",
                 f"{'id':<11}{'verdict':<9}{'max_residual':>14}  {'tolerance':>9}  {'n':>5} {'excl':>5} {'fail':>5}  note"]
        for k, e in self.entries.items():
            lines.append(f"{k:<11}{e.verdict:<9}{_fmt(e.max_residual):>14}  {e.tolerance:>9.1e}  "
                         f"{e.counted:>5} {e.excluded:>5} {e.failed:>5}  {e.note}")
        lines.append(f"equivalence verdicts consistent: {'yes' if self.consistent else 'NO'}")
        for f in self.flags:
            lines.append(f"flag: {f}")
        lines.append(f"overall: {'PASS' if self.overall else 'FAIL'}")
        return "\n".join(lines) + "\n"


def _fmt(x):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "-"
    if isinstance(x, float) and math.isinf(x):
        return "inf"
    return f"{x:.3e}"


def verify_equivalences(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT,
                        threads: int | None = None) -> VerificationReport:
    """Run conditions a) to h), the Codazzi sanity check and the hypersphericity addendum."""
    pts = analyze_grid(s, grid, tol, threads)
    ea = check_orthogonal_asymptotics(s, grid, tol, pts)
    eb, ed = check_semiumbilicity(s, grid, tol, pts)
    _, lams, ec, ee = find_umbilical_normal(s, grid, tol, pts)
    ef, eg = check_axial_asymptotic_coincidence(s, grid, tol, pts)
    eh = check_quartic_factorization(s, grid, tol, pts)
    entries = {"a": ea, "b": eb, "c": ec, "d": ed, "e": ee, "f": ef, "g": eg, "h": eh}
    entries["codazzi"] = check_codazzi(s, grid, tol)

    r, ep = check_constant_projection(s, grid, tol, pts, lambdas=lams)
    entries["projection"] = ep
    flags = []
    if ep.note == "K = r^2 somewhere":
        flags.append("K = r^2 somewhere: constant projection alone does not imply a hypersphere")
    if ep.verdict == "pass":
        cloud = np.array([p.frame.p for p in pts if p is not None])
        try:
            fit = fit_hypersphere(cloud)
        except DegenerateCloud as exc:
            entries["sphere_fit"] = ReportEntry("sphere_fit", math.inf, None, "fail", tol.sphere_fit,
                                                counted=len(cloud), failed=1, note=f"degenerate cloud: {exc}")
        else:
            verdict = "pass" if fit.rms_residual < tol.sphere_fit else "fail"
            entries["sphere_fit"] = ReportEntry(
                "sphere_fit", fit.rms_residual, None, verdict, tol.sphere_fit, counted=len(cloud),
                failed=int(verdict == "fail"),
                details={"center": [float(x) for x in fit.center], "radius": fit.radius,
                         "inverse_r": 1.0 / r, "condition_indicator": fit.condition_indicator})
    else:
        entries["sphere_fit"] = ReportEntry("sphere_fit", math.nan, None, "n/a", tol.sphere_fit,
                                            note="constant projection hypotheses not met")

    scored = {entries[k].verdict for k in CONDITIONS if entries[k].verdict in ("pass", "fail")}
    consistent = len(scored) <= 1
    if not consistent:
        flags.append("equivalent conditions disagree")
    vacuous = [k for k in CONDITIONS if entries[k].verdict == "vacuous"]
    if vacuous:
        flags.append(f"vacuous on every grid point: {', '.join(vacuous)}")
    overall = consistent and all(e.verdict != "fail" for e in entries.values())
    irregular = sum(p is None for p in pts)
    return VerificationReport(s.name, grid.describe(s), tol.as_dict(), entries, consistent, overall, flags, irregular)
