"""Pointwise curvature of a surface in R^4.

Adapted frame, first and second fundamental forms, the scalar invariants
(mean curvature vector, normal curvature, resultant, Gaussian curvature),
the ellipse of curvature and the pointwise classification built on them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .dsl import Jet2, SurfaceDef, eval_immersion_jet, jet_array
from .tolerance import DEFAULT, ToleranceSet


class DegenerateImmersion(ValueError):
    """alpha_u and alpha_v are (numerically) linearly dependent."""


class NotNormal(ValueError):
    """A vector offered as unit normal is not unit or not normal."""


@dataclass(frozen=True)
class FrameData:
    """Adapted positive frame {t_u, t_v, n1, n2} at alpha(u, v).

    ``selection`` records which standard basis vectors seeded n1 and n2, so
    that the same smooth frame field can be rebuilt at nearby points.
    """

    p: np.ndarray
    t_u: np.ndarray
    t_v: np.ndarray
    s_uu: np.ndarray
    s_uv: np.ndarray
    s_vv: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    selection: tuple[int, int] = (0, 1)

    def rotated(self, angle: float) -> "FrameData":
        """Same point with the normal frame rotated by ``angle`` in its plane."""
        c, s = math.cos(angle), math.sin(angle)
        return replace(self, n1=c * self.n1 + s * self.n2, n2=-s * self.n1 + c * self.n2)

    def with_normals(self, n1, n2) -> "FrameData":
        return replace(self, n1=np.asarray(n1, float), n2=np.asarray(n2, float))

    def normal_part(self, x: np.ndarray) -> np.ndarray:
        """Coordinates of x in (n1, n2)."""
        return np.array([x @ self.n1, x @ self.n2])

    def from_normal_coords(self, c) -> np.ndarray:
        return c[0] * self.n1 + c[1] * self.n2


def _jet_matrix(jets) -> np.ndarray:
    if isinstance(jets, np.ndarray):
        m = np.asarray(jets, dtype=float)
    else:
        m = jet_array(jets)
    if m.shape != (6, 4):
        raise ValueError(f"expected jets for a single point, got array of shape {m.shape}")
    return m


def normal_frame(jets: Sequence[Jet2] | np.ndarray, selection: tuple[int, int] | None = None,
                 eps_reg: float = DEFAULT.regularity) -> FrameData:
    """Build the adapted frame from the four component jets of alpha.

    The standard basis of R^4 is projected onto the normal plane; the largest
    projection gives n1, the basis vector whose projection has the largest
    part orthogonal to n1 gives n2 (Gram-Schmidt), and n2 is flipped when
    needed to make {t_u, t_v, n1, n2} positive.  Passing ``selection``
    forces the two seeding basis vectors.
    """
    m = _jet_matrix(jets)
    p, t_u, t_v, s_uu, s_uv, s_vv = (m[k].copy() for k in range(6))
    E, F, G = t_u @ t_u, t_u @ t_v, t_v @ t_v
    if not (E > 0 and G > 0) or E * G - F * F <= eps_reg * E * G:
        raise DegenerateImmersion(f"alpha_u, alpha_v dependent (E={E:.3g}, F={F:.3g}, G={G:.3g})")

    J = np.column_stack([t_u, t_v])
    proj = np.eye(4) - J @ np.linalg.solve(J.T @ J, J.T)
    proj = 0.5 * (proj + proj.T)
    norms = np.linalg.norm(proj, axis=0)
    if selection is None:
        i = int(np.argmax(norms))
    else:
        i = selection[0]
    n1 = proj[:, i] / norms[i]
    rest = proj - np.outer(n1, n1 @ proj)
    rnorms = np.linalg.norm(rest, axis=0)
    if selection is None:
        rnorms[i] = -1.0
        j = int(np.argmax(rnorms))
    else:
        j = selection[1]
    if rnorms[j] <= 1e-8:
        raise DegenerateImmersion("normal frame seed vectors are dependent")
    n2 = rest[:, j] / rnorms[j]
    # one re-orthogonalization pass keeps |<n_i, t>| at round-off level
    for _ in range(2):
        n1 = proj @ n1
        n1 /= np.linalg.norm(n1)
        n2 = proj @ n2
        n2 -= (n2 @ n1) * n1
        n2 /= np.linalg.norm(n2)
    if np.linalg.det(np.column_stack([t_u, t_v, n1, n2])) < 0:
        n2 = -n2
    return FrameData(p, t_u, t_v, s_uu, s_uv, s_vv, n1, n2, (i, j))


def frame_at(s: SurfaceDef, u: float, v: float, selection=None, eps_reg: float = DEFAULT.regularity) -> FrameData:
    return normal_frame(eval_immersion_jet(s, u, v), selection, eps_reg)


@dataclass(frozen=True)
class FormBundle:
    """Coefficients of I and of II relative to (n1, n2)."""

    E: float
    F: float
    G: float
    e1: float
    f1: float
    g1: float
    e2: float
    f2: float
    g2: float

    @property
    def det(self) -> float:
        return self.E * self.G - self.F * self.F

    @property
    def first(self) -> tuple[float, float, float]:
        return self.E, self.F, self.G

    @property
    def second1(self) -> tuple[float, float, float]:
        return self.e1, self.f1, self.g1

    @property
    def second2(self) -> tuple[float, float, float]:
        return self.e2, self.f2, self.g2

    def scale(self) -> float:
        """Magnitude used to make degeneracy thresholds parametrization-aware."""
        return max(abs(self.e1), abs(self.f1), abs(self.g1), abs(self.e2), abs(self.f2), abs(self.g2), 0.0)

    def as_array(self) -> np.ndarray:
        return np.array([self.E, self.F, self.G, self.e1, self.f1, self.g1, self.e2, self.f2, self.g2])


def fundamental_forms(f: FrameData) -> FormBundle:
    return FormBundle(*(float(x) for x in (
        f.t_u @ f.t_u, f.t_u @ f.t_v, f.t_v @ f.t_v,
        f.s_uu @ f.n1, f.s_uv @ f.n1, f.s_vv @ f.n1,
        f.s_uu @ f.n2, f.s_uv @ f.n2, f.s_vv @ f.n2,
    )))


@dataclass(frozen=True)
class Invariants:
    H1: float
    H2: float
    kN: float
    K: float
    Delta: float
    Hnorm: float


def resultant_matrix(b: FormBundle) -> np.ndarray:
    return np.array([
        [b.e1, 2 * b.f1, b.g1, 0.0],
        [b.e2, 2 * b.f2, b.g2, 0.0],
        [0.0, b.e1, 2 * b.f1, b.g1],
        [0.0, b.e2, 2 * b.f2, b.g2],
    ])


def invariants(b: FormBundle) -> Invariants:
    E, F, G = b.first
    e1, f1, g1 = b.second1
    e2, f2, g2 = b.second2
    D = b.det
    H1 = (E * g1 - 2 * F * f1 + G * e1) / (2 * D)
    H2 = (E * g2 - 2 * F * f2 + G * e2) / (2 * D)
    # kN and Delta carry D^(3/2) and D^2 so that they do not depend on the
    # chart; on orthonormal charts (D = 1) these are the usual expressions
    kN = (E * (f1 * g2 - f2 * g1) - F * (e1 * g2 - e2 * g1) + G * (e1 * f2 - e2 * f1)) / (2 * D * math.sqrt(D))
    K = (e1 * g1 - f1 * f1 + e2 * g2 - f2 * f2) / D
    Delta = float(np.linalg.det(resultant_matrix(b))) / (4 * D * D)
    return Invariants(float(H1), float(H2), float(kN), float(K), Delta, math.hypot(H1, H2))


@dataclass(frozen=True)
class CurvatureEllipse:
    """Ellipse of curvature in (n1, n2) coordinates.

    For an I-unit tangent at angle theta (from alpha_u, measured in I),
    eta(theta) = center + cos(2 theta) * B + sin(2 theta) * C.
    """

    center: np.ndarray
    axis_a: np.ndarray
    axis_b: np.ndarray
    kind: str
    radial: bool
    B: np.ndarray = field(repr=False, default=None)
    C: np.ndarray = field(repr=False, default=None)

    @property
    def semi_axes(self) -> tuple[float, float]:
        return float(np.linalg.norm(self.axis_a)), float(np.linalg.norm(self.axis_b))

    @property
    def area(self) -> float:
        a, b = self.semi_axes
        return math.pi * a * b

    def eta(self, theta):
        """Point(s) of the ellipse hit by the I-unit tangent at angle(s) theta; shape (..., 2)."""
        theta = np.asarray(theta, dtype=float)
        c = np.cos(2 * theta)[..., None]
        sn = np.sin(2 * theta)[..., None]
        return self.center + c * self.B + sn * self.C


def orthonormal_tangent_basis(E: float, F: float, G: float) -> tuple[np.ndarray, np.ndarray]:
    """I-orthonormal chart vectors w1 (along d/du) and w2, positively oriented."""
    D = E * G - F * F
    w1 = np.array([1.0 / math.sqrt(E), 0.0])
    w2 = np.array([-F / math.sqrt(E * D), math.sqrt(E / D)])
    return w1, w2


def ellipse_coefficients(b: FormBundle) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(H, B, C) with eta(theta) = H + cos(2 theta) B + sin(2 theta) C."""
    E, F, G = b.first
    D = b.det
    out = []
    for e, f, g in (b.second1, b.second2):
        a = e / E
        bb = (E * f - F * e) / (E * math.sqrt(D))
        c = (e * F * F - 2 * f * E * F + g * E * E) / (E * D)
        out.append(((a + c) / 2, (a - c) / 2, bb))
    H = np.array([out[0][0], out[1][0]])
    B = np.array([out[0][1], out[1][1]])
    C = np.array([out[0][2], out[1][2]])
    return H, B, C


def curvature_ellipse(b: FormBundle, tol: float = DEFAULT.ellipse) -> CurvatureEllipse:
    H, B, C = ellipse_coefficients(b)
    M = np.column_stack([B, C])
    U, sv, _ = np.linalg.svd(M)
    major, minor = float(sv[0]), float(sv[1])
    axis_a = U[:, 0] * major
    axis_b = U[:, 1] * minor
    hn = float(np.linalg.norm(H))
    if major < tol * (hn + 1.0):
        kind = "point"
    elif abs(major - minor) < tol * major:
        kind = "circle"
    elif minor < tol * major:
        kind = "segment"
    else:
        kind = "generic"
    if kind == "point":
        radial = True
    elif kind == "segment":
        d = U[:, 0]
        radial = abs(H[0] * d[1] - H[1] * d[0]) < tol * (hn + major)
    else:
        radial = False
    return CurvatureEllipse(H, axis_a, axis_b, kind, radial, B, C)


@dataclass(frozen=True)
class PointClass:
    inflection: bool
    minimal: bool
    axiumbilic: bool
    semiumbilic: bool
    nu_umbilic_candidate: bool
    residuals: dict = field(default_factory=dict)

    def flags(self) -> dict[str, bool]:
        return {
            "inflection": self.inflection,
            "minimal": self.minimal,
            "axiumbilic": self.axiumbilic,
            "semiumbilic": self.semiumbilic,
            "nu_umbilic_candidate": self.nu_umbilic_candidate,
        }


def classify_point(inv: Invariants, ell: CurvatureEllipse, tol: ToleranceSet = DEFAULT) -> PointClass:
    """Flag inflection, minimal, axiumbilic and semiumbilic points.

    ``nu_umbilic_candidate`` marks points whose ellipse is a segment or a
    point, i.e. where some unit normal nu makes II_nu proportional to I.
    """
    major, minor = ell.semi_axes
    res = {
        "inflection": max(abs(inv.Delta), abs(inv.kN)),
        "minimal": inv.Hnorm,
        "axiumbilic": min(major, abs(major - minor)),
        "semiumbilic": abs(inv.kN),
        "nu_umbilic_candidate": minor,
    }
    return PointClass(
        inflection=res["inflection"] < tol.inflection,
        minimal=res["minimal"] < tol.minimal,
        axiumbilic=ell.kind in ("circle", "point"),
        semiumbilic=res["semiumbilic"] < tol.semiumbilic,
        nu_umbilic_candidate=ell.kind in ("segment", "point"),
        residuals=res,
    )


def nu_second_form(f: FrameData, nu, tol: float = 1e-8) -> tuple[float, float, float]:
    """Coefficients (e_nu, f_nu, g_nu) of the second form relative to ``nu``."""
    nu = np.asarray(nu, dtype=float)
    if abs(np.linalg.norm(nu) - 1.0) > tol:
        raise NotNormal(f"|nu| = {np.linalg.norm(nu):.12g}, expected 1")
    for t in (f.t_u, f.t_v):
        if abs(nu @ t) > tol * max(1.0, np.linalg.norm(t)):
            raise NotNormal("nu is not orthogonal to the tangent plane")
    return float(f.s_uu @ nu), float(f.s_uv @ nu), float(f.s_vv @ nu)


def nu_principal_curvatures(first, second) -> tuple[float, float]:
    """Roots k1 <= k2 of det(II_nu - k I) = 0."""
    E, F, G = first
    e, f, g = second
    D = E * G - F * F
    mean2 = E * g - 2 * F * f + G * e
    c = e * g - f * f
    disc = mean2 * mean2 - 4 * D * c
    if disc < 0:
        if disc < -1e-12 * max(1.0, mean2 * mean2):
            raise ValueError(f"negative discriminant {disc!r} for a symmetric pencil")
        disc = 0.0
    r = math.sqrt(disc)
    return (mean2 - r) / (2 * D), (mean2 + r) / (2 * D)


@dataclass(frozen=True)
class PointData:
    """Everything the line fields and the checks need at one chart point."""

    u: float
    v: float
    frame: FrameData
    forms: FormBundle
    inv: Invariants
    ellipse: CurvatureEllipse
    cls: PointClass


def analyze(s: SurfaceDef, u: float, v: float, tol: ToleranceSet = DEFAULT, frame: FrameData | None = None) -> PointData:
    if frame is None:
        frame = frame_at(s, u, v, eps_reg=tol.regularity)
    return analyze_frame(frame, u, v, tol)


def analyze_frame(frame: FrameData, u: float, v: float, tol: ToleranceSet = DEFAULT) -> PointData:
    b = fundamental_forms(frame)
    inv = invariants(b)
    ell = curvature_ellipse(b, tol.ellipse)
    return PointData(u, v, frame, b, inv, ell, classify_point(inv, ell, tol))
