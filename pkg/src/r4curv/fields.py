"""Direction fields defined by binary differential equations.

Each family is given at a point by a homogeneous polynomial in (du, dv):
asymptotic lines and mean directionally curved lines by quadratics, lines of
axial curvature by a quartic, nu-principal lines by the Weingarten quadratic.
Roots are returned as projective tangent directions in the chart.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import FormBundle, FrameData, orthonormal_tangent_basis
from .tolerance import DEFAULT

# relative size below which a leading/trailing coefficient is deflated away
_ZERO = 1e-11
# |Im| / (1 + |root|) below which a companion eigenvalue counts as real
_IMAG = 1e-8


@dataclass(frozen=True)
class TangentDirection:
    """Projective direction [du : dv], Euclidean-normalized with du > 0 (or du = 0, dv > 0)."""

    du: float
    dv: float

    @classmethod
    def of(cls, du: float, dv: float) -> "TangentDirection":
        n = math.hypot(du, dv)
        if n == 0 or not math.isfinite(n):
            raise ValueError("zero or non-finite direction")
        du, dv = du / n, dv / n
        if du < 0 or (du == 0 and dv < 0):
            du, dv = -du, -dv
        return cls(float(du) + 0.0, float(dv) + 0.0)

    @property
    def angle(self) -> float:
        """Chart angle in (-pi/2, pi/2]."""
        return math.atan2(self.dv, self.du)

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.du, self.dv])

    def i_inner(self, other: "TangentDirection", E: float, F: float, G: float) -> float:
        return E * self.du * other.du + F * (self.du * other.dv + other.du * self.dv) + G * self.dv * other.dv

    def i_cos(self, other: "TangentDirection", E: float, F: float, G: float) -> float:
        """Cosine of the I-angle between the two lines (sign is meaningless)."""
        return self.i_inner(other, E, F, G) / math.sqrt(self.i_inner(self, E, F, G) * other.i_inner(other, E, F, G))

    def i_unit(self, E: float, F: float, G: float) -> np.ndarray:
        """Chart vector of I-length one along this direction."""
        return self.vector / math.sqrt(self.i_inner(self, E, F, G))


@dataclass(frozen=True)
class DirectionSet:
    """Roots of one binary differential equation at a point.

    For the axial quartic, ``crosses`` holds the (large-axis, small-axis)
    pairs of I-orthogonal directions.
    """

    directions: tuple[TangentDirection, ...] = ()
    multiplicities: tuple[int, ...] = ()
    kind: str = "pair"
    degenerate: bool = False
    crosses: tuple[tuple[TangentDirection, TangentDirection], ...] = ()

    def __post_init__(self):
        limit = 2 if self.kind == "pair" else 4
        if len(self.directions) > limit:
            raise ValueError(f"{self.kind} direction set holds at most {limit} directions")
        if self.degenerate and self.directions:
            raise ValueError("a degenerate direction set carries no directions")

    def __len__(self):
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    @property
    def angles(self) -> list[float]:
        return [d.angle for d in self.directions]

    @property
    def large(self) -> tuple[TangentDirection, ...]:
        return self.crosses[0] if self.crosses else ()

    @property
    def small(self) -> tuple[TangentDirection, ...]:
        return self.crosses[1] if len(self.crosses) > 1 else ()


DEGENERATE_PAIR = DirectionSet(kind="pair", degenerate=True)


def line_angle_distance(a: float, b: float, period: float = math.pi) -> float:
    """Distance between angles modulo ``period``."""
    d = (a - b) % period
    return min(d, period - d)


def set_angle_distance(a, b) -> float:
    """Largest nearest-neighbour angular distance between two direction sets (mod pi).

    Sets of different size are infinitely far apart.
    """
    a, b = list(a), list(b)
    if len(a) != len(b):
        return math.inf
    if not a:
        return 0.0
    da = max(min(line_angle_distance(x.angle, y.angle) for y in b) for x in a)
    db = max(min(line_angle_distance(x.angle, y.angle) for y in a) for x in b)
    return max(da, db)


def _dedupe(dirs, mults, tol=1e-12):
    out, om = [], []
    for d, m in zip(dirs, mults):
        for k, e in enumerate(out):
            if line_angle_distance(d.angle, e.angle) < tol:
                om[k] += m
                break
        else:
            out.append(d)
            om.append(m)
    return out, om


def solve_binary_quadratic(a: float, b: float, c: float, tol: float = DEFAULT.degenerate,
                           scale: float = 1.0) -> DirectionSet:
    """Real projective roots of a du^2 + b du dv + c dv^2 = 0."""
    m = max(abs(a), abs(b), abs(c))
    if m <= tol * scale:
        return DEGENERATE_PAIR
    a, b, c = a / m, b / m, c / m
    disc = b * b - 4 * a * c
    if disc < -1e-12:
        return DirectionSet(kind="pair")
    if abs(a) <= _ZERO and abs(c) <= _ZERO:
        return DirectionSet((TangentDirection.of(1.0, 0.0), TangentDirection.of(0.0, 1.0)), (1, 1))
    if abs(disc) <= 1e-12:
        # double root
        if abs(a) >= abs(c):
            d = TangentDirection.of(-b / (2 * a), 1.0)
        else:
            d = TangentDirection.of(1.0, -b / (2 * c))
        return DirectionSet((d,), (2,))
    r = math.sqrt(disc)
    q = -0.5 * (b + math.copysign(r, b))
    if abs(a) >= abs(c):
        # s = du/dv solves a s^2 + b s + c = 0
        roots = [TangentDirection.of(q / a, 1.0), TangentDirection.of(c / q, 1.0)]
    else:
        # t = dv/du solves c t^2 + b t + a = 0
        roots = [TangentDirection.of(1.0, q / c), TangentDirection.of(1.0, a / q)]
    roots.sort(key=lambda d: d.angle)
    return DirectionSet(tuple(roots), (1, 1))


def binary_form_roots(coeffs, imag_tol: float = _IMAG, zero_tol: float = _ZERO):
    """Real roots of sum_i coeffs[i] du^(n-i) dv^i via companion-matrix eigenvalues.

    Vanishing end coefficients are deflated explicitly: a zero du^n
    coefficient contributes the root [1:0], a zero dv^n coefficient [0:1].
    Returns (directions, multiplicities).
    """
    c = np.asarray(coeffs, dtype=float)
    m = np.max(np.abs(c))
    if m == 0:
        return [], []
    c = c / m
    dirs, mults = [], []
    lo, hi = 0, len(c) - 1
    while lo <= hi and abs(c[lo]) <= zero_tol:
        lo += 1
    while hi >= lo and abs(c[hi]) <= zero_tol:
        hi -= 1
    if lo:
        dirs.append(TangentDirection.of(1.0, 0.0))
        mults.append(lo)
    if hi < len(c) - 1:
        dirs.append(TangentDirection.of(0.0, 1.0))
        mults.append(len(c) - 1 - hi)
    core = c[lo:hi + 1]
    deg = len(core) - 1
    if deg >= 1:
        # roots in s = du/dv of core[0] s^deg + ... + core[deg]
        comp = np.zeros((deg, deg))
        comp[0, :] = -core[1:] / core[0]
        if deg > 1:
            comp[1:, :-1] = np.eye(deg - 1)
        for s in np.linalg.eigvals(comp):
            if abs(s.imag) < imag_tol * (1.0 + abs(s)):
                dirs.append(TangentDirection.of(float(s.real), 1.0))
                mults.append(1)
    dirs, mults = _dedupe(dirs, mults)
    order = sorted(range(len(dirs)), key=lambda k: dirs[k].angle)
    return [dirs[k] for k in order], [mults[k] for k in order]


def _normalized(b: FormBundle) -> FormBundle | None:
    """Bundle with I scaled to unit size and II to unit magnitude; None at flat points."""
    ibar = max(b.E, b.G)
    kbar = b.scale()
    if kbar <= 1e-14 * ibar:
        return None
    return FormBundle(b.E / ibar, b.F / ibar, b.G / ibar,
                      b.e1 / kbar, b.f1 / kbar, b.g1 / kbar,
                      b.e2 / kbar, b.f2 / kbar, b.g2 / kbar)


def asymptotic_coefficients(b: FormBundle) -> tuple[float, float, float]:
    """(T1, T2, T3) of T1 du^2 + T2 du dv + T3 dv^2 = Jac(II_1, II_2)."""
    return (b.e1 * b.f2 - b.e2 * b.f1, b.e1 * b.g2 - b.e2 * b.g1, b.f1 * b.g2 - b.f2 * b.g1)


def mean_directional_coefficients(b: FormBundle) -> tuple[float, float, float]:
    """(B1, B2, B3) of B1 du^2 + 2 B2 du dv + B3 dv^2."""
    E, F, G = b.first
    e1, f1, g1 = b.second1
    e2, f2, g2 = b.second2
    B1 = (e1 * g2 - e2 * g1) * E + 2 * (e2 * f1 - e1 * f2) * F
    B2 = (f1 * g2 - f2 * g1) * E + (e2 * f1 - e1 * f2) * G
    B3 = 2 * (f1 * g2 - f2 * g1) * F + (e2 * g1 - e1 * g2) * G
    return B1, B2, B3


def nu_principal_coefficients(first, second) -> tuple[float, float, float]:
    """(du^2, du dv, dv^2) coefficients of Jac(II_nu, I)."""
    E, F, G = first
    e, f, g = second
    return E * f - F * e, E * g - e * G, F * g - f * G


def axial_quartic_coefficients(b: FormBundle) -> tuple[float, float, float, float, float]:
    """(A0, ..., A4) of the quartic A0 du^4 + A1 du^3 dv + ... + A4 dv^4 for lines of axial curvature."""
    E, F, G = b.first
    e1, f1, g1 = b.second1
    e2, f2, g2 = b.second2
    a2 = e1 * f1 + e2 * f2
    a3 = e1 * g1 + e2 * g2
    a4 = f1 * g1 + f2 * g2
    a5 = 2 * (f1 * f1 + f2 * f2)
    a6 = E * G - 4 * F * F
    ee = e1 * e1 + e2 * e2
    gg = g1 * g1 + g2 * g2
    a0 = 4 * (F * (E * G - 2 * F * F) * ee - E * a6 * a2 - E * E * F * (a3 + a5) + E ** 3 * a4)
    a1 = 4 * (G * a6 * ee + 8 * E * F * G * a2 + E ** 3 * gg - 2 * E * E * G * (a3 + a5))
    A0 = a0 * E ** 3
    A1 = a1 * E ** 3
    A2 = -6 * a0 * G * E * E + 3 * a1 * F * E * E
    A3 = -8 * a0 * E * F * G + a1 * E * (4 * F * F - E * G)
    A4 = a0 * G * (E * G - 4 * F * F) + a1 * F * (2 * F * F - E * G)
    return A0, A1, A2, A3, A4


def factorization_product(b: FormBundle) -> np.ndarray:
    """Coefficients of (B1 du^2 + 2 B2 du dv + B3 dv^2)(T1 du^2 + T2 du dv + T3 dv^2)."""
    B1, B2, B3 = mean_directional_coefficients(b)
    return np.convolve([B1, 2 * B2, B3], list(asymptotic_coefficients(b)))


def asymptotic_directions(b: FormBundle, tol: float = DEFAULT.degenerate) -> DirectionSet:
    """Directions of Jac(II_1, II_2) = 0; degenerate exactly at inflection points."""
    nb = _normalized(b)
    if nb is None:
        return DEGENERATE_PAIR
    return solve_binary_quadratic(*asymptotic_coefficients(nb), tol=tol)


def mean_directional_directions(b: FormBundle, tol: float = DEFAULT.degenerate) -> DirectionSet:
    """Directions of Jac(Jac(II_1, II_2), I) = 0; degenerate at H-singularities."""
    nb = _normalized(b)
    if nb is None:
        return DEGENERATE_PAIR
    B1, B2, B3 = mean_directional_coefficients(nb)
    return solve_binary_quadratic(B1, 2 * B2, B3, tol=tol)


def nu_principal_directions(first, second, tol: float = DEFAULT.degenerate) -> DirectionSet:
    """Eigendirections of the Weingarten operator of nu (Jac(II_nu, I) = 0)."""
    E, F, G = first
    ibar = max(E, G)
    kbar = max(abs(x) for x in second)
    if kbar <= 1e-14 * ibar:
        return DEGENERATE_PAIR
    a, b, c = nu_principal_coefficients((E / ibar, F / ibar, G / ibar), tuple(x / kbar for x in second))
    return solve_binary_quadratic(a, b, c, tol=tol)


def nu_principal_split(first, second, tol: float = DEFAULT.degenerate) -> tuple[TangentDirection, TangentDirection] | None:
    """(min, max) nu-principal directions, ordered by the normal curvature II_nu / I."""
    ds = nu_principal_directions(first, second, tol)
    if ds.degenerate or len(ds) != 2:
        return None
    E, F, G = first
    e, f, g = second

    def k(d):
        return (e * d.du ** 2 + 2 * f * d.du * d.dv + g * d.dv ** 2) / d.i_inner(d, E, F, G)

    d1, d2 = ds.directions
    return (d1, d2) if k(d1) <= k(d2) else (d2, d1)


def normal_curvature_offset(b: FormBundle, d: TangentDirection) -> float:
    """||eta - H||^2 in direction d."""
    E, F, G = b.first
    q = d.i_inner(d, E, F, G)
    H = np.array([(E * b.g1 - 2 * F * b.f1 + G * b.e1), (E * b.g2 - 2 * F * b.f2 + G * b.e2)]) / (2 * b.det)
    eta = np.array([
        b.e1 * d.du ** 2 + 2 * b.f1 * d.du * d.dv + b.g1 * d.dv ** 2,
        b.e2 * d.du ** 2 + 2 * b.f2 * d.du * d.dv + b.g2 * d.dv ** 2,
    ]) / q
    return float(np.sum((eta - H) ** 2))


def pair_crosses(dirs, first, offset) -> tuple[tuple, tuple]:
    """Split four directions into two I-orthogonal pairs; the pair with larger ``offset`` first."""
    E, F, G = first
    best = None
    for pair in combinations(range(4), 2):
        if 0 not in pair:
            continue
        other = tuple(k for k in range(4) if k not in pair)
        cost = max(abs(dirs[pair[0]].i_cos(dirs[pair[1]], E, F, G)),
                   abs(dirs[other[0]].i_cos(dirs[other[1]], E, F, G)))
        if best is None or cost < best[0]:
            best = (cost, pair, other)
    _, p, q = best
    c1 = (dirs[p[0]], dirs[p[1]])
    c2 = (dirs[q[0]], dirs[q[1]])
    n1 = sum(offset(d) for d in c1)
    n2 = sum(offset(d) for d in c2)
    return (c1, c2) if n1 >= n2 else (c2, c1)


def axial_directions_quartic(b: FormBundle, tol: float = DEFAULT.degenerate) -> DirectionSet:
    """Roots of the axial curvature quartic, grouped into large- and small-axis crosses."""
    nb = _normalized(b)
    if nb is None:
        return DirectionSet(kind="quartet", degenerate=True)
    A = np.array(axial_quartic_coefficients(nb))
    if np.max(np.abs(A)) <= tol:
        return DirectionSet(kind="quartet", degenerate=True)
    dirs, mults = binary_form_roots(A)
    if len(dirs) == 4:
        crosses = pair_crosses(dirs, nb.first, lambda d: normal_curvature_offset(nb, d))
        ordered = crosses[0] + crosses[1]
        return DirectionSet(ordered, (1, 1, 1, 1), "quartet", crosses=crosses)
    return DirectionSet(tuple(dirs), tuple(mults), "quartet")


def _eta_samples(f: FrameData, theta: np.ndarray):
    """eta(theta) and d eta / d theta as R^4 normal vectors for I-unit tangents."""
    E, F, G = f.t_u @ f.t_u, f.t_u @ f.t_v, f.t_v @ f.t_v
    w1, w2 = orthonormal_tangent_basis(E, F, G)
    c, s = np.cos(theta), np.sin(theta)
    X = np.outer(c, w1) + np.outer(s, w2)
    Xp = np.outer(-s, w1) + np.outer(c, w2)
    J = np.column_stack([f.t_u, f.t_v])
    proj = np.eye(4) - J @ np.linalg.solve(J.T @ J, J.T)

    def second(a, b):
        return (np.outer(a[:, 0] * b[:, 0], f.s_uu)
                + np.outer(a[:, 0] * b[:, 1] + a[:, 1] * b[:, 0], f.s_uv)
                + np.outer(a[:, 1] * b[:, 1], f.s_vv)) @ proj

    return second(X, X), 2 * second(X, Xp), (w1, w2)


def axial_directions_extremal(f: FrameData, oversample: int = 1024, rel_tol: float = 1e-10) -> DirectionSet:
    """Critical directions of ||eta - H||^2 on the I-unit circle, found by sampling.

    Independent of the quartic: eta is taken straight from the second
    derivatives of alpha projected onto the normal plane, and H as the mean
    of eta over two I-orthogonal directions.
    """
    theta = (np.arange(oversample) + 0.5) * math.pi / oversample
    eta, deta, (w1, w2) = _eta_samples(f, theta)
    e0, _, _ = _eta_samples(f, np.array([0.0, math.pi / 2]))
    H = 0.5 * (e0[0] + e0[1])
    N = np.sum((eta - H) ** 2, axis=1)
    if np.ptp(N) <= rel_tol * max(np.max(N), np.max(np.sum(eta ** 2, axis=1)), 1e-300) or np.max(N) == 0:
        return DirectionSet(kind="quartet", degenerate=True)

    def dN(t):
        e, de, _ = _eta_samples(f, np.array([t]))
        return float(2 * (e[0] - H) @ de[0])

    slope = 2 * np.sum((eta - H) * deta, axis=1)
    found = []
    for k in range(oversample):
        k2 = (k + 1) % oversample
        a, b = theta[k], theta[k2] + (math.pi if k2 == 0 else 0.0)
        sa, sb = slope[k], slope[k2]
        if sa == 0:
            found.append((a, sa > 0))
            continue
        if sa * sb < 0:
            maximum = sa > 0
            fa = sa
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = dN(mid)
                if fm == 0 or b - a < 1e-15:
                    break
                if (fm > 0) == (fa > 0):
                    a, fa = mid, fm
                else:
                    b = mid
            found.append((0.5 * (a + b), maximum))
    dirs, is_max = [], []
    for t, mx in found:
        vec = math.cos(t) * w1 + math.sin(t) * w2
        dirs.append(TangentDirection.of(vec[0], vec[1]))
        is_max.append(mx)
    if len(dirs) == 4:
        large = tuple(d for d, mx in zip(dirs, is_max) if mx)
        small = tuple(d for d, mx in zip(dirs, is_max) if not mx)
        if len(large) == 2:
            return DirectionSet(large + small, (1, 1, 1, 1), "quartet", crosses=(large, small))
    return DirectionSet(tuple(dirs[:4]), (1,) * min(4, len(dirs)), "quartet")
