from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DegenerateImmersion, PointData, analyze_frame, normal_frame
from .dsl import SurfaceDef, eval_immersion_jet, jet_array
from .tolerance import DEFAULT, ToleranceSet


@dataclass(frozen=True)
class GridSpec:
    """nu x nv cell-centred samples of the chart; ``inset`` trims open edges."""

    nu: int = 32
    nv: int = 32
    inset: float = 0.0

    def __post_init__(self):
        if self.nu < 2 or self.nv < 2:
            raise ValueError("grid needs at least 2 samples per direction")
        if self.inset < 0:
            raise ValueError("inset must be non-negative")

    @classmethod
    def parse(cls, text: str, inset: float = 0.0) -> "GridSpec":
        try:
            a, b = text.lower().split("x")
            return cls(int(a), int(b), inset)
        except ValueError:
            raise ValueError(f"grid must look like NUxNV, got {text!r}") from None

    def axes(self, s: SurfaceDef) -> tuple[np.ndarray, np.ndarray]:
        return (_axis(s.u_range, s.periodic_u, self.nu, self.inset),
                _axis(s.v_range, s.periodic_v, self.nv, self.inset))

    def points(self, s: SurfaceDef) -> list[tuple[float, float]]:
        """Row-major: u varies slowest."""
        us, vs = self.axes(s)
        return [(float(a), float(b)) for a in us for b in vs]

    def describe(self, s: SurfaceDef) -> dict:
        us, vs = self.axes(s)
        return {"nu": self.nu, "nv": self.nv, "inset": self.inset,
                "u": [float(us[0]), float(us[-1])], "v": [float(vs[0]), float(vs[-1])]}


def _axis(rng, periodic, n, inset):
    a, b = rng
    if not periodic:
        a, b = a + inset, b - inset
        if not a < b:
            raise ValueError("inset leaves an empty domain")
    return a + (np.arange(n) + 0.5) * (b - a) / n


def thread_cap(default: int | None = None) -> int:
    env = os.environ.get("R4CURV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return default or min(8, os.cpu_count() or 1)


def map_rows(fn, rows, threads: int | None = None):
    """Ordered map over rows; the result never depends on the thread count."""
    threads = thread_cap(threads)
    if threads <= 1 or len(rows) <= 1:
        return [fn(r) for r in rows]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, rows))


def analyze_grid(s: SurfaceDef, grid: GridSpec, tol: ToleranceSet = DEFAULT,
                 threads: int | None = None) -> list[PointData | None]:
    """Pointwise curvature data in row-major order; None where the chart is singular."""
    us, vs = grid.axes(s)
    U, V = np.meshgrid(us, vs, indexing="ij")
    jets = jet_array(eval_immersion_jet(s, U, V))

    def row(i):
        out = []
        for j in range(len(vs)):
            try:
                f = normal_frame(jets[i, j], eps_reg=tol.regularity)
            except DegenerateImmersion:
                out.append(None)
                continue
            out.append(analyze_frame(f, float(us[i]), float(vs[j]), tol))
        return out

    rows = map_rows(row, list(range(len(us))), threads)
    return [p for r in rows for p in r]
