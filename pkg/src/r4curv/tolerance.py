from __future__ import annotations

from dataclasses import dataclass, fields, replace


@dataclass(frozen=True)
class ToleranceSet:
    """Named thresholds for every numerical decision the library makes.

    Curvature-valued residuals (kN, Delta, |H|) are compared raw: their
    defining formulas already divide by EG - F^2, so they do not depend on
    the chart's scale.
    """

    regularity: float = 1e-10
    inflection: float = 1e-7
    minimal: float = 1e-7
    semiumbilic: float = 1e-7
    ellipse: float = 1e-7
    degenerate: float = 1e-9
    orthogonality: float = 1e-7
    kN: float = 1e-7
    umbilicity: float = 1e-7
    factorization: float = 1e-7
    angle: float = 1e-6
    projection: float = 1e-7
    codazzi: float = 1e-6
    sphere_fit: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            val = getattr(self, f.name)
            if not val > 0:
                raise ValueError(f"tolerance {f.name} must be positive, got {val!r}")

    @classmethod
    def names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def with_overrides(self, **kw) -> "ToleranceSet":
        kw = {k: v for k, v in kw.items() if v is not None}
        unknown = set(kw) - set(self.names())
        if unknown:
            raise ValueError(f"unknown tolerance(s): {', '.join(sorted(unknown))}")
        return replace(self, **kw)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


DEFAULT = ToleranceSet()
