"""Curvature of surfaces in R^4: fundamental forms, ellipse of curvature, line fields and hypersphericity checks."""
from .core import (
    CurvatureEllipse,
    DegenerateImmersion,
    FormBundle,
    FrameData,
    Invariants,
    NotNormal,
    PointClass,
    PointData,
    analyze,
    classify_point,
    curvature_ellipse,
    frame_at,
    fundamental_forms,
    invariants,
    normal_frame,
)
from .dsl import (
    DomainError,
    EvaluationError,
    ExprNode,
    Jet2,
    ParseError,
    SurfaceDef,
    SurfaceFileError,
    eval_jet2,
    evaluate,
    evaluate_surface,
    parse_expression,
    parse_surface_file,
    to_source,
)
from .fields import (
    DirectionSet,
    TangentDirection,
    asymptotic_directions,
    axial_directions_extremal,
    axial_directions_quartic,
    mean_directional_directions,
    nu_principal_directions,
)
from .grid import GridSpec, analyze_grid
from .integrate import (
    FieldSpec,
    IndexUnresolved,
    IntegralCurve,
    SeedDegenerate,
    SingularOnLoop,
    integrate_line_field,
    singularity_index,
    winding_index,
)
from .theorems import (
    DegenerateCloud,
    EllipseNotSegment,
    FrameDiscontinuity,
    SphereFit,
    StructureCoefficients,
    VerificationReport,
    christoffel_symbols,
    codazzi_residuals,
    fit_hypersphere,
    structure_coefficients,
    verify_equivalences,
)
from .tolerance import DEFAULT, ToleranceSet

__version__ = "0.1.0"
