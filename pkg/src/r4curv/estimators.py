"""scikit-learn style wrappers around the pointwise curvature and sphere-fit routines."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .core import analyze
from .dsl import SurfaceDef
from .theorems import fit_hypersphere
from .tolerance import DEFAULT

CURVATURE_COLUMNS = ("E", "F", "G", "e1", "f1", "g1", "e2", "f2", "g2", "H1", "H2", "kN", "K", "Delta",
                     "ellipse_a", "ellipse_b")


class CurvatureTransformer(TransformerMixin, BaseEstimator):
    """Map chart points (n, 2) to curvature features (n, 16) of a fixed surface.

    Stateless: ``fit`` only validates its input.  Rows where the chart is
    singular come out as nan.
    """

    def __init__(self, surface: SurfaceDef | None = None, tol=DEFAULT):
        self.surface = surface
        self.tol = tol

    def fit(self, X, y=None):
        if self.surface is None:
            raise ValueError("CurvatureTransformer needs a surface")
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected (u, v) columns, got {X.shape[1]} features")
        self.n_features_in_ = 2
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        X = check_array(X, dtype=float)
        if X.shape[1] != 2:
            raise ValueError(f"expected (u, v) columns, got {X.shape[1]} features")
        out = np.full((len(X), len(CURVATURE_COLUMNS)), np.nan)
        for k, (u, v) in enumerate(X):
            try:
                p = analyze(self.surface, float(u), float(v), self.tol)
            except ValueError:
                continue
            inv = p.inv
            out[k] = [*p.forms.as_array(), inv.H1, inv.H2, inv.kN, inv.K, inv.Delta, *p.ellipse.semi_axes]
        return out

    def get_feature_names_out(self, input_features=None):
        return np.array(CURVATURE_COLUMNS, dtype=object)


class HypersphereFitter(BaseEstimator):
    """Algebraic 3-sphere fit of points in R^4; ``transform`` gives signed radial residuals."""

    def __init__(self, min_condition: float = 1e-10):
        self.min_condition = min_condition

    def fit(self, X, y=None):
        X = check_array(X, dtype=float)
        if X.shape[1] != 4:
            raise ValueError(f"expected points in R^4, got {X.shape[1]} features")
        fit = fit_hypersphere(X, self.min_condition)
        self.center_ = fit.center
        self.radius_ = fit.radius
        self.rms_residual_ = fit.rms_residual
        self.condition_indicator_ = fit.condition_indicator
        self.n_features_in_ = 4
        return self

    def transform(self, X):
        check_is_fitted(self, "center_")
        X = check_array(X, dtype=float)
        return (np.linalg.norm(X - self.center_, axis=1) - self.radius_)[:, None]

    def fit_transform(self, X, y=None):
        return self.fit(X).transform(X)

    def score(self, X, y=None):
        """Negative rms radial residual (higher is better)."""
        r = self.transform(X)
        return -float(np.sqrt(np.mean(r * r)))
