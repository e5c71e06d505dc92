"""Random forest with an inner PLS pseudo-sample.

The forest is trained on the labelled window plus one extra row: the
unknown sample's sensor vector paired with a moving-window PLS prediction of
its property.  Trees that draw this row in their bootstrap can route the
unknown to a leaf above or below the window's y range, which a plain forest
cannot do.  The unknown's true property is never an input.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import Forest, ForestConfig, fit_forest, predict_forest
from .numeric import ContractError, DegenerateWindowError, as_matrix, as_vector
from .pls import fit_pls_cv


@dataclass(frozen=True)
class RfPlsConfig:
    rf_window: int = 4
    inner_pls_window: int | None = None   # None -> rf_window - 1
    forest: ForestConfig = field(default_factory=ForestConfig)
    seed: int = 0
    n_pseudo: int = 1
    use_pseudo: bool = True

    @property
    def inner(self) -> int:
        return self.inner_pls_window if self.inner_pls_window is not None else self.rf_window - 1

    def validate(self) -> None:
        if not 2 <= self.inner < self.rf_window:
            raise ContractError(
                f"inner PLS window must satisfy 2 <= inner < rf_window; "
                f"got inner={self.inner}, rf_window={self.rf_window}"
            )
        if not 1 <= self.n_pseudo <= self.rf_window - self.inner + 1:
            raise ContractError(
                f"n_pseudo must lie in [1, {self.rf_window - self.inner + 1}]"
            )


@dataclass(frozen=True)
class RfPlsResult:
    prediction: float
    pls_inner: float          # first pseudo-label; NaN when the inner fit fell back
    pseudo_labels: tuple[float, ...]
    inner_fallback: bool
    forest: Forest


def inner_pls_predictions(window_X, window_y, x_unknown, cfg: RfPlsConfig) -> list[float]:
    """PLS predictions of the unknown from the newest inner windows.

    Pseudo-row ``j`` comes from the inner window ending ``j`` rows before the
    end of the outer window.
    """
    w, m = cfg.rf_window, cfg.inner
    out = []
    for j in range(cfg.n_pseudo):
        lo, hi = w - m - j, w - j
        model = fit_pls_cv(window_X[lo:hi], window_y[lo:hi])
        out.append(model.predict(x_unknown))
    return out


def fit_predict_rfpls(window_X, window_y, x_unknown, cfg: RfPlsConfig | None = None) -> RfPlsResult:
    """Fit the hybrid on one window (oldest row first) and predict ``x_unknown``.

    When the inner window has no X variation, the forest is fit without the
    pseudo-row and ``inner_fallback`` is set.
    """
    cfg = cfg or RfPlsConfig()
    cfg.validate()
    window_X = as_matrix(window_X, "window_X")
    window_y = as_vector(window_y, "window_y")
    x_unknown = as_vector(x_unknown, "x_unknown")
    if window_X.shape[0] != cfg.rf_window or window_y.shape[0] != cfg.rf_window:
        raise ContractError(f"window must hold exactly {cfg.rf_window} labelled rows")
    if x_unknown.shape[0] != window_X.shape[1]:
        raise ContractError("x_unknown length does not match the window's columns")

    pseudo: list[float] = []
    fallback = False
    if cfg.use_pseudo:
        try:
            pseudo = inner_pls_predictions(window_X, window_y, x_unknown, cfg)
        except DegenerateWindowError:
            pseudo, fallback = [], True
    if pseudo:
        X_aug = np.vstack([window_X, np.tile(x_unknown, (len(pseudo), 1))])
        y_aug = np.concatenate([window_y, pseudo])
    else:
        X_aug, y_aug = window_X, window_y
    forest = fit_forest(X_aug, y_aug, cfg.forest, cfg.seed)
    return RfPlsResult(
        prediction=predict_forest(forest, x_unknown),
        pls_inner=pseudo[0] if pseudo else float("nan"),
        pseudo_labels=tuple(pseudo),
        inner_fallback=fallback,
        forest=forest,
    )
