"""Recursive PLS with a forgetting factor.

Each update refits on the previous model's loadings stacked over the new
window::

    X_aug = [ lam * P_old.T            ]     y_aug = [ lam * B_old * q_old      ]
            [ c * (xbar_old - xbar_new) ]             [ c * (ybar_old - ybar_new) ]
            [ X_new - xbar_new          ]             [ y_new - ybar_new          ]

With unit-norm scores ``P P.T`` and ``P b`` equal the old window's ``X.T X``
and ``X.T y`` (captured part), so the augmented blocks carry the old scatter
weighted by ``lam**2`` plus the new scatter.  The middle row is the
between-means term, ``c = sqrt(lam**2 n_old n_new / (lam**2 n_old + n_new))``;
together the rows equal the weighted scatter about the pooled mean, which
becomes the new model's centre.  ``lam = 0`` therefore reduces exactly to a
plain fit on the new window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numeric import ContractError, DegenerateWindowError, as_matrix, as_vector
from .pls import PlsModel, fit_centered, fit_pls_cv, loo_rmsep, pick_smallest_best, predict_pls, rank_floor

# forgetting factors used for the benchmark property series
PRESET_LAMBDA = {
    "debutanizer": 0.01,
    "sru_h2s": 0.05,
    "sru_so2": 0.05,
    "penicillin": 0.10,
}


@dataclass(frozen=True)
class RplsState:
    lam: float
    P_old: np.ndarray
    q_old: np.ndarray
    B_old: np.ndarray
    model: PlsModel
    k: int
    n_eff: float  # lam-weighted number of samples the state summarises

    def predict(self, x) -> float:
        return predict_pls(self.model, x)


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam <= 1.0:
        raise ContractError(f"forgetting factor must lie in [0, 1], got {lam}")
    return lam


def rpls_init(X, y, lam: float) -> RplsState:
    """First window: a plain PLS fit with LOO-selected component count."""
    lam = _check_lam(lam)
    model = fit_pls_cv(X, y)
    return _state_from(model, lam, float(np.shape(X)[0]))


def _state_from(model: PlsModel, lam: float, n_eff: float) -> RplsState:
    return RplsState(
        lam=lam, P_old=model.P, q_old=model.q, B_old=model.B_inner,
        model=model, k=model.n_latent, n_eff=n_eff,
    )


def _augment(state: RplsState, X_new: np.ndarray, y_new: np.ndarray):
    lam = state.lam
    m = state.model
    n_new = X_new.shape[0]
    xn, yn = X_new.mean(axis=0), float(y_new.mean())
    w_old = lam * lam * state.n_eff
    total = w_old + n_new
    c = math.sqrt(w_old * n_new / total)
    Xa = np.vstack([
        lam * state.P_old.T,
        c * (m.x_means - xn)[None, :],
        X_new - xn,
    ])
    ya = np.concatenate([
        lam * state.B_old * state.q_old,
        [c * (m.y_mean - yn)],
        y_new - yn,
    ])
    x_means = (w_old * m.x_means + n_new * xn) / total
    y_mean = (w_old * m.y_mean + n_new * yn) / total
    return Xa, ya, x_means, y_mean, total


def rpls_update(state: RplsState, X_new, y_new) -> RplsState:
    """Refit on the augmented blocks; k is re-chosen by leave-one-out.

    Folds hold out one new sample at a time and rebuild the augmented blocks
    from the rest, so the past model is always present in training.
    Candidates run over ``1..min(k_old + n_new - 2, c)``.
    """
    X_new = as_matrix(X_new, "X_new")
    y_new = as_vector(y_new, "y_new")
    n_new, c = X_new.shape
    if c != state.P_old.shape[0]:
        raise ContractError(f"X_new has {c} columns, state expects {state.P_old.shape[0]}")
    if n_new != y_new.shape[0] or n_new < 1:
        raise ContractError("X_new and y_new must have the same, non-zero, length")

    Xa, ya, x_means, y_mean, total = _augment(state, X_new, y_new)
    raw_norm = np.linalg.norm(X_new)
    if np.linalg.norm(Xa) <= 1e-12 * raw_norm or not np.any(Xa):
        raise DegenerateWindowError("augmented recursive-PLS block has no variation")

    k_max = min(state.k + n_new - 2, c)
    if n_new < 2 or k_max < 1:
        k = max(1, min(state.k, c))
    else:
        parts = []
        for i in range(n_new):
            keep = np.arange(n_new) != i
            Xf = X_new[keep]
            Xfa, yfa, xm, ym, _ = _augment(state, Xf, y_new[keep])
            parts.append((Xfa, yfa, xm, ym, rank_floor(Xfa, Xf)))
        Xs, ys, xms, yms, floors = (np.array(v) for v in zip(*parts))
        k = pick_smallest_best(loo_rmsep((Xs, ys, xms, yms, X_new, y_new, floors), k_max))
    model = fit_centered(Xa, ya, k, x_means, y_mean, rank_floor(Xa, X_new))
    return _state_from(model, state.lam, total)


def rpls_predict(state: RplsState, x) -> float:
    return predict_pls(state.model, x)
