"""Single-response PLS regression for small calibration windows.

NIPALS with unit-length X scores: each component stores a weight ``w``
scaled so that ``t = E @ w`` has norm one, the X loading ``p = E.T @ t`` and
the inner coefficient ``b = f.T @ t`` (``u.T @ t`` with ``u`` the current
y residual).  The y loading of a single response is 1, so ``y = T diag(b) 1``.
This is the convention recursive PLS needs: ``P P.T`` and ``P b`` reproduce
``X.T X`` and ``X.T y`` for the captured part of the data.
"""
from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .numeric import ContractError, DegenerateWindowError, as_matrix, as_vector

NIPALS_TOL = 1e-12
NIPALS_MAX_ITER = 500
# a component whose raw score norm falls below this fraction of ||X||_F is
# treated as exhausted rank and contributes nothing
RANK_TOL = 1e-10
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class PlsModel:
    n_latent: int
    W: np.ndarray          # c x k, scaled so t = E w
    P: np.ndarray          # c x k
    q: np.ndarray          # k, y loadings (all 1 for one response)
    B_inner: np.ndarray    # k, u.T t per component
    coefficients: np.ndarray
    x_means: np.ndarray
    y_mean: float
    scores: np.ndarray     # n x k training scores, unit columns

    def predict(self, x) -> float:
        return predict_pls(self, x)

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return self.y_mean + (X - self.x_means) @ self.coefficients


@dataclass(frozen=True)
class CvChoice:
    chosen_latent: int
    per_k_rmsep: list[tuple[int, float]]


def nipals(X: np.ndarray, y: np.ndarray, n_comp: int, floor: float | None = None):
    """Extract ``n_comp`` components from already centred (or augmented) blocks.

    Returns ``(W, P, b, T)``.  Components whose raw score norm is at or below
    ``floor`` (default ``RANK_TOL * ||X||``) mark exhausted rank; they and all
    later components are returned as zeros.
    """
    X = np.asarray(X, dtype=np.float64)
    if floor is None:
        floor = RANK_TOL * np.linalg.norm(X)
    W, P, b, T = nipals_batch(X[None], np.asarray(y, dtype=np.float64)[None], n_comp,
                              np.array([floor]))
    return W[0], P[0], b[0], T[0]


def _norms(v: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def nipals_batch(X: np.ndarray, y: np.ndarray, n_comp: int, floor: np.ndarray):
    """NIPALS run independently on a stack of same-shaped problems.

    ``X`` is ``(F, m, c)``, ``y`` is ``(F, m)`` and ``floor`` is ``(F,)``.
    Each problem follows exactly the single-problem recursion; batching only
    removes Python overhead for leave-one-out folds.
    """
    F, m, c = X.shape
    E = X.copy()
    f = y.copy()
    W = np.zeros((F, c, n_comp))
    P = np.zeros((F, c, n_comp))
    T = np.zeros((F, m, n_comp))
    b = np.zeros((F, n_comp))
    alive = floor > 0.0
    rows = np.arange(F)
    for a in range(n_comp):
        if not alive.any():
            break
        w = np.einsum("fmc,fm->fc", E, f)
        wn = _norms(w)
        colsq = np.einsum("fmc,fmc->fc", E, E)
        # y residual orthogonal to X: follow the largest X column instead,
        # which keeps the loadings informative and gives b = 0
        orth = wn <= 1e-12 * np.sqrt(colsq.sum(axis=1)) * _norms(f)
        w = w / np.where(orth, 1.0, wn)[:, None]
        if orth.any():
            w[orth] = 0.0
            w[rows[orth], np.argmax(colsq[orth], axis=1)] = 1.0
        t = np.einsum("fmc,fc->fm", E, w)
        active = ~orth & alive
        for _ in range(NIPALS_MAX_ITER):
            if not active.any():
                break
            ft = np.einsum("fm,fm->f", f, t)
            tt = np.einsum("fm,fm->f", t, t)
            ok = active & (ft != 0.0) & (tt != 0.0)
            q = np.where(ok, ft, 1.0) / np.where(ok, tt, 1.0)
            u = f / q[:, None]
            w_new = np.einsum("fmc,fm->fc", E, u)
            w_new /= np.where(ok, _norms(w_new), 1.0)[:, None]
            t_new = np.einsum("fmc,fc->fm", E, w_new)
            moved = _norms(t_new - t)
            w = np.where(ok[:, None], w_new, w)
            t = np.where(ok[:, None], t_new, t)
            active = ok & (moved > NIPALS_TOL * _norms(t))
        tn = _norms(t)
        alive &= tn > floor
        scale = np.where(alive, 1.0 / np.where(tn > 0, tn, 1.0), 0.0)
        t = t * scale[:, None]
        w = w * scale[:, None]
        p = np.einsum("fmc,fm->fc", E, t)
        ba = np.einsum("fm,fm->f", f, t)
        E -= t[:, :, None] * p[:, None, :]
        f = f - ba[:, None] * t
        W[:, :, a], P[:, :, a], T[:, :, a], b[:, a] = w, p, t, ba
    return W, P, b, T


def rotations(W: np.ndarray, P: np.ndarray) -> np.ndarray:
    """Columns ``r_a`` with ``t_a = x @ r_a`` on undeflated centred ``x``.

    Equal to ``W (P.T W)^-1``; built recursively so zero components are safe.
    Works on a single ``(c, k)`` pair or a stack ``(F, c, k)``.
    """
    R = np.zeros_like(W)
    for a in range(W.shape[-1]):
        r = W[..., a].copy()
        for j in range(a):
            r -= R[..., j] * np.einsum("...c,...c->...", P[..., j], W[..., a])[..., None]
        R[..., a] = r
    return R


def _check_xy(X, y, min_rows: int = 2):
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    if X.shape[0] != y.shape[0]:
        raise ContractError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < min_rows:
        raise ContractError(f"need at least {min_rows} rows, got {X.shape[0]}")
    return X, y


def rank_floor(Xc: np.ndarray, X: np.ndarray) -> float:
    """Score-norm floor for centred ``Xc``; the raw ``X`` term keeps rounding
    residue from centring constant columns out of the model."""
    return max(RANK_TOL * np.linalg.norm(Xc), 1e-12 * np.linalg.norm(X))


def _is_flat(Xc: np.ndarray, X: np.ndarray) -> bool:
    return np.linalg.norm(Xc) <= 1e-12 * np.linalg.norm(X)


def fit_centered(Xc, yc, n_latent, x_means, y_mean, floor=None) -> PlsModel:
    """Fit on blocks that are already expressed about ``x_means``/``y_mean``."""
    W, P, b, T = nipals(Xc, yc, n_latent, floor)
    coef = rotations(W, P) @ b
    return PlsModel(
        n_latent=n_latent, W=W, P=P, q=np.ones(n_latent), B_inner=b,
        coefficients=coef, x_means=np.asarray(x_means, dtype=np.float64),
        y_mean=float(y_mean), scores=T,
    )


def fit_pls(X, y, n_latent: int) -> PlsModel:
    """Mean-centre both blocks and extract ``n_latent`` components.

    Raises DegenerateWindowError when no column of ``X`` varies.
    """
    X, y = _check_xy(X, y)
    n, c = X.shape
    if not 1 <= n_latent <= min(n - 1, c):
        raise ContractError(
            f"n_latent must lie in [1, {min(n - 1, c)}] for a {n}x{c} window, got {n_latent}"
        )
    x_means = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_means
    if _is_flat(Xc, X):
        raise DegenerateWindowError("every sensor column is constant in this window")
    return fit_centered(Xc, y - y_mean, n_latent, x_means, y_mean, rank_floor(Xc, X))


def predict_pls(m: PlsModel, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != m.x_means.shape:
        raise ContractError(f"x has shape {x.shape}, model expects {m.x_means.shape}")
    return float(m.y_mean + (x - m.x_means) @ m.coefficients)


def loo_rmsep(folds, k_max: int) -> list[float]:
    """Leave-one-out RMSEP for ``k = 1..k_max``.

    ``folds`` is ``(Xa, ya, x_means, y_means, x_out, y_out, floors)`` stacked
    over folds: each fold's training blocks (already centred or augmented,
    ``(F, m, c)`` and ``(F, m)``), the means they are expressed about, the
    held-out sample and the rank floor.  NIPALS is sequential, so one
    ``k_max`` fit per fold yields every smaller ``k``.
    """
    Xa, ya, x_means, y_means, x_out, y_out, floors = folds
    W, P, b, _ = nipals_batch(Xa, ya, k_max, floors)
    scores = np.einsum("fc,fck->fk", x_out - x_means, rotations(W, P))
    pred = y_means[:, None] + np.cumsum(scores * b, axis=1)
    press = ((pred - y_out[:, None]) ** 2).sum(axis=0)
    return np.sqrt(press / Xa.shape[0]).tolist()


def leave_one_out_index(n: int) -> np.ndarray:
    """Row ``i`` lists every index except ``i``."""
    full = np.broadcast_to(np.arange(n), (n, n))
    return full[~np.eye(n, dtype=bool)].reshape(n, n - 1)


def pick_smallest_best(per_k: list[float]) -> int:
    best = min(per_k)
    for k, r in enumerate(per_k, start=1):
        if r <= best + TIE_RTOL * abs(best):
            return k
    raise AssertionError("unreachable")


def select_latent_loo(X, y) -> CvChoice:
    """Choose the component count by leave-one-out inside the window.

    Candidates run over ``1..min(rows - 2, cols)``: a fold of ``rows - 1``
    centred samples has rank at most ``rows - 2``.
    """
    X, y = _check_xy(X, y, min_rows=3)
    n, c = X.shape
    k_max = min(n - 2, c)

    idx = leave_one_out_index(n)
    Xf, yf = X[idx], y[idx]
    xm, ym = Xf.mean(axis=1), yf.mean(axis=1)
    Xc = Xf - xm[:, None, :]
    floors = np.maximum(RANK_TOL * np.sqrt((Xc ** 2).sum(axis=(1, 2))),
                        1e-12 * np.sqrt((Xf ** 2).sum(axis=(1, 2))))
    per_k = loo_rmsep((Xc, yf - ym[:, None], xm, ym, X, y, floors), k_max)
    return CvChoice(pick_smallest_best(per_k), list(zip(range(1, k_max + 1), per_k)))


def fit_pls_cv(X, y) -> PlsModel:
    """Fit with the LOO-selected component count; windows of two rows use one."""
    X, y = _check_xy(X, y)
    k = 1 if X.shape[0] < 3 else select_latent_loo(X, y).chosen_latent
    return fit_pls(X, y, k)
