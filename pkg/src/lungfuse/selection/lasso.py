"""
Lasso by cyclic coordinate descent with covariance updates.

Minimizes (1/2n)·‖y − Xβ − β0‖² + λ‖β‖₁ with an unpenalized intercept. Columns
are centered internally; the intercept is recovered as ȳ − x̄ᵀβ.
"""

import logging
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from typing import Optional

import numpy as np

from lungfuse.errors import SelectionError
from lungfuse.models.selection import LassoDoc

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_SWEEPS = 10_000
_OBJECTIVE_SLACK = 1e-10


def soft_threshold(z: float, gamma: float) -> float:
    if gamma < 0:
        raise SelectionError("soft threshold needs gamma >= 0", details={"gamma": gamma})
    return float(np.sign(z) * max(abs(z) - gamma, 0.0))


class Lasso:
    __slots__ = ("lam", "coef", "intercept", "n_sweeps", "converged", "objective_history")

    def __init__(
        self,
        lam: float,
        coef: np.ndarray,
        intercept: float,
        n_sweeps: int = 0,
        converged: bool = True,
        objective_history: Optional[list[float]] = None,
    ):
        self.lam = lam
        self.coef = coef
        self.intercept = intercept
        self.n_sweeps = n_sweeps
        self.converged = converged
        self.objective_history = objective_history or []

    @property
    def kept(self) -> np.ndarray:
        return np.flatnonzero(self.coef)

    def predict(self, values: np.ndarray) -> np.ndarray:
        return values @ self.coef + self.intercept

    def to_doc(self) -> LassoDoc:
        return LassoDoc(
            lam=self.lam,
            coef=self.coef.tolist(),
            intercept=self.intercept,
            kept=self.kept.tolist(),
            n_sweeps=self.n_sweeps,
            converged=self.converged,
        )

    @classmethod
    def from_doc(cls, doc: LassoDoc) -> "Lasso":
        return cls(doc.lam, np.array(doc.coef, dtype=np.float64), doc.intercept, doc.n_sweeps, doc.converged)


def _prepare(values: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    values = np.asarray(values, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if values.ndim != 2 or values.shape[0] != y.size or y.size == 0:
        raise SelectionError(
            "lasso needs a 2-D design with one target per row",
            details={"design": list(values.shape), "target": int(y.size)},
        )
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(y))):
        raise SelectionError("lasso inputs must be finite", code="non_finite_input")
    x_mean = values.mean(axis=0)
    y_mean = float(y.mean())
    return np.asfortranarray(values - x_mean), y - y_mean, x_mean, y_mean


def _correlations(xc: np.ndarray, r: np.ndarray) -> np.ndarray:
    # same reduction as the coordinate update so λ >= λ_max gives exact zeros
    return np.array([np.dot(xc[:, j], r) for j in range(xc.shape[1])])


def lasso_lambda_max(values: np.ndarray, y: np.ndarray) -> float:
    """Smallest λ with an all-zero solution: max_j |x_jᵀ(y − ȳ)| / n."""
    xc, yc, _, _ = _prepare(values, y)
    if xc.shape[1] == 0:
        return 0.0
    return float(np.max(np.abs(_correlations(xc, yc))) / yc.size)


def _objective(r: np.ndarray, beta: np.ndarray, lam: float) -> float:
    return float(np.dot(r, r) / (2 * r.size) + lam * np.sum(np.abs(beta)))


def _sweep(
    columns: Iterable[int], beta: np.ndarray, grad: np.ndarray, gram: np.ndarray, col_sq: np.ndarray, lam: float,
) -> float:
    # grad holds x_jᵀr/n and is kept current through the Gram rows
    max_delta = 0.0
    for j in columns:
        cj = col_sq[j]
        if cj == 0.0:
            continue
        old = beta[j]
        new = soft_threshold(grad[j] + cj * old, lam) / cj
        if new != old:
            delta = new - old
            grad -= gram[j] * delta
            beta[j] = new
            max_delta = max(max_delta, abs(delta))
    return max_delta


def lasso_fit(
    values: np.ndarray,
    y: np.ndarray,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    warm_start: Optional[np.ndarray] = None,
) -> Lasso:
    """
    Covariance-update coordinate descent with active-set cycling.

    A sweep over every column alternates with sweeps over the nonzero
    coefficients only, until those settle. The fit converges on a full sweep
    whose largest coefficient change is below `tol`, so every zero coefficient
    has passed its KKT check against the final residual.
    """
    if lam < 0:
        raise SelectionError("lambda must be >= 0", details={"lambda": lam})
    xc, yc, x_mean, y_mean = _prepare(values, y)
    n, p = xc.shape
    col_sq = np.einsum("ij,ij->j", xc, xc) / n
    beta = np.zeros(p) if warm_start is None else np.array(warm_start, dtype=np.float64)
    if beta.shape != (p,):
        raise SelectionError("warm start does not match the design width", details={"width": p, "got": list(beta.shape)})
    gram = np.ascontiguousarray(xc.T @ xc) / n
    r = yc - xc @ beta if beta.any() else yc.copy()
    grad = _correlations(xc, r) / n
    history = [_objective(r, beta, lam)]
    converged = False
    full = True
    sweeps = 0
    while sweeps < max_sweeps:
        sweeps += 1
        max_delta = _sweep(range(p) if full else np.flatnonzero(beta), beta, grad, gram, col_sq, lam)
        r = yc - xc @ beta
        obj = _objective(r, beta, lam)
        if obj > history[-1] + _OBJECTIVE_SLACK * max(1.0, abs(history[-1])):
            raise SelectionError(
                "lasso objective increased during a sweep",
                code="objective_increase",
                details={"sweep": sweeps, "before": history[-1], "after": obj},
            )
        history.append(obj)
        if max_delta >= tol:
            full = False
        elif full:
            converged = True
            break
        else:
            # active set settled; resync the gradient before the full check
            grad = _correlations(xc, r) / n
            full = True
    if not converged:
        logger.warning("lasso λ=%.3g stopped after %d sweeps without converging", lam, sweeps)
    intercept = y_mean - float(np.dot(x_mean, beta))
    return Lasso(float(lam), beta, intercept, sweeps, converged, history)


def lasso_path(
    values: np.ndarray,
    y: np.ndarray,
    grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
) -> list[Lasso]:
    """Fits along `grid` in the given order, each warm-started from the previous."""
    fits: list[Lasso] = []
    warm = None
    for lam in grid:
        fit = lasso_fit(values, y, float(lam), tol, max_sweeps, warm_start=warm)
        fits.append(fit)
        warm = fit.coef
    return fits


def lambda_grid(values: np.ndarray, y: np.ndarray, size: int = 50, min_ratio: float = 1e-3) -> np.ndarray:
    """Log-spaced, descending from λ_max to λ_max·min_ratio."""
    lam_max = lasso_lambda_max(values, y)
    if lam_max == 0.0:
        return np.zeros(1)
    return np.geomspace(lam_max, lam_max * min_ratio, size)


def fold_assignment(n: int, folds: int, seed: int) -> np.ndarray:
    order = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.arange(n) % folds
    return assignment


def _fold_errors(args: tuple) -> np.ndarray:
    values, y, held, grid, tol, max_sweeps = args
    fits = lasso_path(values[~held], y[~held], grid, tol, max_sweeps)
    return np.array([np.mean((y[held] - fit.predict(values[held])) ** 2) for fit in fits])


def lasso_cv_errors(
    values: np.ndarray,
    y: np.ndarray,
    grid: Sequence[float],
    folds: int = 5,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    workers: int = 1,
) -> np.ndarray:
    """Mean held-out squared error per grid point; folds reduce in fold order regardless of `workers`."""
    values = np.asarray(values, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if len(grid) == 0:
        raise SelectionError("lambda grid is empty", code="empty_grid")
    if folds < 2:
        raise SelectionError("cross-validation needs folds >= 2", details={"folds": folds})
    if y.size < folds:
        raise SelectionError(
            "fewer samples than folds",
            code="too_few_samples",
            details={"samples": int(y.size), "folds": folds},
        )
    assignment = fold_assignment(y.size, folds, seed)
    jobs = [(values, y, assignment == f, list(grid), tol, max_sweeps) for f in range(folds)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=min(workers, folds)) as pool:
            errors = list(pool.map(_fold_errors, jobs))
    else:
        errors = [_fold_errors(j) for j in jobs]
    return np.mean(errors, axis=0)


def lasso_select_lambda(
    values: np.ndarray,
    y: np.ndarray,
    grid: Optional[Sequence[float]] = None,
    folds: int = 5,
    seed: int = 0,
    grid_size: int = 50,
    min_ratio: float = 1e-3,
    tol: float = DEFAULT_TOL,
    max_sweeps: int = DEFAULT_MAX_SWEEPS,
    workers: int = 1,
) -> float:
    """λ with the lowest mean CV error; ties go to the larger λ."""
    if grid is None:
        grid = lambda_grid(values, y, grid_size, min_ratio)
    grid = np.sort(np.asarray(grid, dtype=np.float64))[::-1]
    cv = lasso_cv_errors(values, y, grid, folds, seed, tol, max_sweeps, workers)
    best = int(np.argmin(cv))
    logger.info("lasso CV picked λ=%.4g (grid index %d of %d, mse %.4g)", grid[best], best, grid.size, cv[best])
    return float(grid[best])
