"""Group lasso on log-virality with cross-validated regularization.

Objective: (1/2n)||y - b0 - X b||^2 + lam * sum_g sqrt(p_g) ||b_g||_2 with an
unpenalized intercept. Solved by monotone proximal gradient (ISTA) with
backtracking on the centered, optionally standardized design; gradients use
the Gram form G = X'X/n, c = X'y/n. FISTA is deliberately not used so the
objective is non-increasing at every iteration, which is checked.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

Groups = Sequence[Sequence[int]]


@dataclass(frozen=True)
class LassoConfig:
    lambda_grid: int = 100
    folds: int = 5
    tol: float = 1e-6
    max_iter: int = 10_000
    standardize: bool = True
    seed: int = 0
    kkt_tol: float = 1e-7

    def __post_init__(self) -> None:
        if self.lambda_grid < 1:
            raise ValueError("lambda_grid must be positive")
        if self.folds < 2:
            raise ValueError("folds must be at least 2")


@dataclass(frozen=True)
class LassoFit:
    lam: float
    intercept: float
    beta: np.ndarray
    active_groups: tuple[int, ...]
    groups: tuple[tuple[int, ...], ...]
    objective: float
    n_iter: int
    standardized: bool
    cv_curve: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class CoefficientRow:
    feature: str
    beta: float
    pct_change: float
    selected: bool


@dataclass(frozen=True)
class CoefficientReport:
    rows: tuple[CoefficientRow, ...]
    authors_min_pct: float | None = None
    authors_max_pct: float | None = None
    authors_selected: bool = False


class ConvergenceError(RuntimeError):
    """Carries the last iterate and KKT residual on solver failure."""

    def __init__(self, message: str, beta: np.ndarray, residual: float):
        super().__init__(message)
        self.beta = beta
        self.residual = residual


def pct_change(beta: float) -> float:
    """Predicted percent change in virality for a one-unit feature change."""
    return (math.exp(beta) - 1.0) * 100.0


def _check_groups(groups: Groups, p: int) -> tuple[np.ndarray, ...]:
    seen: set[int] = set()
    arrays = []
    for g in groups:
        idx = np.asarray(sorted(g), dtype=int)
        if idx.size == 0:
            raise ValueError("empty group")
        if seen & set(idx.tolist()):
            raise ValueError("groups overlap")
        seen |= set(idx.tolist())
        arrays.append(idx)
    if seen != set(range(p)):
        raise ValueError("groups must cover every column exactly once")
    return tuple(arrays)


def _prepare(X: np.ndarray, y: np.ndarray, standardize: bool):
    """Center (and optionally scale) the design; constants scale to zero."""
    mu = X.mean(axis=0)
    if standardize:
        sd = X.std(axis=0)
        sd = np.where(sd > 0, sd, 1.0)
    else:
        sd = np.ones(X.shape[1])
    Xs = (X - mu) / sd
    y_mean = float(y.mean())
    yc = y - y_mean
    return Xs, yc, mu, sd, y_mean


def lambda_max(
    X: np.ndarray, y: np.ndarray, groups: Groups, standardize: bool = True
) -> float:
    """Smallest penalty at which every group's coefficient block is zero."""
    garr = _check_groups(groups, X.shape[1])
    Xs, yc, _, _, _ = _prepare(np.asarray(X, float), np.asarray(y, float), standardize)
    n = X.shape[0]
    c = Xs.T @ yc / n
    return max(
        float(np.linalg.norm(c[g])) / math.sqrt(len(g)) for g in garr
    )


def lambda_grid(lam_max: float, size: int) -> np.ndarray:
    """Geometric grid from lam_max down to lam_max * 1e-4."""
    if lam_max <= 0:
        return np.zeros(size)
    if size == 1:
        return np.array([lam_max])
    return np.geomspace(lam_max, lam_max * 1e-4, size)


def _prox(v: np.ndarray, thresholds: Sequence[tuple[np.ndarray, float]]) -> np.ndarray:
    out = v.copy()
    for idx, thr in thresholds:
        block = v[idx]
        norm = float(np.linalg.norm(block))
        if norm <= thr:
            out[idx] = 0.0
        else:
            out[idx] = (1.0 - thr / norm) * block
    return out


def _kkt_residual(
    Gb: np.ndarray,
    c: np.ndarray,
    beta: np.ndarray,
    lam: float,
    garr: Sequence[np.ndarray],
    weights: Sequence[float],
) -> float:
    res = c - Gb
    worst = 0.0
    for idx, w in zip(garr, weights):
        r_g = res[idx]
        b_g = beta[idx]
        norm = float(np.linalg.norm(b_g))
        if norm > 0.0:
            worst = max(worst, float(np.linalg.norm(r_g - lam * w * b_g / norm)))
        else:
            worst = max(worst, max(0.0, float(np.linalg.norm(r_g)) - lam * w))
    return worst


def _solve_std(
    G: np.ndarray,
    c: np.ndarray,
    lam: float,
    garr: Sequence[np.ndarray],
    weights: Sequence[float],
    beta0: np.ndarray,
    tol: float,
    max_iter: int,
    kkt_tol: float,
) -> tuple[np.ndarray, float, int]:
    """Monotone proximal gradient on the centered problem; returns
    (beta, smooth+penalty objective up to the constant ||yc||^2/2n, iters)."""

    def penalty(b: np.ndarray) -> float:
        return lam * sum(
            w * float(np.linalg.norm(b[idx])) for idx, w in zip(garr, weights)
        )

    beta = beta0.copy()
    Gb = G @ beta
    smooth = 0.5 * float(beta @ Gb) - float(c @ beta)
    obj = smooth + penalty(beta)
    # Near the optimum the objective is flat at float resolution and the
    # iterate can drift, so keep the best-certified point seen so far.
    best_res = _kkt_residual(Gb, c, beta, lam, garr, weights)
    best_beta, best_obj, best_it = beta.copy(), obj, 0
    step = 1.0
    for it in range(1, max_iter + 1):
        grad = Gb - c
        while True:
            thresholds = [(idx, step * lam * w) for idx, w in zip(garr, weights)]
            z = _prox(beta - step * grad, thresholds)
            dz = z - beta
            Gz = G @ z
            smooth_z = 0.5 * float(z @ Gz) - float(c @ z)
            quad = smooth + float(grad @ dz) + float(dz @ dz) / (2.0 * step)
            if smooth_z <= quad + 1e-12:
                break
            step *= 0.5
        new_obj = smooth_z + penalty(z)
        if new_obj > obj + 1e-9:
            raise ConvergenceError(
                f"objective increased at iteration {it}", z, math.inf
            )
        rel = (obj - new_obj) / max(1.0, abs(new_obj))
        beta, Gb, smooth, obj = z, Gz, smooth_z, new_obj
        step *= 1.25
        residual = _kkt_residual(Gb, c, beta, lam, garr, weights)
        if residual < best_res:
            best_res, best_beta, best_obj, best_it = residual, beta.copy(), obj, it
        if rel < tol and best_res <= kkt_tol:
            return best_beta, best_obj, best_it
    if best_res <= kkt_tol:
        return best_beta, best_obj, best_it
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (KKT residual {best_res:.3g})",
        best_beta,
        best_res,
    )


def fit_group_lasso(
    X: np.ndarray,
    y: np.ndarray,
    groups: Groups,
    lam: float,
    config: LassoConfig | None = None,
    warm_start: np.ndarray | None = None,
) -> LassoFit:
    """Fit at one penalty level; coefficients returned on the original scale.

    lam=0 reduces to least squares and is solved exactly; lam >= lambda_max
    returns exact zeros immediately.
    """
    cfg = config if config is not None else LassoConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X and y shapes disagree")
    if X.shape[0] < 2:
        raise ValueError("need at least two rows")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    n, p = X.shape
    garr = _check_groups(groups, p)
    weights = [math.sqrt(len(g)) for g in garr]
    Xs, yc, mu, sd, y_mean = _prepare(X, y, cfg.standardize)

    if lam == 0.0:
        beta_std, *_ = np.linalg.lstsq(Xs, yc, rcond=None)
        n_iter = 0
        G = Xs.T @ Xs / n
        c = Xs.T @ yc / n
        objective = 0.5 * float(beta_std @ (G @ beta_std)) - float(c @ beta_std)
    else:
        G = Xs.T @ Xs / n
        c = Xs.T @ yc / n
        lam_top = max(
            float(np.linalg.norm(c[g])) / w for g, w in zip(garr, weights)
        )
        if lam >= lam_top:
            beta_std = np.zeros(p)
            objective = 0.0
            n_iter = 0
        else:
            beta0 = (
                np.asarray(warm_start, dtype=float).copy()
                if warm_start is not None
                else np.zeros(p)
            )
            beta_std, objective, n_iter = _solve_std(
                G, c, lam, garr, weights, beta0, cfg.tol, cfg.max_iter, cfg.kkt_tol
            )

    beta = beta_std / sd
    intercept = y_mean - float(beta @ mu)
    active = tuple(
        i for i, g in enumerate(garr) if float(np.linalg.norm(beta_std[g])) > 0.0
    )
    constant = 0.5 * float(yc @ yc) / n
    return LassoFit(
        lam=float(lam),
        intercept=intercept,
        beta=beta,
        active_groups=active,
        groups=tuple(tuple(int(j) for j in g) for g in garr),
        objective=objective + constant,
        n_iter=n_iter,
        standardized=cfg.standardize,
    )


def kkt_residual_from_fit(
    X: np.ndarray, y: np.ndarray, groups: Groups, fit: LassoFit
) -> float:
    """Independent certificate: residual recomputed from data and fit alone."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    garr = _check_groups(groups, X.shape[1])
    weights = [math.sqrt(len(g)) for g in garr]
    Xs, yc, _, sd, _ = _prepare(X, y, fit.standardized)
    beta_std = fit.beta * sd
    n = X.shape[0]
    Gb = Xs.T @ (Xs @ beta_std) / n
    c = Xs.T @ yc / n
    return _kkt_residual(Gb, c, beta_std, fit.lam, garr, weights)


def select_best_lambda(grid: Sequence[float], mean_err: Sequence[float]) -> int:
    """Index of the smallest mean error; ties go to the larger lambda.

    The grid is decreasing, so scanning forward and keeping only strict
    improvements lands on the earliest (largest) lambda among tied minima.
    """
    best = 0
    for j in range(1, len(grid)):
        if mean_err[j] < mean_err[best]:
            best = j
    return best


def cv_select_lambda(
    X: np.ndarray,
    y: np.ndarray,
    groups: Groups,
    config: LassoConfig | None = None,
    fold_ids: Sequence[int] | None = None,
) -> tuple[float, tuple[tuple[float, float], ...]]:
    """K-fold CV over a geometric grid with warm starts down the path.

    Returns (lambda_best, curve) where curve pairs each lambda with its mean
    validation squared error; ties resolve to the larger lambda.
    """
    cfg = config if config is not None else LassoConfig()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if n < cfg.folds:
        raise ValueError("need at least one row per fold")
    garr = _check_groups(groups, X.shape[1])
    weights = [math.sqrt(len(g)) for g in garr]

    if fold_ids is not None:
        fold_ids = np.asarray(list(fold_ids))
        fold_labels = sorted(set(fold_ids.tolist()))
        folds = [np.flatnonzero(fold_ids == k) for k in fold_labels]
    else:
        rng = np.random.default_rng(cfg.seed)
        order = rng.permutation(n)
        folds = [np.sort(part) for part in np.array_split(order, cfg.folds)]
    if any(len(f) == 0 for f in folds):
        raise ValueError("fold with zero rows; reduce folds")

    grid = lambda_grid(lambda_max(X, y, groups, cfg.standardize), cfg.lambda_grid)
    errors = np.zeros((len(folds), len(grid)))
    for k, val_idx in enumerate(folds):
        mask = np.ones(n, dtype=bool)
        mask[val_idx] = False
        X_tr, y_tr = X[mask], y[mask]
        X_val, y_val = X[val_idx], y[val_idx]
        Xs, yc, mu, sd, y_mean = _prepare(X_tr, y_tr, cfg.standardize)
        n_tr = X_tr.shape[0]
        G = Xs.T @ Xs / n_tr
        c = Xs.T @ yc / n_tr
        lam_top = max(
            float(np.linalg.norm(c[g])) / w for g, w in zip(garr, weights)
        )
        beta_std = np.zeros(X.shape[1])
        for j, lam in enumerate(grid):
            if lam >= lam_top:
                beta_std = np.zeros(X.shape[1])
            else:
                beta_std, _, _ = _solve_std(
                    G, c, float(lam), garr, weights, beta_std,
                    cfg.tol, cfg.max_iter, max(cfg.kkt_tol, 1e-6),
                )
            beta = beta_std / sd
            intercept = y_mean - float(beta @ mu)
            pred = intercept + X_val @ beta
            errors[k, j] = float(np.mean((y_val - pred) ** 2))

    mean_err = errors.mean(axis=0)
    best = select_best_lambda(grid, mean_err)
    curve = tuple((float(l), float(e)) for l, e in zip(grid, mean_err))
    return float(grid[best]), curve


def fit_cv(
    X: np.ndarray, y: np.ndarray, groups: Groups, config: LassoConfig | None = None
) -> LassoFit:
    """CV-selected penalty, then a final certified fit on all rows."""
    cfg = config if config is not None else LassoConfig()
    lam_best, curve = cv_select_lambda(X, y, groups, cfg)
    fit = fit_group_lasso(X, y, groups, lam_best, cfg)
    return LassoFit(
        lam=fit.lam,
        intercept=fit.intercept,
        beta=fit.beta,
        active_groups=fit.active_groups,
        groups=fit.groups,
        objective=fit.objective,
        n_iter=fit.n_iter,
        standardized=fit.standardized,
        cv_curve=curve,
    )


def report_coefficients(
    fit: LassoFit, column_names: Sequence[str], author_prefix: str = "author:"
) -> CoefficientReport:
    """Per-feature percent changes; author indicators summarized as a range."""
    active_cols = {j for gi in fit.active_groups for j in fit.groups[gi]}
    rows = []
    author_pcts = []
    authors_selected = False
    for j, name in enumerate(column_names):
        beta_j = float(fit.beta[j])
        if name.startswith(author_prefix):
            author_pcts.append(pct_change(beta_j))
            authors_selected = authors_selected or j in active_cols
        else:
            rows.append(
                CoefficientRow(
                    feature=name,
                    beta=beta_j,
                    pct_change=pct_change(beta_j),
                    selected=j in active_cols,
                )
            )
    if author_pcts:
        return CoefficientReport(
            rows=tuple(rows),
            authors_min_pct=min(author_pcts),
            authors_max_pct=max(author_pcts),
            authors_selected=authors_selected,
        )
    return CoefficientReport(rows=tuple(rows))


def write_regress_csv(report: CoefficientReport, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["feature", "beta", "pct_change", "selected"])
        for row in report.rows:
            writer.writerow(
                [
                    row.feature,
                    f"{row.beta:.12g}",
                    f"{row.pct_change:.1f}",
                    "true" if row.selected else "false",
                ]
            )
        if report.authors_min_pct is not None:
            writer.writerow(
                [
                    "authors",
                    f"{report.authors_min_pct:.1f}",
                    f"{report.authors_max_pct:.1f}",
                    "true" if report.authors_selected else "false",
                ]
            )


def write_cv_curve_csv(
    curve: Iterable[tuple[float, float]], path: str | Path
) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["lambda", "mean_val_mse"])
        for lam, err in curve:
            writer.writerow([f"{lam:.12g}", f"{err:.12g}"])
