"""Two-step selection estimator.

Step one fits a probit for the selection indicator on the full frame.
Step two regresses the observed outcome on its covariates augmented with
the inverse Mills ratio evaluated at the first-stage fitted index of the
selected rows.  The conditioning object for the correction term is that
estimated selection index; this is the only reading under which the
correction removes the truncation bias, and it is the convention used
throughout this module.

Two covariance variants for the second stage are shipped:

``plain_robust``
    HC1 sandwich treating the Mills column as a fixed regressor, with the
    usual n/(n-k) degrees-of-freedom factor.

``heckman_corrected``
    The classic two-step covariance: the delta-weighted second-stage
    error structure plus the propagation term for the estimated
    first-stage coefficients.  It collapses to the unadjusted covariance
    sigma^2 (W'W)^{-1} when the Mills coefficient is zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vaxsel import probit
from vaxsel.stdnorm import inverse_mills, inverse_mills_delta

PLAIN_ROBUST = "plain_robust"
HECKMAN_CORRECTED = "heckman_corrected"
VCOV_VARIANTS = (PLAIN_ROBUST, HECKMAN_CORRECTED)

IMR_LABEL = "imr_lambda"
# Above this condition number the Mills column is indistinguishable from a
# linear combination of the outcome covariates.
CONDITION_LIMIT = 1e10

# two-sided normal critical values for 1%, 5% and 10%
STAR_THRESHOLDS = ((2.575829, "***"), (1.959964, "**"), (1.644854, "*"))


class CollinearMillsError(Exception):
    """Raised when the Mills column adds no identifying variation."""


@dataclass
class HeckmanFit:
    """Full two-step result.

    outcome_coef covers the outcome design columns plus, as its last
    entry, the Mills-ratio coefficient (an estimate of rho * sigma_u);
    imr_coef mirrors that last entry.  In the degenerate all-selected
    case the Mills column is skipped, outcome_coef has no extra entry and
    imr_coef is 0.
    """

    first_stage: probit.ProbitFit
    outcome_coef: np.ndarray
    imr_coef: float
    outcome_vcov: np.ndarray
    vcov_variant: str
    outcome_labels: list[str]
    n_total: int
    n_selected: int
    residuals: np.ndarray
    sigma2: float
    rho: float
    selection_vcov: np.ndarray
    degenerate: bool = False
    design: np.ndarray = field(default=None, repr=False)
    mills: np.ndarray = field(default=None, repr=False)
    outcome_keep: np.ndarray = field(default=None, repr=False)


def ols(y, X, labels=None):
    """Least squares through an orthogonal (SVD) decomposition.

    Returns (coef, resid).  Raises probit.RankDeficientError naming the
    offending columns when X is not full column rank.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError("y and X row counts differ")
    if n < k + 1:
        raise ValueError(f"need at least {k + 1} rows to fit {k} coefficients")
    labels = list(labels) if labels is not None else [f"x{j}" for j in range(k)]
    probit._check_design(X, labels)
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    return coef, resid


def significance_stars(coef: float, se: float) -> str:
    """Two-sided normal stars: '***' 1%, '**' 5%, '*' 10%, '' otherwise."""
    if not se > 0.0:
        raise ValueError("standard error must be strictly positive")
    t = abs(coef / se)
    for threshold, mark in STAR_THRESHOLDS:
        if t > threshold:
            return mark
    return ""


def plain_robust_vcov(fit: HeckmanFit) -> np.ndarray:
    """HC1 sandwich for the second stage, Mills column held fixed."""
    W = fit.design
    e = fit.residuals
    n, k = W.shape
    wtw_inv = np.linalg.inv(W.T @ W)
    meat = (W * (e**2)[:, None]).T @ W
    v = wtw_inv @ meat @ wtw_inv * (n / (n - k))
    return 0.5 * (v + v.T)


def heckman_corrected_vcov(fit: HeckmanFit, frame) -> np.ndarray:
    """Two-step covariance with the generated-regressor adjustment.

    sigma^2 (W'W)^{-1} [ W'(I - rho^2 D) W + Q ] (W'W)^{-1}, where D is
    the diagonal of delta at the first-stage index of selected rows and
    Q = rho^2 (W'D Z) V1 (Z'D W) propagates the first-stage estimation
    error through the Mills column.
    """
    if fit.degenerate:
        raise CollinearMillsError("no correction term in a degenerate all-selected fit")
    W = fit.design
    selected = np.asarray(frame.selection_y, dtype=float) == 1.0
    Z = np.asarray(frame.selection_X, dtype=float)[selected][fit.outcome_keep]
    idx = Z @ fit.first_stage.coef
    delta = inverse_mills_delta(idx)

    sigma2 = fit.sigma2
    rho2 = fit.rho**2
    wtw_inv = np.linalg.inv(W.T @ W)
    WdZ = (W * delta[:, None]).T @ Z
    Q = rho2 * WdZ @ fit.first_stage.vcov @ WdZ.T
    core = (W * (1.0 - rho2 * delta)[:, None]).T @ W + Q
    v = sigma2 * wtw_inv @ core @ wtw_inv
    return 0.5 * (v + v.T)


def fit_two_step(frame, vcov_variant: str = PLAIN_ROBUST) -> HeckmanFit:
    """Estimate the two-step selection model on a model frame.

    Parameters
    ----------
    frame : ModelFrame with selection_y/selection_X over all usable rows
        and outcome_y/outcome_X over the selected subset.
    vcov_variant : 'plain_robust' (default, robust both stages) or
        'heckman_corrected' (classic two-step inference, first stage
        reported with the observed-information covariance).

    Raises
    ------
    probit errors from the first stage; CollinearMillsError when the
    Mills column is numerically collinear with the outcome covariates
    (condition number above 1e10), which usually means the selection
    equation needs an exclusion restriction.
    """
    if vcov_variant not in VCOV_VARIANTS:
        raise ValueError(f"unknown vcov variant {vcov_variant!r}; choose from {VCOV_VARIANTS}")

    sel_y = np.asarray(frame.selection_y, dtype=float).ravel()
    sel_X = np.asarray(frame.selection_X, dtype=float)
    out_y = np.asarray(frame.outcome_y, dtype=float).ravel()
    out_X = np.atleast_2d(np.asarray(frame.outcome_X, dtype=float))
    n_total = sel_y.shape[0]
    n_selected = out_y.shape[0]
    out_labels = list(frame.outcome_labels)

    if np.all(sel_y == 1.0):
        # Phi of the index is ~1 for every row, so the Mills column is a
        # near-zero constant collinear with the intercept; fall back to
        # plain least squares and say so.
        coef, resid = ols(out_y, out_X, out_labels)
        sigma2 = float(resid @ resid / n_selected)
        wtw_inv = np.linalg.inv(out_X.T @ out_X)
        k = out_X.shape[1]
        meat = (out_X * (resid**2)[:, None]).T @ out_X
        v = wtw_inv @ meat @ wtw_inv * (n_selected / (n_selected - k))
        return HeckmanFit(
            first_stage=None,
            outcome_coef=coef,
            imr_coef=0.0,
            outcome_vcov=0.5 * (v + v.T),
            vcov_variant=PLAIN_ROBUST,
            outcome_labels=out_labels,
            n_total=n_total,
            n_selected=n_selected,
            residuals=resid,
            sigma2=sigma2,
            rho=0.0,
            selection_vcov=None,
            degenerate=True,
            design=out_X,
            mills=np.zeros(n_selected),
            outcome_keep=np.ones(n_selected, dtype=bool),
        )

    first = probit.fit(sel_y, sel_X, labels=list(frame.selection_labels))
    if not first.converged:
        raise probit.ProbitError(
            f"first-stage probit did not converge (score norm {first.score_norm:.2e})"
        )

    selected = sel_y == 1.0
    keep = getattr(frame, "outcome_keep", None)
    if keep is None:
        keep = np.ones(int(selected.sum()), dtype=bool)
    keep = np.asarray(keep, dtype=bool)
    idx_sel = (sel_X[selected] @ first.coef)[keep]
    if idx_sel.shape[0] != n_selected:
        raise ValueError("outcome rows do not line up with the selected selection rows")
    mills = inverse_mills(idx_sel)

    W = np.column_stack([out_X, mills])
    labels_w = out_labels + [IMR_LABEL]
    cond = np.linalg.cond(W)
    if cond > CONDITION_LIMIT:
        raise CollinearMillsError(
            f"Mills column is collinear with the outcome design (condition {cond:.2e}); "
            "add an exclusion restriction to the selection equation"
        )

    coef, resid = ols(out_y, W, labels_w)
    imr_coef = float(coef[-1])

    delta = inverse_mills_delta(idx_sel)
    sigma2 = float(resid @ resid / n_selected + imr_coef**2 * delta.sum() / n_selected)
    rho = imr_coef / np.sqrt(sigma2) if sigma2 > 0 else 0.0
    rho = float(np.clip(rho, -1.0, 1.0))

    fit = HeckmanFit(
        first_stage=first,
        outcome_coef=coef,
        imr_coef=imr_coef,
        outcome_vcov=None,
        vcov_variant=vcov_variant,
        outcome_labels=labels_w,
        n_total=n_total,
        n_selected=n_selected,
        residuals=resid,
        sigma2=sigma2,
        rho=rho,
        selection_vcov=None,
        design=W,
        mills=mills,
        outcome_keep=keep,
    )

    if vcov_variant == PLAIN_ROBUST:
        fit.outcome_vcov = plain_robust_vcov(fit)
        fit.selection_vcov = probit.sandwich_vcov(first, sel_y, sel_X)
    else:
        fit.outcome_vcov = heckman_corrected_vcov(fit, frame)
        fit.selection_vcov = first.vcov
    return fit
