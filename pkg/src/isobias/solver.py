"""Fitting abundances and biases by alternating concave search.

Each outer iteration runs one EM sweep for ``theta`` with ``b`` held fixed,
the closed-form soft-threshold update for every ``b_j`` with ``theta`` held
fixed, and a re-centering of ``b`` on its median (absorbing the shift into
``theta`` so fitted means are unchanged).  Every phase is non-decreasing in
the penalized objective.
"""

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np

from .model import (
    COUNT_WEIGHTED,
    UNIFORM,
    DegenerateIsoformError,
    IdentifiabilityError,
    InfeasibleModelError,
    ModelError,
    PenaltyConfig,
    as_counts,
    check_instance,
    soft_threshold,
)

NO_BIAS = "no-bias"
ONE_STEP = "one-step"
TWO_STEP = "two-step"
FIT_MODES = (NO_BIAS, ONE_STEP, TWO_STEP)

# exp(+-50) is far outside any real sampling bias; b is clipped here when the
# unpenalized optimum is at infinity (empty category with zero penalty, or a
# removed category whose fitted mean collapsed to zero).
BIAS_BOUND = 50.0


@dataclass(frozen=True)
class FitConfig:
    lam: float | str = "auto"
    penalty: str = UNIFORM
    max_iters: int = 10000
    tol: float = 1e-8
    bias_zero_tol: float = 1e-6
    mode: str = ONE_STEP
    trace_phases: bool = False

    def __post_init__(self):
        if self.mode not in FIT_MODES:
            raise ValueError(f"unknown fit mode {self.mode!r}")
        if isinstance(self.lam, str):
            if self.lam != "auto":
                raise ValueError(f"lambda must be a number or 'auto', got {self.lam!r}")
        elif not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0 or not self.bias_zero_tol > 0:
            raise ValueError("tol and bias_zero_tol must be positive")

    def penalty_for(self, n):
        lam = default_lambda(n) if self.lam == "auto" else float(self.lam)
        return PenaltyConfig(lam, self.penalty)


@dataclass(frozen=True)
class FitResult:
    theta: np.ndarray
    b: np.ndarray
    support: tuple
    objective_trace: np.ndarray
    converged: bool
    iterations: int
    mode: str
    lam: float
    # (after EM, after b-update, after centering) per iteration, if requested
    phase_trace: np.ndarray | None = None
    first_step: "FitResult | None" = field(default=None, repr=False)

    @property
    def objective(self):
        return float(self.objective_trace[-1])


class TProcedureResult(NamedTuple):
    t: int
    theta: float
    kept: np.ndarray


def default_lambda(n):
    """Square root of the largest count (0 for an all-zero vector)."""
    n = as_counts(n)
    return float(np.sqrt(n.max())) if n.size else 0.0


def em_update_theta(theta, b, n, A):
    """One EM sweep for ``theta`` with ``b`` fixed.

    E-step splits each count across isoforms in proportion to
    ``theta_i * A[i, j]`` (the bias factor cancels); M-step divides each
    isoform's expected reads by its bias-adjusted total rate.
    """
    A = np.asarray(A, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n = np.asarray(n, dtype=float)
    total_rate = A @ np.exp(b)
    if np.any(total_rate <= 0):
        raise DegenerateIsoformError(
            f"isoforms {np.flatnonzero(total_rate <= 0).tolist()} have zero total sampling rate")
    mu = theta @ A
    if np.any((n > 0) & (mu <= 0)):
        raise InfeasibleModelError(
            f"categories {np.flatnonzero((n > 0) & (mu <= 0)).tolist()} have positive counts "
            "but no isoform with positive abundance")
    ratio = np.divide(n, mu, out=np.zeros_like(n), where=mu > 0)
    expected = theta * (A @ ratio)
    return np.maximum(expected / total_rate, 0.0)


def update_b(theta, n, A, pen):
    """Closed-form maximizer of the penalized objective in ``b`` for fixed ``theta``.

    ``b_j = log(1 + S(n_j - mu_j, lam_j) / mu_j)`` with ``mu_j = sum_i theta_i A[i, j]``.
    Categories with ``mu_j = n_j = 0`` get ``b_j = 0``.
    """
    n = np.asarray(n, dtype=float)
    mu = np.asarray(theta, dtype=float) @ np.asarray(A, dtype=float)
    if np.any((n > 0) & (mu <= 0)):
        raise InfeasibleModelError(
            f"categories {np.flatnonzero((n > 0) & (mu <= 0)).tolist()} have positive counts "
            "but zero unbiased mean")
    shrunk = soft_threshold(n - mu, pen.thresholds(n))
    rel = np.divide(shrunk, mu, out=np.zeros_like(mu), where=mu > 0)
    with np.errstate(divide="ignore"):
        b = np.log1p(np.maximum(rel, -1.0))
    # + 0.0 turns -0.0 from the dead zone into 0.0
    return np.clip(b, -BIAS_BOUND, BIAS_BOUND) + 0.0


def weighted_median(x, w):
    """Median of ``x`` under non-negative weights ``w``.

    When the cumulative weight hits exactly one half at an order statistic,
    the result averages it with the next one (the usual even-count rule).
    """
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    total = w.sum()
    if total <= 0:
        return float(np.median(x))
    order = np.argsort(x, kind="stable")
    xs, cw = x[order], np.cumsum(w[order])
    k = int(np.searchsorted(cw, total / 2.0))
    if np.isclose(cw[k], total / 2.0, rtol=1e-12, atol=0.0):
        rest = np.flatnonzero(w[order][k + 1:] > 0)
        if rest.size:
            return float((xs[k] + xs[k + 1 + rest[0]]) / 2.0)
    return float(xs[k])


def median_center(theta, b, weights=None):
    """Shift ``b`` to median zero, scaling ``theta`` by ``exp(median)``.

    The fitted means ``theta_i A[i, j] exp(b_j)`` are unchanged.  With
    ``weights`` the weighted median is used, which is what keeps the shift
    objective-non-decreasing under a count-weighted penalty.
    """
    b = np.asarray(b, dtype=float)
    m = float(np.median(b)) if weights is None else weighted_median(b, weights)
    return np.asarray(theta, dtype=float) * np.exp(m), b - m


def _initial_theta(n, A):
    total_rate = A.sum()
    start = n.sum() / total_rate if total_rate > 0 else 0.0
    return np.full(A.shape[0], start)


def _converged(prev, cur, step, scale, growth, tol):
    # EM crawls: a flat objective alone stops far from the fixed point, so
    # the parameter step has to be small as well.  ``growth`` is the largest
    # EM multiplier minus one; a tiny isoform that still wants to grow has a
    # negligible step but is not at a stationary point.
    return (abs(cur - prev) <= tol * max(abs(prev), 1.0) and step <= tol * scale
            and growth <= math.sqrt(tol))


# Inner-loop versions of the public updates: no validation, and only the
# categories with reads (``pos``) enter the log terms and the E-step.

def _objective(theta, b, w, n_pos, pos, A, lam_j):
    # w = exp(b)
    mu = (theta @ A) * w
    return float(n_pos @ np.log(mu[pos]) - mu.sum() - lam_j @ np.abs(b))


def _em_step(theta, n_pos, A_pos, total_rate):
    # total_rate = A @ exp(b)
    return theta * (A_pos @ (n_pos / (theta @ A_pos))) / total_rate


def _b_step(theta, n, A, lam_j):
    mu = theta @ A
    d = n - mu
    shrunk = np.sign(d) * np.maximum(np.abs(d) - lam_j, 0.0)
    rel = np.divide(shrunk, mu, out=np.zeros_like(mu), where=mu > 0)
    with np.errstate(divide="ignore"):
        b = np.log1p(np.maximum(rel, -1.0))
    return np.clip(b, -BIAS_BOUND, BIAS_BOUND) + 0.0


def _median(x):
    s = np.sort(x)
    k = s.size // 2
    return float(s[k]) if s.size % 2 else float((s[k - 1] + s[k]) / 2.0)


def _check_rows(A):
    dead = ~np.any(A > 0, axis=1)
    if np.any(dead):
        raise DegenerateIsoformError(
            f"isoforms {np.flatnonzero(dead).tolist()} have zero total sampling rate")


def acs_fit(n, A, cfg=FitConfig()):
    """Fit ``theta`` and ``b`` by alternating EM / soft-threshold / centering.

    In ``no-bias`` mode ``b`` stays at zero and this is plain EM.  A two-step
    config is fitted as one-step here; use :func:`fit` or :func:`two_step_fit`
    for the refit.  Non-convergence is reported via ``converged=False``.
    """
    n, A = check_instance(n, A)
    _check_rows(A)
    I, J = A.shape
    pen = cfg.penalty_for(n)
    with_bias = cfg.mode != NO_BIAS
    if not with_bias:
        pen = PenaltyConfig(0.0, UNIFORM)
    center_w = n if pen.mode == COUNT_WEIGHTED else None
    lam_j = pen.thresholds(n)

    pos = n > 0
    n_pos, A_pos = n[pos], A[:, pos]
    theta = _initial_theta(n, A)
    b = np.zeros(J)
    w = np.ones(J)
    total_rate = A.sum(axis=1)
    obj = _objective(theta, b, w, n_pos, pos, A, lam_j)
    trace = [obj]
    phases = []
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        old_theta, old_b = theta, b
        theta = _em_step(theta, n_pos, A_pos, total_rate)
        live = old_theta > 0
        growth = (theta[live] / old_theta[live]).max() - 1.0 if live.any() else 0.0
        if with_bias:
            if cfg.trace_phases:
                after_em = _objective(theta, b, w, n_pos, pos, A, lam_j)
            b = _b_step(theta, n, A, lam_j)
            if cfg.trace_phases:
                after_b = _objective(theta, b, np.exp(b), n_pos, pos, A, lam_j)
            m = _median(b) if center_w is None else weighted_median(b, center_w)
            theta, b = theta * np.exp(m), b - m
            w = np.exp(b)
            total_rate = A @ w
        new = _objective(theta, b, w, n_pos, pos, A, lam_j)
        if cfg.trace_phases:
            phases.append((after_em, after_b, new) if with_bias else (new, new, new))
        trace.append(new)
        step = max(np.abs(theta - old_theta).max(), np.abs(b - old_b).max())
        scale = max(theta.max(), np.abs(b).max())
        if _converged(obj, new, step, scale, growth, cfg.tol):
            converged = True
            break
        obj = new

    support = tuple(int(j) for j in np.flatnonzero(np.abs(b) > cfg.bias_zero_tol))
    return FitResult(
        theta=theta,
        b=b,
        support=support,
        objective_trace=np.asarray(trace),
        converged=converged,
        iterations=it,
        mode=NO_BIAS if not with_bias else ONE_STEP,
        lam=pen.lam,
        phase_trace=np.asarray(phases) if cfg.trace_phases else None,
    )


def two_step_fit(n, A, cfg=FitConfig()):
    """Penalized fit to select biased categories, then an unpenalized refit.

    The refit is carried out as plain EM on the categories whose bias was
    estimated as zero; removed categories get their unpenalized optimum
    ``b_j = log(n_j / mu_j)``.  This is the same maximizer as refitting the
    full data with free (unpenalized) biases on the selected categories.
    """
    n, A = check_instance(n, A)
    I, J = A.shape
    first = acs_fit(n, A, replace(cfg, mode=ONE_STEP))
    removed = np.asarray(first.support, dtype=int)
    if removed.size > J - I:
        raise IdentifiabilityError(
            f"{removed.size} categories flagged as biased ({removed.tolist()}) but at most "
            f"J - I = {J - I} can be freed; increase lambda")
    keep = np.setdiff1d(np.arange(J), removed)
    if keep.size == 0:
        raise ModelError("every category was flagged as biased")
    orphaned = ~np.any(A[:, keep] > 0, axis=1)
    if np.any(orphaned):
        raise IdentifiabilityError(
            f"isoforms {np.flatnonzero(orphaned).tolist()} are covered only by categories "
            f"flagged as biased ({removed.tolist()}); increase lambda")

    refit = acs_fit(n[keep], A[:, keep], replace(cfg, mode=NO_BIAS, trace_phases=False))
    theta = refit.theta
    b = np.zeros(J)
    offset = 0.0
    if removed.size:
        mu = theta @ A[:, removed]
        nr = n[removed]
        with np.errstate(divide="ignore"):
            b[removed] = np.clip(np.log(nr) - np.log(mu), -BIAS_BOUND, BIAS_BOUND)
        pos = nr > 0
        offset = float(np.sum(nr[pos] * np.log(nr[pos]) - nr[pos]))

    return FitResult(
        theta=theta,
        b=b,
        support=tuple(int(j) for j in removed),
        objective_trace=refit.objective_trace + offset,
        converged=first.converged and refit.converged,
        iterations=first.iterations + refit.iterations,
        mode=TWO_STEP,
        lam=first.lam,
        first_step=first,
    )


def fit(n, A, cfg=FitConfig()):
    if cfg.mode == TWO_STEP:
        return two_step_fit(n, A, cfg)
    return acs_fit(n, A, cfg)


def t_procedure(n, N, lam):
    """Order-statistic support selection for one isoform with ``A[0, j] = N``.

    Counts are sorted ascending and ``theta_s`` is the mean of the ``s``
    smallest divided by ``N``.  A prefix of size ``s`` is self-consistent when
    every kept count satisfies ``n <= N * theta_s + lam`` and every dropped
    count exceeds it, i.e. it is a fixed point of the EM / soft-threshold
    iteration under ``b >= 0``.  The scan returns the largest such prefix,
    which is the one with the highest penalized likelihood; the first
    threshold crossing alone can stop short of it.

    ``t`` is the number of kept counts, or 0 when nothing is dropped.
    """
    n = as_counts(n)
    J = n.size
    if J == 0:
        raise ValueError("t_procedure needs at least one count")
    if not N > 0:
        raise ValueError("depth N must be positive")
    order = np.argsort(n, kind="stable")
    s = n[order]
    running = np.cumsum(s) / (np.arange(1, J + 1) * N)
    cut = N * running + lam
    # some prefix is always consistent: the first crossing, or the full set
    # when there is none
    best = J
    if s[J - 1] > cut[J - 1]:
        for size in range(J - 1, 0, -1):
            if s[size] > cut[size - 1] and s[size - 1] <= cut[size - 1]:
                best = size
                break
    t = 0 if best == J else best
    return TProcedureResult(t, float(running[best - 1]), np.sort(order[:best]))
