"""Poisson read-count model with per-category bias terms.

A gene with ``I`` isoforms and ``J`` read categories is described by a
sampling-rate matrix ``A`` (shape ``(I, J)``), a count vector ``n`` (length
``J``), isoform abundances ``theta`` (length ``I``) and log-scale category
biases ``b`` (length ``J``).  Category ``j`` is Poisson with mean
``exp(b_j) * sum_i theta_i * A[i, j]``.

Arrays are plain float64 numpy arrays; the helpers in this module validate
them and raise subclasses of :class:`ModelError` on violations.
"""

from dataclasses import dataclass

import numpy as np

UNIFORM = "uniform"
COUNT_WEIGHTED = "count-weighted"
PENALTY_MODES = (UNIFORM, COUNT_WEIGHTED)


class ModelError(ValueError):
    """Base class for invalid or degenerate model instances."""


class DimensionError(ModelError):
    pass


class InfeasibleModelError(ModelError):
    """A category with a positive count has a zero Poisson mean."""


class DegenerateIsoformError(ModelError):
    """An isoform has zero total sampling rate."""


class IdentifiabilityError(ModelError):
    """Too many bias parameters selected for the refit to be identifiable."""


@dataclass(frozen=True)
class PenaltyConfig:
    """L1 penalty ``lam * sum_j w_j |b_j|``.

    ``mode="uniform"`` uses ``w_j = 1``; ``mode="count-weighted"`` uses the
    observed count ``w_j = n_j``.
    """

    lam: float
    mode: str = UNIFORM

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ValueError(f"penalty lambda must be finite and >= 0, got {self.lam}")
        if self.mode not in PENALTY_MODES:
            raise ValueError(f"unknown penalty mode {self.mode!r}")

    def weights(self, n):
        n = np.asarray(n, dtype=float)
        if self.mode == UNIFORM:
            return np.ones_like(n)
        return n.copy()

    def thresholds(self, n):
        """Per-category soft-threshold levels ``lam * w_j``."""
        return self.lam * self.weights(n)


def as_rates(A):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"rate matrix must be I x J with I, J >= 1, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ModelError("rate matrix has non-finite entries")
    if np.any(A < 0):
        raise ModelError("rate matrix has negative entries")
    return A


def as_counts(n, J=None):
    n = np.atleast_1d(np.asarray(n, dtype=float))
    if n.ndim != 1:
        raise DimensionError(f"counts must be a vector, got shape {n.shape}")
    if J is not None and n.shape[0] != J:
        raise DimensionError(f"expected {J} counts, got {n.shape[0]}")
    if not np.all(np.isfinite(n)) or np.any(n < 0):
        raise ModelError("counts must be finite and non-negative")
    if np.any(n != np.round(n)):
        raise ModelError("counts must be integers")
    return n


def as_theta(theta, I=None):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    if theta.ndim != 1 or (I is not None and theta.shape[0] != I):
        raise DimensionError(f"theta must have length {I}, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)) or np.any(theta < 0):
        raise ModelError("theta must be finite and non-negative")
    return theta


def as_bias(b, J=None):
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if b.ndim != 1 or (J is not None and b.shape[0] != J):
        raise DimensionError(f"b must have length {J}, got shape {b.shape}")
    if not np.all(np.isfinite(b)):
        raise ModelError("b must be finite")
    return b


def check_instance(n, A):
    """Validate a (counts, rates) pair and return them as arrays.

    Raises InfeasibleModelError if a category with a positive count has an
    all-zero rate column.
    """
    A = as_rates(A)
    n = as_counts(n, A.shape[1])
    dead = (n > 0) & ~np.any(A > 0, axis=0)
    if np.any(dead):
        raise InfeasibleModelError(
            f"categories {np.flatnonzero(dead).tolist()} have positive counts but zero rates")
    return n, A


def fitted_means(theta, b, A):
    """Poisson means ``exp(b_j) * sum_i theta_i A[i, j]``."""
    return (np.asarray(theta, dtype=float) @ A) * np.exp(b)


def _poisson_terms(n, mu):
    bad = (n > 0) & ~(mu > 0)
    if np.any(bad):
        raise InfeasibleModelError(
            f"categories {np.flatnonzero(bad).tolist()} have positive counts but zero fitted mean")
    # 0 * log(0) := 0 for empty categories
    logs = np.log(np.where(n > 0, mu, 1.0))
    return n * logs - mu


def log_likelihood(theta, b, n, A):
    """Poisson log-likelihood without the ``-log(n_j!)`` constants."""
    A = as_rates(A)
    I, J = A.shape
    theta = as_theta(theta, I)
    b = as_bias(b, J)
    n = as_counts(n, J)
    return float(np.sum(_poisson_terms(n, fitted_means(theta, b, A))))


def penalty(b, n, pen):
    return float(np.sum(pen.thresholds(n) * np.abs(b)))


def penalized_objective(theta, b, n, A, pen):
    """Log-likelihood minus the (optionally count-weighted) L1 bias penalty."""
    return log_likelihood(theta, b, n, A) - penalty(np.asarray(b, dtype=float), n, pen)


def soft_threshold(x, t):
    """``sign(x) * max(|x| - t, 0)``, elementwise."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("threshold must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.sign(x) * np.maximum(np.abs(x) - t, 0.0)
    return float(out) if out.ndim == 0 else out
