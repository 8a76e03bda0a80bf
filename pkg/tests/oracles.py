"""Independent reference computations used by the tests.

Nothing here imports the package's solver code; each routine is a direct,
slow transcription of the quantity it checks.
"""

import itertools
import math

import numpy as np


def scalar_log_likelihood(theta, b, n, A):
    total = 0.0
    for j in range(len(n)):
        mean = 0.0
        for i in range(len(theta)):
            mean += theta[i] * A[i][j] * math.exp(b[j])
        if n[j] > 0:
            total += n[j] * math.log(mean)
        total -= mean
    return total


def bias_stationarity(n, mu, b, lam):
    """Subgradient residual of ``n ln(mu e^b) - mu e^b - lam |b|`` at ``b``.

    Returns 0 when zero is in the subdifferential.
    """
    g = n - mu * math.exp(b)
    if b != 0:
        return abs(g - lam * math.copysign(1.0, b))
    return max(abs(g) - lam, 0.0)


def one_isoform_f(theta, b, n, N, lam):
    """Penalized objective for I = 1, ``a_j = N``."""
    mu = theta * N * np.exp(b)
    return float(np.sum(np.where(n > 0, n * np.log(np.where(mu > 0, mu, 1.0)), 0.0) - mu)
                 - lam * np.sum(np.abs(b)))


def subset_objective(n, N, lam, kept):
    """Penalized likelihood on the event that exactly ``kept`` have zero bias.

    ``theta`` is the mean of the kept counts over ``N``; every dropped count
    takes its soft-threshold bias ``log((n_j - lam) / (N theta))``.
    Returns ``-inf`` when that bias would not be positive.
    """
    kept = list(kept)
    theta = n[kept].sum() / (len(kept) * N)
    if theta <= 0:
        return -math.inf
    val = sum(n[j] * math.log(theta * N) - theta * N for j in kept)
    for j in range(len(n)):
        if j in kept:
            continue
        if n[j] - lam <= N * theta:
            return -math.inf
        bj = math.log((n[j] - lam) / (N * theta))
        val -= (n[j] - lam) - n[j] * math.log(n[j] - lam) + lam * bj
    return val


def is_fixed_point(n, N, lam, kept):
    """Zero-bias set is self-consistent under b >= 0 soft-thresholding."""
    theta = n[list(kept)].sum() / (len(kept) * N)
    return all((n[j] <= N * theta + lam) == (j in kept) for j in range(len(n)))


def brute_force_support(n, N, lam):
    """Best zero-bias set over all non-empty subsets that are fixed points."""
    J = len(n)
    best, best_val = None, -math.inf
    for r in range(1, J + 1):
        for kept in itertools.combinations(range(J), r):
            if not is_fixed_point(n, N, lam, kept):
                continue
            val = subset_objective(n, N, lam, kept)
            if val > best_val:
                best, best_val = kept, val
    return best, best_val


def joint_unpenalized_refit(n, A, free, tol=1e-13, max_iters=2_000_000):
    """Maximize the unpenalized likelihood with free biases on ``free`` columns.

    Alternates a hand-written EM sweep over all columns with the exact bias
    update ``b_j = log(n_j / mu_j)`` on the free columns; ``b`` is pinned to
    zero elsewhere.
    """
    n = np.asarray(n, dtype=float)
    A = np.asarray(A, dtype=float)
    I, J = A.shape
    free = np.asarray(sorted(free), dtype=int)
    theta = np.full(I, n.sum() / A.sum())
    b = np.zeros(J)
    for _ in range(max_iters):
        mu = theta @ A
        if free.size:
            with np.errstate(divide="ignore"):
                b[free] = np.log(n[free] / mu[free])
        w = np.exp(b)
        # expected reads per isoform: split each count by theta_i a_ij / mu_j
        share = theta[:, None] * A / np.where(mu > 0, mu, 1.0)
        nhat = share @ np.where(mu > 0, n, 0.0)
        new = nhat / (A @ w)
        if np.max(np.abs(new - theta)) <= tol * max(1.0, np.max(np.abs(theta))):
            return new
        theta = new
    raise RuntimeError("joint refit did not converge")
