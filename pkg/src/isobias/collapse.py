"""Merge read types with proportional sampling-rate columns.

Read types whose rate vectors across isoforms are positive multiples of each
other carry the same information about ``theta``; summing their counts and
rates gives read categories, a minimal sufficient reduction of the data.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import as_counts, as_rates


@dataclass(frozen=True)
class ReadTypeTable:
    rates: np.ndarray
    counts: np.ndarray
    type_ids: tuple = ()

    def __post_init__(self):
        rates = np.asarray(self.rates, dtype=float)
        if rates.ndim != 2:
            raise ValueError(f"rates must be I x M, got shape {rates.shape}")
        if rates.shape[1]:
            rates = as_rates(rates)
        counts = as_counts(self.counts, rates.shape[1]) if rates.shape[1] else np.zeros(0)
        ids = tuple(self.type_ids) or tuple(f"t{m}" for m in range(rates.shape[1]))
        if len(ids) != rates.shape[1]:
            raise ValueError("type_ids length does not match the number of read types")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "type_ids", ids)


class Collapsed(NamedTuple):
    rates: np.ndarray
    counts: np.ndarray
    mapping: np.ndarray
    category_ids: tuple


def _profile(col):
    top = col.max()
    return col / top if top > 0 else col


def collapse_read_types(table, prop_tol=0.0):
    """Group read types into categories of proportional rate columns.

    Each column is scaled by its largest entry and compared against the
    first member of every existing category; ``prop_tol`` bounds the
    elementwise difference of the scaled columns (0 means exact up to
    rounding).  All-zero
    columns form one category.  Categories are numbered in order of first
    appearance and named by joining member type ids with ``+``.

    Returns the category rate matrix (member columns summed), category
    counts, ``mapping[m]`` = category of read type ``m``, and category ids.
    """
    if prop_tol < 0:
        raise ValueError("prop_tol must be >= 0")
    # a few ulps of slack so exact multiples survive the rescaling
    tol = prop_tol + 8 * np.finfo(float).eps
    R, n = table.rates, table.counts
    M = R.shape[1]
    mapping = np.empty(M, dtype=int)
    reps = []
    for m in range(M):
        prof = _profile(R[:, m])
        for k, rep in enumerate(reps):
            if np.all(np.abs(prof - rep) <= tol):
                mapping[m] = k
                break
        else:
            mapping[m] = len(reps)
            reps.append(prof)

    K = len(reps)
    rates = np.zeros((R.shape[0], K))
    counts = np.zeros(K)
    np.add.at(rates.T, mapping, R.T)
    np.add.at(counts, mapping, n)
    ids = tuple("+".join(t for t, k in zip(table.type_ids, mapping) if k == c) for c in range(K))
    return Collapsed(rates, counts, mapping, ids)
