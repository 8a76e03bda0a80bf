"""
Simulation tables
=================

Replays the three simulation designs and prints rows shaped like
``depth, no-bias, one-step, two-step, misidentified`` with the mean L2 error
of theta and, in parentheses, its sample standard deviation over replicates.

Pass ``--quick`` for 20 replicates instead of 100.
"""

import sys
import time

import numpy as np

from isobias.sim import l2_values, run_table

replicates = 20 if "--quick" in sys.argv else 100

###############################################################################
# Example 1: one isoform, the first of five categories is biased upwards by
# a factor e^2.  The no-bias error settles near (e^2 + 4) / 5 - 1 = 1.278,
# whatever the depth; the corrected fits keep improving.

t0 = time.time()
for rep in run_table("example1", depths=(10, 100, 1000, 10000), replicates=replicates):
    print("\t".join(rep.table_row()))
print(f"({time.time() - t0:.1f} s)\n")

###############################################################################
# Example 2: two isoforms that differ only in the third category, and the
# first category is biased downwards by e^-5.

t0 = time.time()
for rep in run_table("example2", replicates=replicates):
    print("\t".join(rep.table_row()))
print(f"({time.time() - t0:.1f} s)\n")

###############################################################################
# Example 3: random rates, exponential abundances, sparse normal biases.
# A handful of replicates draw huge biases, so the means are dominated by
# outliers; the medians tell the story more clearly.

t0 = time.time()
for rep in run_table("example3", replicates=replicates):
    med = {m: np.median(l2_values(rep, m)) for m in ("no-bias", "two-step")}
    print("\t".join(rep.table_row()),
          f"\tmedian no-bias/two-step = {med['no-bias'] / med['two-step']:.1f}")
print(f"({time.time() - t0:.1f} s)")
