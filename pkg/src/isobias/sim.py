"""Seeded simulation studies comparing no-bias, one-step and two-step fits.

Three built-in designs:

``example1``
    one isoform, five equal categories, ``theta = 1``, ``b = (2, 0, 0, 0, 0)``.
``example2``
    two isoforms differing by the third category, ``theta = (6, 3)``,
    ``b = (-5, 0, 0, 0, 0, 0)``.
``example3``
    five isoforms, twenty categories; rates, abundances and biases are
    redrawn for every replicate.

Every replicate uses its own PCG64 stream seeded from ``(seed, replicate)``,
so a replicate's data do not depend on how many others were run or in which
order.  All three methods are fitted to the same counts.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .model import ModelError, as_bias, as_rates, as_theta
from .solver import NO_BIAS, ONE_STEP, TWO_STEP, FitConfig, fit

METHODS = (NO_BIAS, ONE_STEP, TWO_STEP)
DESIGNS = ("example1", "example2", "example3")


@dataclass(frozen=True)
class CustomDesign:
    """Fixed relative rates ``C`` with true abundances and biases."""

    C: np.ndarray
    theta: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        C = as_rates(self.C)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "theta", as_theta(self.theta, C.shape[0]))
        object.__setattr__(self, "b", as_bias(self.b, C.shape[1]))


EXAMPLE1 = CustomDesign(C=[[1, 1, 1, 1, 1]], theta=[1.0], b=[2, 0, 0, 0, 0])
# b is given for the first three of six categories; the rest are unbiased
EXAMPLE2 = CustomDesign(
    C=[[1, 2, 1, 2, 3, 2], [1, 2, 0, 2, 3, 2]], theta=[6.0, 3.0], b=[-5, 0, 0, 0, 0, 0])


@dataclass(frozen=True)
class SimulationSpec:
    design: str | CustomDesign
    depth: float
    replicates: int = 100
    seed: int = 0
    fit: FitConfig = FitConfig()
    zero_tol: float = 1e-6

    def __post_init__(self):
        if isinstance(self.design, str) and self.design not in DESIGNS:
            raise ValueError(f"unknown design {self.design!r}")
        if not self.depth > 0:
            raise ValueError("depth must be positive")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


@dataclass(frozen=True)
class SimulatedData:
    n: np.ndarray
    A: np.ndarray
    theta: np.ndarray
    b: np.ndarray


@dataclass
class MethodSummary:
    mean_l2: float
    sd_l2: float
    mean_misidentified: float
    sd_misidentified: float
    fitted: int
    failures: int


@dataclass
class SimulationReport:
    design: str
    depth: float
    replicates: int
    seed: int
    methods: dict
    records: list = field(default_factory=list)

    def table_row(self):
        """``depth, no-bias, one-step, two-step, misidentified`` cells."""
        cells = [_fmt_num(self.depth)]
        for m in METHODS:
            s = self.methods[m]
            cells.append(f"{_round(s.mean_l2)} ({_round(s.sd_l2)})")
        s = self.methods[TWO_STEP]
        cells.append(f"{_round(s.mean_misidentified)} ({_round(s.sd_misidentified)})")
        return cells

    def to_dict(self):
        return {
            "design": self.design,
            "depth": self.depth,
            "replicates": self.replicates,
            "seed": self.seed,
            "methods": {m: vars(s) for m, s in self.methods.items()},
            "records": self.records,
        }


def _round(x):
    return "nan" if not np.isfinite(x) else f"{x:.2f}"


def _fmt_num(x):
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def replicate_rng(seed, replicate):
    """Independent PCG64 stream for one replicate."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed % 2**64, replicate])))


def _example3_structure(rng, I=5, J=20):
    u1 = rng.random((I, J))
    c = rng.random((I, J))
    C = np.where(u1 < 0.1, 0.0, c)
    theta = rng.exponential(1.0, I)
    u2 = rng.random(J)
    z = rng.normal(0.0, 3.0, J)
    b = np.where(u2 < 0.9, 0.0, z)
    return C, theta, b


def generate_counts(spec, replicate):
    """Draw one replicate: ``A = depth * C`` and Poisson counts."""
    if not 0 <= replicate < spec.replicates:
        raise ValueError(f"replicate index {replicate} outside [0, {spec.replicates})")
    rng = replicate_rng(spec.seed, replicate)
    design = spec.design
    if design == "example3":
        C, theta, b = _example3_structure(rng)
    else:
        if design == "example1":
            design = EXAMPLE1
        elif design == "example2":
            design = EXAMPLE2
        C, theta, b = design.C, design.theta, design.b
    A = spec.depth * C
    n = rng.poisson((theta @ A) * np.exp(b)).astype(float)
    return SimulatedData(n=n, A=A, theta=theta.copy(), b=b.copy())


def evaluate_fit(result, theta_true, b_true, zero_tol=1e-6):
    """L2 error of ``theta`` and the number of categories whose
    zero / non-zero bias status is wrong."""
    theta_true = np.asarray(theta_true, dtype=float)
    b_true = np.asarray(b_true, dtype=float)
    if result.theta.shape != theta_true.shape or result.b.shape != b_true.shape:
        raise ValueError("fitted and true parameters differ in shape")
    l2 = float(np.linalg.norm(result.theta - theta_true))
    mis = int(np.sum((b_true == 0) != (np.abs(result.b) <= zero_tol)))
    return l2, mis


def _sd(x):
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def run_study(spec):
    """Fit every replicate with all three methods and aggregate the errors.

    Replicates where a method raises a :class:`ModelError` are recorded with
    the error message and left out of that method's aggregates.
    """
    records = []
    per_method = {m: ([], []) for m in METHODS}
    failures = dict.fromkeys(METHODS, 0)
    for r in range(spec.replicates):
        data = generate_counts(spec, r)
        rec = {"replicate": r, "counts": data.n.astype(int).tolist()}
        for m in METHODS:
            try:
                res = fit(data.n, data.A, replace(spec.fit, mode=m))
            except ModelError as exc:
                failures[m] += 1
                rec[m] = {"error": type(exc).__name__, "message": str(exc)}
                continue
            l2, mis = evaluate_fit(res, data.theta, data.b, spec.zero_tol)
            per_method[m][0].append(l2)
            per_method[m][1].append(mis)
            rec[m] = {"l2": l2, "misidentified": mis, "support": list(res.support),
                      "converged": res.converged}
        records.append(rec)

    summaries = {}
    for m in METHODS:
        l2s, mis = per_method[m]
        summaries[m] = MethodSummary(
            mean_l2=float(np.mean(l2s)) if l2s else float("nan"),
            sd_l2=_sd(l2s),
            mean_misidentified=float(np.mean(mis)) if mis else float("nan"),
            sd_misidentified=_sd(mis),
            fitted=len(l2s),
            failures=failures[m],
        )
    name = spec.design if isinstance(spec.design, str) else "custom"
    return SimulationReport(name, float(spec.depth), spec.replicates, spec.seed, summaries, records)


def run_table(design, depths=(10, 100, 1000), replicates=100, seed=0, cfg=FitConfig()):
    """One report per depth, same seed at every depth."""
    return [run_study(SimulationSpec(design, d, replicates, seed, cfg)) for d in depths]


def l2_values(report, method):
    """Per-replicate L2 errors of one method (failed fits skipped)."""
    return np.array([r[method]["l2"] for r in report.records if "l2" in r[method]])
