"""Monte Carlo risk estimation over a grid of sample sizes.

Each cell ``(n, replication)`` draws a fresh sample from a seed derived
from ``(master_seed, n, replication, stream)`` and records the requested
risks. Means and standard errors per ``n`` are then regressed on
``log n`` (or ``log(n / log n)``) and compared with the theoretical
exponent of each risk.

Targets
    ``minimizer_l2``        |z_n - x*|^2 (last iterate)
    ``optimization``        f(zbar_n) - f*
    ``optimization_last``   f(z_n) - f*
    ``minvalue_abs``        |fhat_n - f*| from the two-stage estimator
    ``pointwise_sq``        (f~_n(x0) - f(x0))^2, second-stage estimator alone

The three recursion targets share one run per cell; the two-stage and
pointwise targets use their own streams.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .kernel import make_kernel
from .minvalue import OddSampleSize, estimate_min_value, value_at
from .optimizer import Schedule, run
from .polybasis import build_basis
from .testbed import ScenarioSpec, sample_scenario

TARGETS = ("minimizer_l2", "optimization", "optimization_last", "minvalue_abs", "pointwise_sq")
PREDICTORS = ("log_n", "log_n_over_log")
_RECURSION = ("minimizer_l2", "optimization", "optimization_last")
_STREAMS = {"recursion": 0, "two_stage": 1, "pointwise": 2}


class NonPositiveRisk(ValueError):
    pass


def theoretical_exponent(target: str, beta: float, d: int) -> float:
    """Positive exponent ``r`` in the predicted risk ``~ n^(-r)``."""
    if not beta >= 2 or d < 1:
        raise ValueError(f"need beta >= 2 and d >= 1, got beta={beta}, d={d}")
    if target in _RECURSION:
        return 2 * (beta - 1) / (2 * beta + d)
    if target == "minvalue_abs":
        return beta / (2 * beta + d) if beta > 2 else 2 / (4 + d)
    if target == "pointwise_sq":
        return 2 * beta / (2 * beta + d)
    raise ValueError(f"unknown target {target!r}")


def default_predictor(target: str, beta: float) -> str:
    if target in _RECURSION or (target == "minvalue_abs" and beta <= 2):
        return "log_n_over_log"
    return "log_n"


# Reference exponents for the quadratic risk of the minimizer and the error
# on the minimum value, passive versus active design.
def rate_table(beta: float, d: int) -> dict:
    return {
        "passive": {"minimizer_l2": 2 * (beta - 1) / (2 * beta + d), "minvalue": beta / (2 * beta + d)},
        "active": {"minimizer_l2": (beta - 1) / beta, "minvalue": 0.5},
    }


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    stderr: float


def fit_rate(points, predictor: str = "log_n") -> RateFit:
    """OLS of ``log(risk)`` on ``log n`` or ``log(n / log n)``."""
    pts = [(float(n), float(r)) for n, r in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points to fit a rate, got {len(pts)}")
    if predictor not in PREDICTORS:
        raise ValueError(f"unknown predictor {predictor!r}")
    if any(not (r > 0) or not math.isfinite(r) for _, r in pts):
        raise NonPositiveRisk("all risks must be positive and finite")
    n = np.array([p[0] for p in pts])
    if predictor == "log_n_over_log" and np.any(n <= math.e):
        raise ValueError("log_n_over_log needs every n > e")
    x = np.log(n) if predictor == "log_n" else np.log(n / np.log(n))
    yv = np.log([p[1] for p in pts])
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, yv, rcond=None)
    resid = yv - A @ coef
    dof = len(pts) - 2
    sigma2 = float(resid @ resid) / dof if dof > 0 else 0.0
    cov = sigma2 * np.linalg.inv(A.T @ A)
    return RateFit(slope=float(coef[0]), intercept=float(coef[1]), stderr=float(math.sqrt(cov[0, 0])))


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: ScenarioSpec
    n_grid: tuple
    replications: int
    master_seed: int
    targets: tuple
    beta: float = 2.0
    alpha: float = 2.0
    kernel: str = "quartic"
    predictors: dict = field(default_factory=dict)
    slope_bands: dict = field(default_factory=dict)
    query_point: tuple | None = None
    stage1: str = "average"
    z1: tuple | None = None

    def __post_init__(self):
        grid = tuple(int(n) for n in self.n_grid)
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "targets", tuple(self.targets))
        if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] < 1:
            raise ValueError(f"n_grid must be strictly ascending positive integers, got {grid}")
        if self.replications < 2:
            raise ValueError("need at least 2 replications for a standard error")
        unknown = set(self.targets) - set(TARGETS)
        if unknown or not self.targets:
            raise ValueError(f"unknown or empty targets: {sorted(unknown)}")
        if ({"minvalue_abs", "pointwise_sq"} & set(self.targets)) and any(n % 2 for n in grid):
            raise OddSampleSize("two-stage targets need every n in the grid to be even")
        if "pointwise_sq" in self.targets and self.query_point is None:
            raise ValueError("pointwise_sq needs a query_point")
        for t, p in self.predictors.items():
            if p not in PREDICTORS:
                raise ValueError(f"unknown predictor {p!r} for {t}")
        Schedule(self.beta, self.alpha, self.scenario.d)

    @property
    def schedule(self) -> Schedule:
        return Schedule(self.beta, self.alpha, self.scenario.d)

    def predictor(self, target: str) -> str:
        return self.predictors.get(target, default_predictor(target, self.beta))

    def band(self, target: str) -> tuple[float, float]:
        if target in self.slope_bands:
            lo, hi = self.slope_bands[target]
            return float(lo), float(hi)
        e = theoretical_exponent(target, self.beta, self.scenario.d)
        return -e - 0.15, -e + 0.15

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario.to_dict(), "n_grid": list(self.n_grid),
            "replications": self.replications, "master_seed": self.master_seed,
            "targets": list(self.targets), "beta": self.beta, "alpha": self.alpha,
            "kernel": self.kernel, "predictors": dict(self.predictors),
            "slope_bands": {k: list(v) for k, v in self.slope_bands.items()},
            "query_point": None if self.query_point is None else list(self.query_point),
            "stage1": self.stage1, "z1": None if self.z1 is None else list(self.z1),
        }

    @classmethod
    def from_dict(cls, spec: dict) -> "ExperimentPlan":
        spec = dict(spec)
        scenario = ScenarioSpec.from_dict(spec.pop("scenario"))
        targets = spec.pop("targets", spec.pop("risk_targets", None))
        if targets is None:
            raise ValueError("plan needs 'targets'")
        qp = spec.pop("query_point", None)
        z1 = spec.pop("z1", None)
        known = {"n_grid", "replications", "master_seed", "beta", "alpha", "kernel",
                 "predictors", "slope_bands", "stage1"}
        extra = set(spec) - known
        if extra:
            raise ValueError(f"unknown plan keys: {sorted(extra)}")
        return cls(scenario=scenario, targets=tuple(targets),
                   query_point=None if qp is None else tuple(np.atleast_1d(qp).tolist()),
                   z1=None if z1 is None else tuple(np.atleast_1d(z1).tolist()), **spec)


def cell_seed(master_seed: int, n: int, replication: int, stream: str) -> np.random.SeedSequence:
    """Independent, order-free substream for one Monte Carlo cell."""
    return np.random.SeedSequence(entropy=int(master_seed),
                                  spawn_key=(int(n), int(replication), _STREAMS[stream]))


def run_cell(plan: ExperimentPlan, n: int, replication: int) -> dict:
    """Risks of every requested target for one ``(n, replication)`` cell."""
    sc = plan.scenario
    obj = sc.objective
    kernel = make_kernel(plan.kernel, sc.d)
    sched = plan.schedule
    basis = build_basis(sc.d, sched.degree)
    out = {}
    wanted = set(plan.targets)
    if wanted & set(_RECURSION):
        X, y = sample_scenario(sc, n, cell_seed(plan.master_seed, n, replication, "recursion"))
        res = run(X, y, sched, sc.domain, z1=plan.z1, kernel=kernel, basis=basis)
        x_star, f_star = obj.known_minimizer, obj.known_minimum
        out["minimizer_l2"] = float(np.sum((res.z_final - x_star) ** 2))
        out["optimization"] = float(obj.value(res.z_bar) - f_star)
        out["optimization_last"] = float(obj.value(res.z_final) - f_star)
    if "minvalue_abs" in wanted:
        X, y = sample_scenario(sc, n, cell_seed(plan.master_seed, n, replication, "two_stage"))
        est = estimate_min_value(X, y, sched, sc.domain, kernel=kernel, basis=basis,
                                 z1=plan.z1, stage1=plan.stage1)
        out["minvalue_abs"] = abs(est.f_hat - obj.known_minimum)
    if "pointwise_sq" in wanted:
        m = n // 2
        X, y = sample_scenario(sc, m, cell_seed(plan.master_seed, n, replication, "pointwise"))
        x0 = np.asarray(plan.query_point, dtype=float)
        f_tilde = value_at(X, y, x0, n, plan.beta, kernel, basis)
        out["pointwise_sq"] = float((f_tilde - obj.value(x0)) ** 2)
    return {t: out[t] for t in plan.targets}


def _cell_task(args):
    plan, n, r = args
    return n, r, run_cell(plan, n, r)


@dataclass
class RiskReport:
    plan: dict
    rows: list
    fits: dict
    diagnostics: list

    def to_dict(self) -> dict:
        return {"plan": self.plan, "rows": self.rows, "fits": self.fits,
                "diagnostics": self.diagnostics}

    @classmethod
    def from_dict(cls, d: dict) -> "RiskReport":
        return cls(plan=d["plan"], rows=d["rows"], fits=d["fits"], diagnostics=d["diagnostics"])

    def mean_risks(self, target: str) -> list:
        return [row["mean_risk"] for row in self.rows if row["target"] == target]

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["target", "n", "mean_risk", "stderr", "replications"])
            for row in self.rows:
                w.writerow([row["target"], row["n"], repr(row["mean_risk"]),
                            repr(row["stderr"]), row["replications"]])


def run_experiment(plan: ExperimentPlan, workers: int = 1, progress=None) -> RiskReport:
    """Estimate every requested risk on every grid point and fit rates.

    Results do not depend on ``workers`` or on the order cells finish in:
    each cell has its own seed and per-replication risks are stored by
    index before aggregation.
    """
    R = plan.replications
    grid = plan.n_grid
    risks = {t: np.full((len(grid), R), np.nan) for t in plan.targets}
    tasks = [(plan, n, r) for n in grid for r in range(R)]
    index = {n: i for i, n in enumerate(grid)}
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = pool.map(_cell_task, tasks, chunksize=max(1, len(tasks) // (8 * workers)))
            for n, r, vals in results:
                for t, v in vals.items():
                    risks[t][index[n], r] = v
                if progress:
                    progress(n, r)
    else:
        for task in tasks:
            n, r, vals = _cell_task(task)
            for t, v in vals.items():
                risks[t][index[n], r] = v
            if progress:
                progress(n, r)

    rows, fits, diagnostics = [], {}, []
    d = plan.scenario.d
    for t in plan.targets:
        bad = np.argwhere(~np.isfinite(risks[t]))
        if bad.size:
            i, r = bad[0]
            diagnostics.append({"target": t, "n": int(grid[i]), "replication": int(r),
                                "reason": "non-finite risk; target aborted"})
            continue
        means = risks[t].mean(axis=1)
        ses = risks[t].std(axis=1, ddof=1) / math.sqrt(R)
        for n, mu, se in zip(grid, means, ses):
            rows.append({"target": t, "n": int(n), "mean_risk": float(mu), "stderr": float(se),
                         "replications": R})
        exponent = theoretical_exponent(t, plan.beta, d)
        entry = {"theoretical_exponent": exponent, "predictor": plan.predictor(t),
                 "band": list(plan.band(t)),
                 "monotone_decreasing": bool(np.all(np.diff(means) < 0))}
        if len(grid) >= 3:
            try:
                fit = fit_rate(list(zip(grid, means)), plan.predictor(t))
            except NonPositiveRisk as exc:
                diagnostics.append({"target": t, "reason": str(exc)})
            else:
                lo, hi = plan.band(t)
                entry.update(slope=fit.slope, intercept=fit.intercept, slope_stderr=fit.stderr,
                             passed=bool(lo <= fit.slope <= hi))
        fits[t] = entry
    return RiskReport(plan=plan.to_dict(), rows=rows, fits=fits, diagnostics=diagnostics)


def emit_observations(plan: ExperimentPlan, n: int | None = None, replication: int = 0):
    """The raw sample behind one recursion cell (largest ``n`` by default)."""
    n = plan.n_grid[-1] if n is None else n
    return sample_scenario(plan.scenario, n, cell_seed(plan.master_seed, n, replication, "recursion"))
