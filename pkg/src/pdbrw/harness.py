"""Experiment orchestration: named Monte Carlo experiments with seeded
replicate streams, JSONL/CSV/summary outputs, and reproducible manifests.

Every experiment is described by an `ExperimentSpec` (schema-validated when
loaded from JSON).  Replicate randomness is derived as
stream_key(master_seed, hash(kind/model, replicate index)), so reruns of the
same spec produce byte-identical record files; the manifest captures the
spec, seed and output digests, and `rerun_from_manifest` verifies the
round trip.

Experiment kinds:

  median-sweep  exact minimal displacements over an n-grid; per-n medians
                with order-statistic CIs, residuals against the two-term
                displacement growth law, and a weighted LS slope of
                (median - n/e) against log n.
  tail-fit      left/right exponential tail rates of the minimal
                displacement at fixed n.
  census-check  mean population below a displacement threshold vs the exact
                expectation x^n/n!.
  walk-check    sampled-path marginals (KS vs Gamma) and the cycle-lemma
                probability 1/n.
  rrt-sweep     recursive-tree heights vs the e log m growth law, the
                displacement law of the m-th lowest node, and the coupling
                between direct growth and walk extraction.
  pratt-survey  heights of prime certificate trees over a sieved range.
  tight-check   two-sided Monte Carlo evaluation of the generation-additivity
                tail inequality, plus the median-shift deduction from its
                companion bound.

Each run returns records (JSONL rows), a summary dict, and a list of named
checks with pass/fail status; checks gate the CLI's --assert mode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import csv
import hashlib
import io
import json
import math
import os

import numpy as np

from . import analytics, engine, fastbrw, pratt, trees, walks
from .rng import RngStream, hash_label
from .samplers import MODELS, PD, PWIT
from .stats import StatSummary, fit_tail_rates, median_ci, wls_line

__all__ = [
    "ExperimentSpec",
    "RunResult",
    "ConfigError",
    "EXPERIMENT_KINDS",
    "SPEC_SCHEMA",
    "load_spec",
    "run_experiment",
    "write_outputs",
    "rerun_from_manifest",
    "DEFAULT_PARAMS",
]

EXPERIMENT_KINDS = (
    "median-sweep",
    "tail-fit",
    "census-check",
    "walk-check",
    "rrt-sweep",
    "pratt-survey",
    "tight-check",
)

# declared wall-clock budget per kind at default scale on a single core,
# recorded in the manifest so long runs are flagged up front
EXPECTED_MINUTES: dict[str, float] = {
    "median-sweep": 240.0,
    "tail-fit": 20.0,
    "census-check": 2.0,
    "walk-check": 2.0,
    "rrt-sweep": 10.0,
    "pratt-survey": 5.0,
    "tight-check": 2.0,
}

DEFAULT_PARAMS: dict[str, dict] = {
    "median-sweep": {
        "n_values": [12, 16, 20, 24, 28, 32, 36, 40, 44],
        # censoring threshold above the growth-law center; must stay clear of
        # the median (+ its CI), which sits around +1.0 to +1.4
        "budget_margin": 2.5,
    },
    "tail-fit": {"n": 25, "budget_margin": 10.5},
    "census-check": {"pairs": [[3, 1.5], [5, 2.0], [8, 3.0]]},
    "walk-check": {"n_values": [2, 5, 10, 20], "k_max": 5,
                   "rotation_n": 10, "rotation_k": 4},
    "rrt-sweep": {"m_values": [64, 128, 256, 512, 1024, 2048, 4096, 8192],
                  "lowest_m": 50, "lowest_replicates": 2000,
                  "coupling_m": 64, "coupling_replicates": 10000,
                  "tail_offsets": [1.0, 2.0, 3.0]},
    "pratt-survey": {"lo": 1000000, "hi": 1100000},
    "tight-check": {"m": 5, "n": 5, "M": 3.0, "N": 3.0,
                    "epsilon": 0.05, "deduction_n": 10},
}

DEFAULT_REPLICATES: dict[str, int] = {
    "median-sweep": 2000,
    "tail-fit": 100000,
    "census-check": 100000,
    "walk-check": 100000,
    "rrt-sweep": 2000,
    "pratt-survey": 1,
    "tight-check": 100000,
}

SPEC_SCHEMA = {
    "type": "object",
    "properties": {
        "kind": {"enum": list(EXPERIMENT_KINDS)},
        "model": {"enum": [PWIT, PD, "both"]},
        "replicates": {"type": "integer", "minimum": 1},
        "master_seed": {"type": "integer", "minimum": 0},
        "work_limit": {"type": "number", "exclusiveMinimum": 0},
        "params": {"type": "object"},
    },
    "required": ["kind", "master_seed"],
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid experiment configuration (schema violation or bad values)."""


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    master_seed: int
    model: str = "both"
    replicates: int | None = None
    work_limit: float = 1e12
    params: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.model not in (*MODELS, "both"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.replicates is not None and self.replicates < 1:
            raise ConfigError("replicates must be >= 1")

    @property
    def models(self) -> tuple[str, ...]:
        return MODELS if self.model == "both" else (self.model,)

    @property
    def reps(self) -> int:
        return (self.replicates if self.replicates is not None
                else DEFAULT_REPLICATES[self.kind])

    def param(self, name: str):
        if name in self.params:
            return self.params[name]
        return DEFAULT_PARAMS[self.kind][name]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "master_seed": self.master_seed,
            "model": self.model,
            "replicates": self.reps,
            "work_limit": self.work_limit,
            "params": {**DEFAULT_PARAMS[self.kind], **self.params},
        }


def load_spec(obj: dict) -> ExperimentSpec:
    """Validate a JSON config dict against the schema and build the spec."""
    import jsonschema

    try:
        jsonschema.validate(obj, SPEC_SCHEMA)
    except jsonschema.ValidationError as err:
        field_path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(f"config field {field_path}: {err.message}") from err
    known = DEFAULT_PARAMS[obj["kind"]]
    for name in obj.get("params", {}):
        if name not in known:
            raise ConfigError(f"unknown parameter {name!r} for "
                              f"{obj['kind']}; expected one of {sorted(known)}")
    return ExperimentSpec(
        kind=obj["kind"],
        master_seed=obj["master_seed"],
        model=obj.get("model", "both"),
        replicates=obj.get("replicates"),
        work_limit=obj.get("work_limit", 1e12),
        params=obj.get("params", {}),
    )


@dataclass
class RunResult:
    spec: ExperimentSpec
    records: list[dict]
    summary: dict
    checks: list[dict]

    @property
    def all_passed(self) -> bool:
        return all(c["passed"] for c in self.checks)


def _check(name: str, passed: bool, detail: dict) -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def _replicate_keys(spec: ExperimentSpec, label: str, count: int) -> np.ndarray:
    return fastbrw.replicate_keys(spec.master_seed, f"{spec.kind}/{label}",
                                  count)


def _stream(spec: ExperimentSpec, label: str, index: int = 0) -> RngStream:
    return RngStream(spec.master_seed,
                     hash_label(f"{spec.kind}/{label}", index))


# ---------------------------------------------------------------- median sweep

def run_median_sweep(spec: ExperimentSpec) -> RunResult:
    n_values = sorted(spec.param("n_values"))
    margin = float(spec.param("budget_margin"))
    reps = spec.reps
    records: list[dict] = []
    rows = {model: [] for model in spec.models}

    for model in spec.models:
        for n in n_values:
            center = analytics.m_n(n)
            keys = _replicate_keys(spec, f"{model}/n={n}", reps)
            # pass budgets land exactly on center + margin (unit steps)
            b0 = center + margin - 3.0
            values, visits = fastbrw.min_displacement_batch(
                n, model, keys, initial_budget=b0, step=1.0,
                budget_cap=center + margin)
            censored = int(np.sum(np.isinf(values)))
            if int(visits.sum()) > spec.work_limit:
                raise engine.WorkLimitExceeded(
                    f"median sweep n={n} used {visits.sum():g} child visits")
            for r, v in enumerate(values):
                records.append({"kind": spec.kind, "model": model, "n": n,
                                "replicate": r,
                                "value": None if math.isinf(v) else float(v)})
            finite = np.sort(values[np.isfinite(values)])
            if censored > 0.4 * reps:
                raise engine.WorkLimitExceeded(
                    f"{censored}/{reps} censored at n={n}: budget margin "
                    f"{margin} too small for a median")
            med = float(np.median(np.sort(values)))  # inf-safe: censored > med
            lo, hi = median_ci(finite) if censored == 0 else \
                median_ci(np.concatenate([finite, np.full(censored, np.inf)]))
            rows[model].append({
                "n": n, "replicates": reps, "censored": censored,
                "median": med, "ci_low": lo, "ci_high": hi,
                "median_over_n": med / n,
                "median_minus_ne": med - n / math.e,
                "residual": med - center,
                "mean_visits": float(visits.mean()),
            })

    summary: dict = {"per_model": {}, "slope": {}}
    checks: list[dict] = []
    all_resid = []
    for model in spec.models:
        table = rows[model]
        summary["per_model"][model] = table
        xs = [math.log(t["n"]) for t in table]
        ys = [t["median_minus_ne"] for t in table]
        ws = []
        for t in table:
            half = max((t["ci_high"] - t["ci_low"]) / 2, 1e-6)
            if not math.isfinite(half):
                half = 1.0
            ws.append(1.0 / (half / 1.96) ** 2)
        fit = wls_line(xs, ys, ws)
        ci = fit.slope_ci()
        summary["slope"][model] = {"slope": fit.slope, "se": fit.slope_se,
                                   "ci_low": ci[0], "ci_high": ci[1],
                                   "target": 3 / (2 * math.e)}
        all_resid += [t["residual"] for t in table]

        n_top = max(n_values)
        top = next(t for t in table if t["n"] == n_top)
        if n_top >= 40:
            checks.append(_check(
                f"leading-term-{model}",
                abs(top["median_over_n"] - 1 / math.e) <= 0.05,
                {"n": n_top, "median_over_n": top["median_over_n"],
                 "target": 1 / math.e, "tol": 0.05}))
        if len(table) >= 3:
            checks.append(_check(
                f"log-slope-{model}",
                0.0 < fit.slope < 1.5 and ci[0] > 0.0,
                summary["slope"][model]))
    band = max(all_resid) - min(all_resid)
    summary["residual_band"] = {"low": min(all_resid), "high": max(all_resid),
                                "width": band}
    checks.append(_check("residual-band", band <= 2.0,
                         summary["residual_band"]))
    return RunResult(spec, records, summary, checks)


# ------------------------------------------------------------------- tail fit

def run_tail_fit(spec: ExperimentSpec) -> RunResult:
    n = int(spec.param("n"))
    margin = float(spec.param("budget_margin"))
    reps = spec.reps
    records: list[dict] = []
    fits: dict[str, dict] = {}

    for model in spec.models:
        center = analytics.m_n(n)
        keys = _replicate_keys(spec, f"{model}/n={n}", reps)
        values, visits = fastbrw.min_displacement_batch(
            n, model, keys, initial_budget=center + margin - 11.0, step=1.0,
            budget_cap=center + margin)
        if int(visits.sum()) > spec.work_limit:
            raise engine.WorkLimitExceeded(
                f"tail fit used {visits.sum():g} child visits")
        for r, v in enumerate(values):
            records.append({"kind": spec.kind, "model": model, "n": n,
                            "replicate": r,
                            "value": None if math.isinf(v) else float(v)})
        fit = fit_tail_rates(values)
        fits[model] = {
            "n": n, "replicates": reps,
            "censored": int(np.sum(np.isinf(values))),
            "median": fit.center,
            "left_rate": fit.left_rate, "left_rate_se": fit.left_rate_se,
            "right_rate": fit.right_rate, "right_rate_se": fit.right_rate_se,
            "left_buckets": fit.left_buckets,
            "right_buckets": fit.right_buckets,
            "asymptotic_left_limit": math.e,
            "asymptotic_right_limit": 1.0,
        }

    # the left-vs-right ordering is a PWIT statement: the PD right tail is
    # doubly exponential, so its fitted right rate dominates at accessible n
    checks = []
    for model in spec.models:
        f = fits[model]
        if model == PWIT:
            checks.append(_check("left-steeper-pwit",
                                 f["left_rate"] > f["right_rate"],
                                 {"left": f["left_rate"],
                                  "right": f["right_rate"]}))
            checks.append(_check("right-rate-floor-pwit",
                                 f["right_rate"] >= 0.5,
                                 {"right": f["right_rate"], "floor": 0.5}))
        else:
            checks.append(_check("rates-positive-pd",
                                 f["left_rate"] > 0 and f["right_rate"] > 0,
                                 {"left": f["left_rate"],
                                  "right": f["right_rate"]}))
    if set(spec.models) == set(MODELS):
        checks.append(_check(
            "pd-right-tail-thinner",
            fits[PD]["right_rate"] >= fits[PWIT]["right_rate"],
            {"pd": fits[PD]["right_rate"],
             "pwit": fits[PWIT]["right_rate"]}))
    return RunResult(spec, records, {"fits": fits}, checks)


# --------------------------------------------------------------- census check

def run_census_check(spec: ExperimentSpec) -> RunResult:
    pairs = [(int(n), float(x)) for n, x in spec.param("pairs")]
    reps = spec.reps
    records: list[dict] = []
    table = []
    checks = []
    for model in spec.models:
        for n, x in pairs:
            expected = analytics.expected_tn(n, x).linear()
            keys = _replicate_keys(spec, f"{model}/n={n}/x={x}", reps)
            levels, _ = fastbrw.census_batch(n, x, model, keys)
            counts = levels[:, n].astype(np.float64)
            mean = float(counts.mean())
            se = float(counts.std(ddof=1) / math.sqrt(reps))
            records.append({"kind": spec.kind, "model": model, "n": n, "x": x,
                            "replicates": reps, "mean_count": mean, "se": se,
                            "expected": expected})
            row = {"model": model, "n": n, "x": x, "mean": mean, "se": se,
                   "expected": expected,
                   "z": (mean - expected) / se if se > 0 else math.inf}
            table.append(row)
            checks.append(_check(f"census-mean-{model}-n{n}",
                                 abs(mean - expected) <= 3 * se, row))
    return RunResult(spec, records, {"table": table}, checks)


# ----------------------------------------------------------------- walk check

def _gamma_marginals(model: str, k_max: int, reps: int,
                     rng: RngStream) -> np.ndarray:
    """reps x k_max matrix of the first k_max child displacements."""
    gen = rng.numpy_generator()
    if model == PWIT:
        return np.cumsum(gen.exponential(size=(reps, k_max)), axis=1)
    u = gen.random(size=(reps, k_max))
    envelope = np.concatenate(
        [np.zeros((reps, 1)), np.cumsum(-np.log1p(-u[:, :-1]), axis=1)],
        axis=1)
    return envelope - np.log(u)


def run_walk_check(spec: ExperimentSpec) -> RunResult:
    from scipy import stats as sps

    n_values = [int(n) for n in spec.param("n_values")]
    k_max = int(spec.param("k_max"))
    rot_n = int(spec.param("rotation_n"))
    rot_k = int(spec.param("rotation_k"))
    reps = spec.reps
    records: list[dict] = []
    checks = []

    marginals = {}
    for model in spec.models:
        xs = _gamma_marginals(model, k_max, reps, _stream(spec, f"marg/{model}"))
        rows = []
        for k in range(1, k_max + 1):
            stat, p = sps.kstest(xs[:, k - 1], "gamma", args=(k,))
            rows.append({"k": k, "ks_stat": float(stat), "p_value": float(p)})
            records.append({"kind": spec.kind, "check": "gamma-marginal",
                            "model": model, "k": k, "ks_stat": float(stat),
                            "p_value": float(p), "replicates": reps})
            checks.append(_check(f"gamma-marginal-{model}-k{k}",
                                 p > 1e-3, rows[-1]))
        marginals[model] = rows

    leading = []
    for n in n_values:
        k = (n + 1) // 2
        est = walks.estimate_event_prob(
            n, k, float(n + k), walks.EventParams(0.0),
            lambda f: f.leading, reps, _stream(spec, f"leading/n={n}"))
        row = {"n": n, "k": k, "probability": est.probability,
               "se": est.standard_error, "expected": 1.0 / n,
               "replicates": reps}
        leading.append(row)
        records.append({"kind": spec.kind, "check": "leading-prob", **row})
        checks.append(_check(
            f"leading-prob-n{n}",
            abs(est.probability - 1.0 / n) <= 3 * max(est.standard_error,
                                                      1e-12),
            row))

    rng = _stream(spec, "rotations")
    bad = 0
    for _ in range(reps):
        w = walks.sample_walk(rot_n, rot_k, rng)
        count = sum(walks.event_flags(r, walks.EventParams(0.0)).leading
                    for r in walks.rotations(w))
        if count != 1:
            bad += 1
    row = {"n": rot_n, "k": rot_k, "replicates": reps,
           "non_unique_leading": bad}
    records.append({"kind": spec.kind, "check": "rotation-unique", **row})
    checks.append(_check("rotation-unique-leading", bad == 0, row))

    summary = {"gamma_marginals": marginals, "leading": leading,
               "rotation_unique": row}
    return RunResult(spec, records, summary, checks)


# ------------------------------------------------------------------ rrt sweep

def run_rrt_sweep(spec: ExperimentSpec) -> RunResult:
    from scipy import stats as sps

    m_values = [int(m) for m in spec.param("m_values")]
    reps = spec.reps
    low_m = int(spec.param("lowest_m"))
    low_reps = int(spec.param("lowest_replicates"))
    coup_m = int(spec.param("coupling_m"))
    coup_reps = int(spec.param("coupling_replicates"))
    offsets = [float(x) for x in spec.param("tail_offsets")]
    records: list[dict] = []
    checks = []

    height_rows = []
    for m in m_values:
        keys = _replicate_keys(spec, f"heights/m={m}", reps)
        heights = fastbrw.rrt_height_batch(m, keys)
        mean = float(heights.mean())
        se = float(heights.std(ddof=1) / math.sqrt(reps))
        row = {"m": m, "replicates": reps, "mean_height": mean, "se": se,
               "centering": trees.height_centering(m),
               "residual": mean - trees.height_centering(m)}
        height_rows.append(row)
        records.append({"kind": spec.kind, "check": "height", **row})

    # law of the m-th lowest displacement: mean har(m-1), bounded upper tail
    har_target = analytics.har(low_m - 1)
    disp = np.empty(low_reps)
    for r in range(low_reps):
        rng = _stream(spec, "lowest", r)
        nodes = engine.lowest_m(low_m, PWIT, rng)
        disp[r] = nodes[-1].displacement
    disp_mean = float(disp.mean())
    disp_se = float(disp.std(ddof=1) / math.sqrt(low_reps))
    lowest_row = {"m": low_m, "replicates": low_reps, "mean": disp_mean,
                  "se": disp_se, "expected": har_target}
    records.append({"kind": spec.kind, "check": "lowest-mean", **lowest_row})
    checks.append(_check("lowest-displacement-mean",
                         abs(disp_mean - har_target) <= 3 * disp_se,
                         lowest_row))
    tail_rows = []
    for x in offsets:
        freq = float(np.mean(disp >= har_target + x))
        bound = trees.lowest_upper_tail_bound(x)
        se = math.sqrt(max(freq * (1 - freq), 1e-12) / low_reps)
        row = {"x": x, "frequency": freq, "bound": bound, "se": se}
        tail_rows.append(row)
        records.append({"kind": spec.kind, "check": "lowest-tail", **row})
        checks.append(_check(f"lowest-upper-tail-x{x:g}",
                             freq <= bound + 3 * se, row))

    # coupling: directly grown heights vs walk-extracted heights
    direct = np.array([trees.build_rrt(coup_m,
                                       _stream(spec, "coupling-direct", r)).height
                       for r in range(coup_reps)])
    extracted = np.array(
        [trees.rrt_from_pwit(coup_m, _stream(spec, "coupling-pwit", r)).height
         for r in range(coup_reps)])
    ks_stat, ks_p = sps.ks_2samp(direct, extracted)
    coupling_row = {"m": coup_m, "replicates": coup_reps,
                    "ks_stat": float(ks_stat), "p_value": float(ks_p),
                    "mean_direct": float(direct.mean()),
                    "mean_extracted": float(extracted.mean())}
    records.append({"kind": spec.kind, "check": "coupling", **coupling_row})
    checks.append(_check("coupling-ks", ks_p > 1e-3, coupling_row))

    summary = {"heights": height_rows, "lowest": lowest_row,
               "lowest_tail": tail_rows, "coupling": coupling_row}
    return RunResult(spec, records, summary, checks)


# --------------------------------------------------------------- pratt survey

def run_pratt_survey(spec: ExperimentSpec) -> RunResult:
    lo = int(spec.param("lo"))
    hi = int(spec.param("hi"))
    records = []
    bound_ok = True
    factor_ok = True
    for rec in pratt.pratt_survey(lo, hi, work_limit=int(spec.work_limit)):
        if rec.height > pratt.height_bound(rec.p):
            bound_ok = False
        prod = 1
        for f in rec.factors:
            prod *= f
        if prod != rec.p - 1:
            factor_ok = False
        records.append({"kind": spec.kind, "p": rec.p, "H": rec.height,
                        "E_loglog": rec.error_loglog, "E_log": rec.error_log,
                        "factors": list(rec.factors)})
    rows = [pratt.PrattSurveyRecord(r["p"], r["H"], r["E_loglog"], r["E_log"],
                                    tuple(r["factors"])) for r in records]
    summary = pratt.survey_summary(rows)
    checks = [
        _check("height-bound", bound_ok, {"count": len(records)}),
        _check("factor-product", factor_ok, {"count": len(records)}),
    ]
    return RunResult(spec, records, summary, checks)


# ---------------------------------------------------------------- tight check

def _indicator_min_at_least(n: int, threshold: float, model: str,
                            keys: np.ndarray) -> np.ndarray:
    """Boolean array: minimal displacement at generation n >= threshold.

    A single bounded search pass at the threshold decides the indicator
    exactly (ties are measure-zero).
    """
    values, _ = fastbrw.min_displacement_batch(
        n, model, keys, initial_budget=threshold, step=1.0,
        budget_cap=threshold)
    return np.isinf(values)


def run_tight_check(spec: ExperimentSpec) -> RunResult:
    m = int(spec.param("m"))
    n = int(spec.param("n"))
    big_m = float(spec.param("M"))
    big_n = float(spec.param("N"))
    eps = float(spec.param("epsilon"))
    ded_n = int(spec.param("deduction_n"))
    reps = spec.reps
    records: list[dict] = []
    checks = []
    summary: dict = {}

    for model in spec.models:
        # LHS: P(minimum at generation m+n >= M+N)
        lhs_ind = _indicator_min_at_least(
            m + n, big_m + big_n, model,
            _replicate_keys(spec, f"{model}/lhs", reps))
        lhs = float(lhs_ind.mean())
        lhs_se = math.sqrt(max(lhs * (1 - lhs), 1e-12) / reps)

        # q = P(minimum at generation n >= N)
        q_ind = _indicator_min_at_least(
            n, big_n, model, _replicate_keys(spec, f"{model}/q", reps))
        q = float(q_ind.mean())
        q_se = math.sqrt(max(q * (1 - q), 1e-12) / reps)

        # RHS: E[ q^(population of generation m below M) ]
        levels, _ = fastbrw.census_batch(
            m, big_m, model, _replicate_keys(spec, f"{model}/t", reps))
        t_counts = levels[:, m].astype(np.float64)
        rhs_samples = q ** t_counts
        rhs = float(rhs_samples.mean())
        rhs_se = float(rhs_samples.std(ddof=1) / math.sqrt(reps))
        # q uncertainty propagated through d/dq E[q^T] = E[T q^(T-1)]
        with np.errstate(divide="ignore"):
            drv = float(np.mean(t_counts * q ** np.maximum(t_counts - 1, 0)))
        combined_se = math.sqrt(lhs_se ** 2 + rhs_se ** 2 + (drv * q_se) ** 2)

        row = {"model": model, "m": m, "n": n, "M": big_m, "N": big_n,
               "replicates": reps, "lhs": lhs, "lhs_se": lhs_se, "q": q,
               "q_se": q_se, "rhs": rhs, "rhs_se": rhs_se,
               "combined_se": combined_se}
        records.append({"kind": spec.kind, "check": "tail-inequality", **row})
        checks.append(_check(f"tail-inequality-{model}",
                             lhs <= rhs + 3 * combined_se, row))
        summary[model] = {"tail_inequality": row}

        # companion bound: pick M* so generation-1 population below M* is
        # rarely under 1/eps, confirm E[(1-eps)^pop] < 1/2, then verify the
        # deduced median shift P(M_n < median(M_{n+1}) - M*) <= eps
        pilot_reps = min(reps, 20000)
        star = _choose_threshold_for_population(
            model, eps, pilot_reps, _replicate_keys(spec, f"{model}/pilot",
                                                    pilot_reps))
        lev1, _ = fastbrw.census_batch(1, star, model,
                                       _replicate_keys(spec, f"{model}/pop",
                                                       pilot_reps))
        pop = lev1[:, 1].astype(np.float64)
        hypo = float(np.mean((1 - eps) ** pop))
        med_keys = _replicate_keys(spec, f"{model}/med", pilot_reps)
        med_vals, _ = fastbrw.min_displacement_batch(ded_n + 1, model, med_keys)
        med_np1 = float(np.median(med_vals))
        thr = med_np1 - star
        if thr <= 0:
            shift_p = 0.0  # displacements are nonnegative
            shift_se = 0.0
        else:
            ind = ~_indicator_min_at_least(
                ded_n, thr, model,
                _replicate_keys(spec, f"{model}/shift", reps))
            shift_p = float(ind.mean())
            shift_se = math.sqrt(max(shift_p * (1 - shift_p), 1e-12) / reps)
        ded_row = {"model": model, "epsilon": eps, "threshold": star,
                   "hypothesis_value": hypo, "median_n_plus_1": med_np1,
                   "deduction_n": ded_n, "shift_probability": shift_p,
                   "shift_se": shift_se}
        records.append({"kind": spec.kind, "check": "median-shift", **ded_row})
        checks.append(_check(f"median-shift-hypothesis-{model}",
                             hypo < 0.5, ded_row))
        checks.append(_check(f"median-shift-{model}",
                             shift_p <= eps + 3 * shift_se, ded_row))
        summary[model]["median_shift"] = ded_row

    return RunResult(spec, records, summary, checks)


def _choose_threshold_for_population(model: str, eps: float, reps: int,
                                     keys: np.ndarray) -> float:
    """Smallest grid threshold x with P(generation-1 population below x
    < 1/eps) <= 1/5, found by pilot simulation."""
    need = math.ceil(1.0 / eps)
    for x in np.arange(1.0, 80.0, 0.5):
        lev, _ = fastbrw.census_batch(1, float(x), model, keys)
        if float(np.mean(lev[:, 1] < need)) <= 0.2:
            return float(x)
    raise engine.WorkLimitExceeded("no threshold below 80 satisfies the "
                                   "population pilot condition")


# ------------------------------------------------------------------ plumbing

_RUNNERS = {
    "median-sweep": run_median_sweep,
    "tail-fit": run_tail_fit,
    "census-check": run_census_check,
    "walk-check": run_walk_check,
    "rrt-sweep": run_rrt_sweep,
    "pratt-survey": run_pratt_survey,
    "tight-check": run_tight_check,
}


def run_experiment(spec: ExperimentSpec) -> RunResult:
    return _RUNNERS[spec.kind](spec)


def _json_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True,
                      separators=(",", ":"))


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _summary_csv(result: RunResult) -> str:
    """Flat CSV of the record rows (plot-ready export)."""
    buf = io.StringIO()
    cols: list[str] = []
    for rec in result.records:
        for key in rec:
            if key not in cols:
                cols.append(key)
    writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    writer.writeheader()
    for rec in result.records:
        writer.writerow({k: ("" if rec.get(k) is None else rec.get(k))
                         for k in cols})
    return buf.getvalue()


def write_outputs(result: RunResult, out_dir: str) -> dict:
    """Write records.jsonl, summary.json, records.csv and manifest.json.

    Returns the manifest dict.  Record and summary bytes are a pure function
    of the spec, so a rerun reproduces them exactly.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "records": os.path.join(out_dir, "records.jsonl"),
        "summary": os.path.join(out_dir, "summary.json"),
        "csv": os.path.join(out_dir, "records.csv"),
    }
    with open(paths["records"], "w") as fh:
        for rec in result.records:
            fh.write(_json_line(rec) + "\n")
    with open(paths["summary"], "w") as fh:
        json.dump({"spec": result.spec.to_dict(), "summary": result.summary,
                   "checks": result.checks}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(paths["csv"], "w") as fh:
        fh.write(_summary_csv(result))

    manifest = {
        "spec": result.spec.to_dict(),
        "expected_minutes": EXPECTED_MINUTES[result.spec.kind],
        "outputs": {name: {"file": os.path.basename(path),
                           "sha256": _sha256(path)}
                    for name, path in paths.items()},
        "checks_passed": result.all_passed,
    }
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def rerun_from_manifest(manifest_path: str, out_dir: str) -> dict:
    """Re-execute the experiment recorded in a manifest and compare digests.

    Returns {"identical": bool, "outputs": {name: {expected, actual}}}.
    """
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    spec = load_spec({k: v for k, v in manifest["spec"].items()})
    result = run_experiment(spec)
    new_manifest = write_outputs(result, out_dir)
    comparison = {}
    identical = True
    for name, meta in manifest["outputs"].items():
        actual = new_manifest["outputs"][name]["sha256"]
        comparison[name] = {"expected": meta["sha256"], "actual": actual}
        if actual != meta["sha256"]:
            identical = False
    return {"identical": identical, "outputs": comparison}
