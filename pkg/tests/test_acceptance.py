"""End-to-end acceptance gate.

One test per headline claim, each printing a single [PASS]/[FAIL] line even
under pytest's output capture.  The two long Monte Carlo sweeps (the median
growth law and the tail-rate fit) read precomputed artifact directories when
a matching manifest is present under PDBRW_ARTIFACTS (default
/root/artifacts); otherwise they run inline at full scale.
"""

import itertools
import json
import math
import os
from pathlib import Path

import pytest

from pdbrw import analytics, engine
from pdbrw.analytics import LevelClass, count_tnk, count_tnk_exact
from pdbrw.harness import (ExperimentSpec, rerun_from_manifest,
                           run_experiment, write_outputs)
from pdbrw.pratt import (distinct_prime_factors, height_bound, pratt_height,
                         pratt_survey, sieve_primes)
from pdbrw.rng import RngStream, child_key, stream_key
from pdbrw.samplers import DisplacementStream

ARTIFACT_ROOT = os.environ.get("PDBRW_ARTIFACTS", "/root/artifacts")
SEED = 1
MODELS = ("pwit", "pd")

# frozen before the sweep below was run: mean-height residual band from a
# 1000-replicate pilot at seed 777 (observed range [-2.14, -1.67], widened
# by ~6 standard errors on each side)
HEIGHT_RESIDUAL_BAND = (-2.45, -1.35)


def report(capsys, num, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {num:2d} {name}: {detail}"
    with capsys.disabled():
        print(line)
    assert ok, line


def _artifact_or_run(kind):
    """Return {"summary", "checks"} from a matching artifact dir, else run."""
    out = Path(ARTIFACT_ROOT) / kind
    manifest = out / "manifest.json"
    want = ExperimentSpec(kind=kind, master_seed=SEED, model="both").to_dict()
    if manifest.exists():
        spec = json.loads(manifest.read_text())["spec"]
        if spec == want:
            loaded = json.loads((out / "summary.json").read_text())
            return {"summary": loaded["summary"], "checks": loaded["checks"]}
    res = run_experiment(ExperimentSpec(kind=kind, master_seed=SEED,
                                        model="both"))
    return {"summary": res.summary, "checks": res.checks}


def _run(kind, **kw):
    return run_experiment(ExperimentSpec(kind=kind, master_seed=SEED,
                                         model=kw.pop("model", "both"), **kw))


@pytest.fixture(scope="module")
def walk_check():
    return _run("walk-check")


# ----------------------------------------------------------------- criteria

def test_01_exact_path_weight_counts(capsys):
    worst = None
    ok = True
    for n in range(1, 12):
        for k in range(0, 12 - n + 1):
            exact = sum(1 for _ in itertools.combinations(range(1, n + k),
                                                          n - 1))
            lc = LevelClass(n, k)
            if count_tnk_exact(lc) != exact or \
                    abs(count_tnk(lc).linear() - exact) > 1e-9 * exact:
                ok = False
                worst = (n, k)
    report(capsys, 1, "path-weight counts vs enumeration (n+k<=12)", ok,
           "all exact" if ok else f"mismatch at {worst}")


def test_02_census_mean_matches_moment_formula(capsys):
    res = _run("census-check", replicates=100000)
    zs = {(row["model"], row["n"]): row["z"] for row in res.summary["table"]}
    ok = res.all_passed and all(abs(z) <= 3 for z in zs.values())
    report(capsys, 2, "census mean vs x^n/n! (3 SE, both models)", ok,
           "; ".join(f"{m}/n={n}: z={z:+.2f}" for (m, n), z in
                     sorted(zs.items())))


def test_03_leading_probability_and_rotation_uniqueness(capsys, walk_check):
    rows = walk_check.summary["leading"]
    bad = walk_check.summary["rotation_unique"]["non_unique_leading"]
    dev = {r["n"]: (r["probability"] - r["expected"]) / max(r["se"], 1e-12)
           for r in rows}
    ok = all(abs(z) <= 3 for z in dev.values()) and bad == 0
    report(capsys, 3, "P(leading)=1/n and unique leading rotation", ok,
           "; ".join(f"n={n}: z={z:+.2f}" for n, z in sorted(dev.items()))
           + f"; non-unique={bad}/{walk_check.spec.reps}")


def test_04_step_marginals_are_gamma(capsys, walk_check):
    ps = {(m, r["k"]): r["p_value"]
          for m, rows in walk_check.summary["gamma_marginals"].items()
          for r in rows}
    ok = all(p > 1e-3 for p in ps.values())
    report(capsys, 4, "KS of X_k vs Gamma(k), k<=5, both models", ok,
           f"min p={min(ps.values()):.4f} at {min(ps, key=ps.get)}")


def test_05_engine_matches_exhaustive_search(capsys):
    def exhaustive(root_key, model, n, budget):
        def walk(key, depth, total, limit):
            if depth == n:
                return total
            best = math.inf
            stream = DisplacementStream(model, key)
            for c in stream.children_within(limit - total):
                best = min(best, walk(child_key(key, c.index), depth + 1,
                                      total + c.displacement, limit))
            return best

        while True:
            got = walk(root_key, 0, 0.0, budget)
            if math.isfinite(got):
                return got
            budget += 1.0

    mismatches = 0
    total = 0
    for model in MODELS:
        for n in (4, 6, 8, 10):
            for rep in range(100):
                sid = stream_key(9000 + n, rep)
                got = engine.min_displacement(n, model,
                                              RngStream(SEED, sid)).value
                want = exhaustive(RngStream(SEED, sid).key, model, n,
                                  analytics.m_n(n) + 1.0)
                total += 1
                mismatches += got != want
    report(capsys, 5, "best-first engine vs exhaustive DFS (exact)",
           mismatches == 0, f"{total - mismatches}/{total} exact matches")


def test_06_median_growth_law(capsys):
    data = _artifact_or_run("median-sweep")
    checks = {c["name"]: c for c in data["checks"]}
    need = ["leading-term-pwit", "leading-term-pd", "log-slope-pwit",
            "log-slope-pd", "residual-band"]
    ok = all(checks[k]["passed"] for k in need)
    slopes = data["summary"]["slope"]
    band = data["summary"]["residual_band"]
    report(capsys, 6, "median expansion: n/e leading term, log-n slope, "
           "residual band", ok,
           f"slope pwit={slopes['pwit']['slope']:.3f} "
           f"pd={slopes['pd']['slope']:.3f} (target 0.552), "
           f"band width={band['width']:.2f} (<=2)")


def test_07_tail_rates(capsys):
    fits = _artifact_or_run("tail-fit")["summary"]["fits"]
    pw, pd = fits["pwit"], fits["pd"]
    clauses = {
        "left>right (pwit)": pw["left_rate"] > pw["right_rate"],
        "right>=0.5 (pwit)": pw["right_rate"] >= 0.5,
        "pd right >= pwit right": pd["right_rate"] >= pw["right_rate"],
    }
    ok = all(clauses.values())
    failed = "; ".join(k for k, v in clauses.items() if not v)
    report(capsys, 7, "fitted tail exponents at n=25", ok,
           f"pwit L={pw['left_rate']:.2f}/R={pw['right_rate']:.2f}, "
           f"pd R={pd['right_rate']:.2f}"
           + (f"; failed: {failed}" if failed else ""))


def test_08_recursive_tree_laws(capsys):
    res = _run("rrt-sweep")
    checks = {c["name"]: c["passed"] for c in res.checks}
    resid = [row["residual"] for row in res.summary["heights"]]
    lo, hi = HEIGHT_RESIDUAL_BAND
    in_band = all(lo <= r <= hi for r in resid)
    ok = all(checks.values()) and in_band
    low = res.summary["lowest"]
    report(capsys, 8, "random recursive tree: mean displacement, tail "
           "bound, height residual band, coupling", ok,
           f"E S(w_50)={low['mean']:.3f} vs {low['expected']:.3f}, "
           f"resid in [{min(resid):.2f},{max(resid):.2f}] "
           f"(band [{lo},{hi}]), coupling p="
           f"{res.summary['coupling']['p_value']:.3f}")


def test_09_prime_certificate_trees(capsys):
    def naive_height(p):
        if p == 2:
            return 0
        return 1 + max(naive_height(q) for q in distinct_prime_factors(p - 1))

    small_ok = all(pratt_height(p) == naive_height(p)
                   for p in sieve_primes(2, 10000))
    bound_ok = True
    product_ok = True
    count = 0
    for rec in pratt_survey(10 ** 6, 10 ** 6 + 10 ** 5, work_limit=10 ** 7):
        count += 1
        if rec.height > height_bound(rec.p):
            bound_ok = False
        prod = 1
        for f in rec.factors:
            prod *= f
        if prod != rec.p - 1:
            product_ok = False
    ok = small_ok and bound_ok and product_ok
    report(capsys, 9, "certificate-tree heights: oracle, log2 bound, "
           "factor products", ok,
           f"primes<1e4 exact={small_ok}, surveyed={count}, "
           f"bound={bound_ok}, products={product_ok}")


def test_10_population_tail_inequality(capsys):
    res = _run("tight-check", replicates=100000)
    rows = {m: res.summary[m]["tail_inequality"] for m in MODELS}
    ok = all(r["lhs"] <= r["rhs"] + 3 * r["combined_se"]
             for r in rows.values())
    report(capsys, 10, "two-sided bound LHS <= RHS + 3 SE at "
           "(m,n,M,N)=(5,5,3,3)", ok,
           "; ".join(f"{m}: {r['lhs']:.4f} <= {r['rhs']:.4f}"
                     f"+{3 * r['combined_se']:.4f}"
                     for m, r in rows.items()))


def test_11_manifest_rerun_is_byte_identical(capsys, tmp_path):
    res = _run("census-check", replicates=2000)
    write_outputs(res, str(tmp_path / "a"))
    out = rerun_from_manifest(str(tmp_path / "a" / "manifest.json"),
                              str(tmp_path / "b"))
    same_bytes = (tmp_path / "a" / "records.jsonl").read_bytes() == \
        (tmp_path / "b" / "records.jsonl").read_bytes()
    ok = out["identical"] and same_bytes
    report(capsys, 11, "manifest rerun reproduces output bytes", ok,
           f"digest match={out['identical']}, jsonl bytes equal={same_bytes}")
