"""Acceptance criteria, one test each. Every test prints a PASS/FAIL line."""
import gc
import math
import time

import numpy as np
import pytest
from scipy import stats

import oracles
from orliczsketch.harness.experiments import ExperimentConfig, run_experiment
from orliczsketch.harness.simulate import NoiseSpec
from orliczsketch.lowrank import rank_constrained_ls
from orliczsketch.matrix import MatrixHandle
from orliczsketch.orlicz import make_orlicz, orlicz_norm, orlicz_norm_and_gradient
from orliczsketch.randgen import SeedSpec, sample_generalized_exponential, sample_p_stable
from orliczsketch.regression import l1_regress, orlicz_regress
from orliczsketch.sketch import apply_sketch, build_orlicz_sketch

FIVE = [("power", 1.5), ("huber", 0.75), ("l1l2", None), ("fair", 1.0), ("l15", 0.25)]
HUBER = make_orlicz("huber", 0.75)


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number:2d}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return emit


def test_c01_norm_matches_lp(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(0)
    worst = 0.0
    for p in (1.0, 1.5, 2.0):
        g = make_orlicz("power", p)
        for _ in range(1000):
            x = rng.standard_normal(rng.integers(1, 100)) * 10 ** rng.uniform(-3, 3)
            direct = (np.abs(x) ** p).sum() ** (1 / p)
            worst = max(worst, abs(orlicz_norm(g, x) - direct) / direct)
    dt = time.perf_counter() - t0
    report(1, worst <= 1e-10 and dt < 5, f"max rel err {worst:.2e}, {dt:.1f}s")


def test_c02_defining_equation_and_axioms(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    resid, homog, tri = 0.0, 0.0, -math.inf
    for kind, param in FIVE:
        g = make_orlicz(kind, param)
        for _ in range(200):
            n = rng.integers(1, 80)
            x = rng.standard_cauchy(n)
            y = rng.standard_normal(n) * 10 ** rng.uniform(-2, 2)
            c = rng.uniform(-50, 50)
            a = orlicz_norm(g, x)
            resid = max(resid, abs(g.eval(np.abs(x) / a).sum() - 1.0))
            homog = max(homog, abs(orlicz_norm(g, c * x) - abs(c) * a) / (abs(c) * a))
            tri = max(tri, (orlicz_norm(g, x + y) - a - orlicz_norm(g, y)) / (a + orlicz_norm(g, y)))
    dt = time.perf_counter() - t0
    ok = resid <= 1e-9 and homog <= 1e-9 and tri <= 1e-12 and dt < 30
    report(2, ok, f"residual {resid:.1e}, homogeneity {homog:.1e}, "
                  f"triangle excess {tri:.1e}, {dt:.1f}s")


def test_c03_sampler_fidelity(report):
    t0 = time.perf_counter()
    ks = {}
    for i, (kind, param) in enumerate(FIVE):
        g = make_orlicz(kind, param)
        u = sample_generalized_exponential(g, SeedSpec(3, i), 100_000)
        ks[kind] = stats.kstest(u, lambda t: 1 - np.exp(-g.eval(t))).statistic
    c = sample_p_stable(1.0, SeedSpec(3, 99), 100_000)
    q1, q3 = np.quantile(c, [0.25, 0.75])
    dt = time.perf_counter() - t0
    ok = max(ks.values()) < 0.01 and abs(q1 + 1) <= 0.02 and abs(q3 - 1) <= 0.02 and dt < 30
    report(3, ok, f"max KS {max(ks.values()):.4f}, Cauchy quartiles {q1:.3f}/{q3:.3f}, {dt:.1f}s")


def test_c04_per_vector_contraction(report):
    t0 = time.perf_counter()
    n, trials = 1000, 10_000
    x = np.random.default_rng(4).standard_normal(n)
    norm = orlicz_norm(HUBER, x)
    floor = HUBER.inverse(1e-300)
    tops = np.empty(trials)
    for t in range(trials):
        u = np.maximum(sample_generalized_exponential(HUBER, SeedSpec(4, t).generator(), n), floor)
        tops[t] = np.max(np.abs(x) / u)
    freq = {a: float(np.mean(tops < norm / a)) for a in (1, 2, 3)}
    dt = time.perf_counter() - t0
    ok = all(f <= math.exp(-a) + 0.02 for a, f in freq.items()) and dt < 120
    report(4, ok, "failure freq " + ", ".join(f"a={a}: {f:.4f} (bound {math.exp(-a) + 0.02:.4f})"
                                             for a, f in freq.items()) + f", {dt:.1f}s")


def test_c05_exact_recovery(report):
    t0 = time.perf_counter()
    fams = [("power", 1.0), ("power", 2.0)] + FIVE
    worst, hits, total = 0.0, 0, 0
    for fi, (kind, param) in enumerate(fams):
        g = make_orlicz(kind, param)
        for s in range(100):
            rng = SeedSpec(5, fi).generator(s)
            A = rng.standard_normal((200, 10))
            x_star = rng.standard_normal(10)
            x = orlicz_regress(g, A, A @ x_star, seed=SeedSpec(5, 1000 * fi + s)).solution
            err = np.linalg.norm(x - x_star) / np.linalg.norm(x_star)
            worst = max(worst, err)
            hits += err <= 1e-8
            total += 1
    dt = time.perf_counter() - t0
    report(5, hits == total and dt < 60, f"{hits}/{total} recovered, worst rel err {worst:.1e}, "
                                         f"{dt:.1f}s")


def test_c06_approximation_ratio(report):
    t0 = time.perf_counter()
    cfg = ExperimentConfig("ratio", n=200, d=10, family="huber", param=0.75, trials=50, seed=6)
    doc = run_experiment(cfg)
    raw = np.array([r["raw_ratio"] for r in doc["rows"] if r["method"] != "failed"])
    dt = time.perf_counter() - t0
    ok = (raw.size == 50 and raw.min() >= 1 - 1e-6 and raw.max() <= 3
          and np.median(raw) <= 1.5 and dt < 600)
    report(6, ok, f"{raw.size} runs, ratio min {raw.min():.6f}, median {np.median(raw):.4f}, "
                  f"max {raw.max():.4f}, {dt:.1f}s")


def _means(experiment, **kw):
    doc = run_experiment(ExperimentConfig(experiment, trials=50, **kw))
    assert doc["summary"]["failed"] == 0
    return doc["summary"]["mean_error"]


def test_c07_control_regression_ordering(report):
    t0 = time.perf_counter()
    sp = _means("control", n=200, d=10, noise=NoiseSpec.sparse(0.03, 1), seed=7)
    lo, hi = sorted((sp["l1"], sp["l2"]))
    sparse_ok = sp["l1"] < 1e-3 and lo * 0.9 <= sp["orlicz"] <= hi * 1.1
    # the Gaussian ordering is the balance row (n=100, d=75) cited with it;
    # the overconstraint row is reported alongside
    ga = _means("control", n=100, d=75, noise=NoiseSpec.gaussian(50), seed=7)
    gauss_ok = ga["l2"] <= ga["orlicz"] * 1.1 and ga["orlicz"] <= ga["l1"] * 1.1
    go = _means("control", n=200, d=10, noise=NoiseSpec.gaussian(50), seed=7)
    dt = time.perf_counter() - t0
    fmt = "l1 {l1:.3g} / l2 {l2:.3g} / orlicz {orlicz:.3g}"
    report(7, sparse_ok and gauss_ok and dt < 300,
           f"sparse overconstraint {fmt.format(**sp)} ({'ok' if sparse_ok else 'out of order'}); "
           f"gaussian balance {fmt.format(**ga)} ({'ok' if gauss_ok else 'out of order'}); "
           f"gaussian overconstraint {fmt.format(**go)}; {dt:.1f}s")


def test_c08_best_delta_shrinks_with_outliers(report):
    t0 = time.perf_counter()
    doc = run_experiment(ExperimentConfig("delta_sweep", n=500, d=30, trials=50, seed=8,
                                          scales=(0.0, 0.5, 1.0, 2.0)))
    best = doc["summary"]["best_delta"]
    dt = time.perf_counter() - t0
    report(8, best["2.0"] < best["0.0"] and dt < 900,
           f"best delta by scale {best}; need best(s=2) < best(s=0); {dt:.1f}s")


def test_c09_l15_variant_beats_l2_and_huber(report):
    t0 = time.perf_counter()
    m = _means("g15", n=500, d=30, seed=9)
    dt = time.perf_counter() - t0
    ok = m["g_l1.5"] < min(m["l2"], m["huber_0.75"]) and dt < 600
    report(9, ok, ", ".join(f"{k} {v:.4g}" for k, v in m.items()) + f"; {dt:.1f}s")


def test_c10_l1_solver_vs_enumeration(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(50):
        M = rng.standard_normal((8, 2))
        y = rng.standard_normal(8) * 10 ** rng.uniform(-2, 2)
        _, best = oracles.l1_by_enumeration(M, y)
        got = np.abs(M @ l1_regress(M, y) - y).sum()
        worst = max(worst, (got - best) / best)
    dt = time.perf_counter() - t0
    report(10, worst <= 1e-6 and dt < 10, f"max rel excess {worst:.1e}, {dt:.1f}s")


def test_c11_rank_constrained_ls(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        C = rng.standard_normal((6, 4))
        Dm = rng.standard_normal((3, 5))
        M = rng.standard_normal((6, 5))
        X, Y = rank_constrained_ls(C, Dm, M, 2)
        ours = np.linalg.norm(C @ X @ Y @ Dm - M)
        als = oracles.als_rank_constrained(C, Dm, M, 2, restarts=500, rng=rng)
        worst = max(worst, abs(ours - als) / als)
    exact = 0.0
    for _ in range(20):
        C = rng.standard_normal((7, 4))
        Dm = rng.standard_normal((3, 6))
        M = C @ rng.standard_normal((4, 2)) @ rng.standard_normal((2, 3)) @ Dm
        X, Y = rank_constrained_ls(C, Dm, M, 2)
        exact = max(exact, np.linalg.norm(C @ X @ Y @ Dm - M) / np.linalg.norm(M))
    dt = time.perf_counter() - t0
    report(11, worst <= 1e-6 and exact <= 1e-9 and dt < 60,
           f"max rel gap to ALS {worst:.1e}, representable residual {exact:.1e}, {dt:.1f}s")


def test_c12_lowrank_trend(report):
    t0 = time.perf_counter()
    cfg = dict(n=400, d=400, k=5, outliers=100, outlier_scale=100, trials=20, restarts=50, seed=12)
    results = {}
    for variant in ("theoretical", "experimental"):
        doc = run_experiment(ExperimentConfig("lowrank", variant=variant, **cfg))
        by = {}
        for r in doc["rows"]:
            by.setdefault(r["trial"], {})[r["method"]] = r["loss_1"]
        beats = sum(v["ours"] < v["pca"] for v in by.values())
        near = sum(v["ours"] < 3 * v["planted"] for v in by.values())
        ratio = float(np.median([v["ours"] / v["planted"] for v in by.values()]))
        results[variant] = (beats, near, ratio)
    dt = time.perf_counter() - t0
    beats, near, _ = results["theoretical"]
    detail = "; ".join(f"{v}: beats PCA {b}/20, < 3x planted {n}/20, median ours/planted {r:.2f}"
                       for v, (b, n, r) in results.items())
    report(12, beats >= 16 and near >= 10 and dt < 1200, f"{detail}; {dt:.1f}s")


def test_c13_sketch_nnz_scaling(report):
    rng = np.random.default_rng(13)
    d = 10
    cases = {}
    for nnz in (100_000, 200_000):
        n = nnz // 2
        rows = np.repeat(np.arange(n), 2)
        cols = np.stack([rng.choice(d, 2, replace=False) for _ in range(n)]).ravel()
        A = MatrixHandle.from_coo(rows, cols, rng.standard_normal(nnz), (n, d))
        S = build_orlicz_sketch(HUBER, n, d, rng=SeedSpec(13))
        apply_sketch(S, A)
        cases[nnz] = (S, A)
    runs = {nnz: [] for nnz in cases}
    # each run is 10 back-to-back applications, sub-ms single calls are timer
    # noise; the two sizes alternate so a transient slowdown hits both
    gc.disable()
    try:
        for _ in range(5):
            for nnz, (S, A) in cases.items():
                t0 = time.perf_counter()
                for _ in range(10):
                    apply_sketch(S, A)
                runs[nnz].append((time.perf_counter() - t0) / 10)
    finally:
        gc.enable()
    times = {nnz: float(np.median(r)) for nnz, r in runs.items()}
    growth = times[200_000] / times[100_000]
    report(13, growth <= 2.5, f"median {times[100_000] * 1e3:.2f} ms -> "
                              f"{times[200_000] * 1e3:.2f} ms, growth {growth:.2f}x")


def test_c14_gradient_check(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(14)
    worst = 0.0
    for kind, param in [("power", 1.0), ("power", 2.0)] + FIVE:
        g = make_orlicz(kind, param)
        for _ in range(100):
            r = rng.standard_normal(8)
            step = 1e-6 * np.abs(r).max()
            fd = oracles.central_difference_grad(lambda v: orlicz_norm(g, v), r, step)
            _, grad = orlicz_norm_and_gradient(g, r)
            worst = max(worst, np.linalg.norm(grad - fd) / np.linalg.norm(fd))
    dt = time.perf_counter() - t0
    report(14, worst < 1e-5 and dt < 10, f"max rel err {worst:.1e}, {dt:.1f}s")
