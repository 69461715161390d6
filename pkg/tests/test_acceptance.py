"""Acceptance criteria 1-11, each at its stated tolerance and scale."""

import math
import statistics
import time

import numpy as np
import pytest
from scipy import integrate, stats

from dessca import DesscaEngine, SwarmConfig, maximize, uniform_box
from dessca.cli import main
from dessca.doe import FIG2_BANDWIDTHS, FIG2_POINTS, count_local_maxima, density_grid
from dessca.envs.cartpole import cp_step
from dessca.envs.mountain_car import MountainCar, mc_step
from dessca.envs.pmsm import Pmsm, pmsm_step
from dessca.harness import (
    ExperimentConfig, RunSummary, coverage_metrics, relative_median_improvement, run_campaign,
    significant, summarize, write_summary_json,
)
from dessca.kde import CoverageEstimator
from dessca.policies import make_policy, mc_bangbang_policy

from oracles import cartpole, mountain_car, pmsm_exact


def test_1_kde_matches_pdf_summation(criterion):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(1, 7))
        n = int(rng.integers(1, 101))
        b = float(rng.uniform(0.05, 1.0))
        buf = rng.uniform(-1, 1, (n, d))
        q = rng.uniform(-1, 1, d)
        est = CoverageEstimator(d, b)
        est.observe(buf)
        ref = stats.multivariate_normal(mean=np.zeros(d), cov=b * b * np.eye(d)).pdf(q - buf)
        ref = float(np.mean(np.atleast_1d(ref)))
        worst = max(worst, abs(est.density(q) - ref) / ref)
    elapsed = time.perf_counter() - start
    criterion(1, worst <= 1e-10 and elapsed < 10,
              f"max relative error {worst:.2e} over 1000 cases in {elapsed:.1f} s")


def test_2_kde_integrates_to_one(criterion):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    totals = []
    for d in (1, 2):
        for b in (0.1, 0.25):
            buf = rng.uniform(-1, 1, (8, d))
            est = CoverageEstimator(d, b)
            est.observe(buf)
            lo, hi = -1 - 10 * b, 1 + 10 * b
            if d == 1:
                total, _ = integrate.quad(lambda t: est.density([t]), lo, hi,
                                          points=buf.ravel(), limit=400)
            else:
                # Gauss-Legendre tensor rule, fine enough for the kernel width
                nodes, weights = np.polynomial.legendre.leggauss(400)
                t = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
                w = 0.5 * (hi - lo) * weights
                gx, gy = np.meshgrid(t, t, indexing="ij")
                z = est.density(np.column_stack([gx.ravel(), gy.ravel()])).reshape(gx.shape)
                total = float(w @ z @ w)
            totals.append(total)
    elapsed = time.perf_counter() - start
    worst = max(abs(t - 1.0) for t in totals)
    criterion(2, worst <= 1e-3 and elapsed < 30,
              f"integrals {np.round(totals, 8).tolist()} in {elapsed:.1f} s")


def test_3_bandwidth_merges_modes(criterion):
    counts = [count_local_maxima(density_grid(FIG2_POINTS, b, 201)[2]) for b in FIG2_BANDWIDTHS]
    ok = all(a >= b for a, b in zip(counts, counts[1:])) and counts[0] >= 5 and counts[-1] <= 2
    criterion(3, ok, f"strict local maxima {counts} for b = {list(FIG2_BANDWIDTHS)}")


def _bimodal(x):
    return (np.exp(-((x + 0.5) ** 2).sum(1) / (2 * 0.2**2))
            + 0.8 * np.exp(-((x - 0.5) ** 2).sum(1) / (2 * 0.2**2)))


def test_4_pso_recovers_maximizers(criterion):
    start = time.perf_counter()
    centres = [np.zeros(2), np.array([0.3, -0.2]), np.array([0.6, -0.4, 0.1])]
    unimodal = []
    for c in centres:
        hits = 0
        for seed in range(100):
            x, _ = maximize(lambda x: -((x - c) ** 2).sum(1), len(c), SwarmConfig(seed=seed))
            hits += int(np.max(np.abs(x - c)) <= 0.05)
        unimodal.append(hits)
    # global peak at (-0.5, -0.5), local one (0.8 high) at (0.5, 0.5)
    basin = 0
    for seed in range(100):
        x, _ = maximize(_bimodal, 2, SwarmConfig(seed=seed))
        basin += int(np.linalg.norm(x + 0.5) < np.linalg.norm(x - 0.5))
    elapsed = time.perf_counter() - start
    ok = min(unimodal) >= 95 and basin >= 90 and elapsed < 60
    criterion(4, ok, f"unimodal {unimodal}/100, bimodal global basin {basin}/100, {elapsed:.1f} s")


def _grid_metric(engine, n=201):
    g = np.linspace(-1, 1, n)
    pts = np.column_stack([a.ravel() for a in np.meshgrid(g, g)])
    buf = engine.estimator.buffer
    b = engine.estimator.bandwidth
    sq = ((pts[:, None, :] - buf[None]) ** 2).sum(-1)
    c_hat = np.exp(-0.5 * sq / b**2).sum(1) / (len(buf) * 2 * np.pi * b * b)
    return 0.25 - c_hat


def test_5_engine_agrees_with_grid(criterion):
    start = time.perf_counter()
    good = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(1, 60))
        engine = DesscaEngine(uniform_box(2), swarm=SwarmConfig(seed=seed))
        # clustered histories leave large uncovered regions
        centre = rng.uniform(-1, 1, 2)
        engine.record_episode(np.clip(centre + rng.normal(0, 0.3, (n, 2)), -1, 1))
        ec = _grid_metric(engine)
        x = engine.propose()
        good += int(engine.exploration_metric(x) >= ec.max() - 0.05 * (ec.max() - ec.min()))
    elapsed = time.perf_counter() - start
    criterion(5, good >= 95 and elapsed < 120, f"{good}/100 seeds within 5% of grid range, "
                                               f"{elapsed:.1f} s")


def test_6_sequential_uniformization(criterion):
    start = time.perf_counter()
    cdf = stats.uniform(loc=-1, scale=2).cdf
    iid = np.random.default_rng(600).uniform(-1, 1, (4000, 100))
    iid_median = float(np.median([stats.kstest(row, cdf).statistic for row in iid]))
    wins = 0
    for seed in range(20):
        engine = DesscaEngine(uniform_box(2), swarm=SwarmConfig(seed=seed))
        pts = []
        for _ in range(100):
            x = engine.propose()
            engine.record_episode(x[None])
            pts.append(x)
        pts = np.array(pts)
        ks = [stats.kstest(pts[:, i], cdf).statistic for i in range(2)]
        wins += int(max(ks) < iid_median)
    elapsed = time.perf_counter() - start
    criterion(6, wins >= 16 and elapsed < 300,
              f"{wins}/20 sequences beat the i.i.d. median KS {iid_median:.4f} in both "
              f"dimensions, {elapsed:.1f} s")


def test_7_environment_oracles(criterion):
    rng = np.random.default_rng(7)
    mc_exact = cp_max = 0.0
    mc_ok = True
    for _ in range(1000):
        p, v = rng.uniform([-1.2, -0.07], [0.6, 0.07])
        u = float(rng.uniform(-1, 1))
        tr = mc_step([p, v], u)
        (p1, v1), r, done = mountain_car(p, v, u)
        mc_ok &= tr.next_state.tolist() == [p1, v1] and tr.reward == r and tr.terminated == done
    for _ in range(1000):
        x = rng.uniform([-1, -7, -math.pi, -10], [1, 7, math.pi, 10])
        u = int(rng.choice([-1, 1]))
        tr = cp_step(x, u)
        nxt, r, done = cartpole(*x, u)
        diff = np.abs(tr.next_state - np.array(nxt))
        diff[2] = min(diff[2], 2 * math.pi - diff[2])  # wrap may land on the other side of +-pi
        cp_max = max(cp_max, float(diff.max()), abs(tr.reward - r))
        mc_ok &= tr.terminated == done
    pmsm_err = 0.0
    for omega in (0.0, 300.0, 1256.64):
        u = (0.3, -0.4)
        x = np.array([-40.0, 60.0, omega, 0.5, 0.0, 0.0])
        traj, exact = [], []
        for k in range(100):
            x = pmsm_step(x, u).next_state
            traj.append(x[:2])
            exact.append(pmsm_exact((-40.0, 60.0), omega, u, (k + 1) * 100e-6))
        traj, exact = np.array(traj), np.array(exact)
        pmsm_err = max(pmsm_err, np.linalg.norm(traj - exact, axis=1).max()
                       / np.linalg.norm(exact, axis=1).max())
    ok = mc_ok and cp_max <= 1e-12 and pmsm_err <= 1e-6
    criterion(7, ok, f"mountain car bitwise={mc_ok}, cartpole max diff {cp_max:.1e}, "
                     f"PMSM RK4 vs expm {pmsm_err:.1e} (relative to trajectory scale)")


def test_8_bangbang_escapes_valley(criterion):
    env = MountainCar()
    policy = mc_bangbang_policy()
    env.reset_to([-0.5, 0.0])
    steps = None
    for k in range(200):
        state = env.state.copy()
        if state[0] > 0.45:
            steps = k
            break
        env.step(policy.act(state))
    else:
        if env.state[0] > 0.45:
            steps = 200
    criterion(8, steps is not None, f"goal reached after {steps} steps")


def test_9_coverage_ab(criterion):
    start = time.perf_counter()
    wins = 0
    for seed in range(20):
        ks = {}
        for strategy in ("es", "dessca"):
            cfg = ExperimentConfig.for_env("mountain_car", strategy=strategy, total_steps=6000,
                                           episode_steps=200, validation_episodes=1,
                                           validation_steps=1, seed=seed)
            record = run_campaign(cfg, make_policy("random", cfg.make_env(), seed))
            ks[strategy] = coverage_metrics(record.visited(), uniform_box(2)).ks
        wins += bool(np.all(ks["dessca"] < ks["es"]))
    elapsed = time.perf_counter() - start
    criterion(9, wins >= 14 and elapsed < 600,
              f"DESSCA lower KS in both dimensions for {wins}/20 seeds, {elapsed:.0f} s")


def _textbook(x):
    s = sorted(x)
    n = len(s)

    def quantile(p):
        h = (n - 1) * p
        lo = math.floor(h)
        return s[lo] + (h - lo) * (s[min(lo + 1, n - 1)] - s[lo])

    m = statistics.fmean(s)
    half = 1.96 * statistics.stdev(s) / math.sqrt(n)
    return quantile(0.5), quantile(0.75) - quantile(0.25), m, m - half, m + half


def test_10_statistics_pipeline(criterion, tmp_path, capsys):
    es = RunSummary(median=0.79565, iqr=0.0, mean=0.79766, ci_low=0.78234, ci_high=0.81299, n=50)
    ds = RunSummary(median=0.88273, iqr=0.0, mean=0.87456, ci_low=0.86587, ci_high=0.88325, n=50)
    verdict = significant(es, ds)
    write_summary_json(es, tmp_path / "es.json")
    write_summary_json(ds, tmp_path / "ds.json")
    main(["summarize", str(tmp_path / "es.json"), str(tmp_path / "ds.json")])
    cli_yes = capsys.readouterr().out.rstrip().splitlines()[-1].split()[-1] == "yes"
    improvement = relative_median_improvement(es, ds)
    rng = np.random.default_rng(10)
    worst = 0.0
    for n in (2, 3, 5, 8, 13, 50):
        x = rng.normal(0.6, 0.2, n)
        s = summarize(x)
        got = (s.median, s.iqr, s.mean, s.ci_low, s.ci_high)
        worst = max(worst, max(abs(a - b) for a, b in zip(got, _textbook(x.tolist()))))
    ok = verdict and cli_yes and worst <= 1e-12 and improvement == pytest.approx(10.944, abs=1e-3)
    criterion(10, ok, f"significant={verdict}, improvement {improvement:.4f} %, "
                      f"max deviation from textbook {worst:.1e}")


def test_11_cli_determinism(criterion, tmp_path, capsys):
    invocations = [
        ["run", "--env", "pmsm", "--strategy", "both", "--seed", "7", "--repetitions", "2",
         "--set", "total_steps=300", "--set", "validation_steps=600"],
        ["run", "--env", "cartpole", "--strategy", "dessca", "--seed", "3", "--repetitions", "2",
         "--set", "total_steps=400", "--set", "validation_episodes=2"],
        ["sample", "--dim", "3", "--n", "25", "--seed", "5", "--reference", "ball:0.9"],
        ["density", "--bandwidth", "0.25", "--resolution", "51"],
    ]
    mismatched = []
    for i, args in enumerate(invocations):
        outputs = []
        for attempt in ("a", "b"):
            out = tmp_path / f"{i}{attempt}"
            flag = ["--out", str(out if args[0] == "run" else out.with_suffix(".csv"))]
            assert main([*args, *flag]) == 0
            if args[0] == "run":
                outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            else:
                outputs.append({"out": out.with_suffix(".csv").read_bytes()})
        if outputs[0] != outputs[1]:
            mismatched.append(args[0])
    summaries = sorted((tmp_path / "0a").glob("*_summary.json"))
    capsys.readouterr()
    printed = []
    for _ in range(2):
        main(["summarize", *map(str, summaries)])
        printed.append(capsys.readouterr().out)
    if printed[0] != printed[1]:
        mismatched.append("summarize")
    criterion(11, not mismatched, f"{len(invocations) + 1} invocations repeated, "
                                  f"differences in {mismatched or 'none'}")
