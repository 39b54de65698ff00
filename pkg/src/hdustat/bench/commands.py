"""Command implementations: one function per CLI subcommand, each returning a report dict.

Random streams for a master seed S:

* replication r draws its data from ``RngSpec(S, r)`` (sub-stream 0 for the
  first sample, 1 for the second);
* bridge simulations for replication r use ``RngSpec(S, BRIDGE_OFFSET + r)``;
* the self-normalised limit quantile uses ``RngSpec(S, LIMIT_STREAM)``.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np
from scipy import stats

from ..cpdetect import cusum_process, cusum_statistic, detect_change
from ..errors import ConfigError, UnsupportedPairError
from ..gaussmc import (
    RngSpec,
    bridge_grid_size,
    brownian_bridge_sups,
    psd_sqrt,
    sn_limit_sample,
    upper_quantile,
)
from ..kernels import (
    KernelFamily,
    KernelSpec,
    closed_form_theta,
    gmd_gaussian_sigma,
)
from ..sntest import RelevantTestConfig, run_relevant_test, sn_critical_value
from ..useq import pair_sums
from .config import RunConfig
from .io import ingest_csv
from .report import make_report
from .simulate import Design, simulate_dataset

log = logging.getLogger(__name__)

BRIDGE_OFFSET = 1 << 32
LIMIT_STREAM = 1 << 48
LOW_REPLICATION = 100


def kernel_of(cfg: RunConfig) -> KernelSpec:
    return KernelSpec.parse(cfg.kernel, cfg.huber_xi)


def dimension_guard(d: int, n: int) -> list[str]:
    """Heuristic polynomial-growth check; d above n^(1/3) only warns."""
    if d > n ** (1.0 / 3.0):
        msg = f"kernel dimension d={d} exceeds n^(1/3)={n ** (1 / 3):.2f} for n={n}; Gaussian approximations may be poor"
        log.warning(msg)
        return [msg]
    return []


def run_replications(fn, count: int, threads: int = 1) -> list:
    """Evaluate ``fn(r)`` for r = 0..count-1 and return results in replication order."""
    if threads <= 1 or count <= 1:
        return [fn(r) for r in range(count)]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count), chunksize=max(1, count // (4 * threads))))


def _seeds(cfg, **extra):
    return {"master_seed": cfg.seed, **extra}


def _design(cfg: RunConfig, with_break: bool) -> Design:
    return Design(
        cfg.dist, cfg.n, cfg.p, cfg.loc, cfg.scale,
        tau_star=cfg.tau_star if with_break else None,
        shift=cfg.shift if with_break else (0.0,),
        scale_shift=cfg.scale_shift if with_break else (0.0,),
    )


def _design_y(cfg: RunConfig) -> Design:
    return Design(
        cfg.dist, cfg.n_y or cfg.n, cfg.p,
        cfg.loc if cfg.loc_y is None else cfg.loc_y,
        cfg.scale if cfg.scale_y is None else cfg.scale_y,
    )


# -- single-data commands -------------------------------------------------------


def cmd_relevant_test(cfg: RunConfig, threads: int = 1) -> dict:
    started = time.perf_counter()
    cfg.require("data_x", "data_y", "delta")
    spec = kernel_of(cfg)
    x, y = ingest_csv(cfg.data_x), ingest_csv(cfg.data_y)
    limit_rng = RngSpec(cfg.seed, LIMIT_STREAM)
    test_cfg = RelevantTestConfig(
        delta=cfg.delta, alpha=cfg.alpha, lambda_grid_size=cfg.lambda_grid,
        w_paths=cfg.w_paths, w_grid_size=cfg.w_grid, rng=limit_rng,
    )
    rep = run_relevant_test(x, y, spec, test_cfg, threads=threads)
    d = spec.dimension(x.p)
    warnings = dimension_guard(d, min(x.n, y.n))
    if rep.degenerate:
        warnings.append("self-normalizer is zero; statistic reported as signed infinity")
    results = {
        "S": rep.S, "D1": rep.D1, "V": rep.V, "q": rep.q, "reject": rep.reject, "N": rep.N,
        "degenerate": rep.degenerate, "n1": x.n, "n2": y.n, "d": d,
    }
    return make_report(
        "relevant-test", cfg, results, {"warnings": warnings},
        _seeds(cfg, limit_stream=LIMIT_STREAM), time.perf_counter() - started,
    )


def cmd_changepoint(cfg: RunConfig, threads: int = 1) -> dict:
    started = time.perf_counter()
    cfg.require("data")
    spec = kernel_of(cfg)
    sample = ingest_csv(cfg.data)
    res = detect_change(sample, spec, cfg.alpha, cfg.n_paths, RngSpec(cfg.seed, BRIDGE_OFFSET), threads=threads)
    d = spec.dimension(sample.p)
    warnings = dimension_guard(d, sample.n)
    if res.lambda_min <= 1e-12 * max(1.0, abs(res.lambda_min)):
        warnings.append(f"estimated covariance is (near) singular: lambda_min={res.lambda_min:.3g}")
    results = {
        "T_n": res.T_n, "k_hat": res.k_hat, "tau_hat": res.tau_hat, "q": res.q, "reject": res.reject,
        "bridge_paths_used": res.bridge_paths_used, "bridge_grid": bridge_grid_size(sample.n),
        "n": sample.n, "d": d, "cusum_norms": res.path.norms(),
    }
    diagnostics = {"warnings": warnings, "lambda_min": res.lambda_min, "clipped_mass": res.clipped_mass}
    return make_report(
        "changepoint", cfg, results, diagnostics,
        _seeds(cfg, bridge_stream=BRIDGE_OFFSET), time.perf_counter() - started,
    )


# -- replication studies --------------------------------------------------------


def _changepoint_rep(r, design, spec, alpha, n_paths, seed):
    sample = simulate_dataset(design, RngSpec(seed, r))
    res = detect_change(sample, spec, alpha, n_paths, RngSpec(seed, BRIDGE_OFFSET + r))
    return {"T_n": res.T_n, "q": res.q, "reject": res.reject, "tau_hat": res.tau_hat, "lambda_min": res.lambda_min}


def _relevant_rep(r, design_x, design_y, spec, test_cfg, q, seed):
    rng = RngSpec(seed, r)
    x = simulate_dataset(design_x, rng.generator(0))
    y = simulate_dataset(design_y, rng.generator(1))
    rep = run_relevant_test(x, y, spec, test_cfg, critical_value=q)
    return {"S": rep.S, "reject": rep.reject, "D1": rep.D1, "degenerate": rep.degenerate}


def _theta_distance(spec, design_x, design_y):
    try:
        t1 = closed_form_theta(spec, design_x.marginals())
        t2 = closed_form_theta(spec, design_y.marginals())
    except UnsupportedPairError as err:
        raise ConfigError(f"relevant-test studies need an analytic theta: {err}") from None
    diff = t1 - t2
    return float(diff @ diff)


def _rate_summary(rejects, alpha):
    R = len(rejects)
    k = int(sum(bool(v) for v in rejects))
    rate = k / R
    return {
        "replications": R,
        "rejections": k,
        "rejection_rate": rate,
        "binomial_se": math.sqrt(alpha * (1 - alpha) / R),
        "empirical_se": math.sqrt(rate * (1 - rate) / R),
        "low_replication": R < LOW_REPLICATION,
    }


def _study(command, cfg: RunConfig, threads: int, alternative: bool) -> dict:
    started = time.perf_counter()
    spec = kernel_of(cfg)
    warnings = []
    if cfg.replications < LOW_REPLICATION:
        warnings.append(f"only {cfg.replications} replications; rates are rough")
    seeds = _seeds(cfg, data_streams=f"0..{cfg.replications - 1}")

    if cfg.test == "changepoint":
        design = _design(cfg, with_break=alternative)
        d = spec.dimension(design.p)
        warnings += dimension_guard(d, design.n)
        fn = partial(_changepoint_rep, design=design, spec=spec, alpha=cfg.alpha, n_paths=cfg.n_paths, seed=cfg.seed)
        reps = run_replications(fn, cfg.replications, threads)
        results = {"test": "changepoint", **_rate_summary([r["reject"] for r in reps], cfg.alpha)}
        results["mean_T_n"] = float(np.mean([r["T_n"] for r in reps]))
        results["mean_critical_value"] = float(np.mean([r["q"] for r in reps]))
        if alternative:
            tau_hat = np.array([r["tau_hat"] for r in reps])
            results["tau_star"] = cfg.tau_star
            results["median_tau_hat"] = float(np.median(tau_hat))
            results["median_abs_tau_error"] = float(np.median(np.abs(tau_hat - cfg.tau_star)))
            if not design.has_break:
                warnings.append("zero shift: the alternative coincides with the null")
        results["per_replication"] = reps
        seeds["bridge_stream_offset"] = BRIDGE_OFFSET
    else:
        design_x, design_y = _design(cfg, with_break=False), _design_y(cfg)
        d = spec.dimension(design_x.p)
        warnings += dimension_guard(d, min(design_x.n, design_y.n))
        distance = _theta_distance(spec, design_x, design_y)
        if alternative:
            delta = cfg.delta if cfg.is_set("delta") else distance / cfg.delta_ratio
        else:
            delta = distance
        if distance == 0:
            warnings.append("theta_1 == theta_2: the self-normalised limit is not pivotal for this design")
        limit_rng = RngSpec(cfg.seed, LIMIT_STREAM)
        test_cfg = RelevantTestConfig(
            delta=delta, alpha=cfg.alpha, lambda_grid_size=cfg.lambda_grid,
            w_paths=cfg.w_paths, w_grid_size=cfg.w_grid, rng=limit_rng,
        )
        q = sn_critical_value(cfg.alpha, cfg.w_paths, cfg.w_grid, limit_rng, threads)
        fn = partial(_relevant_rep, design_x=design_x, design_y=design_y, spec=spec, test_cfg=test_cfg, q=q, seed=cfg.seed)
        reps = run_replications(fn, cfg.replications, threads)
        results = {"test": "relevant", **_rate_summary([r["reject"] for r in reps], cfg.alpha)}
        results.update({"theta_distance": distance, "delta": delta, "critical_value": q})
        results["per_replication"] = reps
        seeds["limit_stream"] = LIMIT_STREAM
    return make_report(command, cfg, results, {"warnings": warnings}, seeds, time.perf_counter() - started)


def cmd_size_study(cfg: RunConfig, threads: int = 1) -> dict:
    """Rejection rate over seeded replications under the null design."""
    return _study("size-study", cfg, threads, alternative=False)


def cmd_power_study(cfg: RunConfig, threads: int = 1) -> dict:
    """Rejection rate (and break location accuracy) under the configured alternative."""
    return _study("power-study", cfg, threads, alternative=True)


# -- validation harnesses -------------------------------------------------------


def _cusum_rep(r, design, spec, seed):
    sample = simulate_dataset(design, RngSpec(seed, r))
    return cusum_statistic(cusum_process(sample, spec))[0]


def cmd_coupling_check(cfg: RunConfig, threads: int = 1) -> dict:
    """Compare the null law of T_n with the bridge sup under the true projection covariance."""
    started = time.perf_counter()
    spec = kernel_of(cfg)
    if spec.family is not KernelFamily.GINI_MEAN_DIFFERENCE or cfg.dist != "normal":
        raise ConfigError("coupling-check needs an analytic covariance: use kernel = gmd with dist = normal")
    design = _design(cfg, with_break=False)
    sigma = gmd_gaussian_sigma(design.scale)
    root, _ = psd_sqrt(sigma)
    fn = partial(_cusum_rep, design=design, spec=spec, seed=cfg.seed)
    t_n = np.array(run_replications(fn, cfg.replications, threads))
    grid = cfg.bridge_grid or bridge_grid_size(design.n)
    sups = brownian_bridge_sups(root, grid, cfg.n_paths, RngSpec(cfg.seed, BRIDGE_OFFSET), threads=threads).sup_norms
    ks = float(stats.ks_2samp(t_n, sups).statistic)
    probs = [0.5, 0.9, 0.95, 0.99]
    results = {
        "ks_distance": ks,
        "statistic_draws": len(t_n),
        "bridge_draws": len(sups),
        "bridge_grid": grid,
        "true_sigma_diag": np.diag(sigma),
        "quantile_levels": probs,
        "statistic_quantiles": np.quantile(t_n, probs),
        "bridge_quantiles": np.quantile(sups, probs),
    }
    warnings = dimension_guard(design.p, design.n)
    if cfg.replications < LOW_REPLICATION:
        warnings.append(f"only {cfg.replications} replications")
    seeds = _seeds(cfg, data_streams=f"0..{cfg.replications - 1}", bridge_stream=BRIDGE_OFFSET)
    return make_report("coupling-check", cfg, results, {"warnings": warnings}, seeds, time.perf_counter() - started)


def lemma1_statistic(x, mu) -> float:
    """max_{2<=k<=n} ||M_k|| / (k - 1) for the degenerate product kernel (x - mu) o (y - mu)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[0] == 1:
        x = x.T
    centred = x - np.asarray(mu, dtype=float)
    sums = pair_sums(centred, KernelSpec("product"))
    m = sums.prefix[2:].astype(float)
    k = np.arange(2, sums.n + 1)
    return float(np.max(np.sqrt(np.einsum("ij,ij->i", m, m)) / (k - 1)))


def _lemma1_rep(r, ns, design, seed):
    rng = RngSpec(seed, r)
    out = []
    for n in ns:
        sample = simulate_dataset(Design(design.dist, n, design.p, design.loc, design.scale), rng.generator(n))
        out.append(lemma1_statistic(sample.data, design.loc))
    return out


def cmd_lemma1_check(cfg: RunConfig, threads: int = 1) -> dict:
    """Growth in n of the maximal degenerate partial sum for the product kernel."""
    started = time.perf_counter()
    ns = tuple(sorted(cfg.ns))
    design = Design(cfg.dist, max(ns), cfg.p, cfg.loc, cfg.scale)
    fn = partial(_lemma1_rep, ns=ns, design=design, seed=cfg.seed)
    draws = np.array(run_replications(fn, cfg.replications, threads))
    means = draws.mean(axis=0)
    warnings = []
    if np.all(means > 0):
        exponent = float(np.polyfit(np.log(ns), np.log(means), 1)[0])
    else:
        exponent = 0.0
        warnings.append("mean statistic is zero at some n; exponent reported as 0")
    d = cfg.p
    results = {
        "ns": list(ns),
        "d": d,
        "mean_statistic": means,
        "se_statistic": draws.std(axis=0, ddof=1) / math.sqrt(len(draws)) if len(draws) > 1 else [0.0] * len(ns),
        "fitted_exponent": exponent,
        "mean_over_sqrt_d": means / math.sqrt(d),
        "mean_over_d": means / d,
        "mean_over_log_n": means / np.log(ns),
    }
    seeds = _seeds(cfg, data_streams=f"0..{cfg.replications - 1}", substream="sample size n")
    return make_report("lemma1-check", cfg, results, {"warnings": warnings}, seeds, time.perf_counter() - started)


def _sigma_from_cfg(cfg: RunConfig) -> np.ndarray:
    if cfg.sigma_file is not None:
        sigma = ingest_csv(cfg.sigma_file).data
        if sigma.shape[0] != sigma.shape[1]:
            raise ConfigError(f"sigma_file must hold a square matrix, got {sigma.shape}")
        return sigma
    if cfg.sigma_diag is not None:
        return np.diag(cfg.sigma_diag)
    return np.eye(1)


def cmd_quantile_table(cfg: RunConfig, threads: int = 1) -> dict:
    """Simulated upper quantiles of the self-normalised limit and of bridge sups at a given covariance."""
    started = time.perf_counter()
    alphas = list(cfg.alphas)
    w = sn_limit_sample(cfg.w_paths, cfg.w_grid, RngSpec(cfg.seed, LIMIT_STREAM), threads=threads)
    sigma = _sigma_from_cfg(cfg)
    root, clipped = psd_sqrt(sigma)
    grid = cfg.bridge_grid or bridge_grid_size(0)
    sups = brownian_bridge_sups(root, grid, cfg.n_paths, RngSpec(cfg.seed, BRIDGE_OFFSET), threads=threads)
    results = {
        "alphas": alphas,
        "sn_limit": {"paths": cfg.w_paths, "grid": cfg.w_grid, "quantiles": [upper_quantile(w, a) for a in alphas]},
        "bridge_sup": {
            "paths": cfg.n_paths, "grid": grid, "sigma": sigma,
            "quantiles": [upper_quantile(sups.sup_norms, a) for a in alphas],
        },
    }
    diagnostics = {"warnings": [], "clipped_mass": clipped}
    seeds = _seeds(cfg, limit_stream=LIMIT_STREAM, bridge_stream=BRIDGE_OFFSET)
    return make_report("quantile-table", cfg, results, diagnostics, seeds, time.perf_counter() - started)


COMMANDS = {
    "relevant-test": cmd_relevant_test,
    "changepoint": cmd_changepoint,
    "size-study": cmd_size_study,
    "power-study": cmd_power_study,
    "coupling-check": cmd_coupling_check,
    "lemma1-check": cmd_lemma1_check,
    "quantile-table": cmd_quantile_table,
}
