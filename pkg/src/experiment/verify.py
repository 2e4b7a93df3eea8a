"""Desk-scale acceptance suite behind ``verify``.

Each check is a zero-argument callable returning a :class:`CheckResult`
with the measured quantity and its tolerance.  Oracles are independent of
the estimators: they build design matrices explicitly, use their own kernel
and solve with :func:`numpy.linalg.lstsq`.
"""
from __future__ import annotations

import filecmp
import logging
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.data.dataset import FunctionalDataset
from src.data.io import read_long_csv, write_long_csv
from src.data.weights import WeightScheme, scheme_weights
from src.evaluation.aggregate import aggregate_mises, global_opt_bruteforce
from src.evaluation.report import MiseReport
from src.exceptions import AllEmptyError
from src.experiment.config import ExperimentConfig
from src.experiment.phase import run_phase_experiment, write_phase_outputs
from src.experiment.rate_study import run_rate_experiment
from src.reporting.models import CheckResult
from src.simulation.generator import SimulationConfig, generate_dataset, generate_scores
from src.simulation.truth import COMPONENT_VARIANCES, GroundTruth
from src.smoothing.binned import estimate_cov_binned, estimate_mean_binned
from src.smoothing.binning import bin_centers, bin_marginal, bin_pairs
from src.smoothing.local_linear import (
    PairSet,
    estimate_cov_at,
    estimate_cov_surface,
    estimate_mean_at,
    estimate_mean_curve,
    smooth_pairs,
)
from src.smoothing.models import SmootherSpec

logger = logging.getLogger(__name__)

__all__ = ["CHECKS", "FULL_CHECKS", "desk_config", "run_checks"]

Check = Callable[[], CheckResult]

# Fixed seed of every randomised check.
VERIFY_SEED = 20_240_607


def desk_config(**overrides: object) -> ExperimentConfig:
    """Desk-scale phase design on the binned path."""
    base = ExperimentConfig(
        binned=True, bandwidth_min=0.03, bandwidth_count=10, seed=VERIFY_SEED
    )
    return base.with_overrides(**overrides)


def _reference_kernel(x: np.ndarray) -> np.ndarray:
    return np.where(np.abs(x) <= 1.0, 0.75 * (1.0 - x * x), 0.0)


def _wls_intercept(design: np.ndarray, response: np.ndarray, weights: np.ndarray) -> float:
    root = np.sqrt(weights)
    coef, *_ = np.linalg.lstsq(design * root[:, None], response * root, rcond=None)
    return float(coef[0])


def _ragged_dataset(
    rng: np.random.Generator,
    n: int,
    p: int,
    max_t: int,
    response: Callable[[np.ndarray], np.ndarray],
) -> FunctionalDataset:
    obs = []
    for _ in range(n):
        subject = []
        for _ in range(p):
            u = rng.uniform(0.0, 1.0, int(rng.integers(3, max_t + 1)))
            subject.append(list(zip(u.tolist(), response(u).tolist())))
        obs.append(subject)
    return FunctionalDataset.from_observations(obs)


# ---------------------------------------------------------------------------
# Algebraic checks
# ---------------------------------------------------------------------------


def check_affine_reproduction() -> CheckResult:
    """Affine responses are reproduced exactly at every solvable point."""
    rng = np.random.default_rng(VERIFY_SEED)
    grid = np.linspace(0.0, 1.0, 41)
    spec = SmootherSpec(0.3)
    worst = 0.0
    for _ in range(5):
        a, b = rng.normal(size=2)
        data = _ragged_dataset(rng, 20, 1, 10, lambda u: a + b * u)
        curve = estimate_mean_curve(data, 0, grid, spec)
        ok = np.isfinite(curve.values)
        worst = max(worst, float(np.max(np.abs(curve.values[ok] - (a + b * grid[ok])))))

        c0, c1, c2 = rng.normal(size=3)
        u, v = rng.uniform(0.0, 1.0, (2, 1000))
        weights = rng.uniform(0.5, 2.0, 1000)
        pairs = PairSet.from_triples(u, v, c0 + c1 * u + c2 * v, weights)
        surface = smooth_pairs(pairs, grid, grid, spec)
        uu, vv = np.meshgrid(grid, grid, indexing="ij")
        ok2 = np.isfinite(surface.values)
        expected = c0 + c1 * uu + c2 * vv
        worst = max(worst, float(np.max(np.abs(surface.values[ok2] - expected[ok2]))))
    return CheckResult("affine-reproduction", worst, "<= 1e-10", worst <= 1e-10)


def _mean_oracle(
    data: FunctionalDataset, j: int, u: float, h: float, scheme: WeightScheme
) -> float:
    times, values, weights = [], [], []
    for i in range(data.n_subjects):
        t, y = data.observations(i, j)
        unit = 1.0 if scheme is WeightScheme.PER_OBSERVATION else 1.0 / max(t.size, 1)
        times.extend(t.tolist())
        values.extend(y.tolist())
        weights.extend([unit] * t.size)
    t_arr = np.array(times)
    design = np.column_stack([np.ones_like(t_arr), t_arr - u])
    kernel = _reference_kernel((t_arr - u) / h) * np.array(weights)
    return _wls_intercept(design, np.array(values), kernel)


def _cov_oracle(
    data: FunctionalDataset,
    j: int,
    k: int,
    u: float,
    v: float,
    h: float,
    mean: Callable[[np.ndarray], np.ndarray],
    scheme: WeightScheme,
) -> float:
    rows, responses, weights = [], [], []
    for i in range(data.n_subjects):
        tj, yj = data.observations(i, j)
        tk, yk = data.observations(i, k)
        n_pairs = tj.size * tk.size - (tj.size if j == k else 0)
        if n_pairs <= 0:
            continue
        unit = 1.0 if scheme is WeightScheme.PER_OBSERVATION else 1.0 / n_pairs
        for a in range(tj.size):
            for b in range(tk.size):
                if j == k and a == b:
                    continue
                rows.append((1.0, tj[a] - u, tk[b] - v))
                responses.append((yj[a] - mean(tj[a])) * (yk[b] - mean(tk[b])))
                kernel = _reference_kernel((tj[a] - u) / h) * _reference_kernel((tk[b] - v) / h)
                weights.append(unit * float(kernel))
    return _wls_intercept(np.array(rows), np.array(responses), np.array(weights))


def check_normal_equations_oracle(instances: int = 50) -> CheckResult:
    """Point estimates against a generic weighted least squares solve."""
    rng = np.random.default_rng(VERIFY_SEED + 1)

    def mean(u: np.ndarray) -> np.ndarray:
        return np.sin(2.0 * np.pi * np.asarray(u))

    worst = 0.0
    for index in range(instances):
        scheme = WeightScheme.PER_OBSERVATION if index % 2 == 0 else WeightScheme.PER_SUBJECT
        n = int(rng.integers(6, 9))
        data = _ragged_dataset(rng, n, 2, 5, lambda u: mean(u) + rng.normal(size=u.size))
        h = float(rng.uniform(0.35, 0.6))
        u, v = (float(x) for x in rng.uniform(0.2, 0.8, 2))
        j, k = (0, 1) if index % 3 else (1, 1)
        spec = SmootherSpec(h, scheme=scheme)

        got = estimate_mean_at(data, j, u, spec)
        ref = _mean_oracle(data, j, u, h, scheme)
        worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))

        got = estimate_cov_at(data, j, k, u, v, spec, (mean, mean))
        ref = _cov_oracle(data, j, k, u, v, h, mean, scheme)
        worst = max(worst, abs(got - ref) / max(1.0, abs(ref)))
    return CheckResult(
        "normal-equations-oracle", worst, "<= 1e-9", worst <= 1e-9, f"{instances} instances"
    )


def check_weight_normalization(designs: int = 1000) -> CheckResult:
    """``sum T v = 1`` and ``sum T (T - 1{j=k}) w = 1`` on ragged designs."""
    rng = np.random.default_rng(VERIFY_SEED + 2)
    worst = 0.0
    for _ in range(designs):
        n = int(rng.integers(1, 31))
        counts = rng.integers(0, 7, size=(n, 2))
        counts[0] = np.maximum(counts[0], 2)
        for scheme in WeightScheme:
            v = scheme_weights(counts[:, 0], scheme)
            worst = max(worst, abs(float(counts[:, 0] @ v) - 1.0))
            for j, k in ((0, 0), (0, 1)):
                pairs = np.clip(counts[:, j] * (counts[:, k] - (1 if j == k else 0)), 0, None)
                w = scheme_weights(pairs, scheme)
                worst = max(worst, abs(float(pairs @ w) - 1.0))
    return CheckResult("weight-normalization", worst, "<= 1e-12", worst <= 1e-12)


# ---------------------------------------------------------------------------
# Binned against exact
# ---------------------------------------------------------------------------


def _relative_gap(exact: np.ndarray, binned: np.ndarray) -> float:
    ok = np.isfinite(exact) & np.isfinite(binned)
    if not np.any(ok):
        return float("inf")
    spread = float(np.ptp(exact[ok])) or 1.0
    return float(np.max(np.abs(exact[ok] - binned[ok]))) / spread


def check_binned_matches_exact() -> CheckResult:
    """Binned estimates within 1% of the exact range on a seeded instance."""
    data, truth = generate_dataset(SimulationConfig(n=100, p=2, T=20, seed=VERIFY_SEED))
    grid = np.linspace(0.0, 1.0, 101)
    bins = 400
    means = (truth.mean, truth.mean)
    mean_spec = SmootherSpec(0.1)
    cov_spec = SmootherSpec(0.15)

    gaps = [
        _relative_gap(
            estimate_mean_curve(data, 0, grid, mean_spec).values,
            estimate_mean_binned(bin_marginal(data, 0, bins), None, grid, mean_spec).values,
        )
    ]
    for j, k in ((0, 0), (0, 1)):
        exact = estimate_cov_surface(data, j, k, grid, grid, cov_spec, means)
        binned = estimate_cov_binned(bin_pairs(data, j, k, bins, means), None, grid, grid, cov_spec)
        gaps.append(_relative_gap(exact.values, binned.values))
    worst = max(gaps)
    return CheckResult("binned-vs-exact", worst, "<= 0.01 of range", worst <= 0.01)


def check_binning_lossless_on_nodes() -> CheckResult:
    """With every time on a bin node the binned and exact paths agree."""
    bins = 50
    nodes = bin_centers(bins)
    rng = np.random.default_rng(VERIFY_SEED + 3)
    times = rng.choice(nodes, size=(40, 2, 8))
    values = np.cos(3.0 * times) + rng.normal(size=times.shape)
    data = FunctionalDataset.from_arrays(times, values)
    spec = SmootherSpec(0.1)
    grid = np.array(nodes)

    def mean(u: np.ndarray) -> np.ndarray:
        return np.cos(3.0 * np.asarray(u))

    gaps = [
        float(
            np.nanmax(
                np.abs(
                    estimate_mean_curve(data, 0, grid, spec).values
                    - estimate_mean_binned(bin_marginal(data, 0, bins), None, grid, spec).values
                )
            )
        )
    ]
    exact = estimate_cov_surface(data, 0, 1, grid, grid, spec, (mean, mean))
    binned = estimate_cov_binned(bin_pairs(data, 0, 1, bins, (mean, mean)), None, grid, grid, spec)
    gaps.append(float(np.nanmax(np.abs(exact.values - binned.values))))
    worst = max(gaps)
    return CheckResult("binning-lossless-on-nodes", worst, "<= 1e-12", worst <= 1e-12)


# ---------------------------------------------------------------------------
# Simulation and aggregation
# ---------------------------------------------------------------------------


def check_simulation_law(subjects: int = 5000) -> CheckResult:
    """Score variances, cross-variable correlation and latent covariances."""
    rho = 0.5
    cfg = SimulationConfig(n=subjects, p=3, T=1, rho=rho, seed=VERIFY_SEED)
    scores = generate_scores(cfg)
    failures: List[str] = []
    worst = 0.0

    variances = scores[:, 0, :].var(axis=0, ddof=1)
    se = COMPONENT_VARIANCES * np.sqrt(2.0 / (subjects - 1))
    z = np.abs(variances - COMPONENT_VARIANCES) / se
    worst = max(worst, float(z.max()))
    if np.any(z > 3.0):
        failures.append("variances")

    corr = np.mean(
        [np.corrcoef(scores[:, 0, m], scores[:, 2, m])[0, 1] for m in range(scores.shape[2])]
    )
    corr_se = (1.0 - rho**4) / np.sqrt(subjects) / np.sqrt(scores.shape[2])
    z_corr = abs(float(corr) - rho**2) / corr_se
    worst = max(worst, z_corr)
    if z_corr > 3.0:
        failures.append("correlation")

    truth = GroundTruth(rho=rho, n_vars=3)
    tolerance = 4.0 / np.sqrt(subjects)
    spots = [
        (0, 0, 0.2, 0.2),
        (0, 0, 0.1, 0.7),
        (0, 1, 0.3, 0.6),
        (1, 2, 0.5, 0.9),
        (0, 2, 0.8, 0.4),
    ]
    for j, k, u, v in spots:
        x_u = truth.mean(u) + scores[:, j, :] @ truth.basis(u)
        x_v = truth.mean(v) + scores[:, k, :] @ truth.basis(v)
        empirical = float(np.cov(x_u, x_v)[0, 1])
        gap = abs(empirical - float(truth.cov(j, k, u, v)))
        if gap > tolerance:
            failures.append(f"cov({j},{k},{u},{v})")
    return CheckResult(
        "simulation-law",
        worst,
        "<= 3 SE; cov within 4/sqrt(N)",
        not failures,
        ", ".join(failures) or f"N={subjects}",
    )


def check_bruteforce_identity(tables: int = 100) -> CheckResult:
    """Brute-force global optimum equals MaxMISE on random tables."""
    rng = np.random.default_rng(VERIFY_SEED + 4)
    mismatches = 0
    for _ in range(tables):
        report = MiseReport.from_tables(
            mise_mean=rng.exponential(size=(4, 5)), bandwidths_mean=np.linspace(0.1, 0.5, 5)
        )
        if global_opt_bruteforce(report) != aggregate_mises(report).max_mean:
            mismatches += 1
    return CheckResult(
        "bruteforce-identity",
        float(mismatches),
        "0 mismatches",
        mismatches == 0,
        f"{tables} tables",
    )


# ---------------------------------------------------------------------------
# Harness checks
# ---------------------------------------------------------------------------


def _same_tree(left: Path, right: Path) -> Tuple[bool, int]:
    names = sorted(p.name for p in left.iterdir())
    if names != sorted(p.name for p in right.iterdir()):
        return False, len(names)
    _, mismatch, errors = filecmp.cmpfiles(left, right, names, shallow=False)
    return not mismatch and not errors, len(names)


def check_determinism() -> CheckResult:
    """Reruns are byte-identical, whatever the thread budget."""
    sim = SimulationConfig(n=20, p=2, T=5, seed=VERIFY_SEED)
    cfg = desk_config(
        n=30,
        p_values=(2, 3),
        t_values=(5, 10),
        reps=2,
        bin_count=30,
        bandwidths_mean=(0.1, 0.2, 0.3),
        bandwidths_cov=(0.15, 0.3),
    )
    with tempfile.TemporaryDirectory() as tmp:
        root = Path(tmp)
        for name in ("a", "b"):
            (root / name).mkdir()
            data, _ = generate_dataset(sim)
            write_long_csv(data, root / name / "data.csv", metadata={"seed": sim.seed})
        same_sim, _ = _same_tree(root / "a", root / "b")

        for threads in (1, 3):
            out = root / f"phase-{threads}"
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outcome = run_phase_experiment(cfg, executor=pool)
            write_phase_outputs(cfg, outcome, out)
        same_phase, files = _same_tree(root / "phase-1", root / "phase-3")
    passed = same_sim and same_phase
    return CheckResult(
        "determinism",
        float(passed),
        "byte-identical",
        passed,
        f"simulate x2, phase-experiment threads 1 vs 3 ({files} files)",
    )


def check_empty_input() -> CheckResult:
    """A dataset file without observations raises AllEmptyError."""
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "empty.csv"
        path.write_text("subject,var,u,y\n", encoding="utf-8")
        try:
            read_long_csv(path)
        except AllEmptyError:
            return CheckResult("empty-input", 1.0, "AllEmptyError", True)
    return CheckResult("empty-input", 0.0, "AllEmptyError", False, "no error raised")


def check_rate_slopes(executor: Optional[ThreadPoolExecutor] = None) -> List[CheckResult]:
    """Sparse-regime slopes of mean and covariance MISE against ``n``."""
    cfg = desk_config(t=5, reps=30, n_values=(100, 200, 400, 800, 1600))
    return run_rate_experiment(cfg, executor=executor).checks


def check_phase_shape(executor: Optional[ThreadPoolExecutor] = None) -> List[CheckResult]:
    """Phase-transition shape of the desk-scale design."""
    return run_phase_experiment(desk_config(), executor=executor).checks


CHECKS: Dict[str, Check] = {
    "affine-reproduction": check_affine_reproduction,
    "normal-equations-oracle": check_normal_equations_oracle,
    "weight-normalization": check_weight_normalization,
    "binned-vs-exact": check_binned_matches_exact,
    "binning-lossless-on-nodes": check_binning_lossless_on_nodes,
    "simulation-law": check_simulation_law,
    "bruteforce-identity": check_bruteforce_identity,
    "determinism": check_determinism,
    "empty-input": check_empty_input,
}

FULL_CHECKS = (check_rate_slopes, check_phase_shape)


def _timed(name: str, run: Callable[[], List[CheckResult]]) -> List[CheckResult]:
    started = time.perf_counter()
    try:
        results = run()
    except Exception as exc:  # noqa: BLE001 – a crashing check is a failed check
        logger.exception("Check %s raised", name)
        detail = f"raised {type(exc).__name__}: {exc}"
        results = [CheckResult(name, float("nan"), "-", False, detail)]
    elapsed = time.perf_counter() - started
    logger.info("check_finished", extra={"check": name, "seconds": round(elapsed, 3)})
    return results


def run_checks(*, full: bool = False, threads: int = 1) -> List[CheckResult]:
    """Run the acceptance suite; ``full`` adds the rate and phase studies."""
    results: List[CheckResult] = []
    for name, check in CHECKS.items():
        results.extend(_timed(name, lambda check=check: [check()]))
    if full:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for study in FULL_CHECKS:
                results.extend(_timed(study.__name__, lambda study=study: study(pool)))
    failed = [r.name for r in results if not r.passed]
    if failed:
        logger.warning("Verify: %d checks failed: %s", len(failed), ", ".join(failed))
    return results
