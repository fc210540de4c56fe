"""Batch studies: the experiments behind the CLI and the acceptance suite.

Each study is a pure function of explicit parameters returning a small report
object; the CLI renders reports to CSV and pass/fail summary lines, and the
acceptance tests assert on the same numbers.  Seed fan-out is deterministic:
results are keyed by seed and aggregated in sorted order regardless of the
execution schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .boundary_lift import BoundaryVector, lift_controlled, neumann_map
from .controlled_path import (ControlledPath, SmoothMap, compose_smooth,
                              diffusion_rows, lift_extrapolate)
from .errors import ConfigError
from .rough_convolution import remainder_certificate, rough_convolve, sewing_convergence
from .rough_driver import (RoughDriver, geometric_chen_defect_max,
                           rough_metric, sample_fbm)
from .semigroup import smoothing_constants
from .solver import (GlobalSolveResult, ProblemSpec, additive_direct,
                     cocycle_defect, solve_global, solve_young_dirichlet)
from .spectral_scale import Scale, generator_coefficients


def thread_cap() -> int:
    """Fan-out cap for multi-seed studies, from ROUGHBOUND_THREADS (default 1)."""
    raw = os.environ.get("ROUGHBOUND_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"ROUGHBOUND_THREADS must be an integer, got {raw!r}")


def _map_seeds(fn, seeds):
    """Apply fn to each seed, optionally in parallel; results in seed order."""
    seeds = list(seeds)
    workers = min(thread_cap(), len(seeds)) if seeds else 1
    if workers <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, seeds))


def canonical_integrand(scale: Scale, F: SmoothMap, y0, D: RoughDriver) -> ControlledPath:
    """The anchor-type controlled path (y0 + G(y0) X_t, G(y0)), lifted through F.

    For a nonlinear F this produces a genuinely controlled integrand with a
    nonvanishing second-order remainder, which is what the sewing and
    remainder studies must exercise.
    """
    g0 = diffusion_rows(F, scale, np.asarray(y0, float)[None, :])[0]
    rows = np.asarray(y0, float)[None, :] + np.outer(D.X, g0)
    primes = np.tile(g0, (D.n + 1, 1))
    u = ControlledPath(D.times, rows, primes, scale.eps - 1.0, D.gamma, scale)
    return lift_extrapolate(F, u, scale)


# -- sewing rate ----------------------------------------------------------------

@dataclass(frozen=True)
class SewingStudy:
    levels: np.ndarray
    mean_defects: np.ndarray   # geometric mean over seeds per level
    slope: float               # fitted decay of the mean defects
    beta: float
    target: float

    @property
    def ok(self):
        return self.slope >= self.target


def sewing_study(scale: Scale, F: SmoothMap, y0, *, H: float, n: int, T: float,
                 gamma: float, seeds, levels, beta: float = 0.0,
                 young: bool = False) -> SewingStudy:
    """Dyadic defect decay of the compensated sums, pooled over seeds.

    The fitted slope of the seed-averaged log2 defects is compared against
    the conservative target (3 gamma - 1 - 0.1, or 2 gamma - 1 - 0.1 in the
    Young case).
    """
    levels = np.asarray(sorted(levels), dtype=int)

    def one(seed):
        D = sample_fbm(H, n, T, seed=seed, gamma=gamma)
        P = canonical_integrand(scale, F, y0, D)
        return sewing_convergence(P, D, T, levels, beta=beta, young=young).defects

    all_defects = np.array(_map_seeds(one, seeds))
    mean = np.exp(np.mean(np.log(np.maximum(all_defects, 1e-300)), axis=0))
    fit = stats.linregress(levels, np.log2(mean))
    k = 2.0 if young else 3.0
    target = k * gamma - 1.0 - 0.1
    return SewingStudy(levels, mean, float(-fit.slope), beta, target)


# -- remainder certificate refinement --------------------------------------------

@dataclass(frozen=True)
class RemainderStudy:
    betas: tuple
    coarse: tuple
    fine: tuple
    ratios: tuple     # coarse/fine sup ratios per beta

    @property
    def ok(self):
        return all(0.5 <= r <= 2.0 for r in self.ratios)


def remainder_refinement_study(scale: Scale, F: SmoothMap, y0, *, H: float,
                               n: int, T: float, gamma: float, seed: int,
                               pair_points: int = 32) -> RemainderStudy:
    """Normalized integral-remainder sups at n and 2n over a common pair grid."""
    D_fine = sample_fbm(H, 2 * n, T, seed=seed, gamma=gamma)
    D_coarse = D_fine.restricted(2)
    reports = []
    for D, stride_base in ((D_coarse, n), (D_fine, 2 * n)):
        P = canonical_integrand(scale, F, y0, D)
        Z = rough_convolve(P, D)
        stride = max(1, stride_base // pair_points)
        reports.append(remainder_certificate(P, D, Z, stride=stride))
    coarse, fine = reports
    ratios = tuple(c / f if f > 0 else 1.0
                   for c, f in zip(coarse.sup_ratios, fine.sup_ratios))
    return RemainderStudy(coarse.betas, coarse.sup_ratios, fine.sup_ratios, ratios)


# -- interchange identity ---------------------------------------------------------

def interchange_error(scale: Scale, F: SmoothMap, y0, D: RoughDriver) -> float:
    """Relative gap between A (int S N F dX) and int S A_{-sigma} N F dX.

    The two sides follow independent code routes: composition + lift +
    convolution + generator versus the fused lift-extrapolated convolution.
    """
    g0 = diffusion_rows(F, scale, np.asarray(y0, float)[None, :])[0]
    rows = np.asarray(y0, float)[None, :] + np.outer(D.X, g0)
    u = ControlledPath(D.times, rows, np.tile(g0, (D.n + 1, 1)),
                       scale.eps - 1.0, D.gamma, scale)
    lifted = lift_controlled(compose_smooth(F, u), scale)
    lhs = generator_coefficients(scale, rough_convolve(lifted, D).y)
    rhs = rough_convolve(lift_extrapolate(F, u, scale), D).y
    denom = max(float(np.max(scale.norm(lhs, scale.eps - 1.0))), 1e-300)
    return float(np.max(scale.norm(lhs - rhs, scale.eps - 1.0))) / denom


# -- solver probes -----------------------------------------------------------------

def zero_noise_error(spec: ProblemSpec, drift_c: float) -> float:
    """Max deviation from the per-mode exact solution e^{-(mu_k - c) t} y0_k."""
    res = solve_global(spec)
    scale = spec.scale
    exact = np.exp(-np.outer(res.path.times, scale.mu - drift_c)) * spec.y0
    return float(np.max(np.abs(res.path.y - exact)))


def additive_bypass_error(spec: ProblemSpec) -> float:
    """Sup-norm gap between the Picard solution and the direct evaluation."""
    picard = solve_global(spec).path
    direct = additive_direct(spec)
    return float(np.max(spec.scale.norm(picard.y - direct.y,
                                        spec.solution_alpha)))


@dataclass(frozen=True)
class CocycleStudy:
    resolutions: tuple
    mean_defects: tuple     # geometric mean over seeds per resolution
    ratios: tuple           # consecutive doubling ratios of the means

    @property
    def final_ratio(self):
        return self.ratios[-1]


def cocycle_study(scale: Scale, F: SmoothMap, y0, *, H: float, master_n: int,
                  T: float, gamma: float, seeds, resolutions,
                  t: float, tau: float, drift=None) -> CocycleStudy:
    """Cocycle defect versus per-call resolution, geometric mean over seeds."""
    resolutions = tuple(resolutions)

    def one(seed):
        D = sample_fbm(H, master_n, T, seed=seed, gamma=gamma)
        spec = ProblemSpec(scale, D, F, np.asarray(y0, float), drift)
        return [cocycle_defect(spec, t, tau, r) for r in resolutions]

    defects = np.array(_map_seeds(one, seeds))
    mean = stats.gmean(np.maximum(defects, 1e-300), axis=0)
    ratios = tuple(float(mean[i] / mean[i + 1]) for i in range(len(mean) - 1))
    return CocycleStudy(resolutions, tuple(float(m) for m in mean), ratios)


@dataclass(frozen=True)
class StabilityStudy:
    kind: str               # "driver" or "initial"
    predictors: tuple
    responses: tuple
    slope: float
    max_rel_dev: float      # worst |response - slope*predictor| / (slope*predictor)

    @property
    def ok(self):
        return self.max_rel_dev <= 0.20


def _fit_through_origin(p, r):
    p = np.asarray(p)
    r = np.asarray(r)
    slope = float(np.sum(p * r) / np.sum(p * p))
    dev = np.abs(r - slope * p) / np.maximum(np.abs(slope * p), 1e-300)
    return slope, float(np.max(dev))


def stability_study(scale: Scale, F: SmoothMap, y0, *, H: float, n: int,
                    T: float, gamma: float, seed: int, gamma_prime: float,
                    lambdas=(0.95, 0.99, 1.01, 1.05),
                    eps0=(-0.05, -0.01, 0.01, 0.05),
                    drift=None) -> tuple:
    """Linear-response fits for driver scaling and initial-data perturbations.

    Returns (driver_study, initial_study); each records the fitted slope of
    response against predictor and the worst relative deviation from the fit.
    """
    from .solver import stability_distance

    D = sample_fbm(H, n, T, seed=seed, gamma=gamma)
    y0 = np.asarray(y0, float)
    base = solve_global(ProblemSpec(scale, D, F, y0, drift)).path

    preds, resps = [], []
    for lam in lambdas:
        Dl = RoughDriver(D.times.copy(), (lam * D.X).copy(), gamma, D.H)
        sol = solve_global(ProblemSpec(scale, Dl, F, y0, drift)).path
        preds.append(rough_metric(D, Dl, gamma))
        resps.append(stability_distance(sol, base, Dl, D, gamma_prime))
    slope, dev = _fit_through_origin(preds, resps)
    driver_study = StabilityStudy("driver", tuple(preds), tuple(resps), slope, dev)

    direction = np.zeros_like(y0)
    direction[: max(1, len(y0) // 4)] = 1.0
    direction /= scale.norm(direction, scale.eps - 1.0)
    preds, resps = [], []
    for e in eps0:
        y0p = y0 + e * direction
        sol = solve_global(ProblemSpec(scale, D, F, y0p, drift)).path
        preds.append(abs(e))
        resps.append(stability_distance(sol, base, D, D, gamma_prime))
    slope, dev = _fit_through_origin(preds, resps)
    initial_study = StabilityStudy("initial", tuple(preds), tuple(resps), slope, dev)
    return driver_study, initial_study


# -- Young / Dirichlet --------------------------------------------------------------

@dataclass(frozen=True)
class YoungStudy:
    result: GlobalSolveResult
    slope: float
    target: float

    @property
    def ok(self):
        return self.slope >= self.target


def young_dirichlet_study(scale: Scale, F: SmoothMap, y0, *, H: float, n: int,
                          T: float, gamma: float, seed: int, levels,
                          drift=None) -> YoungStudy:
    """Solve with Dirichlet boundary noise and fit the Young sewing slope."""
    D = sample_fbm(H, n, T, seed=seed, gamma=gamma)
    spec = ProblemSpec(scale, D, F, np.asarray(y0, float), drift)
    res = solve_young_dirichlet(spec)
    g_rows = diffusion_rows(F, scale, res.path.y)
    gp = ControlledPath(D.times, g_rows, np.zeros_like(g_rows),
                        scale.eps - 1.0, gamma, scale)
    rep = sewing_convergence(gp, D, T, levels, beta=0.0, young=True)
    return YoungStudy(res, rep.slope, 2.0 * gamma - 1.0 - 0.1)


# -- invariants battery ---------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    ok: bool

    def line(self):
        return (f"CHECK {self.name} {'PASS' if self.ok else 'FAIL'} "
                f"value={self.value:.6e} threshold={self.threshold:.6e}")


def invariants_battery(scale: Scale, *, H: float = 0.45, n: int = 64,
                       T: float = 1.0, seeds=range(10), rng_seed: int = 0) -> list:
    """Fast cross-module property battery behind `roughbound invariants`."""
    checks = []

    worst = max(geometric_chen_defect_max(sample_fbm(H, n, T, seed=s))
                for s in seeds)
    checks.append(Check("chen_geometric_defect", worst, 1e-10, worst <= 1e-10))

    rng = np.random.default_rng(rng_seed)
    worst_ratio = 0.0
    for _ in range(200):
        v = rng.standard_normal(scale.K)
        a1, a2, a3 = np.sort(rng.uniform(-2.0, 2.0, size=3))
        if a3 - a1 < 1e-6:
            continue
        lhs = scale.norm(v, a2) ** (a3 - a1)
        rhs = scale.norm(v, a1) ** (a3 - a2) * scale.norm(v, a3) ** (a2 - a1)
        worst_ratio = max(worst_ratio, lhs / rhs)
    checks.append(Check("interpolation_inequality", worst_ratio, 1 + 1e-12,
                        worst_ratio <= 1 + 1e-12))

    worst_exc = 0.0
    t_grid = np.logspace(-4, 0, 60)
    for sig in (0.0, 0.25, 0.5, 0.75, 1.0):
        rep = smoothing_constants(scale, sig, 0.0, t_grid)
        worst_exc = max(worst_exc,
                        rep.measured_smoothing / rep.smoothing_bound,
                        rep.measured_continuity / rep.continuity_bound)
    checks.append(Check("semigroup_bounds", worst_exc, 1 + 1e-12,
                        worst_exc <= 1 + 1e-12))

    g = BoundaryVector(0.4, -1.3)
    h = BoundaryVector(-0.7, 0.2)
    both = BoundaryVector(g.g0 + h.g0, g.g1 + h.g1)
    lin_err = float(np.max(np.abs(
        neumann_map(both, scale).coeffs
        - neumann_map(g, scale).coeffs - neumann_map(h, scale).coeffs)))
    checks.append(Check("neumann_linearity", lin_err, 1e-12, lin_err <= 1e-12))

    D = sample_fbm(H, n, T, seed=1)
    E = sample_fbm(H, n, T, seed=2)
    Fd = sample_fbm(H, n, T, seed=3)
    tri = rough_metric(D, Fd) - (rough_metric(D, E) + rough_metric(E, Fd))
    sym = abs(rough_metric(D, E) - rough_metric(E, D))
    self_d = rough_metric(D, D)
    metric_worst = max(tri, sym, self_d)
    checks.append(Check("metric_axioms", metric_worst, 1e-12,
                        metric_worst <= 1e-12))

    d1 = sample_fbm(H, n, T, seed=42)
    d2 = sample_fbm(H, n, T, seed=42)
    det = 0.0 if np.array_equal(d1.X, d2.X) else 1.0
    checks.append(Check("sampling_determinism", det, 0.0, det == 0.0))

    return checks
