"""Sampling, lifting, validating and shifting Hoelder rough paths on a grid.

A driver is a scalar path X on a uniform grid with X_0 = 0, together with a
second-order process XX.  For d = 1 the canonical geometric lift is

    XX_{t,s} = (X_t - X_s)^2 / 2,

which satisfies Chen's relation identically; explicit lifts are kept only for
adversarial tests and are validated against Chen's relation on construction.

Fractional Brownian paths are drawn exactly in law by Cholesky factorization
of the increment covariance

    E[dX_i dX_j] = (|t_{j+1}-t_i|^{2H} + |t_j-t_{i+1}|^{2H}
                    - |t_j-t_i|^{2H} - |t_{j+1}-t_{i+1}|^{2H}) / 2,

with the factor cached per (H, n, T).  Sampled paths are (H-)-Hoelder, so the
recorded exponent defaults to gamma = H - 0.05.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChenViolation, ConfigError, CovarianceNotPD, GridMismatch, IoError

GEOMETRIC = "geometric"
EXPLICIT = "explicit"

CHEN_TOL = 1e-10
DEFAULT_GAMMA_SLACK = 0.05

_GRID_RTOL = 1e-9


@dataclass(frozen=True)
class RoughDriver:
    """Sampled rough path: uniform grid, scalar path, lift tag, exponent."""

    times: np.ndarray
    X: np.ndarray
    gamma: float
    H: float | None = None
    lift: str = GEOMETRIC
    XX: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        x = np.asarray(self.X, dtype=float)
        if t.ndim != 1 or t.size < 2 or x.shape != t.shape:
            raise ConfigError("driver needs matching 1-d times and X with n >= 2 points")
        h = np.diff(t)
        if np.any(h <= 0) or not np.allclose(h, h[0], rtol=_GRID_RTOL, atol=0):
            raise ConfigError("driver grid must be uniform and increasing")
        if x[0] != 0.0:
            raise ConfigError("rough paths are anchored at X_0 = 0")
        if not self.gamma > 0:
            raise ConfigError(f"Hoelder exponent must be positive, got {self.gamma}")
        if self.lift == EXPLICIT:
            if self.XX is None or self.XX.shape != (t.size, t.size):
                raise ConfigError("explicit lift needs a full (n+1, n+1) XX array")
            defect = chen_defect_max(x, self.XX)
            if defect > CHEN_TOL:
                raise ChenViolation(f"Chen defect {defect:.3e} exceeds {CHEN_TOL}")
        elif self.lift != GEOMETRIC:
            raise ConfigError(f"unknown lift tag {self.lift!r}")
        t.setflags(write=False)
        x.setflags(write=False)
        if self.XX is not None:
            self.XX.setflags(write=False)

    # -- grid helpers ------------------------------------------------------

    @property
    def n(self):
        return self.times.size - 1

    @property
    def T(self):
        return float(self.times[-1] - self.times[0])

    @property
    def step(self):
        return (self.times[-1] - self.times[0]) / self.n

    def index_of(self, t: float) -> int:
        """Grid index of time t; GridMismatch if t is off-grid."""
        pos = (t - self.times[0]) / self.step
        i = int(round(pos))
        if i < 0 or i > self.n or abs(pos - i) > 1e-8:
            raise GridMismatch(f"time {t} is not on the driver grid")
        return i

    # -- second-order process ----------------------------------------------

    def xx_entry(self, i: int, j: int) -> float:
        """XX_{t_j, t_i} for grid indices i <= j."""
        if self.lift == GEOMETRIC:
            return 0.5 * (self.X[j] - self.X[i]) ** 2
        return float(self.XX[i, j])

    def xx_adjacent(self):
        """XX over consecutive grid cells, shape (n,)."""
        if self.lift == GEOMETRIC:
            return 0.5 * np.diff(self.X) ** 2
        idx = np.arange(self.n)
        return self.XX[idx, idx + 1]

    def xx_lag(self, lag: int):
        """XX_{t_{i+lag}, t_i} for all i, shape (n+1-lag,)."""
        if self.lift == GEOMETRIC:
            return 0.5 * (self.X[lag:] - self.X[:-lag]) ** 2
        idx = np.arange(self.times.size - lag)
        return self.XX[idx, idx + lag]

    # -- derived drivers -----------------------------------------------------

    def shifted(self, tau: float) -> "RoughDriver":
        return shift(self, tau)

    def restricted(self, stride: int, stop: int | None = None) -> "RoughDriver":
        """Subsample every stride-th grid point (an exact restriction of the path)."""
        if stride < 1 or (self.n % stride != 0 and stop is None):
            raise GridMismatch(f"stride {stride} does not divide the grid")
        stop_idx = self.n if stop is None else stop
        if stop_idx % stride != 0:
            raise GridMismatch("restriction endpoint must be a stride multiple")
        sel = np.arange(0, stop_idx + 1, stride)
        xx = self.XX[np.ix_(sel, sel)].copy() if self.lift == EXPLICIT else None
        return RoughDriver(self.times[sel].copy(), self.X[sel].copy(), self.gamma,
                           self.H, self.lift, xx)


def lift_geometric(times, X, gamma: float, H: float | None = None) -> RoughDriver:
    """Canonical d=1 lift XX_{t,s} = X_{t,s}^2/2, evaluated on demand."""
    return RoughDriver(np.asarray(times, dtype=float).copy(),
                       np.asarray(X, dtype=float).copy(), gamma, H, GEOMETRIC)


def lift_explicit(times, X, XX, gamma: float, H: float | None = None) -> RoughDriver:
    """Driver with a stored second-order process; rejects Chen violations."""
    return RoughDriver(np.asarray(times, dtype=float).copy(),
                       np.asarray(X, dtype=float).copy(), gamma, H, EXPLICIT,
                       np.asarray(XX, dtype=float).copy())


def chen_defect_max(X, XX, chunk: int = 64) -> float:
    """max over grid triples s <= u <= t of |XX_{t,s} - XX_{u,s} - XX_{t,u} - X_{u,s} X_{t,u}|."""
    m = X.size
    worst = 0.0
    for s0 in range(0, m, chunk):
        s = np.arange(s0, min(s0 + chunk, m))
        d = (XX[s[:, None, None], np.arange(m)[None, None, :]]
             - XX[s[:, None, None], np.arange(m)[None, :, None]]
             - XX[np.arange(m)[None, :, None], np.arange(m)[None, None, :]]
             - (X[None, :, None] - X[s[:, None, None]])
             * (X[None, None, :] - X[None, :, None]))
        u = np.arange(m)[None, :, None]
        t = np.arange(m)[None, None, :]
        valid = (s[:, None, None] <= u) & (u <= t)
        worst = max(worst, float(np.max(np.abs(np.where(valid, d, 0.0)))))
    return worst


def geometric_chen_defect_max(D: RoughDriver) -> float:
    """Chen defect scan of the geometric lift (algebraically zero; roundoff only)."""
    XX = 0.5 * (D.X[None, :] - D.X[:, None]) ** 2
    return chen_defect_max(D.X, XX)


# -- exact fBm sampling ------------------------------------------------------

_chol_cache: dict[tuple, np.ndarray] = {}


def _increment_cholesky(H: float, n: int, T: float) -> np.ndarray:
    key = (round(H, 12), n, round(T, 12))
    if key not in _chol_cache:
        t = np.linspace(0.0, T, n + 1)
        left = t[:-1]
        right = t[1:]
        two_h = 2.0 * H
        cov = 0.5 * (np.abs(right[None, :] - left[:, None]) ** two_h
                     + np.abs(left[None, :] - right[:, None]) ** two_h
                     - np.abs(left[None, :] - left[:, None]) ** two_h
                     - np.abs(right[None, :] - right[:, None]) ** two_h)
        try:
            _chol_cache[key] = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise CovarianceNotPD(
                f"increment covariance not PD for H={H}, n={n}") from exc
    return _chol_cache[key]


def sample_fbm(H: float, n: int, T: float = 1.0, seed: int = 0,
               gamma: float | None = None,
               gamma_slack: float = DEFAULT_GAMMA_SLACK) -> RoughDriver:
    """Exact-in-law fractional Brownian sample with the geometric lift.

    Deterministic given (H, n, T, seed).  gamma defaults to H - gamma_slack;
    pass gamma explicitly to pin the exponent used downstream.
    """
    if not 0.0 < H < 1.0:
        raise ConfigError(f"Hurst parameter must lie in (0,1), got {H}")
    if n < 2:
        raise ConfigError(f"need a grid of at least 2 steps, got n={n}")
    if T <= 0:
        raise ConfigError(f"horizon must be positive, got T={T}")
    chol = _increment_cholesky(H, n, T)
    z = np.random.default_rng(seed).standard_normal(n)
    x = np.empty(n + 1)
    x[0] = 0.0
    np.cumsum(chol @ z, out=x[1:])
    if gamma is None:
        gamma = H - gamma_slack
    return RoughDriver(np.linspace(0.0, T, n + 1), x, gamma, H, GEOMETRIC)


# -- metric and shift ---------------------------------------------------------

def _check_common_grid(D1: RoughDriver, D2: RoughDriver):
    if D1.times.shape != D2.times.shape or not np.allclose(
            D1.times, D2.times, rtol=0, atol=_GRID_RTOL * max(D1.T, 1.0)):
        raise GridMismatch("drivers live on different grids")


def holder_seminorm(D: RoughDriver, gamma: float | None = None) -> float:
    """[X]_gamma = sup over grid pairs of |X_{t,s}| / (t-s)^gamma."""
    g = D.gamma if gamma is None else gamma
    h = D.step
    worst = 0.0
    for lag in range(1, D.n + 1):
        num = np.max(np.abs(D.X[lag:] - D.X[:-lag]))
        worst = max(worst, num / (lag * h) ** g)
    return float(worst)


def rough_metric(D1: RoughDriver, D2: RoughDriver, gamma: float | None = None) -> float:
    """Inhomogeneous rough path distance over the common grid."""
    _check_common_grid(D1, D2)
    g = D1.gamma if gamma is None else gamma
    h = D1.step
    first = 0.0
    second = 0.0
    for lag in range(1, D1.n + 1):
        dx = (D1.X[lag:] - D1.X[:-lag]) - (D2.X[lag:] - D2.X[:-lag])
        dxx = D1.xx_lag(lag) - D2.xx_lag(lag)
        dt = lag * h
        first = max(first, np.max(np.abs(dx)) / dt ** g)
        second = max(second, np.max(np.abs(dxx)) / dt ** (2 * g))
    return float(first + second)


def rho(D: RoughDriver, gamma: float | None = None) -> float:
    """rho_gamma(X) = distance of the lifted path to the zero rough path."""
    g = D.gamma if gamma is None else gamma
    h = D.step
    first = 0.0
    second = 0.0
    for lag in range(1, D.n + 1):
        dt = lag * h
        first = max(first, np.max(np.abs(D.X[lag:] - D.X[:-lag])) / dt ** g)
        second = max(second, np.max(np.abs(D.xx_lag(lag))) / dt ** (2 * g))
    return float(first + second)


def shift(D: RoughDriver, tau: float) -> RoughDriver:
    """Wiener shift: X^theta_t = X_{tau+t} - X_tau on the remaining grid.

    The geometric lift is re-derived, which reproduces the second-order
    cocycle identity XX_{s+t,s}(w) = XX_{t,0}(theta_s w) exactly.
    """
    i = D.index_of(tau)
    x = D.X[i:] - D.X[i]
    t = D.times[i:] - D.times[i]
    if x.size < 2:
        raise GridMismatch("shift leaves fewer than two grid points")
    xx = D.XX[i:, i:].copy() if D.lift == EXPLICIT else None
    return RoughDriver(t.copy(), x.copy(), D.gamma, D.H, D.lift, xx)


def save_csv(D: RoughDriver, path) -> None:
    """Write the driver as `time,X` rows at 17 significant digits."""
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write("time,X\n")
            for t, x in zip(D.times, D.X):
                fh.write(f"{t:.17g},{x:.17g}\n")
    except OSError as exc:
        raise IoError(str(path)) from exc
