"""Controlled rough paths over a scale, their norm, and smooth composition.

A controlled path is a grid-sampled pair (y, y') at index alpha whose
increments are described to first order by the driver,

    R^y_{t,s} = y_{t,s} - y'_s X_{t,s},

with the norm

    ||y,y'|| = ||y||_{inf,alpha} + ||y'||_{inf,alpha-gamma}
             + [y']_{gamma,alpha-2gamma}
             + [R^y]_{gamma,alpha-gamma} + [R^y]_{2gamma,alpha-2gamma},

all seminorms taken over grid pairs.  Values may live on the interior scale
(spectral coefficients) or on the two-point boundary (Euclidean norm); the
same machinery serves both.

Smooth maps into the boundary come in three closed built-ins: a linear trace
against fixed smooth weights, its tanh-squashed version (three bounded
derivatives, supplied analytically), and a constant.  ``lift_extrapolate``
chains composition, the Neumann/Dirichlet lift and the extrapolated generator
into the map (y, y') -> (A_{-sigma} N F(y), A_{-sigma} N (DF(y) o y')) at
index -eta; the sigma-extrapolation and the eta-extrapolation agree on lifted
data, so one spectral multiplier serves both components.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary_lift import BOUNDARY, lift_controlled, lift_matrix
from .errors import ConfigError, GridMismatch, ScaleIndexError
from .rough_driver import RoughDriver
from .spectral_scale import Scale, generator_coefficients

_INDEX_TOL = 1e-9


@dataclass(frozen=True)
class ControlledPath:
    """Grid-sampled controlled rough path (y, y') at scale index alpha."""

    times: np.ndarray
    y: np.ndarray
    y_prime: np.ndarray
    alpha: float
    gamma: float
    space: object = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if self.y.shape != self.y_prime.shape or self.y.shape[0] != t.size:
            raise ConfigError("controlled path arrays must share shape (n+1, dim)")
        t.setflags(write=False)
        self.y.setflags(write=False)
        self.y_prime.setflags(write=False)

    @property
    def n(self):
        return self.times.size - 1

    def value(self, i: int):
        return self.y[i]

    def remainder(self, i: int, j: int, D: RoughDriver):
        """R^y_{t_j, t_i} for grid indices i <= j."""
        return self.y[j] - self.y[i] - self.y_prime[i] * (D.X[j] - D.X[i])

    def restricted(self, stride: int, stop: int | None = None) -> "ControlledPath":
        stop_idx = self.n if stop is None else stop
        if stride < 1 or stop_idx % stride != 0:
            raise GridMismatch(f"stride {stride} does not divide the grid")
        sel = np.arange(0, stop_idx + 1, stride)
        return ControlledPath(self.times[sel].copy(), self.y[sel].copy(),
                              self.y_prime[sel].copy(), self.alpha, self.gamma,
                              self.space)

    def __sub__(self, other: "ControlledPath") -> "ControlledPath":
        if self.times.shape != other.times.shape or not np.allclose(
                self.times, other.times, rtol=0, atol=1e-12):
            raise GridMismatch("controlled paths live on different grids")
        return ControlledPath(self.times, self.y - other.y,
                              self.y_prime - other.y_prime, self.alpha,
                              self.gamma, self.space)

    def scaled(self, c: float) -> "ControlledPath":
        return ControlledPath(self.times, self.y * c, self.y_prime * c,
                              self.alpha, self.gamma, self.space)


def constant_path(times, value, zero_prime, alpha, gamma, space) -> ControlledPath:
    """Constant controlled path y = value, y' = zero_prime (usually zeros)."""
    m = np.asarray(times).size
    return ControlledPath(np.asarray(times, dtype=float).copy(),
                          np.tile(np.asarray(value, dtype=float), (m, 1)),
                          np.tile(np.asarray(zero_prime, dtype=float), (m, 1)),
                          alpha, gamma, space)


# -- seminorms ---------------------------------------------------------------

def sup_norm(space, values, alpha) -> float:
    return float(np.max(space.norm(values, alpha)))


def path_seminorm(space, times, values, alpha, exponent) -> float:
    """[h]_exponent at the given index: sup over grid pairs."""
    worst = 0.0
    n = times.size - 1
    h = (times[-1] - times[0]) / n
    for lag in range(1, n + 1):
        norms = space.norm(values[lag:] - values[:-lag], alpha)
        worst = max(worst, float(np.max(norms)) / (lag * h) ** exponent)
    return worst


def remainder_seminorm(space, times, y, y_prime, X, alpha, exponent) -> float:
    """[R^y]_exponent at the given index over all grid pairs."""
    worst = 0.0
    n = times.size - 1
    h = (times[-1] - times[0]) / n
    for lag in range(1, n + 1):
        dx = X[lag:] - X[:-lag]
        r = y[lag:] - y[:-lag] - y_prime[:-lag] * dx[:, None]
        worst = max(worst, float(np.max(space.norm(r, alpha))) / (lag * h) ** exponent)
    return worst


def _check_grid(P: ControlledPath, D: RoughDriver):
    if P.times.shape != D.times.shape or not np.allclose(
            P.times, D.times, rtol=0, atol=1e-12 * max(1.0, abs(D.T))):
        raise GridMismatch("path and driver grids differ")


def crp_norm(P: ControlledPath, D: RoughDriver) -> float:
    """The controlled-rough-path norm of (y, y'), seminorms over all grid pairs."""
    _check_grid(P, D)
    g = P.gamma
    a = P.alpha
    return (sup_norm(P.space, P.y, a)
            + sup_norm(P.space, P.y_prime, a - g)
            + path_seminorm(P.space, P.times, P.y_prime, a - 2 * g, g)
            + remainder_seminorm(P.space, P.times, P.y, P.y_prime, D.X, a - g, g)
            + remainder_seminorm(P.space, P.times, P.y, P.y_prime, D.X, a - 2 * g, 2 * g))


def crp_distance(P1: ControlledPath, P2: ControlledPath, D: RoughDriver,
                 stride: int = 1) -> float:
    """crp_norm of the difference path over a common driver.

    Over one driver the remainder is linear in (y, y'), so the difference of
    two controlled paths is itself controlled and the norm applies directly.
    A stride > 1 evaluates the norm on the subsampled grid (used by the
    Picard loop to bound per-iteration cost).
    """
    diff = P1 - P2
    if stride > 1:
        return crp_norm(diff.restricted(stride), D.restricted(stride))
    return crp_norm(diff, D)


# -- smooth maps into the boundary -------------------------------------------

class SmoothMap:
    """Interface contract: value/dvalue/d2value with analytic derivatives.

    domain_alpha is the scale index the map expects its argument at; delta2
    is the declared index gain, which must exceed eta + 1 + 1/p so that the
    lifted image lands in the strong-solution range of the boundary problem.
    """

    domain_alpha: float
    delta2: float

    def value(self, y_rows):
        raise NotImplementedError

    def dvalue(self, y_rows, h_rows):
        raise NotImplementedError

    def d2value(self, y_rows, h_rows, g_rows):
        raise NotImplementedError


class LinearTrace(SmoothMap):
    """v -> (<v, w0>, <v, w1>) against fixed finite-mode smooth weights."""

    def __init__(self, w0, w1, domain_alpha, delta2):
        self.w = np.stack([np.asarray(w0, dtype=float),
                           np.asarray(w1, dtype=float)], axis=1)
        self.domain_alpha = float(domain_alpha)
        self.delta2 = float(delta2)

    def value(self, y_rows):
        return np.asarray(y_rows, dtype=float) @ self.w

    def dvalue(self, y_rows, h_rows):
        return np.asarray(h_rows, dtype=float) @ self.w

    def d2value(self, y_rows, h_rows, g_rows):
        return np.zeros((np.asarray(y_rows).shape[0], 2))


class SquashedTrace(SmoothMap):
    """Componentwise bounded squasher on top of LinearTrace.

    F(v)_i = amp * tanh((<v, w_i> + bias_i) / amp); all three derivatives are
    bounded and supplied analytically (no automatic or numerical
    differentiation).  A nonzero bias keeps the origin from being an absorbing
    equilibrium of the multiplicative noise (tanh(0) = 0 would switch the
    boundary forcing off wherever the state crosses the kernel of the trace).
    """

    def __init__(self, w0, w1, amp, domain_alpha, delta2, bias=(0.0, 0.0)):
        if amp <= 0:
            raise ConfigError(f"squash amplitude must be positive, got {amp}")
        self.w = np.stack([np.asarray(w0, dtype=float),
                           np.asarray(w1, dtype=float)], axis=1)
        self.amp = float(amp)
        self.bias = np.array([float(bias[0]), float(bias[1])])
        self.domain_alpha = float(domain_alpha)
        self.delta2 = float(delta2)

    def _u(self, y_rows):
        return np.asarray(y_rows, dtype=float) @ self.w + self.bias

    def value(self, y_rows):
        return self.amp * np.tanh(self._u(y_rows) / self.amp)

    def dvalue(self, y_rows, h_rows):
        sech2 = 1.0 / np.cosh(self._u(y_rows) / self.amp) ** 2
        return sech2 * (np.asarray(h_rows, dtype=float) @ self.w)

    def d2value(self, y_rows, h_rows, g_rows):
        u = self._u(y_rows) / self.amp
        phi2 = (-2.0 / self.amp) * np.tanh(u) / np.cosh(u) ** 2
        return (phi2 * (np.asarray(h_rows, dtype=float) @ self.w)
                * (np.asarray(g_rows, dtype=float) @ self.w))

    @property
    def phi_second_bound(self):
        """sup |phi''| for phi(u) = amp tanh(u/amp): 4 / (3 sqrt(3) amp)."""
        return 4.0 / (3.0 * np.sqrt(3.0) * self.amp)


class ConstantBoundary(SmoothMap):
    """Constant boundary datum; the additive-noise diffusion selector."""

    def __init__(self, g0, g1, domain_alpha, delta2):
        self.g = np.array([float(g0), float(g1)])
        self.domain_alpha = float(domain_alpha)
        self.delta2 = float(delta2)

    def value(self, y_rows):
        return np.tile(self.g, (np.asarray(y_rows).shape[0], 1))

    def dvalue(self, y_rows, h_rows):
        return np.zeros((np.asarray(y_rows).shape[0], 2))

    def d2value(self, y_rows, h_rows, g_rows):
        return np.zeros((np.asarray(y_rows).shape[0], 2))


def default_trace_weights(scale: Scale, gain: float = 1.0):
    """Smooth endpoint-flavored weights with mu^{-2} decay, unit l2 norm x gain.

    These are the coefficients of the once-smoothed lift of unit data at each
    endpoint, the desk analogue of a lifting operator composed with the trace.
    """
    cols = lift_matrix(scale) / scale.mu[:, None]
    w = cols / np.linalg.norm(cols, axis=0, keepdims=True)
    return gain * w[:, 0], gain * w[:, 1]


def compose_smooth(F: SmoothMap, P: ControlledPath) -> ControlledPath:
    """(F(y), DF(y) o y') as a boundary-valued controlled path.

    The output index is the declared gain over the input index; the remainder
    picks up the second-order Taylor defect of F, which stays 2 gamma-Hoelder
    because D^2 F is bounded.
    """
    if abs(F.domain_alpha - P.alpha) > _INDEX_TOL:
        raise ScaleIndexError(
            f"map declared for index {F.domain_alpha}, path is at {P.alpha}")
    return ControlledPath(P.times, F.value(P.y), F.dvalue(P.y, P.y_prime),
                          P.alpha + F.delta2, P.gamma, BOUNDARY)


def lift_extrapolate(F: SmoothMap, P: ControlledPath, scale: Scale) -> ControlledPath:
    """(A_{-sigma} N F(y), A_{-sigma} N (DF(y) o y')) at index -eta.

    Composition raises the boundary index above the strong-solution threshold,
    the lift lands at eps = 1 - eta, and the extrapolated generator drops by
    one; on lifted data A_{-eta} and A_{-sigma} share the spectral multiplier.
    """
    lifted = lift_controlled(compose_smooth(F, P), scale)
    return ControlledPath(lifted.times,
                          generator_coefficients(scale, lifted.y),
                          generator_coefficients(scale, lifted.y_prime),
                          scale.eps - 1.0, P.gamma, scale)


def diffusion_rows(F: SmoothMap, scale: Scale, y_rows):
    """G(y) = A_{-sigma} N F(y) evaluated rowwise on raw coefficient arrays."""
    return generator_coefficients(scale, F.value(y_rows) @ lift_matrix(scale).T)


def diffusion_derivative_rows(F: SmoothMap, scale: Scale, y_rows, h_rows):
    """DG(y)[h] = A_{-sigma} N (DF(y)[h]) rowwise."""
    return generator_coefficients(scale, F.dvalue(y_rows, h_rows) @ lift_matrix(scale).T)
