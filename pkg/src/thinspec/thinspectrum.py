"""Off-diagonal decay of a reduced density matrix traced over a thin spectrum.

Every closed-form law here comes with a discrete-sum oracle that evaluates
the same trace term by term.  All magnitudes are normalized to one at
t = 0, which removes the unspecified proportionality constants.

Collapse times use the same e^{-1/2} threshold as
:func:`thinspec.dynamics.extract_collapse_time`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import brentq

from .dynamics import COLLAPSE_LEVEL, HBAR, K_B
from .states import ENSEMBLE_CUTOFF, DEFAULT_TOL, thermal_ensemble

_E2_MINUS_1 = math.expm1(2.0)


class GridTooCoarse(ValueError):
    """The momentum grid is too narrow or too sparse for the thermal width."""


class WindowTooNarrow(ValueError):
    """The number window truncates non-negligible Boltzmann weight."""


class MTooLarge(ValueError):
    """Quasi-particle number outside the m << N0 regime."""


def beta_from_temperature(temperature: float) -> float:
    """1 / (k_B T) in 1/J."""
    if not temperature > 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    return 1.0 / (K_B * temperature)


@dataclass(frozen=True)
class ThinSpectrumModel:
    """p^2/2I thin spectrum whose inertia shifts to I(1 + delta) on excitation."""

    inertia: float
    delta: float
    epsilon: float
    beta: float
    hbar: float = HBAR

    def __post_init__(self):
        if not self.inertia > 0:
            raise ValueError(f"inertia must be positive, got {self.inertia}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not abs(self.delta) < 1:
            raise ValueError(f"|delta| must be < 1, got {self.delta}")

    @property
    def collapse_scale(self) -> float:
        """hbar beta / |delta|, i.e. hbar / (k_B T delta)."""
        if self.delta == 0:
            return math.inf
        return self.hbar * self.beta / abs(self.delta)

    def thermal_width(self) -> float:
        return math.sqrt(self.inertia / self.beta)


@dataclass(frozen=True)
class CondensateLevels:
    """Zero-mode number n plus m quasi-particles in one k mode.

    E_m^{(n)} = u0rho0 n^2 / (2 (N0 - m)) - u0rho0 n + m omega.
    """

    N0: float
    u0rho0: float
    omega: float
    beta: float
    hbar: float = HBAR

    def __post_init__(self):
        if not self.N0 >= 1:
            raise ValueError(f"N0 must be >= 1, got {self.N0}")
        if not self.u0rho0 > 0:
            raise ValueError(f"u0rho0 must be positive, got {self.u0rho0}")
        if not self.omega >= 0:
            raise ValueError(f"omega must be nonnegative, got {self.omega}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")

    def energy(self, n, m: int = 0):
        if not m < self.N0:
            raise ValueError(f"m={m} must stay below N0={self.N0}")
        n = np.asarray(n, dtype=float)
        return self.u0rho0 * n * n / (2.0 * (self.N0 - m)) - self.u0rho0 * n + m * self.omega

    @property
    def coupling(self) -> float:
        """beta N0 u0rho0: the dimensionless weight of the Gaussian factor."""
        return self.beta * self.N0 * self.u0rho0

    def thermal_width(self) -> float:
        """Standard deviation of n in exp(-beta E_0^{(n)})."""
        if math.isinf(self.beta):
            return 0.0
        return math.sqrt(self.N0 / (self.beta * self.u0rho0))

    def collapse_scale(self, m: int = 1) -> float:
        """hbar N0 beta / m, i.e. hbar N0 / (m k_B T)."""
        return self.hbar * self.N0 * self.beta / m


@dataclass(frozen=True)
class OffDiagSeries:
    times: np.ndarray
    magnitudes: np.ndarray
    collapse_time: float
    collapse_scale: float = math.nan

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.magnitudes, dtype=float)
        if t.shape != m.shape or t.ndim != 1:
            raise ValueError("times and magnitudes must be 1-d and equally long")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "magnitudes", m)


def _times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a nonempty 1-d array")
    return t


def _grid_crossing(times: np.ndarray, mags: np.ndarray) -> float:
    below = np.flatnonzero(mags < COLLAPSE_LEVEL)
    if below.size == 0 or below[0] == 0:
        return math.inf
    k = int(below[0])
    t0, t1, r0, r1 = times[k - 1], times[k], mags[k - 1], mags[k]
    return float(t0 + (r0 - COLLAPSE_LEVEL) * (t1 - t0) / (r0 - r1))


def _fsum_phases(weights: np.ndarray, phase_rates: np.ndarray, times: np.ndarray) -> np.ndarray:
    """|sum_j w_j exp(-i r_j t)| / |sum_j w_j| with exactly rounded sums."""
    norm = math.fsum(weights.tolist())
    out = np.empty(times.size)
    for k, t in enumerate(times):
        ph = phase_rates * t
        re = math.fsum((weights * np.cos(ph)).tolist())
        im = math.fsum((weights * np.sin(ph)).tolist())
        out[k] = math.hypot(re, im) / norm
    return out


def _root(func, t_guess: float) -> float:
    """First t > 0 with func(t) = e^{-1/2}, for func decreasing from 1."""
    hi = t_guess
    for _ in range(200):
        if func(hi) < COLLAPSE_LEVEL:
            break
        hi *= 2.0
    else:
        return math.inf
    return brentq(lambda t: func(t) - COLLAPSE_LEVEL, 0.0, hi, xtol=1e-14 * hi, rtol=1e-13)


# --- two-state system ----------------------------------------------------------

def reduced_offdiag_two_state(model: ThinSpectrumModel, times) -> OffDiagSeries:
    """Closed form |rho_od(t)| / |rho_od(0)| = (1 + 16 t^2 delta^2 / beta^2 hbar^2)^{-1/4}.

    ``collapse_time`` is the e^{-1/2} crossing of this law;
    ``collapse_scale`` is hbar beta / delta.
    """
    t = _times(times)
    x = 4.0 * model.delta * t / (model.beta * model.hbar)
    mags = (1.0 + x * x) ** -0.25
    if model.delta == 0:
        tc = math.inf
    else:
        tc = math.sqrt(_E2_MINUS_1) * model.beta * model.hbar / (4.0 * abs(model.delta))
    return OffDiagSeries(t, mags, tc, model.collapse_scale)


def effective_delta(model: ThinSpectrumModel) -> float:
    """Gap curvature shift delta / (1 + delta) from E_1 - E_0 = -delta p^2 / (2 I (1 + delta))."""
    return model.delta / (1.0 + model.delta)


def reduced_offdiag_two_state_exact(model: ThinSpectrumModel, times) -> OffDiagSeries:
    """Gaussian integral of the trace with E_1 = epsilon + p^2 / (2 I (1 + delta)).

    Gives (1 + (delta' t / beta hbar)^2)^{-1/4}, delta' = delta / (1 + delta).
    """
    t = _times(times)
    d = effective_delta(model)
    x = d * t / (model.beta * model.hbar)
    mags = (1.0 + x * x) ** -0.25
    tc = math.inf if d == 0 else math.sqrt(_E2_MINUS_1) * model.beta * model.hbar / abs(d)
    return OffDiagSeries(t, mags, tc, model.collapse_scale)


def default_p_grid(model: ThinSpectrumModel, widths: float = 8.0, points: int = 4001) -> np.ndarray:
    w = model.thermal_width()
    return np.linspace(-widths * w, widths * w, points)


def reduced_offdiag_two_state_oracle(model: ThinSpectrumModel, p_grid=None, times=None) -> OffDiagSeries:
    """Direct sum over a uniform p grid of exp(-beta E_0) exp(-i (E_1 - E_0) t / hbar).

    E_0 = p^2 / 2I and E_1 = epsilon + p^2 / (2 I (1 + delta)); the constant
    epsilon only contributes a global phase and is dropped.
    """
    if times is None:
        raise ValueError("times are required")
    t = _times(times)
    p = default_p_grid(model) if p_grid is None else np.asarray(p_grid, dtype=float)
    w = model.thermal_width()
    if p.size < 2000:
        raise GridTooCoarse(f"p grid has {p.size} points, need >= 2000")
    if p.min() > -8 * w * (1 - 1e-12) or p.max() < 8 * w * (1 - 1e-12):
        raise GridTooCoarse(f"p grid [{p.min():.3g}, {p.max():.3g}] misses +-8 thermal widths ({w:.3g})")
    e0 = p * p / (2.0 * model.inertia)
    e1 = p * p / (2.0 * model.inertia * (1.0 + model.delta))
    weights = np.exp(-model.beta * e0)
    mags = _fsum_phases(weights, (e1 - e0) / model.hbar, t)
    return OffDiagSeries(t, mags, _grid_crossing(t, mags), model.collapse_scale)


class DeltaEstimate(NamedTuple):
    exact: float
    linearized: float


def delta_thomas_fermi(N: float, dN: float) -> DeltaEstimate:
    """Inertia shift from I ~ N^{2/5}: ((N+dN)^{2/5} - N^{2/5}) / N^{2/5} and 2 dN / 5N."""
    if not N > 0:
        raise ValueError(f"N must be positive, got {N}")
    if dN < 0:
        raise ValueError(f"dN must be nonnegative, got {dN}")
    exact = math.expm1(0.4 * math.log1p(dN / N))
    return DeltaEstimate(exact, 0.4 * dN / N)


def two_state_collapse_scale(temperature: float, delta: float) -> float:
    """hbar / (k_B T delta) in seconds."""
    return HBAR / (K_B * temperature * delta)


# --- Bogoliubov quasi-particles ------------------------------------------------

def bogoliubov_omega(E_k: float, u0rho0: float) -> float:
    """sqrt(eps_k^2 - (u0 rho0)^2) with eps_k = E_k + u0 rho0, written as sqrt(E_k (E_k + 2 u0 rho0))."""
    if E_k < 0 or u0rho0 < 0:
        raise ValueError("E_k and u0rho0 must be nonnegative")
    if u0rho0 == 0:
        return float(E_k)
    # split root so tiny E_k does not underflow in the product
    return math.sqrt(E_k) * math.sqrt(E_k + 2.0 * u0rho0)


def quasiparticle_decay_law(x, coupling: float):
    """Normalized |rho_od| = (1 + x^2)^{-1/4} exp(-g x^2 / (2 (1 + x^2))).

    ``x`` is time over the thermal scale and ``g = beta N0 u0rho0``; the
    square of this is the familiar exp(g / (1 + x^2)) / sqrt(1 + x^2) up to
    its t = 0 value.
    """
    x = np.asarray(x, dtype=float)
    x2 = x * x
    return (1.0 + x2) ** -0.25 * np.exp(-0.5 * coupling * x2 / (1.0 + x2))


def _x_per_time(levels: CondensateLevels, m: int) -> float:
    # Gaussian integral of the n-sum: A(t) = A0 (1 + i x), x = m t / (hbar beta (N0 - m))
    return m / (levels.hbar * levels.beta * (levels.N0 - m))


def _check_m(levels: CondensateLevels, m: int) -> int:
    m = int(m)
    if m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    if m >= levels.N0 / 10:
        raise MTooLarge(f"m={m} is not << N0={levels.N0} (need m < N0/10)")
    return m


def quasiparticle_collapse_time_closed(levels: CondensateLevels, m: int = 1) -> float:
    """e^{-1/2} crossing of the continuum law, solved to machine precision."""
    m = _check_m(levels, m)
    g = levels.coupling
    x_star = _root(lambda x: float(quasiparticle_decay_law(x, g)), 1.0)
    return x_star / _x_per_time(levels, m)


def quasiparticle_offdiag_thermal(levels: CondensateLevels, times, m: int = 1) -> OffDiagSeries:
    """Continuum (Gaussian-integral) decay of the |n,0><n,m| coherence.

    The n-sum is extended over the whole real line; the curvature of
    E_m - E_0 in n is kept exactly, u0rho0 m / (2 N0 (N0 - m)).
    """
    m = _check_m(levels, m)
    t = _times(times)
    mags = quasiparticle_decay_law(t * _x_per_time(levels, m), levels.coupling)
    return OffDiagSeries(t, mags, quasiparticle_collapse_time_closed(levels, m), levels.collapse_scale(m))


def number_window(levels: CondensateLevels, sigmas: float = 9.0) -> np.ndarray:
    """Integers n >= 0 within +-sigmas thermal widths of N0."""
    if math.isinf(levels.beta):
        return np.array([int(round(levels.N0))])
    half = int(math.ceil(sigmas * levels.thermal_width())) + 1
    lo = max(0, int(math.floor(levels.N0)) - half)
    hi = int(math.ceil(levels.N0)) + half
    return np.arange(lo, hi + 1)


def _thermal_weights(levels: CondensateLevels, n: np.ndarray) -> np.ndarray:
    if math.isinf(levels.beta):
        return np.ones(n.size)
    # E_0^{(n)} relative to its continuum minimum at n = N0
    return np.exp(-levels.beta * levels.u0rho0 * (n - levels.N0) ** 2 / (2.0 * levels.N0))


def quasiparticle_offdiag_thermal_oracle(
    levels: CondensateLevels, times, m: int = 1, sigmas: float = 9.0
) -> OffDiagSeries:
    """Discrete sum over n >= 0 of exp(-beta E_0^{(n)}) exp(-i (E_m^{(n)} - E_0^{(n)}) t / hbar)."""
    t = _times(times)
    n = number_window(levels, sigmas)
    w = _thermal_weights(levels, n)
    edge = max(w[-1], w[0] if n[0] > 0 else 0.0)
    if n.size > 1 and edge > 1e-14 * w.max():
        raise WindowTooNarrow(f"edge weight {edge / w.max():.2e} of maximum exceeds 1e-14")
    gap = levels.energy(n, m) - levels.energy(n, 0) - m * levels.omega
    mags = _fsum_phases(w, gap / levels.hbar, t)
    return OffDiagSeries(t, mags, _grid_crossing(t, mags), levels.collapse_scale(m))


def _oracle_magnitude(levels: CondensateLevels, m: int, sigmas: float):
    n = number_window(levels, sigmas)
    w = _thermal_weights(levels, n)
    rate = (levels.energy(n, m) - levels.energy(n, 0) - m * levels.omega) / levels.hbar
    return lambda t: float(_fsum_phases(w, rate, np.array([t]))[0])


def quasiparticle_collapse_scaling(levels: CondensateLevels, m: int, sigmas: float = 9.0) -> float:
    """Collapse time of the |n,0> <-> |n,m> coherence from the discrete-n oracle."""
    m = _check_m(levels, m)
    guess = min(quasiparticle_collapse_time_closed(levels, m), levels.collapse_scale(m)) * 0.5
    return _root(_oracle_magnitude(levels, m, sigmas), guess)


def quasiparticle_offdiag_thermal_coherent(
    levels: CondensateLevels,
    alpha: complex,
    times,
    m: int = 1,
    tol: float = DEFAULT_TOL,
) -> OffDiagSeries:
    """Thermal-coherent zero mode: sum_{n,l} w_n |C_l(n, alpha)|^2 exp(-i (E_m^{(l)} - E_0^{(l)}) t).

    The thin-spectrum label l runs over the number distribution of the
    displaced members D(alpha)|n>.
    """
    m = _check_m(levels, m)
    t = _times(times)
    top = number_window(levels)[-1]
    energies = levels.energy(np.arange(top + 1), 0)
    ens = thermal_ensemble(levels.beta, energies, alpha, tol)
    size = max(s.amplitudes.size for s in ens.states)
    occupation = np.zeros(size)
    for w, s in ens.members:
        occupation[: s.amplitudes.size] += w * s.probabilities
    keep = np.flatnonzero(occupation > ENSEMBLE_CUTOFF * occupation.max())
    l = keep.astype(float)
    gap = levels.energy(l, m) - levels.energy(l, 0) - m * levels.omega
    mags = _fsum_phases(occupation[keep], gap / levels.hbar, t)
    return OffDiagSeries(t, mags, _grid_crossing(t, mags), levels.collapse_scale(m))


# --- several broken symmetries -------------------------------------------------

def combine_collapse_times(times: Sequence[float]) -> float:
    """(sum_i 1 / t_i)^{-1}."""
    times = [float(x) for x in times]
    if not times or any(not x > 0 for x in times):
        raise ValueError("collapse times must be positive")
    # scaled by the shortest time so equal inputs combine exactly
    ref = min(times)
    return ref / math.fsum(ref / x for x in times)


def multi_symmetry_offdiag(models: Sequence[ThinSpectrumModel], times, points: int = 401):
    """Joint two-mode p-sum and its single-mode marginals.

    Returns ``(joint, marginals)``: the joint series is the brute-force sum
    over the (p1, p2) product grid, each marginal the 1-d sum on the same
    axis.
    """
    if len(models) != 2:
        raise ValueError("exactly two thin spectra are supported")
    t = _times(times)
    axes, weights, rates = [], [], []
    for model in models:
        p = default_p_grid(model, points=points)
        e0 = p * p / (2.0 * model.inertia)
        e1 = p * p / (2.0 * model.inertia * (1.0 + model.delta))
        axes.append(p)
        weights.append(np.exp(-model.beta * e0))
        rates.append((e1 - e0) / model.hbar)
    w2 = np.outer(weights[0], weights[1]).ravel()
    r2 = np.add.outer(rates[0], rates[1]).ravel()
    joint_mags = _fsum_phases(w2, r2, t)
    marginals = []
    for model, w, r in zip(models, weights, rates):
        mags = _fsum_phases(w, r, t)
        marginals.append(OffDiagSeries(t, mags, _grid_crossing(t, mags), model.collapse_scale))
    joint = OffDiagSeries(t, joint_mags, _grid_crossing(t, joint_mags), combine_collapse_times(
        [mdl.collapse_scale for mdl in models]))
    return joint, marginals
