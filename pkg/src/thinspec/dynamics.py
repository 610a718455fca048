"""Zero-mode spectra, order-parameter evolution and Husimi Q fields.

Internal units: hbar = 1, energies in units of u_tilde = u0/V, time in
units of hbar/u_tilde (written tau).  SI conversion happens only in
:func:`derive_params` and in the CLI.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import constants

from .states import FockVector, NumberEnsemble

HBAR = constants.hbar
K_B = constants.k

COLLAPSE_LEVEL = math.exp(-0.5)

U1 = "u1"
ZERO_MODE = "zero-mode"

_TIME_CHUNK = 256


class NonPhysical(ValueError):
    """A physical input is nonpositive."""


class TruncationMismatch(ValueError):
    """The spectrum does not cover the state's number truncation."""


class GridTooSmall(ValueError):
    """A phase-space grid does not cover the state's support."""


class NoCollapse(ValueError):
    """The coherence never drops below the collapse threshold on the grid."""


@dataclass(frozen=True)
class PhysicalParams:
    a_s: float
    M: float
    a_ho: float
    omega_tr: float
    rho: float
    N: float
    V: float
    u0: float
    u_tilde: float
    N_eff: float
    mu: float

    def seconds(self, tau):
        """Convert dimensionless time (units hbar/u_tilde) to seconds."""
        return np.asarray(tau) * HBAR / self.u_tilde

    def beta_tilde(self, temperature: float) -> float:
        """u_tilde / (k_B T): inverse temperature in units of 1/u_tilde."""
        if temperature <= 0:
            return math.inf
        return self.u_tilde / (K_B * temperature)


def derive_params(a_s: float, M: float, omega_tr: float, rho: float, N: float) -> PhysicalParams:
    """Derived couplings from SI inputs.

    ``mu`` is set to u_tilde * N, the value that makes |z|^2 = N minimize
    the coherent-state free energy.
    """
    for name, value in (("a_s", a_s), ("M", M), ("omega_tr", omega_tr), ("rho", rho), ("N", N)):
        if not (value > 0 and math.isfinite(value)):
            raise NonPhysical(f"{name} must be positive and finite, got {value!r}")
    a_ho = math.sqrt(HBAR / (M * omega_tr))
    V = N / rho
    u0 = 4.0 * math.pi * a_s * HBAR**2 / M
    u_tilde = u0 / V
    return PhysicalParams(
        a_s=a_s,
        M=M,
        a_ho=a_ho,
        omega_tr=omega_tr,
        rho=rho,
        N=N,
        V=V,
        u0=u0,
        u_tilde=u_tilde,
        N_eff=rho * a_ho**2 * a_s,
        mu=u_tilde * N,
    )


def params_from_trap_length(a_s: float, a_ho: float, rho: float, N: float, omega_tr: float) -> PhysicalParams:
    """derive_params with the mass fixed by a_ho = sqrt(hbar / (M omega_tr))."""
    if not (a_ho > 0 and omega_tr > 0):
        raise NonPhysical(f"a_ho and omega_tr must be positive, got {a_ho!r}, {omega_tr!r}")
    return derive_params(a_s, HBAR / (a_ho**2 * omega_tr), omega_tr, rho, N)


def collapse_time_estimate(p: PhysicalParams) -> float:
    """sqrt(N) / (4 pi N_eff omega_tr), in seconds."""
    return math.sqrt(p.N) / (4.0 * math.pi * p.N_eff * p.omega_tr)


@dataclass(frozen=True)
class Spectrum:
    energies: np.ndarray
    mu_in_utilde: float = 0.0
    convention: str = U1

    def __post_init__(self):
        e = np.array(self.energies, dtype=float)
        e.flags.writeable = False
        object.__setattr__(self, "energies", e)

    @classmethod
    def u1(cls, n_max: int, mu_over_u: float = 0.0) -> "Spectrum":
        """E_n = (n^2 - n)/2 - mu n, the U(1) Hamiltonian with chemical potential."""
        n = np.arange(n_max + 1, dtype=float)
        return cls((n * n - n) / 2.0 - mu_over_u * n, float(mu_over_u), U1)

    @classmethod
    def zero_mode(cls, n_max: int) -> "Spectrum":
        """E_n = (n^2 - n)/2 without chemical potential, so E_0 = E_1 = 0."""
        n = np.arange(n_max + 1, dtype=float)
        return cls((n * n - n) / 2.0, 0.0, ZERO_MODE)

    @property
    def n_max(self) -> int:
        return self.energies.size - 1


@dataclass(frozen=True)
class DecaySeries:
    times: np.ndarray
    values: np.ndarray
    collapse_time: float | None = None
    revival_time: float | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d and equally long")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)


@dataclass(frozen=True)
class QField:
    grid_re: np.ndarray
    grid_im: np.ndarray
    values: np.ndarray  # shape (len(grid_im), len(grid_re))

    @property
    def cell_area(self) -> float:
        return float((self.grid_re[1] - self.grid_re[0]) * (self.grid_im[1] - self.grid_im[0]))

    def normalization(self) -> float:
        return float(self.values.sum() * self.cell_area)


def _check_times(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("times must be a nonempty 1-d array")
    return t


def _phase_sum(coeffs: np.ndarray, freqs: np.ndarray, times: np.ndarray) -> np.ndarray:
    """sum_n coeffs[n] exp(i freqs[n] t) for each t, ascending-n pairwise sums."""
    out = np.empty(times.size, dtype=complex)
    for start in range(0, times.size, _TIME_CHUNK):
        t = times[start : start + _TIME_CHUNK]
        out[start : start + t.size] = np.sum(coeffs[None, :] * np.exp(1j * np.outer(t, freqs)), axis=1)
    return out


def _with_lifetimes(times, values) -> DecaySeries:
    series = DecaySeries(times, values)
    if series.magnitudes[0] == 0:
        return series
    try:
        tc = extract_collapse_time(series)
    except NoCollapse:
        return series
    tr = extract_revival_time(series, tc)
    return DecaySeries(series.times, series.values, tc, tr)


def order_parameter_coherent_exact(N: float, mu_over_u: float, times) -> DecaySeries:
    """sqrt(N) exp(N (e^{-i tau} - 1)) e^{i mu tau} in closed form."""
    if not N > 0:
        raise ValueError(f"N must be positive, got {N}")
    t = _check_times(times)
    values = math.sqrt(N) * np.exp(N * np.expm1(-1j * t)) * np.exp(1j * mu_over_u * t)
    return _with_lifetimes(t, values)


def order_parameter_short_time(N: float, mu_over_u: float, times) -> DecaySeries:
    """Gaussian-envelope approximation sqrt(N) e^{i mu tau} e^{-i N tau} e^{-N tau^2 / 2}."""
    if not N > 0:
        raise ValueError(f"N must be positive, got {N}")
    t = _check_times(times)
    values = math.sqrt(N) * np.exp(1j * (mu_over_u - N) * t) * np.exp(-0.5 * N * t * t)
    return _with_lifetimes(t, values)


def _offdiag_coefficients(state: FockVector) -> np.ndarray:
    a = state.amplitudes
    return np.sqrt(np.arange(1, a.size)) * np.conj(a[:-1]) * a[1:]


def _spectrum_gaps(spectrum: Spectrum, n_terms: int) -> np.ndarray:
    if spectrum.energies.size < n_terms + 1:
        raise TruncationMismatch(
            f"spectrum has {spectrum.energies.size} levels, state needs {n_terms + 1}"
        )
    e = spectrum.energies[: n_terms + 1]
    return e[:-1] - e[1:]


def order_parameter_series(state: FockVector, spectrum: Spectrum, times) -> DecaySeries:
    """<a(t)> = sum_n sqrt(n+1) A_n^* A_{n+1} exp(i (E_n - E_{n+1}) t)."""
    t = _check_times(times)
    coeffs = _offdiag_coefficients(state)
    if coeffs.size == 0:
        return _with_lifetimes(t, np.zeros(t.size, dtype=complex))
    return _with_lifetimes(t, _phase_sum(coeffs, _spectrum_gaps(spectrum, coeffs.size), t))


def ensemble_coherences(ens: NumberEnsemble) -> np.ndarray:
    """rho_{m+1,m} sqrt(m+1) summed over members, the weights already normalized."""
    size = max(s.amplitudes.size for s in ens.states)
    acc = np.zeros(max(size - 1, 1), dtype=complex)
    for w, s in ens.members:
        c = _offdiag_coefficients(s)
        acc[: c.size] += w * c
    return acc


def order_parameter_thermal_coherent(ens: NumberEnsemble, spectrum: Spectrum, times) -> DecaySeries:
    """<a(t)> = Tr(rho a(t)) for a Boltzmann mixture of displaced number states.

    Uses sum_m rho_{m+1,m} sqrt(m+1) exp(-i (E_{m+1} - E_m) t), with
    rho_{m+1,m} = sum_n w_n C_{m+1}(n, alpha) C_m^*(n, alpha).
    """
    if ens.label not in ("thermal", "thermal-coherent"):
        raise ValueError(f"expected a thermal or thermal-coherent ensemble, got {ens.label!r}")
    t = _check_times(times)
    coeffs = ensemble_coherences(ens)
    return _with_lifetimes(t, _phase_sum(coeffs, _spectrum_gaps(spectrum, coeffs.size), t))


def extract_collapse_time(series: DecaySeries) -> float:
    """First time |<a>|/|<a>(0)| drops below e^{-1/2}, linearly interpolated."""
    mags = series.magnitudes
    if mags[0] <= 0:
        raise ValueError("initial value must be nonzero")
    ratio = mags / mags[0]
    below = np.flatnonzero(ratio < COLLAPSE_LEVEL)
    if below.size == 0:
        raise NoCollapse(f"ratio stays above e^-1/2 up to t={series.times[-1]}")
    k = int(below[0])
    t0, t1 = series.times[k - 1], series.times[k]
    r0, r1 = ratio[k - 1], ratio[k]
    return float(t0 + (r0 - COLLAPSE_LEVEL) * (t1 - t0) / (r0 - r1))


def extract_revival_time(series: DecaySeries, collapse_time: float | None = None) -> float | None:
    """Time of the first peak after the order parameter climbs back above e^{-1/2}."""
    if collapse_time is None:
        collapse_time = extract_collapse_time(series)
    ratio = series.magnitudes / series.magnitudes[0]
    after = series.times > collapse_time
    idx = np.flatnonzero(after & (ratio < COLLAPSE_LEVEL))
    if idx.size == 0:
        return None
    back = np.flatnonzero((np.arange(ratio.size) > idx[0]) & (ratio >= COLLAPSE_LEVEL))
    if back.size == 0:
        return None
    start = int(back[0])
    down = np.flatnonzero((np.arange(ratio.size) > start) & (ratio < COLLAPSE_LEVEL))
    stop = int(down[0]) if down.size else ratio.size
    return float(series.times[start + int(np.argmax(ratio[start:stop]))])


# --- Husimi Q -----------------------------------------------------------------

def _husimi_pure(amplitudes: np.ndarray, gammas: np.ndarray) -> np.ndarray:
    """|<gamma|psi>|^2 / pi via b_{n+1} = b_n gamma^* / sqrt(n+1)."""
    g2 = np.abs(gammas) ** 2
    if g2.max() / 2 > 700:
        raise GridTooSmall("grid extends past |gamma| ~ 37; scaled overlaps not supported")
    gc = np.conj(gammas)
    b = np.exp(-0.5 * g2).astype(complex)
    acc = np.zeros(gammas.shape, dtype=complex)
    for n, amp in enumerate(amplitudes):
        if amp != 0:
            acc += b * amp
        b = b * gc / math.sqrt(n + 1)
    return (acc.real**2 + acc.imag**2) / math.pi


def _members(state_or_ensemble):
    if isinstance(state_or_ensemble, NumberEnsemble):
        return state_or_ensemble.members
    return ((1.0, state_or_ensemble),)


def husimi_on_points(state_or_ensemble, spectrum: Spectrum, t: float, gammas) -> np.ndarray:
    """Q(gamma, t) at arbitrary complex points."""
    gammas = np.asarray(gammas, dtype=complex)
    q = np.zeros(gammas.shape)
    for w, s in _members(state_or_ensemble):
        if spectrum.energies.size < s.amplitudes.size:
            raise TruncationMismatch("spectrum shorter than state truncation")
        q += w * _husimi_pure(s.evolve(spectrum.energies, t).amplitudes, gammas)
    return q


def _mean_number(state_or_ensemble) -> float:
    return math.fsum(w * s.mean_number() for w, s in _members(state_or_ensemble))


def default_grid(state_or_ensemble, points: int = 201):
    """Square grid spanning +-(sqrt(<n>) + 5) on both axes."""
    half = math.sqrt(_mean_number(state_or_ensemble)) + 5.0
    axis = np.linspace(-half, half, points)
    return axis, axis.copy()


def husimi_q(state_or_ensemble, spectrum: Spectrum, t: float, grid=None) -> QField:
    """Q-function of the evolved state on a rectangular grid.

    Raises GridTooSmall when the Riemann-sum normalization misses one by
    more than 1e-2.
    """
    if grid is None:
        grid = default_grid(state_or_ensemble)
    re_axis, im_axis = (np.asarray(g, dtype=float) for g in grid)
    gammas = re_axis[None, :] + 1j * im_axis[:, None]
    field = QField(re_axis, im_axis, husimi_on_points(state_or_ensemble, spectrum, t, gammas))
    norm = field.normalization()
    if abs(norm - 1.0) > 1e-2:
        raise GridTooSmall(f"Q integrates to {norm:.4f} on the grid")
    return field


@dataclass(frozen=True)
class RingProfile:
    radius: float
    angles: np.ndarray
    values: np.ndarray

    @property
    def coefficient_of_variation(self) -> float:
        return float(np.std(self.values) / np.mean(self.values))


def ring_profile(
    state_or_ensemble,
    spectrum: Spectrum,
    t: float,
    n_radii: int = 400,
    n_angles: int = 720,
) -> RingProfile:
    """Q sampled around the circle carrying the most radial mass.

    The radius maximizes r * <Q(r, theta)>_theta on a polar grid out to
    sqrt(<n>) + 5.
    """
    r_max = math.sqrt(_mean_number(state_or_ensemble)) + 5.0
    radii = np.linspace(r_max / n_radii, r_max, n_radii)
    angles = np.linspace(0.0, 2 * math.pi, n_angles, endpoint=False)
    gammas = radii[:, None] * np.exp(1j * angles)[None, :]
    q = husimi_on_points(state_or_ensemble, spectrum, t, gammas)
    k = int(np.argmax(radii * q.mean(axis=1)))
    return RingProfile(float(radii[k]), angles, q[k])


def uniform_times(t_max: float, n_points: int = 2000) -> np.ndarray:
    if not (t_max > 0 and n_points >= 2):
        raise ValueError(f"empty time window: t_max={t_max}, n_points={n_points}")
    return np.linspace(0.0, t_max, n_points)
