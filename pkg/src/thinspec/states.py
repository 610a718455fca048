"""Truncated Fock-basis representations of the condensate-mode states.

Coherent, squeezed-coherent and displaced number states are built from
their closed-form number expansions (never from operator exponentials),
with every factorial/exponential product evaluated in log space.  Thermal
and thermal-coherent density matrices are kept as Boltzmann-weighted
mixtures of pure members rather than dense matrices.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .specfun import _LOG_RESCALE, _RESCALE, laguerre_assoc_scaled, log_factorials

DEFAULT_TOL = 1e-12
MIN_TOL = 1e-14
MAX_TOL = 1e-3
ENSEMBLE_CUTOFF = 1e-12
_ZETA_DEGENERATE = 1e-14


class TolUnreachable(ValueError):
    """Requested truncation tolerance is below double resolution."""


class DivergentPartition(ValueError):
    """Boltzmann weights do not decay within the supplied energy range."""


def _fsum_sq(amplitudes: np.ndarray) -> float:
    return math.fsum((amplitudes.real**2 + amplitudes.imag**2).tolist())


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over |0>..|n_max> plus the probability mass cut off."""

    amplitudes: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0:
            raise ValueError("amplitudes must be a nonempty 1-d sequence")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)
        if self.tail_mass < 0:
            raise ValueError("tail_mass must be nonnegative")

    @property
    def n_max(self) -> int:
        return self.amplitudes.size - 1

    @property
    def probabilities(self) -> np.ndarray:
        return self.amplitudes.real**2 + self.amplitudes.imag**2

    def norm_sq(self) -> float:
        return _fsum_sq(self.amplitudes)

    def mean_number(self) -> float:
        return math.fsum((np.arange(self.amplitudes.size) * self.probabilities).tolist())

    def number_variance(self) -> float:
        n = np.arange(self.amplitudes.size)
        p = self.probabilities
        mean = math.fsum((n * p).tolist())
        return math.fsum((n * n * p).tolist()) - mean * mean

    def annihilation_mean(self) -> complex:
        """<a> = sum_n sqrt(n+1) A_n^* A_{n+1}."""
        a = self.amplitudes
        c = np.sqrt(np.arange(1, a.size)) * np.conj(a[:-1]) * a[1:]
        return complex(math.fsum(c.real.tolist()), math.fsum(c.imag.tolist()))

    def inner(self, other: "FockVector") -> complex:
        """<self|other> over the common support."""
        n = min(self.amplitudes.size, other.amplitudes.size)
        c = np.conj(self.amplitudes[:n]) * other.amplitudes[:n]
        return complex(math.fsum(c.real.tolist()), math.fsum(c.imag.tolist()))

    def evolve(self, energies, t: float) -> "FockVector":
        """Apply exp(-i E_n t) to each amplitude (hbar = 1)."""
        energies = np.asarray(energies, dtype=float)
        if energies.size < self.amplitudes.size:
            raise ValueError("spectrum shorter than state truncation")
        phases = np.exp(-1j * energies[: self.amplitudes.size] * t)
        return FockVector(self.amplitudes * phases, self.tail_mass)


def _zeta_from_gamma(gamma: complex) -> complex:
    g = abs(gamma)
    if g == 0:
        return 0j
    return gamma * math.tanh(g) / g


@dataclass(frozen=True)
class SqueezeSpec:
    """Displacement ``alpha`` and squeeze argument ``gamma``.

    ``zeta = gamma tanh|gamma| / |gamma|`` is derived; use
    :meth:`from_zeta` to specify the state by ``zeta`` directly.
    """

    alpha: complex
    gamma: complex = 0j
    zeta: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "gamma", complex(self.gamma))
        object.__setattr__(self, "zeta", _zeta_from_gamma(self.gamma))

    @classmethod
    def from_zeta(cls, alpha: complex, zeta: complex) -> "SqueezeSpec":
        zeta = complex(zeta)
        r = abs(zeta)
        if r >= 1:
            raise ValueError(f"|zeta| must be < 1, got {r}")
        gamma = 0j if r == 0 else zeta * math.atanh(r) / r
        spec = cls(alpha, gamma)
        # keep the caller's zeta bit-exact rather than the tanh(atanh()) round trip
        object.__setattr__(spec, "zeta", zeta)
        return spec


@dataclass(frozen=True)
class NumberEnsemble:
    """Boltzmann mixture ``sum_k weights[k] |psi_k><psi_k|``.

    ``numbers[k]`` is the number-state label n of member k before
    displacement.
    """

    members: tuple
    beta: float
    label: str
    numbers: tuple = ()

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    @property
    def states(self) -> list[FockVector]:
        return [s for _, s in self.members]

    def mean_number(self) -> float:
        return math.fsum(w * s.mean_number() for w, s in self.members)


def _check_tol(tol: float) -> float:
    tol = float(tol)
    if not (0 < tol <= MAX_TOL):
        raise ValueError(f"tol must lie in (0, {MAX_TOL}], got {tol}")
    if tol < MIN_TOL:
        raise TolUnreachable(f"tol={tol} is below the resolvable {MIN_TOL}")
    return tol


def _tail_sigmas(tol: float) -> float:
    return max(10.0, math.sqrt(2.0 * math.log(1.0 / tol)))


def choose_truncation(alpha: complex, zeta: complex, tol: float = DEFAULT_TOL) -> int:
    """Number cutoff whose neglected squeezed-coherent probability is below tol.

    For zeta = 0 this is a Poisson tail bound, at least
    ``|alpha|^2 + 10 sqrt(|alpha|^2 + 1)``.  Squeezing inflates the spread
    by ``(1 + |zeta|) / (1 - |zeta|)``.  Constructors re-check the bound
    against the tail mass they actually compute.
    """
    tol = _check_tol(tol)
    zeta = complex(zeta)
    if abs(zeta) >= 1:
        raise ValueError(f"|zeta| must be < 1, got {abs(zeta)}")
    a2 = abs(alpha) ** 2
    if a2 == 0 and zeta == 0:
        return 0
    k = _tail_sigmas(tol)
    inflate = (1 + abs(zeta)) / (1 - abs(zeta))
    sinh2 = abs(zeta) ** 2 / (1 - abs(zeta) ** 2)
    mean = a2 + sinh2
    spread = math.sqrt((a2 + 1.0) * inflate + 2.0 * sinh2 * (1 + sinh2))
    return int(math.ceil(mean + k * spread * math.sqrt(inflate) + k * k))


def _from_log(log_mag: np.ndarray, phase: np.ndarray) -> np.ndarray:
    return np.exp(log_mag) * np.exp(1j * phase)


def _grow(builder, n_max: int, tol: float, what: str):
    """Call builder(n_max), doubling n_max until the tail mass is below tol.

    The norm deficit of a build mixes truncated mass with rounding in the
    log-domain amplitudes (about 1e-16 |alpha|^2 per term).  When the
    deficit stalls above tol, the mass actually beyond n_max is measured
    on a larger build; if that is below tol the deficit is rounding and
    the vector is renormalized with the measured tail.
    """
    vec = builder(n_max)
    for _ in range(12):
        if vec.tail_mass < tol:
            return vec
        bigger_n = 2 * n_max + 8
        bigger = builder(bigger_n)
        beyond = _fsum_sq(bigger.amplitudes[n_max + 1 :])
        if beyond < tol:
            amps = vec.amplitudes * math.sqrt((1.0 - beyond) / vec.norm_sq())
            return FockVector(amps, beyond)
        vec, n_max = bigger, bigger_n
    raise TolUnreachable(f"{what}: tail mass {vec.tail_mass:.3e} never fell below {tol}")


def _coherent_amplitudes(z: complex, n_max: int) -> np.ndarray:
    n = np.arange(n_max + 1)
    r = abs(z)
    if r == 0:
        out = np.zeros(n_max + 1, dtype=complex)
        out[0] = 1.0
        return out
    log_mag = -0.5 * r * r + n * math.log(r) - 0.5 * log_factorials(n_max)
    return _from_log(log_mag, n * cmath.phase(z))


def coherent_state(z: complex, tol: float = DEFAULT_TOL) -> FockVector:
    """|z> = exp(-|z|^2/2) sum_n z^n / sqrt(n!) |n>."""
    z = complex(z)
    n0 = choose_truncation(z, 0j, tol)

    def build(n_max):
        amps = _coherent_amplitudes(z, n_max)
        return FockVector(amps, max(0.0, 1.0 - _fsum_sq(amps)))

    return _grow(build, n0, tol, "coherent_state")


def _scaled_hermite_terms(w: complex, zeta: complex, n_max: int):
    """g_n = sqrt(zeta^n / (2^n n!)) H_n(w / sqrt(2 zeta)) in scaled form.

    Runs the branch-free recurrence
    g_{n+1} = (w g_n - zeta sqrt(n) g_{n-1}) / sqrt(n+1),
    which never forms sqrt(zeta) and so has no branch ambiguity.
    Returns (mantissa, log_scale) arrays.
    """
    mant = np.empty(n_max + 1, dtype=complex)
    scale = np.empty(n_max + 1)
    g_prev, g_cur, s = 0j, 1 + 0j, 0.0
    mant[0], scale[0] = g_cur, s
    for n in range(n_max):
        g_prev, g_cur = g_cur, (w * g_cur - zeta * math.sqrt(n) * g_prev) / math.sqrt(n + 1)
        if abs(g_cur) > _RESCALE:
            g_cur /= _RESCALE
            g_prev /= _RESCALE
            s += _LOG_RESCALE
        mant[n + 1], scale[n + 1] = g_cur, s
    return mant, scale


def _squeezed_amplitudes(alpha: complex, zeta: complex, n_max: int) -> np.ndarray:
    w = alpha + zeta * alpha.conjugate()
    pref = -0.5 * w * alpha.conjugate()
    log_pref = 0.25 * math.log1p(-abs(zeta) ** 2) + pref.real
    mant, scale = _scaled_hermite_terms(w, zeta, n_max)
    with np.errstate(divide="ignore"):
        log_mag = log_pref + scale + np.log(np.abs(mant))
    return _from_log(log_mag, pref.imag + np.angle(mant))


def squeezed_state(spec: SqueezeSpec, tol: float = DEFAULT_TOL) -> FockVector:
    """Squeezed coherent state from its Hermite expansion A_n(alpha, zeta).

    The amplitudes carry the analytic prefactor, so the pre-normalization
    deficit ``1 - sum |A_n|^2`` is the truncated tail; it is stored in
    ``tail_mass``.  If rounding pushes the sum above one, the vector is
    rescaled to unit norm.
    """
    zeta = complex(spec.zeta)
    alpha = complex(spec.alpha)
    if abs(zeta) >= 1:
        raise ValueError(f"|zeta| must be < 1, got {abs(zeta)}")
    if abs(zeta) < _ZETA_DEGENERATE:
        return coherent_state(alpha, tol)
    n0 = choose_truncation(alpha, zeta, tol)

    def build(n_max):
        amps = _squeezed_amplitudes(alpha, zeta, n_max)
        total = _fsum_sq(amps)
        if total > 1.0:
            return FockVector(amps / math.sqrt(total), 0.0)
        return FockVector(amps, 1.0 - total)

    return _grow(build, n0, tol, "squeezed_state")


def _displaced_amplitudes(n: int, alpha: complex, m_max: int) -> np.ndarray:
    x = abs(alpha) ** 2
    m = np.arange(m_max + 1)
    lf = log_factorials(max(m_max, n))
    log_a = math.log(abs(alpha))
    arg = cmath.phase(alpha)

    upper = m >= n
    # m >= n: e^{-x/2} sqrt(n!/m!) alpha^{m-n} L_n^{(m-n)}(x)
    # m <  n: e^{-x/2} sqrt(m!/n!) (-alpha^*)^{n-m} L_m^{(n-m)}(x)
    degrees = np.where(upper, n, m)
    orders = np.abs(m - n)
    mant, scale = laguerre_assoc_scaled(degrees, orders, x)
    half_lf = 0.5 * (lf[np.minimum(m, n)] - lf[np.maximum(m, n)])
    power_phase = np.where(upper, arg, math.pi - arg) * orders
    with np.errstate(divide="ignore"):
        log_mag = -0.5 * x + half_lf + orders * log_a + scale + np.log(np.abs(mant))
    return _from_log(log_mag, power_phase + np.where(mant < 0, math.pi, 0.0))


def displaced_number_state(n: int, alpha: complex, tol: float = DEFAULT_TOL) -> FockVector:
    """D(alpha)|n> with amplitudes C_m(n, alpha) = <m|D(alpha)|n> for all m."""
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    tol = _check_tol(tol)
    alpha = complex(alpha)
    if alpha == 0:
        amps = np.zeros(n + 1, dtype=complex)
        amps[n] = 1.0
        return FockVector(amps, 0.0)
    a2 = abs(alpha) ** 2
    k = _tail_sigmas(tol)
    m0 = int(math.ceil(n + a2 + k * math.sqrt(a2 * (2 * n + 1) + 1.0) + k * k))

    def build(m_max):
        amps = _displaced_amplitudes(n, alpha, m_max)
        return FockVector(amps, max(0.0, 1.0 - _fsum_sq(amps)))

    return _grow(build, m0, tol, "displaced_number_state")


def boltzmann_weights(beta: float, energies: Sequence[float], cutoff: float = ENSEMBLE_CUTOFF):
    """Normalized exp(-beta E_n) weights and the indices kept above ``cutoff * max``."""
    energies = np.asarray(energies, dtype=float)
    if energies.ndim != 1 or energies.size == 0:
        raise ValueError("energies must be a nonempty 1-d sequence")
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    shifted = energies - energies.min()
    if math.isinf(beta):
        raw = (shifted == 0).astype(float)
    else:
        raw = np.exp(-beta * shifted)
    keep = np.flatnonzero(raw >= cutoff * raw.max())
    if energies.size > 1 and keep[-1] == energies.size - 1:
        raise DivergentPartition(
            f"weight at n={energies.size - 1} is still {raw[-1] / raw.max():.3e} of the maximum"
        )
    z = math.fsum(raw[keep].tolist())
    return raw[keep] / z, keep


def thermal_ensemble(
    beta: float,
    energies: Sequence[float],
    alpha: complex = 0j,
    tol: float = DEFAULT_TOL,
) -> NumberEnsemble:
    """Displaced thermal state D(alpha) rho_th D(alpha)^dagger as a mixture.

    ``energies[n]`` is the energy of |n> in the same units as 1/beta;
    ``beta = inf`` keeps only the degenerate ground manifold.
    """
    weights, keep = boltzmann_weights(beta, energies)
    alpha = complex(alpha)
    members = tuple((float(w), displaced_number_state(int(n), alpha, tol)) for w, n in zip(weights, keep))
    label = "thermal" if alpha == 0 else "thermal-coherent"
    return NumberEnsemble(members, float(beta), label, tuple(int(n) for n in keep))
