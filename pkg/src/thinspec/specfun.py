"""Special-function kernels used by every amplitude formula.

Hermite and generalized Laguerre polynomials are evaluated with their
three-term recurrences.  Plain evaluations raise on overflow; the
``*_scaled`` variants carry a running log-scale so that products such as
``exp(-|a|^2/2) a^n / sqrt(n!)`` can be paired against polynomial growth
without leaving double range.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_ORDER = 8192

# Values past this magnitude are treated as overflow.
_OVERFLOW = 1e300
# Rescaling threshold for the scaled recurrences.
_RESCALE = 1e150
_LOG_RESCALE = math.log(_RESCALE)


class SpecialFunctionOverflow(OverflowError):
    """A polynomial value left the representable double range."""


def _wrap_phase(phase: float) -> float:
    p = math.remainder(phase, 2.0 * math.pi)
    return math.pi if p <= -math.pi else p


@dataclass(frozen=True)
class LogWeight:
    """A complex number stored as ``exp(log_magnitude) * exp(1j * phase)``.

    A zero value has ``log_magnitude == -inf``.
    """

    log_magnitude: float
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phase", _wrap_phase(float(self.phase)))

    @classmethod
    def from_complex(cls, z: complex) -> "LogWeight":
        if z == 0:
            return cls(-math.inf, 0.0)
        return cls(math.log(abs(z)), cmath.phase(z))

    def to_complex(self) -> complex:
        if self.log_magnitude == -math.inf:
            return 0j
        return cmath.rect(math.exp(self.log_magnitude), self.phase)

    def __mul__(self, other: "LogWeight") -> "LogWeight":
        return LogWeight(self.log_magnitude + other.log_magnitude, self.phase + other.phase)

    def __truediv__(self, other: "LogWeight") -> "LogWeight":
        return LogWeight(self.log_magnitude - other.log_magnitude, self.phase - other.phase)

    def pow(self, n: int) -> "LogWeight":
        if n == 0:
            return LogWeight(0.0, 0.0)
        return LogWeight(n * self.log_magnitude, n * self.phase)


def log_factorial(n: int) -> float:
    """Return ln(n!)."""
    n = int(n)
    if n < 0:
        raise ValueError(f"log_factorial needs n >= 0, got {n}")
    if n <= 170:
        return math.log(math.factorial(n))
    return math.lgamma(n + 1.0)


@lru_cache(maxsize=32)
def _log_factorial_table(n_max: int) -> np.ndarray:
    table = np.array([log_factorial(k) for k in range(n_max + 1)])
    table.flags.writeable = False
    return table


def log_factorials(n_max: int) -> np.ndarray:
    """Array of ln(k!) for k = 0..n_max (read-only, cached)."""
    return _log_factorial_table(int(n_max))


def _check_order(n: int) -> int:
    n = int(n)
    if n < 0:
        raise ValueError(f"polynomial order must be nonnegative, got {n}")
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds MAX_ORDER={MAX_ORDER}")
    return n


def hermite(n: int, z: complex) -> complex:
    """Physicists' Hermite polynomial H_n(z) by forward recurrence.

    Raises SpecialFunctionOverflow instead of returning inf/nan.
    """
    n = _check_order(n)
    z = complex(z)
    h_prev, h = 0j, 1 + 0j
    for k in range(n):
        h_prev, h = h, 2.0 * z * h - 2.0 * k * h_prev
        if not (abs(h) < _OVERFLOW):
            raise SpecialFunctionOverflow(f"H_{k + 1}({z}) exceeds double range")
    return h


def laguerre_assoc(n: int, k: int, x: float) -> float:
    """Generalized Laguerre polynomial L_n^{(k)}(x), forward recurrence in n."""
    n = _check_order(n)
    k = int(k)
    x = float(x)
    if n + k < 0:
        raise ValueError(f"need n + k >= 0, got n={n}, k={k}")
    if x < 0:
        raise ValueError(f"need x >= 0, got {x}")
    l_prev, l_cur = 0.0, 1.0
    for j in range(n):
        l_prev, l_cur = l_cur, ((2 * j + 1 + k - x) * l_cur - (j + k) * l_prev) / (j + 1)
        if not (abs(l_cur) < _OVERFLOW):
            raise SpecialFunctionOverflow(f"L_{j + 1}^({k})({x}) exceeds double range")
    return l_cur


def laguerre_assoc_scaled(degrees, orders, x: float) -> tuple[np.ndarray, np.ndarray]:
    """Elementwise L_{degrees[i]}^{(orders[i])}(x) in scaled form.

    Returns ``(mantissa, log_scale)`` with value = mantissa * exp(log_scale);
    mantissa magnitudes stay below 1e150 for any order.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    orders = np.asarray(orders, dtype=float)
    if degrees.shape != orders.shape:
        raise ValueError("degrees and orders must have the same shape")
    if degrees.size and (degrees.min() < 0 or np.any(degrees + orders < 0)):
        raise ValueError("need degree >= 0 and degree + order >= 0")
    if x < 0:
        raise ValueError(f"need x >= 0, got {x}")

    top = int(degrees.max()) if degrees.size else 0
    l_prev = np.zeros(degrees.shape)
    l_cur = np.ones(degrees.shape)
    scale = np.zeros(degrees.shape)
    for j in range(top):
        active = degrees > j
        l_next = ((2 * j + 1 + orders - x) * l_cur - (j + orders) * l_prev) / (j + 1)
        l_prev = np.where(active, l_cur, l_prev)
        l_cur = np.where(active, l_next, l_cur)
        big = np.abs(l_cur) > _RESCALE
        if np.any(big):
            l_cur = np.where(big, l_cur / _RESCALE, l_cur)
            l_prev = np.where(big, l_prev / _RESCALE, l_prev)
            scale = scale + np.where(big, _LOG_RESCALE, 0.0)
    return l_cur, scale
