"""Scenario definitions and the computations behind each built-in figure.

A scenario turns into a :class:`Table`: named columns plus metadata and
a short lifetime summary.  Writing the table (CSV, gnuplot script, PNG)
lives in :mod:`thinspec.output`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np

from . import dynamics as dyn
from . import states as st
from . import thinspectrum as ts

MODELS = (
    "order-parameter",
    "thermal-coherent",
    "q-function",
    "thin-two-state",
    "quasiparticle",
    "quasiparticle-law",
    "multi-symmetry",
)

OCCUPATIONS = ("thermal", "thermal-coherent")


class ScenarioError(ValueError):
    """Invalid scenario configuration; ``field`` names the offending key."""

    def __init__(self, field_name: str, message: str, scenario: str = ""):
        self.field = field_name
        self.scenario = scenario
        where = f"scenario {scenario!r}: " if scenario else ""
        super().__init__(f"{where}field {field_name!r}: {message}")


@dataclass(frozen=True)
class Scenario:
    name: str
    model: str
    alpha: complex = 10.0
    zetas: tuple = (0.0,)
    temperatures_nK: tuple = ()
    occupations: tuple = OCCUPATIONS
    N: float = 100.0
    a_s: float = 10e-9
    a_ho: float = 1e-6
    rho: float = 1e21
    omega_tr: float = 100.0
    deltas: tuple = (0.1,)
    coupling: float = 1.0
    m: int = 1
    q_times: tuple = (0.0,)
    grid_points: int = 201
    t_max: float = 0.6
    n_points: int = 2000
    tol: float = st.DEFAULT_TOL
    output: str = ""

    def validate(self) -> "Scenario":
        def bad(name, msg):
            raise ScenarioError(name, msg, self.name)

        if not self.name or any(c in self.name for c in "/\\ \t"):
            bad("name", f"must be a nonempty token without spaces or slashes, got {self.name!r}")
        if self.model not in MODELS:
            bad("model", f"unknown model {self.model!r}; choose from {', '.join(MODELS)}")
        if not (math.isfinite(self.t_max) and self.t_max > 0):
            bad("t_max", f"time window must be positive, got {self.t_max!r}")
        if self.n_points < 2:
            bad("n_points", f"need at least 2 time points, got {self.n_points!r}")
        for key in ("N", "a_s", "a_ho", "rho", "omega_tr"):
            value = getattr(self, key)
            if not (math.isfinite(value) and value > 0):
                bad(key, f"must be positive and finite, got {value!r}")
        if not cmath_finite(self.alpha):
            bad("alpha", f"must be finite, got {self.alpha!r}")
        if any(not abs(z) < 1 for z in self.zetas):
            bad("zetas", f"every |zeta| must be < 1, got {self.zetas!r}")
        if any(not (math.isfinite(t) and t >= 0) for t in self.temperatures_nK):
            bad("temperatures_nK", f"temperatures must be >= 0, got {self.temperatures_nK!r}")
        if any(o not in OCCUPATIONS for o in self.occupations) or not self.occupations:
            bad("occupations", f"choose from {', '.join(OCCUPATIONS)}, got {self.occupations!r}")
        if any(not abs(d) < 1 for d in self.deltas) or not self.deltas:
            bad("deltas", f"every |delta| must be < 1, got {self.deltas!r}")
        if not self.tol >= st.MIN_TOL or not self.tol <= st.MAX_TOL:
            bad("tol", f"must lie in [{st.MIN_TOL}, {st.MAX_TOL}], got {self.tol!r}")
        if self.grid_points < 11:
            bad("grid_points", f"need at least 11, got {self.grid_points!r}")
        if self.m < 1:
            bad("m", f"must be a positive integer, got {self.m!r}")
        if not self.coupling >= 0:
            bad("coupling", f"must be nonnegative, got {self.coupling!r}")

        if self.model in ("thermal-coherent", "quasiparticle") and not self.temperatures_nK:
            bad("temperatures_nK", f"model {self.model!r} needs at least one temperature")
        if self.model == "quasiparticle" and len(self.temperatures_nK) != 1:
            bad("temperatures_nK", "model 'quasiparticle' takes exactly one temperature")
        if self.model == "quasiparticle" and any(t <= 0 for t in self.temperatures_nK):
            bad("temperatures_nK", "quasi-particle decay needs T > 0")
        if self.model == "multi-symmetry" and len(self.deltas) != 2:
            bad("deltas", "model 'multi-symmetry' takes exactly two deltas")
        if self.model == "q-function" and any(not (math.isfinite(t) and t >= 0) for t in self.q_times):
            bad("q_times", f"snapshot times must be >= 0, got {self.q_times!r}")
        return self

    def params(self) -> dyn.PhysicalParams:
        return dyn.params_from_trap_length(self.a_s, self.a_ho, self.rho, self.N, self.omega_tr)

    def times(self) -> np.ndarray:
        return dyn.uniform_times(self.t_max, self.n_points)

    def items(self):
        """(key, value) pairs in declaration order."""
        return [(f.name, getattr(self, f.name)) for f in fields(self)]


def cmath_finite(z) -> bool:
    z = complex(z)
    return math.isfinite(z.real) and math.isfinite(z.imag)


@dataclass
class Table:
    columns: list
    data: np.ndarray
    kind: str = "lines"  # "lines" or "grid"
    x_label: str = ""
    y_label: str = ""
    summary: list = field(default_factory=list)


# --- labels -------------------------------------------------------------------

def number_label(x: float) -> str:
    """0.5 -> '05', 0.02 -> '002', -0.5 -> 'm05', 1000 -> '1000'."""
    sign = "m" if x < 0 else ""
    s = repr(abs(float(x)))
    if s.endswith(".0"):
        s = s[:-2]
    if s.startswith("0.") and s != "0":
        s = "0" + s[2:]
    return sign + s.replace(".", "p")


def zeta_label(z) -> str:
    z = complex(z)
    if z == 0:
        return "coherent"
    if z.imag == 0:
        return "zeta" + number_label(z.real)
    if z.real == 0:
        return "zeta" + number_label(z.imag) + "i"
    return "zeta" + number_label(z.real) + "_" + number_label(z.imag) + "i"


def temperature_label(t: float) -> str:
    s = repr(float(t))
    if s.endswith(".0"):
        s = s[:-2]
    return "T" + s.replace(".", "p").replace("-", "m") + "nK"


def _lifetime_text(label: str, tc: float | None, tr: float | None, to_s: Callable | None) -> str:
    if tc is None or not math.isfinite(tc):
        return f"{label}: no collapse in window"
    text = f"{label}: t_c={tc:.6g}"
    if to_s is not None:
        text += f" ({to_s(tc):.6g} s)"
    if tr is not None:
        text += f" revival={tr:.6g}"
        if to_s is not None:
            text += f" ({to_s(tr):.6g} s)"
    return text


# --- state builders -----------------------------------------------------------

def build_state(alpha: complex, zeta: complex, tol: float) -> st.FockVector:
    if complex(zeta) == 0:
        return st.coherent_state(alpha, tol)
    return st.squeezed_state(st.SqueezeSpec.from_zeta(alpha, zeta), tol)


def zero_mode_ensemble(beta_tilde: float, alpha: complex, tol: float) -> st.NumberEnsemble:
    """Boltzmann mixture over E_n = (n^2 - n)/2 with the level list grown until it converges."""
    levels = 64
    while True:
        try:
            return st.thermal_ensemble(beta_tilde, dyn.Spectrum.zero_mode(levels).energies, alpha, tol)
        except st.DivergentPartition:
            levels *= 2
            if levels > 1 << 16:
                raise


# --- runners ------------------------------------------------------------------

def _run_order_parameter(s: Scenario) -> Table:
    p = s.params()
    t = s.times()
    cols, summary = [t, p.seconds(t)], []
    names = ["tau", "t_s"]
    for zeta in s.zetas:
        psi = build_state(s.alpha, zeta, s.tol)
        series = dyn.order_parameter_series(psi, dyn.Spectrum.u1(psi.n_max + 1, s.N), t)
        label = "abs_a_" + zeta_label(zeta)
        names.append(label)
        cols.append(series.magnitudes)
        summary.append(_lifetime_text(label, series.collapse_time, series.revival_time, p.seconds))
    return Table(names, np.column_stack(cols), "lines", "tau", "|<a>|", summary)


def _run_thermal_coherent(s: Scenario) -> Table:
    p = s.params()
    t = s.times()
    cols, summary = [t, p.seconds(t)], []
    names = ["tau", "t_s"]
    for temp in s.temperatures_nK:
        ens = zero_mode_ensemble(p.beta_tilde(temp * 1e-9), s.alpha, s.tol)
        size = max(m.amplitudes.size for m in ens.states)
        series = dyn.order_parameter_thermal_coherent(ens, dyn.Spectrum.zero_mode(size), t)
        label = "abs_a_" + temperature_label(temp)
        names.append(label)
        cols.append(series.magnitudes)
        summary.append(
            _lifetime_text(label, series.collapse_time, series.revival_time, p.seconds)
            + f" members={len(ens.members)}"
        )
    return Table(names, np.column_stack(cols), "lines", "tau", "|<a>|", summary)


def _run_q_function(s: Scenario) -> Table:
    psis = [(z, build_state(s.alpha, z, s.tol)) for z in s.zetas]
    half = max(math.sqrt(psi.mean_number()) for _, psi in psis) + 5.0
    axis = np.linspace(-half, half, s.grid_points)
    re, im = np.meshgrid(axis, axis)
    names, cols, summary = ["re_gamma", "im_gamma"], [re.ravel(), im.ravel()], []
    for zeta, psi in psis:
        spectrum = dyn.Spectrum.u1(psi.n_max + 1, s.N)
        for tau in s.q_times:
            q = dyn.husimi_q(psi, spectrum, tau, (axis, axis))
            ring = dyn.ring_profile(psi, spectrum, tau)
            label = f"q_{zeta_label(zeta)}_tau{number_label(tau)}"
            names.append(label)
            cols.append(q.values.ravel())
            summary.append(
                f"{label}: norm={q.normalization():.6f} ring_r={ring.radius:.4f} "
                f"ring_cv={ring.coefficient_of_variation:.4f}"
            )
    return Table(names, np.column_stack(cols), "grid", "Re gamma", "Im gamma", summary)


def _unit_model(delta: float) -> ts.ThinSpectrumModel:
    return ts.ThinSpectrumModel(1.0, delta, 0.0, 1.0, hbar=1.0)


def _run_thin_two_state(s: Scenario) -> Table:
    # unit I, beta, hbar: then t / t_c with t_c = hbar beta / delta is the only variable
    model = _unit_model(s.deltas[0])
    x = s.times()
    tau = x * model.collapse_scale
    closed = ts.reduced_offdiag_two_state(model, tau)
    exact = ts.reduced_offdiag_two_state_exact(model, tau)
    oracle = ts.reduced_offdiag_two_state_oracle(model, times=tau)
    names, cols = ["t_over_tc"], [x]
    to_s = None
    if s.temperatures_nK and s.temperatures_nK[0] > 0:
        scale = ts.two_state_collapse_scale(s.temperatures_nK[0] * 1e-9, s.deltas[0])
        names.append("t_s")
        cols.append(x * scale)
        to_s = lambda u: u * scale  # noqa: E731
    names += ["abs_rho_closed", "abs_rho_exact", "abs_rho_oracle"]
    cols += [closed.magnitudes, exact.magnitudes, oracle.magnitudes]
    k = 1.0 / model.collapse_scale
    summary = [
        _lifetime_text("abs_rho_closed", closed.collapse_time * k, None, to_s),
        _lifetime_text("abs_rho_exact", exact.collapse_time * k, None, to_s),
        _lifetime_text("abs_rho_oracle", oracle.collapse_time * k, None, to_s),
    ]
    if to_s is not None:
        summary.append(f"collapse scale hbar/(k_B T delta) = {to_s(1.0):.6g} s")
    return Table(names, np.column_stack(cols), "lines", "t / t_c", "|rho_od|", summary)


def _run_quasiparticle_law(s: Scenario) -> Table:
    x = s.times()
    mags = ts.quasiparticle_decay_law(x, s.coupling)
    series = ts.OffDiagSeries(x, mags, ts._grid_crossing(x, mags))
    return Table(
        ["t_over_tc", "abs_rho"],
        np.column_stack([x, mags]),
        "lines",
        "t / t_c",
        "|rho_od|",
        [_lifetime_text("abs_rho", series.collapse_time, None, None) + f" coupling={s.coupling!r}"],
    )


def _run_quasiparticle(s: Scenario) -> Table:
    p = s.params()
    beta = p.beta_tilde(s.temperatures_nK[0] * 1e-9)
    # energies in units of u_tilde: u0 rho0 = u_tilde N
    levels = ts.CondensateLevels(s.N, s.N, 0.0, beta, hbar=1.0)
    t = s.times()
    names, cols, summary = ["tau", "t_s"], [t, p.seconds(t)], []
    for occ in s.occupations:
        if occ == "thermal":
            series = ts.quasiparticle_offdiag_thermal_oracle(levels, t, s.m)
        else:
            series = ts.quasiparticle_offdiag_thermal_coherent(levels, s.alpha, t, s.m, s.tol)
        label = "abs_rho_" + occ.replace("-", "_")
        names.append(label)
        cols.append(series.magnitudes)
        summary.append(_lifetime_text(label, series.collapse_time, None, p.seconds))
    return Table(names, np.column_stack(cols), "lines", "tau", "|rho_od|", summary)


def _run_multi_symmetry(s: Scenario) -> Table:
    models = [_unit_model(d) for d in s.deltas]
    tc = ts.combine_collapse_times([m.collapse_scale for m in models])
    x = s.times()
    joint, marginals = ts.multi_symmetry_offdiag(models, x * tc)
    product = marginals[0].magnitudes * marginals[1].magnitudes
    names = ["t_over_tc", "abs_rho_joint", "abs_rho_product", "abs_rho_1", "abs_rho_2"]
    cols = [x, joint.magnitudes, product, marginals[0].magnitudes, marginals[1].magnitudes]
    summary = [
        _lifetime_text("abs_rho_joint", joint.collapse_time / tc, None, None),
        f"max |joint - product| = {np.max(np.abs(joint.magnitudes - product)):.3e}",
    ]
    return Table(names, np.column_stack(cols), "lines", "t / t_c", "|rho_od|", summary)


RUNNERS = {
    "order-parameter": _run_order_parameter,
    "thermal-coherent": _run_thermal_coherent,
    "q-function": _run_q_function,
    "thin-two-state": _run_thin_two_state,
    "quasiparticle": _run_quasiparticle,
    "quasiparticle-law": _run_quasiparticle_law,
    "multi-symmetry": _run_multi_symmetry,
}


def compute(s: Scenario) -> Table:
    s.validate()
    return RUNNERS[s.model](s)


# --- built-ins ----------------------------------------------------------------

_BUILTIN_LIST = [
    Scenario("figure1", "order-parameter", zetas=(0.0, 0.5, 0.9), t_max=0.6, n_points=2000),
    Scenario("figure2", "q-function", zetas=(0.9, 0.5, 0.0), q_times=(0.0,)),
    Scenario("figure3", "q-function", zetas=(0.5,), q_times=(0.0, 0.02, 0.1, 0.4)),
    Scenario("figure4", "order-parameter", zetas=(0.0, 0.5, 0.5j, -0.5), t_max=0.6, n_points=2000),
    Scenario("figure5", "q-function", zetas=(0.5, 0.0, -0.5, 0.5j), q_times=(0.0,)),
    Scenario(
        "figure6",
        "thermal-coherent",
        temperatures_nK=(1000.0, 100.0, 10.0, 1.0, 0.001),
        t_max=0.3,
        n_points=2000,
    ),
    Scenario("figure7", "thin-two-state", deltas=(0.1,), temperatures_nK=(100.0,), t_max=10.0, n_points=501),
    Scenario("figure8", "quasiparticle-law", coupling=1.0, t_max=10.0, n_points=1001),
    Scenario("figure9", "quasiparticle", temperatures_nK=(10.0,), t_max=0.5, n_points=5001),
    Scenario("figure10", "quasiparticle", temperatures_nK=(100.0,), t_max=0.5, n_points=5001),
    Scenario("two-symmetries", "multi-symmetry", deltas=(0.1, 0.05), t_max=10.0, n_points=201),
]

BUILTINS = {s.name: s for s in _BUILTIN_LIST}


def builtin(name: str) -> Scenario:
    try:
        return BUILTINS[name]
    except KeyError:
        raise ScenarioError("name", f"no built-in scenario {name!r}; see 'thinspec list'") from None


def derived(base: Scenario, **changes) -> Scenario:
    return replace(base, **changes)
