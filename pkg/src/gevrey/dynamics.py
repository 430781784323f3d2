"""Fourier-Galerkin systems for Euler, Burgers, Euler-Voigt and NS-Voigt.

All four share the form

    (1 + alpha^2 |n|^(2s)) dv_n/dt = -[(v.grad)v]^_n (projected) - nu |n|^2 v_n

with ``alpha = nu = 0`` for Euler/Burgers, ``nu = 0`` for Euler-Voigt and no
projection for Burgers.  Time stepping is classical fixed-step RK4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import BlowUpError, ConfigError, DiagnosticUnavailable, StateError
from .lattice import (
    SpectralField,
    _advection_tendency,
    _hermitian_array,
    _project_array,
    divergence_defect,
)
from .norms import GevreyIndex, fit_analyticity_radius, gevrey_norm, sobolev_norm

__all__ = [
    "Euler",
    "Burgers",
    "EulerVoigt",
    "NSVoigt",
    "Observers",
    "RunSeries",
    "rhs",
    "step",
    "integrate",
    "conserved_quantity",
    "dissipation_check",
    "BLOWUP_THRESHOLD",
]

BLOWUP_THRESHOLD = 1e12
SOLENOIDAL_TOL = 1e-10


@dataclass(frozen=True)
class Euler:
    name = "euler"
    solenoidal = True


@dataclass(frozen=True)
class Burgers:
    """Inviscid Burgers; ``projected=True`` only for energy-neutrality checks."""

    projected: bool = False
    name = "burgers"

    @property
    def solenoidal(self) -> bool:
        return self.projected


@dataclass(frozen=True)
class EulerVoigt:
    alpha: float
    s: float
    name = "euler_voigt"
    solenoidal = True

    def __post_init__(self):
        if not (self.alpha > 0 and self.s > 0):
            raise ConfigError("Euler-Voigt needs alpha > 0 and s > 0")


@dataclass(frozen=True)
class NSVoigt:
    alpha: float
    s: float
    nu: float
    name = "ns_voigt"
    solenoidal = True

    def __post_init__(self):
        if not (self.alpha > 0 and self.s > 0 and self.nu > 0):
            raise ConfigError("NS-Voigt needs alpha, s, nu > 0")


EquationSpec = Union[Euler, Burgers, EulerVoigt, NSVoigt]


def _operators(lattice, eq):
    """Per-mode inverse Voigt factor and viscous rate (None when absent)."""
    inv_voigt = None
    visc = None
    if isinstance(eq, (EulerVoigt, NSVoigt)):
        k = lattice.knorm
        inv_voigt = 1.0 / (1.0 + eq.alpha**2 * k ** (2.0 * eq.s))
    if isinstance(eq, NSVoigt):
        visc = eq.nu * lattice.ksq
    return inv_voigt, visc


def _tendency(c: np.ndarray, lattice, eq, ops) -> np.ndarray:
    inv_voigt, visc = ops
    out = _advection_tendency(c, lattice, eq.solenoidal)
    if visc is not None:
        out = out - visc * c
    if inv_voigt is not None:
        out = out * inv_voigt
    return out


def _require_state(v: SpectralField, eq):
    if eq.solenoidal:
        scale = np.abs(v.coeffs).max(initial=0.0)
        if scale > 0 and divergence_defect(v) > SOLENOIDAL_TOL:
            raise StateError(f"{eq.name} requires a solenoidal field")


def rhs(v: SpectralField, eq: EquationSpec) -> SpectralField:
    """Time derivative ``dv_n/dt`` of the Galerkin system."""
    _require_state(v, eq)
    lat = v.lattice
    out = _hermitian_array(_tendency(v.coeffs, lat, eq, _operators(lat, eq)))
    return SpectralField(lat, out, is_solenoidal=eq.solenoidal)


def _rk4(c, dt, lattice, eq, ops):
    k1 = _tendency(c, lattice, eq, ops)
    k2 = _tendency(c + 0.5 * dt * k1, lattice, eq, ops)
    k3 = _tendency(c + 0.5 * dt * k2, lattice, eq, ops)
    k4 = _tendency(c + dt * k3, lattice, eq, ops)
    out = c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    out = _hermitian_array(out)
    if eq.solenoidal:
        out = _project_array(out, lattice)
    return out


def _check_finite(c, t):
    amp = math.sqrt(float(np.sum(c.real**2 + c.imag**2)))
    if not math.isfinite(amp) or amp > BLOWUP_THRESHOLD:
        raise BlowUpError(f"state norm {amp:.3g} at t={t:.6g}", last_valid_time=t)


def step(v: SpectralField, eq: EquationSpec, dt: float, t: float = 0.0) -> SpectralField:
    """One classical RK4 step.

    Stability needs roughly ``dt <= c / (N max|v|)`` with ``c`` of order one.
    ``t`` is only used to label a blow-up error.
    """
    if not dt > 0:
        raise ConfigError("dt must be positive")
    lat = v.lattice
    out = _rk4(v.coeffs, dt, lat, eq, _operators(lat, eq))
    _check_finite(out, t)
    return SpectralField(lat, out, is_solenoidal=eq.solenoidal)


# A monitor maps (v, t) to (psi, gevrey, xi); see bounds.TheoremSetup.
Monitor = Callable[[SpectralField, float], tuple]


@dataclass(frozen=True)
class Observers:
    """What :func:`integrate` records at each sample time."""

    sample_interval: Optional[float] = None
    sobolev: Sequence[float] = (0.0,)
    gevrey_sigma: float = 0.0
    gevrey_q: float = 0.0
    monitor: Optional[Monitor] = None
    fit_radius: bool = False


@dataclass
class RunSeries:
    """Column-wise time series of diagnostics.

    ``gevrey`` holds either the fixed-index Gevrey norm or, when a theorem
    monitor is attached, the monitored norm of ``w``.  ``envelope`` and
    ``margin`` are filled in by certification (NaN otherwise).
    """

    sobolev_indices: tuple
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    sobolev: dict = field(default_factory=dict)
    gevrey: list = field(default_factory=list)
    psi: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    envelope: list = field(default_factory=list)
    margin: list = field(default_factory=list)
    extras: dict = field(default_factory=dict)
    status: str = "complete"
    failed_at: Optional[float] = None
    message: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for q in self.sobolev_indices:
            self.sobolev.setdefault(q, [])

    def __len__(self):
        return len(self.times)

    @property
    def failed(self) -> bool:
        return self.status != "complete"

    def column(self, q: float) -> np.ndarray:
        for key, vals in self.sobolev.items():
            if math.isclose(key, q, rel_tol=0, abs_tol=1e-12):
                return np.asarray(vals, dtype=float)
        raise DiagnosticUnavailable(f"series has no Sobolev column for q={q}")


def _record(series: RunSeries, v: SpectralField, t: float, obs: Observers):
    series.times.append(t)
    series.energy.append(sobolev_norm(v, 0.0) ** 2)
    for q in series.sobolev_indices:
        series.sobolev[q].append(sobolev_norm(v, q))
    if obs.monitor is not None:
        psi, gev, xi = obs.monitor(v, t)
    else:
        psi, xi = math.nan, math.nan
        gev = gevrey_norm(v, GevreyIndex(obs.gevrey_sigma, obs.gevrey_q))
    series.gevrey.append(float(gev))
    series.psi.append(float(psi))
    series.xi.append(float(xi))
    series.envelope.append(math.nan)
    series.margin.append(math.nan)
    if obs.fit_radius:
        try:
            sig = fit_analyticity_radius(v).sigma_hat
        except DiagnosticUnavailable:
            sig = math.nan
        series.extras.setdefault("sigma_fit", []).append(sig)


def _steps(length: float, dt: float, what: str) -> int:
    n = round(length / dt)
    if n < 1 or abs(n * dt - length) > 1e-9 * max(length, dt):
        raise ConfigError(f"{what}={length} is not a positive multiple of dt={dt}")
    return n


def integrate(
    v0: SpectralField,
    eq: EquationSpec,
    dt: float,
    t_end: float,
    observers: Observers = Observers(),
) -> RunSeries:
    """March ``v0`` to ``t_end`` with fixed RK4 steps, sampling diagnostics.

    On blow-up the partial series is returned with ``status='blow-up'``.
    """
    if not dt > 0:
        raise ConfigError("dt must be positive")
    _require_state(v0, eq)
    n_steps = _steps(t_end, dt, "t_end")
    every = 1 if observers.sample_interval is None else _steps(observers.sample_interval, dt, "sample_interval")
    series = RunSeries(sobolev_indices=tuple(float(q) for q in observers.sobolev))
    lat = v0.lattice
    ops = _operators(lat, eq)
    c = v0.coeffs
    v = v0
    _record(series, v, 0.0, observers)
    for k in range(1, n_steps + 1):
        t = k * dt
        c = _rk4(c, dt, lat, eq, ops)
        try:
            _check_finite(c, t)
        except BlowUpError as exc:
            series.status = "blow-up"
            series.failed_at = (k - 1) * dt
            series.message = str(exc)
            return series
        if k % every == 0 or k == n_steps:
            v = SpectralField(lat, c, is_solenoidal=eq.solenoidal)
            _record(series, v, t, observers)
    return series


def conserved_quantity(v: SpectralField, eq: EquationSpec) -> float:
    """``||v||_0^2`` (Euler, Burgers) or ``||v||_0^2 + alpha^2 ||v||_s^2`` (Voigt)."""
    e = sobolev_norm(v, 0.0) ** 2
    if isinstance(eq, (EulerVoigt, NSVoigt)):
        e += eq.alpha**2 * sobolev_norm(v, eq.s) ** 2
    return e


def dissipation_check(series: RunSeries, eq: NSVoigt) -> float:
    """Max residual of ``d/dt(||v||_0^2 + alpha^2||v||_s^2) + 2 nu ||v||_1^2``.

    Uses centred differences on uniformly spaced samples and normalises by
    ``max(1, max 2 nu ||v||_1^2)``.
    """
    t = np.asarray(series.times, dtype=float)
    if t.size < 3:
        raise DiagnosticUnavailable("dissipation check needs at least 3 samples")
    h = np.diff(t)
    if np.max(np.abs(h - h[0])) > 1e-9 * h[0]:
        raise DiagnosticUnavailable("dissipation check needs uniform sampling")
    e = series.column(0.0) ** 2 + eq.alpha**2 * series.column(eq.s) ** 2
    diss = 2.0 * eq.nu * series.column(1.0) ** 2
    dedt = (e[2:] - e[:-2]) / (t[2:] - t[:-2])
    res = np.abs(dedt + diss[1:-1])
    return float(res.max() / max(1.0, float(diss.max())))
