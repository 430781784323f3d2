"""Nonlinear spectral transformations v <-> w and the scalar psi-equation.

Every transformation multiplies each Fourier coefficient by
``exp(psi |n|)``; the variants differ only in how ``psi`` is tied to the
field:

* ``FixedSobolev``: ``psi = beta * ||w||_{s+3/2}^-eps``
* ``VoigtTriple``:  ``psi = beta * |||w|||^-eps``
* ``CriticalShift``: ``psi = beta * (1 + |||w|||)^-2`` (Voigt norm with s = 1/2)
* ``LinearInTime``: ``psi = beta * t``

Going from v to w requires solving a monotone scalar equation in ``psi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConfigError, NoSolutionError, TransformError
from .lattice import SpectralField
from .norms import (
    GevreyIndex,
    TripleNormParams,
    _modulus_sq,
    gevrey_norm,
    gevrey_weight,
    sobolev_norm,
    triple_norm,
    triple_weight,
)

__all__ = [
    "FixedSobolev",
    "VoigtTriple",
    "CriticalShift",
    "LinearInTime",
    "Sobolev",
    "Triple",
    "PsiSolution",
    "Transformed",
    "solve_psi",
    "v_to_w",
    "w_to_v",
    "beta_admissible",
]


def _check_beta(beta):
    if not beta > 0:
        raise ConfigError(f"beta must be positive, got {beta}")


def _check_eps(eps):
    if not 0 < eps < 2:
        raise ConfigError(f"epsilon must lie in (0, 2), got {eps}")


@dataclass(frozen=True)
class FixedSobolev:
    beta: float
    epsilon: float
    s: float

    def __post_init__(self):
        _check_beta(self.beta)
        _check_eps(self.epsilon)
        if not 0 < self.s <= 0.5:
            raise ConfigError(f"FixedSobolev needs 0 < s <= 1/2, got s={self.s}")


@dataclass(frozen=True)
class VoigtTriple:
    beta: float
    epsilon: float
    alpha: float
    s: float

    def __post_init__(self):
        _check_beta(self.beta)
        _check_eps(self.epsilon)
        if not (self.alpha > 0 and self.s > 0):
            raise ConfigError("VoigtTriple needs alpha > 0 and s > 0")


@dataclass(frozen=True)
class CriticalShift:
    beta: float
    alpha: float

    def __post_init__(self):
        _check_beta(self.beta)
        if not self.alpha > 0:
            raise ConfigError("CriticalShift needs alpha > 0")


@dataclass(frozen=True)
class LinearInTime:
    beta: float

    def __post_init__(self):
        _check_beta(self.beta)


TransformSpec = Union[FixedSobolev, VoigtTriple, CriticalShift, LinearInTime]


@dataclass(frozen=True)
class Sobolev:
    """Selects ``||.||_q`` as the norm in the psi-equation."""

    q: float


@dataclass(frozen=True)
class Triple:
    """Selects the Voigt norm ``|||.|||`` with parameters ``alpha, s``."""

    alpha: float
    s: float


@dataclass(frozen=True)
class PsiSolution:
    psi: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class Transformed:
    w: SpectralField
    psi: float
    iterations: int = 0
    residual: float = 0.0


def _weights(v: SpectralField, kind) -> np.ndarray:
    lat = v.lattice
    if isinstance(kind, Sobolev):
        w = np.zeros(lat.shape)
        w[lat.retained] = lat.knorm[lat.retained] ** (2.0 * kind.q)
        return w
    if isinstance(kind, Triple):
        return triple_weight(lat, kind.alpha, kind.s)
    raise ConfigError(f"unknown norm kind {kind!r}")


class _LogGamma:
    """``log Gamma(psi)`` with ``Gamma(psi)^2 = sum a_n exp(2 psi |n|)``."""

    def __init__(self, v: SpectralField, kind):
        a = _modulus_sq(v) * _weights(v, kind)
        nz = a > 0
        if not np.any(nz):
            raise NoSolutionError("psi-equation has no solution for a zero field")
        self.loga = np.log(a[nz])
        self.k = v.lattice.knorm[nz]

    def __call__(self, psi: float) -> tuple[float, float]:
        """Return ``log Gamma`` and its derivative in ``psi``."""
        e = self.loga + 2.0 * psi * self.k
        top = e.max()
        p = np.exp(e - top)
        tot = p.sum()
        return 0.5 * (top + math.log(tot)), float(np.dot(p, self.k) / tot)


def _solve_monotone(h, lo: float, hi: float, tol: float, max_iter: int):
    """Safeguarded Newton for an increasing ``h`` with ``h(lo) < 0 <= h(hi)``.

    ``h`` returns ``(value, derivative)``.  Iterates to machine precision;
    ``tol`` is only used to decide success.
    """
    x = hi
    best = None
    for it in range(1, max_iter + 1):
        val, der = h(x)
        if best is None or abs(val) < abs(best[1]):
            best = (x, val)
        if val == 0.0:
            return x, val, it
        if val < 0:
            lo = x
        else:
            hi = x
        step = val / der if der > 0 else math.inf
        x_new = x - step
        if not (lo < x_new < hi):
            x_new = 0.5 * (lo + hi) if lo > 0 else 0.5 * hi
        if x_new == x or hi - lo <= 2.0 * math.ulp(hi):
            break
        if abs(x_new - x) <= 4.0 * math.ulp(x) and abs(val) <= tol:
            x = x_new
            val, _ = h(x)
            if abs(val) < abs(best[1]):
                best = (x, val)
            break
        x = x_new
    x, val = best
    if not abs(math.expm1(val)) <= tol:
        raise TransformError(f"psi iteration stalled after {it} steps (log residual {val:.3g})")
    return x, val, it


def _bracket(h, lo, hi):
    # Widen a user bracket until it straddles the root.
    for _ in range(2000):
        if h(hi)[0] >= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NoSolutionError("could not bracket psi")
    while lo > 0 and h(lo)[0] >= 0:
        hi, lo = lo, 0.5 * lo
        if lo < 1e-300:
            lo = 0.0
    return lo, hi


def solve_psi(
    v: SpectralField,
    beta: float,
    epsilon: float,
    norm_kind,
    *,
    tol: float = 1e-12,
    max_iter: int = 200,
    bracket: tuple[float, float] | None = None,
) -> PsiSolution:
    """Solve ``psi * Gamma(psi)^epsilon = beta``.

    ``Gamma(psi)`` is the Gevrey-weighted (strip ``psi``) version of the norm
    chosen by ``norm_kind`` (:class:`Sobolev` or :class:`Triple`).  The left
    side increases strictly from 0, so the root is unique; it is found in log
    form with bracketing and safeguarded Newton steps.  ``residual`` is
    ``psi Gamma^eps - beta``.
    """
    _check_beta(beta)
    if not epsilon > 0:
        raise ConfigError("epsilon must be positive")
    lg = _LogGamma(v, norm_kind)
    logb = math.log(beta)

    def h(psi):
        if psi <= 0:
            return -math.inf, math.inf
        g, dg = lg(psi)
        return math.log(psi) + epsilon * g - logb, 1.0 / psi + epsilon * dg

    return _finish(h, beta, lg, epsilon, tol, max_iter, bracket)


def _solve_critical(v, beta, alpha, *, tol=1e-12, max_iter=200, bracket=None) -> PsiSolution:
    """Solve ``psi (1 + |||v|||_psi)^2 = beta`` (Voigt norm at s = 1/2)."""
    lg = _LogGamma(v, Triple(alpha, 0.5))
    logb = math.log(beta)

    def h(psi):
        if psi <= 0:
            return -math.inf, math.inf
        g, dg = lg(psi)
        sig = 1.0 / (1.0 + math.exp(-g)) if g > -700 else 0.0
        return math.log(psi) + 2.0 * np.logaddexp(0.0, g) - logb, 1.0 / psi + 2.0 * sig * dg

    return _finish(h, beta, lg, None, tol, max_iter, bracket)


def _finish(h, beta, lg, epsilon, tol, max_iter, bracket):
    if bracket is None:
        g0 = lg(0.0)[0]
        if epsilon is None:
            hi = beta / (1.0 + math.exp(g0)) ** 2
        else:
            hi = math.exp(math.log(beta) - epsilon * g0)
        lo = 0.0
        if not math.isfinite(hi) or hi <= 0:
            raise NoSolutionError("initial bracket for psi is degenerate")
    else:
        lo, hi = _bracket(h, *bracket)
    psi, val, it = _solve_monotone(h, lo, hi, tol, max_iter)
    return PsiSolution(psi=float(psi), residual=float(beta * math.expm1(val)), iterations=it)


def _scale(f: SpectralField, psi: float) -> SpectralField:
    return f.replace(f.coeffs * gevrey_weight(f.lattice, psi))


def v_to_w(v: SpectralField, spec: TransformSpec, t: float = 0.0) -> Transformed:
    """Apply the transformation to ``v``; returns ``w`` and the strip ``psi``.

    A zero ``v`` maps to a zero ``w`` with ``psi = 0`` (``psi = beta`` for
    ``CriticalShift``, its limit at zero norm).
    """
    if isinstance(spec, LinearInTime):
        if t < 0:
            raise ConfigError("LinearInTime needs t >= 0")
        psi = spec.beta * t
        return Transformed(_scale(v, psi), psi)
    if v.is_zero():
        psi = spec.beta if isinstance(spec, CriticalShift) else 0.0
        return Transformed(v, psi)
    if isinstance(spec, FixedSobolev):
        sol = solve_psi(v, spec.beta, spec.epsilon, Sobolev(spec.s + 1.5))
    elif isinstance(spec, VoigtTriple):
        sol = solve_psi(v, spec.beta, spec.epsilon, Triple(spec.alpha, spec.s))
    elif isinstance(spec, CriticalShift):
        sol = _solve_critical(v, spec.beta, spec.alpha)
    else:
        raise ConfigError(f"unknown transform {spec!r}")
    return Transformed(_scale(v, sol.psi), sol.psi, sol.iterations, sol.residual)


def strip_of_w(w: SpectralField, spec: TransformSpec, t: float = 0.0) -> float:
    """The strip ``psi`` defined directly by the forward formula from ``w``."""
    if isinstance(spec, LinearInTime):
        return spec.beta * t
    if isinstance(spec, CriticalShift):
        return spec.beta / (1.0 + triple_norm(w, TripleNormParams(spec.alpha, 0.5))) ** 2
    if isinstance(spec, FixedSobolev):
        nrm = sobolev_norm(w, spec.s + 1.5)
    else:
        nrm = triple_norm(w, TripleNormParams(spec.alpha, spec.s))
    if nrm == 0.0:
        raise TransformError("damping exponent undefined for a zero field")
    return spec.beta * nrm ** (-spec.epsilon)


def w_to_v(w: SpectralField, spec: TransformSpec, t: float = 0.0) -> SpectralField:
    """Recover ``v`` from ``w``: ``v_n = w_n exp(-psi(w) |n|)``."""
    if isinstance(spec, LinearInTime) and t < 0:
        raise ConfigError("LinearInTime needs t >= 0")
    return _scale(w, -strip_of_w(w, spec, t))


def beta_admissible(v_in: SpectralField, spec: TransformSpec, sigma: float) -> bool:
    """Strict admissibility of ``beta`` relative to the strip ``sigma`` of ``v_in``.

    ``LinearInTime`` places no condition tied to ``sigma``; any positive beta
    is accepted here (the extra bound at s = 1/2 is checked with the theorem
    parameters).
    """
    if not sigma > 0:
        raise ConfigError("sigma must be positive")
    if isinstance(spec, LinearInTime):
        return True
    if isinstance(spec, FixedSobolev):
        rhs = sigma * gevrey_norm(v_in, GevreyIndex(sigma, spec.s + 1.5)) ** spec.epsilon
    elif isinstance(spec, VoigtTriple):
        energy = (
            gevrey_norm(v_in, GevreyIndex(sigma, 0.5)) ** 2
            + spec.alpha**2 * gevrey_norm(v_in, GevreyIndex(sigma, spec.s + 0.5)) ** 2
        )
        rhs = sigma * energy ** (spec.epsilon / 2.0)
    elif isinstance(spec, CriticalShift):
        energy = (
            gevrey_norm(v_in, GevreyIndex(sigma, 0.5)) ** 2
            + spec.alpha**2 * gevrey_norm(v_in, GevreyIndex(sigma, 1.0)) ** 2
        )
        rhs = sigma * (1.0 + math.sqrt(energy)) ** 2
    else:
        raise ConfigError(f"unknown transform {spec!r}")
    return bool(spec.beta < rhs)
