"""Sobolev, Gevrey-Sobolev and Voigt energy norms of spectral fields."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DiagnosticUnavailable
from .lattice import ScalarSpectralField, SpectralField

__all__ = [
    "GevreyIndex",
    "TripleNormParams",
    "RadiusFit",
    "sobolev_norm",
    "gevrey_norm",
    "gevrey_weight",
    "triple_norm",
    "triple_weight",
    "modulus_spectrum",
    "fit_analyticity_radius",
]

# Above this exponent the weighted sum is evaluated in log-sum-exp form.
_LOG_SWITCH = 300.0


@dataclass(frozen=True)
class GevreyIndex:
    sigma: float
    q: float

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ConfigError(f"Gevrey index sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class TripleNormParams:
    alpha: float
    s: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.s > 0):
            raise ConfigError("triple norm needs alpha > 0 and s > 0")


def _modulus_sq_arr(c: np.ndarray) -> np.ndarray:
    if c.ndim == 4:
        return np.sum(c.real**2 + c.imag**2, axis=0)
    return c.real**2 + c.imag**2


def _modulus_sq(f) -> np.ndarray:
    return _modulus_sq_arr(f.coeffs)


def _power_weight(lattice, q: float) -> np.ndarray:
    w = np.zeros(lattice.shape)
    nz = lattice.retained
    w[nz] = lattice.knorm[nz] ** (2.0 * q)
    return w


def _sum(terms: np.ndarray) -> float:
    return math.fsum(terms.ravel().tolist())


def sobolev_norm(f, q: float) -> float:
    """``sqrt(sum_n |c_n|^2 |n|^(2q))`` over retained modes."""
    return math.sqrt(_sum(_modulus_sq(f) * _power_weight(f.lattice, q)))


def gevrey_weight(lattice, sigma: float) -> np.ndarray:
    """Per-mode factor ``exp(sigma |n|)``."""
    return np.exp(sigma * lattice.knorm)


def gevrey_norm(f, idx: GevreyIndex | tuple) -> float:
    """Gevrey-Sobolev norm ``sqrt(sum |c_n|^2 exp(2 sigma|n|) |n|^(2q))``.

    For moderate ``sigma`` this is the Sobolev norm of the coefficients
    scaled by :func:`gevrey_weight`, evaluated with the same operations as
    the transforms use, so the two agree bit for bit.
    """
    if not isinstance(idx, GevreyIndex):
        idx = GevreyIndex(*idx)
    lat = f.lattice
    if idx.sigma * lat.N * math.sqrt(3.0) <= _LOG_SWITCH:
        scaled = f.coeffs * gevrey_weight(lat, idx.sigma)
        return math.sqrt(_sum(_modulus_sq_arr(scaled) * _power_weight(lat, idx.q)))
    m2 = _modulus_sq(f)
    nz = lat.retained & (m2 > 0)
    if not np.any(nz):
        return 0.0
    k = lat.knorm[nz]
    logs = np.log(m2[nz]) + 2.0 * idx.q * np.log(k) + 2.0 * idx.sigma * k
    top = logs.max()
    total = _sum(np.exp(logs - top))
    half = 0.5 * top + 0.5 * math.log(total)
    return math.exp(half) if half < 709.0 else math.inf


def triple_weight(lattice, alpha: float, s: float) -> np.ndarray:
    """Per-mode weight ``(1 + alpha^2 |n|^(2s)) |n|`` of the Voigt energy norm."""
    w = np.zeros(lattice.shape)
    nz = lattice.retained
    k = lattice.knorm[nz]
    w[nz] = (1.0 + alpha**2 * k ** (2.0 * s)) * k
    return w


def triple_norm(f: SpectralField, p: TripleNormParams | tuple) -> float:
    """``sqrt(sum (1 + alpha^2|n|^(2s)) |n| |c_n|^2)``."""
    if not isinstance(p, TripleNormParams):
        p = TripleNormParams(*p)
    return math.sqrt(_sum(_modulus_sq(f) * triple_weight(f.lattice, p.alpha, p.s)))


def modulus_spectrum(f, q: float) -> ScalarSpectralField:
    """Scalar field with coefficients ``|c_n| |n|^q``."""
    lat = f.lattice
    w = np.zeros(lat.shape)
    w[lat.retained] = lat.knorm[lat.retained] ** q
    return ScalarSpectralField(lat, np.sqrt(_modulus_sq(f)) * w)


@dataclass(frozen=True)
class RadiusFit:
    sigma_hat: float
    r2: float
    shells: int


def fit_analyticity_radius(f, floor: float = 1e-14) -> RadiusFit:
    """Estimate the analyticity strip width from the spectral decay rate.

    Modes are binned on ``round(|n|)``; in each bin the largest ``|c_n|``
    is kept together with its own ``|n|``, and ``log|c|`` is regressed on
    ``|n|`` over bins whose maximum exceeds ``floor``.
    """
    lat = f.lattice
    mag = np.sqrt(_modulus_sq(f))[lat.retained]
    k = lat.knorm[lat.retained]
    bins = np.rint(k).astype(int)
    xs, ys = [], []
    for b in np.unique(bins):
        sel = np.flatnonzero(bins == b)
        j = sel[np.argmax(mag[sel])]
        if mag[j] > floor:
            xs.append(k[j])
            ys.append(math.log(mag[j]))
    if len(xs) < 3:
        raise DiagnosticUnavailable(
            f"radius fit needs at least 3 shells above {floor:g}, found {len(xs)}"
        )
    x = np.array(xs)
    y = np.array(ys)
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = np.sum((x - xm) * (y - ym)) / sxx
    resid = y - (ym + slope * (x - xm))
    syy = np.sum((y - ym) ** 2)
    r2 = 1.0 if syy == 0 else 1.0 - np.sum(resid**2) / syy
    return RadiusFit(sigma_hat=float(-slope), r2=float(r2), shells=len(xs))
