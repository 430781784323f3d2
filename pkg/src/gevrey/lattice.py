"""Truncated Fourier lattice, spectral fields and the Galerkin nonlinearity.

Fields are stored on the full cube of modes ``-N <= n_i <= N`` with the
components first: ``coeffs[i, n1 + N, n2 + N, n3 + N]``.  The zero mode is
kept in the array (so that ``-n`` is a plain array flip) but always holds 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError

__all__ = [
    "Lattice",
    "SpectralField",
    "ScalarSpectralField",
    "enumerate_modes",
    "project_solenoidal",
    "nonlinear_term",
    "enforce_hermitian",
    "hermitian_defect",
    "divergence_defect",
    "random_field",
]


def enumerate_modes(N: int) -> np.ndarray:
    """All integer 3-vectors with ``0 < max|n_i| <= N`` in lexicographic order.

    Returns an ``(M, 3)`` integer array, ``M = (2N+1)**3 - 1``.
    """
    if int(N) != N or N < 1:
        raise ConfigError(f"truncation radius must be a positive integer, got {N!r}")
    N = int(N)
    r = np.arange(-N, N + 1)
    grid = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    keep = np.any(grid != 0, axis=1)
    return grid[keep]


@lru_cache(maxsize=None)
def _geometry(N: int):
    r = np.arange(-N, N + 1, dtype=float)
    n = np.stack(np.meshgrid(r, r, r, indexing="ij"))  # (3, K, K, K)
    ksq = np.sum(n * n, axis=0)
    knorm = np.sqrt(ksq)
    center = (N, N, N)
    inv_ksq = np.zeros_like(ksq)
    nz = ksq > 0
    inv_ksq[nz] = 1.0 / ksq[nz]
    for a in (n, ksq, knorm, inv_ksq, nz):
        a.setflags(write=False)
    return n, ksq, knorm, inv_ksq, nz, center


@lru_cache(maxsize=None)
def _padding(N: int):
    # M >= 3N + 1 keeps every product mode |p_i| <= 2N from aliasing onto
    # a retained mode, so the retained part of the product is exact.
    M = sfft.next_fast_len(3 * N + 1, real=True)
    idx = np.arange(-N, N + 1) % M
    return M, idx


@dataclass(frozen=True)
class Lattice:
    """Cubic truncation ``0 < max_i |n_i| <= N`` of the Fourier lattice."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ConfigError(f"truncation radius must be a positive integer, got {self.N!r}")
        object.__setattr__(self, "N", int(self.N))

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.size,) * 3

    @property
    def wavevectors(self) -> np.ndarray:
        """Float array ``(3, K, K, K)`` holding the components of ``n``."""
        return _geometry(self.N)[0]

    @property
    def ksq(self) -> np.ndarray:
        return _geometry(self.N)[1]

    @property
    def knorm(self) -> np.ndarray:
        return _geometry(self.N)[2]

    @property
    def inv_ksq(self) -> np.ndarray:
        return _geometry(self.N)[3]

    @property
    def retained(self) -> np.ndarray:
        """Boolean mask of retained (nonzero) modes."""
        return _geometry(self.N)[4]

    def modes(self) -> np.ndarray:
        return enumerate_modes(self.N)

    def index(self, n) -> tuple[int, int, int]:
        n = tuple(int(x) for x in n)
        if max(abs(x) for x in n) > self.N:
            raise ConfigError(f"mode {n} lies outside the truncation N={self.N}")
        return (n[0] + self.N, n[1] + self.N, n[2] + self.N)


class SpectralField:
    """Truncated Fourier coefficients of a real 3-vector field.

    The coefficient array is copied and frozen on construction; fields are
    immutable values.
    """

    __slots__ = ("lattice", "coeffs", "is_solenoidal")

    def __init__(self, lattice: Lattice, coeffs, is_solenoidal: bool = False):
        arr = np.array(coeffs, dtype=complex)
        if arr.shape != (3,) + lattice.shape:
            raise ConfigError(
                f"coefficient array has shape {arr.shape}, expected {(3,) + lattice.shape}"
            )
        arr[(slice(None),) + (lattice.N,) * 3] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "is_solenoidal", bool(is_solenoidal))

    def __setattr__(self, name, value):
        raise AttributeError("SpectralField is immutable")

    def __repr__(self):
        return (
            f"SpectralField(N={self.lattice.N}, solenoidal={self.is_solenoidal}, "
            f"max|c|={np.abs(self.coeffs).max():.3g})"
        )

    @classmethod
    def zeros(cls, lattice: Lattice, is_solenoidal: bool = True) -> "SpectralField":
        return cls(lattice, np.zeros((3,) + lattice.shape, dtype=complex), is_solenoidal)

    @classmethod
    def from_modes(cls, lattice: Lattice, values: dict, is_solenoidal: bool = False):
        """Build a field from ``{mode: 3-vector}``; missing modes are zero.

        No symmetrisation is applied: pass both ``n`` and ``-n`` for a real field.
        """
        arr = np.zeros((3,) + lattice.shape, dtype=complex)
        for n, vec in values.items():
            arr[(slice(None),) + lattice.index(n)] = np.asarray(vec, dtype=complex)
        return cls(lattice, arr, is_solenoidal)

    def coeff(self, n) -> np.ndarray:
        return self.coeffs[(slice(None),) + self.lattice.index(n)].copy()

    def replace(self, coeffs, is_solenoidal: bool | None = None) -> "SpectralField":
        flag = self.is_solenoidal if is_solenoidal is None else is_solenoidal
        return SpectralField(self.lattice, coeffs, flag)

    def scaled(self, c: complex) -> "SpectralField":
        return self.replace(self.coeffs * c)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def to_physical(self, M: int | None = None) -> np.ndarray:
        """Real velocity on an ``M**3`` uniform grid of the cell ``[0, 2pi)^3``."""
        N = self.lattice.N
        M = M or 2 * N + 2
        if M < 2 * N + 1:
            raise ConfigError("physical grid too coarse for the truncation")
        return _to_physical(self.coeffs, N, M)


class ScalarSpectralField:
    """Truncated Fourier coefficients of a scalar field."""

    __slots__ = ("lattice", "coeffs")

    def __init__(self, lattice: Lattice, coeffs):
        arr = np.array(coeffs, dtype=complex)
        if arr.shape != lattice.shape:
            raise ConfigError(f"coefficient array has shape {arr.shape}, expected {lattice.shape}")
        arr[(lattice.N,) * 3] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, "lattice", lattice)
        object.__setattr__(self, "coeffs", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ScalarSpectralField is immutable")

    def coeff(self, n) -> complex:
        return complex(self.coeffs[self.lattice.index(n)])


def _flip(c: np.ndarray) -> np.ndarray:
    """Coefficients at ``-n`` (array flip over the three mode axes)."""
    return c[..., ::-1, ::-1, ::-1]


def _hermitian_array(c: np.ndarray) -> np.ndarray:
    out = 0.5 * (c + np.conj(_flip(c)))
    N = (c.shape[-1] - 1) // 2
    out[..., N, N, N] = 0.0
    return out


def enforce_hermitian(f):
    """Symmetrise ``c(n) <- (c(n) + conj(c(-n))) / 2``; idempotent and exact."""
    if isinstance(f, ScalarSpectralField):
        return ScalarSpectralField(f.lattice, _hermitian_array(f.coeffs))
    return f.replace(_hermitian_array(f.coeffs))


def hermitian_defect(f) -> float:
    """``max |c(n) - conj(c(-n))|``; zero for a real field in canonical storage."""
    return float(np.max(np.abs(f.coeffs - np.conj(_flip(f.coeffs))), initial=0.0))


def divergence_defect(f: SpectralField) -> float:
    """``max_n |c(n).n| / (|c(n)| |n|)`` over modes with nonzero coefficient."""
    lat = f.lattice
    dot = np.abs(np.sum(f.coeffs * lat.wavevectors, axis=0))
    mag = np.sqrt(np.sum(np.abs(f.coeffs) ** 2, axis=0)) * lat.knorm
    nz = mag > 0
    if not np.any(nz):
        return 0.0
    return float(np.max(dot[nz] / mag[nz]))


def _project_array(c: np.ndarray, lattice: Lattice) -> np.ndarray:
    n = lattice.wavevectors
    dot = np.sum(c * n, axis=0)
    return c - n * (dot * lattice.inv_ksq)


def project_solenoidal(f: SpectralField) -> SpectralField:
    """Remove the component of every coefficient parallel to its wavevector."""
    return SpectralField(f.lattice, _project_array(f.coeffs, f.lattice), is_solenoidal=True)


def _to_padded(c: np.ndarray, N: int, M: int) -> np.ndarray:
    """Scatter cube coefficients into an rfft half-spectrum of size ``M``."""
    idx = np.arange(-N, N + 1) % M
    lead = c.shape[:-3]
    P = np.zeros(lead + (M, M, M // 2 + 1), dtype=complex)
    P[..., idx[:, None, None], idx[None, :, None], np.arange(N + 1)[None, None, :]] = c[..., N:]
    return P


def _from_padded(H: np.ndarray, N: int, M: int) -> np.ndarray:
    idx = np.arange(-N, N + 1) % M
    lead = H.shape[:-3]
    K = 2 * N + 1
    out = np.empty(lead + (K, K, K), dtype=complex)
    out[..., N:] = H[..., idx[:, None, None], idx[None, :, None], np.arange(N + 1)[None, None, :]]
    out[..., :N] = np.conj(out[..., ::-1, ::-1, 2 * N:N:-1])
    return out


def _to_physical(c: np.ndarray, N: int, M: int) -> np.ndarray:
    return sfft.irfftn(_to_padded(c, N, M), s=(M, M, M), axes=(-3, -2, -1), norm="forward")


def _to_spectral(u: np.ndarray, N: int, M: int) -> np.ndarray:
    return _from_padded(sfft.rfftn(u, axes=(-3, -2, -1), norm="forward"), N, M)


def _advection_tendency(c: np.ndarray, lattice: Lattice, apply_projection: bool) -> np.ndarray:
    """Galerkin-exact ``-[(v.grad)v]^_n`` (optionally projected), unsymmetrised.

    Uses the identity ``(v.grad)v = grad(|v|^2/2) + omega x v``; the gradient
    part is dropped when projecting since it is parallel to ``n`` per mode.
    """
    N = lattice.N
    M, _ = _padding(N)
    n = lattice.wavevectors
    omega = 1j * np.cross(n, c, axis=0)
    u = _to_physical(np.concatenate([c, omega]), N, M)
    v_phys, w_phys = u[:3], u[3:]
    lamb = np.cross(w_phys, v_phys, axis=0)
    if apply_projection:
        out = -_to_spectral(lamb, N, M)
        return _project_array(out, lattice)
    half_sq = 0.5 * np.sum(v_phys * v_phys, axis=0)
    spec = _to_spectral(np.concatenate([lamb, half_sq[None]]), N, M)
    return -(spec[:3] + 1j * n * spec[3])


def nonlinear_term(f: SpectralField, apply_projection: bool = True) -> SpectralField:
    """Galerkin truncation of ``-i sum_k (c_k.(n-k)) [P_n] c_{n-k}``.

    This is the advective tendency, i.e. ``dv/dt`` of the inviscid system.
    The convolution is evaluated with a zero-padded transform large enough
    that the retained modes carry no aliasing error.
    """
    out = _hermitian_array(_advection_tendency(f.coeffs, f.lattice, apply_projection))
    return SpectralField(f.lattice, out, is_solenoidal=apply_projection)


def random_field(
    lattice: Lattice,
    rng: np.random.Generator,
    *,
    solenoidal: bool = True,
    decay: float = 0.0,
    power: float = 0.0,
    unit_direction: bool = False,
) -> SpectralField:
    """Random real field with ``|c_n|`` shaped like ``exp(-decay|n|) |n|^-power``.

    With ``unit_direction`` the coefficient modulus equals the shape exactly;
    otherwise complex Gaussian amplitudes multiply the shape.
    """
    shape = (3,) + lattice.shape
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if solenoidal:
        z = _project_array(z, lattice)
    z = _hermitian_array(z)
    if unit_direction:
        mag = np.sqrt(np.sum(np.abs(z) ** 2, axis=0))
        mag[~lattice.retained] = 1.0
        z = z / mag
    k = lattice.knorm
    amp = np.zeros_like(k)
    nz = lattice.retained
    amp[nz] = np.exp(-decay * k[nz]) * k[nz] ** (-power)
    return SpectralField(lattice, z * amp, is_solenoidal=solenoidal)
