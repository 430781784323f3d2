"""Closed-form constants and bound envelopes, and trajectory certification.

Each theorem bounds a scalar ``xi(t)`` built from the transformed field
``w`` and, through it, a Gevrey-Sobolev norm of ``v``.  Certification
evaluates both bounds along a stored run and records the margins.

Embedding constants ``C_q`` are configuration: the defaults are heuristic
(see :func:`default_embedding_constant`) and every report echoes the values
actually used together with their provenance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import integrate as sint
from scipy.special import gammaln

from .dynamics import RunSeries
from .errors import ConfigError, ReportIncomplete
from .lattice import SpectralField
from .norms import TripleNormParams, sobolev_norm, triple_norm
from .xform import CriticalShift, FixedSobolev, LinearInTime, VoigtTriple, v_to_w

__all__ = [
    "lattice_sum_cs",
    "default_embedding_constant",
    "BoundConstants",
    "Thm1Params",
    "Thm2Params",
    "Thm3Params",
    "Thm4Params",
    "Thm5Params",
    "thm1_envelope",
    "thm1_horizon",
    "thm1_xi_bound",
    "thm2_envelope",
    "thm3_envelope",
    "thm4_envelope",
    "thm5_envelope",
    "thm5_horizon",
    "TheoremSetup",
    "BoundReport",
    "certify",
    "VERDICTS",
]

VERDICTS = (
    "certified-within-envelope",
    "envelope-violated",
    "horizon-exceeded",
    "integration-failed",
)

# Relative slack when comparing a monitored value with its envelope; absorbs
# the rounding difference between xi(0) and the envelope evaluated at t = 0.
MARGIN_RTOL = 1e-12

DEFAULT_SAFETY = 4.0
DEFAULT_CS_TAIL_TOL = 1e-8


# ---------------------------------------------------------------------------
# Lattice sum c_s
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _outer_cube_integral(m: float) -> float:
    """``int_{R^3 minus [-1,1]^3} |x|^-m dx`` for ``m > 3``.

    Reduces to ``6/(m-3) * int_{[-1,1]^2} (1 + x^2 + y^2)^(-m/2)``.
    """
    val, _ = sint.dblquad(
        lambda y, x: (1.0 + x * x + y * y) ** (-0.5 * m),
        0.0, 1.0, 0.0, 1.0,
        epsabs=1e-15, epsrel=1e-13,
    )
    return 24.0 * val / (m - 3.0)


def _cube_partial_sum(p: float, M: int) -> float:
    r = np.arange(-M, M + 1, dtype=float)
    sq2 = r[:, None] ** 2 + r[None, :] ** 2
    parts = []
    for n1 in range(0, M + 1):
        d = sq2 + float(n1 * n1)
        if n1 == 0:
            d = d.copy()
            d[M, M] = np.inf
        s = float(np.sum(d ** (-0.5 * p)))
        parts.append(s if n1 == 0 else 2.0 * s)
    return math.fsum(parts)


def _cs_tail(p: float, M: int) -> tuple[float, float]:
    """Integral tail beyond the cube ``max|n_i| <= M`` and its curvature term."""
    a = M + 0.5
    main = a ** (3.0 - p) * _outer_cube_integral(p)
    corr = p * (p - 1.0) / 24.0 * a ** (1.0 - p) * _outer_cube_integral(p + 2.0)
    return main, corr


@lru_cache(maxsize=None)
def lattice_sum_cs(s: float, tail_tol: float = DEFAULT_CS_TAIL_TOL) -> float:
    """``c_s = sqrt(sum_{n != 0} |n|^(-3-2s))``.

    Partial sum over the cube ``max|n_i| <= M`` plus the integral of
    ``|n|^-(3+2s)`` over the rest of space, corrected by the cell-midpoint
    curvature term.  ``M`` grows until that correction is at most
    ``tail_tol`` times the partial sum; the remaining error is of higher
    order in ``1/M``.
    """
    if not s > 0:
        raise ConfigError(f"lattice sum diverges for s <= 0 (got s={s})")
    if not tail_tol > 0:
        raise ConfigError("tail_tol must be positive")
    p = 3.0 + 2.0 * s
    # Partial sum is at least 6 (the |n| = 1 shell), so this M is sufficient.
    k = p * (p - 1.0) / 24.0 * _outer_cube_integral(p + 2.0)
    a = (k / (tail_tol * 6.0)) ** (1.0 / (p - 1.0))
    M = max(32, math.ceil(a - 0.5))
    while True:
        partial = _cube_partial_sum(p, M)
        main, corr = _cs_tail(p, M)
        if corr <= tail_tol * partial:
            break
        M += max(1, M // 4)
    return math.sqrt(partial + main - corr)


# ---------------------------------------------------------------------------
# Embedding constants
# ---------------------------------------------------------------------------


def sharp_whole_space_constant(q: float) -> float:
    """Sharp constant of ``|f|_{6/(3-2q)} <= S ||(-Lap)^(q/2) f||_2`` on R^3."""
    logs2 = (
        -2.0 * q * math.log(2.0)
        - q * math.log(math.pi)
        + gammaln((3.0 - 2.0 * q) / 2.0)
        - gammaln((3.0 + 2.0 * q) / 2.0)
        + (2.0 * q / 3.0) * (gammaln(3.0) - gammaln(1.5))
    )
    return math.exp(0.5 * logs2)


def default_embedding_constant(q: float, safety: float = DEFAULT_SAFETY) -> tuple[float, str]:
    """Heuristic default ``C_q`` with a provenance string.

    ``q = 0`` is Parseval's identity: ``C_0 = (2 pi)^(3/2)`` exactly.  For
    ``0 < q < 3/2`` the default is ``safety`` times the sharp whole-space
    constant rescaled to the coefficient normalisation of ``||.||_q``.  This
    is not a proven bound on the torus.
    """
    if q == 0:
        return (2.0 * math.pi) ** 1.5, "exact: Parseval identity, C_0=(2pi)^(3/2)"
    if not 0 < q < 1.5:
        raise ConfigError(f"embedding constant C_q needs 0 <= q < 3/2, got q={q}")
    value = safety * (2.0 * math.pi) ** 1.5 * sharp_whole_space_constant(q)
    note = (
        f"heuristic default: {safety:g} x sharp R^3 Sobolev constant x (2pi)^(3/2); "
        "not a proven torus bound"
    )
    return value, note


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _key(x: float) -> float:
    return round(float(x), 12)


@dataclass
class BoundConstants:
    """Embedding constants ``C_q`` and lattice sums ``c_s`` with provenance.

    ``C`` and ``cs`` map an index to ``(value, provenance)``; missing
    entries fall back to the documented defaults and are recorded, so a
    report can echo every configured or consulted constant.
    """

    C: dict = field(default_factory=dict)
    cs: dict = field(default_factory=dict)
    safety: float = DEFAULT_SAFETY
    cs_tail_tol: float = DEFAULT_CS_TAIL_TOL
    used: dict = field(default_factory=dict)

    def __post_init__(self):
        self.C = {_key(q): self._entry(v) for q, v in self.C.items()}
        self.cs = {_key(s): self._entry(v) for s, v in self.cs.items()}
        for table in (self.C, self.cs):
            for k, (v, _) in table.items():
                if not (v > 0 and math.isfinite(v)):
                    raise ConfigError(f"constant at index {k} must be positive, got {v}")

    @staticmethod
    def _entry(v):
        if isinstance(v, (tuple, list)):
            return float(v[0]), str(v[1])
        return float(v), "user-configured"

    def embedding(self, q: float) -> float:
        k = _key(q)
        if k not in self.C:
            self.C[k] = default_embedding_constant(k, self.safety)
        self.used[("C", k)] = self.C[k]
        return self.C[k][0]

    def lattice_sum(self, s: float) -> float:
        k = _key(s)
        if k not in self.cs:
            self.cs[k] = (
                lattice_sum_cs(k, self.cs_tail_tol),
                f"computed: cube partial sum + integral tail, tail_tol={self.cs_tail_tol:g}",
            )
        self.used[("c_s", k)] = self.cs[k]
        return self.cs[k][0]

    def table(self) -> list:
        """Configured and consulted constants, sorted, as JSON-ready rows."""
        entries = {("C", k): e for k, e in self.C.items()}
        entries.update({("c_s", k): e for k, e in self.cs.items()})
        rows = []
        for (kind, k), (v, prov) in sorted(entries.items()):
            rows.append({"name": kind, "index": k, "value": v, "provenance": prov,
                         "used": (kind, k) in self.used})
        return rows

    @classmethod
    def from_table(cls, rows: list) -> "BoundConstants":
        C = {r["index"]: (r["value"], r["provenance"]) for r in rows if r["name"] == "C"}
        cs = {r["index"]: (r["value"], r["provenance"]) for r in rows if r["name"] == "c_s"}
        return cls(C=C, cs=cs)


# ---------------------------------------------------------------------------
# Theorem 1 (Euler and inviscid Burgers)
# ---------------------------------------------------------------------------


def thm1_A(beta: float, epsilon: float) -> float:
    return 2.0 * beta * epsilon / (2.0 - epsilon)


def thm1_theta(epsilon: float) -> float:
    return (1.0 + epsilon) / (2.0 - epsilon)


def thm1_D(c_s: float, C1: float, C_half: float) -> float:
    return (c_s + C1 * C_half) / (4.0 * math.pi**3)


@dataclass(frozen=True)
class Thm1Params:
    s: float
    beta: float
    epsilon: float
    D_s: float
    xi0: float = 0.0

    def __post_init__(self):
        if not 0 < self.s <= 0.5:
            raise ConfigError(f"Theorem 1 needs 0 < s <= 1/2, got {self.s}")
        if not 0 < self.epsilon < 2:
            raise ConfigError(f"Theorem 1 needs 0 < epsilon < 2, got {self.epsilon}")
        if not (self.beta > 0 and self.D_s > 0 and self.xi0 >= 0):
            raise ConfigError("Theorem 1 needs beta > 0, D_s > 0, xi0 >= 0")

    @classmethod
    def build(cls, s, beta, epsilon, constants: BoundConstants, xi0=0.0):
        D = thm1_D(constants.lattice_sum(s), constants.embedding(1.0), constants.embedding(0.5))
        return cls(s=s, beta=beta, epsilon=epsilon, D_s=D, xi0=xi0)

    @property
    def A(self) -> float:
        return thm1_A(self.beta, self.epsilon)

    @property
    def theta(self) -> float:
        return thm1_theta(self.epsilon)

    @property
    def t_star(self) -> float:
        return thm1_horizon(self)


def thm1_horizon(p: Thm1Params) -> float:
    """``t_* = (D_s theta)^-1 A^(3/(2-eps)) xi0^-theta``."""
    if p.xi0 == 0:
        return math.inf
    return p.A ** (3.0 / (2.0 - p.epsilon)) / (p.D_s * p.theta * p.xi0**p.theta)


def _thm1_check(p, t):
    if t < 0:
        raise ConfigError("t must be >= 0")
    if t >= p.t_star:
        raise ConfigError(f"t={t} is beyond the horizon t_*={p.t_star}")


def thm1_xi_bound(p: Thm1Params, t: float) -> float:
    """``(xi0^-theta - D_s theta A^(-3/(2-eps)) t)^(-1/theta)``."""
    _thm1_check(p, t)
    if p.xi0 == 0:
        return 0.0
    inner = p.xi0 ** (-p.theta) - p.D_s * p.theta * p.A ** (-3.0 / (2.0 - p.epsilon)) * t
    return inner ** (-1.0 / p.theta)


@dataclass(frozen=True)
class Envelope:
    phi: float
    sigma_index: float
    norm_bound: float = math.nan


def thm1_envelope(p: Thm1Params, t: float) -> Envelope:
    """``phi(t) = ((A/xi0)^theta - D_s theta t / A)^(-1/(1+eps))``, strip ``beta phi^-eps``."""
    _thm1_check(p, t)
    if p.xi0 == 0:
        return Envelope(0.0, math.inf, 0.0)
    inner = (p.A / p.xi0) ** p.theta - p.D_s * p.theta * t / p.A
    phi = inner ** (-1.0 / (1.0 + p.epsilon))
    return Envelope(phi, p.beta * phi ** (-p.epsilon), phi)


# ---------------------------------------------------------------------------
# Theorem 2 (Euler-Voigt)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Thm2Params:
    zeta: float
    s: float
    alpha: float
    beta: float
    D: float
    xi0: float = 0.0

    def __post_init__(self):
        if not 0 < self.zeta <= 1.0 / 6.0 + 1e-15:
            raise ConfigError(f"Theorem 2 needs 0 < zeta <= 1/6, got {self.zeta}")
        if not self.s >= 5.0 / 6.0 + self.zeta - 1e-15:
            raise ConfigError(f"Theorem 2 needs s >= 5/6 + zeta, got s={self.s}")
        if not (self.alpha > 0 and self.beta > 0 and self.D > 0 and self.xi0 >= 0):
            raise ConfigError("Theorem 2 needs alpha, beta, D > 0 and xi0 >= 0")

    @classmethod
    def build(cls, zeta, s, alpha, beta, constants: BoundConstants, xi0=0.0):
        D = (
            beta
            * constants.embedding(5.0 / 6.0 + zeta)
            * constants.embedding(1.0 / 3.0 - zeta / 2.0) ** 2
            * (math.pi * alpha) ** -3
            / 4.0
        )
        return cls(zeta=zeta, s=s, alpha=alpha, beta=beta, D=D, xi0=xi0)

    @property
    def epsilon(self) -> float:
        return 2.0 - 6.0 * self.zeta

    @property
    def A(self) -> float:
        return thm1_A(self.beta, self.epsilon)

    @property
    def exponential(self) -> bool:
        return abs(self.zeta - 1.0 / 6.0) <= 1e-15


def thm2_envelope(p: Thm2Params, xi0: Optional[float], t: float) -> Envelope:
    """Polynomial (zeta < 1/6) or exponential (zeta = 1/6) bound on xi."""
    xi0 = p.xi0 if xi0 is None else xi0
    if t < 0:
        raise ConfigError("t must be >= 0")
    if p.exponential:
        phi = 0.0 if xi0 == 0 else xi0 * _exp(p.D * t)
    else:
        m = 0.5 - 3.0 * p.zeta
        phi = (xi0**m + m * p.D * t) ** (1.0 / m)
    ratio = phi / p.A
    return Envelope(phi, p.beta * ratio ** (1.0 - 1.0 / (3.0 * p.zeta)), ratio ** (1.0 / (6.0 * p.zeta)))


# ---------------------------------------------------------------------------
# Theorem 3 (NS-Voigt, 1/2 < s < 1)
# ---------------------------------------------------------------------------


def thm3_kappa(s: float, epsilon: float) -> float:
    return min(1.0, (s - 1.0 / epsilon) / (1.0 - s))


@dataclass(frozen=True)
class Thm3Params:
    s: float
    epsilon: float
    alpha: float
    beta: float
    nu: float
    D_se: float
    xi0: float = 0.0

    def __post_init__(self):
        if not 0.5 < self.s < 1.0:
            raise ConfigError(f"Theorem 3 needs 1/2 < s < 1, got {self.s}")
        if not 1.0 / self.s < self.epsilon < 2.0:
            raise ConfigError(f"Theorem 3 needs 1/s < epsilon < 2, got {self.epsilon}")
        if not (self.alpha > 0 and self.beta > 0 and self.nu > 0 and self.D_se > 0 and self.xi0 >= 0):
            raise ConfigError("Theorem 3 needs alpha, beta, nu, D > 0 and xi0 >= 0")

    @classmethod
    def build(cls, s, epsilon, alpha, beta, nu, constants: BoundConstants, xi0=0.0):
        D = (
            constants.embedding(1.0)
            * constants.embedding(1.0 - s)
            * constants.embedding(s - 0.5)
            * (2.0 * beta) ** (1.0 / epsilon)
            * (2.0 * math.pi) ** -3
            / alpha
        )
        return cls(s=s, epsilon=epsilon, alpha=alpha, beta=beta, nu=nu, D_se=D, xi0=xi0)

    @property
    def A(self) -> float:
        return thm1_A(self.beta, self.epsilon)

    @property
    def kappa(self) -> float:
        return thm3_kappa(self.s, self.epsilon)

    @property
    def D_prime(self) -> float:
        k = self.kappa
        log_d = (
            (2.0 / k) * math.log(self.D_se)
            + math.log(k / (2.0 * self.alpha**2))
            + ((2.0 - k) / k) * math.log((2.0 - k) / (4.0 * self.nu))
        )
        return _exp(log_d)


def thm3_envelope(p: Thm3Params, xi0: Optional[float], t: float) -> Envelope:
    """``phi = xi0 exp(D' t)``; norm bound ``(phi/A)^(1/(2-eps))``."""
    xi0 = p.xi0 if xi0 is None else xi0
    if t < 0:
        raise ConfigError("t must be >= 0")
    phi = 0.0 if xi0 == 0 else xi0 * _exp(p.D_prime * t)
    ratio = phi / p.A
    e = p.epsilon
    return Envelope(phi, p.beta * ratio ** (-e / (2.0 - e)), ratio ** (1.0 / (2.0 - e)))


# ---------------------------------------------------------------------------
# Theorem 4 (NS-Voigt, s = 1/2, critical damping)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Thm4Params:
    alpha: float
    nu: float
    beta: float
    beta_max: float
    xi0: float = 0.0

    def __post_init__(self):
        if not (self.alpha > 0 and self.nu > 0 and self.beta > 0 and self.xi0 >= 0):
            raise ConfigError("Theorem 4 needs alpha, nu, beta > 0 and xi0 >= 0")
        if not self.beta <= self.beta_max:
            raise ConfigError(
                f"Theorem 4 needs beta <= 2 nu^2 (2pi)^6 C_1/2^-2 C_1^-2 alpha^4 = {self.beta_max:.6g}"
            )

    @staticmethod
    def max_beta(alpha, nu, C_half, C1) -> float:
        return 2.0 * nu**2 * (2.0 * math.pi) ** 6 * alpha**4 / (C_half**2 * C1**2)

    @classmethod
    def build(cls, alpha, nu, beta, constants: BoundConstants, xi0=0.0):
        bm = cls.max_beta(alpha, nu, constants.embedding(0.5), constants.embedding(1.0))
        return cls(alpha=alpha, nu=nu, beta=beta, beta_max=bm, xi0=xi0)


def thm4_envelope(p: Thm4Params, xi0: Optional[float] = None) -> Envelope:
    """Time-independent: ``sqrt(xi0 + 6 beta)`` at strip ``beta exp(-xi0/(2 beta) - 3)``."""
    xi0 = p.xi0 if xi0 is None else xi0
    return Envelope(
        xi0 + 6.0 * p.beta,
        p.beta * math.exp(-xi0 / (2.0 * p.beta) - 3.0),
        math.sqrt(xi0 + 6.0 * p.beta),
    )


# ---------------------------------------------------------------------------
# Theorem 5 (NS-Voigt, 0 < s <= 1/2, instantaneous analyticity)
# ---------------------------------------------------------------------------


def thm5_Q1(beta, alpha, eta2, s) -> float:
    if beta <= eta2 / alpha**2:
        return 0.0
    if s >= 0.5:
        raise ConfigError("at s = 1/2 the transform needs beta <= eta2/alpha^2")
    x = (beta * alpha**2 / (2.0 * eta2 * (1.0 - s))) ** (1.0 / (1.0 - 2.0 * s))
    return beta * (1.0 - 2.0 * s) / (2.0 * (1.0 - s)) * x


def thm5_Q2(gamma, eta3, C_gamma, C_half, C_1mg) -> float:
    d = 2.0 * gamma - 1.0
    return (
        2.0 * d
        * ((5.0 - 2.0 * gamma) / eta3) ** ((5.0 - 2.0 * gamma) / d)
        * (C_gamma * C_half * C_1mg / (4.0 * (2.0 * math.pi) ** 3)) ** (4.0 / d)
    )


def thm5_q(beta, eta1, Q1) -> float:
    return max(beta**2 / (2.0 * eta1), 2.0 * Q1)


def thm5_t_star(gamma, q, Q2, xi0) -> float:
    """``((2 gamma - 1)/(2q)) ln(1 + q / (Q2 xi0^(1/(gamma-1/2))))``; q = 0 by its limit."""
    if xi0 == 0:
        return math.inf
    h = gamma - 0.5
    z = Q2 * xi0 ** (1.0 / h)
    if q == 0:
        return h / z
    return (2.0 * gamma - 1.0) / (2.0 * q) * math.log1p(q / z)


@dataclass(frozen=True)
class Thm5Params:
    s: float
    gamma: float
    alpha: float
    beta: float
    eta1: float
    eta2: float
    eta3: float
    C_gamma: float
    C_half: float
    C_1mg: float
    xi0: float = 0.0

    def __post_init__(self):
        if not 0 < self.s <= 0.5:
            raise ConfigError(f"Theorem 5 needs 0 < s <= 1/2, got {self.s}")
        if not 0.5 < self.gamma <= 1.0:
            raise ConfigError(f"Theorem 5 needs 1/2 < gamma <= 1, got {self.gamma}")
        if not min(self.eta1, self.eta2, self.eta3) > 0:
            raise ConfigError("Theorem 5 needs eta1, eta2, eta3 > 0")
        if not (self.alpha > 0 and self.beta > 0 and self.xi0 >= 0):
            raise ConfigError("Theorem 5 needs alpha, beta > 0 and xi0 >= 0")
        if self.s == 0.5 and self.beta > self.eta2 / self.alpha**2:
            raise ConfigError("Theorem 5 at s = 1/2 needs beta <= eta2/alpha^2")

    @classmethod
    def build(cls, s, gamma, alpha, beta, eta1, eta2, eta3, nu, constants: BoundConstants, xi0=0.0):
        if not math.isclose(eta1 + eta2 + eta3, nu, rel_tol=1e-12, abs_tol=0.0):
            raise ConfigError(f"Theorem 5 needs eta1 + eta2 + eta3 = nu = {nu}")
        return cls(
            s=s, gamma=gamma, alpha=alpha, beta=beta,
            eta1=eta1, eta2=eta2, eta3=eta3,
            C_gamma=constants.embedding(gamma),
            C_half=constants.embedding(0.5),
            C_1mg=constants.embedding(1.0 - gamma),
            xi0=xi0,
        )

    @property
    def Q1(self) -> float:
        return thm5_Q1(self.beta, self.alpha, self.eta2, self.s)

    @property
    def Q2(self) -> float:
        return thm5_Q2(self.gamma, self.eta3, self.C_gamma, self.C_half, self.C_1mg)

    @property
    def q(self) -> float:
        return thm5_q(self.beta, self.eta1, self.Q1)

    @property
    def t_star(self) -> float:
        return thm5_horizon(self, self.xi0)


def thm5_horizon(p: Thm5Params, xi0: Optional[float] = None) -> float:
    return thm5_t_star(p.gamma, p.q, p.Q2, p.xi0 if xi0 is None else xi0)


def thm5_envelope(p: Thm5Params, xi0: Optional[float], t: float) -> Envelope:
    """``phi(t) = e^(qt) (xi0^-mu - (Q2/q)(e^(mu q t) - 1))^(-1/mu)``, ``mu = 1/(gamma-1/2)``."""
    xi0 = p.xi0 if xi0 is None else xi0
    if t < 0:
        raise ConfigError("t must be >= 0")
    if t >= thm5_horizon(p, xi0):
        raise ConfigError(f"t={t} is beyond the horizon")
    if xi0 == 0:
        return Envelope(0.0, p.beta * t, 0.0)
    h = p.gamma - 0.5
    q = p.q
    growth = p.Q2 * t / h if q == 0 else (p.Q2 / q) * math.expm1(q * t / h)
    phi = _exp(q * t) * (xi0 ** (-1.0 / h) - growth) ** (-h)
    return Envelope(phi, p.beta * t, math.sqrt(phi))


# ---------------------------------------------------------------------------
# Theorem setups: monitors, envelopes, certification
# ---------------------------------------------------------------------------


@dataclass
class TheoremSetup:
    """Everything certification needs for one theorem.

    ``params`` is a frozen ``Thm*Params`` (with ``xi0``); ``raw`` echoes the
    configured parameters.  ``gevrey_q`` is the Sobolev index of the
    monitored Gevrey-Sobolev norm of ``v`` at strip ``psi(t)``.
    """

    theorem: int
    params: object
    raw: dict
    constants: BoundConstants
    notes: list = field(default_factory=list)

    # -- theorem-specific pieces ------------------------------------------
    @property
    def transform(self):
        p = self.params
        if self.theorem == 1:
            return FixedSobolev(p.beta, p.epsilon, p.s)
        if self.theorem in (2, 3):
            return VoigtTriple(p.beta, p.epsilon, p.alpha, p.s)
        if self.theorem == 4:
            return CriticalShift(p.beta, p.alpha)
        return LinearInTime(p.beta)

    @property
    def gevrey_q(self) -> float:
        p = self.params
        return {1: lambda: p.s + 1.5, 2: lambda: 0.5, 3: lambda: 0.5, 4: lambda: 0.0,
                5: lambda: p.gamma}[self.theorem]()

    def xi_of_w(self, w: SpectralField) -> float:
        p = self.params
        th = self.theorem
        if th == 1:
            return sobolev_norm(w, 1.0 + p.s) ** 2 + p.A * sobolev_norm(w, p.s + 1.5) ** (2.0 - p.epsilon)
        if th in (2, 3):
            trip = triple_norm(w, TripleNormParams(p.alpha, p.s))
            return (
                sobolev_norm(w, 0.0) ** 2
                + p.alpha**2 * sobolev_norm(w, p.s) ** 2
                + p.A * trip ** (2.0 - p.epsilon)
            )
        if th == 4:
            trip = triple_norm(w, TripleNormParams(p.alpha, 0.5))
            return (
                sobolev_norm(w, 0.0) ** 2
                + p.alpha**2 * sobolev_norm(w, 0.5) ** 2
                + 4.0 * p.beta * math.log1p(trip)
            )
        return sobolev_norm(w, p.gamma) ** 2 + p.alpha**2 * sobolev_norm(w, 0.5 + p.gamma) ** 2

    @property
    def monitored_norm(self) -> str:
        """``"sobolev"`` (``||w||_{gevrey_q}``) or, for Theorem 3 only, ``"triple"``."""
        return self.raw.get("monitored_norm", "sobolev") if self.theorem == 3 else "sobolev"

    def monitor(self, v: SpectralField, t: float) -> tuple:
        """``(psi, monitored norm of w, xi)`` for the field ``v`` at time ``t``."""
        tr = v_to_w(v, self.transform, t)
        if self.monitored_norm == "triple":
            p = self.params
            norm = triple_norm(tr.w, TripleNormParams(p.alpha, p.s))
        else:
            norm = sobolev_norm(tr.w, self.gevrey_q)
        return tr.psi, norm, self.xi_of_w(tr.w)

    @property
    def t_star(self) -> float:
        if self.theorem == 1:
            return self.params.t_star
        if self.theorem == 5:
            return self.params.t_star
        return math.inf

    def envelope(self, t: float) -> tuple[float, float, float]:
        """``(xi_bound, norm_bound, sigma_index)`` at time ``t``."""
        p = self.params
        if self.theorem == 1:
            env = thm1_envelope(p, t)
            return thm1_xi_bound(p, t), env.phi, env.sigma_index
        if self.theorem == 2:
            env = thm2_envelope(p, None, t)
        elif self.theorem == 3:
            env = thm3_envelope(p, None, t)
        elif self.theorem == 4:
            env = thm4_envelope(p)
        else:
            env = thm5_envelope(p, None, t)
        return env.phi, env.norm_bound, env.sigma_index

    def derived(self) -> dict:
        p = self.params
        out = {"xi0": p.xi0, "t_star": self.t_star}
        if self.theorem == 1:
            out.update(A=p.A, theta=p.theta, D_s=p.D_s)
        elif self.theorem == 2:
            out.update(A=p.A, epsilon=p.epsilon, D=p.D)
        elif self.theorem == 3:
            out.update(A=p.A, kappa=p.kappa, D_se=p.D_se, D_prime=p.D_prime)
        elif self.theorem == 4:
            out.update(beta_max=p.beta_max)
        else:
            out.update(Q1=p.Q1, Q2=p.Q2, q=p.q)
        return out


def build_setup(theorem: int, raw: dict, constants: BoundConstants, xi0: float = 0.0) -> TheoremSetup:
    """Construct theorem parameters from a flat parameter dict.

    Required keys: 1: s, beta, epsilon; 2: zeta, s, alpha, beta;
    3: s, epsilon, alpha, beta, nu; 4: alpha, nu, beta;
    5: s, gamma, alpha, beta, eta1, eta2, eta3, nu.
    Theorem 3 also accepts ``monitored_norm``: ``"sobolev"`` (default,
    ``||w||_{1/2}``) or ``"triple"`` (``|||w|||``); both sit below the bound.
    """
    r = {k: float(v) for k, v in raw.items() if isinstance(v, (int, float))}
    notes = []
    mon = raw.get("monitored_norm", "sobolev")
    if mon not in ("sobolev", "triple") or (mon == "triple" and theorem != 3):
        raise ConfigError(f"monitored_norm={mon!r} is not available for theorem {theorem}")
    try:
        if theorem == 1:
            p = Thm1Params.build(r["s"], r["beta"], r["epsilon"], constants, xi0)
        elif theorem == 2:
            p = Thm2Params.build(r["zeta"], r["s"], r["alpha"], r["beta"], constants, xi0)
        elif theorem == 3:
            p = Thm3Params.build(r["s"], r["epsilon"], r["alpha"], r["beta"], r["nu"], constants, xi0)
        elif theorem == 4:
            p = Thm4Params.build(r["alpha"], r["nu"], r["beta"], constants, xi0)
        elif theorem == 5:
            p = Thm5Params.build(
                r["s"], r["gamma"], r["alpha"], r["beta"],
                r["eta1"], r["eta2"], r["eta3"], r["nu"], constants, xi0,
            )
            if p.s < 0.5:
                notes.append(
                    "s < 1/2: xi uses ||w||_{1/2+gamma} as written, while the energy "
                    "estimate involves ||w||_{gamma+s}"
                )
        else:
            raise ConfigError(f"unknown theorem id {theorem}")
    except KeyError as exc:
        raise ConfigError(f"theorem {theorem} parameter missing: {exc.args[0]}") from None
    return TheoremSetup(theorem=theorem, params=p, raw=dict(raw), constants=constants, notes=notes)


def with_xi0(setup: TheoremSetup, xi0: float) -> TheoremSetup:
    from dataclasses import replace

    return TheoremSetup(
        theorem=setup.theorem,
        params=replace(setup.params, xi0=xi0),
        raw=setup.raw,
        constants=setup.constants,
        notes=list(setup.notes),
    )


@dataclass
class BoundReport:
    theorem: int
    parameters: dict
    derived: dict
    constants: list
    samples: list
    verdict: str
    min_margin: Optional[float]
    min_norm_margin: Optional[float]
    series_status: str
    failed_at: Optional[float]
    notes: list

    def to_dict(self) -> dict:
        return {
            "schema": "gevrey-report/1",
            "theorem": self.theorem,
            "parameters": self.parameters,
            "derived": self.derived,
            "constants": self.constants,
            "samples": self.samples,
            "verdict": self.verdict,
            "min_margin": self.min_margin,
            "min_norm_margin": self.min_norm_margin,
            "series_status": self.series_status,
            "failed_at": self.failed_at,
            "margin_rtol": MARGIN_RTOL,
            "notes": self.notes,
        }


def _finite_or_none(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _clean(obj):
    if isinstance(obj, float):
        return _finite_or_none(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def certify(run: RunSeries, setup: TheoremSetup, *, fill_series: bool = True) -> BoundReport:
    """Compare the monitored ``xi`` and norm with their envelopes sample by sample.

    Samples at or beyond the horizon are marked ``beyond-horizon`` and carry
    no margin.  Samples are processed in time order, so the report is a
    deterministic function of its inputs.
    """
    n = len(run.times)
    for name in ("xi", "gevrey"):
        col = getattr(run, name)
        if len(col) != n or any(not math.isfinite(x) for x in col):
            raise ReportIncomplete(f"series column '{name}' is missing or incomplete")
    t_star = setup.t_star
    samples = []
    any_bad = any_beyond = False
    margins, nmargins = [], []
    for i, t in enumerate(run.times):
        xi = run.xi[i]
        nrm = run.gevrey[i]
        if t >= t_star:
            any_beyond = True
            samples.append({"t": t, "monitored": xi, "envelope": None, "margin": None,
                            "norm": nrm, "norm_bound": None, "norm_margin": None,
                            "status": "beyond-horizon"})
            if fill_series:
                run.envelope[i] = math.nan
                run.margin[i] = math.nan
            continue
        xb, nb, sig = setup.envelope(t)
        m = xb - xi
        nm = nb - nrm
        ok = m >= -MARGIN_RTOL * abs(xb) and nm >= -MARGIN_RTOL * abs(nb)
        any_bad |= not ok
        margins.append(m)
        nmargins.append(nm)
        samples.append({"t": t, "monitored": xi, "envelope": xb, "margin": m,
                        "norm": nrm, "norm_bound": nb, "norm_margin": nm,
                        "sigma_index": sig, "status": "ok" if ok else "violated"})
        if fill_series:
            run.envelope[i] = xb
            run.margin[i] = m
    if run.failed:
        verdict = "integration-failed"
    elif any_bad:
        verdict = "envelope-violated"
    elif any_beyond:
        verdict = "horizon-exceeded"
    else:
        verdict = "certified-within-envelope"
    return BoundReport(
        theorem=setup.theorem,
        parameters=_clean(setup.raw),
        derived=_clean(setup.derived()),
        constants=_clean(setup.constants.table()),
        samples=_clean(samples),
        verdict=verdict,
        min_margin=_finite_or_none(min(margins)) if margins else None,
        min_norm_margin=_finite_or_none(min(nmargins)) if nmargins else None,
        series_status=run.status,
        failed_at=_finite_or_none(run.failed_at),
        notes=list(setup.notes),
    )
