"""Run configuration, initial conditions, series/report files and verification."""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from .bounds import BoundConstants, TheoremSetup, build_setup, certify, with_xi0
from .dynamics import Burgers, Euler, EulerVoigt, NSVoigt, Observers, RunSeries, integrate
from .errors import ConfigError, ReportIncomplete, SchemaError
from .lattice import Lattice, SpectralField, enforce_hermitian, project_solenoidal, random_field
from .xform import beta_admissible

__all__ = [
    "RUN_SCHEMA",
    "SERIES_SCHEMA",
    "PARAMS_SCHEMA",
    "ICSpec",
    "RunConfig",
    "load_config",
    "make_ic",
    "read_field",
    "write_field",
    "export_series",
    "read_series",
    "run",
    "verify_command",
    "report_json",
    "EXIT_CODES",
]

RUN_SCHEMA = "gevrey-run/1"
SERIES_SCHEMA = "gevrey-series/1"
PARAMS_SCHEMA = "gevrey-params/1"
FIELD_SCHEMA = "gevrey-field/1"

# horizon-exceeded is a valid outcome, not a failure.
EXIT_CODES = {
    None: 0,
    "certified-within-envelope": 0,
    "horizon-exceeded": 0,
    "envelope-violated": 2,
    "integration-failed": 3,
}

_IC_TYPES = ("taylor_green", "abc", "gevrey_random", "file")
_EQ_FOR_THEOREM = {1: ("euler", "burgers"), 2: ("euler_voigt",), 3: ("ns_voigt",),
                   4: ("ns_voigt",), 5: ("ns_voigt",)}


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ICSpec:
    kind: str
    amplitude: float = 1.0
    A: float = 1.0
    B: float = 1.0
    C: float = 1.0
    sigma0: float = 0.5
    q0: float = 0.0
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in _IC_TYPES:
            raise ConfigError(f"unknown IC type {self.kind!r}; expected one of {_IC_TYPES}")
        if not math.isfinite(self.amplitude):
            raise ConfigError("IC amplitude must be finite")
        if self.kind == "gevrey_random" and not self.sigma0 >= 0:
            raise ConfigError("gevrey_random needs sigma0 >= 0")
        if self.kind == "file" and not self.path:
            raise ConfigError("file IC needs a path")


@dataclass
class RunConfig:
    equation: object
    N: int
    dt: float
    t_end: float
    ic: ICSpec
    sample_interval: Optional[float] = None
    horizon_fraction: Optional[float] = None
    seed: Optional[int] = None
    sobolev: tuple = (0.0, 0.5, 1.0)
    gevrey_sigma: float = 0.0
    gevrey_q: float = 0.0
    fit_radius: bool = False
    theorem: Optional[int] = None
    theorem_params: dict = field(default_factory=dict)
    constants: BoundConstants = field(default_factory=BoundConstants)
    out_dir: str = "out"
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (isinstance(self.N, int) and self.N >= 1):
            raise ConfigError("N must be an integer >= 1")
        if not (self.dt > 0 and self.t_end > 0):
            raise ConfigError("dt and t_end must be positive")
        if self.horizon_fraction is not None and not 0 < self.horizon_fraction <= 1:
            raise ConfigError("horizon_fraction must lie in (0, 1]")
        if self.ic.kind == "gevrey_random" and self.seed is None:
            raise ConfigError("a seed is mandatory for random initial conditions")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.theorem is not None:
            allowed = _EQ_FOR_THEOREM.get(self.theorem)
            if allowed is None:
                raise ConfigError(f"unknown theorem id {self.theorem}")
            if self.equation.name not in allowed:
                raise ConfigError(
                    f"theorem {self.theorem} applies to {allowed}, not {self.equation.name}"
                )


def _equation(d: dict):
    kind = d.get("type")
    try:
        if kind == "euler":
            return Euler()
        if kind == "burgers":
            return Burgers(projected=bool(d.get("projected", False)))
        if kind == "euler_voigt":
            return EulerVoigt(float(d["alpha"]), float(d["s"]))
        if kind == "ns_voigt":
            return NSVoigt(float(d["alpha"]), float(d["s"]), float(d["nu"]))
    except KeyError as exc:
        raise ConfigError(f"equation {kind!r} needs parameter {exc.args[0]!r}") from None
    raise ConfigError(f"unknown equation type {kind!r}")


def _constants(d: dict) -> BoundConstants:
    def table(x):
        out = {}
        for k, v in (x or {}).items():
            try:
                out[float(k)] = v
            except ValueError:
                raise ConfigError(f"constant index {k!r} is not a number") from None
        return out

    return BoundConstants(
        C=table(d.get("C")),
        cs=table(d.get("cs")),
        safety=float(d.get("safety", 4.0)),
        cs_tail_tol=float(d.get("cs_tail_tol", 1e-8)),
    )


def _theorem_params(eq, params: dict) -> dict:
    """Fill alpha, s, nu from the equation and reject contradictions."""
    out = dict(params)
    for key in ("alpha", "s", "nu"):
        if hasattr(eq, key):
            val = getattr(eq, key)
            if key in out and not math.isclose(float(out[key]), val, rel_tol=1e-15):
                raise ConfigError(f"theorem parameter {key}={out[key]} contradicts equation {key}={val}")
            out[key] = val
    return out


def config_from_dict(d: dict, *, seed: Optional[int] = None, out_dir: Optional[str] = None) -> RunConfig:
    if d.get("schema") != RUN_SCHEMA:
        raise SchemaError(f"config schema must be {RUN_SCHEMA!r}, got {d.get('schema')!r}")
    try:
        eq = _equation(d["equation"])
        ic_d = dict(d["ic"])
        kind = ic_d.pop("type")
        ic = ICSpec(kind=kind, **ic_d)
        diag = d.get("diagnostics", {})
        th = d.get("theorem")
        out = d.get("output", {})
        cfg = RunConfig(
            equation=eq,
            N=d["N"],
            dt=float(d["dt"]),
            t_end=float(d["t_end"]),
            ic=ic,
            sample_interval=None if d.get("sample_interval") is None else float(d["sample_interval"]),
            horizon_fraction=d.get("horizon_fraction"),
            seed=seed if seed is not None else d.get("seed"),
            sobolev=tuple(float(q) for q in diag.get("sobolev", (0.0, 0.5, 1.0))),
            gevrey_sigma=float(diag.get("gevrey_sigma", 0.0)),
            gevrey_q=float(diag.get("gevrey_q", 0.0)),
            fit_radius=bool(diag.get("fit_radius", False)),
            theorem=None if th is None else int(th["id"]),
            theorem_params={} if th is None else _theorem_params(eq, th.get("params", {})),
            constants=_constants(d.get("constants", {})),
            out_dir=out_dir or out.get("dir", "out"),
            raw=d,
        )
    except KeyError as exc:
        raise ConfigError(f"config is missing {exc.args[0]!r}") from None
    except TypeError as exc:
        raise ConfigError(f"bad config entry: {exc}") from None
    return cfg


def load_config(path: str, **overrides) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return config_from_dict(d, **overrides)


# ---------------------------------------------------------------------------
# Initial conditions and field files
# ---------------------------------------------------------------------------


def _taylor_green(lat: Lattice) -> dict:
    # (sin x cos y cos z, -cos x sin y cos z, 0)
    modes = {}
    for a in (1, -1):
        for b in (1, -1):
            for c in (1, -1):
                modes[(a, b, c)] = np.array([a / 8j, -b / 8j, 0.0])
    return modes


def _abc(lat: Lattice, A: float, B: float, C: float) -> dict:
    # (A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)
    modes = {}
    for sgn in (1, -1):
        modes[(0, 0, sgn)] = np.array([A * sgn / 2j, A / 2, 0.0])
        modes[(0, sgn, 0)] = np.array([C / 2, 0.0, C * sgn / 2j])
        modes[(sgn, 0, 0)] = np.array([0.0, B * sgn / 2j, B / 2])
    return modes


def make_ic(spec: ICSpec, lattice: Lattice, seed: Optional[int] = None, solenoidal: bool = True) -> SpectralField:
    """Initial field on ``lattice`` scaled by ``spec.amplitude``."""
    if spec.kind == "taylor_green":
        f = SpectralField.from_modes(lattice, _taylor_green(lattice), is_solenoidal=True)
    elif spec.kind == "abc":
        f = SpectralField.from_modes(lattice, _abc(lattice, spec.A, spec.B, spec.C), is_solenoidal=True)
    elif spec.kind == "gevrey_random":
        if seed is None:
            raise ConfigError("a seed is mandatory for random initial conditions")
        rng = np.random.default_rng(seed)
        f = random_field(lattice, rng, solenoidal=solenoidal, decay=spec.sigma0,
                         power=spec.q0, unit_direction=True)
    else:
        f = read_field(spec.path)
        if f.lattice.N != lattice.N:
            raise ConfigError(f"field file has N={f.lattice.N}, config has N={lattice.N}")
        if solenoidal:
            f = project_solenoidal(f)
    return f.scaled(spec.amplitude) if spec.amplitude != 1.0 else f


def write_field(f: SpectralField, path: str) -> None:
    """Text format: header lines, then ``n1 n2 n3`` and six real numbers per nonzero mode."""
    lines = [f"# schema: {FIELD_SCHEMA}", f"# N: {f.lattice.N}",
             "n1 n2 n3 re1 im1 re2 im2 re3 im3"]
    for n in f.lattice.modes():
        c = f.coeff(n)
        if np.any(c):
            vals = " ".join(f"{x:.17g}" for z in c for x in (z.real, z.imag))
            lines.append(f"{n[0]} {n[1]} {n[2]} {vals}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_field(path: str) -> SpectralField:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read field file: {exc}") from None
    meta, rows = {}, []
    for ln, line in enumerate(text, 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            k, _, v = s[1:].partition(":")
            meta[k.strip()] = v.strip()
        elif s.startswith("n1"):
            continue
        else:
            parts = s.split()
            if len(parts) != 9:
                raise ConfigError(f"{path}:{ln}: expected 9 columns, found {len(parts)}")
            try:
                n = tuple(int(p) for p in parts[:3])
                x = [float(p) for p in parts[3:]]
            except ValueError:
                raise ConfigError(f"{path}:{ln}: unparsable number") from None
            rows.append((n, np.array([x[0] + 1j * x[1], x[2] + 1j * x[3], x[4] + 1j * x[5]])))
    if meta.get("schema") != FIELD_SCHEMA:
        raise ConfigError(f"{path}: not a field file (schema {meta.get('schema')!r})")
    try:
        lat = Lattice(int(meta["N"]))
    except (KeyError, ValueError):
        raise ConfigError(f"{path}: missing or invalid N header") from None
    try:
        f = SpectralField.from_modes(lat, dict(rows))
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: mode outside the truncation ({exc})") from None
    return enforce_hermitian(f)


# ---------------------------------------------------------------------------
# Series files
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return "%.17g" % x


def _series_columns(series: RunSeries) -> list:
    cols = ["t", "energy"]
    cols += [f"sobolev_{_fmt(q)}" for q in series.sobolev_indices]
    cols += ["gevrey", "psi", "xi", "envelope", "margin"]
    cols += sorted(series.extras)
    return cols


def export_series(series: RunSeries, path: str, meta: Optional[dict] = None) -> None:
    """Whitespace-delimited text with ``# key: value`` headers and 17 significant digits.

    Fixed column order: t, energy, sobolev_<q>..., gevrey, psi, xi,
    envelope, margin, then any extra diagnostics in name order.
    """
    if len(series) == 0:
        raise ConfigError("cannot export an empty series")
    header = {"schema": SERIES_SCHEMA, "status": series.status,
              "failed_at": "none" if series.failed_at is None else _fmt(series.failed_at)}
    header.update(meta or {})
    header.update(series.meta)
    lines = [f"# {k}: {v}" for k, v in header.items()]
    lines.append(" ".join(_series_columns(series)))
    extras = sorted(series.extras)
    for i in range(len(series)):
        row = [series.times[i], series.energy[i]]
        row += [series.sobolev[q][i] for q in series.sobolev_indices]
        row += [series.gevrey[i], series.psi[i], series.xi[i], series.envelope[i], series.margin[i]]
        row += [series.extras[k][i] for k in extras]
        lines.append(" ".join(_fmt(x) for x in row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def read_series(path: str) -> RunSeries:
    """Inverse of :func:`export_series`; missing core columns become NaN-free gaps.

    A core column that is absent leaves the corresponding list empty, which
    certification reports as incomplete.
    """
    with open(path, encoding="utf-8") as fh:
        text = fh.read().splitlines()
    meta, cols, rows = {}, None, []
    for ln, line in enumerate(text, 1):
        if not line.strip():
            continue
        if line.startswith("#"):
            k, _, v = line[1:].partition(":")
            meta[k.strip()] = v.strip()
        elif cols is None:
            cols = line.split()
        else:
            parts = line.split()
            if len(parts) != len(cols):
                raise SchemaError(f"{path}:{ln}: {len(parts)} values for {len(cols)} columns")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise SchemaError(f"{path}:{ln}: unparsable number") from None
    if meta.get("schema") != SERIES_SCHEMA:
        raise SchemaError(f"{path}: series schema must be {SERIES_SCHEMA!r}")
    if cols is None or "t" not in cols:
        raise SchemaError(f"{path}: no header row with a 't' column")
    data = {c: [r[j] for r in rows] for j, c in enumerate(cols)}
    sob = [c for c in cols if c.startswith("sobolev_")]
    series = RunSeries(sobolev_indices=tuple(float(c[len("sobolev_"):]) for c in sob))
    series.times = data["t"]
    for q, c in zip(series.sobolev_indices, sob):
        series.sobolev[q] = data[c]
    core = ("energy", "gevrey", "psi", "xi", "envelope", "margin")
    for name in core:
        setattr(series, name, list(data.get(name, [])))
    known = {"t", *core, *sob}
    series.extras = {c: data[c] for c in cols if c not in known}
    series.status = meta.get("status", "complete")
    fa = meta.get("failed_at", "none")
    series.failed_at = None if fa == "none" else float(fa)
    return series


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


def report_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _params_document(setup: TheoremSetup) -> dict:
    return {
        "schema": PARAMS_SCHEMA,
        "theorem": setup.theorem,
        "parameters": setup.raw,
        "xi0": setup.params.xi0,
        "constants": setup.constants.table(),
        "notes": setup.notes,
    }


def _setup_from_params(doc: dict, theorem: Optional[int] = None) -> TheoremSetup:
    if doc.get("schema") != PARAMS_SCHEMA:
        raise SchemaError(f"params schema must be {PARAMS_SCHEMA!r}")
    th = int(doc["theorem"])
    if theorem is not None and theorem != th:
        raise SchemaError(f"params file is for theorem {th}, not {theorem}")
    constants = BoundConstants.from_table(doc["constants"])
    setup = build_setup(th, doc["parameters"], constants, float(doc["xi0"]))
    setup.notes = list(doc.get("notes", []))
    return setup


def _admissibility_notes(setup: TheoremSetup, v0: SpectralField) -> list:
    """Check that beta is admissible for some strip of the initial data.

    A truncated field is entire, so the condition holds for some finite
    sigma whenever it can hold at all; the first admissible sigma on a
    doubling grid is recorded.  ``sigma_in`` in the parameters pins it.
    """
    spec = setup.transform
    if setup.theorem == 5:
        return []
    if v0.is_zero() and setup.theorem != 4:
        return ["zero initial field: beta admissibility is vacuous"]
    pinned = setup.raw.get("sigma_in")
    grid = [float(pinned)] if pinned is not None else [2.0**k for k in range(-10, 11)]
    for sigma in grid:
        if beta_admissible(v0, spec, sigma):
            return [f"beta admissible for initial strip sigma_in={_fmt(sigma)}"]
    raise ConfigError(
        f"beta={setup.params.beta} is not admissible for the initial data "
        + (f"at sigma_in={pinned}" if pinned is not None else "for any sigma_in up to 1024")
    )


def _clip_to_horizon(cfg: RunConfig, t_star: float) -> float:
    if cfg.horizon_fraction is None or not math.isfinite(t_star):
        return cfg.t_end
    limit = cfg.horizon_fraction * t_star
    if cfg.t_end <= limit:
        return cfg.t_end
    n = math.floor(limit / cfg.dt)
    if n < 1:
        raise ConfigError(f"dt={cfg.dt} exceeds {cfg.horizon_fraction} x t_star={t_star}")
    return n * cfg.dt


def run(cfg: RunConfig, *, quiet: bool = True) -> tuple[int, dict]:
    """Execute a configured run and write its output files.

    Returns ``(exit_code, paths)``.  Outputs: ``series.txt`` always,
    ``params.json`` and ``report.json`` when a theorem is configured.
    """
    lat = Lattice(cfg.N)
    v0 = make_ic(cfg.ic, lat, cfg.seed, solenoidal=cfg.equation.solenoidal)
    setup = None
    t_end = cfg.t_end
    if cfg.theorem is not None:
        setup = build_setup(cfg.theorem, cfg.theorem_params, cfg.constants)
        xi0 = setup.monitor(v0, 0.0)[2]
        setup = with_xi0(setup, xi0)
        setup.notes += _admissibility_notes(setup, v0)
        t_end = _clip_to_horizon(cfg, setup.t_star)
        if t_end != cfg.t_end:
            setup.notes.append(f"t_end clipped from {_fmt(cfg.t_end)} to {_fmt(t_end)}")
    sample = cfg.sample_interval
    if sample is not None and sample > t_end:
        sample = None
    obs = Observers(
        sample_interval=sample,
        sobolev=cfg.sobolev,
        gevrey_sigma=cfg.gevrey_sigma,
        gevrey_q=cfg.gevrey_q,
        monitor=None if setup is None else setup.monitor,
        fit_radius=cfg.fit_radius,
    )
    series = integrate(v0, cfg.equation, cfg.dt, t_end, obs)
    os.makedirs(cfg.out_dir, exist_ok=True)
    paths = {"series": os.path.join(cfg.out_dir, "series.txt")}
    verdict = None
    meta = {
        "version": __version__,
        "equation": cfg.equation.name,
        "N": cfg.N,
        "dt": _fmt(cfg.dt),
        "t_end": _fmt(t_end),
        "ic": cfg.ic.kind,
        "seed": "none" if cfg.seed is None else cfg.seed,
        "theorem": "none" if cfg.theorem is None else cfg.theorem,
    }
    if setup is not None:
        report = certify(series, setup)
        verdict = report.verdict
        paths["params"] = os.path.join(cfg.out_dir, "params.json")
        paths["report"] = os.path.join(cfg.out_dir, "report.json")
        with open(paths["params"], "w", encoding="utf-8") as fh:
            fh.write(json.dumps(_params_document(setup), indent=2, sort_keys=True) + "\n")
        export_series(series, paths["series"], meta)
        with open(paths["report"], "w", encoding="utf-8") as fh:
            fh.write(report_json(report))
    else:
        export_series(series, paths["series"], meta)
    code = 3 if series.failed else EXIT_CODES[verdict]
    if not quiet:
        print(f"status: {series.status}; samples: {len(series)}; t_end: {_fmt(t_end)}")
        if series.failed:
            print(f"integration failed after t={series.failed_at}: {series.message}")
        if verdict is not None:
            print(f"verdict: {verdict}")
        for k, p in paths.items():
            print(f"{k}: {p}")
    return code, paths


def verify_command(series_path: str, params_path: str, out_path: Optional[str] = None,
                   theorem: Optional[int] = None) -> tuple[int, str]:
    """Re-certify a stored series; returns ``(exit_code, report_text)``."""
    with open(params_path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{params_path}: not valid JSON ({exc})") from None
    setup = _setup_from_params(doc, theorem)
    series = read_series(series_path)
    report = certify(series, setup)
    text = report_json(report)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return EXIT_CODES[report.verdict], text


def exit_code_for(exc: BaseException) -> int:
    """Exit code for errors raised before or outside integration."""
    if isinstance(exc, (ReportIncomplete, SchemaError)):
        return 4
    return 1
