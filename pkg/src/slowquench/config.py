"""Experiment configuration: typed schema, validation, JSON round-trip.

A config file is one JSON object with optional sections "model",
"protocol", "grid" and "single" plus flat pipeline settings. Lattice
runs (scan/detect/plot) need model+protocol+grid; abstract two-level
runs (single) need only the "single" section. Values re-serialize to
the byte-identical file, and validation refuses parameter sets sitting
on a phase boundary, where no invariant is defined.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace

from .errors import ConfigError
from .models import BandField, BzGrid, expected_invariant
from .protocols import COULOMB, QuenchProtocol

METHODS = ("auto", "analytic", "numeric")


@dataclass(frozen=True)
class SingleRunSpec:
    """One family of abstract two-level quenches (no lattice attached).

    g_values are swept for the probability/averaged-spin report;
    trajectory_g selects the couplings whose full Bloch trajectory is
    dumped. The window is the time-average interval for the numeric
    spin route.
    """

    epsilon: float = 2.0
    theta: float = math.pi / 3.0
    phi: float = 0.0
    g_values: tuple = (1.0,)
    trajectory_g: tuple = ()
    window: tuple = (400.0, 800.0)
    tol: float = 1e-10

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not 0.0 <= self.theta <= math.pi:
            raise ConfigError(f"theta must lie in [0, pi], got {self.theta}")
        object.__setattr__(self, "g_values",
                           tuple(float(g) for g in self.g_values))
        object.__setattr__(self, "trajectory_g",
                           tuple(float(g) for g in self.trajectory_g))
        for g in self.g_values + self.trajectory_g:
            if g < 0.0:
                raise ConfigError(f"coupling g must be >= 0, got {g}")
        w = tuple(float(x) for x in self.window)
        if len(w) != 2 or not 0.0 < w[0] < w[1]:
            raise ConfigError(f"window must be 0 < begin < end, got {self.window}")
        object.__setattr__(self, "window", w)


@dataclass(frozen=True)
class ExperimentConfig:
    model: BandField | None = None
    protocol: QuenchProtocol | None = None
    grid: BzGrid | None = None
    single: SingleRunSpec | None = None
    method: str = "auto"
    tol: float = 1e-8
    tol_sis: float = 0.02
    threads: int = 1
    plots: bool = False
    out: str = "out"
    seed: int = 0  # reserved; the pipeline is deterministic

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(
                f"method must be one of {METHODS}, got {self.method!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if (self.grid is not None and self.model is not None
                and self.grid.dim != self.model.dim):
            raise ConfigError(
                f"grid dim {self.grid.dim} does not match model dim {self.model.dim}")
        if self.model is not None:
            # raises at gap closings: no invariant is defined there
            expected_invariant(self.model)

    def require_lattice(self) -> None:
        missing = [name for name, val in (("model", self.model),
                                          ("protocol", self.protocol),
                                          ("grid", self.grid)) if val is None]
        if missing:
            raise ConfigError(
                f"lattice run needs config sections: {', '.join(missing)}")

    def require_single(self) -> None:
        if self.single is None:
            raise ConfigError('single run needs a "single" config section')


def _protocol_to_dict(p: QuenchProtocol) -> dict:
    d = {"kind": p.kind, "t_start": p.t_start,
         "t_avg_begin": p.t_avg_begin,
         "t_avg_end": "inf" if math.isinf(p.t_avg_end) else p.t_avg_end}
    if p.kind == COULOMB:
        d["g"] = p.g
    else:
        d["beta"] = p.beta
    return d


def _protocol_from_dict(d: dict) -> QuenchProtocol:
    d = dict(d)
    kind = d.pop("kind", None)
    end = d.pop("t_avg_end", None)
    if end == "inf":
        end = math.inf
    begin = d.pop("t_avg_begin", None)
    window = {k: v for k, v in (("t_avg_begin", begin),
                                ("t_avg_end", end)) if v is not None}
    if kind == COULOMB:
        g = d.pop("g", None)
        t_start = d.pop("t_start", None)
        raise_unknown(d, "protocol")
        if g is None:
            raise ConfigError("coulomb protocol needs g")
        return QuenchProtocol.coulomb(g, t_start=t_start, **window)
    if kind == "linear":
        beta = d.pop("beta", None)
        t_start = d.pop("t_start", None)
        raise_unknown(d, "protocol")
        if beta is None or t_start is None:
            raise ConfigError("linear protocol needs beta and t_start")
        return QuenchProtocol.linear(beta, t_start, **window)
    raise ConfigError(f"unknown protocol kind {kind!r}")


def raise_unknown(d: dict, section: str) -> None:
    if d:
        raise ConfigError(f"unknown {section} keys: {sorted(d)}")


def to_dict(cfg: ExperimentConfig) -> dict:
    out: dict = {}
    if cfg.model is not None:
        out["model"] = asdict(cfg.model)
    if cfg.protocol is not None:
        out["protocol"] = _protocol_to_dict(cfg.protocol)
    if cfg.grid is not None:
        out["grid"] = {"n_points": list(cfg.grid.n_points)}
    if cfg.single is not None:
        s = asdict(cfg.single)
        s["g_values"] = list(cfg.single.g_values)
        s["trajectory_g"] = list(cfg.single.trajectory_g)
        s["window"] = list(cfg.single.window)
        out["single"] = s
    out.update(method=cfg.method, tol=cfg.tol, tol_sis=cfg.tol_sis,
               threads=cfg.threads, plots=cfg.plots, out=cfg.out,
               seed=cfg.seed)
    return out


def from_dict(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    data = dict(data)
    model = None
    if "model" in data:
        try:
            model = BandField(**data.pop("model"))
        except TypeError as exc:
            raise ConfigError(f"bad model section: {exc}") from None
    protocol = None
    if "protocol" in data:
        protocol = _protocol_from_dict(data.pop("protocol"))
    grid = None
    if "grid" in data:
        gd = dict(data.pop("grid"))
        n = gd.pop("n_points", None)
        dim = gd.pop("dim", model.dim if model is not None else None)
        raise_unknown(gd, "grid")
        if n is None or dim is None:
            raise ConfigError("grid section needs n_points (and dim or a model)")
        grid = BzGrid(dim=dim, n_points=tuple(n) if isinstance(n, list) else n)
    single = None
    if "single" in data:
        try:
            single = SingleRunSpec(**data.pop("single"))
        except TypeError as exc:
            raise ConfigError(f"bad single section: {exc}") from None
    known = {"method", "tol", "tol_sis", "threads", "plots", "out", "seed"}
    flat = {k: data.pop(k) for k in list(data) if k in known}
    raise_unknown(data, "config")
    return ExperimentConfig(model=model, protocol=protocol, grid=grid,
                            single=single, **flat)


def load(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    return from_dict(data)


def save(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def with_overrides(cfg: ExperimentConfig, method=None, threads=None,
                   out=None) -> ExperimentConfig:
    """Apply command-line overrides on top of a loaded config."""
    kw = {}
    if method is not None:
        kw["method"] = method
    if threads is not None:
        kw["threads"] = threads
    if out is not None:
        kw["out"] = out
    return replace(cfg, **kw) if kw else cfg
