"""Experiment configs, dispatch and output files.

A config is an INI file::

    [experiment]
    kind = fmsf
    seed = 1
    trials = 1000

    [group]
    family = free
    rank = 2
    power = 2

    [patch]
    type = ball
    radius = 4

Output is a CSV table preceded by ``#`` header lines carrying the format
version, the RNG construction, the config hash and the resolved config as
JSON.  Audit trails go to a JSON-lines file.  Nothing time- or
worker-dependent is written, so reruns are byte-identical.
"""
from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .cayley import build_ball, build_quotient
from .errors import CapExceeded, ConfigError, PatchError
from .fmsf import corollary_scan, estimate_delta_fmsf, theorem1_bound
from .groups import GroupError, make_family, power_multiset, standard_multiset
from .relative import ThetaMap, cycle_structure, relative_cut, tau_stats, theta_n
from .rng import RNG_ID
from .spectral import NonConvergence, cycle_sequence, lambda_exact, spectral_radius_power_iteration
from .trials import run_trials, statistics

FORMAT_VERSION = 1
KINDS = ("spectral", "fmsf", "corollary-scan", "relative-msf", "tau-stats")

# (section, key) for every config field
_LAYOUT = {
    "kind": ("experiment", "kind"),
    "seed": ("experiment", "seed"),
    "trials": ("experiment", "trials"),
    "family": ("group", "family"),
    "rank": ("group", "rank"),
    "dim": ("group", "dim"),
    "orders": ("group", "orders"),
    "power": ("group", "power"),
    "patch": ("patch", "type"),
    "radius": ("patch", "radius"),
    "sides": ("patch", "sides"),
    "vertex_cap": ("patch", "vertex_cap"),
    "radii": ("sweep", "radii"),
    "k_list": ("sweep", "k"),
    "n_list": ("sweep", "n"),
    "a": ("relative", "a"),
    "b": ("relative", "b"),
    "n_max": ("relative", "n_max"),
    "audit": ("relative", "audit"),
    "rule": ("relative", "rule"),
    "iterations": ("tolerance", "iterations"),
    "tolerance": ("tolerance", "tolerance"),
    "csv": ("output", "csv"),
    "audit_path": ("output", "audit"),
}


@dataclass
class ExperimentConfig:
    kind: str = "fmsf"
    seed: int = 0
    trials: int = 100
    family: str = "free"
    rank: int = 2
    dim: int = 0
    orders: tuple = ()
    power: int = 1
    patch: str = "ball"
    radius: int = 3
    sides: tuple = ()
    vertex_cap: int = 2_000_000
    radii: tuple = ()
    k_list: tuple = ()
    n_list: tuple = ()
    a: str = ""
    b: str = ""
    n_max: int = 4
    audit: str = "final"
    rule: str = "witness"
    iterations: int = 20000
    tolerance: float = 1e-12
    csv: str = ""
    audit_path: str = ""

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        for f in dataclasses.fields(self):
            section, key = _LAYOUT[f.name]
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(x) for x in value)
            elif isinstance(value, float):
                value = repr(value)
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, key, str(value))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser()
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError("config", str(exc)) from None
        known = {v: k for k, v in _LAYOUT.items()}
        values = {}
        for section in cp.sections():
            for key, raw in cp.items(section):
                name = known.get((section, key))
                if name is None:
                    raise ConfigError(f"{section}.{key}", "unknown field")
                values[name] = raw
        out = cls()
        for f in dataclasses.fields(cls):
            if f.name not in values:
                continue
            raw = values[f.name].strip()
            default = f.default
            try:
                if isinstance(default, tuple):
                    value = tuple(int(x) for x in raw.split(",") if x.strip())
                elif isinstance(default, bool):
                    value = raw.lower() in ("1", "true", "yes")
                elif isinstance(default, int):
                    value = int(raw)
                elif isinstance(default, float):
                    value = float(raw)
                else:
                    value = raw
            except ValueError:
                raise ConfigError(f.name, f"cannot parse {raw!r}") from None
            setattr(out, f.name, value)
        return out

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError("config", str(exc)) from None
        return cls.from_ini(text)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        data = json.loads(text)
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()

    def validate(self) -> "ExperimentConfig":
        if self.kind not in KINDS:
            raise ConfigError("kind", f"must be one of {', '.join(KINDS)}")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if self.family not in ("free", "abelian", "free_product"):
            raise ConfigError("family", "must be free, abelian or free_product")
        if self.power < 1:
            raise ConfigError("power", "must be >= 1")
        if self.patch not in ("ball", "torus"):
            raise ConfigError("patch", "must be ball or torus")
        if self.patch == "ball" and self.radius < 1:
            raise ConfigError("radius", "must be >= 1")
        if self.patch == "torus":
            if self.family != "abelian":
                raise ConfigError("patch", "torus patches need the abelian family")
            if len(self.sides) != self.dim:
                raise ConfigError("sides", f"need {self.dim} sides, got {len(self.sides)}")
            if any(m < 3 for m in self.sides):
                raise ConfigError("sides", "every side must be >= 3")
        if self.vertex_cap < 1:
            raise ConfigError("vertex_cap", "must be >= 1")
        if self.audit not in ("full", "final", "none"):
            raise ConfigError("audit", "must be full, final or none")
        if self.rule not in ("witness", "component"):
            raise ConfigError("rule", "must be witness or component")
        if self.kind == "corollary-scan":
            if not self.k_list:
                raise ConfigError("k_list", "corollary-scan needs [sweep] k")
            if len(self.radii) != len(self.k_list):
                raise ConfigError("radii", "need one radius per k")
        if self.kind in ("relative-msf", "tau-stats") and not self.a:
            raise ConfigError("a", "needs the a-slot name")
        if self.kind == "tau-stats":
            if not self.b:
                raise ConfigError("b", "needs the b-slot name")
            if not self.n_list or min(self.n_list) < 1:
                raise ConfigError("n_list", "needs positive [sweep] n")
        try:
            self.multiset()
        except (GroupError, ValueError) as exc:
            raise ConfigError("group", str(exc)) from None
        return self

    def multiset(self):
        fam = make_family(self.family, rank=self.rank, dim=self.dim, orders=self.orders)
        S = standard_multiset(fam)
        return S if self.power == 1 else power_multiset(S, self.power)

    def build_patch(self):
        S = self.multiset()
        if self.patch == "torus":
            return build_quotient(S, self.sides)
        return build_ball(S, self.radius, vertex_cap=self.vertex_cap)


@dataclass
class RunRecord:
    kind: str
    config: ExperimentConfig
    columns: list
    rows: list = field(default_factory=list)
    audit: list = field(default_factory=list)
    trials: int = 0
    wall_clock: float = 0.0
    rng: str = RNG_ID
    format_version: int = FORMAT_VERSION

    @property
    def config_hash(self) -> str:
        return self.config.digest()

    def append(self, row: dict):
        self.rows.append([row[c] for c in self.columns])

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# msf-lab format {self.format_version}\n")
        buf.write(f"# kind: {self.kind}\n")
        buf.write(f"# rng: {self.rng}\n")
        buf.write(f"# config_sha256: {self.config_hash}\n")
        buf.write(f"# config: {self.config.to_json()}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(x) for x in row])
        return buf.getvalue()

    def audit_lines(self) -> str:
        return "".join(json.dumps(e, sort_keys=True) + "\n" for e in self.audit)

    def write(self, csv_path=None, audit_path=None):
        if csv_path:
            Path(csv_path).write_text(self.to_csv())
        if audit_path:
            Path(audit_path).write_text(self.audit_lines())


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if x is None:
        return ""
    return x


def read_csv(text: str):
    """Parse an output CSV into (header dict, column names, rows of strings)."""
    header, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            if value:
                header[key] = value
            else:
                header["format"] = line[2:]
        else:
            body.append(line)
    rows = list(csv.reader(body))
    return header, rows[0], rows[1:]


def _slot(S, name, what):
    try:
        return S.slot(name)
    except (KeyError, ValueError):
        raise ConfigError(what, f"no slot named {name!r} (slots: {', '.join(S.names)})") from None


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> RunRecord:
    """Validate, build the patch and dispatch on ``config.kind``."""
    config.validate()
    start = time.perf_counter()
    try:
        record = _DISPATCH[config.kind](config, workers)
    except PatchError as exc:
        raise ConfigError("patch", str(exc)) from None
    record.wall_clock = time.perf_counter() - start
    return record


def _graph_label(cfg: ExperimentConfig) -> str:
    group = {"free": f"F{cfg.rank}", "abelian": f"Z^{cfg.dim}",
             "free_product": "*".join(f"Z/{m}" for m in cfg.orders)}[cfg.family]
    gens = "S" if cfg.power == 1 else f"S^[{cfg.power}]"
    where = f"torus {'x'.join(map(str, cfg.sides))}" if cfg.patch == "torus" else f"ball R={cfg.radius}"
    return f"Cay({group},{gens}) {where}"


def _run_spectral(cfg: ExperimentConfig, workers):
    cols = ["row", "R", "n", "c_n", "estimate", "iterations", "converged", "lambda_exact"]
    rec = RunRecord("spectral", cfg, cols)
    if cfg.patch == "torus":
        raise ConfigError("patch", "spectral estimates need a ball patch")
    radii = cfg.radii or (cfg.radius,)
    need = max([max(radii)] + [math.ceil(n / 2) for n in cfg.n_list])
    big = build_ball(cfg.multiset(), need, vertex_cap=cfg.vertex_cap)
    lam = lambda_exact(cfg.multiset())
    for R in radii:
        try:
            est = spectral_radius_power_iteration(big.restrict(R), cfg.iterations, cfg.tolerance)
        except NonConvergence as exc:
            est = exc.estimate
        rec.append({"row": "power", "R": R, "n": None, "c_n": None, "estimate": est.lambda_lower,
                    "iterations": est.iterations, "converged": est.converged, "lambda_exact": lam})
    if cfg.n_list:
        for n, c, value in cycle_sequence(big, cfg.n_list):
            rec.append({"row": "cycles", "R": big.radius, "n": n, "c_n": c, "estimate": value,
                        "iterations": None, "converged": None, "lambda_exact": lam})
    return rec


def _run_fmsf(cfg: ExperimentConfig, workers):
    cols = ["experiment_id", "graph", "k", "R", "trials", "mean_degree", "stderr", "bound_lambda", "bound_value",
            "d"]
    rec = RunRecord("fmsf", cfg, cols, trials=cfg.trials)
    patch = cfg.build_patch()
    sweep = list(cfg.radii) if cfg.radii and cfg.patch == "ball" else None
    lam = lambda_exact(cfg.multiset())
    bound = theorem1_bound(lam) if lam is not None else None
    for est in estimate_delta_fmsf(patch, cfg.trials, cfg.seed, sweep, workers=workers):
        rec.append({"experiment_id": cfg.digest()[:12], "graph": _graph_label(cfg), "k": cfg.power,
                    "R": est.radius, "trials": est.trials, "mean_degree": est.mean, "stderr": est.stderr,
                    "bound_lambda": lam, "bound_value": bound, "d": patch.d})
    return rec


def _run_scan(cfg: ExperimentConfig, workers):
    cols = ["k", "d_k", "lambda_k", "bound", "mc_mean", "mc_stderr", "radius"]
    rec = RunRecord("corollary-scan", cfg, cols, trials=cfg.trials)
    S = standard_multiset(make_family(cfg.family, rank=cfg.rank, dim=cfg.dim, orders=cfg.orders))
    try:
        rows = corollary_scan(S, cfg.k_list, cfg.trials, cfg.seed, cfg.radii, vertex_cap=cfg.vertex_cap,
                              workers=workers)
    except ValueError as exc:
        raise ConfigError("group", str(exc)) from None
    for r in rows:
        rec.append(dataclasses.asdict(r))
    return rec


def _run_relative(cfg: ExperimentConfig, workers):
    cols = ["trials", "n_max", "mean_degree", "stderr", "connected_lower", "skipped_in_line", "edges_cut_mean"]
    rec = RunRecord("relative-msf", cfg, cols, trials=cfg.trials)
    patch = cfg.build_patch()
    a = _slot(patch.S, cfg.a, "a")
    structure = cycle_structure(patch, cfg.n_max) if cfg.n_max >= 2 else None
    keep_audit = bool(cfg.audit_path) and cfg.audit != "none"

    def task(t):
        res = relative_cut(patch, a, cfg.n_max, cfg.seed, t, structure=structure, audit=cfg.audit)
        audit = [dict(e, trial=t) for e in res.audit] if keep_audit else []
        return res.mean_degree(patch), res.skipped_in_line, res.n_cut, audit

    out = run_trials(task, cfg.trials, workers)
    st = statistics([o[0] for o in out])
    V = patch.n_vertices
    rec.append({"trials": cfg.trials, "n_max": cfg.n_max, "mean_degree": st.mean, "stderr": st.stderr,
                "connected_lower": 2.0 * (V - 1) / V, "skipped_in_line": sum(o[1] for o in out),
                "edges_cut_mean": float(np.mean([o[2] for o in out]))})
    for o in out:
        rec.audit.extend(o[3])
    return rec


def _run_tau(cfg: ExperimentConfig, workers):
    cols = ["n", "samples", "tau_X_hat", "tau_X_stderr", "width_emp", "deg_emp", "deg_stderr", "em_stat",
            "law_gap", "law_gap_stderr", "all_acyclic"]
    rec = RunRecord("tau-stats", cfg, cols, trials=cfg.trials)
    patch = cfg.build_patch()
    a = _slot(patch.S, cfg.a, "a")
    b = _slot(patch.S, cfg.b, "b")
    structure = cycle_structure(patch, cfg.n_max) if cfg.n_max >= 2 else None
    maps = {n: ThetaMap(patch, a, b, n) for n in cfg.n_list}

    def task(t):
        res = relative_cut(patch, a, cfg.n_max, cfg.seed, t, structure=structure, audit="none")
        return [theta_n(patch, res.surviving, a, b, n, rule=cfg.rule, theta=maps[n]).summary()
                for n in cfg.n_list]

    out = run_trials(task, cfg.trials, workers)
    for j, n in enumerate(cfg.n_list):
        samples = [o[j] for o in out]
        row = dataclasses.asdict(tau_stats(samples, n))
        row["all_acyclic"] = all(s.acyclic for s in samples)
        rec.append(row)
    return rec


_DISPATCH = {
    "spectral": _run_spectral,
    "fmsf": _run_fmsf,
    "corollary-scan": _run_scan,
    "relative-msf": _run_relative,
    "tau-stats": _run_tau,
}
