"""Declarative experiment runs: config in, CSV rows, spectra and checkpoints out.

Output directory layout::

    results.csv      one row per (measurement beta, tracked bond)
    spectra.npz      Schmidt spectra of the tracked bonds at every measurement
    run.json         provenance, finite-size check, D_eps validity flags
    checkpoint.npz   state at the latest measurement point
    resume.json      resume token, written when a budget stops the run

Reruns of the same config produce byte-identical ``results.csv`` files
apart from the ``wall_ms`` column.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ParameterError, ParseError, ResourceExhaustedError
from .evolution import (BETA_TOL, EvolutionConfig, build_trotter_plan, evolve,
                        take_snapshot)
from .models import ModelSpec, build_bond_terms
from .mps import build_infinite_temperature_tds, load_checkpoint, renyi_entropy, save_checkpoint
from .theory import thermal_correlation_length

log = logging.getLogger(__name__)

CONFIG_VERSION = 1
CSV_VERSION = 1
FINITE_SIZE_RATIO = 5.0
D_EPS_MARGIN = 100.0

_EVOLUTION_KEYS = {"target_beta", "dtau", "order", "max_rank", "rel_weight_cutoff",
                   "beta_grid", "grid_points"}
_BUDGET_KEYS = {"max_seconds", "max_bytes"}
_ANALYSIS_DEFAULTS = {
    "central_charge": 1.0,
    "scaling_dimension": 1.0,
    "fit_window": None,
    "saturation_tolerance": 0.02,
    "y": None,
}
_TOP_KEYS = {"version", "model", "evolution", "alphas", "epsilons", "bonds",
             "output_dir", "seed", "budget", "analysis"}


def default_beta_grid(target_beta: float, dtau: float, n: int = 16) -> list[float]:
    """Log-spaced measurement points snapped to multiples of ``dtau``."""
    if target_beta <= 0:
        return [0.0]
    lo = max(dtau, target_beta / 64)
    steps = np.unique(np.maximum(np.round(np.geomspace(lo, target_beta, n) / dtau), 1))
    grid = [round(float(k * dtau), 12) for k in steps]
    grid = [b for b in grid if b < target_beta - BETA_TOL]
    return grid + [float(target_beta)]


def _strict(section, data, allowed):
    if not isinstance(data, dict):
        raise ParseError(f"'{section}' must be an object")
    unknown = set(data) - set(allowed)
    if unknown:
        raise ParseError(f"unknown keys in '{section}': {sorted(unknown)}")


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce one imaginary-time run."""

    model: ModelSpec
    evolution: EvolutionConfig
    alphas: tuple = (1.0, 0.5)
    epsilons: tuple = (1e-5, 1e-6)
    bonds: object = "center"
    output_dir: str = "results"
    seed: int = 0
    analysis: dict = field(default_factory=dict)
    grid_points: int = 16
    version: int = CONFIG_VERSION

    def __post_init__(self):
        self.alphas = tuple(float(a) for a in self.alphas)
        self.epsilons = tuple(float(e) for e in self.epsilons)
        if not self.alphas or any(a <= 0 for a in self.alphas):
            raise ParameterError("alphas must be positive")
        if any(not 0 < e < 1 for e in self.epsilons):
            raise ParameterError("epsilons must lie in (0, 1)")
        unknown = set(self.analysis) - set(_ANALYSIS_DEFAULTS)
        if unknown:
            raise ParseError(f"unknown keys in 'analysis': {sorted(unknown)}")
        self.analysis = {**_ANALYSIS_DEFAULTS, **self.analysis}
        if not list(self.evolution.beta_grid):
            self.evolution.beta_grid = default_beta_grid(
                self.evolution.target_beta, self.evolution.dtau, self.grid_points)
        self.evolution.beta_grid = [float(b) for b in self.evolution.beta_grid]
        self.tracked_bonds()

    def tracked_bonds(self) -> list[int]:
        L = self.model.L
        if self.bonds == "center":
            return [L // 2]
        if self.bonds == "all":
            return list(range(1, L))
        bonds = sorted({int(b) for b in self.bonds})
        if not bonds or bonds[0] < 1 or bonds[-1] > L - 1:
            raise ParameterError(f"tracked bonds must lie in 1..{L - 1}")
        return bonds

    def to_dict(self) -> dict:
        ev = self.evolution
        return {
            "version": self.version,
            "model": self.model.to_dict(),
            "evolution": {
                "target_beta": ev.target_beta, "dtau": ev.dtau, "order": ev.order,
                "max_rank": ev.max_rank, "rel_weight_cutoff": ev.rel_weight_cutoff,
                "beta_grid": list(ev.beta_grid), "grid_points": self.grid_points,
            },
            "budget": {"max_seconds": ev.max_seconds, "max_bytes": ev.max_bytes},
            "alphas": list(self.alphas),
            "epsilons": list(self.epsilons),
            "bonds": self.bonds if isinstance(self.bonds, str) else list(self.bonds),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "analysis": dict(self.analysis),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        _strict("config", data, _TOP_KEYS)
        version = data.get("version")
        if version != CONFIG_VERSION:
            raise ParseError(f"unsupported config version {version!r}")
        for key in ("model", "evolution"):
            if key not in data:
                raise ParseError(f"missing '{key}' section")
        ev = dict(data["evolution"])
        _strict("evolution", ev, _EVOLUTION_KEYS)
        budget = dict(data.get("budget") or {})
        _strict("budget", budget, _BUDGET_KEYS)
        grid_points = int(ev.pop("grid_points", 16))
        if "target_beta" not in ev:
            raise ParseError("evolution.target_beta is required")
        ev["beta_grid"] = list(ev.get("beta_grid") or [])
        evolution = EvolutionConfig(**ev, **budget)
        try:
            model = ModelSpec.from_dict(data["model"])
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad model section: {exc}") from exc
        kwargs = {k: data[k] for k in ("alphas", "epsilons", "bonds", "output_dir", "seed",
                                       "analysis") if k in data}
        return cls(model, evolution, grid_points=grid_points, **kwargs)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
        return cls.from_dict(data)

    def dump(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def digest(self) -> str:
        """Hash of the physics-relevant settings (output paths and budgets excluded)."""
        d = self.to_dict()
        for key in ("output_dir", "budget"):
            d.pop(key)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


# -- CSV rows ----------------------------------------------------------------

def alpha_column(alpha: float) -> str:
    return f"S_a{alpha:g}"


def csv_header(alphas: Sequence[float]) -> list[str]:
    return (["version", "model_id", "beta", "bond", "D"]
            + [alpha_column(a) for a in alphas]
            + ["eps_step", "energy", "log_norm", "wall_ms"])


def format_float(x: float) -> str:
    """Shortest round-trip representation; identical input gives identical text."""
    return repr(float(x))


@dataclass
class ResultRow:
    beta: float
    bond: int
    D: int
    entropies: tuple
    eps_step: float
    energy: float
    log_norm: float
    wall_ms: float

    def cells(self, model_id: str) -> list[str]:
        return ([str(CSV_VERSION), model_id, format_float(self.beta), str(self.bond),
                 str(self.D)]
                + [format_float(s) for s in self.entropies]
                + [format_float(self.eps_step), format_float(self.energy),
                   format_float(self.log_norm), f"{self.wall_ms:.0f}"])


def rows_from_snapshot(snap, bonds, alphas, wall_ms) -> list[ResultRow]:
    rows = []
    for ell in bonds:
        spec = snap.spectra[ell - 1]
        rows.append(ResultRow(snap.beta, ell, snap.bond_dims[ell - 1],
                              tuple(renyi_entropy(spec, a) for a in alphas),
                              float(snap.discarded[ell - 1]), snap.energy,
                              snap.log_norm, wall_ms))
    return rows


# -- running -----------------------------------------------------------------

@dataclass
class RunResult:
    status: str
    output_dir: Path
    rows: list
    resume_token: Path | None = None
    message: str = ""


class _Recorder:
    """Collects rows and spectra and writes them out at every measurement."""

    def __init__(self, config, out, terms, start_rows=(), start_spectra=None):
        self.config = config
        self.out = out
        self.terms = terms
        self.bonds = config.tracked_bonds()
        self.rows = list(start_rows)
        self.spectra = dict(start_spectra or {})
        self.t0 = time.monotonic()
        self.finite_size = []

    @property
    def n_measured(self):
        return len({r.beta for r in self.rows})

    def __call__(self, snap):
        wall = 1000.0 * (time.monotonic() - self.t0)
        idx = self.n_measured
        self.rows.extend(rows_from_snapshot(snap, self.bonds, self.config.alphas, wall))
        for ell in self.bonds:
            self.spectra[f"m{idx:05d}_l{ell}"] = snap.spectra[ell - 1].weights
        self.spectra["betas"] = np.array(sorted({r.beta for r in self.rows}))
        self.flush()
        save_checkpoint(self.out / "checkpoint.npz", snap.state,
                        {"config_digest": self.config.digest(), "beta": snap.beta.hex(),
                         "measurements": idx + 1})
        log.info("beta=%g  max D=%d  S(L/2)=%s", snap.beta, max(snap.bond_dims),
                 [f"{r.entropies[0]:.6f}" for r in self.rows[-len(self.bonds):]])

    def flush(self):
        model_id = self.config.model.model_id
        tmp = self.out / "results.csv.tmp"
        with open(tmp, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(csv_header(self.config.alphas))
            for r in self.rows:
                w.writerow(r.cells(model_id))
        tmp.replace(self.out / "results.csv")
        tmp = self.out / "spectra.tmp.npz"
        np.savez(tmp, **self.spectra)
        tmp.replace(self.out / "spectra.npz")


def finite_size_table(config: ExperimentConfig, betas) -> list[dict]:
    """``L / xi_beta`` at every measured inverse temperature."""
    delta = float(config.analysis["scaling_dimension"])
    out = []
    for b in betas:
        if b <= 0:
            out.append({"beta": b, "xi": 0.0, "L_over_xi": None, "ok": True})
            continue
        xi = thermal_correlation_length(delta, b)
        ratio = config.model.L / xi
        out.append({"beta": b, "xi": xi, "L_over_xi": ratio, "ok": ratio >= FINITE_SIZE_RATIO})
    return out


def d_eps_validity(config: ExperimentConfig) -> dict:
    """Whether the run's truncation threshold is at least 100x below each ``eps``."""
    cut = config.evolution.rel_weight_cutoff
    return {f"{e:g}": bool(cut <= e / D_EPS_MARGIN) for e in config.epsilons}


def _read_rows(path, alphas):
    from .analysis import read_results

    table = read_results(path)
    if table.alphas != tuple(alphas):
        raise ParseError("results file has different entropy columns than the config")
    return table.to_rows()


def _write_run_json(config, out, recorder, status, plan, message=""):
    betas = sorted({r.beta for r in recorder.rows})
    info = {
        "config": config.to_dict(),
        "config_digest": config.digest(),
        "csv_version": CSV_VERSION,
        "status": status,
        "message": message,
        "trotter_plan": {"order": plan.order, "dtau": plan.dtau, "digest": plan.digest()},
        "tracked_bonds": config.tracked_bonds(),
        "finite_size": finite_size_table(config, betas),
        "d_eps_valid": d_eps_validity(config),
    }
    (out / "run.json").write_text(json.dumps(info, indent=2) + "\n")


def run_experiment(config: ExperimentConfig, output_dir=None, resume=None) -> RunResult:
    """Execute a config and write the output directory described above.

    Parameters
    ----------
    resume : path or None
        Resume token (``resume.json``) or checkpoint from an earlier run of
        the same config.  Rows after the checkpoint are discarded and
        recomputed.
    """
    out = Path(output_dir or config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    spec = config.model
    terms = build_bond_terms(spec)
    plan = build_trotter_plan(config.evolution.order, config.evolution.dtau)
    config.dump(out / "config.json")

    if resume is not None:
        state, rows, spectra = _load_resume(config, out, Path(resume))
    else:
        state, rows, spectra = build_infinite_temperature_tds(spec.d, spec.L), [], {}
    recorder = _Recorder(config, out, terms, rows, spectra)

    if resume is None and any(abs(b - state.beta) <= BETA_TOL for b in config.evolution.beta_grid):
        recorder(take_snapshot(state.copy(), terms))
    if not recorder.rows:
        recorder.flush()

    ev = config.evolution
    status, token, message = "complete", None, ""
    try:
        evolve(state, terms, ev, recorder, plan)
    except ResourceExhaustedError as exc:
        status, message = "budget_exhausted", str(exc)
        token = out / "resume.json"
        last = exc.state if exc.state is not None else state
        beta = last.beta
        # covers a stop before the first measurement, when no checkpoint exists yet
        save_checkpoint(out / "checkpoint.npz", last,
                        {"config_digest": config.digest(), "beta": float(beta).hex(),
                         "measurements": recorder.n_measured})
        token.write_text(json.dumps({"checkpoint": "checkpoint.npz",
                                     "config_digest": config.digest(),
                                     "beta": beta}, indent=2) + "\n")
        log.warning("stopped early: %s; resume with %s", message, token)
    _write_run_json(config, out, recorder, status, plan, message)
    return RunResult(status, out, recorder.rows, token, message)


def _load_resume(config, out, token):
    if token.suffix == ".json":
        info = json.loads(token.read_text())
        ckpt = token.parent / info["checkpoint"]
    else:
        ckpt = token
    state, prov = load_checkpoint(ckpt)
    if prov.get("config_digest") != config.digest():
        raise ParameterError("checkpoint was written by a different config")
    beta = float.fromhex(prov["beta"])
    rows = [r for r in _read_rows(out / "results.csv", config.alphas)
            if r.beta <= beta + BETA_TOL]
    n_meas = len({r.beta for r in rows})
    spectra = {}
    with np.load(out / "spectra.npz") as data:
        for key in data.files:
            if key != "betas" and int(key[1:6]) < n_meas:
                spectra[key] = data[key]
    return state, rows, spectra
