"""Reading run output, fitting scaling laws and emitting reports and plot tables."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError, ParseError
from .fitting import Series, detect_saturation, fit_line, truncation_dimension
from .theory import (bond_dimension_bound, cft_entropy_prediction, d_scaling_exponent,
                     optimal_alpha)

REPORT_VERSION = 1
_FIXED_HEAD = ["version", "model_id", "beta", "bond", "D"]
_FIXED_TAIL = ["eps_step", "energy", "log_norm", "wall_ms"]


@dataclass
class ResultTable:
    """Columns of a results CSV as arrays."""

    version: int
    model_id: str
    alphas: tuple
    beta: np.ndarray
    bond: np.ndarray
    D: np.ndarray
    entropy: dict
    eps_step: np.ndarray
    energy: np.ndarray
    log_norm: np.ndarray
    wall_ms: np.ndarray

    def bonds(self):
        return sorted(set(int(b) for b in self.bond))

    def select(self, bond):
        return self.bond == bond

    def to_rows(self):
        from .experiment import ResultRow

        return [ResultRow(float(self.beta[i]), int(self.bond[i]), int(self.D[i]),
                          tuple(float(self.entropy[a][i]) for a in self.alphas),
                          float(self.eps_step[i]), float(self.energy[i]),
                          float(self.log_norm[i]), float(self.wall_ms[i]))
                for i in range(self.beta.size)]


def _parse_alpha(name, line):
    if not name.startswith("S_a"):
        raise ParseError(f"unexpected column {name!r}", line)
    try:
        return float(name[3:])
    except ValueError:
        raise ParseError(f"bad entropy column {name!r}", line) from None


def read_results(path) -> ResultTable:
    """Parse a results CSV written by :func:`thermofield.experiment.run_experiment`.

    Raises
    ------
    ParseError
        With the offending line number for malformed headers or rows.
    """
    from .experiment import CSV_VERSION

    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty results file", 1) from None
        n = len(header)
        if (n < len(_FIXED_HEAD) + len(_FIXED_TAIL) + 1 or header[:5] != _FIXED_HEAD
                or header[-4:] != _FIXED_TAIL):
            raise ParseError("unexpected header", 1)
        alphas = tuple(_parse_alpha(c, 1) for c in header[5:-4])
        cols = {k: [] for k in range(n)}
        model_id = None
        for line, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n:
                raise ParseError(f"expected {n} fields, got {len(row)}", line)
            try:
                version = int(row[0])
                values = [float(row[2]), int(row[3]), int(row[4])] + [float(x) for x in row[5:]]
            except ValueError as exc:
                raise ParseError(str(exc), line) from None
            if version != CSV_VERSION:
                raise ParseError(f"unsupported CSV version {version}", line)
            if model_id is None:
                model_id = row[1]
            elif row[1] != model_id:
                raise ParseError("mixed model ids in one file", line)
            if cols[2] and values[0] < cols[2][-1] - 1e-12:
                raise ParseError("beta decreases", line)
            for k, v in enumerate(values, start=2):
                cols[k].append(v)
    entropy = {a: np.array(cols[5 + j]) for j, a in enumerate(alphas)}
    return ResultTable(CSV_VERSION, model_id or "", alphas, np.array(cols[2]),
                       np.array(cols[3], dtype=int), np.array(cols[4], dtype=int), entropy,
                       np.array(cols[n - 4]), np.array(cols[n - 3]), np.array(cols[n - 2]),
                       np.array(cols[n - 1]))


def load_spectra(path, table: ResultTable, bond: int):
    """``(betas, spectra)`` of one tracked bond from ``spectra.npz``."""
    with np.load(path) as data:
        betas = data["betas"]
        spectra = []
        for idx in range(betas.size):
            key = f"m{idx:05d}_l{bond}"
            if key not in data:
                raise DataError(f"spectra file has no entry {key}")
            spectra.append(data[key])
    return betas, spectra


def _window(spec, betas):
    w = spec.get("fit_window")
    if w is not None:
        return float(w[0]), float(w[1])
    pos = betas[betas > 0]
    if pos.size == 0:
        raise DataError("no positive beta values to fit")
    return 0.5 * (pos[0] + pos[-1]), float(pos[-1])


def _fit_dict(fit, window_beta):
    return {"slope": fit.slope, "intercept": fit.intercept,
            "window_beta": list(window_beta), "residual_rms": fit.residual_rms,
            "n_points": fit.n_points}


def analyze(results_dir, spec: dict | None = None) -> dict:
    """Fits, D_eps series, saturation flags and theory predictions for one run.

    ``spec`` keys (all optional): ``central_charge``, ``fit_window`` (in
    beta), ``bond``, ``epsilons``, ``saturation_tolerance``, ``y``,
    ``alphas``.  Missing keys fall back to the run's own config.
    """
    results_dir = Path(results_dir)
    run_info = {}
    if (results_dir / "run.json").exists():
        run_info = json.loads((results_dir / "run.json").read_text())
    cfg = run_info.get("config", {})
    spec = {**cfg.get("analysis", {}), **(spec or {})}
    table = read_results(results_dir / "results.csv")
    bonds = table.bonds()
    if not bonds:
        raise DataError("results file has no rows")
    bond = int(spec.get("bond") or bonds[len(bonds) // 2])
    mask = table.select(bond)
    betas = table.beta[mask]
    c = float(spec.get("central_charge", 1.0))
    window = _window(spec, betas)
    epsilons = spec.get("epsilons") or cfg.get("epsilons") or [1e-5, 1e-6]
    tol = float(spec.get("saturation_tolerance", 0.02))

    report = {"version": REPORT_VERSION, "model_id": table.model_id, "bond": bond,
              "central_charge": c, "fit_window_beta": list(window),
              "entropy": {}, "D_eps": {}, "saturation": {}}

    pos = betas > 0
    log_window = (math.log(window[0]), math.log(window[1]))
    for a in table.alphas:
        key = f"S_a{a:g}"
        entry = {"cft_slope": d_scaling_exponent(c, a)}
        try:
            series = Series(np.log(betas[pos]), table.entropy[a][mask][pos])
            fit = fit_line(series, log_window)
            entry["fit"] = _fit_dict(fit, window)
            entry["slope_deviation"] = fit.slope - entry["cft_slope"]
            # offset C' of the CFT line with the predicted slope, least squares in the window
            sel = (series.x >= log_window[0] - 1e-12) & (series.x <= log_window[1] + 1e-12)
            entry["cft_offset"] = float(np.mean(
                series.y[sel] - entry["cft_slope"] * (series.x[sel] - math.log(math.pi))))
        except DataError as exc:
            entry["fit_error"] = str(exc)
        try:
            sat, plateau = detect_saturation(Series(betas, table.entropy[a][mask]), tol)
            report["saturation"][key] = {"saturated": sat, "plateau": plateau,
                                         "tolerance": tol}
        except DataError as exc:
            report["saturation"][key] = {"error": str(exc)}
        report["entropy"][key] = entry

    spectra_path = results_dir / "spectra.npz"
    if spectra_path.exists():
        s_betas, spectra = load_spectra(spectra_path, table, bond)
        valid = run_info.get("d_eps_valid", {})
        y = float(spec.get("y") or window[1])
        for eps in epsilons:
            eps = float(eps)
            dims = np.array([truncation_dimension(s, eps) for s in spectra], dtype=float)
            entry = {"beta": s_betas.tolist(), "D": dims.astype(int).tolist(),
                     "valid": valid.get(f"{eps:g}")}
            keep = (s_betas > 0) & (dims > 0)
            try:
                fit = fit_line(Series(np.log(s_betas[keep]), np.log(dims[keep])), log_window)
                entry["fit"] = _fit_dict(fit, window)
                lam = fit.slope
            except DataError as exc:
                entry["fit_error"] = str(exc)
                lam = None
            try:
                a_star = optimal_alpha(c, eps, y)
                lam_star = d_scaling_exponent(c, a_star)
                s_star = c / 6 * (1 + 1 / a_star) * math.log(y)
                entry["theory"] = {"y": y, "alpha_star": a_star, "lambda_star": lam_star,
                                   "lambda_star_exceeds_c_over_3": lam_star > c / 3,
                                   "D_bound_at_y": bond_dimension_bound(s_star, a_star, eps)}
                if lam is not None:
                    entry["lambda_below_lambda_star"] = lam < lam_star
            except DomainError as exc:
                entry["theory_error"] = str(exc)
            report["D_eps"][f"{eps:g}"] = entry
    if "finite_size" in run_info:
        report["finite_size"] = run_info["finite_size"]
    return report


def write_report(report: dict, path):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")


def report_tables(results_dir, out_dir=None, spec: dict | None = None) -> list[Path]:
    """Plot-ready CSV tables: entropy vs beta and bond dimensions vs beta.

    ``entropy_vs_beta.csv`` holds measured ``S_alpha`` at the analyzed bond
    next to the CFT line through the fitted intercept.
    ``bond_dimension_vs_beta.csv`` holds the kept ``D`` and ``D_eps`` for
    every configured ``eps``.
    """
    results_dir = Path(results_dir)
    out_dir = Path(out_dir or results_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rep = analyze(results_dir, spec)
    table = read_results(results_dir / "results.csv")
    mask = table.select(rep["bond"])
    betas = table.beta[mask]
    c = rep["central_charge"]
    paths = []

    p = out_dir / "entropy_vs_beta.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = ["beta"]
        for a in table.alphas:
            cols += [f"S_a{a:g}", f"cft_S_a{a:g}"]
        w.writerow(cols)
        for i, b in enumerate(betas):
            row = [repr(float(b))]
            for a in table.alphas:
                offset = rep["entropy"][f"S_a{a:g}"].get("cft_offset")
                pred = ""
                if offset is not None and b > 0:
                    pred = repr(cft_entropy_prediction(c, a, float(b), offset))
                row += [repr(float(table.entropy[a][mask][i])), pred]
            w.writerow(row)
    paths.append(p)

    p = out_dir / "bond_dimension_vs_beta.csv"
    with open(p, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        eps_keys = sorted(rep["D_eps"], key=float, reverse=True)
        w.writerow(["beta", "D"] + [f"D_eps{k}" for k in eps_keys])
        for i, b in enumerate(betas):
            row = [repr(float(b)), str(int(table.D[mask][i]))]
            for k in eps_keys:
                dims = rep["D_eps"][k]["D"]
                row.append(str(dims[i]) if i < len(dims) else "")
            w.writerow(row)
    paths.append(p)
    return paths
