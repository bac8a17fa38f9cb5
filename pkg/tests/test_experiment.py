import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from thermofield.errors import ParameterError, ParseError
from thermofield.evolution import EvolutionConfig
from thermofield.experiment import (CSV_VERSION, ExperimentConfig, csv_header,
                                    d_eps_validity, default_beta_grid, finite_size_table,
                                    run_experiment)
from thermofield.models import ModelSpec, xxz


def small_config(**kwargs):
    ev = dict(target_beta=1.0, dtau=0.1, beta_grid=[0.2, 0.5])
    ev.update(kwargs.pop("evolution", {}))
    return ExperimentConfig(xxz(6, 1.0), EvolutionConfig(**ev), **kwargs)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


# -- config -----------------------------------------------------------------------

models = st.sampled_from([
    ModelSpec("xxz_half", 8, {"delta": 0.5}),
    ModelSpec("bilinear_biquadratic_spin1", 6, {"theta": 0.7}),
    ModelSpec("bose_hubbard", 4, {"J": 0.25, "n_max": 3}),
    ModelSpec("heisenberg_spin_s", 4),
])


@given(models, st.lists(st.sampled_from([0.5, 1.0, 2.0, 3.0]), min_size=1, max_size=3,
                        unique=True),
       st.lists(st.sampled_from([1e-4, 1e-5, 1e-6]), min_size=1, max_size=3, unique=True),
       st.sampled_from(["center", "all", [1, 2]]), st.integers(0, 99),
       st.sampled_from([0.05, 0.1, 0.25]))
def test_config_roundtrip(model, alphas, epsilons, bonds, seed, dtau):
    # [TRIVIAL] parse -> serialize -> parse is the identity
    cfg = ExperimentConfig(model, EvolutionConfig(2.0, dtau=dtau), alphas=alphas,
                           epsilons=epsilons, bonds=bonds, seed=seed)
    data = cfg.to_dict()
    again = ExperimentConfig.from_dict(json.loads(json.dumps(data)))
    assert again.to_dict() == data
    assert again.digest() == cfg.digest()


def test_config_file_roundtrip(tmp_path):
    cfg = small_config(analysis={"central_charge": 2.0})
    cfg.dump(tmp_path / "c.json")
    assert ExperimentConfig.load(tmp_path / "c.json").to_dict() == cfg.to_dict()


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["evolution"].update(step=0.1),
    lambda d: d["budget"].update(max_minutes=3),
    lambda d: d["analysis"].update(window=[1, 2]),
])
def test_unknown_keys_rejected(mutate):
    data = small_config().to_dict()
    mutate(data)
    with pytest.raises(ParseError):
        ExperimentConfig.from_dict(data)


def test_unknown_model_key_rejected():
    data = small_config().to_dict()
    data["model"]["size"] = 3
    with pytest.raises(ParameterError):
        ExperimentConfig.from_dict(data)


def test_version_checked():
    data = small_config().to_dict()
    data["version"] = 2
    with pytest.raises(ParseError):
        ExperimentConfig.from_dict(data)


def test_invalid_json_reports_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n  "version": 1,\n  "model": ,\n}\n')
    with pytest.raises(ParseError) as info:
        ExperimentConfig.load(p)
    assert info.value.line == 3


def test_digest_ignores_output_and_budget():
    a = small_config(output_dir="x")
    b = small_config(output_dir="y", evolution={"max_seconds": 5.0})
    assert a.digest() == b.digest()
    assert a.digest() != small_config(seed=3).digest()


def test_parameter_validation():
    with pytest.raises(ParameterError):
        small_config(alphas=[0.0])
    with pytest.raises(ParameterError):
        small_config(epsilons=[1.5])
    with pytest.raises(ParameterError):
        small_config(bonds=[0])


@given(st.floats(0.5, 200), st.sampled_from([0.01, 0.05, 0.1, 0.5]), st.integers(4, 24))
def test_default_grid(target, dtau, n):
    target = round(target / dtau) * dtau
    grid = default_beta_grid(target, dtau, n)
    assert grid[-1] == target
    assert np.all(np.diff(grid) > 0)
    for b in grid:
        assert abs(b / dtau - round(b / dtau)) < 1e-9


def test_finite_size_and_validity():
    cfg = small_config(epsilons=[1e-5, 1e-12])
    table = finite_size_table(cfg, [0.0, 1.0, 10.0])
    assert table[0]["ok"] and table[1]["ok"] and not table[2]["ok"]
    assert table[1]["L_over_xi"] == pytest.approx(6 * np.pi)
    assert d_eps_validity(cfg) == {"1e-05": True, "1e-12": False}


# -- runs -------------------------------------------------------------------------

def test_run_writes_outputs(tmp_path):
    res = run_experiment(small_config(), tmp_path)
    assert res.status == "complete" and res.resume_token is None
    rows = read_csv(tmp_path / "results.csv")
    assert rows[0] == csv_header((1.0, 0.5))
    assert rows[0] == ["version", "model_id", "beta", "bond", "D", "S_a1", "S_a0.5",
                       "eps_step", "energy", "log_norm", "wall_ms"]
    assert [float(r[2]) for r in rows[1:]] == [0.2, 0.5, 1.0]
    assert all(r[0] == str(CSV_VERSION) and r[3] == "3" for r in rows[1:])
    info = json.loads((tmp_path / "run.json").read_text())
    assert info["status"] == "complete" and info["tracked_bonds"] == [3]
    with np.load(tmp_path / "spectra.npz") as data:
        np.testing.assert_array_equal(data["betas"], [0.2, 0.5, 1.0])
        assert data["m00002_l3"].sum() == pytest.approx(1.0)


def test_zero_grid_single_row(tmp_path):
    # [TRIVIAL] beta grid {0}: one measurement, no spatial entanglement
    cfg = ExperimentConfig(xxz(6), EvolutionConfig(0.0, beta_grid=[0.0]), bonds="all")
    res = run_experiment(cfg, tmp_path)
    assert len(res.rows) == 5
    assert {r.beta for r in res.rows} == {0.0}
    for r in res.rows:
        assert r.entropies == (0.0, 0.0) and r.D == 1


def test_rerun_is_deterministic(tmp_path):
    # [TRIVIAL] identical text except the wall-clock column
    run_experiment(small_config(), tmp_path / "a")
    run_experiment(small_config(), tmp_path / "b")
    a = read_csv(tmp_path / "a" / "results.csv")
    b = read_csv(tmp_path / "b" / "results.csv")
    assert [r[:-1] for r in a] == [r[:-1] for r in b]


def test_budget_stop_and_resume_match_uninterrupted(tmp_path):
    # the resumed run reproduces the uninterrupted one to 1e-12 per value
    ev = dict(target_beta=2.0, dtau=0.1, beta_grid=[0.2, 0.4, 0.6, 1.0, 1.5])
    ref = run_experiment(ExperimentConfig(xxz(8, 1.0), EvolutionConfig(**ev)), tmp_path / "ref")
    cfg = ExperimentConfig(xxz(8, 1.0), EvolutionConfig(**ev, max_bytes=20000))
    part = run_experiment(cfg, tmp_path / "run")
    assert part.status == "budget_exhausted"
    assert part.resume_token.name == "resume.json"
    assert 0 < len(part.rows) < len(ref.rows)
    token = json.loads(part.resume_token.read_text())
    assert token["beta"] == part.rows[-1].beta

    cfg.evolution.max_bytes = None
    done = run_experiment(cfg, tmp_path / "run", resume=part.resume_token)
    assert done.status == "complete"
    assert len(done.rows) == len(ref.rows)
    for a, b in zip(done.rows, ref.rows):
        assert a.beta == b.beta and a.bond == b.bond and a.D == b.D
        np.testing.assert_allclose(a.entropies, b.entropies, rtol=0, atol=1e-12)
        for x, y in ((a.energy, b.energy), (a.log_norm, b.log_norm), (a.eps_step, b.eps_step)):
            assert x == pytest.approx(y, abs=1e-12)
    with np.load(tmp_path / "run" / "spectra.npz") as s1, \
            np.load(tmp_path / "ref" / "spectra.npz") as s2:
        assert sorted(s1.files) == sorted(s2.files)


def test_budget_stop_before_first_measurement(tmp_path):
    cfg = ExperimentConfig(xxz(8, 1.0), EvolutionConfig(2.0, dtau=0.1, beta_grid=[1.0],
                                                        max_bytes=3000))
    part = run_experiment(cfg, tmp_path)
    assert part.status == "budget_exhausted" and part.rows == []
    cfg.evolution.max_bytes = None
    done = run_experiment(cfg, tmp_path, resume=part.resume_token)
    assert [r.beta for r in done.rows] == [1.0, 2.0]


def test_resume_rejects_other_config(tmp_path):
    cfg = small_config(evolution={"max_bytes": 1500})
    part = run_experiment(cfg, tmp_path)
    assert part.resume_token is not None
    other = small_config(alphas=[2.0])
    with pytest.raises(ParameterError):
        run_experiment(other, tmp_path, resume=part.resume_token)
