import json
import math

import numpy as np
import pytest

from sbqs.cli import main
from sbqs.config import DEFAULT_BETA_GRID, load_config, validate_config
from sbqs.errors import ConfigError
from sbqs.experiment import (
    CSV_FIELDS,
    emit_csv,
    emit_svg,
    parse_csv,
    run_experiment,
    uniform_state,
)
from sbqs.hamiltonian import IsingParams


def ising_config(**overrides) -> dict:
    raw = {
        "model": {"model": "ising", "n": 3, "J": 1.0, "B": 1.0, "boundary": "periodic"},
        "beta_grid": [0.0, 0.5, 1.0],
        "n_steps": 40,
        "mode": "effective",
    }
    raw.update(overrides)
    return raw


class TestConfigValidation:
    def test_minimal_config_gets_defaults(self):
        config = validate_config({"model": {"model": "ising", "n": 4, "J": 1.0, "B": 5.0, "boundary": "periodic"}})
        assert config.strategy == "A"
        assert config.mode == "faithful"
        assert config.n_steps == 200
        assert config.seed == 0
        assert config.decomposition == "ising-local"
        assert config.beta_grid == DEFAULT_BETA_GRID
        assert isinstance(config.model, IsingParams)

    def test_decreasing_grid_rejected(self):
        with pytest.raises(ConfigError, match="increasing"):
            validate_config(ising_config(beta_grid=[1.0, 0.5]))

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError, match="betagrid"):
            validate_config(ising_config(betagrid=[1.0]))

    def test_sampled_needs_seed_and_trials(self):
        with pytest.raises(ConfigError, match="seed"):
            validate_config(ising_config(mode="sampled", trials=10))
        with pytest.raises(ConfigError, match="trials"):
            validate_config(ising_config(mode="sampled", seed=1, trials=0))

    def test_local_decomposition_needs_ising(self):
        raw = ising_config(
            model={"model": "pauli", "n": 2, "terms": [{"string": "ZZ", "coeff": 1.0}]},
            decomposition="ising-local",
        )
        with pytest.raises(ConfigError, match="ising"):
            validate_config(raw)

    def test_multiple_problems_enumerated(self):
        raw = ising_config(beta_grid=[2.0, 1.0], n_steps=0, epsilon=5.0)
        with pytest.raises(ConfigError) as err:
            validate_config(raw)
        message = str(err.value)
        assert "increasing" in message and "n_steps" in message and "epsilon" in message

    def test_load_config_reports_parse_position(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"model": }')
        with pytest.raises(ConfigError, match=r":1:"):
            load_config(path)
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "missing.json")


class TestRunExperiment:
    def test_beta_zero_columns(self):
        config = validate_config(ising_config(beta_grid=[0.0], n_steps=2))
        rows, report = run_experiment(config)
        row = rows[0]
        assert row.fidelity_sbqs_vs_ground == pytest.approx(report.f0, abs=1e-12)
        assert row.fidelity_exact_ite_vs_ground == pytest.approx(report.f0, abs=1e-12)
        # strategy A at beta=0: every sub-step succeeds with probability 1/2
        expected = 0.5 ** (2 * 9)
        assert row.success_prob_formula == pytest.approx(expected, rel=1e-12)
        assert row.success_prob_faithful == pytest.approx(expected, rel=1e-12)
        assert row.success_prob_empirical is None
        assert row.bound_eq15 == 0.0

    def test_rows_follow_grid_order(self):
        config = validate_config(ising_config())
        rows, _ = run_experiment(config)
        assert [r.beta for r in rows] == [0.0, 0.5, 1.0]

    def test_parallel_matches_serial(self):
        serial, _ = run_experiment(validate_config(ising_config()))
        parallel, _ = run_experiment(validate_config(ising_config(parallel=3)))
        for a, b in zip(serial, parallel):
            assert a == b

    def test_sampled_mode_fills_empirical(self):
        config = validate_config(
            ising_config(mode="sampled", seed=5, trials=2000, beta_grid=[0.0], n_steps=1)
        )
        rows, _ = run_experiment(config)
        p = rows[0].success_prob_empirical
        expected = 0.5**9
        sigma = math.sqrt(expected * (1 - expected) / 2000)
        assert p is not None and abs(p - expected) <= 4 * sigma

    def test_extinct_row_recorded_in_row(self, monkeypatch):
        # extinction in one row must not abort the sweep
        import sbqs.experiment as experiment_mod
        from sbqs.errors import ExtinctionError

        real_run = experiment_mod.run

        def failing_run(plan, sigma0, *args, **kwargs):
            if plan.beta == 0.5:
                raise ExtinctionError("forced for test")
            return real_run(plan, sigma0, *args, **kwargs)

        monkeypatch.setattr(experiment_mod, "run", failing_run)
        rows, _ = run_experiment(validate_config(ising_config()))
        assert math.isnan(rows[1].fidelity_sbqs_vs_ground)
        assert not math.isnan(rows[0].fidelity_sbqs_vs_ground)
        assert not math.isnan(rows[2].fidelity_sbqs_vs_ground)

    def test_degenerate_flag_column(self):
        config = validate_config(
            ising_config(
                model={"model": "ising", "n": 2, "J": 1.0, "B": 0.0, "boundary": "open"},
                degeneracy_tol=1e-6,
                beta_grid=[0.0, 0.5],
                n_steps=25,
            )
        )
        rows, _ = run_experiment(config)
        assert all(r.ground_space_dim == 2 for r in rows)


class TestCsv:
    def test_three_lines_for_two_rows(self, tmp_path):
        config = validate_config(ising_config(beta_grid=[0.0, 1.0]))
        rows, _ = run_experiment(config)
        path = emit_csv(rows, tmp_path / "r.csv")
        lines = path.read_text().split("\n")
        assert len(lines) == 4 and lines[-1] == ""  # header + 2 rows + trailing LF
        assert lines[0] == ",".join(c for c in CSV_FIELDS if c != "ground_space_dim")

    def test_round_trip(self, tmp_path):
        config = validate_config(ising_config())
        rows, _ = run_experiment(config)
        parsed = parse_csv(emit_csv(rows, tmp_path / "r.csv"))
        for a, b in zip(rows, parsed):
            for name in CSV_FIELDS:
                x, y = getattr(a, name), getattr(b, name)
                if x is None:
                    assert y is None
                else:
                    assert y == pytest.approx(x, rel=1e-10, abs=1e-12)

    def test_deterministic_bytes(self, tmp_path):
        config = validate_config(ising_config())
        rows1, _ = run_experiment(config)
        rows2, _ = run_experiment(config)
        p1 = emit_csv(rows1, tmp_path / "a.csv")
        p2 = emit_csv(rows2, tmp_path / "b.csv")
        assert p1.read_bytes() == p2.read_bytes()

    def test_degenerate_column_appears_when_used(self, tmp_path):
        config = validate_config(
            ising_config(
                model={"model": "ising", "n": 2, "J": 1.0, "B": 0.0, "boundary": "open"},
                degeneracy_tol=1e-6,
                beta_grid=[0.0],
                n_steps=5,
            )
        )
        rows, _ = run_experiment(config)
        text = emit_csv(rows, tmp_path / "d.csv").read_text()
        assert "ground_space_dim" in text.splitlines()[0]


class TestSvg:
    def test_exactly_two_polylines(self, tmp_path):
        config = validate_config(ising_config())
        rows, _ = run_experiment(config)
        text = emit_svg(rows, tmp_path / "f.svg").read_text()
        assert text.count("<polyline") == 2
        assert text.startswith("<svg")


class TestCli:
    def write_config(self, tmp_path, **overrides):
        raw = ising_config(out_dir=str(tmp_path / "out"), **overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(raw))
        return path

    def test_run_writes_artifacts(self, tmp_path):
        path = self.write_config(tmp_path)
        assert main(["run", str(path), "--svg"]) == 0
        out = tmp_path / "out"
        assert (out / "results.csv").exists()
        assert (out / "bounds.json").exists()
        assert (out / "fidelity.svg").exists()
        report = json.loads((out / "bounds.json").read_text())
        assert report["ell"] == 9

    def test_config_error_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(ising_config(bogus=1)))
        assert main(["run", str(bad)]) == 2
        assert "bogus" in capsys.readouterr().err
        assert main(["run", str(tmp_path / "absent.json")]) == 2

    def test_numeric_error_exit_code(self, tmp_path):
        path = self.write_config(tmp_path, beta_grid=[0.0, 50.0], n_steps=5)
        assert main(["run", str(path)]) == 3

    def test_unwritable_output_exit_code(self, tmp_path, capsys):
        path = self.write_config(tmp_path, beta_grid=[0.0], n_steps=2)
        assert main(["run", str(path), "--out", "/proc/nope"]) == 2
        assert "cannot write" in capsys.readouterr().err

    def test_seed_and_parallel_overrides(self, tmp_path):
        path = self.write_config(tmp_path)
        assert main(["run", str(path), "--out", str(tmp_path / "a")]) == 0
        assert main(["run", str(path), "--out", str(tmp_path / "b"), "--parallel", "2"]) == 0
        a = (tmp_path / "a" / "results.csv").read_bytes()
        b = (tmp_path / "b" / "results.csv").read_bytes()
        assert a == b

    def test_decompose_and_bounds_and_sample(self, tmp_path, capsys):
        path = self.write_config(tmp_path, mode="sampled", seed=3, trials=200,
                                 beta_grid=[0.0, 0.25], n_steps=10)
        assert main(["decompose", str(path)]) == 0
        assert "reconstruction residual" in capsys.readouterr().out
        assert main(["bounds", str(path)]) == 0
        assert '"beta_star"' in capsys.readouterr().out
        assert main(["sample", str(path)]) == 0
        assert "empirical success frequency" in capsys.readouterr().out
