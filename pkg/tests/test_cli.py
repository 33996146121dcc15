import json
import subprocess
import sys

import numpy as np
import pytest

from belldyn.cli import main

RUN = [sys.executable, "-m", "belldyn.cli"]


def run_cli(*args):
    return subprocess.run(RUN + list(args), capture_output=True, text=True)


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# belldyn ")
    header = lines[1].split(",")
    rows = np.array([[float(v) for v in line.split(",")] for line in lines[2:]])
    return header, rows


class TestCorrelationsCommand:
    def test_sudden_change_state(self):
        out = run_cli("correlations", "--c", "0.1,0.16,0.1", "--format", "json")
        assert out.returncode == 0
        payload = json.loads(out.stdout)
        assert payload["I"] == pytest.approx(0.035887114115951094, abs=1e-10)
        assert payload["C"] == pytest.approx(0.018546104966346455, abs=1e-10)
        assert payload["D"] == pytest.approx(0.017341009149604639, abs=1e-10)
        assert payload["axis"] == "y"

    def test_singlet(self):
        out = run_cli("correlations", "--c", "-1,-1,-1", "--format", "json")
        payload = json.loads(out.stdout)
        assert (payload["I"], payload["C"], payload["D"]) == (2.0, 1.0, 1.0)

    def test_uncorrelated(self):
        out = run_cli("correlations", "--c", "0,0,0", "--format", "json")
        payload = json.loads(out.stdout)
        assert (payload["I"], payload["C"], payload["D"]) == (0.0, 0.0, 0.0)

    def test_text_format(self):
        out = run_cli("correlations", "--c", "0.1,0.16,0.1")
        assert out.returncode == 0
        assert "lambda_max" in out.stdout
        assert "0.16" in out.stdout

    def test_oracle_cross_check(self):
        out = run_cli("correlations", "--c", "0.1,0.16,0.1", "--oracle",
                      "--format", "json")
        payload = json.loads(out.stdout)
        assert payload["C_bruteforce_deviation"] <= 1e-6
        assert payload["relative_entropy_axis"] == "y"

    def test_family_input(self):
        out = run_cli("correlations", "--family", "synchronized",
                      "--family-param", "0.6", "--format", "json")
        payload = json.loads(out.stdout)
        assert payload["C"] == pytest.approx(payload["D"], abs=1e-12)

    def test_unphysical_state_exits_2(self):
        out = run_cli("correlations", "--c", "1,1,1")
        assert out.returncode == 2
        assert "error" in out.stderr

    def test_state_file_input(self, tmp_path):
        from belldyn.states import bell_to_density, density_to_json

        path = tmp_path / "singlet.json"
        path.write_text(json.dumps(density_to_json(bell_to_density((-1, -1, -1)))))
        out = run_cli("correlations", "--state-file", str(path), "--format", "json")
        assert json.loads(out.stdout)["I"] == 2.0

    def test_state_file_outside_family_exits_2(self, tmp_path):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1.0  # |ee><ee| is not Bell-diagonal
        path = tmp_path / "ee.json"
        path.write_text(json.dumps({"re": rho.tolist(), "im": (0 * rho).tolist()}))
        out = run_cli("correlations", "--state-file", str(path))
        assert out.returncode == 2


class TestEvolveCommand:
    def test_initial_row_spectrum(self, tmp_path):
        path = tmp_path / "evolve.csv"
        assert main(["evolve", "--family", "synchronized", "--family-param", "0.6",
                     "--t-steps", "50", "--out", str(path)]) == 0
        header, rows = read_csv(path)
        assert header[:5] == ["a_t", "p", "c_x", "c_y", "c_z"]
        np.testing.assert_allclose(rows[0, 5:], [0.64, 0.16, 0.04, 0.16], atol=1e-9)
        np.testing.assert_allclose(rows[0, 2:5], [0.6, 0.36, -0.6], atol=1e-9)

    def test_markovian_flag(self, tmp_path):
        path = tmp_path / "markov.csv"
        main(["evolve", "--markovian", "--t-max", "4", "--t-steps", "81",
              "--out", str(path)])
        _, rows = read_csv(path)
        np.testing.assert_allclose(rows[:, 1], np.exp(-2 * rows[:, 0]), atol=1e-9)

    def test_fully_decohered_spectrum_is_uniform(self, tmp_path):
        path = tmp_path / "late.csv"
        main(["evolve", "--markovian", "--t-max", "25", "--t-steps", "51",
              "--out", str(path)])
        _, rows = read_csv(path)
        np.testing.assert_allclose(rows[-1, 5:], [0.25] * 4, atol=1e-8)


class TestTrajectoryCommand:
    def test_columns_and_identity(self, tmp_path):
        path = tmp_path / "traj.csv"
        assert main(["trajectory", "--c", "0.6,0.36,-0.6", "--t-steps", "200",
                     "--out", str(path)]) == 0
        header, rows = read_csv(path)
        assert header == ["a_t", "p", "c_x", "c_y", "c_z", "I", "C", "D",
                          "lambda_max", "C_markov", "D_markov"]
        np.testing.assert_allclose(rows[:, 6], rows[:, 7], atol=1e-9)  # C = D

    def test_json_format(self, tmp_path):
        path = tmp_path / "traj.json"
        main(["trajectory", "--t-steps", "20", "--format", "json",
              "--out", str(path)])
        payload = json.loads(path.read_text())
        assert payload["meta"]["channel_b"] == "phaseflip"
        assert len(payload["rows"]) == 20


class TestFigureCommand:
    def test_byte_identical_runs(self, tmp_path):
        first = tmp_path / "one.csv"
        second = tmp_path / "two.csv"
        assert run_cli("figure", "3", "a", "--out", str(first)).returncode == 0
        assert run_cli("figure", "3", "a", "--out", str(second)).returncode == 0
        assert first.read_bytes() == second.read_bytes()

    def test_figure1a_columns_identical(self, tmp_path):
        path = tmp_path / "f1a.csv"
        main(["figure", "1", "a", "--out", str(path)])
        _, rows = read_csv(path)
        np.testing.assert_allclose(rows[:, 3], rows[:, 4], atol=1e-9)

    def test_figure3c_two_columns(self, tmp_path):
        path = tmp_path / "f3c.csv"
        main(["figure", "3", "c", "--out", str(path)])
        header, rows = read_csv(path)
        assert header == ["c_y", "a_t_c"]
        assert rows.shape[1] == 2

    def test_gnuplot_script_emitted(self, tmp_path):
        path = tmp_path / "f2b.csv"
        main(["figure", "2", "b", "--out", str(path)])
        script = (tmp_path / "f2b.gp").read_text()
        assert "plot" in script and "f2b.csv" in script

    def test_invalid_panel_exits_2(self):
        assert run_cli("figure", "1", "c").returncode == 2
        assert run_cli("figure", "5", "a").returncode == 2


class TestTcCommand:
    def test_value_and_closed_form(self):
        out = run_cli("tc", "--c", "0.1,0.16,0.1", "--format", "json")
        payload = json.loads(out.stdout)
        assert payload["a_tc"] == pytest.approx(0.9477102861581741, abs=1e-8)
        assert payload["closed_form"] == pytest.approx(payload["a_tc"], abs=1e-8)

    def test_none_case(self):
        out = run_cli("tc", "--c", "0.5,0.2,-0.5")
        assert out.returncode == 0
        assert "none" in out.stdout


class TestVerifyCommand:
    def test_default_settings_pass(self):
        out = run_cli("verify")
        assert out.returncode == 0, out.stdout + out.stderr
        assert out.stdout.count("PASS") == 7  # six checks plus the summary
        assert "FAIL" not in out.stdout

    def test_oversized_step_fails(self):
        out = run_cli("verify", "--t-steps", "500")
        assert out.returncode == 1
        assert "decay-ode" in out.stdout
        assert "FAIL" in out.stdout

    def test_threads_do_not_change_results(self, tmp_path):
        one = tmp_path / "v1.txt"
        two = tmp_path / "v2.txt"
        assert main(["verify", "--threads", "1", "--out", str(one)]) == 0
        assert main(["verify", "--threads", "4", "--out", str(two)]) == 0
        assert one.read_text() == two.read_text()


class TestConfigHandling:
    def test_round_trip_reproduces_run(self, tmp_path):
        cfg = tmp_path / "run.ini"
        first = tmp_path / "a.csv"
        second = tmp_path / "b.csv"
        assert main(["evolve", "--a", "2", "--A", "3", "--gamma", "0.5",
                     "--c", "0.3,0.2,-0.3", "--t-max", "5", "--t-steps", "64",
                     "--dump-config", str(cfg), "--out", str(first)]) == 0
        assert main(["evolve", "--config", str(cfg), "--out", str(second)]) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "run.ini"
        cfg.write_text("[kernel]\na = 1.0\nA = 5.0\ngamma = 0.0\n")
        out_path = tmp_path / "o.csv"
        main(["evolve", "--config", str(cfg), "--A", "1.0", "--gamma", "1.0",
              "--t-steps", "30", "--out", str(out_path)])
        text = out_path.read_text()
        assert "A=1 " in text.splitlines()[0]

    def test_kernel_keys_case_sensitive(self, tmp_path):
        cfg = tmp_path / "run.ini"
        main(["tc", "--a", "2", "--A", "8", "--gamma", "0.25",
              "--dump-config", str(cfg), "--c", "0.1,0.16,0.1"])
        body = cfg.read_text()
        assert "a = 2.0" in body and "A = 8.0" in body

    def test_missing_config_exits(self):
        out = run_cli("tc", "--config", "/nonexistent/path.ini")
        assert out.returncode == 3

    def test_bad_triple_exits_2(self):
        assert run_cli("correlations", "--c", "0.1,0.2").returncode == 2


def test_output_to_unwritable_path_exits_3(tmp_path):
    target = tmp_path / "missing" / "out.csv"
    assert main(["evolve", "--t-steps", "16", "--out", str(target)]) == 3
