from argparse import Namespace

import pytest

import fwldp
from scripts import converge_i, converge_ii, mc_ldp, rate, run, simulate, skeleton, verify
from scripts.common.config.schema import parse_config
from scripts.common.errors import BlowUpError
from scripts.common.tables import read_csv


def output(tmp_path, name: str):
    return read_csv(tmp_path / f"out_{name}.csv")


class TestVerify:
    CONFIG = """
        [run]
        command = verify
        output = {out}

        [model]
        name = holder13

        [verify]
        n_pairs = 1024
        n_points = 1024
        n_x = 128
        """

    def test_holder13_passes(self, tmp_path, write_config, capsys):
        assert run.main(["-c", str(write_config(self.CONFIG))]) == run.EXIT_OK
        _, rows = output(tmp_path, "verify")
        assert rows and all(row["passed"] for row in rows)
        assert "PASS" in capsys.readouterr().out

    def test_failed_audit_exit_code(self, tmp_path, write_config):
        path = write_config(self.CONFIG + "modulus = linear:0\n")
        assert verify.main(["-c", str(path)]) == run.EXIT_AUDIT_FAILED
        _, rows = output(tmp_path, "verify")
        assert rows[-1]["passed"] is False


class TestRate:
    CONFIG = """
        [run]
        command = rate
        output = {out}

        [model]
        name = brownian

        [grid]
        K = 256

        [target]
        z = 1.0
        """

    def test_brownian(self, tmp_path, write_config, capsys):
        assert rate.main(["-c", str(write_config(self.CONFIG))]) == run.EXIT_OK
        _, [row] = output(tmp_path, "rate")
        assert row["action"] == pytest.approx(0.5, abs=1e-3)
        columns, controls = output(tmp_path, "rate_control")
        assert columns == ["t", "h1"]
        assert len(controls) == 257
        assert "Rate of brownian" in capsys.readouterr().out

    def test_refined_reports_extrapolation(self, tmp_path, write_config, capsys):
        path = write_config(self.CONFIG + "[optimizer]\n        refine = true\n")
        assert rate.main(["-c", str(path)]) == run.EXIT_OK
        _, [row] = output(tmp_path, "rate")
        assert row["extrapolated_action"] == pytest.approx(0.5, abs=1e-3)
        assert "extrapolated" in capsys.readouterr().out

    def test_control_file_feeds_skeleton(self, tmp_path, write_config):
        assert rate.main(["-c", str(write_config(self.CONFIG))]) == run.EXIT_OK
        path = write_config(f"""
            [run]
            output = {{out}}

            [model]
            name = brownian

            [grid]
            K = 256

            [control]
            kind = file
            file = {tmp_path / "out_rate_control.csv"}
            """, name="skeleton.ini")
        assert skeleton.main(["-c", str(path)]) == run.EXIT_OK
        _, rows = output(tmp_path, "skeleton")
        assert rows[-1]["x1"] == pytest.approx(1.0, abs=1e-3)

    def test_refuses_overwrite(self, tmp_path, write_config, capsys):
        path = str(write_config(self.CONFIG))
        assert rate.main(["-c", path]) == run.EXIT_OK
        assert rate.main(["-c", path]) == run.EXIT_ERROR
        assert "--force" in capsys.readouterr().err
        assert rate.main(["-c", path, "--force"]) == run.EXIT_OK

    def test_json(self, tmp_path, write_config):
        assert rate.main(["-c", str(write_config(self.CONFIG)), "-j"]) == run.EXIT_OK
        assert (tmp_path / "out_rate.json").exists()
        assert (tmp_path / "out_rate_control.json").exists()

    def test_subcommand_mismatch(self, write_config, capsys):
        assert verify.main(["-c", str(write_config(self.CONFIG))]) == run.EXIT_ERROR
        assert "run.command" in capsys.readouterr().err


class TestErrors:
    def test_missing_model_name(self, write_config, capsys):
        path = write_config("""
            [run]
            command = verify
            output = {out}

            [model]
            T = 1.0
            """)
        assert run.main(["-c", str(path)]) == run.EXIT_ERROR
        assert "model.name" in capsys.readouterr().err

    def test_missing_command(self, write_config, capsys):
        path = write_config("""
            [run]
            output = {out}

            [model]
            name = brownian
            """)
        assert run.main(["-c", str(path)]) == run.EXIT_ERROR
        assert "run.command" in capsys.readouterr().err

    def test_negative_seed(self, write_config):
        path = write_config(TestRate.CONFIG)
        assert run.main(["-c", str(path), "--seed", "-1"]) == run.EXIT_ERROR

    def test_blowup_exit_code(self, capsys):
        config = parse_config("[run]\ncommand = simulate\n\n[model]\nname = brownian\n")

        def explode(config, args):
            raise BlowUpError(4)

        assert run.execute(config, Namespace(force=False), explode) == run.EXIT_BLOWUP
        assert "step 4" in capsys.readouterr().err


class TestExperiments:
    def test_simulate(self, tmp_path, write_config):
        path = write_config("""
            [run]
            command = simulate
            output = {out}

            [model]
            name = ou

            [grid]
            K = 16

            [simulate]
            epsilon = 0.1
            """)
        assert simulate.main(["-c", str(path)]) == run.EXIT_OK
        columns, rows = output(tmp_path, "simulate")
        assert columns == ["t", "x1"]
        assert len(rows) == 17
        assert rows[-1]["t"] == 1.0

    def test_skeleton(self, tmp_path, write_config):
        path = write_config("""
            [run]
            output = {out}

            [model]
            name = brownian

            [grid]
            K = 8

            [control]
            kind = constant
            value = 2
            """)
        assert skeleton.main(["-c", str(path)]) == run.EXIT_OK
        _, rows = output(tmp_path, "skeleton")
        assert rows[-1]["x1"] == pytest.approx(2.0)

    def test_mc_ldp_is_deterministic(self, tmp_path, write_config):
        path = str(write_config("""
            [run]
            command = mc-ldp
            output = {out}
            seed = 12

            [model]
            name = brownian

            [grid]
            K = 8

            [event]
            a = 1
            c = 1

            [mc]
            eps = 0.5, 0.25
            n = 2000
            exact = brownian
            """))
        assert mc_ldp.main(["-c", path]) == run.EXIT_OK
        first = (tmp_path / "out_mc-ldp.csv").read_bytes()
        assert mc_ldp.main(["-c", path, "--force", "--threads", "3"]) == run.EXIT_OK
        assert (tmp_path / "out_mc-ldp.csv").read_bytes() == first
        _, rows = output(tmp_path, "mc-ldp")
        assert [row["minus_rate"] for row in rows] == [-0.5, -0.5]

    def test_converge_i(self, tmp_path, write_config):
        path = write_config("""
            [run]
            command = converge-i
            output = {out}

            [model]
            name = brownian

            [grid]
            K = 512

            [weak]
            ns = 1, 2, 4
            """)
        assert converge_i.main(["-c", str(path)]) == run.EXIT_OK
        columns, rows = output(tmp_path, "converge-i")
        assert columns == ["n", "distance", "oracle"]
        assert [row["n"] for row in rows] == [1, 2, 4]
        for row in rows:
            assert row["distance"] == pytest.approx(row["oracle"], abs=1e-2)

    def test_converge_ii(self, tmp_path, write_config):
        path = write_config("""
            [run]
            command = converge-ii
            output = {out}

            [model]
            name = brownian

            [grid]
            K = 32

            [control]
            kind = constant
            value = 1

            [converge]
            eps = 0.1, 0.01
            n = 200
            delta = 0.5
            """)
        assert converge_ii.main(["-c", str(path)]) == run.EXIT_OK
        _, rows = output(tmp_path, "converge-ii")
        assert [row["epsilon"] for row in rows] == [0.1, 0.01]
        _, passage = output(tmp_path, "converge-ii_passage")
        assert len(passage) == 400


def test_command_table():
    assert set(fwldp.commands) == {"run", "simulate", "skeleton", "rate", "verify", "mc-ldp",
                                   "converge-i", "converge-ii"}
