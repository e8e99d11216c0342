import pytest

from scripts.common.config.build import control_from, event_from, grid_from, model_from, target_from
from scripts.common.config.schema import load_config, parse_config
from scripts.common.errors import ConfigError, ModelConfigError
from scripts.common.mc.events import EventKind


BASE = """
[run]
command = rate
seed = 3

[model]
name = ou
a = 2.0
x0 = 0.5

[grid]
K = 64
"""


class TestParseConfig:
    def test_valid(self):
        config = parse_config(BASE)
        assert config.run.command == "rate"
        assert config.run.seed == 3
        assert config.run.as_json is False
        assert config.model.overrides == {"a": "2.0"}
        assert config.model.x0 == [0.5]
        assert config.grid.K == 64
        assert config.mc.eps == [0.4, 0.2, 0.1]

    def test_lists(self):
        config = parse_config(BASE + "\n[mc]\neps = 0.5, 0.25;0.125\n\n[weak]\nns = 1, 3\n")
        assert config.mc.eps == [0.5, 0.25, 0.125]
        assert config.weak.ns == [1, 3]

    def test_json_alias(self):
        config = parse_config(BASE.replace("seed = 3", "json = yes"))
        assert config.run.as_json is True

    def test_missing_model_name(self):
        with pytest.raises(ConfigError, match=r"model\.name"):
            parse_config("[run]\ncommand = verify\n\n[model]\nT = 1.0\n")

    def test_missing_section_header(self):
        with pytest.raises(ConfigError, match="line"):
            parse_config("command = verify\n")

    def test_unknown_key(self):
        with pytest.raises(ConfigError, match=r"grid\.bogus"):
            parse_config(BASE + "bogus = 1\n")

    def test_out_of_range(self):
        with pytest.raises(ConfigError, match=r"grid\.K"):
            parse_config(BASE.replace("K = 64", "K = 0"))

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "missing.ini")


class TestBuild:
    def test_model_and_grid(self):
        config = parse_config(BASE)
        model = model_from(config)
        assert model.params["a"] == 2.0
        assert model.x0.tolist() == [0.5]
        assert grid_from(config, model).K == 64

    def test_bad_override(self):
        config = parse_config(BASE.replace("a = 2.0", "a = -1"))
        with pytest.raises(ModelConfigError):
            model_from(config)

    def test_controls(self):
        config = parse_config(BASE + "\n[control]\nkind = constant\nvalue = 1.5\n")
        model = model_from(config)
        control = control_from(config, model, grid_from(config, model))
        assert control.values.shape == (64, 1)
        assert control.energy == pytest.approx(2.25)

        config = parse_config(BASE + "\n[control]\nkind = constant\nvalue = 1, 2\n")
        with pytest.raises(ConfigError, match=r"control\.value"):
            control_from(config, model, grid_from(config, model))

    def test_control_bound(self):
        config = parse_config(BASE + "\n[control]\nkind = constant\nvalue = 2\nbound = 1\n")
        model = model_from(config)
        with pytest.raises(ValueError):
            control_from(config, model, grid_from(config, model))

    def test_targets(self):
        model = model_from(parse_config(BASE))
        target = target_from(parse_config(BASE + "\n[target]\nz = 1.0\n"), model)
        assert target.distance([0.0]) == pytest.approx(1.0)
        with pytest.raises(ConfigError, match=r"target\.z"):
            target_from(parse_config(BASE), model)
        with pytest.raises(ConfigError, match=r"target\.a"):
            target_from(parse_config(BASE + "\n[target]\nkind = halfspace\na = 0\n"), model)

    def test_events(self):
        model = model_from(parse_config(BASE))
        event = event_from(parse_config(BASE + "\n[event]\nkind = exit_ball\nR = 2\n"), model)
        assert event.kind is EventKind.EXIT_BALL
        with pytest.raises(ConfigError, match=r"event\.R"):
            event_from(parse_config(BASE + "\n[event]\nkind = exit_ball\n"), model)
