import json

import pytest

from lrcone.config import RunConfig, emit_config, expand_grid, load_config, parse_config
from lrcone.errors import ConfigParseError, ConfigValidationError

MINIMAL = {
    "lattice": {"kind": "chain", "size": 5},
    "interaction": {"type": "power_law_two_body", "alpha": 2.0},
}


def _parse(payload) -> RunConfig:
    return parse_config(json.dumps(payload))


def test_expand_grid_includes_stop():
    assert expand_grid({"start": 0.0, "stop": 1.0, "step": 0.5}) == [0.0, 0.5, 1.0]
    assert expand_grid({"start": 0.0, "stop": 2.0, "step": 0.1})[-1] == 2.0
    assert len(expand_grid({"start": 0.0, "stop": 2.0, "step": 0.1})) == 21
    with pytest.raises(ValueError):
        expand_grid({"start": 0.0, "stop": 1.0, "step": 0.0})


def test_defaults_are_applied():
    config = _parse(MINIMAL)
    assert config.dimension == 1
    assert config.bound.constant_mode == "numeric_tight"
    assert config.bound.lam == 4.0
    assert config.observables.A.site == 0
    assert config.sweep.R_values == [1.5]
    assert config.verify.identity_sizes == [4, 5, 6]
    assert config.tolerance == 1e-9


def test_t_grid_accepts_a_range():
    config = _parse({**MINIMAL, "sweep": {"t_grid": {"start": 0.0, "stop": 1.0, "step": 0.25}}})
    assert config.sweep.t_grid == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_lambda_alias():
    config = _parse({**MINIMAL, "bound": {"lambda": 2.5}})
    assert config.bound.lam == 2.5
    assert json.loads(emit_config(config))["bound"]["lambda"] == 2.5


def test_emitted_config_round_trips(tiny_run):
    config = _parse(tiny_run)
    assert parse_config(emit_config(config)).model_dump() == config.model_dump()
    assert emit_config(parse_config(emit_config(config))) == emit_config(config)


def test_malformed_json_reports_position():
    with pytest.raises(ConfigParseError) as excinfo:
        parse_config('{"lattice": {"kind": "chain",\n "size": }}')
    assert excinfo.value.line == 2


@pytest.mark.parametrize("payload, field", [
    ({**MINIMAL, "colour": "blue"}, "colour"),
    ({**MINIMAL, "lattice": {"kind": "chain", "size": 5, "wrap": True}}, "lattice.wrap"),
    ({**MINIMAL, "lattice": {"kind": "ring", "size": 5}}, "lattice.kind"),
    ({**MINIMAL, "sweep": {"t_grid": [0.0, 1.0, 0.5]}}, "sweep.t_grid"),
    ({**MINIMAL, "sweep": {"t_grid": [-1.0, 0.0]}}, "sweep.t_grid"),
    ({**MINIMAL, "bound": {"lambda": 1.0}}, "bound.lambda"),
    ({"lattice": {"kind": "chain", "size": 5}}, "interaction"),
])
def test_schema_errors_name_the_field(payload, field):
    with pytest.raises(ConfigValidationError) as excinfo:
        _parse(payload)
    assert excinfo.value.field == field


@pytest.mark.parametrize("payload, field", [
    ({**MINIMAL, "lattice": {"kind": "chain"}}, "lattice.size"),
    ({**MINIMAL, "lattice": {"kind": "grid", "side": 3}}, "lattice.dimension"),
    ({**MINIMAL, "lattice": {"kind": "custom", "distances": [[0, 1], [1, 0]]}}, "interaction.D"),
    ({"lattice": {"kind": "chain", "size": 5}, "interaction": {"type": "power_law_two_body"}}, "interaction.alpha"),
    ({"lattice": {"kind": "chain", "size": 5}, "interaction": {"type": "explicit"}}, "interaction.terms"),
    ({**MINIMAL, "interaction": {"alpha": 0.5}, "sweep": {"R_policy": "kappa_rule"}}, "interaction.alpha"),
    ({**MINIMAL, "sweep": {"R_values": [0.5, 1.5]}}, "sweep.R_values"),
    ({**MINIMAL, "observables": {"B": {"kind": "explicit"}}}, "observables.B"),
])
def test_cross_field_rules(payload, field):
    with pytest.raises(ConfigValidationError) as excinfo:
        _parse(payload)
    assert excinfo.value.field == field


def test_root_must_be_an_object():
    with pytest.raises(ConfigValidationError):
        parse_config("[1, 2, 3]")


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(MINIMAL), encoding="utf-8")
    assert load_config(path).lattice.size == 5
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.json")


def test_explicit_interaction_builds():
    config = _parse({
        "lattice": {"kind": "chain", "size": 2},
        "interaction": {"type": "explicit", "D": 1.0, "terms": [
            {"support": [0, 1], "matrix": [[[1, 0], [0, 0], [0, 0], [0, 0]],
                                           [[0, 0], [-1, 0], [0, 0], [0, 0]],
                                           [[0, 0], [0, 0], [-1, 0], [0, 0]],
                                           [[0, 0], [0, 0], [0, 0], [1, 0]]]},
        ]},
    })
    space = config.lattice.build()
    interaction = config.interaction.build(space, config.dimension)
    assert len(interaction.terms) == 1
    assert interaction.terms[0].norm == pytest.approx(1.0)
