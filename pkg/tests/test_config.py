import json
import math
from pathlib import Path

import numpy as np
import pytest

from spinlind import ConfigError
from spinlind.config import RunConfig, parse_angle, parse_config

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def dump_toml(d):
    """Minimal TOML writer for flat sections of numbers, strings and arrays."""
    top, sections = [], []
    for key, val in d.items():
        if isinstance(val, dict):
            body = []
            for k, v in val.items():
                if isinstance(v, dict):
                    inner = ", ".join(f'"{a}" = {json.dumps(b)}' for a, b in v.items())
                    body.append(f"{k} = {{ {inner} }}")
                else:
                    body.append(f"{k} = {json.dumps(v)}")
            sections.append(f"[{key}]\n" + "\n".join(body))
        else:
            top.append(f"{key} = {json.dumps(val)}")
    return "\n".join(top) + "\n\n" + "\n\n".join(sections) + "\n"


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_angle_expressions():
    assert parse_angle("pi/4") == pytest.approx(math.pi / 4)
    assert parse_angle("-pi/2 + 0.5") == pytest.approx(-math.pi / 2 + 0.5)
    assert parse_angle(0.3) == 0.3
    for bad in ("__import__('os')", "pi**2", "e"):
        with pytest.raises((ConfigError, ValueError)):
            parse_angle(bad)


def test_bulk_sweep_config():
    cfg = parse_config(CONFIGS / "bulk_sweep.toml")
    spec = cfg.spec
    assert spec.n_spins == 7
    assert np.allclose(spec.field_angle, math.pi / 4)
    assert spec.temperature[-1] == 5.0
    assert cfg.sweep_values == (2.0, 5.0, 10.0) and cfg.kappa_b == (0.0, 1e-3)
    assert cfg.format == "csv" and not cfg.initial_given
    assert cfg.initial == "components"


def test_round_trip(tmp_path):
    for name in ("bulk_sweep.toml", "modulator.toml", "two_spin.toml"):
        cfg = parse_config(CONFIGS / name)
        again = parse_config(write(tmp_path, dump_toml(cfg.to_dict()), name))
        assert again.spec.digest == cfg.spec.digest
        assert again.to_dict() == cfg.to_dict()


def test_scalar_broadcast_and_units(tmp_path):
    p = write(tmp_path, """
energy_unit = 2.0
[chain]
n_spins = 3
field_magnitude = 4.0
coupling = 0.25
dissipation_rate = 1e-3
temperature = [1.0, 2.0, 3.0]
""")
    spec = parse_config(p).spec
    assert spec.coupling == (0.5, 0.5)
    assert spec.field_magnitude == (8.0, 8.0, 8.0)
    assert spec.temperature == (2.0, 4.0, 6.0)
    assert spec.dissipation_rate == (2e-3,) * 3


def test_range_table(tmp_path):
    p = write(tmp_path, """
[chain]
n_spins = 3
field_magnitude = 4.0
coupling = 0.25
dissipation_rate = 1e-3
temperature = 2.0
[sweep]
values = { start = 1.0, stop = 3.0, num = 5 }
""")
    assert parse_config(p).sweep_values == (1.0, 1.5, 2.0, 2.5, 3.0)


def test_missing_temperature_points_at_field(tmp_path):
    p = write(tmp_path, """[chain]
n_spins = 2
field_magnitude = 3.0
dissipation_rate = [1e-3, 1e-3]
temperature = [2.0, -1.0]
""")
    with pytest.raises(ConfigError) as info:
        parse_config(p)
    assert info.value.field == "chain.temperature"
    assert info.value.line == 5
    # absent key: the error points at the section header
    p = write(tmp_path, "# comment\n[chain]\nn_spins = 2\ndissipation_rate = 1e-3\n")
    with pytest.raises(ConfigError) as info:
        parse_config(p)
    assert info.value.field == "chain.temperature"
    assert info.value.line == 2


def test_malformed_toml_reports_line(tmp_path):
    p = write(tmp_path, "[chain]\nn_spins = 2\nfield_magnitude = [3.0,\n")
    with pytest.raises(ConfigError) as info:
        parse_config(p)
    assert "malformed" in str(info.value)


@pytest.mark.parametrize("body, field", [
    ("[sweep]\nvalues = [2.0, 1.0, 3.0]\n", "sweep.values"),
    ("[sweep]\nvalues = []\n", "sweep.values"),
    ("[initial]\nspins = { 4 = 'e' }\n", "initial.spins"),
    ("[initial]\nspins = { 1 = 'x' }\n", "initial.spins"),
    ("[initial]\nfractions = [0.5, 0.6]\n", "initial.fractions"),
    ("[initial]\nstate = 'thermal'\n", "initial.state"),
    ("[initial]\nstate = 'uniform'\nfractions = [1.0]\n", "initial.state"),
    ("[modulator]\nscenario = 's3'\n", "modulator.scenario"),
    ("[output]\nformat = 'xml'\n", "output.format"),
    ("[output]\nworkers = 0\n", "output.workers"),
])
def test_invalid_sections(tmp_path, body, field):
    head = "[chain]\nn_spins = 3\nfield_magnitude = 4.0\ncoupling = 0.2\n" \
           "dissipation_rate = 1e-3\ntemperature = 2.0\n"
    with pytest.raises(ConfigError) as info:
        parse_config(write(tmp_path, head + body))
    assert info.value.field == field
    assert info.value.line is not None


def test_unknown_chain_key_and_missing_chain(tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config(write(tmp_path, "[chain]\nn_spins = 1\nfield = 2.0\n"))
    assert info.value.field == "chain.field"
    with pytest.raises(ConfigError):
        parse_config(write(tmp_path, "energy_unit = 1.0\n"))
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "missing.toml")


def test_chain_file_and_initial_forms(tmp_path):
    write(tmp_path, "n_spins = 3\nfield_magnitude = 4.0\ncoupling = 0.2\n"
          "dissipation_rate = [1e-3, 0.0, 1e-3]\ntemperature = [2.0, 1.0, 3.0]\n", "chain.toml")
    cfg = parse_config(write(tmp_path, 'chain_file = "chain.toml"\n'
                             "[initial]\nspins = { 2 = 'e' }\n"
                             "[modulator]\nthetas = [0.0, 'pi/4', 'pi/2']\n"))
    assert cfg.initial == {2: "e"} and cfg.initial_given
    assert cfg.chain_path.endswith("chain.toml")
    scen = cfg.modulator_scenario()
    assert scen.swept == (2,) and scen.thetas[-1] == pytest.approx(math.pi / 2)
    assert isinstance(cfg, RunConfig)
