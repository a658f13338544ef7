import pytest

from satprecoding.config import SimConfig
from satprecoding.errors import ConfigurationError

YAML = """
link_budget:
  P_tot: 60.0
  OBO: 3.0
beams:
  n_beams: 7
  taper: bessel-taper
simulation:
  rho: 3
  rho_list: [1, 2]
  strategies: [four_color]
  n_runs: 4
  seed: 11
solver:
  N_rand: 20
"""


def test_yaml_keys_map_onto_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(YAML)
    cfg = SimConfig.load(path)
    assert cfg.link.onboard_power == 60.0 and cfg.link.output_backoff == 3.0
    assert cfg.n_beams == 7 and cfg.taper_shape == "bessel-taper"
    assert cfg.rho == 3 and cfg.rho_list == (1, 2) and cfg.strategies == ("four_color",)
    assert cfg.n_runs == 4 and cfg.seed == 11 and cfg.n_rand == 20
    assert cfg.pattern().n_beams == 7


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("")
    assert SimConfig.load(path) == SimConfig()


def test_defaults():
    cfg = SimConfig()
    assert cfg.n_beams == 9 and cfg.n_runs == 500 and cfg.gamma == 1.0
    assert cfg.link.onboard_power == 55.0


@pytest.mark.parametrize(
    "text",
    [
        "bogus: {}\n",
        "simulation: {rho_count: 2}\n",
        "simulation: {strategies: [fancy]}\n",
        "simulation: {n_runs: 0}\n",
        "link_budget: {alpha: 1.5}\n",
        "link_budget: {T_cs: -3}\n",
        "beams: {theta_3dB: 0}\n",
        "- a list\n",
        "simulation: [1, 2\n",
    ],
)
def test_invalid_configs_raise(tmp_path, text):
    path = tmp_path / "c.yaml"
    path.write_text(text)
    with pytest.raises(ConfigurationError):
        SimConfig.load(path).pattern()


def test_missing_file_is_configuration_error(tmp_path):
    with pytest.raises(ConfigurationError):
        SimConfig.load(tmp_path / "nope.yaml")


def test_hash_changes_iff_config_changes():
    a = SimConfig()
    assert a.config_hash() == SimConfig().config_hash()
    assert a.config_hash() != a.with_overrides(n_runs=3).config_hash()
    assert a.with_overrides(seed=None) is a
