"""Simulation configuration and its YAML form.

Link-budget keys are the usual symbols of a satellite link-budget table::

    link_budget:
      frequency: 20.0e9     # carrier, Hz
      T_cs: 235.3           # UT clear-sky noise temperature, K
      B_u: 500.0e6          # user-link bandwidth, Hz
      G_R: 40.7             # UT antenna gain, dBi
      kappa: 1.380649e-23   # Boltzmann constant, J/K
      P_tot: 55.0           # on-board power, dBW
      OBO: 5.0              # output back-off, dB
      alpha: 0.20           # roll-off
    beams:
      n_beams: 9
      G_max: 52.0           # boresight gain G_ij at beam center, dBi
      theta_3dB: 0.4        # full 3 dB beamwidth, degrees
      sidelobe_floor: -30.0 # dB relative to G_max
      taper: gaussian       # or bessel-taper
      altitude: 35786.0e3   # m
      centers: null         # optional [[x, y], ...] in metres
    simulation:
      rho: 2
      rho_list: [1, 2, 3, 4, 5]
      P_tot_sweep: [50.0, 55.0, 60.0]
      strategies: [four_color, mmse_rescaled, maxmin_fair]
      n_runs: 500
      seed: 0
      gamma: 1.0
      modcod_table: null    # path to 'threshold_db, efficiency' records
      output_dir: results
    solver:
      eps_bisect: 1.0e-3
      N_rand: 100

Every section and key is optional; unknown keys are rejected.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import yaml

from .acm import ModcodTable, default_modcod_table
from .channel import GEO_ALTITUDE, BeamPattern, LinkBudgetParams, hexagonal_cluster
from .errors import ConfigurationError, DomainError

STRATEGIES = ("four_color", "mmse_rescaled", "maxmin_fair")

_LINK_KEYS = {
    "frequency": "carrier_frequency",
    "T_cs": "clear_sky_temp",
    "B_u": "user_bandwidth",
    "G_R": "receiver_gain",
    "kappa": "boltzmann",
    "P_tot": "onboard_power",
    "OBO": "output_backoff",
    "alpha": "rolloff",
}
_BEAM_KEYS = {
    "n_beams": "n_beams",
    "G_max": "boresight_gain",
    "theta_3dB": "beamwidth_3dB",
    "sidelobe_floor": "sidelobe_floor",
    "taper": "taper_shape",
    "altitude": "altitude",
    "centers": "beam_centers",
}
_SIM_KEYS = {
    "rho": "rho",
    "rho_list": "rho_list",
    "P_tot_sweep": "power_sweep",
    "strategies": "strategies",
    "n_runs": "n_runs",
    "seed": "seed",
    "gamma": "gamma",
    "modcod_table": "modcod_table",
    "output_dir": "output_dir",
}
_SOLVER_KEYS = {"eps_bisect": "eps_bisect", "N_rand": "n_rand"}


@dataclass(frozen=True)
class SimConfig:
    link: LinkBudgetParams = field(default_factory=LinkBudgetParams)
    n_beams: int = 9
    boresight_gain: float = 52.0
    beamwidth_3dB: float = 0.4
    sidelobe_floor: float = -30.0
    taper_shape: str = "gaussian"
    altitude: float = GEO_ALTITUDE
    beam_centers: tuple | None = None
    rho: int = 2
    rho_list: tuple[int, ...] = (1, 2, 3, 4, 5)
    power_sweep: tuple[float, ...] = (50.0, 55.0, 60.0)
    strategies: tuple[str, ...] = STRATEGIES
    n_runs: int = 500
    seed: int = 0
    gamma: float = 1.0
    modcod_table: str | None = None
    output_dir: str = "results"
    eps_bisect: float = 1e-3
    n_rand: int = 100

    def __post_init__(self):
        for name in ("rho_list", "power_sweep", "strategies"):
            value = getattr(self, name)
            object.__setattr__(self, name, tuple(value) if value is not None else ())
            if not getattr(self, name):
                raise ConfigurationError(f"{name} must be non-empty")
        if self.beam_centers is not None:
            object.__setattr__(self, "beam_centers", tuple(tuple(map(float, c)) for c in self.beam_centers))
        unknown = set(self.strategies) - set(STRATEGIES)
        if unknown:
            raise ConfigurationError(f"unknown strategies {sorted(unknown)}; choose from {STRATEGIES}")
        if self.n_runs < 1:
            raise ConfigurationError("n_runs must be >= 1")
        if self.rho < 1 or min(self.rho_list) < 1:
            raise ConfigurationError("users per frame must be >= 1")
        if self.gamma <= 0:
            raise ConfigurationError("gamma must be positive")
        if self.n_rand < 1 or not 0 < self.eps_bisect < 1:
            raise ConfigurationError("solver needs N_rand >= 1 and 0 < eps_bisect < 1")

    def pattern(self) -> BeamPattern:
        kw = dict(
            boresight_gain=self.boresight_gain,
            beamwidth_3dB=self.beamwidth_3dB,
            sidelobe_floor=self.sidelobe_floor,
            taper_shape=self.taper_shape,
            altitude=self.altitude,
        )
        if self.beam_centers is not None:
            return BeamPattern(self.beam_centers, **kw)
        return hexagonal_cluster(self.n_beams, **kw)

    def modcod(self) -> ModcodTable:
        if self.modcod_table is None:
            return default_modcod_table()
        return ModcodTable.from_file(self.modcod_table)

    def with_overrides(self, **kw) -> SimConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["link"] = asdict(self.link)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=list)
        return hashlib.sha256(blob.encode()).hexdigest()

    @classmethod
    def from_mapping(cls, data: dict | None) -> SimConfig:
        data = dict(data or {})
        known = {"link_budget", "beams", "simulation", "solver"}
        if set(data) - known:
            raise ConfigurationError(f"unknown config sections {sorted(set(data) - known)}")
        link = _translate(data.get("link_budget"), _LINK_KEYS, "link_budget")
        kw = {}
        for section, keys in (("beams", _BEAM_KEYS), ("simulation", _SIM_KEYS), ("solver", _SOLVER_KEYS)):
            kw.update(_translate(data.get(section), keys, section))
        try:
            return cls(link=LinkBudgetParams(**link), **kw)
        except DomainError as exc:
            raise ConfigurationError(str(exc)) from exc
        except TypeError as exc:
            raise ConfigurationError(f"malformed configuration: {exc}") from exc

    @classmethod
    def load(cls, path) -> SimConfig:
        path = Path(path)
        try:
            data = yaml.safe_load(path.read_text())
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        except yaml.YAMLError as exc:
            raise ConfigurationError(f"config {path} is not valid YAML: {exc}") from exc
        if data is not None and not isinstance(data, dict):
            raise ConfigurationError(f"config {path} must be a mapping")
        return cls.from_mapping(data)


def _translate(section, keys: dict, name: str) -> dict:
    if section is None:
        return {}
    if not isinstance(section, dict):
        raise ConfigurationError(f"section {name!r} must be a mapping")
    unknown = set(section) - set(keys)
    if unknown:
        raise ConfigurationError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return {keys[k]: v for k, v in section.items()}
