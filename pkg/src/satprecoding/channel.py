"""Multibeam satellite channel generation.

The forward-link channel of ``N_u`` single-antenna users and ``N_t`` feeds is
``H = diag(exp(j*phi)) @ B`` where ``B`` holds the real link-budget gains and
each user sees one common propagation phase on every feed.  ``B`` already
contains the noise normalisation ``sqrt(kappa * T_cs * B_u)``, so SINRs computed
from it use unit noise power.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize, special

from .errors import ConfigurationError, DomainError, ScheduleError

SPEED_OF_LIGHT = 299_792_458.0
BOLTZMANN = 1.380649e-23
GEO_ALTITUDE = 35_786e3

SeedLike = int | Sequence[int]


def db2lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin2db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(np.asarray(x, dtype=float))


def _rng(seed: SeedLike, *key: int) -> np.random.Generator:
    entropy = [int(seed)] if np.isscalar(seed) else [int(s) for s in seed]
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=key))


@dataclass(frozen=True)
class LinkBudgetParams:
    """Forward-link budget. Gains and powers are in dB units, the rest in SI."""

    carrier_frequency: float = 20e9
    clear_sky_temp: float = 235.3
    user_bandwidth: float = 500e6
    receiver_gain: float = 40.7
    boltzmann: float = BOLTZMANN
    onboard_power: float = 55.0
    output_backoff: float = 5.0
    rolloff: float = 0.20

    def __post_init__(self):
        for name in ("carrier_frequency", "clear_sky_temp", "user_bandwidth", "boltzmann"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive, got {getattr(self, name)}")
        if not 0.0 <= self.rolloff < 1.0:
            raise DomainError(f"rolloff must lie in [0, 1), got {self.rolloff}")
        if self.output_backoff < 0:
            raise DomainError(f"output_backoff must be >= 0, got {self.output_backoff}")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_frequency

    @property
    def noise_power(self) -> float:
        """Receiver noise power kappa * T_cs * B_u in watts."""
        return self.boltzmann * self.clear_sky_temp * self.user_bandwidth

    def per_antenna_budget(self, n_antennas: int) -> np.ndarray:
        """Equal split of the backed-off on-board power, linear watts per feed."""
        available = db2lin(self.onboard_power - self.output_backoff)
        return np.full(n_antennas, available / n_antennas)


_BESSEL_U3DB = 2.07123


def _bessel_amplitude(u):
    u = np.asarray(u, dtype=float)
    out = np.ones_like(u)
    nz = u > 1e-6
    un = u[nz]
    out[nz] = special.jv(1, un) / (2 * un) + 36 * special.jv(3, un) / un**3
    return out


@dataclass(frozen=True)
class BeamPattern:
    """Parametric multibeam antenna pattern.

    ``beam_centers`` are ground-plane aim points in metres, relative to the
    sub-satellite point.  The gain towards a user depends only on the angle,
    seen from the satellite, between the user and the beam aim point.
    """

    beam_centers: np.ndarray
    boresight_gain: float = 52.0
    beamwidth_3dB: float = 0.4
    sidelobe_floor: float = -30.0
    taper_shape: str = "gaussian"
    altitude: float = GEO_ALTITUDE

    def __post_init__(self):
        centers = np.atleast_2d(np.asarray(self.beam_centers, dtype=float))
        if centers.ndim != 2 or centers.shape[1] != 2 or len(centers) == 0:
            raise ConfigurationError("beam_centers must be a non-empty (G, 2) array")
        object.__setattr__(self, "beam_centers", centers)
        if self.beamwidth_3dB <= 0:
            raise ConfigurationError("beamwidth_3dB must be positive (zero-area footprint)")
        if self.sidelobe_floor >= 0:
            raise ConfigurationError("sidelobe_floor is relative to boresight and must be negative")
        if self.taper_shape not in ("gaussian", "bessel-taper"):
            raise ConfigurationError(f"unknown taper_shape {self.taper_shape!r}")
        if self.altitude <= 0:
            raise DomainError("altitude must be positive")
        diff = centers[:, None, :] - centers[None, :, :]
        dist = np.hypot(diff[..., 0], diff[..., 1])[np.triu_indices(len(centers), 1)]
        if dist.size and dist.min() <= 0:
            raise ConfigurationError("duplicate beam centers give a zero-area footprint")

    @property
    def n_beams(self) -> int:
        return len(self.beam_centers)

    @property
    def half_beamwidth(self) -> float:
        """Half-power angle off boresight, radians."""
        return np.deg2rad(self.beamwidth_3dB) / 2

    def off_axis_angles(self, points) -> np.ndarray:
        """Angles (radians) between each ground point and each beam aim point."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        sat = np.array([0.0, 0.0, self.altitude])

        def los(xy):
            v = np.concatenate([xy, np.zeros((len(xy), 1))], axis=1) - sat
            return v / np.linalg.norm(v, axis=1, keepdims=True)

        a, b = los(points), los(self.beam_centers)
        # atan2 keeps full precision near boresight, where arccos does not
        cross = np.linalg.norm(np.cross(a[:, None, :], b[None, :, :]), axis=2)
        return np.arctan2(cross, a @ b.T)

    def relative_gain(self, theta) -> np.ndarray:
        """Gain relative to boresight (linear, <= 1) at off-axis angle ``theta``."""
        theta = np.asarray(theta, dtype=float)
        floor = db2lin(self.sidelobe_floor)
        if self.taper_shape == "gaussian":
            g = np.exp(-np.log(2) * (theta / self.half_beamwidth) ** 2)
            return np.maximum(g, floor)
        u = _BESSEL_U3DB * np.sin(theta) / np.sin(self.half_beamwidth)
        g = _bessel_amplitude(u) ** 2
        # beyond the main-lobe crossing of the floor the pattern is held flat
        return np.where(u < _bessel_floor_crossing(floor), np.maximum(g, floor), floor)

    def gain(self, points) -> np.ndarray:
        """Linear antenna gain G_ij, shape (n_points, G)."""
        return db2lin(self.boresight_gain) * self.relative_gain(self.off_axis_angles(points))

    def slant_range(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return np.sqrt(self.altitude**2 + np.sum(points**2, axis=1))


@lru_cache(maxsize=None)
def _bessel_floor_crossing(floor: float) -> float:
    # first null of the aperture pattern, near u = 5.9
    grid = np.linspace(0.5, 10.0, 400)
    k = int(np.flatnonzero(np.diff(np.sign(_bessel_amplitude(grid))))[0])
    null = optimize.brentq(lambda u: _bessel_amplitude(u), grid[k], grid[k + 1])
    if _bessel_amplitude(null - 1e-9) ** 2 <= floor:
        return null
    return optimize.brentq(lambda u: _bessel_amplitude(u) ** 2 - floor, 1e-6, null)


def hexagonal_cluster(
    n_beams: int = 9,
    *,
    boresight_gain: float = 52.0,
    beamwidth_3dB: float = 0.4,
    sidelobe_floor: float = -30.0,
    taper_shape: str = "gaussian",
    altitude: float = GEO_ALTITUDE,
    columns: int | None = None,
) -> BeamPattern:
    """Beams on a triangular lattice, alternate rows shifted by half a pitch.

    The pitch is chosen so that the 3 dB footprint circle circumscribes each
    hexagonal cell, the usual layout for contiguous multibeam coverage.  The
    default 9 beams form three rows of three.
    """
    if n_beams < 1:
        raise ConfigurationError("n_beams must be >= 1")
    columns = columns or int(np.ceil(np.sqrt(n_beams)))
    radius = altitude * np.tan(np.deg2rad(beamwidth_3dB) / 2)
    pitch = np.sqrt(3) * radius
    centers = []
    for idx in range(n_beams):
        row, col = divmod(idx, columns)
        centers.append(((col + 0.5 * (row % 2)) * pitch, row * pitch * np.sqrt(3) / 2))
    centers = np.array(centers)
    centers -= centers.mean(axis=0)
    return BeamPattern(
        centers,
        boresight_gain=boresight_gain,
        beamwidth_3dB=beamwidth_3dB,
        sidelobe_floor=sidelobe_floor,
        taper_shape=taper_shape,
        altitude=altitude,
    )


@dataclass(frozen=True)
class UserDrop:
    positions: np.ndarray
    slant_ranges: np.ndarray
    home_beam: np.ndarray
    rho: int
    seed: SeedLike = 0

    @property
    def n_users(self) -> int:
        return len(self.positions)


def drop_users(pattern: BeamPattern, rho: int, seed: SeedLike, max_tries: int = 10_000) -> UserDrop:
    """Place ``rho`` users uniformly at random inside every beam footprint.

    A footprint is the part of the beam's 3 dB contour where that beam is the
    strongest one.  User ``k * rho + i`` is the ``i``-th user of beam ``k`` and
    is drawn from its own stream keyed by ``(k, i)``, so a drop with more users
    per beam extends a drop with fewer users under the same seed.
    """
    if rho < 1:
        raise ConfigurationError("rho must be >= 1")
    n_beams = pattern.n_beams
    theta_max = pattern.half_beamwidth
    positions = np.empty((n_beams * rho, 2))
    for k in range(n_beams):
        center = pattern.beam_centers[k]
        d0 = pattern.slant_range(center)[0]
        incidence = np.arccos(pattern.altitude / d0)
        r_bound = d0 * np.tan(theta_max) / np.cos(incidence) ** 2
        for i in range(rho):
            rng = _rng(seed, k, i)
            for _ in range(max_tries):
                r = r_bound * np.sqrt(rng.random())
                a = 2 * np.pi * rng.random()
                p = center + r * np.array([np.cos(a), np.sin(a)])
                theta = pattern.off_axis_angles(p)[0]
                if theta[k] <= theta_max and np.argmax(pattern.gain(p)[0]) == k:
                    positions[k * rho + i] = p
                    break
            else:
                raise ConfigurationError(f"beam {k} has a zero-area footprint")
    return UserDrop(
        positions=positions,
        slant_ranges=pattern.slant_range(positions),
        home_beam=np.repeat(np.arange(n_beams), rho),
        rho=rho,
        seed=seed,
    )


def link_budget_matrix(drop: UserDrop, pattern: BeamPattern, params: LinkBudgetParams) -> np.ndarray:
    """Real gain matrix B with ``b_ij = sqrt(G_R G_ij) / (4 pi d_i / lambda * sqrt(kappa T_cs B_u))``."""
    d = np.asarray(drop.slant_ranges, dtype=float)
    if np.any(d <= 0):
        raise DomainError("slant ranges must be strictly positive")
    gains = pattern.gain(drop.positions)
    return link_budget_gain(gains, d, params)


def link_budget_gain(antenna_gain, slant_range, params: LinkBudgetParams) -> np.ndarray:
    """Elementwise link gain for linear antenna gains and per-row slant ranges."""
    antenna_gain = np.asarray(antenna_gain, dtype=float)
    d = np.asarray(slant_range, dtype=float)
    if np.any(d <= 0):
        raise DomainError("slant ranges must be strictly positive")
    g_r = db2lin(params.receiver_gain)
    path = 4 * np.pi * d / params.wavelength
    if antenna_gain.ndim == 2:
        path = path[:, None]
    return np.sqrt(g_r * antenna_gain) / (path * np.sqrt(params.noise_power))


@dataclass(frozen=True)
class ChannelMatrix:
    H: np.ndarray
    B: np.ndarray
    phases: np.ndarray

    @property
    def n_users(self) -> int:
        return self.H.shape[0]

    @property
    def n_antennas(self) -> int:
        return self.H.shape[1]


def apply_phases(B, seed: SeedLike, zero_phase: bool = False) -> ChannelMatrix:
    """Rotate every row of ``B`` by one phase drawn uniformly from (0, 2*pi]."""
    B = np.asarray(B, dtype=float)
    if np.any(B < 0):
        raise DomainError("B must be non-negative")
    if zero_phase:
        phases = np.zeros(B.shape[0])
    else:
        phases = 2 * np.pi * (1.0 - _rng(seed).random(B.shape[0]))
    H = np.exp(1j * phases)[:, None] * B
    return ChannelMatrix(H=H, B=B, phases=phases)


@dataclass(frozen=True)
class GroupSchedule:
    """Partition of user indices into equally sized multicast groups."""

    groups: tuple[np.ndarray, ...]
    n_users: int = field(default=-1)

    def __post_init__(self):
        groups = tuple(np.sort(np.asarray(g, dtype=int)) for g in self.groups)
        object.__setattr__(self, "groups", groups)
        sizes = {len(g) for g in groups}
        if len(sizes) != 1 or 0 in sizes:
            raise ScheduleError(f"groups must be non-empty and equally sized, got sizes {sorted(sizes)}")
        members = np.concatenate(groups)
        n_users = len(members) if self.n_users < 0 else self.n_users
        object.__setattr__(self, "n_users", n_users)
        if len(np.unique(members)) != len(members):
            raise ScheduleError("groups overlap")
        if not np.array_equal(np.sort(members), np.arange(n_users)):
            raise ScheduleError("groups do not cover all users")

    @classmethod
    def from_assignment(cls, assignment, n_groups: int | None = None) -> GroupSchedule:
        assignment = np.asarray(assignment, dtype=int)
        n_groups = int(assignment.max()) + 1 if n_groups is None else n_groups
        return cls(tuple(np.flatnonzero(assignment == k) for k in range(n_groups)), len(assignment))

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def rho(self) -> int:
        return len(self.groups[0])

    @property
    def assignment(self) -> np.ndarray:
        out = np.empty(self.n_users, dtype=int)
        for k, g in enumerate(self.groups):
            out[g] = k
        return out


def schedule_by_strongest_beam(gains, n_groups: int | None = None) -> GroupSchedule:
    """Assign each user to its strongest beam, ties going to the lowest index."""
    gains = np.asarray(gains, dtype=float)
    n_groups = gains.shape[1] if n_groups is None else n_groups
    return GroupSchedule.from_assignment(np.argmax(gains, axis=1), n_groups)


def slice_equivalent_channels(H, sched: GroupSchedule) -> np.ndarray:
    """Square one-user-per-beam slices, shape ``(rho, G, N_t)``.

    Row ``k`` of slice ``i`` is the channel of the ``i``-th user (by index) of
    group ``k``.
    """
    H = np.asarray(H)
    if sched.n_users != H.shape[0]:
        raise ScheduleError(f"schedule covers {sched.n_users} users but H has {H.shape[0]} rows")
    if sched.n_groups != H.shape[1]:
        raise ScheduleError("equivalent channels need one group per antenna")
    order = np.stack(sched.groups, axis=1)  # (rho, G)
    return H[order]


def generate_channel(
    pattern: BeamPattern, params: LinkBudgetParams, rho: int, seed: SeedLike
) -> tuple[UserDrop, ChannelMatrix, GroupSchedule]:
    """One random drop, its channel and the strongest-beam schedule."""
    drop = drop_users(pattern, rho, seed)
    B = link_budget_matrix(drop, pattern, params)
    entropy = [int(seed)] if np.isscalar(seed) else list(seed)
    channel = apply_phases(B, [*entropy, 0x9E37])
    sched = schedule_by_strongest_beam(pattern.gain(drop.positions))
    return drop, channel, sched
