"""Scenario configuration, platform geometry, and deterministic placement sampling.

Powers cross the API boundary in dBm and are held in watts internally.
Angles are radians everywhere inside the package; degrees appear only on
file-facing surfaces (CLI flags, CSV columns).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

SPEED_OF_LIGHT_M_S = 2.99792458e8


def dbm_to_watts(p_dbm):
    """Convert power in dBm to watts."""
    return 10.0 ** ((p_dbm - 30.0) / 10.0)


def watts_to_dbm(p_watts):
    """Convert power in watts to dBm. Requires strictly positive power."""
    if np.any(np.asarray(p_watts) <= 0.0):
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * np.log10(p_watts) + 30.0


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical and protocol parameters for one service-area snapshot.

    K: number of communication users (single-antenna, on the ground).
    J: number of sensing target points. K + J must be at least 1.
    S_W, S_L: planar-array width/length element counts; S = S_W * S_L.
    """

    K: int = 4
    J: int = 4
    S_W: int = 8
    S_L: int = 8
    P_max_dBm: float = 52.0
    noise_dBm: float = -110.0
    f_Hz: float = 2.545e9
    H_haps_m: float = 20000.0
    rician_K: float = 10.0
    area_side_m: float = 1000.0
    sinr_th_dB: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if self.K < 0 or self.J < 0:
            raise ValueError("K and J must be non-negative")
        if self.K + self.J == 0:
            raise ValueError("need at least one user or target")
        if self.S_W < 1 or self.S_L < 1:
            raise ValueError("array dimensions must be at least 1")
        if self.f_Hz <= 0:
            raise ValueError("carrier frequency must be positive")
        if self.H_haps_m <= 0:
            raise ValueError("platform altitude must be positive")
        if self.area_side_m <= 0:
            raise ValueError("service-area side must be positive")
        if self.rician_K < 0:
            raise ValueError("Rician factor must be non-negative")

    @property
    def S(self):
        return self.S_W * self.S_L

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ValueError(f"unknown scenario keys: {unknown}")
        return cls(**d)


@dataclass(frozen=True)
class GroundEntity:
    """A ground point as seen from the platform: position plus departure geometry."""

    position: np.ndarray  # (3,) meters, z = 0 on the ground
    theta: float  # vertical departure angle measured from nadir, rad
    phi: float  # azimuth of the ground offset, rad in (-pi, pi]
    r: float  # slant range to the platform, m


@dataclass(frozen=True)
class ScenarioInstance:
    """Immutable sampled scenario: placed entities plus derived SI constants.

    Safe to share across threads; all arrays are read-only.
    """

    config: ScenarioConfig
    haps_position: np.ndarray  # (3,) m, platform above the area center
    cus: tuple  # K GroundEntity
    targets: tuple  # J GroundEntity
    lambda_m: float
    sigma2_W: float
    p_max_W: float


def geometry_to_angles(haps_position, ground_position):
    """Departure angles and slant range from the platform to a ground point.

    theta is measured from nadir (boresight pointing straight down) and phi
    is the azimuth of the ground-relative offset, atan2(dy, dx).

    Returns (theta, phi, r); raises ValueError if the platform is not
    strictly above the ground point.
    """
    haps = np.asarray(haps_position, dtype=float)
    ground = np.asarray(ground_position, dtype=float)
    dz = haps[2] - ground[2]
    if dz <= 0:
        raise ValueError("platform must be strictly above the ground point")
    offset = ground - haps
    r = float(np.linalg.norm(offset))
    theta = float(np.arccos(dz / r))
    phi = float(np.arctan2(offset[1], offset[0]))
    return theta, phi, r


def rng_streams(seed):
    """Split one master seed into independent child streams, one per consumer.

    Fixed splitting rule: child 0 drives entity placement, child 1 the
    diffuse channel components, child 2 the solver. Every experiment is
    reproducible from the single master seed.
    """
    placement, nlos, ga = np.random.SeedSequence(seed).spawn(3)
    return {"placement": placement, "nlos": nlos, "ga": ga}


def _place_entities(rng, n, side, haps):
    half = side / 2.0
    xy = rng.uniform(-half, half, size=(n, 2))
    dx = xy[:, 0] - haps[0]
    dy = xy[:, 1] - haps[1]
    r = np.sqrt(dx * dx + dy * dy + haps[2] * haps[2])
    theta = np.arccos(haps[2] / r)
    phi = np.arctan2(dy, dx)
    entities = []
    for i in range(n):
        pos = np.array([xy[i, 0], xy[i, 1], 0.0])
        pos.flags.writeable = False
        entities.append(
            GroundEntity(position=pos, theta=float(theta[i]), phi=float(phi[i]), r=float(r[i]))
        )
    return tuple(entities)


def sample_scenario(config):
    """Draw CU and target positions uniformly over the square service area.

    The platform sits at altitude H directly above the area center.
    Deterministic for a fixed config.seed: CUs are drawn first, then targets,
    from the placement stream of rng_streams(config.seed).
    """
    rng = np.random.default_rng(rng_streams(config.seed)["placement"])
    haps = np.array([0.0, 0.0, config.H_haps_m])
    haps.flags.writeable = False
    cus = _place_entities(rng, config.K, config.area_side_m, haps)
    targets = _place_entities(rng, config.J, config.area_side_m, haps)
    return ScenarioInstance(
        config=config,
        haps_position=haps,
        cus=cus,
        targets=targets,
        lambda_m=SPEED_OF_LIGHT_M_S / config.f_Hz,
        sigma2_W=dbm_to_watts(config.noise_dBm),
        p_max_W=dbm_to_watts(config.P_max_dBm),
    )
