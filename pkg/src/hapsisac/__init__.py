"""Planar-array ISAC beamforming toolkit for stratospheric platforms.

numpy-based simulator for a high-altitude platform whose uniform planar
array serves ground users and radar sensing targets with one transmit
signal, plus a penalty-based real-coded genetic solver that maximizes the
worst-case sensing beampattern gain under per-user SINR and total-power
constraints. The experiments module regenerates the reference data files;
`hapsisac` on the command line drives it.
"""

__version__ = "0.1.0"

from .channel import ChannelSet, build_channels, fspl, rician_channel, sample_nlos, steering_vector
from .ga import FitnessReport, GaConfig, GenerationLog, decode, encode, run_ga
from .metrics import (
    BeamformerSet,
    ConstraintResiduals,
    beampattern_gain,
    constraint_residuals,
    rate,
    sinr,
    total_power,
)
from .scenario import (
    GroundEntity,
    ScenarioConfig,
    ScenarioInstance,
    dbm_to_watts,
    geometry_to_angles,
    sample_scenario,
    watts_to_dbm,
)

__all__ = [
    "BeamformerSet",
    "ChannelSet",
    "ConstraintResiduals",
    "FitnessReport",
    "GaConfig",
    "GenerationLog",
    "GroundEntity",
    "ScenarioConfig",
    "ScenarioInstance",
    "beampattern_gain",
    "build_channels",
    "constraint_residuals",
    "dbm_to_watts",
    "decode",
    "encode",
    "fspl",
    "geometry_to_angles",
    "rate",
    "rician_channel",
    "run_ga",
    "sample_nlos",
    "sample_scenario",
    "sinr",
    "steering_vector",
    "total_power",
    "watts_to_dbm",
]
