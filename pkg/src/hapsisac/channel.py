"""Uniform-planar-array steering vectors and Rician channel synthesis."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .scenario import SPEED_OF_LIGHT_M_S, rng_streams

# Element spacing over wavelength; the array geometry is fixed at half-wavelength.
SPACING_OVER_LAMBDA = 0.5


def steering_vector(theta, phi, s_w, s_l):
    """Steering vector of an S_W x S_L planar array toward (theta, phi).

    Built as alpha kron b where alpha spans the length axis (S_L entries,
    per-step phase sin(theta)cos(phi)) and b spans the width axis (S_W
    entries, per-step phase sin(theta)sin(phi)). Flattened element s = p*S_W + q
    holds alpha[p] * b[q]. Every element has unit modulus and element 0 is 1.
    """
    if s_w < 1 or s_l < 1:
        raise ValueError("array dimensions must be at least 1")
    u = np.sin(theta) * np.cos(phi)
    v = np.sin(theta) * np.sin(phi)
    alpha = np.exp(-2j * np.pi * SPACING_OVER_LAMBDA * u * np.arange(s_l))
    b = np.exp(-2j * np.pi * SPACING_OVER_LAMBDA * v * np.arange(s_w))
    return np.kron(alpha, b)


def fspl(r_m, lambda_m):
    """Free-space path loss (4 pi r / lambda)^2 as a linear power ratio."""
    if r_m <= 0 or lambda_m <= 0:
        raise ValueError("range and wavelength must be positive")
    return (4.0 * np.pi * r_m / lambda_m) ** 2


def sample_nlos(s, rng):
    """i.i.d. circularly symmetric complex Gaussian vector, unit power per element."""
    x = rng.standard_normal((int(s), 2))
    return (x[:, 0] + 1j * x[:, 1]) / np.sqrt(2.0)


def rician_channel(entity, config, rng):
    """Channel vector from the array to one ground entity.

    Deterministic steering component plus a diffuse component drawn from rng,
    mixed by the Rician factor and scaled by the amplitude path loss, so that
    E[||h||^2] = S / fspl.
    """
    lam = SPEED_OF_LIGHT_M_S / config.f_Hz
    loss = fspl(entity.r, lam)
    los = steering_vector(entity.theta, entity.phi, config.S_W, config.S_L)
    k = config.rician_K
    w_los = np.sqrt(k / (1.0 + k))
    w_nlos = np.sqrt(1.0 / (1.0 + k))
    return (w_los * los + w_nlos * sample_nlos(los.size, rng)) / np.sqrt(loss)


@dataclass(frozen=True)
class ChannelSet:
    """Per-CU channel vectors with their path losses and Rician factors."""

    h: np.ndarray  # (K, S) complex
    path_loss: np.ndarray  # (K,) linear
    rician_k: np.ndarray  # (K,) linear


def build_channels(instance, nlos_seed=None):
    """Rician channels for every CU of a scenario instance.

    One child stream is spawned per CU so channels are independent and a
    user's channel does not change when more users are appended. By default
    the diffuse stream is derived from the scenario seed.
    """
    cfg = instance.config
    if nlos_seed is None:
        nlos_seed = rng_streams(cfg.seed)["nlos"]
    streams = nlos_seed.spawn(cfg.K) if cfg.K else []
    h = np.zeros((cfg.K, cfg.S), dtype=complex)
    loss = np.zeros(cfg.K)
    for k, (entity, stream) in enumerate(zip(instance.cus, streams)):
        loss[k] = fspl(entity.r, instance.lambda_m)
        h[k] = rician_channel(entity, cfg, np.random.default_rng(stream))
    h.flags.writeable = False
    loss.flags.writeable = False
    return ChannelSet(h=h, path_loss=loss, rician_k=np.full(cfg.K, float(cfg.rician_K)))


def target_steering_matrix(instance):
    """Stack of steering vectors toward every target, shape (J, S)."""
    cfg = instance.config
    a = np.zeros((cfg.J, cfg.S), dtype=complex)
    for j, t in enumerate(instance.targets):
        a[j] = steering_vector(t.theta, t.phi, cfg.S_W, cfg.S_L)
    return a


def dump_channels_csv(path, channels):
    """Write channel coefficients as rows of (entity_id, element_index, re, im)."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["entity_id", "element_index", "re", "im"])
        for k in range(channels.h.shape[0]):
            for s in range(channels.h.shape[1]):
                c = channels.h[k, s]
                writer.writerow([k, s, repr(float(c.real)), repr(float(c.imag))])
