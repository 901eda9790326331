"""Link-level metrics: power, SINR, rate, beampattern gain, constraint residuals.

Every function here is pure over immutable inputs and safe to call from any
number of threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import target_steering_matrix

# Stand-in for the +inf dB residual of a zero-SINR user inside penalty sums.
SINR_RESIDUAL_CAP_DB = 1e6


@dataclass
class BeamformerSet:
    """K communication beams, J sensing beams, and the auxiliary min-gain level.

    W has shape (K, S), R has shape (J, S); eta is real and non-negative but
    not necessarily attainable by the beams it travels with.
    """

    W: np.ndarray
    R: np.ndarray
    eta: float


@dataclass
class ConstraintResiduals:
    """Signed constraint slacks; a solution is feasible iff all are <= 0.

    power_residual is in watts, sinr_residuals in dB (one per CU, +inf when
    the user receives nothing), eta_residuals in gain units (one per target).
    """

    power_residual: float
    sinr_residuals: np.ndarray
    eta_residuals: np.ndarray


def total_power(bf):
    """Total transmit power: sum of squared norms of all beams, in watts."""
    return float(np.sum(np.abs(bf.W) ** 2) + np.sum(np.abs(bf.R) ** 2))


def sinr(instance, channels, bf, k):
    """Received SINR of CU k as a linear ratio.

    The interference term counts every other communication beam and every
    sensing beam.
    """
    K = instance.config.K
    if not 0 <= k < K:
        raise IndexError(f"CU index {k} out of range for K={K}")
    h = channels.h[k]
    desired = np.abs(np.vdot(h, bf.W[k])) ** 2
    interference = 0.0
    for i in range(K):
        if i != k:
            interference += np.abs(np.vdot(h, bf.W[i])) ** 2
    for j in range(bf.R.shape[0]):
        interference += np.abs(np.vdot(h, bf.R[j])) ** 2
    return float(desired / (interference + instance.sigma2_W))


def sinr_all(instance, channels, bf):
    """Vector of linear SINRs for all CUs."""
    K = instance.config.K
    if K == 0:
        return np.zeros(0)
    hw = channels.h.conj() @ bf.W.T  # [k, i] = h_k^H w_i
    desired = np.abs(np.diagonal(hw)) ** 2
    interference = np.sum(np.abs(hw) ** 2, axis=1) - desired
    if bf.R.shape[0]:
        hr = channels.h.conj() @ bf.R.T
        interference = interference + np.sum(np.abs(hr) ** 2, axis=1)
    return desired / (interference + instance.sigma2_W)


def rate(gamma):
    """Achievable rate log2(1 + gamma) in bits/s/Hz. Rejects negative gamma."""
    if np.any(np.asarray(gamma) < 0):
        raise ValueError("SINR must be non-negative")
    return np.log2(1.0 + gamma)


def beampattern_gain(a, bf):
    """Transmit power density toward steering direction a.

    Computed as sum_k |a^H w_k|^2 + sum_j |a^H r_j|^2, which equals the
    quadratic form of a against the summed beam covariance.
    """
    ac = np.conj(np.asarray(a))
    return float(np.sum(np.abs(bf.W @ ac) ** 2) + np.sum(np.abs(bf.R @ ac) ** 2))


def beampattern_gains(steering_rows, bf):
    """Beampattern gain for each row of a (M, S) stack of steering vectors."""
    rows = np.asarray(steering_rows)
    if rows.shape[0] == 0:
        return np.zeros(0)
    aw = rows.conj() @ bf.W.T
    ar = rows.conj() @ bf.R.T
    return np.sum(np.abs(aw) ** 2, axis=1) + np.sum(np.abs(ar) ** 2, axis=1)


def feasibility_tolerances(instance):
    """(power, sinr_dB, eta) slack tolerances used to call a solution feasible."""
    p = instance.p_max_W
    return 1e-6 * p, 1e-3, 1e-9 * p * instance.config.S


def constraint_residuals(instance, channels, bf):
    """Signed residuals of the power, per-CU SINR, and per-target gain constraints.

    Positive values are violations. A CU with exactly zero SINR yields a +inf
    dB residual here; penalty code caps it at SINR_RESIDUAL_CAP_DB.
    """
    power_residual = total_power(bf) - instance.p_max_W
    gamma = sinr_all(instance, channels, bf)
    with np.errstate(divide="ignore"):
        sinr_db = 10.0 * np.log10(gamma)
    sinr_residuals = instance.config.sinr_th_dB - sinr_db
    zeta = beampattern_gains(target_steering_matrix(instance), bf)
    eta_residuals = bf.eta - zeta
    return ConstraintResiduals(
        power_residual=float(power_residual),
        sinr_residuals=sinr_residuals,
        eta_residuals=eta_residuals,
    )


def is_feasible(residuals, instance):
    """True when every residual is within the feasibility tolerances."""
    tol_p, tol_s, tol_e = feasibility_tolerances(instance)
    return bool(
        residuals.power_residual <= tol_p
        and np.all(residuals.sinr_residuals <= tol_s)
        and np.all(residuals.eta_residuals <= tol_e)
    )


def worst_user(gammas):
    """Index of the minimum-SINR (hence minimum-rate) user; ties pick the lowest index."""
    gammas = np.asarray(gammas)
    if gammas.size == 0:
        raise ValueError("no users")
    return int(np.argmin(gammas))
