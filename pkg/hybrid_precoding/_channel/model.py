"""Clustered mmWave channels between a cylindrical-array base station and linear-array users."""
from dataclasses import dataclass
from typing import Union

import numpy as np
import structlog

from hybrid_precoding._utils.constants import PATH_LOSS_INTERCEPT_DB, PATH_LOSS_SLOPE_DB
from hybrid_precoding.exceptions import ConfigurationError, DomainError
from hybrid_precoding.models import ArrayGeometry, ChannelSet, ClusterConfig, Scenario

logger = structlog.get_logger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass
class PathAngles:
    """Angles of every propagation path, each array shaped (N_cl, N_sc).

    :param phi_t: Azimuth of departure at the base station.
    :param theta_t: Elevation of departure at the base station.
    :param phi_r: Azimuth of arrival at the user.
    """

    phi_t: np.ndarray
    theta_t: np.ndarray
    phi_r: np.ndarray


def path_loss_db(distance_m: ArrayLike) -> ArrayLike:
    """Return the path loss 36.72 + 35.3 log10(d) in dB.

    :param distance_m: Distance (or array of distances) in meters.
    :return: Attenuation in dB, same shape as the input.
    """
    distance = np.asarray(distance_m, dtype=float)
    if np.any(distance <= 0):
        raise DomainError(f"Distance must be positive, got {distance_m}.")
    loss = PATH_LOSS_INTERCEPT_DB + PATH_LOSS_SLOPE_DB * np.log10(distance)
    return float(loss) if loss.ndim == 0 else loss


def ula_response(phi: ArrayLike, n_t: int) -> np.ndarray:
    """Unit-norm response of an N_t element half-wavelength ULA.

    Entry n is exp(j pi n sin(phi)) / sqrt(N_t). Array inputs broadcast into a leading axis.
    """
    if n_t < 1:
        raise ConfigurationError(f"N_t must be positive, got {n_t}.")
    index = np.arange(n_t)
    phase = np.pi * np.expand_dims(np.sin(np.asarray(phi, dtype=float)), -1) * index
    return np.exp(1j * phase) / np.sqrt(n_t)


def ucya_response(phi: ArrayLike, theta: ArrayLike, geometry: ArrayGeometry) -> np.ndarray:
    """Unit-norm response of the uniform cylindrical array.

    The vector is the Kronecker product of the azimuth (ring) response and the elevation
    (column) response, so antenna n_a * N_e + n_e carries ring element n_a at height n_e.

    :param phi: Azimuth angle(s) in radians.
    :param theta: Elevation angle(s) in radians.
    :param geometry: Array geometry; radius and spacing are in wavelengths.
    :return: Array of shape broadcast(phi, theta).shape + (N,).
    """
    phi_arr, theta_arr = np.broadcast_arrays(np.asarray(phi, dtype=float), np.asarray(theta, dtype=float))
    offsets = 2.0 * np.pi * np.arange(geometry.n_a) / geometry.n_a
    azimuth_phase = (
        2.0
        * np.pi
        * geometry.ucya_radius_wavelengths
        * np.expand_dims(np.sin(theta_arr), -1)
        * np.cos(np.expand_dims(phi_arr, -1) - offsets)
    )
    azimuth = np.exp(1j * azimuth_phase) / np.sqrt(geometry.n_a)
    heights = geometry.vertical_spacing_wavelengths * np.arange(geometry.n_e)
    elevation_phase = -2.0 * np.pi * heights * np.expand_dims(np.cos(theta_arr), -1)
    elevation = np.exp(1j * elevation_phase) / np.sqrt(geometry.n_e)
    stacked = azimuth[..., :, None] * elevation[..., None, :]
    return stacked.reshape(phi_arr.shape + (geometry.n_antennas,))


def _wrap(angles: np.ndarray) -> np.ndarray:
    return np.mod(angles, 2.0 * np.pi)


def sample_angles(rng: np.random.Generator, clusters: ClusterConfig) -> PathAngles:
    """Draw cluster means uniformly on [0, 2pi) and Laplacian subpath deviations around them.

    The Laplacian scale is spread / sqrt(2) so that the deviations have the configured
    standard deviation.
    """
    shape = (clusters.n_clusters, clusters.n_subpaths)
    scale = np.deg2rad(clusters.angle_spread_deg) / np.sqrt(2.0)
    draws = []
    for _ in range(3):
        means = rng.uniform(0.0, 2.0 * np.pi, size=(clusters.n_clusters, 1))
        if scale > 0:
            deviations = rng.laplace(0.0, scale, size=shape)
        else:
            deviations = np.zeros(shape)
        draws.append(_wrap(means + deviations))
    return PathAngles(phi_t=draws[0], theta_t=draws[1], phi_r=draws[2])


def sample_user_distances(
    rng: np.random.Generator, n_users: int, min_distance_m: float, max_distance_m: float
) -> np.ndarray:
    """Place users uniformly over the area of the annulus [min, max]."""
    if not 0 < min_distance_m < max_distance_m:
        raise ConfigurationError(f"Invalid annulus [{min_distance_m}, {max_distance_m}].")
    radius_sq = rng.uniform(min_distance_m**2, max_distance_m**2, size=n_users)
    return np.sqrt(radius_sq)


def user_channel_from_paths(
    geometry: ArrayGeometry, loss_db: float, angles: PathAngles, gains: np.ndarray
) -> np.ndarray:
    """Assemble H_k (N_t x N) from explicit paths.

    :param geometry: Array geometry.
    :param loss_db: Path loss of the link in dB.
    :param angles: Path angles, one entry per path.
    :param gains: Complex path gains with the same shape as the angles.
    :return: The channel matrix.
    """
    gains = np.asarray(gains, dtype=complex).ravel()
    n_paths = gains.size
    a_t = ucya_response(angles.phi_t.ravel(), angles.theta_t.ravel(), geometry)
    a_r = ula_response(angles.phi_r.ravel(), geometry.n_t)
    scale = np.sqrt(geometry.n_antennas * geometry.n_t / n_paths) * 10.0 ** (-loss_db / 20.0)
    return scale * np.einsum("p,pt,pn->tn", gains, a_r, a_t.conj())


def generate_channels(scenario: Scenario, rng: np.random.Generator) -> ChannelSet:
    """Draw the channels of all users for one scenario.

    Each user gets a distance, its own clusters and circularly-symmetric unit-variance
    complex Gaussian path gains.
    """
    geometry, clusters = scenario.geometry, scenario.clusters
    distances = sample_user_distances(rng, scenario.n_users, scenario.min_distance_m, scenario.cell_radius_m)
    losses = np.asarray(path_loss_db(distances))
    matrices = np.empty((scenario.n_users, geometry.n_t, geometry.n_antennas), dtype=complex)
    for user in range(scenario.n_users):
        angles = sample_angles(rng, clusters)
        shape = (clusters.n_clusters, clusters.n_subpaths)
        gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        matrices[user] = user_channel_from_paths(geometry, float(losses[user]), angles, gains)
    logger.debug("Generated channels.", n_users=scenario.n_users, mean_path_loss_db=float(np.mean(losses)))
    return ChannelSet(matrices=matrices, n_rf=scenario.n_rf, distances_m=distances, path_loss_db=losses)
