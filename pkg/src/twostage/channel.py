"""Wideband clustered mmWave channel with ULA array responses.

The channel on subcarrier ``nu`` of block ``tau`` is a sum of rank-one terms,
one per propagation cluster::

    H[nu] = sum_i abar_i[nu] * a_r(phi_r_i) a_t(phi_t_i)^T
    abar_i[nu] = sum_l alpha_i[l] exp(-j 2 pi l nu / S)

A line-of-sight path, when present, is stored as cluster row 0 with a
deterministic single tap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

__all__ = [
    "ArrayGeometry",
    "ClusterSet",
    "FadingRealization",
    "ChannelBlock",
    "array_response",
    "exponential_tap_profile",
    "make_cluster_set",
    "taps_to_subcarrier_gains",
    "draw_fading",
    "assemble_channel",
    "steering_matrices",
]


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array; spacing is given in carrier wavelengths."""

    num_antennas: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 1:
            raise ConfigurationError(f"num_antennas must be a positive integer, got {self.num_antennas}")
        if not self.spacing_over_wavelength > 0:
            raise ConfigurationError("spacing_over_wavelength must be positive")


@dataclass(frozen=True)
class ClusterSet:
    """Large-scale description of the propagation paths of one block.

    Row ``i`` of every array describes one path. When ``has_los`` is set,
    row 0 is the line-of-sight path and rows ``1..num_clusters`` are the
    scattering clusters.

    Attributes
    ----------
    aoa_rad, aod_rad : ndarray, shape (K,)
        Angles of arrival / departure measured from array broadside.
    tap_power : ndarray, shape (K, L)
        Average tap powers ``beta_i[l]`` in linear scale.
    has_los : bool
    los_power : float
        ``beta_0``; zero when ``has_los`` is False.
    """

    aoa_rad: np.ndarray
    aod_rad: np.ndarray
    tap_power: np.ndarray
    has_los: bool = False
    los_power: float = 0.0

    def __post_init__(self):
        aoa = np.atleast_1d(np.asarray(self.aoa_rad, dtype=float))
        aod = np.atleast_1d(np.asarray(self.aod_rad, dtype=float))
        power = np.asarray(self.tap_power, dtype=float)
        if power.ndim != 2:
            raise ConfigurationError("tap_power must be a (paths, taps) array")
        if aoa.shape != aod.shape or aoa.shape[0] != power.shape[0]:
            raise ConfigurationError(
                f"angle arrays {aoa.shape}/{aod.shape} do not match tap_power {power.shape}"
            )
        if np.any(power < 0):
            raise ConfigurationError("tap powers must be nonnegative")
        for name, ang in (("aoa", aoa), ("aod", aod)):
            if np.any(np.abs(ang) >= np.pi / 2):
                raise DomainError(f"{name} angles must lie in (-pi/2, pi/2)")
        if self.has_los:
            if power.shape[0] < 1:
                raise ConfigurationError("has_los requires a LOS row")
            if np.any(power[0, 1:] != 0) or power[0, 0] != self.los_power:
                raise ConfigurationError("LOS row must carry los_power on tap 0 only")
        object.__setattr__(self, "aoa_rad", aoa)
        object.__setattr__(self, "aod_rad", aod)
        object.__setattr__(self, "tap_power", power)

    @property
    def num_paths(self) -> int:
        return self.tap_power.shape[0]

    @property
    def num_clusters(self) -> int:
        """Number of scattering (non-LOS) clusters."""
        return self.num_paths - int(self.has_los)

    @property
    def num_taps(self) -> int:
        return self.tap_power.shape[1]


@dataclass(frozen=True)
class FadingRealization:
    taps: np.ndarray  # (K, L) complex


@dataclass(frozen=True)
class ChannelBlock:
    """Channel of one coherence block on all subcarriers.

    ``per_subcarrier`` has shape ``(S, N_r, N_t)``.
    """

    block_index: int
    per_subcarrier: np.ndarray
    clusters: ClusterSet
    fading: FadingRealization

    @property
    def num_subcarriers(self) -> int:
        return self.per_subcarrier.shape[0]


def array_response(geom: ArrayGeometry, angle_rad) -> np.ndarray:
    """ULA response ``[1, e^{j 2 pi d sin(phi)}, ..., e^{j 2 pi d (N-1) sin(phi)}]``.

    Parameters
    ----------
    geom : ArrayGeometry
    angle_rad : float or array_like
        Angle(s) from broadside, each in the open interval (-pi/2, pi/2).

    Returns
    -------
    ndarray
        Shape ``(N,)`` for a scalar angle, ``(N, K)`` for ``K`` angles.
    """
    angle = np.asarray(angle_rad, dtype=float)
    if np.any(~(np.abs(angle) < np.pi / 2)):
        raise DomainError(f"angle must lie in (-pi/2, pi/2), got {angle_rad}")
    n = np.arange(geom.num_antennas)
    phase = 2 * np.pi * geom.spacing_over_wavelength * np.multiply.outer(n, np.sin(angle))
    return np.exp(1j * phase)


def exponential_tap_profile(total_power: float, num_taps: int, decay_taps: float) -> np.ndarray:
    """Exponentially decaying power-delay profile summing to ``total_power``."""
    if num_taps < 1:
        raise ConfigurationError("num_taps must be >= 1")
    if not decay_taps > 0:
        raise ConfigurationError("decay_taps must be positive")
    weights = np.exp(-np.arange(num_taps) / decay_taps)
    return total_power * weights / weights.sum()


def make_cluster_set(
    aoa_rad,
    aod_rad,
    cluster_power,
    num_taps: int,
    decay_taps: float = 2.0,
    los: tuple[float, float, float] | None = None,
) -> ClusterSet:
    """Build a :class:`ClusterSet` from per-cluster totals.

    ``los`` is ``(aoa, aod, beta_0)`` of the line-of-sight path or None.
    Each scattering cluster spreads its total power over the taps with
    :func:`exponential_tap_profile`.
    """
    aoa = list(np.atleast_1d(np.asarray(aoa_rad, dtype=float)))
    aod = list(np.atleast_1d(np.asarray(aod_rad, dtype=float)))
    powers = np.atleast_1d(np.asarray(cluster_power, dtype=float))
    if len(aoa) != len(powers) or len(aod) != len(powers):
        raise ConfigurationError("one power per cluster is required")
    rows = [exponential_tap_profile(p, num_taps, decay_taps) for p in powers]
    los_power = 0.0
    if los is not None:
        los_aoa, los_aod, los_power = los
        los_row = np.zeros(num_taps)
        los_row[0] = los_power
        rows.insert(0, los_row)
        aoa.insert(0, los_aoa)
        aod.insert(0, los_aod)
    tap_power = np.array(rows).reshape(len(rows), num_taps)
    return ClusterSet(
        aoa_rad=np.array(aoa),
        aod_rad=np.array(aod),
        tap_power=tap_power,
        has_los=los is not None,
        los_power=float(los_power),
    )


def taps_to_subcarrier_gains(taps, num_subcarriers: int) -> np.ndarray:
    """DFT of the tap vector(s) over ``S`` subcarriers along the last axis.

    ``out[nu] = sum_l taps[l] exp(-j 2 pi l nu / S)``.
    """
    taps = np.asarray(taps)
    if taps.shape[-1] > num_subcarriers:
        raise ConfigurationError(
            f"{taps.shape[-1]} taps do not fit in {num_subcarriers} subcarriers"
        )
    return np.fft.fft(taps, n=num_subcarriers, axis=-1)


def draw_fading(rng: np.random.Generator, clusters: ClusterSet) -> FadingRealization:
    """Draw ``alpha_i[l] ~ CN(0, beta_i[l])``; the LOS tap is ``sqrt(beta_0)``."""
    scale = np.sqrt(clusters.tap_power / 2)
    shape = clusters.tap_power.shape
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    if clusters.has_los:
        taps[0] = 0
        taps[0, 0] = np.sqrt(clusters.los_power)
    return FadingRealization(taps=taps)


def assemble_channel(
    rx_geom: ArrayGeometry,
    tx_geom: ArrayGeometry,
    clusters: ClusterSet,
    fading: FadingRealization,
    num_subcarriers: int,
    block_index: int = 0,
) -> ChannelBlock:
    """Sum of per-cluster rank-one terms on every subcarrier."""
    taps = np.asarray(fading.taps)
    if taps.shape != clusters.tap_power.shape:
        raise ConfigurationError(
            f"fading taps {taps.shape} do not match clusters {clusters.tap_power.shape}"
        )
    gains = taps_to_subcarrier_gains(taps, num_subcarriers)  # (K, S)
    H = np.zeros((num_subcarriers, rx_geom.num_antennas, tx_geom.num_antennas), dtype=complex)
    for i in range(clusters.num_paths):
        a_r = array_response(rx_geom, clusters.aoa_rad[i])
        a_t = array_response(tx_geom, clusters.aod_rad[i])
        H += gains[i][:, None, None] * np.outer(a_r, a_t)
    return ChannelBlock(block_index=block_index, per_subcarrier=H, clusters=clusters, fading=fading)


def steering_matrices(
    rx_geom: ArrayGeometry, tx_geom: ArrayGeometry, clusters: ClusterSet
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the array responses of all paths column-wise: ``(A_r, A_t)``.

    With these, ``H[nu] = A_r @ diag(abar[:, nu]) @ A_t.T``.
    """
    A_r = array_response(rx_geom, clusters.aoa_rad).reshape(rx_geom.num_antennas, -1)
    A_t = array_response(tx_geom, clusters.aod_rad).reshape(tx_geom.num_antennas, -1)
    return A_r, A_t
