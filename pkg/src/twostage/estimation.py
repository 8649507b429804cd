"""Orthonormal pilots and maximum-likelihood (least-squares) estimation.

Every pilot phase of the two-stage receiver has the same structure::

    Y = sqrt(power_scale) * M @ Phi + N,   N_ij ~ CN(0, 1)
    M_hat = Y @ pinv(Phi) / sqrt(power_scale)

and differs only in what ``M`` is (the transposed channel, the precoded
channel, the effective channel after the first-stage combiner, ...) and in
the power scaling. The phase wrappers below bind those choices.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "PilotPhase",
    "PilotMatrix",
    "EstimationResult",
    "make_pilot_matrix",
    "complex_normal",
    "simulate_pilot_rx",
    "ml_estimate",
    "estimate_uplink_full",
    "estimate_downlink_precoded",
    "estimate_uplink_effective",
    "estimate_downlink_effective",
]


class PilotPhase(enum.Enum):
    UPLINK_FULL = "uplink_full"
    DOWNLINK_PRECODED = "downlink_precoded"
    UPLINK_EFFECTIVE = "uplink_effective"
    DOWNLINK_EFFECTIVE = "downlink_effective"


@dataclass(frozen=True, eq=False)
class PilotMatrix:
    entries: np.ndarray  # (rows, length)
    role: PilotPhase | None = None

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def length(self) -> int:
        return self.entries.shape[1]

    @cached_property
    def pseudo_inverse(self) -> np.ndarray:
        """``Phi^H (Phi Phi^H)^{-1}``, the right inverse of a full-row-rank pilot."""
        phi = self.entries
        gram = phi @ phi.conj().T
        return np.linalg.solve(gram, phi).conj().T


@dataclass(frozen=True)
class EstimationResult:
    estimate: np.ndarray
    phase: PilotPhase | None
    pilot_power: float
    pilot_length: int


def make_pilot_matrix(rows: int, length: int, role: PilotPhase | None = None) -> PilotMatrix:
    """First ``rows`` rows of the unitary ``length``-point DFT matrix."""
    if rows < 1 or rows > length:
        raise ConfigurationError(f"need 1 <= rows <= length, got rows={rows}, length={length}")
    k = np.arange(rows)[:, None]
    n = np.arange(length)[None, :]
    entries = np.exp(-2j * np.pi * k * n / length) / np.sqrt(length)
    return PilotMatrix(entries=entries, role=role)


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def simulate_pilot_rx(
    M: np.ndarray,
    pilots: PilotMatrix,
    power_scale: float,
    rng: np.random.Generator | None = None,
    combiner: np.ndarray | None = None,
) -> np.ndarray:
    """Received pilot block ``sqrt(power_scale) M Phi + noise``.

    Parameters
    ----------
    M : ndarray, shape (..., m, r)
        Matrix seen by the pilots; ``r`` must equal the pilot row count.
    pilots : PilotMatrix
    power_scale : float
    rng : Generator or None
        Noise source. ``None`` gives a noiseless observation.
    combiner : ndarray, shape (..., n, m), optional
        When given, the noise is drawn on ``n`` antennas and passed through
        ``combiner^H`` (processed noise after a first-stage combiner);
        otherwise it is white with unit variance.
    """
    M = np.asarray(M)
    if M.shape[-1] != pilots.rows:
        raise ConfigurationError(
            f"matrix has {M.shape[-1]} columns but the pilot has {pilots.rows} rows"
        )
    if not power_scale > 0:
        raise ConfigurationError("power_scale must be positive")
    Y = np.sqrt(power_scale) * (M @ pilots.entries)
    if rng is None:
        return Y
    if combiner is None:
        return Y + complex_normal(rng, Y.shape)
    combiner = np.asarray(combiner)
    if combiner.shape[-1] != M.shape[-2]:
        raise ConfigurationError("combiner columns must match the rows of M")
    noise_shape = np.broadcast_shapes(combiner.shape[:-2], M.shape[:-2]) + (
        combiner.shape[-2],
        pilots.length,
    )
    raw = complex_normal(rng, noise_shape)
    return Y + np.swapaxes(combiner.conj(), -1, -2) @ raw


def ml_estimate(
    Y: np.ndarray,
    pilots: PilotMatrix,
    power_scale: float,
    phase: PilotPhase | None = None,
) -> EstimationResult:
    """``M_hat = Y pinv(Phi) / sqrt(power_scale)``."""
    Y = np.asarray(Y)
    if Y.shape[-1] != pilots.length:
        raise ConfigurationError(
            f"observation has {Y.shape[-1]} columns, pilot length is {pilots.length}"
        )
    if not power_scale > 0:
        raise ConfigurationError("power_scale must be positive")
    estimate = Y @ pilots.pseudo_inverse / np.sqrt(power_scale)
    return EstimationResult(
        estimate=estimate,
        phase=phase if phase is not None else pilots.role,
        pilot_power=float(power_scale),
        pilot_length=pilots.length,
    )


def _transpose(A: np.ndarray) -> np.ndarray:
    return np.swapaxes(A, -1, -2)


def estimate_uplink_full(H, pilot_power: float, pilot_length: int, rng=None) -> EstimationResult:
    """Estimate the full channel ``H`` (..., N_r, N_t) from UE uplink pilots.

    The UE sends ``sqrt(t_p) Phi`` from all ``N_r`` antennas; the BS observes
    ``sqrt(P_r t_p) H^T Phi + N``. The returned estimate is ``H_hat``, not its
    transpose.
    """
    H = np.asarray(H)
    pilots = make_pilot_matrix(H.shape[-2], pilot_length, PilotPhase.UPLINK_FULL)
    scale = pilot_power * pilot_length
    Y = simulate_pilot_rx(_transpose(H), pilots, scale, rng)
    res = ml_estimate(Y, pilots, scale)
    return EstimationResult(_transpose(res.estimate), res.phase, scale, pilot_length)


def estimate_downlink_precoded(B, rng=None) -> EstimationResult:
    """Estimate the precoded channel ``B = H F`` (..., N_r, N_s) at the UE.

    The BS sends a square unitary ``N_s x N_s`` pilot through the precoder with
    power scaling ``N_s``.
    """
    B = np.asarray(B)
    n_s = B.shape[-1]
    pilots = make_pilot_matrix(n_s, n_s, PilotPhase.DOWNLINK_PRECODED)
    Y = simulate_pilot_rx(B, pilots, n_s, rng)
    return ml_estimate(Y, pilots, n_s)


def estimate_uplink_effective(G, pilot_power: float, pilot_length: int, rng=None) -> EstimationResult:
    """Estimate the effective channel ``G = Q^H H`` (..., N_c, N_t) at the BS."""
    G = np.asarray(G)
    pilots = make_pilot_matrix(G.shape[-2], pilot_length, PilotPhase.UPLINK_EFFECTIVE)
    scale = pilot_power * pilot_length
    Y = simulate_pilot_rx(_transpose(G), pilots, scale, rng)
    res = ml_estimate(Y, pilots, scale)
    return EstimationResult(_transpose(res.estimate), res.phase, scale, pilot_length)


def estimate_downlink_effective(D, rng=None, first_stage=None) -> EstimationResult:
    """Estimate the precoded effective channel ``D = Q^H H F`` (..., N_c, N_s).

    The physical noise is ``Q^H n``. With ``first_stage=None`` it is drawn
    directly as white noise, which has the same distribution whenever ``Q``
    has orthonormal columns. Pass ``first_stage=Q`` to draw ``n`` on the
    ``N_r`` antennas and project it (required for non-orthonormal ``Q``).
    """
    D = np.asarray(D)
    n_s = D.shape[-1]
    pilots = make_pilot_matrix(n_s, n_s, PilotPhase.DOWNLINK_EFFECTIVE)
    Y = simulate_pilot_rx(D, pilots, n_s, rng, combiner=first_stage)
    return ml_estimate(Y, pilots, n_s)
