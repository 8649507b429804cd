"""Spectral efficiency with perfect CSI and the use-and-then-forget bound."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, RankDeficientError

__all__ = [
    "UatfStatistics",
    "UatfAccumulator",
    "log2det_gain",
    "se_perfect_csi_subcarrier",
    "overhead_factor",
    "average_se",
    "collect_effective_channel",
    "estimate_uatf_statistics",
    "uatf_statistics_from_moments",
    "se_uatf_subcarrier",
]


def _hermitian(A):
    return np.swapaxes(np.conj(A), -1, -2)


def log2det_gain(A, C=None) -> np.ndarray:
    """``log2 det(I + A^H C^{-1} A)`` for Hermitian positive definite ``C``.

    Uses Cholesky factorizations of ``C`` and of the inner matrix, which is
    Hermitian positive definite by construction. ``C=None`` means identity.
    """
    A = np.asarray(A)
    if C is None:
        X = A
    else:
        L = np.linalg.cholesky(np.asarray(C))
        X = np.linalg.solve(L, A)
    n = A.shape[-1]
    M = np.eye(n) + _hermitian(X) @ X
    M = 0.5 * (M + _hermitian(M))
    L_m = np.linalg.cholesky(M)
    diag = np.real(np.diagonal(L_m, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log2(diag), axis=-1)


def se_perfect_csi_subcarrier(H, F, Q, W) -> np.ndarray:
    """Genie-aided rate of one realization, bits/symbol.

    ``log2 det(I + X^+ H F F^H H^H (X^+)^H)`` with ``X = Q W``, where the
    processed noise ``X^+ n`` is accounted for by its covariance
    ``(X^H X)^{-1}``; for orthonormal ``X`` this is the identity. Evaluated as
    ``log2 det(I + (X^H X)^{-1} X^H H F F^H H^H X)``.
    """
    X = np.asarray(Q) @ np.asarray(W)
    s = np.linalg.svd(X, compute_uv=False)
    if np.any(s[..., -1] <= 1e-10 * np.maximum(s[..., 0], np.finfo(float).tiny)):
        raise RankDeficientError("combiner Q W does not have full column rank")
    signal = _hermitian(X) @ np.asarray(H) @ np.asarray(F)  # (..., N_s, N_s)
    gram = _hermitian(X) @ X
    # log det(I + gram^{-1} S S^H) = log det(I + S^H gram^{-1} S)
    return log2det_gain(signal, gram)


def overhead_factor(pilot_length: int, num_streams: int, coherence_length: int) -> float:
    """Fraction of the coherence block left for data, ``1 - (t_p + N_s)/t_c``."""
    if pilot_length + num_streams >= coherence_length:
        raise ConfigurationError(
            f"t_p + N_s = {pilot_length + num_streams} leaves no data symbols in t_c = {coherence_length}"
        )
    return 1.0 - (pilot_length + num_streams) / coherence_length


def average_se(per_subcarrier_rates, rho: float) -> float:
    rates = np.asarray(per_subcarrier_rates, dtype=float)
    if rates.size == 0:
        raise ConfigurationError("need at least one subcarrier")
    return float(rho * np.mean(rates))


def collect_effective_channel(W, D) -> np.ndarray:
    """``E = W^H D``: the channel seen after both combining stages."""
    W = np.asarray(W)
    D = np.asarray(D)
    if W.shape[-2] != D.shape[-2]:
        raise ConfigurationError(f"W {W.shape} and D {D.shape} do not share a row dimension")
    return _hermitian(W) @ D


@dataclass(frozen=True)
class UatfStatistics:
    """Mean effective channel and the covariance of everything else.

    ``noise_cov`` collects the fluctuation of the effective channel around its
    mean (unit-power independent symbols) and the combined receiver noise.
    """

    mean_effective: np.ndarray
    noise_cov: np.ndarray
    num_samples: int


def uatf_statistics_from_moments(sum_e, sum_eeh, sum_noise, count: int) -> UatfStatistics:
    """Statistics from running sums of ``E``, ``E E^H`` and ``X^H X``."""
    if count < 2:
        raise ConfigurationError("at least two samples are needed")
    mean = np.asarray(sum_e) / count
    cov = np.asarray(sum_eeh) / count - mean @ _hermitian(mean) + np.asarray(sum_noise) / count
    cov = 0.5 * (cov + _hermitian(cov))
    return UatfStatistics(mean_effective=mean, noise_cov=cov, num_samples=int(count))


class UatfAccumulator:
    """Mergeable running sums for :func:`uatf_statistics_from_moments`."""

    def __init__(self, shape):
        self.sum_e = np.zeros(shape, dtype=complex)
        self.sum_eeh = np.zeros(shape, dtype=complex)
        self.sum_noise = np.zeros(shape, dtype=complex)
        self.count = 0

    def add(self, effective, combiner) -> None:
        """Add one sample ``E = W^H D`` with total combiner ``X`` (``W`` or ``Q W``)."""
        E = np.asarray(effective)
        X = np.asarray(combiner)
        self.sum_e += E
        self.sum_eeh += E @ _hermitian(E)
        self.sum_noise += _hermitian(X) @ X
        self.count += 1

    def merge(self, other: "UatfAccumulator") -> "UatfAccumulator":
        out = UatfAccumulator(self.sum_e.shape)
        out.sum_e = self.sum_e + other.sum_e
        out.sum_eeh = self.sum_eeh + other.sum_eeh
        out.sum_noise = self.sum_noise + other.sum_noise
        out.count = self.count + other.count
        return out

    def statistics(self) -> UatfStatistics:
        return uatf_statistics_from_moments(self.sum_e, self.sum_eeh, self.sum_noise, self.count)


def estimate_uatf_statistics(effective, combiners) -> UatfStatistics:
    """UatF statistics from samples stacked along axis 0.

    Parameters
    ----------
    effective : array_like, shape (n, ..., N_s, N_s)
        Effective channels ``E = W^H D`` over fading realizations.
    combiners : array_like, shape (n, ..., N_x, N_s)
        Total combiner of each sample; ``W`` when ``Q`` has orthonormal
        columns (then ``W^H Q^H Q W = W^H W``), otherwise ``Q W``.
    """
    E = np.asarray(effective)
    X = np.asarray(combiners)
    if E.ndim < 3 or E.shape[0] < 2:
        raise ConfigurationError("at least two samples are needed")
    if X.shape[0] != E.shape[0]:
        raise ConfigurationError("one combiner per sample is required")
    return uatf_statistics_from_moments(
        E.sum(axis=0),
        (E @ _hermitian(E)).sum(axis=0),
        (_hermitian(X) @ X).sum(axis=0),
        E.shape[0],
    )


def se_uatf_subcarrier(stats: UatfStatistics) -> np.ndarray:
    """``log2 det(I + Ebar^H C^{-1} Ebar)``.

    If the smallest eigenvalue of ``C`` is below ``eps = 1e-10 trace(C)/N_s``,
    ``eps I`` is added before inversion.
    """
    C = np.asarray(stats.noise_cov)
    n = C.shape[-1]
    trace = np.real(np.trace(C, axis1=-2, axis2=-1))
    if np.any(trace <= 0):
        raise RankDeficientError("noise covariance has nonpositive trace")
    eps = 1e-10 * trace / n
    low = np.linalg.eigvalsh(C)[..., 0] < eps
    C = C + np.where(low, eps, 0.0)[..., None, None] * np.eye(n)
    try:
        return log2det_gain(stats.mean_effective, C)
    except np.linalg.LinAlgError as exc:
        raise RankDeficientError("noise covariance is singular") from exc
