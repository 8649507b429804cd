"""SVD precoding, water-filling and the two combining stages.

All routines accept stacks of matrices (leading axes, typically the
subcarrier axis) and operate on the last two axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateChannelError

__all__ = [
    "Precoder",
    "truncated_svd",
    "left_singular_basis",
    "water_fill",
    "design_precoder",
    "design_first_stage",
    "design_second_stage_first_block",
    "design_second_stage",
    "hbf_phase_proxy",
]


@dataclass(frozen=True)
class Precoder:
    """Precoding matrix ``F`` (..., N_t, N_s) and its per-stream powers."""

    matrix: np.ndarray
    power: np.ndarray
    power_budget: float


def _hermitian(A):
    return np.swapaxes(A.conj(), -1, -2)


def _svd(M: np.ndarray, full_matrices: bool):
    """SVD with a fixed phase convention.

    The largest-magnitude entry of each right singular vector is made real
    nonnegative; the matching left vector is rotated by the same phase so the
    product is unchanged.
    """
    M = np.asarray(M)
    U, s, Vh = np.linalg.svd(M, full_matrices=full_matrices)
    r = s.shape[-1]
    V = _hermitian(Vh)[..., :, :r]
    idx = np.argmax(np.abs(V), axis=-2)[..., None, :]
    pivot = np.take_along_axis(V, idx, axis=-2)
    rot = np.exp(-1j * np.angle(pivot))
    V = V * rot
    U = U.astype(complex, copy=True)
    U[..., :, :r] *= rot
    return U, s, V


def truncated_svd(M, k: int):
    """Leading ``k`` singular triplets ``(U_k, s_k, V_k)``.

    Singular values are returned nonincreasing as a 1-D array (per stack
    element); ``U_k @ diag(s_k) @ V_k^H`` is the best rank-``k`` approximation.
    """
    M = np.asarray(M)
    if not 0 <= k <= min(M.shape[-2:]):
        raise ConfigurationError(f"k={k} out of range for a {M.shape[-2:]} matrix")
    U, s, V = _svd(M, full_matrices=False)
    return U[..., :k], s[..., :k], V[..., :k]


def left_singular_basis(M, k: int) -> np.ndarray:
    """First ``k`` columns of the full left singular matrix of ``M``.

    ``k`` may exceed the rank; the extra columns then come from the
    orthonormal completion returned by the decomposition.
    """
    M = np.asarray(M)
    if not 0 <= k <= M.shape[-2]:
        raise ConfigurationError(f"k={k} exceeds the {M.shape[-2]} rows of the matrix")
    U, _, _ = _svd(M, full_matrices=True)
    return U[..., :k]


def water_fill(gains, budget: float) -> np.ndarray:
    """Water-filling power allocation.

    Maximises ``sum_i log2(1 + g_i P_i)`` subject to ``sum_i P_i = budget``
    and ``P_i >= 0``; the solution is ``P_i = max(mu - 1/g_i, 0)``.

    Parameters
    ----------
    gains : array_like, shape (..., n)
        Channel gains over unit noise (squared singular values). Entries equal
        to zero receive no power.
    budget : float
        Total power, positive.

    Returns
    -------
    ndarray, shape (..., n)
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim == 0 or g.shape[-1] == 0:
        raise ConfigurationError("water_fill needs at least one gain")
    if not budget > 0:
        raise ConfigurationError("budget must be positive")
    if np.any(g < 0):
        raise ConfigurationError("gains must be nonnegative")
    if np.any(np.all(g == 0, axis=-1)):
        raise DegenerateChannelError("all gains are zero")

    n = g.shape[-1]
    order = np.argsort(-g, axis=-1, kind="stable")
    g_sorted = np.take_along_axis(g, order, axis=-1)
    with np.errstate(divide="ignore"):
        inv = 1.0 / g_sorted
    # mu_k: water level if the k strongest streams are active
    mu = (budget + np.cumsum(inv, axis=-1)) / np.arange(1, n + 1)
    num_active = np.sum(mu > inv, axis=-1, keepdims=True)
    level = np.take_along_axis(mu, num_active - 1, axis=-1)
    p_sorted = np.maximum(level - inv, 0.0)
    p = np.empty_like(p_sorted)
    np.put_along_axis(p, order, p_sorted, axis=-1)
    return p


def design_precoder(estimate, num_streams: int, power_budget: float) -> Precoder:
    """``F = V_(:, N_s) diag(sqrt(P_1), ..., sqrt(P_Ns))`` from the estimate's SVD."""
    estimate = np.asarray(estimate)
    if num_streams > min(estimate.shape[-2:]):
        raise ConfigurationError(
            f"{num_streams} streams exceed the dimensions {estimate.shape[-2:]} of the estimate"
        )
    _, s, V = truncated_svd(estimate, num_streams)
    gains = s**2
    if np.any(np.all(gains == 0, axis=-1)):
        raise DegenerateChannelError("estimate has no nonzero singular value")
    power = water_fill(gains, power_budget)
    F = V * np.sqrt(power)[..., None, :]
    return Precoder(matrix=F, power=power, power_budget=float(power_budget))


def design_first_stage(precoded_estimate, num_combined: int) -> np.ndarray:
    """``Q[nu]``: first ``N_c`` left singular vectors of ``B_hat[nu]``.

    Returns an array of shape (..., N_r, N_c) with orthonormal columns.
    """
    B = np.asarray(precoded_estimate)
    if not 1 <= num_combined <= B.shape[-2]:
        raise ConfigurationError(f"N_c={num_combined} outside 1..N_r={B.shape[-2]}")
    return left_singular_basis(B, num_combined)


def design_second_stage_first_block(num_combined: int, num_streams: int) -> np.ndarray:
    """Identity-like ``N_c x N_s`` combiner used right after ``Q`` is chosen."""
    if num_streams > num_combined:
        raise ConfigurationError("N_s must not exceed N_c")
    return np.eye(num_combined, num_streams, dtype=complex)


def design_second_stage(effective_estimate, num_streams: int) -> np.ndarray:
    """``W = U_D(:, N_s)`` from the SVD of the precoded effective estimate."""
    D = np.asarray(effective_estimate)
    if num_streams > D.shape[-2]:
        raise ConfigurationError("N_s must not exceed N_c")
    return left_singular_basis(D, num_streams)


def hbf_phase_proxy(precoded_estimates, num_combined: int) -> np.ndarray:
    """Frequency-flat constant-modulus stand-in for an analog combiner.

    The digital first-stage combiners ``Q[nu]`` are designed per subcarrier,
    each column is phase-aligned to its counterpart on subcarrier 0 (the SVD
    leaves a per-subcarrier phase free), the result is averaged over
    subcarriers and every entry is replaced by ``exp(j angle) / sqrt(N_r)``.
    Columns are not orthonormalised.

    Parameters
    ----------
    precoded_estimates : ndarray, shape (..., S, N_r, N_s)
    num_combined : int

    Returns
    -------
    ndarray, shape (..., N_r, N_c)
    """
    B = np.asarray(precoded_estimates)
    if B.ndim == 2:
        B = B[None]
    Q = design_first_stage(B, num_combined)
    ref = Q[..., :1, :, :]
    overlap = np.sum(ref.conj() * Q, axis=-2, keepdims=True)  # (..., S, 1, N_c)
    align = np.where(np.abs(overlap) > 0, np.exp(-1j * np.angle(overlap)), 1.0)
    mean = np.mean(Q * align, axis=-3)
    n_r = B.shape[-2]
    return np.exp(1j * np.angle(mean)) / np.sqrt(n_r)
