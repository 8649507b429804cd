"""Mobile-UE scenario, block-by-block beamformer updates and experiments.

A trial follows one UE along its trajectory. Time is split into beam
coherence windows of ``blocks_per_window`` channel coherence blocks; the
cluster geometry (angles, path loss) is recomputed per window and the
small-scale fading is redrawn per block.

Per block, every requested method designs its precoder ``F``, first-stage
combiner ``Q`` and second-stage combiner ``W``:

ideal_dbf
    true channel, ``Q`` redesigned every block, genie rate.
proposed_updated_q
    estimated channel, the first-block procedure (full uplink estimate,
    ``Q`` from the precoded estimate, identity-like ``W``) every block.
proposed_fixed_q
    the two-stage procedure: ``Q`` designed in the first block of the window
    and kept; later blocks estimate only the compressed channel and update
    ``F`` and ``W``.
fixed_q_and_w
    ``Q`` and ``W`` frozen at the first block of the trajectory; only ``F``
    follows the channel.
hbf_proxy
    frequency-flat constant-modulus ``Q`` fixed per window (see
    :func:`~twostage.beamforming.hbf_phase_proxy`), ``F`` and ``W`` updated
    as in the two-stage procedure.

The UatF bound treats the first block of a window and the later blocks
separately, since their combiners follow different design rules; moments
are pooled over trials within each rule.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import beamforming as bf
from . import estimation as est
from .channel import ClusterSet, assemble_channel, draw_fading, make_cluster_set
from .config import ScenarioConfig
from .errors import DomainError
from .rates import (
    collect_effective_channel,
    se_perfect_csi_subcarrier,
    se_uatf_subcarrier,
    uatf_statistics_from_moments,
)
from .results import SeRecord, ci95_half_width

__all__ = [
    "Method",
    "Experiment",
    "WindowGeometry",
    "BlockRecord",
    "WindowResult",
    "ExperimentResult",
    "ue_position",
    "pathloss_db",
    "place_clusters",
    "angles_from_geometry",
    "window_geometry",
    "trial_rng",
    "run_window",
    "run_se_vs_time",
    "run_se_vs_snr",
    "experiment_se_vs_time",
    "experiment_se_vs_snr",
]

# Both ULAs lie along the y-axis; the BS faces +x, the UE faces the BS (-x).
BS_BROADSIDE = np.array([1.0, 0.0])
UE_BROADSIDE = np.array([-1.0, 0.0])
ARRAY_AXIS = np.array([0.0, 1.0])


class Method(str, enum.Enum):
    IDEAL_DBF = "ideal_dbf"
    PROPOSED_UPDATED_Q = "proposed_updated_q"
    PROPOSED_FIXED_Q = "proposed_fixed_q"
    FIXED_Q_AND_W = "fixed_q_and_w"
    HBF_PROXY = "hbf_proxy"


class Experiment(str, enum.Enum):
    SE_VS_TIME = "se_vs_time"
    SE_VS_SNR = "se_vs_snr"


TIME_METHODS = (
    Method.IDEAL_DBF,
    Method.PROPOSED_UPDATED_Q,
    Method.PROPOSED_FIXED_Q,
    Method.FIXED_Q_AND_W,
    Method.HBF_PROXY,
)
SNR_METHODS = (Method.IDEAL_DBF, Method.PROPOSED_FIXED_Q, Method.HBF_PROXY)
# methods reported with the genie rate; the rest use the UatF bound
GENIE_METHODS = frozenset({Method.IDEAL_DBF})


# --------------------------------------------------------------------------
# geometry


def ue_position(t_seconds: float, cfg: ScenarioConfig) -> np.ndarray:
    """Straight motion along +y from ``cfg.ue_start`` at ``cfg.speed_mps``."""
    if t_seconds < 0:
        raise DomainError("time must be nonnegative")
    return np.asarray(cfg.ue_start, dtype=float) + np.array([0.0, cfg.speed_mps * t_seconds])


def pathloss_db(distance_m: float, f_c_GHz: float) -> float:
    """Urban-macro LOS path loss below the breakpoint, no shadow fading.

    ``PL = 28 + 22 log10(d) + 20 log10(f_c / 1 GHz)``, with the 2-D distance
    standing in for the 3-D distance.
    """
    if distance_m < 1.0:
        raise DomainError(f"distance {distance_m} m is below the 1 m model limit")
    return 28.0 + 22.0 * np.log10(distance_m) + 20.0 * np.log10(f_c_GHz)


def _broadside_angle(origin, target, broadside) -> float:
    d = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
    if not np.any(d):
        raise DomainError("coincident points have no direction")
    return float(np.arctan2(d @ ARRAY_AXIS, d @ broadside))


def angles_from_geometry(bs_pos, ue_pos, scatterer=None) -> tuple[float, float]:
    """``(AoD, AoA)`` from broadside of the BS and UE arrays.

    With ``scatterer=None`` the direct BS-UE path is used. Directions behind
    either array raise :class:`DomainError`.
    """
    via_bs = ue_pos if scatterer is None else scatterer
    via_ue = bs_pos if scatterer is None else scatterer
    aod = _broadside_angle(bs_pos, via_bs, BS_BROADSIDE)
    aoa = _broadside_angle(ue_pos, via_ue, UE_BROADSIDE)
    if abs(aod) >= np.pi / 2 or abs(aoa) >= np.pi / 2:
        raise DomainError("path leaves or arrives through the back of an array")
    return aod, aoa


def _in_front(point, bs_pos, ue_positions) -> bool:
    try:
        for ue in ue_positions:
            angles_from_geometry(bs_pos, ue, point)
    except DomainError:
        return False
    return True


def place_clusters(
    rng: np.random.Generator,
    bs_pos,
    ue_pos,
    num_clusters: int,
    margin: float = 10.0,
    accept: Callable[[np.ndarray], bool] | None = None,
    max_draws: int = 10_000,
) -> np.ndarray:
    """Uniform scatterer positions in the BS-UE bounding box grown by ``margin``.

    ``ue_pos`` may be a single position or an array of positions (a whole
    trajectory); the box then covers all of them. Points failing ``accept``
    are redrawn.

    Returns
    -------
    ndarray, shape (num_clusters, 2)
    """
    pts = np.vstack([np.asarray(bs_pos, dtype=float), np.atleast_2d(np.asarray(ue_pos, dtype=float))])
    lo = pts.min(axis=0) - margin
    hi = pts.max(axis=0) + margin
    out = np.empty((num_clusters, 2))
    for k in range(num_clusters):
        for _ in range(max_draws):
            p = rng.uniform(lo, hi)
            if accept is None or accept(p):
                break
        else:
            raise DomainError("could not place a scatterer in front of both arrays")
        out[k] = p
    return out


@dataclass(frozen=True)
class WindowGeometry:
    clusters: ClusterSet
    ue_position: np.ndarray
    los_pathloss_db: float
    window_index: int = 0


def window_geometry(cfg: ScenarioConfig, ue_pos, cluster_positions, window_index: int = 0) -> WindowGeometry:
    """Angles and powers of all paths for a UE position.

    The LOS path carries ``beta_0`` from the path loss; every scattering
    cluster carries ``nlos_relative_power * beta_0`` spread over the taps.
    """
    bs = np.asarray(cfg.bs_position)
    ue = np.asarray(ue_pos, dtype=float)
    pl = pathloss_db(float(np.linalg.norm(ue - bs)), cfg.f_c_GHz)
    beta0 = 10 ** (-pl / 10)
    aod, aoa = [], []
    for p in np.reshape(cluster_positions, (-1, 2)):
        t, r = angles_from_geometry(bs, ue, p)
        aod.append(t)
        aoa.append(r)
    los = None
    if cfg.has_los:
        t, r = angles_from_geometry(bs, ue)
        los = (r, t, beta0)
    clusters = make_cluster_set(
        aoa, aod, [cfg.nlos_relative_power * beta0] * len(aod), cfg.L, cfg.tap_decay, los=los
    )
    return WindowGeometry(clusters, ue, float(pl), window_index)


def trial_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent stream for ``(seed, *key)``; depends on nothing else."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


# --------------------------------------------------------------------------
# one window of blocks


@dataclass
class BlockRecord:
    """Per-method outputs of one coherence block.

    ``genie_rate[m]`` has shape (S,), ``effective[m]`` is ``E = (QW)^H H F``
    of shape (S, N_s, N_s) and ``combiner[m]`` is ``Q W`` (S, N_r, N_s).
    """

    tau: int
    genie_rate: dict = field(default_factory=dict)
    effective: dict = field(default_factory=dict)
    combiner: dict = field(default_factory=dict)
    first_stage: dict = field(default_factory=dict)
    second_stage: dict = field(default_factory=dict)
    q_updated: dict = field(default_factory=dict)
    w_updated: dict = field(default_factory=dict)


@dataclass
class WindowResult:
    window_index: int
    per_block: list
    frozen: tuple | None = None  # (Q, W) of fixed_q_and_w


@dataclass
class _Design:
    F: np.ndarray
    Q: np.ndarray
    W: np.ndarray
    B_hat: np.ndarray | None = None


def _hermitian(A):
    return np.swapaxes(A.conj(), -1, -2)


def _full_estimation_design(H, cfg: ScenarioConfig, rng) -> _Design:
    """First-block procedure: H_hat -> F -> B_hat -> Q, identity-like W."""
    H_hat = est.estimate_uplink_full(H, cfg.P_r_linear, cfg.t_p, rng).estimate
    F = bf.design_precoder(H_hat, cfg.N_s, cfg.P_t_linear).matrix
    B_hat = est.estimate_downlink_precoded(H @ F, rng).estimate
    Q = bf.design_first_stage(B_hat, cfg.N_c)
    W = np.broadcast_to(bf.design_second_stage_first_block(cfg.N_c, cfg.N_s), H.shape[:-2] + (cfg.N_c, cfg.N_s))
    return _Design(F, Q, W, B_hat)


def _compressed_precoder(H, Q, cfg: ScenarioConfig, rng):
    """Uplink estimate of ``G = Q^H H`` and the precoder designed from it."""
    G = _hermitian(Q) @ H
    G_hat = est.estimate_uplink_effective(G, cfg.P_r_linear, cfg.t_p, rng).estimate
    F = bf.design_precoder(G_hat, cfg.N_s, cfg.P_t_linear).matrix
    return G, F


def _second_stage_from_pilots(G, F, Q, cfg: ScenarioConfig, rng, orthonormal_q: bool):
    D = G @ F
    D_hat = est.estimate_downlink_effective(D, rng, first_stage=None if orthonormal_q else Q).estimate
    return bf.design_second_stage(D_hat, cfg.N_s)


class _StackedGenerator:
    """Draws a batch by taking slice ``k`` of every array from generator ``k``.

    Each trial consumes its own stream exactly as it would if simulated
    alone, so batching does not change any trial's numbers.
    """

    def __init__(self, generators):
        self.generators = list(generators)

    def standard_normal(self, shape):
        if shape[0] != len(self.generators):
            raise ValueError("leading axis must match the number of generators")
        return np.stack([g.standard_normal(shape[1:]) for g in self.generators])


def run_window(
    cfg: ScenarioConfig,
    geometry,
    rng,
    methods: Sequence[Method] = (Method.PROPOSED_FIXED_Q,),
    frozen: tuple | None = None,
) -> WindowResult:
    """Simulate ``blocks_per_window`` blocks sharing one cluster geometry.

    The default runs only the two-stage procedure (``proposed_fixed_q``).
    For ``fixed_q_and_w``, ``frozen`` carries ``(Q, W)`` from an earlier
    window; when it is None they are frozen in this window's first block and
    returned in :attr:`WindowResult.frozen`.

    ``geometry`` and ``rng`` may also be equal-length sequences, one entry
    per independent trial; every array in the result then gains a leading
    trial axis.
    """
    batched = not isinstance(geometry, WindowGeometry)
    geometries = list(geometry) if batched else [geometry]
    gens = list(rng) if batched else [rng]
    if len(gens) != len(geometries):
        raise ValueError("need one generator per geometry")
    if frozen is not None and not batched:
        frozen = tuple(np.asarray(x)[None] for x in frozen)
    methods = [Method(m) for m in methods]
    noise = None if cfg.noiseless else _StackedGenerator(gens)
    rx, tx = cfg.rx_geometry, cfg.tx_geometry
    window_q: dict = {}
    blocks = []
    for tau in range(1, cfg.blocks_per_window + 1):
        H = np.stack(
            [
                assemble_channel(rx, tx, g.clusters, draw_fading(r, g.clusters), cfg.S, tau).per_subcarrier
                for g, r in zip(geometries, gens)
            ]
        )
        lead = H.shape[:-2]
        identity_w = np.broadcast_to(bf.design_second_stage_first_block(cfg.N_c, cfg.N_s), lead + (cfg.N_c, cfg.N_s))
        record = BlockRecord(tau=tau)
        full = None
        if any(m is not Method.IDEAL_DBF for m in methods) and (
            tau == 1 or Method.PROPOSED_UPDATED_Q in methods
        ):
            full = _full_estimation_design(H, cfg, noise)
        compressed: dict = {}  # shares one uplink estimate of Q^H H between methods

        def compressed_for(key, Q):
            if key not in compressed:
                compressed[key] = _compressed_precoder(H, Q, cfg, noise)
            return compressed[key]

        for m in methods:
            q_new = w_new = True
            if m is Method.IDEAL_DBF:
                F = bf.design_precoder(H, cfg.N_s, cfg.P_t_linear).matrix
                d = _Design(F, bf.design_first_stage(H @ F, cfg.N_c), identity_w)
            elif m is Method.PROPOSED_UPDATED_Q:
                d = full
            elif m is Method.PROPOSED_FIXED_Q:
                if tau == 1:
                    d = full
                    window_q[m] = full.Q
                else:
                    Q = window_q[m]
                    G, F = compressed_for("window", Q)
                    W = _second_stage_from_pilots(G, F, Q, cfg, noise, orthonormal_q=True)
                    d = _Design(F, Q, W)
                    q_new = False
            elif m is Method.FIXED_Q_AND_W:
                if frozen is None:
                    d = full
                    frozen = (full.Q, full.W)
                else:
                    Q, W = frozen
                    same = window_q.get(Method.PROPOSED_FIXED_Q) is Q
                    G, F = compressed_for("window" if same else "frozen", Q)
                    d = _Design(F, Q, W)
                    q_new = w_new = False
            elif m is Method.HBF_PROXY:
                if tau == 1:
                    Q = bf.hbf_phase_proxy(full.B_hat, cfg.N_c)
                    Q = np.broadcast_to(Q[..., None, :, :], lead + Q.shape[-2:])
                    window_q[m] = Q
                    d = _Design(full.F, Q, identity_w)
                else:
                    Q = window_q[m]
                    G, F = compressed_for("hbf", Q)
                    W = _second_stage_from_pilots(G, F, Q, cfg, noise, orthonormal_q=False)
                    d = _Design(F, Q, W)
                    q_new = False
            else:  # pragma: no cover
                raise ValueError(m)

            X = d.Q @ d.W
            record.genie_rate[m] = se_perfect_csi_subcarrier(H, d.F, d.Q, d.W)
            record.effective[m] = collect_effective_channel(X, H @ d.F)
            record.combiner[m] = X
            record.first_stage[m] = d.Q
            record.second_stage[m] = d.W
            record.q_updated[m] = q_new
            record.w_updated[m] = w_new
        blocks.append(record)

    if not batched:
        for b in blocks:
            for name in ("genie_rate", "effective", "combiner", "first_stage", "second_stage"):
                table = getattr(b, name)
                for m in table:
                    table[m] = table[m][0]
        if frozen is not None:
            frozen = tuple(x[0] for x in frozen)
    return WindowResult(geometries[0].window_index, blocks, frozen)


# --------------------------------------------------------------------------
# Monte Carlo experiments


@dataclass
class _TrialOutput:
    """Per-trial reductions, leading axis = trial.

    The effective-channel sums are split by design rule: index 0 of the
    ``rule`` axis holds the first block of each window, index 1 the later
    blocks (absent when a window has a single block).
    """

    genie: np.ndarray  # (n, P, M): rho * mean over blocks and subcarriers
    sum_e: np.ndarray  # (n, P, M, rule, S, N_s, N_s)
    sum_eeh: np.ndarray
    sum_noise: np.ndarray


def _reduce_window(result: WindowResult, methods, rho: float):
    """Per-trial (genie, sum E, sum E E^H, sum X^H X) with the method axis at 1."""
    rules = [result.per_block[:1], result.per_block[1:]]
    rules = [r for r in rules if r]
    genie, se, seeh, sn = [], [], [], []
    for m in methods:
        rates = np.stack([b.genie_rate[m] for b in result.per_block], axis=1)  # (n, T, S)
        genie.append(rho * rates.mean(axis=(1, 2)))
        parts = ([], [], [])
        for blocks in rules:
            E = np.stack([b.effective[m] for b in blocks], axis=1)
            X = np.stack([b.combiner[m] for b in blocks], axis=1)
            parts[0].append(E.sum(axis=1))
            parts[1].append((E @ _hermitian(E)).sum(axis=1))
            parts[2].append((_hermitian(X) @ X).sum(axis=1))
        se.append(np.stack(parts[0], axis=1))
        seeh.append(np.stack(parts[1], axis=1))
        sn.append(np.stack(parts[2], axis=1))
    return tuple(np.stack(x, axis=1) for x in (genie, se, seeh, sn))


def _stack_sweep(parts) -> _TrialOutput:
    # parts: per sweep point, tuples of (n, M, ...) arrays -> (n, P, M, ...)
    return _TrialOutput(*(np.stack(x, axis=1) for x in zip(*parts)))


def _time_trials(cfg: ScenarioConfig, trials) -> _TrialOutput:
    exp = _EXP_ID[Experiment.SE_VS_TIME]
    bs = np.asarray(cfg.bs_position)
    path = np.array([ue_position(t, cfg) for t in cfg.time_grid])
    scatterers = [
        place_clusters(
            trial_rng(cfg.seed, exp, trial), bs, path, cfg.N_cl, cfg.cluster_margin_m,
            accept=lambda p: _in_front(p, bs, path),
        )
        for trial in trials
    ]
    frozen = None
    parts = []
    for w, ue in enumerate(path):
        geoms = [window_geometry(cfg, ue, sc, w) for sc in scatterers]
        rngs = [trial_rng(cfg.seed, exp, trial, w) for trial in trials]
        result = run_window(cfg, geoms, rngs, TIME_METHODS, frozen)
        frozen = result.frozen
        parts.append(_reduce_window(result, TIME_METHODS, cfg.rho))
    return _stack_sweep(parts)


def _snr_trials(cfg: ScenarioConfig, trials) -> _TrialOutput:
    exp = _EXP_ID[Experiment.SE_VS_SNR]
    bs = np.asarray(cfg.bs_position)
    ue = ue_position(cfg.snr_time_s, cfg)
    geoms = [
        window_geometry(
            cfg,
            ue,
            place_clusters(
                trial_rng(cfg.seed, exp, trial), bs, ue, cfg.N_cl, cfg.cluster_margin_m,
                accept=lambda p: _in_front(p, bs, [ue]),
            ),
        )
        for trial in trials
    ]
    parts = []
    for k, p_t in enumerate(snr_to_transmit_power_dBm(cfg, geoms[0].los_pathloss_db)):
        rngs = [trial_rng(cfg.seed, exp, trial, k) for trial in trials]
        result = run_window(cfg.replace(P_t_dBm=float(p_t)), geoms, rngs, SNR_METHODS)
        parts.append(_reduce_window(result, SNR_METHODS, cfg.rho))
    return _stack_sweep(parts)


_EXP_ID = {Experiment.SE_VS_TIME: 1, Experiment.SE_VS_SNR: 2}

# trials simulated together through stacked linear algebra, capped so one
# stacked channel array stays near BATCH_BYTES
BATCH_SIZE = 50
BATCH_BYTES = 64 * 2**20


def _batch_size(cfg: ScenarioConfig) -> int:
    per_trial = cfg.S * cfg.N_r * cfg.N_t * 16
    return max(1, min(BATCH_SIZE, BATCH_BYTES // per_trial))


def snr_to_transmit_power_dBm(cfg: ScenarioConfig, los_pathloss_db: float) -> np.ndarray:
    """Transmit powers realizing the SNR grid; SNR = P_t - PL_LOS - noise (dB)."""
    return np.asarray(cfg.snr_grid_dB) + los_pathloss_db + cfg.noise_power_dBm


@dataclass
class ExperimentResult:
    """Reduced Monte Carlo output of one experiment.

    ``records`` are the reported curves (genie rate for ``ideal_dbf``, UatF
    bound otherwise). ``genie_records`` hold the genie rate of every method
    with its own beamformers, an upper reference for the UatF values.
    ``trial_values[(sweep_index, method)]`` are the per-trial samples behind
    each reported confidence interval (jackknife pseudo-values for UatF).
    """

    experiment: Experiment
    sweep_values: np.ndarray
    methods: tuple
    records: list
    genie_records: list
    trial_values: dict
    genie_trial_values: dict


# trials are pooled into this many groups for the jackknife of the UatF bound
JACKKNIFE_GROUPS = 20


def _rule_counts(cfg: ScenarioConfig) -> np.ndarray:
    """Blocks per trial under each design rule (first block, later blocks)."""
    T = cfg.blocks_per_window
    return np.array([1, T - 1]) if T > 1 else np.array([1])


def _uatf_curve(sums, trials: int, cfg: ScenarioConfig) -> np.ndarray:
    """Window-averaged UatF SE from summed moments (..., rule, S, N_s, N_s)."""
    counts = _rule_counts(cfg)
    rates = []
    for r, c in enumerate(counts):
        stats = uatf_statistics_from_moments(*(x[..., r, :, :, :] for x in sums), trials * c)
        rates.append(c * np.mean(se_uatf_subcarrier(stats), axis=-1))
    return cfg.rho * np.sum(rates, axis=0) / counts.sum()


class _Reducer:
    """Consumes per-trial outputs strictly in trial-index order.

    Genie rates are kept per trial. Effective-channel moments are summed into
    ``G = min(trials, JACKKNIFE_GROUPS)`` groups (trial ``t`` goes to group
    ``t % G``) so memory does not grow with the number of trials; the UatF
    interval is a delete-one-group jackknife over them.
    """

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        # leave-one-group-out samples need two trials; below three trials no interval is formed
        self.groups = min(cfg.trials, JACKKNIFE_GROUPS) if cfg.trials >= 3 else 1
        self.genie = None
        self.sums = None
        self.group_size = np.zeros(self.groups, dtype=int)
        self.next_trial = 0

    def add(self, trial: int, genie, sums) -> None:
        if trial != self.next_trial:
            raise RuntimeError("trials must be reduced in index order")
        if self.genie is None:
            self.genie = np.empty((self.cfg.trials,) + genie.shape)
            self.sums = [np.zeros((self.groups,) + x.shape, dtype=complex) for x in sums]
        g = trial % self.groups
        self.genie[trial] = genie
        for acc, x in zip(self.sums, sums):
            acc[g] += x
        self.group_size[g] += 1
        self.next_trial += 1

    def uatf(self):
        """Full-sample UatF curve (P, M) and group-jackknife pseudo-values (G, P, M)."""
        n, G = self.cfg.trials, self.groups
        total = [x.sum(axis=0) for x in self.sums]
        full = _uatf_curve(total, n, self.cfg)
        if G < 2:
            return full, full[None]
        loo = np.stack(
            [
                _uatf_curve([t - x[g] for t, x in zip(total, self.sums)], n - self.group_size[g], self.cfg)
                for g in range(G)
            ]
        )
        return full, G * full[None] - (G - 1) * loo


def _reduce(cfg, experiment, sweep_values, methods, reducer: _Reducer) -> ExperimentResult:
    n = cfg.trials
    uatf_full, pseudo = reducer.uatf()
    records, genie_records = [], []
    trial_values, genie_values = {}, {}
    for p, sweep in enumerate(sweep_values):
        for j, m in enumerate(methods):
            g = reducer.genie[:, p, j]
            genie_values[(p, m)] = g
            genie_records.append(
                SeRecord(experiment.value, float(sweep), m.value, float(np.mean(g)), n, ci95_half_width(g))
            )
            if m in GENIE_METHODS:
                values, mean = g, float(np.mean(g))
            else:
                values, mean = pseudo[:, p, j], float(uatf_full[p, j])
            trial_values[(p, m)] = values
            records.append(SeRecord(experiment.value, float(sweep), m.value, mean, n, ci95_half_width(values)))
    return ExperimentResult(
        experiment, np.asarray(sweep_values), tuple(methods), records, genie_records, trial_values, genie_values
    )


def _run_trials(cfg, batch_fn, trial_order) -> _Reducer:
    order = list(range(cfg.trials)) if trial_order is None else [int(t) for t in trial_order]
    if sorted(order) != list(range(cfg.trials)):
        raise ValueError("trial_order must be a permutation of range(trials)")
    reducer = _Reducer(cfg)
    pending = {}
    size = _batch_size(cfg)
    for start in range(0, len(order), size):
        batch = order[start : start + size]
        out = batch_fn(cfg, batch)
        for k, t in enumerate(batch):
            pending[t] = (out.genie[k], (out.sum_e[k], out.sum_eeh[k], out.sum_noise[k]))
        # reduce in trial-index order regardless of execution order
        while reducer.next_trial in pending:
            reducer.add(reducer.next_trial, *pending.pop(reducer.next_trial))
    return reducer


def run_se_vs_time(cfg: ScenarioConfig, trial_order=None) -> ExperimentResult:
    """Spectral efficiency along the trajectory, one point per window start."""
    out = _run_trials(cfg, _time_trials, trial_order)
    return _reduce(cfg, Experiment.SE_VS_TIME, cfg.time_grid, TIME_METHODS, out)


def run_se_vs_snr(cfg: ScenarioConfig, trial_order=None) -> ExperimentResult:
    """Spectral efficiency over the SNR grid at the UE position of ``snr_time_s``."""
    out = _run_trials(cfg, _snr_trials, trial_order)
    return _reduce(cfg, Experiment.SE_VS_SNR, cfg.snr_grid_dB, SNR_METHODS, out)


def experiment_se_vs_time(cfg: ScenarioConfig) -> list:
    return run_se_vs_time(cfg).records


def experiment_se_vs_snr(cfg: ScenarioConfig, snr_grid_dB=None) -> list:
    if snr_grid_dB is not None:
        cfg = cfg.replace(snr_grid_dB=tuple(snr_grid_dB))
    return run_se_vs_snr(cfg).records
