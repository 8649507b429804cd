"""Two-stage fully digital combining for wideband mmWave point-to-point MIMO."""

from .beamforming import (
    design_first_stage,
    design_precoder,
    design_second_stage,
    design_second_stage_first_block,
    hbf_phase_proxy,
    truncated_svd,
    water_fill,
)
from .channel import ArrayGeometry, ClusterSet, array_response, assemble_channel, draw_fading, steering_matrices
from .config import ScenarioConfig, parse_config
from .rates import overhead_factor, se_perfect_csi_subcarrier, se_uatf_subcarrier
from .scenario import Method, run_se_vs_snr, run_se_vs_time, run_window

__version__ = "0.1.0"
