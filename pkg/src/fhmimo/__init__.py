"""Frequency-hopping MIMO radar with embedded communication.

Link level simulator and algorithm library: ordered hopping waveforms, the
single-receiver downlink channel with sub-sample timing offset, hop rotation
and channel estimators built on pilot tone ratios, PSK/combination
demodulation, scatter-path extensions, and the radar receive chain.
"""

from .channel import (
    ChannelConfig,
    InterfererSpec,
    SampledFrame,
    draw_interferer,
    draw_los_channel,
    draw_rician_channel,
    draw_timing_offset,
    snr_to_noise,
    synth_rx,
)
from .chanest import ChannelEstimate, estimate_channel
from .comms import (
    DemodReference,
    DemodResult,
    FhcsCodebook,
    bits_per_hop,
    demod_frame,
    gross_rate,
    modulate_frame,
    net_rate,
    pack_bits,
    psk_phases,
    psk_words,
    reconstruct_hop,
    resolve_ambiguity,
    unpack_bits,
)
from .config import RadarConfig, load_ini, radar_from_mapping
from .errors import ConfigError, EstimationError, FhmimoError
from .frameio import dump_frame, load_frame
from .harness import (
    SweepSpec,
    ebn0_offset_db,
    run_mse_beta,
    run_mse_omega,
    run_mse_u,
    run_rate,
    run_ser,
    trial_rng,
    write_csv,
)
from .multipath import CompositeEstimate, estimate_rho, normalize
from .pipeline import EstimationReport, estimate_frame, estimate_pilot
from .rx_frontend import detect_and_pair, hop_dft
from .radar import (
    SPEED_OF_LIGHT,
    Detection,
    TargetScene,
    angle_transform,
    ca_cfar,
    detect_targets,
    group_detections,
    matched_filter_bank,
    parse_scene,
    synth_echo,
)
from .seqdesign import (
    KappaProfile,
    corollary_crossover,
    design_cae,
    design_cre,
    design_sequence,
    design_suboptimal,
    kappa_profile,
    mselb_cae,
    mselb_cre,
)
from .timing import (
    cae,
    cre,
    default_gate,
    eta_candidates,
    ratio_chain,
    select_estimator,
    wrap_angle,
)
from .waveform import (
    HopSchedule,
    ambiguity_function,
    frame_schedule,
    order_schedule,
    probe_safe_subbands,
    random_schedule,
    synth_baseband,
)

__version__ = "0.1.0"
