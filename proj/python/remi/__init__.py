"""Fixed-weight reservoir LFO and arpeggiator engine."""

from ._remi import (
    CapacityError,
    ContractError,
    EngineFault,
    InvalidArgument,
    InvalidConfig,
    Network,
    NetworkConfig,
    PcaResult,
    Scales,
    arp_network_config,
    arp_to_smf,
    dominant_period,
    estimate_spectral_radius,
    lfo_network_config,
    max_beta,
    pca_project,
    render_arp,
    render_lfo,
    replay_session_log,
    schema_version,
    softmax_confidence,
    value_to_cc,
)

__all__ = [
    "CapacityError",
    "ContractError",
    "EngineFault",
    "InvalidArgument",
    "InvalidConfig",
    "Network",
    "NetworkConfig",
    "PcaResult",
    "Scales",
    "arp_network_config",
    "arp_to_smf",
    "dominant_period",
    "estimate_spectral_radius",
    "lfo_network_config",
    "max_beta",
    "pca_project",
    "render_arp",
    "render_lfo",
    "replay_session_log",
    "schema_version",
    "softmax_confidence",
    "value_to_cc",
]
