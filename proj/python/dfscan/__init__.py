"""Rotating-antenna RF direction-finding scanner."""

from ._dfscan import (
    AntennaPattern,
    CaptureRequest,
    ConfigError,
    Error,
    Heatmap,
    ScanPlan,
    Scene,
    TransportError,
    angle_to_steps,
    build_hop_plan,
    encode_move,
    estimate_duration,
    fspl,
    helix_axial_ratio,
    helix_gain_kraus,
    helix_hpbw_kraus,
    integrate_hops,
    load_scene,
    normalize_clip,
    pixel_order,
    read_csv,
    received_power,
    run_simulated_scan,
    steps_to_angle,
)

__all__ = [name for name in dir() if not name.startswith("_")]
