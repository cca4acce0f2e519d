"""Rotation-compensating video stabilization.

Frames are float32 numpy arrays in [0, 1], shaped HxW (gray) or HxWxC.
Rotations are 3x3 numpy arrays; axis-angle vectors have length 3.
"""

from ._amc import (
    ConfigError,
    DataError,
    DegenerateTemplateError,
    Error,
    FovExceededError,
    InsufficientOverlapError,
    Intrinsics,
    NearAntipodalError,
    Pipeline,
    SourceImage,
    delta_i_rms,
    exp_so3,
    geodesic_distance,
    intrinsics_from_fov,
    log_so3,
    make_source,
    metrics,
    normal_flow_rms,
    read_png,
    render_view,
    rgb_to_gray,
    sharpness,
    stabilize,
    synth,
    track,
    track_dataset,
    trajectory_preset,
    trajectory_preset_names,
    write_png,
)

__all__ = [name for name in dir() if not name.startswith("_")]
