"""Software renderer producing aligned RGB, depth and instance planes."""

from .codecs import (
    decode_depth,
    decode_instance,
    encode_depth,
    encode_depth_mm,
    encode_instance,
)
from .light import LightModel, derive_light_model
from .render import FrameBundle, render, shadow

encode_instance_png = encode_instance

__all__ = [
    "FrameBundle",
    "LightModel",
    "decode_depth",
    "decode_instance",
    "derive_light_model",
    "encode_depth",
    "encode_depth_mm",
    "encode_instance",
    "encode_instance_png",
    "render",
    "shadow",
]
