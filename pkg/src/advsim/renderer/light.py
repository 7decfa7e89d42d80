from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import constants as C
from ..config import WeatherConfig


@dataclass(frozen=True)
class LightModel:
    sun_dir: tuple[float, float, float]
    ambient: float
    diffuse: float
    fog_color: tuple[float, float, float]
    fog_beta: float
    fog_start: float
    sky_color: tuple[float, float, float]
    ground_albedo_scale: float = 1.0
    precipitation: float = 0.0

    def fog_weight(self, depth):
        """Fraction of fog colour mixed in at planar depth ``depth``."""
        d = np.maximum(0.0, np.asarray(depth, dtype=np.float64) - self.fog_start)
        return 1.0 - np.exp(-self.fog_beta * d)

    def sky_pixel(self) -> np.ndarray:
        w = float(self.fog_weight(C.FAR_M))
        return np.array(self.sky_color) * (1.0 - w) + np.array(self.fog_color) * w


def _mix(a, b, t):
    return tuple(float(x + (y - x) * t) for x, y in zip(a, b))


def derive_light_model(weather: WeatherConfig) -> LightModel:
    alt = math.radians(weather.sun_altitude_angle)
    az = math.radians(weather.sun_azimuth_angle)
    sun = (math.cos(alt) * math.cos(az), math.cos(alt) * math.sin(az), math.sin(alt))
    cloud = weather.cloudiness / 100.0
    ambient = C.AMBIENT_BASE + C.AMBIENT_CLOUD * cloud
    diffuse = C.DIFFUSE_MAX * max(0.0, math.sin(alt)) * (1.0 - C.DIFFUSE_CLOUD_ATTENUATION * cloud)
    diffuse = min(diffuse, max(0.0, C.LIGHT_HEADROOM - ambient))
    brightness = C.SKY_MIN_BRIGHTNESS + (1.0 - C.SKY_MIN_BRIGHTNESS) * min(
        1.0, max(0.0, weather.sun_altitude_angle / C.SKY_FULL_BRIGHTNESS_ALTITUDE)
    )
    sky = tuple(c * brightness for c in _mix(C.SKY_COLOR_CLEAR, C.SKY_COLOR_OVERCAST, cloud))
    return LightModel(
        sun_dir=sun,
        ambient=ambient,
        diffuse=diffuse,
        fog_color=_mix(C.FOG_COLOR_CLEAR, C.FOG_COLOR_OVERCAST, cloud),
        fog_beta=C.FOG_BETA_MAX * weather.fog_density / 100.0,
        fog_start=weather.fog_distance,
        sky_color=sky,
        ground_albedo_scale=1.0 - C.WETNESS_DARKENING * weather.wetness / 100.0,
        precipitation=weather.precipitation,
    )
