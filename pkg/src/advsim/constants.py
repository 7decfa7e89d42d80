"""Every tunable rendering coefficient in one place.

None of these are measured quantities; they are the simulator's chosen
mapping from weather parameters to pixels and are copied into each run
manifest so a dataset records the exact model that produced it.
"""

FAR_M = 1000.0
NEAR_M = 0.05
SHADOW_EPS_M = 1e-3

# lighting
AMBIENT_BASE = 0.25
AMBIENT_CLOUD = 0.15
DIFFUSE_MAX = 0.7
DIFFUSE_CLOUD_ATTENUATION = 0.6
LIGHT_HEADROOM = 1.2

# fog: extinction per metre at fog_density = 100
FOG_BETA_MAX = 0.03
FOG_COLOR_CLEAR = (200.0, 200.0, 200.0)
FOG_COLOR_OVERCAST = (110.0, 110.0, 115.0)

# sky: mixes toward overcast gray with cloudiness, dims below 15 deg sun altitude
SKY_COLOR_CLEAR = (135.0, 180.0, 235.0)
SKY_COLOR_OVERCAST = (150.0, 150.0, 155.0)
SKY_MIN_BRIGHTNESS = 0.3
SKY_FULL_BRIGHTNESS_ALTITUDE = 15.0

# wet ground darkening at wetness = 100
WETNESS_DARKENING = 0.4

# rain streaks: round(precipitation * RAIN_STREAKS_PER_PERCENT) per tile
RAIN_TILE_PX = 100
RAIN_STREAKS_PER_PERCENT = 3.0
RAIN_STREAK_LENGTH_PX = (6.0, 14.0)
RAIN_STREAK_SLANT = 0.15
RAIN_COLOR = (210.0, 215.0, 225.0)
RAIN_ALPHA = 0.35

# placeholder chroma key
PLACEHOLDER_GREEN = (0, 255, 0)


def as_dict() -> dict:
    return {k: v for k, v in globals().items() if k.isupper()}
