"""Bundled scenario files and their patch textures."""

from pathlib import Path

SCENARIO_DIR = Path(__file__).resolve().parent
