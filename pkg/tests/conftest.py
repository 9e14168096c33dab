"""Shared fixtures: lazily computed, session-cached preset runs."""

import time

import pytest

from qspindyn.scenarios_cli import preset_config, simulate_scenario


class PresetCache:
    """Compute each preset at its default parameters at most once."""

    def __init__(self):
        self._results = {}
        self.timings = {}

    def __call__(self, name: str):
        if name not in self._results:
            t0 = time.monotonic()
            self._results[name] = simulate_scenario(preset_config(name))
            self.timings[name] = time.monotonic() - t0
        return self._results[name]


@pytest.fixture(scope="session")
def presets():
    return PresetCache()
