"""Experiment harness: instance generators, composition, scenario runner."""

from .compose import compose_field
from .config import ScenarioConfig, parse_config
from .instances import (bump_mu, disk_coverage_mask, radial_stretch_mu,
                        random_bandlimited_field, random_conductivity)
from .scenarios import SCENARIOS, run_scenario

__all__ = [
    "compose_field",
    "ScenarioConfig",
    "parse_config",
    "bump_mu",
    "disk_coverage_mask",
    "radial_stretch_mu",
    "random_bandlimited_field",
    "random_conductivity",
    "SCENARIOS",
    "run_scenario",
]
