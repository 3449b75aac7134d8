"""Sub-package simulating the patient's devices and driving the closed loop."""
from glucoguard.devices.clock import VirtualClock  # noqa
from glucoguard.devices.data import ScenarioScript, SimulationError, SymptomPolicy  # noqa
from glucoguard.devices.scenario import PRESETS, get_preset, load_scenario, scenario_from_dict  # noqa
from glucoguard.devices.sensors import GlucoseKinetics, next_reading  # noqa
from glucoguard.devices.simulation import EventLog, fresh_system, run_scenario  # noqa

__author__ = "glucoguard"
