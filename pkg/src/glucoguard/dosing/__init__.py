"""Sub-package with the rescue dosing protocol and the simulated rescue pump."""
from glucoguard.dosing.controller import DosingController, on_detection, on_recheck  # noqa
from glucoguard.dosing.data import DoseEvent, Notification, PatientProfile, Phase, PumpState  # noqa

__author__ = "glucoguard"
