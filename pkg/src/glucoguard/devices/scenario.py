"""Scenario files and the shipped scenario presets."""
from __future__ import annotations

import json
import logging
from typing import Any, Dict, Mapping

from glucoguard.common.integrity import checksum_bytes2str
from glucoguard.devices.data import ScenarioFormatError, ScenarioScript, SymptomPolicy
from glucoguard.identity.data import AgeClass

__author__ = "glucoguard"

logger = logging.getLogger(__name__)


def _pair(value: Any, what: str) -> tuple:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioFormatError(f"{what} must be a pair [below 70, otherwise]")
    return float(value[0]), float(value[1])


def scenario_from_dict(data: Mapping[str, Any], name: str = "scenario") -> ScenarioScript:
    """Parse and validate the JSON form of a scenario."""
    if not isinstance(data, Mapping):
        raise ScenarioFormatError("A scenario must be a JSON object")
    try:
        profile = data.get("profile", {})
        policy = data.get("symptom_policy", {})
        defaults = SymptomPolicy()
        script = ScenarioScript(
            name=str(data.get("name", name)),
            trajectory=tuple((int(t), float(v)) for t, v in data["trajectory"]),
            duration_s=int(data["duration_s"]),
            age_class=AgeClass(profile.get("age_class", AgeClass.Adult.value)),
            interval_s=int(data.get("interval_s", 300)),
            symptom_policy=SymptomPolicy(
                sweating=_pair(policy.get("sweating", defaults.sweating), "sweating"),
                shivering=_pair(policy.get("shivering", defaults.shivering), "shivering"),
            ),
            seed=int(data.get("seed", 0)),
            kinetics_scale=float(data.get("kinetics_scale", 1.0)),
            noise_mg_dl=float(data.get("noise_mg_dl", 2.0)),
            reservoir_ml=None if data.get("reservoir_ml") is None else float(data["reservoir_ml"]),
        )
    except ScenarioFormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ScenarioFormatError(f"Malformed scenario {name}: {exc!r}") from exc
    script.validate()
    return script


def load_scenario(path: str) -> ScenarioScript:
    """Read a scenario file."""
    with open(path, "rb") as fd:
        data = fd.read()
    try:
        parsed = json.loads(data)
    except ValueError as exc:
        raise ScenarioFormatError(f"{path}: {exc}") from exc
    script = scenario_from_dict(parsed, name=path)
    logger.info(f"Loaded scenario {script.name} from {path} {checksum_bytes2str(data)}")
    return script


def save_scenario(script: ScenarioScript, path: str) -> None:
    with open(path, "w") as fd:
        json.dump(script.to_dict(), fd, indent=2)
        fd.write("\n")


PRESETS: Dict[str, ScenarioScript] = {
    # 100 -> 55 mg/dl over 30 minutes. One dose lifts glucose back above 70 before the recheck.
    "drop-and-rescue": ScenarioScript(
        name="drop-and-rescue",
        trajectory=((0, 100.0), (1800, 55.0), (7200, 55.0)),
        duration_s=7200,
        seed=7,
    ),
    # Down to 45 mg/dl with half the dose effect, so the first recheck is still below 70.
    "stubborn-hypo": ScenarioScript(
        name="stubborn-hypo",
        trajectory=((0, 100.0), (1800, 45.0), (10800, 45.0)),
        duration_s=10800,
        seed=11,
        kinetics_scale=0.5,
        noise_mg_dl=1.0,
    ),
    "flat": ScenarioScript(
        name="flat",
        trajectory=((0, 100.0), (7200, 100.0)),
        duration_s=7200,
        seed=3,
    ),
}


def get_preset(name: str) -> ScenarioScript:
    try:
        return PRESETS[name]
    except KeyError:
        raise ScenarioFormatError(f"No scenario preset {name!r}, choose from {', '.join(sorted(PRESETS))}")
