import json
from importlib import resources

import pytest


def scenario_path(name: str) -> str:
    return str(resources.files("dialectica") / "scenarios" / name)


@pytest.fixture
def scenarios():
    return scenario_path


def load_scenario_doc(name: str) -> dict:
    with open(scenario_path(name), "r", encoding="utf-8") as fh:
        return json.load(fh)


ALL_SCENARIOS = [
    "mqtt_bare.json",
    "mqtt_xor.json",
    "mqtt_xor_bitvec.json",
    "mqtt_horizontal.json",
    "mqtt_functional.json",
    "mqtt_aperiodic.json",
    "mqtt_sharp_attack.json",
    "mqtt_horizontal_dc.json",
    "mqtt_adversarial.json",
]
