"""Plain-text key-value session configuration.

One ``key = value`` pair per line; ``#`` starts a comment. Selects port,
seeds, mode, the cursor mapping, and model-parameter files. CLI flags
override file values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

from .avoidance import PersonModel
from .engine import SimHumanParams
from .partner import RobotPartnerConfig
from .service import InputMapping
from .trials import SessionConfig


def parse_kv_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _as_bool(s: str) -> bool:
    if s.lower() in ("1", "true", "yes", "on"):
        return True
    if s.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


@dataclass
class WorkbenchConfig:
    """Everything a session run needs, resolved from file + CLI overrides."""

    session: SessionConfig
    mapping: InputMapping
    partner: RobotPartnerConfig
    sim_human: SimHumanParams
    person_model: Optional[PersonModel]
    port: int = 8765
    host: str = "127.0.0.1"
    out_dir: Optional[str] = None
    session_id: Optional[str] = None
    replay_log: Optional[str] = None


def load_person_model(path: str) -> PersonModel:
    """Read a person model from a JSON file (either a bare model document or
    a full identification report)."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if "gain_laws" in doc and doc["gain_laws"] is not None:
        return PersonModel.from_dict(doc)
    raise ValueError(f"{path}: no identified gain laws in model document")


def build_config(values: dict[str, str]) -> WorkbenchConfig:
    """Assemble the run configuration from string key-value pairs."""

    def get(key: str, default):
        return values.get(key, default)

    widths = {
        "small": float(get("width_small", 0.01)),
        "medium": float(get("width_medium", 0.02)),
        "large": float(get("width_large", 0.03)),
    }
    session = SessionConfig(
        mode=get("mode", "individual"),
        trials_per_session=int(get("trials", 45)),
        dwell_time=float(get("dwell_time", 0.5)),
        start_radius=float(get("start_radius", 0.01)),
        seed=int(get("seed", 0)),
        obstacle_enabled=_as_bool(str(get("obstacle", "true"))),
        widths=widths,
    )
    mapping = InputMapping(
        cursor_spring_k=float(get("cursor_spring_k", 400.0)),
        cursor_damping=float(get("cursor_damping", 5.0)),
        cursor_force_cap=float(get("cursor_force_cap", 40.0)),
    )
    partner = RobotPartnerConfig(
        kp=float(get("partner_kp", 100.0)),
        kd=float(get("partner_kd", 20.0)),
        force_cap=float(get("partner_force_cap", 60.0)),
    )
    sim_human = SimHumanParams(
        reaction_delay=float(get("sim_reaction_delay", 0.15)),
        force_gain=float(get("sim_force_gain", 100.0)),
        noise_sigma=float(get("sim_noise_sigma", 0.3)),
        seed=int(get("sim_seed", session.seed + 1)),
    )
    person_model = None
    if "model_file" in values:
        person_model = load_person_model(values["model_file"])
    return WorkbenchConfig(
        session=session,
        mapping=mapping,
        partner=partner,
        sim_human=sim_human,
        person_model=person_model,
        port=int(get("port", 8765)),
        host=str(get("host", "127.0.0.1")),
        out_dir=values.get("out_dir"),
        session_id=values.get("session_id"),
        replay_log=values.get("replay"),
    )
