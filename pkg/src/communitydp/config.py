"""Dotted-key configuration files and the experiment configuration.

The file format is one ``key = value`` pair per line with '#' comments;
keys use dots to mirror the module option names, e.g.::

    mapping.omega = 1.0
    mapping.theta = 0.5
    budget.direction = sum<=B
    assignment.policy = min-density

Values are coerced to bool/int/float when they parse as such. Command
line flags override file values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional

from .community import MIN_DENSITY
from .mapping import BUDGET_AT_MOST, MappingParams
from .mechanisms import COUPLED
from .pipeline import NODE_POLICY


def _coerce(raw: str) -> Any:
    text = raw.strip()
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            continue
    return text


def load_config(path) -> Dict[str, Any]:
    """Parse a dotted-key config file into a flat dict."""
    values: Dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
            key, value = line.split("=", 1)
            values[key.strip()] = _coerce(value)
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    """All knobs the CLI and experiment drivers consume."""

    graph_path: Optional[str] = None
    graph_nodes: int = 200
    graph_edges: int = 800
    mapping_omega: float = 1.0
    mapping_theta: float = 0.5
    mapping_alpha: float = 0.5
    mapping_paper_literal_sign: bool = False
    epsilon_floor: Optional[float] = None
    budget_value: float = 10.0
    budget_direction: str = BUDGET_AT_MOST
    assignment_policy: str = MIN_DENSITY
    epsilon_mode: str = NODE_POLICY
    noise_source: str = COUPLED
    sensitivity: float = 1.0
    ledger_nbits: int = 8
    ledger_ramp_nbits: int = 14
    ledger_ramp_blocks_per_step: int = 1
    community_size: int = 40
    adversary_fraction: float = 0.2
    poison_fraction: float = 0.2
    seed: int = 0
    out_dir: str = "."

    KEY_MAP = {
        "graph.path": "graph_path",
        "graph.nodes": "graph_nodes",
        "graph.edges": "graph_edges",
        "mapping.omega": "mapping_omega",
        "mapping.theta": "mapping_theta",
        "mapping.alpha": "mapping_alpha",
        "mapping.paper_literal_sign": "mapping_paper_literal_sign",
        "epsilon.floor": "epsilon_floor",
        "budget.value": "budget_value",
        "budget.direction": "budget_direction",
        "assignment.policy": "assignment_policy",
        "release.epsilon_mode": "epsilon_mode",
        "release.noise_source": "noise_source",
        "release.sensitivity": "sensitivity",
        "ledger.nbits": "ledger_nbits",
        "ledger.ramp_nbits": "ledger_ramp_nbits",
        "ledger.ramp_blocks_per_step": "ledger_ramp_blocks_per_step",
        "ledger.community_size": "community_size",
        "ledger.adversary_fraction": "adversary_fraction",
        "ledger.poison_fraction": "poison_fraction",
        "seed": "seed",
        "out_dir": "out_dir",
    }

    @classmethod
    def from_mapping(cls, values: Dict[str, Any]) -> "ExperimentConfig":
        kwargs = {}
        for key, value in values.items():
            if key not in cls.KEY_MAP:
                raise KeyError(f"unknown config key {key!r}")
            kwargs[cls.KEY_MAP[key]] = value
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        return cls.from_mapping(load_config(path))

    def override(self, **kwargs) -> "ExperimentConfig":
        provided = {k: v for k, v in kwargs.items() if v is not None}
        return replace(self, **provided)

    def mapping_params(self) -> MappingParams:
        return MappingParams(omega=self.mapping_omega, theta=self.mapping_theta,
                             alpha=self.mapping_alpha, floor=self.epsilon_floor,
                             paper_literal_sign=self.mapping_paper_literal_sign)
