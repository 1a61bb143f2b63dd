"""Experiment configuration: validated, JSON round-trippable, hashable."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, fields

from .degrees import DegreeLaw
from .fpp import EdgeWeightLaw

__all__ = ["ConfigError", "ExperimentConfig"]


class ConfigError(ValueError):
    """Invalid configuration; carries the offending field name."""

    def __init__(self, field_name: str, message: str):
        self.field_name = field_name
        super().__init__(f"config field {field_name!r}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    tau: float = 1.5
    scale_c: float = 1.0
    n: int = 3000
    K: int = 200
    replicas: int = 1000
    pairs: int = 1
    master_seed: int = 20260809
    weight_kind: str = "exponential"
    weight_b: float = 1.0
    eps_exponent: float = 0.125
    graph_mode: str = "original"
    limit_kind: str = "or"
    zeta: float = 1.0
    attack_mode: str = "random"
    p_keep: float = 0.5
    k_remove: int = 20
    out_dir: str = "runs"

    def __post_init__(self) -> None:
        if not (1.0 < self.tau < 2.0):
            raise ConfigError("tau", f"must lie strictly in (1, 2), got {self.tau}")
        if self.scale_c <= 0:
            raise ConfigError("scale_c", "must be positive")
        if self.n < 2:
            raise ConfigError("n", "need at least 2 vertices")
        if self.K < 10:
            raise ConfigError("K", "truncation must be >= 10")
        if self.replicas < 0:
            raise ConfigError("replicas", "must be >= 0")
        if self.pairs < 1:
            raise ConfigError("pairs", "must be >= 1")
        if self.weight_kind not in ("exponential", "uniform"):
            raise ConfigError("weight_kind", f"unknown kind {self.weight_kind!r}")
        if self.weight_b <= 0:
            raise ConfigError("weight_b", "must be positive")
        if not (0.0 < self.eps_exponent < 1.0):
            raise ConfigError("eps_exponent", "must lie in (0, 1)")
        if self.graph_mode not in ("original", "erased"):
            raise ConfigError("graph_mode", f"unknown mode {self.graph_mode!r}")
        if self.limit_kind not in ("or", "er"):
            raise ConfigError("limit_kind", f"unknown kind {self.limit_kind!r}")
        if self.zeta <= 0:
            raise ConfigError("zeta", "must be positive")
        if self.attack_mode not in ("random", "targeted"):
            raise ConfigError("attack_mode", f"unknown mode {self.attack_mode!r}")
        if not (0.0 <= self.p_keep <= 1.0):
            raise ConfigError("p_keep", "must lie in [0, 1]")
        if not (0 <= self.k_remove < self.n):
            raise ConfigError("k_remove", "must lie in [0, n)")

    @property
    def law(self) -> DegreeLaw:
        return DegreeLaw(self.tau, self.scale_c)

    @property
    def weight_law(self) -> EdgeWeightLaw:
        return EdgeWeightLaw(self.weight_kind, self.weight_b)

    @property
    def eps_n(self) -> float:
        return float(self.n**-self.eps_exponent)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        return cls(**d)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("<json>", f"not valid JSON: {e}") from e
        if not isinstance(d, dict):
            raise ConfigError("<json>", "top level must be an object")
        return cls.from_dict(d)

    def replace(self, **overrides) -> ExperimentConfig:
        d = self.to_dict()
        d.update(overrides)
        return ExperimentConfig.from_dict(d)

    @property
    def config_hash(self) -> str:
        """Short digest binding outputs to the exact parameter set."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]
