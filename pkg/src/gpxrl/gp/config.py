from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GPConfig:
    population_size: int = 1000
    tournament_size: int = 100
    p_mutation: float = 0.5
    p_crossover: float = 0.5
    bloat_weight: float = 0.025
    max_sample_depth: int = 6
    max_generations_per_length: int = 10
    advance_threshold: float = 0.95
    library_size_limit: int = 10
    library_count_limit: int = 5
    rng_seed: int = 0
    use_library: bool = True
    start_length: int = 3
    max_sequence_length: int = 100
    max_tree_depth: int = 17
    n_jobs: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self):
        errors = []
        if self.population_size < 2:
            errors.append("population_size must be >= 2")
        if not 1 <= self.tournament_size <= self.population_size:
            errors.append("tournament_size must be in 1..population_size")
        for name in ("p_mutation", "p_crossover", "advance_threshold"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                errors.append(f"{name} must be in [0, 1]")
        if self.bloat_weight < 0:
            errors.append("bloat_weight must be >= 0")
        if self.max_sample_depth < 1:
            errors.append("max_sample_depth must be >= 1")
        if self.max_generations_per_length < 1:
            errors.append("max_generations_per_length must be >= 1")
        if self.library_size_limit < 2:
            errors.append("library_size_limit must be >= 2")
        if self.library_count_limit < 1:
            errors.append("library_count_limit must be >= 1")
        if self.start_length < 1 or self.max_sequence_length < self.start_length:
            errors.append("need 1 <= start_length <= max_sequence_length")
        if self.max_tree_depth < self.max_sample_depth:
            errors.append("max_tree_depth must be >= max_sample_depth")
        if self.n_jobs == 0:
            errors.append("n_jobs must be nonzero")
        if errors:
            raise ConfigError("; ".join(errors))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "GPConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        values = {}
        for key, value in data.items():
            target = type(getattr(cls, key)) if hasattr(cls, key) else None
            try:
                values[key] = target(value) if target in (int, float, bool) and not isinstance(value, target) else value
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: {exc}") from None
        return cls(**values)

    def replace(self, **changes) -> "GPConfig":
        return dataclasses.replace(self, **changes)

    def run_dict(self) -> dict:
        """Fields that influence results (worker count does not)."""
        data = self.to_dict()
        data.pop("n_jobs")
        return data

    def digest(self) -> str:
        blob = json.dumps(self.run_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
