"""Run configuration: budgets and caps for searches and constructions."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class RunConfig:
    # Subgroup enumeration.
    max_index: int = 6
    max_search_nodes: int = 10_000_000
    # Homomorphism enumeration (degree of the target symmetric group, and a
    # cap on raw assignments for generic presentations).
    max_hom_degree: int = 4
    max_hom_assignments: int = 2_000_000
    # Cap on the index of any constructed subgroup (intersections, homology
    # kernels, cores).
    max_result_index: int = 10_000
    # Bounded product search used when inverting a witness-free virtual
    # automorphism: maximum word length in the given generators.
    max_solve_length: int = 3
    # Seed recorded in manifests; all operations are deterministic, the seed
    # only feeds test-style sampling helpers.
    seed: int = 0

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "RunConfig":
        allowed = {f for f in cls.__dataclass_fields__}
        bad = set(doc) - allowed
        if bad:
            raise ValueError(f"unknown config fields: {sorted(bad)}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


DEFAULT_CONFIG = RunConfig()
