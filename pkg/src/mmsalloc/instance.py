"""Instances, allocations and their JSON encodings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InputError, StructuralError
from .valuations import Bundle, Valuation, as_bundle, valuation_from_record


@dataclass(frozen=True)
class Instance:
    valuations: tuple[Valuation, ...]
    m: int

    def __post_init__(self):
        object.__setattr__(self, "valuations", tuple(self.valuations))
        if not self.valuations:
            raise InputError("an instance needs at least one agent")
        if self.m < 0:
            raise InputError("m must be non-negative")
        for i, v in enumerate(self.valuations):
            if v.m != self.m:
                raise InputError(f"agent {i} valuation has ground size {v.m}, expected {self.m}")

    @property
    def n(self) -> int:
        return len(self.valuations)

    @property
    def items(self) -> Bundle:
        return tuple(range(self.m))

    def value(self, agent: int, bundle: Iterable[int]):
        return self.valuations[agent].value(bundle)

    def to_json(self) -> dict:
        return {"n": self.n, "m": self.m, "valuations": [v.to_record() for v in self.valuations]}

    @classmethod
    def from_json(cls, data: dict) -> "Instance":
        try:
            n, m, records = int(data["n"]), int(data["m"]), data["valuations"]
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed instance: {exc}") from exc
        if len(records) != n:
            raise InputError(f"instance declares n={n} but lists {len(records)} valuations")
        return cls(tuple(valuation_from_record(rec, m) for rec in records), m)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> "Instance":
        try:
            return cls.from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from exc


@dataclass
class Allocation:
    """One bundle per agent.  ``meta`` carries solver statistics and is not compared."""

    bundles: list[Bundle]
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        self.bundles = [as_bundle(b) for b in self.bundles]

    def validate(self, instance: Instance) -> None:
        """Raise :class:`StructuralError` unless the bundles partition the item set."""
        if len(self.bundles) != instance.n:
            raise StructuralError(
                f"allocation has {len(self.bundles)} bundles for {instance.n} agents"
            )
        seen: dict[int, int] = {}
        duplicated, unknown = set(), set()
        for bundle in self.bundles:
            for j in bundle:
                if not 0 <= j < instance.m:
                    unknown.add(j)
                if j in seen:
                    duplicated.add(j)
                seen[j] = seen.get(j, 0) + 1
        missing = sorted(set(range(instance.m)) - set(seen))
        if missing or duplicated or unknown:
            parts = []
            if missing:
                parts.append(f"missing items {missing}")
            if duplicated:
                parts.append(f"items in several bundles {sorted(duplicated)}")
            if unknown:
                parts.append(f"unknown items {sorted(unknown)}")
            raise StructuralError("invalid allocation: " + "; ".join(parts), missing, sorted(duplicated), sorted(unknown))

    def to_json(self) -> dict:
        return {"bundles": [list(b) for b in self.bundles]}

    @classmethod
    def from_json(cls, data: dict) -> "Allocation":
        try:
            return cls([tuple(b) for b in data["bundles"]])
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed allocation: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_json()) + "\n"


def assemble(n: int, parts: Iterable[tuple[int, Iterable[int]]]) -> Allocation:
    """Collect ``(agent, items)`` pieces into an allocation of ``n`` bundles."""
    bundles: list[set[int]] = [set() for _ in range(n)]
    for agent, items in parts:
        bundles[agent].update(items)
    return Allocation([tuple(sorted(b)) for b in bundles])


def additive_rows(instance: Instance) -> list[Sequence]:
    """The value vectors of an all-additive instance."""
    from .valuations import Additive

    rows = []
    for i, v in enumerate(instance.valuations):
        if not isinstance(v, Additive):
            raise InputError(f"agent {i} is {v.kind}, an additive valuation is required")
        rows.append(v.values)
    return rows
