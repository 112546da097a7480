"""Exact check of an allocation against a target fraction of every share."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .instance import Allocation, Instance
from .mms import agent_mms
from .values import as_value, format_value


@dataclass(frozen=True)
class AgentReport:
    value: Fraction
    mms: Fraction
    ratio: Fraction


@dataclass(frozen=True)
class VerifierReport:
    agents: tuple[AgentReport, ...]
    min_ratio: Fraction
    alpha: Fraction
    passed: bool

    def to_json(self) -> dict:
        return {
            "alpha": format_value(self.alpha),
            "min_ratio": format_value(self.min_ratio),
            "pass": self.passed,
            "agents": [
                {"value": format_value(a.value), "mms": format_value(a.mms), "ratio": format_value(a.ratio)}
                for a in self.agents
            ],
        }


def verify(instance: Instance, allocation: Allocation, alpha, mms: Sequence | None = None) -> VerifierReport:
    """Compare each agent's value with ``alpha`` times their share.

    Shares are computed exactly unless ``mms`` supplies them.  An agent with a
    zero share has ratio 1.  Raises :class:`StructuralError` when the bundles
    do not partition the items.
    """
    alpha = as_value(alpha)
    allocation.validate(instance)
    shares = agent_mms(instance) if mms is None else [as_value(x) for x in mms]
    rows = []
    for agent, bundle in enumerate(allocation.bundles):
        value = instance.value(agent, bundle)
        ratio = value / shares[agent] if shares[agent] > 0 else Fraction(1)
        rows.append(AgentReport(value, shares[agent], ratio))
    low = min((r.ratio for r in rows), default=Fraction(1))
    return VerifierReport(tuple(rows), low, alpha, low >= alpha)
