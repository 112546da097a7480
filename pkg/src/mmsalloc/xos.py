"""Local search for XOS agents with demand-oracle improving sets.

Agents are scaled by share estimates and values are capped at 1/4.  The
worst-off agent prices every item held by someone else at three times
``n/(n-1)`` its contribution to the capped welfare, asks their demand oracle
for the most profitable set, and takes the best prefix of it worth 1/4.  A
move is accepted when the capped welfare grows by at least ``1/(10 n)``.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import EstimateTooHigh, InvariantViolation
from .instance import Allocation, Instance, assemble
from .submodular import Potential, _scaled_setup, estimate_descent, round_robin
from .valuations import Bundle, Valuation, demand, xos_witness
from .values import ZERO

log = logging.getLogger(__name__)

CAP = Fraction(1, 4)
EIGHTH = Fraction(1, 8)


def contributions(valuation: Valuation, bundle: Iterable[int], cap=CAP) -> dict[int, Fraction]:
    """Each item's share of ``min(cap, V(bundle))`` under the attaining clause."""
    witness = xos_witness(valuation, bundle)
    total = sum((c for _, c in witness), ZERO)
    factor = min(Fraction(1), cap / total) if total else ZERO
    return {j: c * factor for j, c in witness}


def improving_set(
    agent: int,
    bundles: Mapping[int, Iterable[int]],
    valuations: Mapping[int, Valuation],
    items: Iterable[int] | None = None,
    cap=CAP,
) -> Bundle:
    """A bundle worth at least ``cap`` to ``agent`` that is cheap for everyone else.

    Raises :class:`EstimateTooHigh` when the demand set is worth less than
    ``cap`` to the agent.
    """
    n = len(bundles)
    valuation = valuations[agent]
    prices = [ZERO] * valuation.m
    markup = 3 * Fraction(n, n - 1)
    for holder, bundle in bundles.items():
        if holder == agent:
            continue
        for j, c in contributions(valuations[holder], bundle, cap).items():
            prices[j] = markup * c
    pool = sorted(j for b in bundles.values() for j in b) if items is None else sorted(items)
    wanted = demand(valuation, prices, pool)
    if valuation.value(wanted) < cap:
        raise EstimateTooHigh(agent)
    own = dict(xos_witness(valuation, wanted))
    order = sorted(wanted, key=lambda j: (prices[j] - own[j], j))
    bag: list[int] = []
    for j in order:
        bag.append(j)
        if valuation.value(bag) >= cap:
            break
    return tuple(sorted(bag))


def solve_xos_round(instance: Instance, estimates: Sequence, *, check: bool = False) -> Allocation:
    """One attempt with fixed estimates; raises EstimateTooHigh on failure."""
    unit, step = _scaled_setup(instance, estimates, EIGHTH)
    parts = list(step.satisfied)
    agents, items = list(step.agents), list(step.items)
    steps, gains = 0, []
    if len(agents) == 1:
        (agent,) = agents
        if unit.valuations[agent].value(items) < EIGHTH:
            raise EstimateTooHigh(agent)
        parts.append((agent, tuple(items)))
    elif agents:
        n = len(agents)
        need = Fraction(1, 10 * n)
        if check and Fraction(3, 8) / (3 * Fraction(n, n - 1)) > EIGHTH - need:
            raise InvariantViolation("price bound fails for this agent count")
        valuations = {i: unit.valuations[i] for i in agents}
        potential = Potential(valuations, CAP, round_robin(agents, items))
        while True:
            low = min(agents, key=lambda i: (potential.shares[i], i))
            if potential.shares[low] >= EIGHTH:
                break
            bag = improving_set(low, potential.bundles, valuations, items)
            gain = potential.gain(low, bag)
            if gain < need:
                raise EstimateTooHigh(low)
            potential.apply(low, bag)
            steps += 1
            gains.append(gain)
            if check and potential.value != potential.recompute():
                raise InvariantViolation("incremental potential drifted from recomputation")
        parts.extend((i, tuple(sorted(b))) for i, b in potential.bundles.items())
    elif items:
        agent, bundle = parts[-1]
        parts[-1] = (agent, tuple(bundle) + tuple(items))
    allocation = assemble(instance.n, parts)
    allocation.meta.update(steps=steps, gains=gains, gain_floor=Fraction(1, 10 * max(1, len(agents))))
    return allocation


def solve_xos_eighth(instance: Instance, *, check: bool = False, on_step=None) -> Allocation:
    """Every XOS agent gets at least 1/8 of their share (estimates found by descent)."""
    return estimate_descent(instance, solve_xos_round, check=check, on_step=on_step)


def mms_partition_xos(valuation: Valuation, r: int) -> tuple[Bundle, ...]:
    """``r`` disjoint parts, each worth at least an eighth of the r-part share."""
    if r < 1:
        raise ValueError("r must be at least 1")
    if r == 1:
        return (tuple(range(valuation.m)),)
    allocation = solve_xos_eighth(Instance((valuation,) * r, valuation.m))
    return tuple(allocation.bundles)
