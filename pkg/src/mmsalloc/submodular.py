"""Local search for submodular agents driven by a capped-welfare potential.

Each agent is scaled by an estimate of their share.  Starting from a
round-robin allocation, the worst-off agent repeatedly takes one item from
whoever holds it, provided the potential ``sum_i min(cap, V_i(A_i))`` grows by
at least ``1 / (3 m)``.  When no such item exists the estimate of that agent
was too high; :func:`estimate_descent` lowers it and starts over.
"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .errors import EstimateTooHigh, InvariantViolation
from .instance import Allocation, Instance, assemble
from .reduction import reduce_singletons
from .valuations import Valuation, scaled
from .values import ZERO, as_value

log = logging.getLogger(__name__)

TWO_THIRDS = Fraction(2, 3)
THIRD = Fraction(1, 3)


class Potential:
    """Capped welfare of a mutable allocation, maintained incrementally."""

    def __init__(self, valuations: Mapping[int, Valuation], cap, bundles: Mapping[int, Iterable[int]]):
        self.valuations = dict(valuations)
        self.cap = as_value(cap)
        self.bundles = {i: set(b) for i, b in bundles.items()}
        self.owner = {j: i for i, b in self.bundles.items() for j in b}
        self.shares = {i: self.share(i, b) for i, b in self.bundles.items()}
        self.value = sum(self.shares.values(), ZERO)

    def share(self, agent: int, bundle: Iterable[int]) -> Fraction:
        return min(self.cap, self.valuations[agent].value(bundle))

    def recompute(self) -> Fraction:
        return sum((self.share(i, b) for i, b in self.bundles.items()), ZERO)

    def _after(self, receiver: int, items: Iterable[int]) -> dict[int, Fraction]:
        items = set(items)
        touched: dict[int, set[int]] = {}
        for j in items:
            holder = self.owner.get(j)
            if holder is not None and holder != receiver:
                touched.setdefault(holder, set()).add(j)
        new = {h: self.share(h, self.bundles[h] - lost) for h, lost in touched.items()}
        new[receiver] = self.share(receiver, self.bundles[receiver] | items)
        return new

    def gain(self, receiver: int, items: Iterable[int]) -> Fraction:
        """Potential change if ``receiver`` takes ``items`` from their holders."""
        new = self._after(receiver, items)
        return sum((v - self.shares[i] for i, v in new.items()), ZERO)

    def apply(self, receiver: int, items: Iterable[int]) -> Fraction:
        items = set(items)
        new = self._after(receiver, items)
        delta = sum((v - self.shares[i] for i, v in new.items()), ZERO)
        for j in items:
            holder = self.owner.get(j)
            if holder is not None and holder != receiver:
                self.bundles[holder].discard(j)
            self.owner[j] = receiver
        self.bundles[receiver] |= items
        self.shares.update(new)
        self.value += delta
        return delta


def round_robin(agents: Sequence[int], items: Sequence[int]) -> dict[int, set[int]]:
    bundles = {i: set() for i in agents}
    for k, j in enumerate(sorted(items)):
        bundles[agents[k % len(agents)]].add(j)
    return bundles


def _scaled_setup(instance: Instance, estimates: Sequence, threshold: Fraction):
    """Scale by the estimates, serve zero-estimate agents, reduce singletons."""
    estimates = [as_value(d) for d in estimates]
    unit = Instance(
        tuple(scaled(v, 1 / d) if d > 0 else v for v, d in zip(instance.valuations, estimates)),
        instance.m,
    )
    ones = [Fraction(1) if d > 0 else ZERO for d in estimates]
    step = reduce_singletons(unit, threshold, ones)
    return unit, step


def solve_submodular_third(
    instance: Instance, mms_estimates: Sequence, *, check: bool = False
) -> Allocation:
    """Give every agent at least a third of their estimate, or raise EstimateTooHigh."""
    unit, step = _scaled_setup(instance, mms_estimates, THIRD)
    parts = list(step.satisfied)
    agents, items = list(step.agents), list(step.items)
    steps, gains = 0, []
    if agents:
        potential = Potential(
            {i: unit.valuations[i] for i in agents}, TWO_THIRDS, round_robin(agents, items)
        )
        need = Fraction(1, 3 * len(items)) if items else ZERO
        while True:
            low = min(agents, key=lambda i: (potential.shares[i], i))
            if potential.shares[low] >= THIRD:
                break
            move = next(
                (j for j in sorted(items) if j not in potential.bundles[low] and potential.gain(low, (j,)) >= need),
                None,
            )
            if move is None:
                raise EstimateTooHigh(low)
            gain = potential.apply(low, (move,))
            steps += 1
            gains.append(gain)
            if check:
                if gain < need:
                    raise InvariantViolation(f"accepted gain {gain} below {need}")
                if potential.value != potential.recompute():
                    raise InvariantViolation("incremental potential drifted from recomputation")
        parts.extend((i, tuple(sorted(b))) for i, b in potential.bundles.items())
    elif items:
        agent, bundle = parts[-1]
        parts[-1] = (agent, tuple(bundle) + tuple(items))
    allocation = assemble(instance.n, parts)
    allocation.meta.update(steps=steps, gains=gains, reductions=len(step.satisfied))
    return allocation


def estimate_descent(
    instance: Instance,
    solver: Callable[..., Allocation],
    initial: Sequence | None = None,
    *,
    on_step: Callable[[list[Fraction]], None] | None = None,
    **solver_kwargs,
) -> Allocation:
    """Run ``solver(instance, estimates)`` lowering estimates until it succeeds.

    Estimates start at each agent's value for everything (an upper bound on the
    share).  An agent with fewer than ``n`` individually valuable items has a
    zero share (for subadditive valuations every valuable set contains a
    valuable item) and starts at estimate 0, which serves them with nothing.
    Whenever the solver raises :class:`EstimateTooHigh` for agent ``i``,
    ``d_i`` is divided by ``1 + 1/(10 n)``.  ``on_step`` sees the
    estimate vector before every attempt.
    """
    n = instance.n
    everything = tuple(range(instance.m))
    if initial is None:
        estimates = [
            v.value(everything) if sum(1 for j in everything if v.value((j,)) > 0) >= n else ZERO
            for v in instance.valuations
        ]
    else:
        estimates = [as_value(d) for d in initial]
    factor = 1 + Fraction(1, 10 * n)
    descents = 0
    while True:
        if on_step is not None:
            on_step(list(estimates))
        try:
            allocation = solver(instance, estimates, **solver_kwargs)
        except EstimateTooHigh as signal:
            estimates[signal.agent] /= factor
            descents += 1
            log.debug("estimate of agent %d lowered to %s", signal.agent, estimates[signal.agent])
            continue
        allocation.meta.update(descent_steps=descents, estimates=list(estimates))
        return allocation
