"""Reductions: satisfy some agents cheaply so that the rest keep their maximin share."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .instance import Instance
from .valuations import Bundle
from .values import as_value


@dataclass(frozen=True)
class ReductionStep:
    """Agents served by a reduction and the agents/items that remain.

    ``satisfied`` lists ``(agent, bundle)`` pairs in the order they were made.
    Agents with a zero share appear with an empty bundle.
    """

    satisfied: tuple[tuple[int, Bundle], ...]
    agents: tuple[int, ...]
    items: tuple[int, ...]


def reduce_singletons(
    instance: Instance,
    alpha,
    mms: Sequence,
    agents: Iterable[int] | None = None,
    items: Iterable[int] | None = None,
) -> ReductionStep:
    """Repeatedly give an item worth at least ``alpha * mms[i]`` to agent ``i``.

    The scan goes by agent index, then item id, and restarts after each
    assignment.  Agents whose share is zero are served with nothing first.
    """
    alpha = as_value(alpha)
    live = list(range(instance.n) if agents is None else agents)
    pool = sorted(range(instance.m) if items is None else items)
    satisfied: list[tuple[int, Bundle]] = []
    for i in list(live):
        if mms[i] == 0:
            satisfied.append((i, ()))
            live.remove(i)
    progress = True
    while progress:
        progress = False
        for i in live:
            threshold = alpha * mms[i]
            valuation = instance.valuations[i]
            hit = next((j for j in pool if valuation.value((j,)) >= threshold), None)
            if hit is not None:
                satisfied.append((i, (hit,)))
                live.remove(i)
                pool.remove(hit)
                progress = True
                break
    return ReductionStep(tuple(satisfied), tuple(live), tuple(pool))


def check_pair_invariant(
    instance: Instance,
    agents: Sequence[int],
    pairs: Sequence[tuple[int, int]],
    mms: Sequence,
    *,
    alpha=Fraction(3, 4),
    others: Iterable[int] | None = None,
) -> bool:
    """Whether giving ``pairs[k]`` to ``agents[k]`` is a valid pair reduction.

    Holds when the pairs use 2|T| distinct items, every receiving agent values
    their pair at ``alpha * mms`` or more, and every other agent (``others``,
    default all remaining agents of the instance) values each pair at most at
    their share.
    """
    alpha = as_value(alpha)
    agents, pairs = list(agents), [tuple(p) for p in pairs]
    if not agents or len(agents) != len(pairs) or len(set(agents)) != len(agents):
        return False
    used = [j for p in pairs for j in p]
    if any(len(p) != 2 for p in pairs) or len(set(used)) != len(used):
        return False
    for i, pair in zip(agents, pairs):
        if instance.valuations[i].value(pair) < alpha * mms[i]:
            return False
    receivers = set(agents)
    others = [i for i in (range(instance.n) if others is None else others) if i not in receivers]
    for i in others:
        for pair in pairs:
            if instance.valuations[i].value(pair) > mms[i]:
                return False
    return True
