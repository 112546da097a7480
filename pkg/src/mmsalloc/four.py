"""4/5 of the maximin share for exactly four additive agents.

Values are scaled so every share is 1.  The first agent cuts the items into
their best four bundles, the second agent rebuilds three of them into three
bundles they each accept, and the remaining agents are matched to bundles;
when no direct matching exists a transfer of low-value items between bundles
repairs the assignment.  Every step is verified and a complete search is used
as a fallback when a structured step does not apply.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from math import lcm
from typing import Iterable, Sequence

from .errors import InputError, InvariantViolation, PreconditionError
from .instance import Allocation, Instance, additive_rows, assemble
from .mms import agent_mms, mms_exact, scale_to_unit
from .reduction import reduce_singletons
from .valuations import Additive, Bundle
from .values import ZERO, as_value

log = logging.getLogger(__name__)

FOUR_FIFTHS = Fraction(4, 5)


@dataclass(frozen=True)
class CoreBundle:
    bundle: Bundle
    core: Bundle


def _by_value(valuation: Additive, items: Iterable[int]) -> list[int]:
    return sorted(items, key=lambda j: (valuation.values[j], j))


def core(valuation: Additive, bundle: Iterable[int], threshold=FOUR_FIFTHS) -> CoreBundle:
    """Shortest suffix of the value-sorted bundle still worth ``threshold``."""
    threshold = as_value(threshold)
    bundle = tuple(sorted(bundle))
    if valuation.value(bundle) < threshold:
        raise PreconditionError(f"bundle {bundle} is worth less than {threshold}")
    ordered = _by_value(valuation, bundle)
    total = ZERO
    start = len(ordered)
    while total < threshold:
        start -= 1
        total += valuation.values[ordered[start]]
    kept = tuple(sorted(ordered[start:]))
    excess = total - threshold
    if threshold == FOUR_FIFTHS and all(valuation.values[j] < FOUR_FIFTHS for j in bundle) and total >= 2 * threshold:
        raise InvariantViolation(f"core {kept} is worth {total}, at least 8/5")
    if any(valuation.values[j] <= excess for j in kept):
        raise InvariantViolation(f"core {kept} has an item not exceeding its excess {excess}")
    return CoreBundle(bundle, kept)


def prefix_at_least(valuation: Additive, items: Sequence[int], target) -> Bundle:
    """Add ``items`` in order until the value reaches ``target``.

    When every item is worth at most ``target`` and the whole sequence is
    worth at least ``target``, the result is worth less than twice ``target``.
    """
    target = as_value(target)
    bag: list[int] = []
    total = ZERO
    for j in items:
        if total >= target:
            break
        bag.append(j)
        total += valuation.values[j]
    if total < target:
        raise PreconditionError(f"items {list(items)} are worth less than {target}")
    return tuple(sorted(bag))


def _minus(bundle: Iterable[int], removed: Iterable[int]) -> Bundle:
    removed = set(removed)
    return tuple(sorted(j for j in bundle if j not in removed))


def _split_three(valuation: Additive, partition4, own_partition=None):
    """Three bundles worth 4/5 each plus the index of a bundle left untouched.

    The three bundles use no item of the untouched bundle.  Preconditions:
    every item is worth less than 4/5 and the four bundles together are worth
    at least 4.  The last case additionally needs a 4-partition of the union
    whose parts are each worth 1.
    """
    parts = [tuple(sorted(p)) for p in partition4]
    if len(parts) != 4:
        raise PreconditionError("split_three needs exactly four bundles")
    value = valuation.value
    union = tuple(sorted(j for p in parts for j in p))
    if len(set(union)) != len(union):
        raise PreconditionError("the four bundles overlap")
    big = [j for j in union if valuation.values[j] >= FOUR_FIFTHS]
    if big:
        raise PreconditionError(f"items {big} are worth 4/5 or more (instance is reducible)")
    if value(union) < 4:
        raise PreconditionError("the four bundles are worth less than 4 in total")

    accepted = [k for k in range(4) if value(parts[k]) >= FOUR_FIFTHS]
    if len(accepted) >= 3:
        chosen = accepted[:3]
        untouched = next(k for k in range(4) if k not in chosen)
        return [parts[k] for k in chosen], untouched, "three-accepted"

    if len(accepted) == 1:
        z = accepted[0]
        a, b, c = sorted((k for k in range(4) if k != z), key=lambda k: (-value(parts[k]), k))
        zc = core(valuation, parts[z])
        moved = tuple(sorted(parts[a] + _minus(parts[z], zc.core)))
        pair = [(moved, None), (zc.core, None)]
        rest = [(parts[b], b), (parts[c], c)]
        case = "transfer-"
    else:
        pair = [(parts[k], k) for k in accepted]
        rest = [(parts[k], k) for k in range(4) if k not in accepted]
        case = ""

    (x_bundle, x_label), (y_bundle, y_label) = sorted(rest, key=lambda e: (-value(e[0]), e[1]))
    cores = [core(valuation, b) for b, _ in pair]
    cz, ct = sorted(cores, key=lambda c: value(c.core))
    x_prime = tuple(sorted(x_bundle + _minus(cz.bundle, cz.core) + _minus(ct.bundle, ct.core)))
    if value(x_prime) >= FOUR_FIFTHS:
        return [x_prime, cz.core, ct.core], y_label, case + "merge-remainders"

    eps1 = FOUR_FIFTHS - value(x_prime)
    eps4 = value(ct.core) - Fraction(6, 5)
    if eps4 < eps1:
        raise InvariantViolation(f"deficit bound failed: eps4={eps4} < eps1={eps1}")
    if len(ct.core) != 2:
        raise InvariantViolation(f"larger core {ct.core} does not have exactly two items")
    b1, b2 = _by_value(valuation, ct.core)
    small_cut = Fraction(1, 5) - eps4 / 2
    small = [j for j in x_prime if valuation.values[j] < small_cut]
    if small_cut > 0 and value(small) >= small_cut:
        chunk = prefix_at_least(valuation, small, small_cut)
        bundles = [tuple(sorted(chunk + (b2,))), tuple(sorted(_minus(x_prime, chunk) + (b1,))), cz.core]
        return bundles, y_label, case + "small-chunk"
    large = [j for j in x_prime if j not in set(small)]
    if len(large) >= 2:
        b3 = min(large, key=lambda j: (valuation.values[j], j))
        bundles = [tuple(sorted((b3, b2))), tuple(sorted(_minus(x_prime, (b3,)) + (b1,))), cz.core]
        return bundles, y_label, case + "swap-item"

    (b3,) = large
    own = own_partition or mms_exact(valuation, 4, union).witness
    if len(own) != 4 or any(value(p) < 1 for p in own):
        raise PreconditionError("the last case needs a 4-partition of the union worth 1 per part")
    bundles = [_minus(p, x_bundle) for p in own if b3 not in p]
    if x_label is None:
        raise InvariantViolation("untouched bundle must be one of the input bundles")
    return bundles, x_label, case + "own-partition"


def split_three(valuation: Additive, partition4, own_partition=None) -> tuple[Bundle, Bundle, Bundle]:
    """Rebuild three of four bundles into three bundles each worth at least 4/5.

    ``valuation`` must be unit-scaled (share 1).  Every output bundle is
    checked before returning.
    """
    bundles, _, _ = _split_three(valuation, partition4, own_partition)
    _verify_split(valuation, partition4, bundles)
    return tuple(bundles)


def _verify_split(valuation, partition4, bundles):
    union = {j for p in partition4 for j in p}
    seen: set[int] = set()
    for b in bundles:
        if valuation.value(b) < FOUR_FIFTHS:
            raise InvariantViolation(f"rebuilt bundle {b} is worth less than 4/5")
        if seen & set(b) or not set(b) <= union:
            raise InvariantViolation("rebuilt bundles overlap or use foreign items")
        seen |= set(b)


# ---------------------------------------------------------------------------
# Assignments


def _accepts(valuation: Additive, bundle) -> bool:
    return valuation.value(bundle) >= FOUR_FIFTHS


def perfect_assignment(valuations, agents: Sequence[int], bundles: Sequence[Bundle]):
    """First bijection (in permutation order) giving each agent a bundle worth 4/5."""
    for perm in permutations(range(len(bundles))):
        if all(_accepts(valuations[a], bundles[k]) for a, k in zip(agents, perm)):
            return {a: bundles[k] for a, k in zip(agents, perm)}
    return None


def three_agent_repair(valuations, bundles, holder: int, second: int, third: int):
    """Assign three bundles (each accepted by ``holder``) to three agents.

    ``second`` must value the union above 16/5 and ``third`` at 3 or more.
    When ``second`` accepts a single bundle, its low-value items move to one of
    the other bundles first.
    """
    agents = (holder, second, third)
    found = perfect_assignment(valuations, agents, bundles)
    if found is not None:
        return found
    liked = [k for k, b in enumerate(bundles) if _accepts(valuations[second], b)]
    if len(liked) != 1:
        return None
    z = liked[0]
    zc = core(valuations[second], bundles[z])
    spill = _minus(bundles[z], zc.core)
    for target in (k for k in range(3) if k != z):
        trial = list(bundles)
        trial[target] = tuple(sorted(bundles[target] + spill))
        trial[z] = zc.core
        found = perfect_assignment(valuations, agents, trial)
        if found is not None:
            return found
    return None


def search_allocation(valuations, agents: Sequence[int], items: Sequence[int], target=FOUR_FIFTHS):
    """Depth-first search for an allocation worth ``target`` to every agent, or None."""
    target = as_value(target)
    agents = list(agents)
    if not agents:
        return {}
    scale = {a: lcm(target.denominator, *(valuations[a].values[j].denominator for j in items)) for a in agents}
    worth = {a: {j: int(valuations[a].values[j] * scale[a]) for j in items} for a in agents}
    need = {a: int(target * scale[a]) for a in agents}
    order = sorted(items, key=lambda j: (-max(valuations[a].values[j] for a in agents), j))
    remaining = {a: [0] * (len(order) + 1) for a in agents}
    for a in agents:
        for k in range(len(order) - 1, -1, -1):
            remaining[a][k] = remaining[a][k + 1] + worth[a][order[k]]
    have = {a: 0 for a in agents}
    owner: dict[int, int] = {}

    def dfs(k: int) -> bool:
        if all(have[a] >= need[a] for a in agents):
            for j in order[k:]:
                owner[j] = agents[0]
            return True
        if k == len(order):
            return False
        if any(have[a] + remaining[a][k] < need[a] for a in agents):
            return False
        j = order[k]
        for a in sorted(agents, key=lambda a: (have[a] >= need[a], -worth[a][j] * need[a] // max(1, scale[a]), a)):
            have[a] += worth[a][j]
            owner[j] = a
            if dfs(k + 1):
                return True
            have[a] -= worth[a][j]
        del owner[j]
        return False

    if not dfs(0):
        return None
    result = {a: [] for a in agents}
    for j, a in owner.items():
        result[a].append(j)
    return {a: tuple(sorted(b)) for a, b in result.items()}


# ---------------------------------------------------------------------------
# The solver


def _structured(vals, agents, items):
    a1, a2, a3, a4 = agents
    cut = mms_exact(vals[a1], 4, items).witness
    rebuilt, kept, _ = _split_three(vals[a2], cut)
    _verify_split(vals[a2], cut, rebuilt)
    rebuilt = [list(b) for b in rebuilt]
    spare = [j for j in items if j not in set(cut[kept]) and all(j not in b for b in rebuilt)]
    rebuilt[0].extend(spare)
    rebuilt = [tuple(sorted(b)) for b in rebuilt]
    x = cut[kept]
    found = perfect_assignment(vals, agents, [x] + rebuilt)
    if found is not None:
        return found, "perfect"
    rebuilt.sort(key=lambda b: (-vals[a1].value(b), b))
    y, z, t = rebuilt
    frame = [x, y, z, t]
    liked = {k for k, b in enumerate(frame) if _accepts(vals[a3], b) or _accepts(vals[a4], b)}
    if liked <= {0, 1}:
        triple, kept2, _ = _split_three(vals[a1], frame)
        _verify_split(vals[a1], frame, triple)
        given = frame[kept2]
        if not _accepts(vals[a2], given):
            return None, "resplit-unusable"
        triple = [list(b) for b in triple]
        triple[0].extend(j for j in items if j not in set(given) and all(j not in b for b in triple))
        triple = [tuple(sorted(b)) for b in triple]
        for second, third in ((a3, a4), (a4, a3)):
            rest = three_agent_repair(vals, triple, a1, second, third)
            if rest is not None:
                rest[a2] = given
                return rest, "resplit"
        return None, "resplit-failed"
    if len(liked) == 1 and not liked & {0, 1}:
        for second, third in ((a3, a4), (a4, a3)):
            rest = three_agent_repair(vals, [y, z, t], a2, second, third)
            if rest is not None:
                rest[a1] = x
                return rest, "single-liked"
        return None, "single-liked-failed"
    return None, "uncovered-case"


def _small(vals, agents, items):
    if len(agents) == 1:
        return {agents[0]: tuple(items)}, "single"
    if len(agents) == 2:
        cutter, chooser = agents
        left, right = mms_exact(vals[cutter], 2, items).witness
        if vals[chooser].value(left) >= vals[chooser].value(right):
            return {chooser: left, cutter: right}, "cut-and-choose"
        return {chooser: right, cutter: left}, "cut-and-choose"
    return search_allocation(vals, agents, items), "search"


def solve_four(instance: Instance, mms: Sequence | None = None, *, check: bool = False) -> Allocation:
    """Allocation giving each of four additive agents 4/5 of their share."""
    if instance.n != 4:
        raise InputError(f"solve_four needs exactly 4 agents, got {instance.n}")
    additive_rows(instance)
    mms = agent_mms(instance) if mms is None else [as_value(x) for x in mms]
    unit = scale_to_unit(instance, [x if x > 0 else Fraction(1) for x in mms])
    vals = unit.valuations
    shares = [Fraction(1) if x > 0 else ZERO for x in mms]
    step = reduce_singletons(unit, FOUR_FIFTHS, shares)
    parts = list(step.satisfied)
    agents, items = list(step.agents), list(step.items)
    fallback = False
    if not agents:
        route = "reduced"
        if items:
            agent, bundle = parts[-1]
            parts[-1] = (agent, tuple(bundle) + tuple(items))
    else:
        if len(agents) == 4:
            result, route = _structured(vals, agents, items)
        else:
            result, route = _small(vals, agents, items)
        if result is not None and any(not _accepts(vals[a], result[a]) for a in agents):
            if check:
                raise InvariantViolation(f"route {route} produced a bundle below 4/5")
            result = None
        if result is None:
            fallback = True
            log.info("structured route %s failed; using complete search", route)
            result = search_allocation(vals, agents, items)
            if result is None:
                raise InvariantViolation("no allocation reaches 4/5 for every agent")
        used = {j for b in result.values() for j in b}
        result[agents[0]] = tuple(sorted(result[agents[0]] + tuple(j for j in items if j not in used)))
        parts.extend(result.items())
    allocation = assemble(instance.n, parts)
    allocation.meta.update(route=route, fallback=fallback, reductions=len(step.satisfied))
    return allocation
