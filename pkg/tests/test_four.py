import random
from fractions import Fraction as F

import pytest

from mmsalloc.errors import InputError, PreconditionError
from mmsalloc.four import FOUR_FIFTHS, _split_three, core, search_allocation, solve_four, split_three
from mmsalloc.generate import generate
from mmsalloc.instance import Instance
from mmsalloc.mms import agent_mms, mms_exact
from mmsalloc.valuations import Additive
from mmsalloc.verify import verify

from oracles import heavy_light_additive


def hundredths(*xs):
    return Additive([F(x) / 100 if isinstance(x, int) else F(x) for x in xs])


def test_core_single_item():
    v = Additive([FOUR_FIFTHS])
    assert core(v, (0,)).core == (0,)


def test_core_needs_every_small_item():
    v = hundredths(20, 30, 40)
    assert core(v, (0, 1, 2)).core == (0, 1, 2)


def test_core_two_halves():
    v = hundredths(50, 50)
    assert core(v, (0, 1)).core == (0, 1)


def test_core_below_threshold():
    with pytest.raises(PreconditionError):
        core(hundredths(10, 20), (0, 1))


SPLIT_CASES = {
    "own-partition": (
        ["19/25", "79/100", "31/50", "16/25", "39/50", "27/100", "21/100", "3/10"],
        [[0, 1], [2, 3], [4], [5, 6, 7]],
    ),
    "own-partition-wide": (
        ["77/100", "61/100", "31/50", "39/50", "19/25", "1/100", "1/100", "21/100", "13/50", "11/50"],
        [[0, 1], [2, 3], [4, 5, 6], [7, 8, 9]],
    ),
    "swap-item": (
        ["17/25", "7/10", "77/100", "67/100", "27/50", "1/25", "7/100", "53/100", "1/5", "3/100"],
        [[0, 1], [2, 3], [4, 5, 6], [7, 8, 9]],
    ),
    "small-chunk": (
        ["17/25", "71/100", "67/100", "59/100", "11/20", "1/50", "2/25", "2/25", "47/100", "23/100"],
        [[0, 1], [2, 3], [4, 5, 6, 7], [8, 9]],
    ),
}


@pytest.mark.parametrize("label", sorted(SPLIT_CASES))
def test_split_three_branches(label):
    values, parts = SPLIT_CASES[label]
    v = Additive([F(x) for x in values])
    _, untouched, case = _split_three(v, parts)
    assert case.endswith(label.removesuffix("-wide"))
    bundles = split_three(v, parts)
    assert all(v.value(b) >= FOUR_FIFTHS for b in bundles)
    used = [j for b in bundles for j in b]
    assert len(used) == len(set(used))
    assert not set(used) & set(parts[untouched])


def test_split_three_accepts_three_bundles_directly():
    v = hundredths(79, 21, 79, 21, 79, 21, 50, 50)
    parts = [[0, 1], [2, 3], [4, 5], [6, 7]]
    _, _, case = _split_three(v, parts)
    assert case == "three-accepted"


def test_split_three_rejects_large_items():
    with pytest.raises(PreconditionError):
        split_three(hundredths(90, 60, 80, 80, 80), [[0], [1], [2], [3, 4]])


def test_split_three_on_random_exact_partitions():
    rng = random.Random(0)
    done = 0
    while done < 500:
        m = rng.randint(4, 12)
        raw = Additive([rng.randint(1, 100) for _ in range(m)])
        share = mms_exact(raw, 4)
        if share.value == 0:
            continue
        v = Additive([x / share.value for x in raw.values])
        if max(v.values) >= FOUR_FIFTHS:
            continue
        done += 1
        bundles = split_three(v, share.witness)
        assert len(bundles) == 3


def test_dominant_items_are_reduced_first():
    rows = [[90, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1]] * 4
    inst = Instance(tuple(Additive(r) for r in rows), 11)
    alloc = solve_four(inst, check=True)
    assert alloc.meta["reductions"] >= 1
    assert verify(inst, alloc, FOUR_FIFTHS).passed


def test_random_instances_reach_four_fifths():
    rng = random.Random(1)
    fallbacks = 0
    for t in range(300):
        if t % 2:
            inst = generate(["uniform-additive", "correlated-additive"][t % 4 // 2], 4, rng.randint(4, 12), t)
        else:
            inst = heavy_light_additive(rng, (4, 4), 12)
        mms = agent_mms(inst)
        alloc = solve_four(inst, mms, check=True)
        fallbacks += alloc.meta["fallback"]
        assert verify(inst, alloc, FOUR_FIFTHS, mms).passed
    assert fallbacks == 0


def test_search_allocation_finds_feasible_split():
    vals = {0: Additive([1, 1, 1]), 1: Additive([1, 1, 1])}
    found = search_allocation(vals, [0, 1], [0, 1, 2], target=1)
    assert found is not None
    assert all(vals[a].value(found[a]) >= 1 for a in (0, 1))


def test_wrong_agent_count():
    with pytest.raises(InputError):
        solve_four(Instance((Additive([1, 2]),) * 3, 2))
