import random
from fractions import Fraction as F

from mmsalloc.instance import Instance
from mmsalloc.mms import agent_mms, mms_exact
from mmsalloc.reduction import check_pair_invariant, reduce_singletons
from mmsalloc.valuations import Additive


def test_threshold_met_with_equality():
    inst = Instance((Additive([3, 1, 1, 1, 1, 1]),), 6)
    step = reduce_singletons(inst, F(3, 4), [4])
    assert step.satisfied == ((0, (0,)),)


def test_nothing_to_reduce():
    inst = Instance((Additive([1, 1, 1, 1]), Additive([1, 1, 1, 1])), 4)
    step = reduce_singletons(inst, F(3, 4), [2, 2])
    assert step.satisfied == () and step.agents == (0, 1) and step.items == (0, 1, 2, 3)


def test_dominant_item_example():
    inst = Instance((Additive([9, 1, 1, 1]), Additive([1, 1, 1, 1])), 4)
    mms = agent_mms(inst)
    assert mms == [3, 2]
    step = reduce_singletons(inst, F(3, 4), mms)
    assert step.satisfied[0] == (0, (0,))
    assert step.agents == (1,)


def test_zero_share_agents_get_nothing():
    inst = Instance((Additive([0, 0, 5]), Additive([1, 1, 1])), 3)
    step = reduce_singletons(inst, F(3, 4), [0, 1])
    assert (0, ()) in step.satisfied


def test_remaining_agents_keep_their_share():
    rng = random.Random(12)
    for _ in range(150):
        n = rng.randint(2, 4)
        m = rng.randint(n, 9)
        inst = Instance(tuple(Additive([rng.randint(0, 40) for _ in range(m)]) for _ in range(n)), m)
        mms = agent_mms(inst)
        alpha = rng.choice([F(1, 2), F(2, 3), F(3, 4), F(4, 5)])
        step = reduce_singletons(inst, alpha, mms)
        for i, bundle in step.satisfied:
            assert inst.value(i, bundle) >= alpha * mms[i]
        for i in step.agents:
            assert max((inst.value(i, (j,)) for j in step.items), default=0) < alpha * mms[i]
            assert mms_exact(inst.valuations[i], len(step.agents), step.items).value >= mms[i]


def test_pair_invariant():
    inst = Instance((Additive([F(3, 8), F(3, 8), 0, 1]), Additive([F(1, 2), F(1, 2), 1, 0])), 4)
    assert check_pair_invariant(inst, [0], [(0, 1)], [1, 1])
    heavy = Instance((Additive([F(3, 8), F(3, 8), 0, 1]), Additive([F(9, 16), F(9, 16), 1, 0])), 4)
    assert not check_pair_invariant(heavy, [0], [(0, 1)], [1, 1])
    assert not check_pair_invariant(inst, [], [], [1, 1])
    assert not check_pair_invariant(inst, [0], [(0, 0)], [1, 1])
