import math
import random
from fractions import Fraction as F

import pytest

from mmsalloc.errors import EstimateTooHigh
from mmsalloc.generate import generate
from mmsalloc.instance import Instance
from mmsalloc.mms import agent_mms
from mmsalloc.submodular import Potential, estimate_descent, round_robin, solve_submodular_third
from mmsalloc.valuations import Additive, PairSubmodular
from mmsalloc.verify import verify

THIRD = F(1, 3)


def test_single_agent_takes_everything():
    inst = Instance((Additive([1, 2]),), 2)
    assert solve_submodular_third(inst, [3]).bundles == [(0, 1)]


def test_pair_function_instance():
    inst = Instance((PairSubmodular(4, 0), PairSubmodular(4, 1)), 4)
    alloc = estimate_descent(inst, solve_submodular_third, check=True)
    assert agent_mms(inst) == [2, 2]
    assert all(inst.value(i, alloc.bundles[i]) >= F(2, 3) for i in range(2))


def test_round_robin_by_id():
    assert round_robin([0, 2], [5, 1, 3]) == {0: {1, 5}, 2: {3}}


def test_potential_incremental_matches_recompute():
    rng = random.Random(3)
    inst = generate("coverage", 3, 8, 1)
    vals = {i: inst.valuations[i] for i in range(3)}
    pot = Potential(vals, F(2, 3) * 100, round_robin([0, 1, 2], range(8)))
    for _ in range(30):
        receiver, item = rng.randrange(3), rng.randrange(8)
        expected = pot.gain(receiver, (item,))
        before = pot.value
        assert pot.apply(receiver, (item,)) == expected
        assert pot.value == before + expected == pot.recompute()
        assert 0 <= pot.value <= 3 * pot.cap


def test_inflated_estimate_signals_agent():
    inst = Instance((Additive([1, 1, 1, 1]), Additive([1, 1, 1, 1])), 4)
    with pytest.raises(EstimateTooHigh) as info:
        solve_submodular_third(inst, [2, 40])
    assert info.value.agent == 1


def test_exact_estimates_need_no_descent():
    for seed in range(10):
        inst = generate("k-demand", 3, 8, seed)
        mms = agent_mms(inst)
        alloc = estimate_descent(inst, solve_submodular_third, mms)
        assert alloc.meta["descent_steps"] == 0


def test_doubled_estimates_descend_within_bound():
    for seed in range(10):
        inst = generate("budget-additive", 3, 8, seed)
        mms = agent_mms(inst)
        n = inst.n
        alloc = estimate_descent(inst, solve_submodular_third, [2 * x for x in mms])
        bound = n * math.ceil(math.log(2) / math.log(1 + 1 / (10 * n)))
        assert alloc.meta["descent_steps"] <= bound
        assert verify(inst, alloc, THIRD, mms).passed


def test_estimates_never_drop_below_share():
    for seed in range(25):
        kind = ["coverage", "k-demand", "budget-additive"][seed % 3]
        inst = generate(kind, 1 + seed % 4, 4 + seed % 8, seed)
        mms = agent_mms(inst)
        seen = []
        alloc = estimate_descent(inst, solve_submodular_third, on_step=seen.append, check=True)
        assert all(d[i] >= mms[i] for d in seen for i in range(inst.n))
        assert verify(inst, alloc, THIRD, mms).passed
        steps = alloc.meta["steps"]
        assert steps <= 2 * inst.n * inst.m
        assert all(g >= F(1, 3 * inst.m) for g in alloc.meta["gains"])
