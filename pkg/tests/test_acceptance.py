"""Acceptance criteria, one test each.  Every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
"""

import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

from mmsalloc.additive import solve_half, solve_threequarters, solve_twothirds
from mmsalloc.bipartite import mcmwm
from mmsalloc.extremal import best_ratio, build_submodular_counterexample, build_xos_counterexample
from mmsalloc.four import FOUR_FIFTHS, solve_four
from mmsalloc.generate import generate
from mmsalloc.instance import Instance
from mmsalloc.mms import agent_mms
from mmsalloc.submodular import estimate_descent, solve_submodular_third
from mmsalloc.valuations import demand
from mmsalloc.verify import verify
from mmsalloc.xos import solve_xos_eighth

from lemma_checks import ALL as LEMMAS
from lemma_checks import random_graph
from oracles import adversarial_xos, brute_best_matching, brute_demand_profit, heavy_light_additive, random_xos


@pytest.fixture
def report(capsys):
    def emit(number: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        assert ok, detail
    return emit


def test_criterion_1_submodular_counterexample(report):
    start = time.perf_counter()
    found = {n: best_ratio(build_submodular_counterexample(n)) for n in (2, 3)}
    elapsed = time.perf_counter() - start
    ok = all(r.best_min_ratio == F(3, 4) and set(r.mms) == {2} for r in found.values()) and elapsed < 60
    ratios = ", ".join(f"n={n}: {r.best_min_ratio}" for n, r in found.items())
    report(1, ok, f"submodular pair instance best ratio {ratios} (expected 3/4), {elapsed:.2f}s")


def test_criterion_2_xos_counterexample(report):
    found = {n: best_ratio(build_xos_counterexample(n)) for n in (2, 3)}
    ok = all(r.best_min_ratio == F(1, 2) and set(r.mms) == {2} for r in found.values())
    ratios = ", ".join(f"n={n}: {r.best_min_ratio}" for n, r in found.items())
    report(2, ok, f"XOS pair instance best ratio {ratios} (expected 1/2)")


def additive_instances(count: int):
    rng = random.Random(2024)
    for t in range(count):
        if t % 2:
            yield heavy_light_additive(rng)
        else:
            n = rng.randint(2, 5)
            yield generate(["uniform-additive", "correlated-additive"][t % 4 // 2], n, rng.randint(n, 14), t)


def test_criterion_3_additive_guarantees(report):
    solvers = {"threequarters": (solve_threequarters, F(3, 4)), "twothirds": (solve_twothirds, F(2, 3)),
               "half": (solve_half, F(1, 2))}
    failures, total = [], 0
    start = time.perf_counter()
    for inst in additive_instances(200):
        mms = agent_mms(inst)
        total += 1
        for name, (solve, alpha) in solvers.items():
            if not verify(inst, solve(inst, mms), alpha, mms).passed:
                failures.append((name, inst.n, inst.m))
    elapsed = time.perf_counter() - start
    ok = not failures and total >= 200 and elapsed < 600
    report(3, ok, f"{total} additive instances x 3 algorithms, {len(failures)} failures, {elapsed:.1f}s")


def test_criterion_4_submodular_third(report):
    rng = random.Random(4)
    kinds = ["coverage", "budget-additive", "k-demand"]
    failures, total = [], 0
    for t in range(105):
        n = rng.randint(1, 4)
        inst = generate(kinds[t % 3], n, rng.randint(max(n, 2), 12), t)
        mms = agent_mms(inst)
        alloc = estimate_descent(inst, solve_submodular_third)
        total += 1
        if not verify(inst, alloc, F(1, 3), mms).passed or alloc.meta["steps"] > 2 * inst.n * inst.m:
            failures.append((kinds[t % 3], n, inst.m))
    report(4, not failures and total >= 100, f"{total} submodular instances at 1/3 with steps <= 2nm, {len(failures)} failures")


def test_criterion_5_xos_eighth(report):
    rng = random.Random(5)
    instances = []
    for _ in range(70):
        n = rng.randint(2, 4)
        m = rng.randint(n, 10)
        instances.append(Instance(tuple(random_xos(rng, m) for _ in range(n)), m))
    instances += [adversarial_xos(random.Random(100 + s)) for s in range(30)]
    failures = gains = 0
    for inst in instances:
        mms = agent_mms(inst)
        alloc = solve_xos_eighth(inst)
        gains += len(alloc.meta["gains"])
        floor_ok = all(g >= F(1, 10 * inst.n) for g in alloc.meta["gains"])
        failures += not (verify(inst, alloc, F(1, 8), mms).passed and floor_ok)
    report(5, not failures and len(instances) >= 100,
           f"{len(instances)} XOS instances at 1/8, {gains} local moves all above 1/(10n), {failures} failures")


def test_criterion_6_four_agents(report):
    rng = random.Random(6)
    failures = fallbacks = 0
    count = 120
    for t in range(count):
        inst = heavy_light_additive(rng, (4, 4), 12) if t % 2 else generate("uniform-additive", 4, rng.randint(4, 12), t)
        mms = agent_mms(inst)
        alloc = solve_four(inst, mms, check=True)
        fallbacks += alloc.meta["fallback"]
        failures += not verify(inst, alloc, FOUR_FIFTHS, mms).passed
    report(6, not failures, f"{count} four-agent instances at 4/5, {failures} failures, {fallbacks} fallback searches")


def test_criterion_7_lemma_suite(report):
    results = {name: check() for name, check in LEMMAS.items()}
    bad = {name: v for name, (_, v) in results.items() if v}
    checks = sum(c for c, _ in results.values())
    report(7, not bad, f"{len(results)} property families, {checks} checks, violations: {bad or 'none'}")


def test_criterion_8_oracles_match_brute_force(report):
    rng = random.Random(8)
    demand_bad = matching_bad = 0
    for _ in range(200):
        m = rng.randint(1, 7)
        v = random_xos(rng, m)
        prices = [F(rng.randint(0, 120)) for _ in range(m)]
        chosen = demand(v, prices)
        demand_bad += v.value(chosen) - sum((prices[j] for j in chosen), F(0)) != brute_demand_profit(v, prices)
    for _ in range(200):
        g = random_graph(rng, max_side=5, density=0.5)
        found = mcmwm(g)
        matching_bad += (len(found), found.weight(g)) != brute_best_matching(g.weights)
    report(8, not demand_bad and not matching_bad,
           f"demand oracle 200 cases ({demand_bad} mismatches), MCMWM 200 cases ({matching_bad} mismatches)")


if __name__ == "__main__":
    sys.exit(pytest.main([str(Path(__file__)), "-q"]))
