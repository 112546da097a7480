"""Seeded random instances.

All base numbers are integers in [0, 100] drawn from ``random.Random(seed)``.

* ``uniform-additive``: every value uniform on 0..100.
* ``correlated-additive``: one common value per item uniform on 0..100, each
  agent adds independent noise uniform on -10..10 (clipped to 0..100).
* ``k-demand``: uniform values, ``k`` uniform on 1..max(1, m // n).
* ``budget-additive``: uniform values, budget uniform between a quarter and
  the whole of the agent's total.
* ``coverage``: a universe of ``2m`` elements with weights uniform on 1..100;
  each item covers each element independently with probability 1/4.
* ``xos-clauses``: 1 to 5 clauses; each clause keeps each item with
  probability 1/2 at a value uniform on 1..100 (zero otherwise).
"""

from __future__ import annotations

import random
from fractions import Fraction

from .errors import InputError
from .instance import Instance
from .valuations import Additive, BudgetAdditive, Coverage, KDemand, XOSExplicit

KINDS = ("uniform-additive", "correlated-additive", "k-demand", "budget-additive", "coverage", "xos-clauses")


def _row(rng: random.Random, m: int) -> list[Fraction]:
    return [Fraction(rng.randint(0, 100)) for _ in range(m)]


def generate(kind: str, n: int, m: int, seed: int) -> Instance:
    if n < 1 or m < 1:
        raise InputError("n and m must be at least 1")
    rng = random.Random(seed)
    if kind == "uniform-additive":
        vals = [Additive(_row(rng, m)) for _ in range(n)]
    elif kind == "correlated-additive":
        base = [rng.randint(0, 100) for _ in range(m)]
        vals = [Additive([Fraction(min(100, max(0, b + rng.randint(-10, 10)))) for b in base]) for _ in range(n)]
    elif kind == "k-demand":
        vals = [KDemand(_row(rng, m), rng.randint(1, max(1, m // n))) for _ in range(n)]
    elif kind == "budget-additive":
        vals = []
        for _ in range(n):
            row = _row(rng, m)
            total = int(sum(row))
            vals.append(BudgetAdditive(row, Fraction(rng.randint(total // 4, total))))
    elif kind == "coverage":
        vals = []
        for _ in range(n):
            weights = [Fraction(rng.randint(1, 100)) for _ in range(2 * m)]
            covers = [frozenset(e for e in range(2 * m) if rng.random() < 0.25) for _ in range(m)]
            vals.append(Coverage(covers, weights))
    elif kind == "xos-clauses":
        vals = []
        for _ in range(n):
            clauses = [
                [Fraction(rng.randint(1, 100)) if rng.random() < 0.5 else Fraction(0) for _ in range(m)]
                for _ in range(rng.randint(1, 5))
            ]
            vals.append(XOSExplicit(clauses))
    else:
        raise InputError(f"unknown generator {kind!r}; choose from {', '.join(KINDS)}")
    return Instance(tuple(vals), m)
