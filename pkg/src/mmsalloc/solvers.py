"""Named solvers with the fraction of the share each one guarantees."""

from __future__ import annotations

from fractions import Fraction
from typing import Callable, NamedTuple

from .additive import solve_half, solve_threequarters, solve_twothirds
from .errors import InputError
from .four import solve_four
from .instance import Allocation, Instance
from .submodular import estimate_descent, solve_submodular_third
from .xos import solve_xos_eighth


class Solver(NamedTuple):
    run: Callable[[Instance], Allocation]
    alpha: Fraction


SOLVERS: dict[str, Solver] = {
    "half": Solver(solve_half, Fraction(1, 2)),
    "twothirds": Solver(solve_twothirds, Fraction(2, 3)),
    "threequarters": Solver(solve_threequarters, Fraction(3, 4)),
    "four-agents": Solver(solve_four, Fraction(4, 5)),
    "submodular-third": Solver(lambda inst: estimate_descent(inst, solve_submodular_third), Fraction(1, 3)),
    "xos-eighth": Solver(solve_xos_eighth, Fraction(1, 8)),
}


def get_solver(name: str) -> Solver:
    try:
        return SOLVERS[name]
    except KeyError:
        raise InputError(f"unknown algorithm {name!r}; choose from {', '.join(SOLVERS)}") from None
