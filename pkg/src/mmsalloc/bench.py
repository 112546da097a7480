"""Benchmark sweeps written as CSV.

A config is a JSON object ``{"experiments": [...]}``; each experiment has
``algorithm``, ``generator``, ``sizes`` (a list of ``[n, m]`` pairs),
``trials`` and an optional starting ``seed`` (default 0).  Trial ``t`` of a
size uses seed ``seed + t``.  Ratios are written as exact ``p/q`` strings and
``wall_time`` covers the solver call only, in seconds.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Iterator

from .errors import InputError
from .generate import generate
from .solvers import get_solver
from .values import format_value
from .verify import verify

COLUMNS = ("seed", "n", "m", "algorithm", "generator", "min_ratio", "steps", "wall_time", "status")


def trials(config: dict) -> Iterator[tuple[str, str, int, int, int]]:
    """Expand a config into ``(algorithm, generator, n, m, seed)`` in config order."""
    try:
        experiments = config.get("experiments", [])
        for exp in experiments:
            start = int(exp.get("seed", 0))
            for n, m in exp["sizes"]:
                for t in range(int(exp["trials"])):
                    yield exp["algorithm"], exp["generator"], int(n), int(m), start + t
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InputError(f"malformed bench config: {exc!r}") from exc


def run_trial(spec: tuple[str, str, int, int, int]) -> dict:
    algorithm, generator, n, m, seed = spec
    row = {"seed": seed, "n": n, "m": m, "algorithm": algorithm, "generator": generator,
           "min_ratio": "", "steps": "", "wall_time": "", "status": ""}
    try:
        solver = get_solver(algorithm)
        instance = generate(generator, n, m, seed)
        start = time.perf_counter()
        allocation = solver.run(instance)
        row["wall_time"] = f"{time.perf_counter() - start:.6f}"
        report = verify(instance, allocation, solver.alpha)
        row["min_ratio"] = format_value(report.min_ratio)
        row["steps"] = allocation.meta.get("steps", 0)
        row["status"] = "pass" if report.passed else "fail"
    except Exception as exc:  # one bad trial must not abort the sweep
        row["status"] = f"error: {type(exc).__name__}: {exc}"
    return row


def run_bench(config: dict, jobs: int = 1) -> list[dict]:
    specs = list(trials(config))
    if jobs > 1 and len(specs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_trial, specs))
    return [run_trial(s) for s in specs]


def to_csv(rows: Iterable[dict]) -> str:
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return out.getvalue()
