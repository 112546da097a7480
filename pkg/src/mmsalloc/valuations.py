"""Valuation families, the three oracles, ceiling/scaling wrappers and class checks.

Every valuation is an immutable object over the ground set ``range(m)``.  Values
are exact :class:`fractions.Fraction` objects.  Item ids outside the ground set
raise :class:`InputError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import ClassVar, Iterable, Sequence

from .errors import CapacityError, InputError, UnsupportedError
from .values import ZERO, as_value, common_denominator, format_value, parse_value

Bundle = tuple[int, ...]

CLASSES = ("monotone", "additive", "submodular", "xos", "subadditive")
CHECK_LIMIT = 12
TABULATED_LIMIT = 16


def as_bundle(items: Iterable[int], m: int | None = None) -> Bundle:
    """Return ``items`` as a sorted, duplicate-free tuple, validating the range."""
    result = tuple(sorted(set(items)))
    for j in result:
        if not isinstance(j, int) or isinstance(j, bool):
            raise InputError(f"item id {j!r} is not an integer")
        if j < 0 or (m is not None and j >= m):
            raise InputError(f"item id {j} out of range [0, {m})")
    return result


def _values_tuple(raw: Iterable, what: str) -> tuple[Fraction, ...]:
    try:
        return tuple(as_value(x) for x in raw)
    except InputError as exc:
        raise InputError(f"{what}: {exc}") from exc


class Valuation:
    """Base class.  Subclasses implement ``_value`` on a frozenset of item ids."""

    kind: ClassVar[str] = "abstract"
    m: int

    def value(self, bundle: Iterable[int]) -> Fraction:
        items = frozenset(bundle)
        for j in items:
            if not 0 <= j < self.m:
                raise InputError(f"item id {j} out of range [0, {self.m})")
        return self._value(items)

    def __call__(self, bundle: Iterable[int]) -> Fraction:
        return self.value(bundle)

    def _value(self, items: frozenset[int]) -> Fraction:  # pragma: no cover - abstract
        raise NotImplementedError

    def clauses(self) -> tuple[tuple[Fraction, ...], ...] | None:
        """Explicit additive clauses whose pointwise max is this function, if known cheaply."""
        return None

    def to_record(self) -> dict:
        raise UnsupportedError(f"{self.kind} valuations have no JSON form")


@dataclass(frozen=True)
class Additive(Valuation):
    values: tuple[Fraction, ...]
    kind: ClassVar[str] = "additive"

    def __post_init__(self):
        object.__setattr__(self, "values", _values_tuple(self.values, "additive values"))

    @property
    def m(self) -> int:
        return len(self.values)

    def _value(self, items):
        return sum((self.values[j] for j in items), ZERO)

    def clauses(self):
        return (self.values,)

    def to_record(self):
        return {"kind": self.kind, "values": [format_value(v) for v in self.values]}


@dataclass(frozen=True)
class KDemand(Valuation):
    """Sum of the ``k`` largest item values in the bundle."""

    values: tuple[Fraction, ...]
    k: int
    kind: ClassVar[str] = "k-demand"

    def __post_init__(self):
        object.__setattr__(self, "values", _values_tuple(self.values, "k-demand values"))
        if not isinstance(self.k, int) or self.k < 0:
            raise InputError(f"k must be a non-negative integer, got {self.k!r}")

    @property
    def m(self) -> int:
        return len(self.values)

    def _value(self, items):
        top = sorted((self.values[j] for j in items), reverse=True)[: self.k]
        return sum(top, ZERO)

    def to_record(self):
        return {"kind": self.kind, "values": [format_value(v) for v in self.values], "k": self.k}


@dataclass(frozen=True)
class BudgetAdditive(Valuation):
    values: tuple[Fraction, ...]
    budget: Fraction
    kind: ClassVar[str] = "budget-additive"

    def __post_init__(self):
        object.__setattr__(self, "values", _values_tuple(self.values, "budget-additive values"))
        object.__setattr__(self, "budget", as_value(self.budget))

    @property
    def m(self) -> int:
        return len(self.values)

    def _value(self, items):
        return min(self.budget, sum((self.values[j] for j in items), ZERO))

    def to_record(self):
        return {
            "kind": self.kind,
            "values": [format_value(v) for v in self.values],
            "budget": format_value(self.budget),
        }


@dataclass(frozen=True)
class Coverage(Valuation):
    """Weighted coverage: item ``j`` covers the elements ``covers[j]`` of a weighted universe."""

    covers: tuple[frozenset[int], ...]
    weights: tuple[Fraction, ...]
    kind: ClassVar[str] = "coverage"

    def __post_init__(self):
        object.__setattr__(self, "weights", _values_tuple(self.weights, "coverage weights"))
        covers = tuple(frozenset(c) for c in self.covers)
        for c in covers:
            for e in c:
                if not isinstance(e, int) or not 0 <= e < len(self.weights):
                    raise InputError(f"coverage element {e!r} outside the universe")
        object.__setattr__(self, "covers", covers)

    @property
    def m(self) -> int:
        return len(self.covers)

    def _value(self, items):
        covered: set[int] = set()
        for j in items:
            covered |= self.covers[j]
        return sum((self.weights[e] for e in covered), ZERO)

    def to_record(self):
        return {
            "kind": self.kind,
            "covers": [sorted(c) for c in self.covers],
            "weights": [format_value(w) for w in self.weights],
        }


@dataclass(frozen=True)
class XOSExplicit(Valuation):
    """Maximum over a finite list of additive clauses."""

    clause_list: tuple[tuple[Fraction, ...], ...]
    kind: ClassVar[str] = "xos-explicit"

    def __post_init__(self):
        clauses = tuple(_values_tuple(c, "xos clause") for c in self.clause_list)
        if not clauses:
            raise InputError("xos-explicit needs at least one clause")
        if len({len(c) for c in clauses}) != 1:
            raise InputError("xos clauses must all have length m")
        object.__setattr__(self, "clause_list", clauses)

    @property
    def m(self) -> int:
        return len(self.clause_list[0])

    def _value(self, items):
        return max(sum((c[j] for j in items), ZERO) for c in self.clause_list)

    def clauses(self):
        return self.clause_list

    def to_record(self):
        return {"kind": self.kind, "clauses": [[format_value(v) for v in c] for c in self.clause_list]}


@dataclass(frozen=True)
class Tabulated(Valuation):
    """Explicit table of 2^m values indexed by bitmask (bit j set iff item j is in the set)."""

    table: tuple[Fraction, ...]
    kind: ClassVar[str] = "tabulated"
    _m: int = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        table = _values_tuple(self.table, "tabulated table")
        m = len(table).bit_length() - 1
        if len(table) != 1 << m:
            raise InputError("tabulated table length must be a power of two")
        if m > TABULATED_LIMIT:
            raise CapacityError(f"tabulated valuations support m <= {TABULATED_LIMIT}")
        if table[0] != 0:
            raise InputError("tabulated valuation must satisfy f(empty) = 0")
        for mask in range(len(table)):
            for j in range(m):
                if not mask >> j & 1 and table[mask | 1 << j] < table[mask]:
                    raise InputError("tabulated valuation is not monotone")
        object.__setattr__(self, "table", table)
        object.__setattr__(self, "_m", m)

    @property
    def m(self) -> int:
        return self._m

    def _value(self, items):
        mask = 0
        for j in items:
            mask |= 1 << j
        return self.table[mask]

    def to_record(self):
        return {"kind": self.kind, "table": [format_value(v) for v in self.table]}


@dataclass(frozen=True)
class PairShape(Valuation):
    """Shared logic of the two pair-structured extremal functions.

    Items ``2i`` and ``2i+1`` form matched pairs.  The bundle is first rotated by
    ``shift`` (item ``j`` becomes ``(j + shift) mod m``).  Singletons are worth 1,
    sets of three or more items are worth 2, a matched pair is worth 2 and any
    other pair is worth ``mixed_pair``.
    """

    ground: int
    shift: int = 0
    mixed_pair: ClassVar[Fraction] = Fraction(3, 2)

    def __post_init__(self):
        if self.ground < 2 or self.ground % 2:
            raise InputError("pair-structured valuations need an even m >= 2")

    @property
    def m(self) -> int:
        return self.ground

    def _value(self, items):
        size = len(items)
        if size == 0:
            return ZERO
        if size == 1:
            return Fraction(1)
        if size > 2:
            return Fraction(2)
        a, b = ((j + self.shift) % self.ground for j in items)
        if a // 2 == b // 2:
            return Fraction(2)
        return self.mixed_pair

    def to_record(self):
        return {"kind": self.kind, "shift": self.shift}


class PairSubmodular(PairShape):
    kind: ClassVar[str] = "pair-submodular"
    mixed_pair: ClassVar[Fraction] = Fraction(3, 2)


class PairTable(PairShape):
    kind: ClassVar[str] = "pair-table"
    mixed_pair: ClassVar[Fraction] = Fraction(1)


@dataclass(frozen=True)
class Scaled(Valuation):
    inner: Valuation
    factor: Fraction
    kind: ClassVar[str] = "scaled"

    def __post_init__(self):
        object.__setattr__(self, "factor", as_value(self.factor))

    @property
    def m(self) -> int:
        return self.inner.m

    def _value(self, items):
        return self.factor * self.inner._value(items)

    def clauses(self):
        inner = self.inner.clauses()
        if inner is None:
            return None
        return tuple(tuple(self.factor * x for x in c) for c in inner)


@dataclass(frozen=True)
class Ceiling(Valuation):
    """``min(cap, inner(S))``."""

    inner: Valuation
    cap: Fraction
    kind: ClassVar[str] = "ceiling"

    def __post_init__(self):
        object.__setattr__(self, "cap", as_value(self.cap))

    @property
    def m(self) -> int:
        return self.inner.m

    def _value(self, items):
        return min(self.cap, self.inner._value(items))


def ceiling(valuation: Valuation, cap) -> Ceiling:
    return Ceiling(valuation, cap)


def scaled(valuation: Valuation, factor) -> Valuation:
    """Multiply a valuation by ``factor``, keeping explicit kinds explicit."""
    factor = as_value(factor)
    if factor == 1:
        return valuation
    if isinstance(valuation, Additive):
        return Additive(tuple(factor * v for v in valuation.values))
    if isinstance(valuation, XOSExplicit):
        return XOSExplicit(tuple(tuple(factor * v for v in c) for c in valuation.clause_list))
    if isinstance(valuation, Scaled):
        return scaled(valuation.inner, factor * valuation.factor)
    return Scaled(valuation, factor)


# ---------------------------------------------------------------------------
# Oracles


def evaluate(valuation: Valuation, bundle: Iterable[int]) -> Fraction:
    return valuation.value(bundle)


def _require_clauses(valuation: Valuation, what: str):
    clauses = valuation.clauses()
    if clauses is None:
        raise UnsupportedError(f"{what} needs an explicit-clause valuation, got {valuation.kind}")
    return clauses


def demand(valuation: Valuation, prices: Sequence, items: Iterable[int] | None = None) -> Bundle:
    """A bundle maximizing value minus price, restricted to ``items`` when given.

    Works clause by clause: inside a clause the best set is exactly the items
    whose clause value exceeds the price.  The best clause wins, ties going to
    the lowest clause index.
    """
    clauses = _require_clauses(valuation, "demand")
    m = valuation.m
    if len(prices) != m:
        raise InputError(f"expected {m} prices, got {len(prices)}")
    prices = [as_value(p) for p in prices]
    ground = range(m) if items is None else as_bundle(items, m)
    best: Bundle = ()
    best_profit = None
    for clause in clauses:
        chosen = tuple(j for j in ground if clause[j] > prices[j])
        profit = sum((clause[j] - prices[j] for j in chosen), ZERO)
        if best_profit is None or profit > best_profit:
            best, best_profit = chosen, profit
    return best


def xos_witness(valuation: Valuation, bundle: Iterable[int]) -> list[tuple[int, Fraction]]:
    """Per-item contributions of the clause attaining the value of ``bundle``."""
    clauses = _require_clauses(valuation, "xos_witness")
    items = as_bundle(bundle, valuation.m)
    if not items:
        return []
    best = max(range(len(clauses)), key=lambda k: (sum((clauses[k][j] for j in items), ZERO), -k))
    return [(j, clauses[best][j]) for j in items]


# ---------------------------------------------------------------------------
# Exhaustive class checks


def value_table(valuation: Valuation, items: Sequence[int] | None = None) -> list[Fraction]:
    """Values of all subsets of ``items``; bit k of the index selects ``items[k]``."""
    items = list(range(valuation.m)) if items is None else list(items)
    table = [ZERO] * (1 << len(items))
    for mask in range(1, len(table)):
        table[mask] = valuation._value(frozenset(items[k] for k in range(len(items)) if mask >> k & 1))
    return table


def integer_table(table: Sequence[Fraction]) -> tuple[list[int], int]:
    """Scale a table of fractions to integers; returns (ints, denominator)."""
    den = common_denominator(table)
    return [int(v * den) for v in table], den


def _check_monotone(t, m):
    return all(
        t[mask | 1 << j] >= t[mask] for mask in range(len(t)) for j in range(m) if not mask >> j & 1
    )


def _check_local(t, m, exact):
    # Submodularity is equivalent to the local condition on pairs i, j outside S.
    for mask in range(len(t)):
        free = [j for j in range(m) if not mask >> j & 1]
        for a, b in combinations(free, 2):
            lhs = t[mask | 1 << a] + t[mask | 1 << b]
            rhs = t[mask | 1 << a | 1 << b] + t[mask]
            if lhs < rhs or (exact and lhs != rhs):
                return False
    return True


def _check_subadditive(t, m):
    full = (1 << m) - 1
    for a in range(1, full + 1):
        rest = full ^ a
        b = rest
        while b:
            if t[a | b] > t[a] + t[b]:
                return False
            b = (b - 1) & rest
    return True


def xos_certificate(valuation: Valuation) -> list[tuple[Fraction, ...]]:
    """Additive clauses claimed to have ``valuation`` as their pointwise max.

    Explicit kinds return their own clauses.  For a ceiling of an explicit kind,
    each set contributes the clause attaining its inner value, restricted to the
    set and scaled down by min(1, cap / value).
    """
    explicit = valuation.clauses()
    if explicit is not None:
        return list(explicit)
    if isinstance(valuation, Ceiling) and valuation.inner.clauses() is not None:
        inner, cap, m = valuation.inner, valuation.cap, valuation.m
        family = {tuple([ZERO] * m)}
        for mask in range(1, 1 << m):
            members = [j for j in range(m) if mask >> j & 1]
            witness = xos_witness(inner, members)
            total = sum((c for _, c in witness), ZERO)
            factor = min(Fraction(1), cap / total) if total else ZERO
            row = [ZERO] * m
            for j, c in witness:
                row[j] = c * factor
            family.add(tuple(row))
        return sorted(family)
    raise UnsupportedError(f"XOS membership check is not supported for {valuation.kind}")


def _clause_table(clause, m, den):
    ints = [int(c * den) for c in clause]
    out = [0] * (1 << m)
    for mask in range(1, 1 << m):
        low = mask & -mask
        out[mask] = out[mask ^ low] + ints[low.bit_length() - 1]
    return out


def _check_xos(valuation: Valuation, table):
    m = valuation.m
    family = xos_certificate(valuation)
    den = common_denominator(list(table) + [c for clause in family for c in clause])
    target = [int(v * den) for v in table]
    best = [0] * (1 << m)
    for clause in family:
        sums = _clause_table(clause, m, den)
        for mask, s in enumerate(sums):
            if s > target[mask]:
                return False
            if s > best[mask]:
                best[mask] = s
    return best == target


def check_class(valuation: Valuation, cls: str) -> bool:
    """Exhaustively decide whether ``valuation`` belongs to class ``cls`` (m <= 12)."""
    if cls not in CLASSES:
        raise UnsupportedError(f"unknown valuation class {cls!r}")
    m = valuation.m
    if m > CHECK_LIMIT:
        raise CapacityError(f"exhaustive class checks support m <= {CHECK_LIMIT}, got {m}")
    if cls == "xos":
        # Raise for unsupported kinds before doing any work.
        if valuation.clauses() is None and not (
            isinstance(valuation, Ceiling) and valuation.inner.clauses() is not None
        ):
            raise UnsupportedError(f"XOS membership check is not supported for {valuation.kind}")
    table, _ = integer_table(value_table(valuation))
    if table[0] != 0:
        return False
    if cls == "monotone":
        return _check_monotone(table, m)
    if cls == "additive":
        return _check_local(table, m, exact=True)
    if cls == "submodular":
        return _check_local(table, m, exact=False)
    if cls == "subadditive":
        return _check_subadditive(table, m)
    return _check_xos(valuation, value_table(valuation))


# ---------------------------------------------------------------------------
# JSON records

_KINDS = {
    "additive": lambda rec, m: Additive(tuple(parse_value(v) for v in rec["values"])),
    "k-demand": lambda rec, m: KDemand(tuple(parse_value(v) for v in rec["values"]), int(rec["k"])),
    "budget-additive": lambda rec, m: BudgetAdditive(
        tuple(parse_value(v) for v in rec["values"]), parse_value(rec["budget"])
    ),
    "coverage": lambda rec, m: Coverage(
        tuple(frozenset(c) for c in rec["covers"]), tuple(parse_value(w) for w in rec["weights"])
    ),
    "xos-explicit": lambda rec, m: XOSExplicit(
        tuple(tuple(parse_value(v) for v in c) for c in rec["clauses"])
    ),
    "tabulated": lambda rec, m: Tabulated(tuple(parse_value(v) for v in rec["table"])),
    "pair-submodular": lambda rec, m: PairSubmodular(m, int(rec.get("shift", 0))),
    "pair-table": lambda rec, m: PairTable(m, int(rec.get("shift", 0))),
}


def valuation_from_record(record: dict, m: int) -> Valuation:
    try:
        kind = record["kind"]
        build = _KINDS[kind]
    except KeyError as exc:
        raise InputError(f"unknown or missing valuation kind in {record!r}") from exc
    try:
        valuation = build(record, m)
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed {kind} record: {exc}") from exc
    if valuation.m != m:
        raise InputError(f"{kind} valuation has ground size {valuation.m}, instance has m={m}")
    return valuation
