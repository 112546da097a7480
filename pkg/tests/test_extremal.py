from fractions import Fraction as F

import pytest

from mmsalloc.errors import CapacityError, InputError
from mmsalloc.extremal import (
    best_ratio,
    build_submodular_counterexample,
    build_xos_counterexample,
    pair_clauses,
)
from mmsalloc.instance import Instance
from mmsalloc.mms import agent_mms
from mmsalloc.valuations import Additive, PairTable, Tabulated, XOSExplicit, check_class, value_table


def test_builder_shapes_and_rotation():
    inst = build_submodular_counterexample(3)
    assert (inst.n, inst.m) == (3, 6)
    first, last = inst.valuations[0], inst.valuations[2]
    assert first.value((0, 1)) == 2 and first.value((1, 2)) == F(3, 2)
    assert last.value((1, 2)) == 2 and last.value((0, 1)) == F(3, 2)


def test_clause_rotation():
    base, shifted = XOSExplicit(pair_clauses(6, 0)), XOSExplicit(pair_clauses(6, 1))
    assert value_table(shifted) == [base.value(tuple((j + 1) % 6 for j in range(6) if mask >> j & 1)) for mask in range(64)]


@pytest.mark.parametrize("n", [2, 3])
def test_every_agent_has_share_two(n):
    assert agent_mms(build_submodular_counterexample(n)) == [2] * n
    assert agent_mms(build_xos_counterexample(n)) == [2] * n


def test_pair_function_is_submodular():
    inst = build_submodular_counterexample(2)
    assert all(check_class(v, "submodular") for v in inst.valuations)
    assert all(check_class(v, "xos") for v in build_xos_counterexample(2).valuations)


@pytest.mark.parametrize("n", [2, 3])
def test_submodular_best_ratio(n):
    assert best_ratio(build_submodular_counterexample(n)).best_min_ratio == F(3, 4)


@pytest.mark.parametrize("n", [2, 3])
def test_xos_best_ratio(n):
    assert best_ratio(build_xos_counterexample(n)).best_min_ratio == F(1, 2)


def test_identical_unit_items_reach_one():
    inst = Instance((Additive([1, 1, 1]),) * 3, 3)
    report = best_ratio(inst)
    assert report.best_min_ratio == 1
    assert sorted(len(b) for b in report.witness.bundles) == [1, 1, 1]


def test_zero_share_counts_as_satisfied():
    inst = Instance((Additive([1]), Additive([1])), 1)
    assert best_ratio(inst).best_min_ratio == 1


def test_enumeration_limit():
    with pytest.raises(CapacityError):
        best_ratio(Instance((Additive([1] * 14),) * 3, 14))


def test_small_n_rejected():
    with pytest.raises(InputError):
        build_submodular_counterexample(1)
    with pytest.raises(InputError):
        build_xos_counterexample(1)


@pytest.mark.parametrize("m", [4, 6, 8, 10])
def test_pair_clause_family_matches_case_table(m):
    assert value_table(XOSExplicit(pair_clauses(m))) == value_table(Tabulated(value_table(PairTable(m))))


def test_case_table_exceeds_any_clause_on_three_unmatched_items():
    # {0, 2, 4} is worth 2 under the case table, but its three mixed pairs are each
    # worth 1, so a clause reaching 2 on the triple would give some pair more than 1.
    g = PairTable(6)
    assert g.value((0, 2, 4)) == 2
    assert [g.value(p) for p in ((0, 2), (0, 4), (2, 4))] == [1, 1, 1]
    assert sum(g.value(p) for p in ((0, 2), (0, 4), (2, 4))) / 2 < g.value((0, 2, 4))
    assert XOSExplicit(pair_clauses(6)).value((0, 2, 4)) == F(3, 2)
