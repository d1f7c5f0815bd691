from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kex.instance import (TAU, InstanceError, Order, degrees, make_instance, parse_instance,
                          reindex, relabel_map, serialize_instance)
from kex.oracle import brute_force_optimum

from conftest import random_instance


def test_appendix_shape(ex):
    assert ex.rdp_count == 4 and ex.ndd_count == 2
    assert len(ex.arcs_rr) == 6 and len(ex.arcs_nr) == 2
    assert ex.weight(3, TAU) == 1
    assert ex.succ(4) == (1, 2)


def test_degrees_appendix(ex):
    d = degrees(ex)
    assert [d[v] for v in ex.rdps] == [(2, 2, 4), (3, 1, 4), (1, 1, 2), (2, 2, 4)]


def test_degree_desc_order(ex):
    # ties by label: 1, 2 and 4 all have total degree 4
    _, perm = reindex(ex, Order.DEGREE_DESC)
    assert perm == (1, 2, 4, 3)
    _, perm = reindex(ex, Order.DEGREE_ASC)
    assert perm[0] == 3


@pytest.mark.parametrize("bad", [
    dict(rdp_count=2, ndd_count=0, arcs=[(1, 3)]),
    dict(rdp_count=2, ndd_count=1, arcs=[(1, 3)]),        # arc into an NDD
    dict(rdp_count=2, ndd_count=0, arcs=[(1, 1)]),        # self-loop not allowed
    dict(rdp_count=2, ndd_count=0, arcs=[(1, 2, -1)]),
    dict(rdp_count=-1, ndd_count=0, arcs=[]),
])
def test_invalid_instances(bad):
    with pytest.raises(InstanceError):
        make_instance(**bad)


def test_parse_errors():
    with pytest.raises(InstanceError):
        parse_instance("{not json")
    with pytest.raises(InstanceError):
        parse_instance("[]")


def test_fraction_weights_roundtrip():
    inst = make_instance(2, 0, [(1, 2, Fraction(3, 2)), (2, 1, 0.25)])
    back = parse_instance(serialize_instance(inst))
    assert back == inst
    assert back.arcs[(1, 2)] == Fraction(3, 2)
    assert not inst.is_integral()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(0, 9), st.integers(0, 3), st.booleans())
def test_roundtrip_random(seed, R, N, weighted):
    inst = random_instance(seed, R=R, N=min(N, R), weighted=weighted)
    assert parse_instance(serialize_instance(inst)) == inst


def test_serialize_canonical(ex):
    assert serialize_instance(ex) == serialize_instance(parse_instance(serialize_instance(ex)))


@pytest.mark.parametrize("order", list(Order))
def test_reindex_isomorphic(order):
    inst = random_instance(11, R=8, N=2, weighted=True)
    new, perm = reindex(inst, order)
    assert len(new.arcs) == len(inst.arcs)
    assert sorted(degrees(new).values()) == sorted(degrees(inst).values())
    back = relabel_map(new, perm)
    for (u, v), w in new.arcs.items():
        assert inst.arcs[(back[u], back[v])] == w
    assert brute_force_optimum(new, 3, 3).value == brute_force_optimum(inst, 3, 3).value


def test_importer_hook(ex):
    from kex.instance import IMPORTERS, load_instance, register_importer, serialize_instance
    assert load_instance(serialize_instance(ex)).arcs == ex.arcs
    with pytest.raises(InstanceError):
        load_instance("1 2\n3 4\n")
    register_importer("pairs", lambda t: t.startswith("#pairs"), lambda t: ex)
    try:
        assert load_instance("#pairs\n") is ex
    finally:
        IMPORTERS.pop("pairs")
