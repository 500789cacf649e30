from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from blasim.lattice import (
    BOTTOM, Universe, comparable, decode, element, encode, generated_by_enumeration, height,
    join, join_all, leq, member_of_generated, sort_key,
)

TAGS = [(o, k) for o in range(3) for k in range(2)]
elements = st.frozensets(st.sampled_from(TAGS))


def subset_joins(gens):
    """Brute force: the join of every nonempty subset of the generators."""
    gens = list(gens)
    out = set()
    for size in range(1, len(gens) + 1):
        for combo in combinations(gens, size):
            out.add(frozenset().union(*combo))
    return out


def test_join_and_order_basics():
    a, b = element((0, 0)), element((1, 0))
    assert join(a, b) == element((0, 0), (1, 0))
    assert leq(a, join(a, b))
    assert not leq(join(a, b), a)
    assert not comparable(a, b)
    assert comparable(a, join(a, b))
    assert height(join(a, b)) == 2
    assert join_all([]) == BOTTOM


@given(elements, elements, elements)
def test_join_is_a_semilattice(u, v, w):
    assert join(u, v) == join(v, u)
    assert join(u, join(v, w)) == join(join(u, v), w)
    assert join(u, u) == u
    assert leq(u, join(u, v)) and leq(v, join(u, v))
    # least upper bound
    if leq(u, w) and leq(v, w):
        assert leq(join(u, v), w)


@given(st.lists(elements, max_size=6), elements)
def test_member_of_generated_matches_brute_force(gens, v):
    assert member_of_generated(gens, v) == (v in subset_joins(gens))


@given(st.lists(elements, max_size=6))
def test_enumeration_helper_agrees_with_brute_force(gens):
    assert generated_by_enumeration(gens) == subset_joins(gens)


def test_generated_lattice_examples():
    a, b, c = element((0, 0)), element((1, 0)), element((2, 0))
    assert member_of_generated([a, b], join(a, b))
    assert not member_of_generated([a, b], join(a, c))
    # bottom is not a join of a nonempty subset unless it is itself a generator
    assert not member_of_generated([a], BOTTOM)
    assert member_of_generated([BOTTOM, a], BOTTOM)
    assert not member_of_generated([], BOTTOM)


@given(elements)
def test_encode_roundtrip(v):
    assert decode(encode(v)) == v


def test_encoding_is_canonical():
    assert encode(element((3, 2), (1, 0))) == "{1:0,3:2}"
    assert encode(BOTTOM) == "{}"
    assert decode(" { 1 : 0 , 3:2 } ") == element((1, 0), (3, 2))


@pytest.mark.parametrize("text", ["", "1:0", "{1}", "{a:b}", "{1:0,}", "{-1:0}"])
def test_decode_rejects_garbage(text):
    with pytest.raises(ValueError):
        decode(text)


def test_sort_key_orders_by_sorted_tags():
    vals = [element((1, 0)), element((0, 0), (2, 0)), BOTTOM, element((0, 0))]
    assert sorted(vals, key=sort_key) == [BOTTOM, element((0, 0)), element((0, 0), (2, 0)), element((1, 0))]


def test_universe_first_is_nonce_major():
    u = Universe.first(3, 5)
    assert u.tags == {(0, 0), (1, 0), (2, 0), (0, 1), (1, 1)}
    assert u.height == 5
    assert u.contains(element((1, 1)))
    assert not u.contains(element((2, 1)))
    assert u.top == u.tags
