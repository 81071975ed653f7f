import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfx.forest import (BNode, CONCAT, NodeKind, Tree, attr, check_forest,
                        coalesce_text, elem, eval_binary, fcns, fcns_inverse,
                        node_count, parse_term, print_term, text)

from util import random_forest


def test_fcns_base_case():
    assert fcns(()) is None


def test_fcns_single_nested():
    # a(b()) encodes as a(b(eps, eps), eps)
    f = (elem("a", elem("b")),)
    b = fcns(f)
    assert b == BNode("a", NodeKind.ELEMENT, BNode("b"), None)


def test_fcns_two_siblings():
    # hand application of the defining equation
    f = (elem("a"), elem("b"))
    assert fcns(f) == BNode("a", NodeKind.ELEMENT, None,
                            BNode("b", NodeKind.ELEMENT, None, None))


def test_fcns_inverse_examples():
    assert fcns_inverse(None) == ()
    b = BNode("a", NodeKind.ELEMENT, BNode("b"), None)
    assert fcns_inverse(b) == (elem("a", elem("b")),)


def test_fcns_inverse_rejects_concat():
    with pytest.raises(ValueError):
        fcns_inverse(BNode(CONCAT))


def test_fcns_roundtrip_random():
    rng = random.Random(7)
    for _ in range(100):
        f = random_forest(rng, budget=20, attrs=True)
        assert fcns_inverse(fcns(f)) == f


def test_fcns_size_relation():
    # node count of fcns(f) = node count of f (every node maps to one node)
    rng = random.Random(8)
    for _ in range(50):
        f = random_forest(rng, budget=15)

        def bcount(b):
            return 0 if b is None else 1 + bcount(b.left) + bcount(b.right)

        assert bcount(fcns(f)) == node_count(f)


def test_eval_binary_concat():
    b = BNode(CONCAT, NodeKind.ELEMENT, BNode("a"), BNode("b"))
    assert eval_binary(b) == (elem("a"), elem("b"))


def test_eval_binary_empty():
    assert eval_binary(None) == ()


def test_eval_identity_on_fcns():
    rng = random.Random(9)
    for _ in range(50):
        f = random_forest(rng, budget=15)
        assert eval_binary(fcns(f)) == f


def test_eval_binary_nested_concats():
    # @(q-free pieces): concatenation of three pieces in order
    pieces = [BNode("a", NodeKind.ELEMENT, BNode("x"), None),
              BNode("y"), BNode("b")]
    b = BNode(CONCAT, NodeKind.ELEMENT, pieces[0],
              BNode(CONCAT, NodeKind.ELEMENT, pieces[1], pieces[2]))
    assert eval_binary(b) == (elem("a", elem("x")), elem("y"), elem("b"))


def test_term_examples():
    assert parse_term("a(b())") == (elem("a", elem("b")),)
    assert parse_term("") == ()
    assert parse_term("eps") == ()
    assert print_term(()) == "eps"
    assert print_term((elem("a", elem("b")),)) == "a(b())"


def test_term_text_and_attributes():
    f = (elem("book", attr("isbn", "123"), elem("author", text("Knuth"))),)
    s = print_term(f)
    assert s == 'book(@isbn(#"123") author(#"Knuth"))'
    assert parse_term(s) == f


def test_term_quoting():
    f = (elem("weird label", text('say "hi"')),)
    assert parse_term(print_term(f)) == f


def test_term_errors_have_positions():
    with pytest.raises(ValueError) as ei:
        parse_term("a(b(")
    assert "offset" in str(ei.value)


@settings(max_examples=60)
@given(st.integers(0, 10 ** 9))
def test_term_roundtrip_random(seed):
    f = random_forest(random.Random(seed), budget=14, attrs=True)
    assert parse_term(print_term(f)) == f


def test_check_forest_flags_violations():
    ok = (elem("a", text("x"), elem("b")),)
    assert check_forest(ok) == []
    bad = (Tree("t", NodeKind.TEXT, (elem("a"),)),)
    assert check_forest(bad)
    adjacent = (elem("a", text("x"), text("y")),)
    assert check_forest(adjacent)
    assert check_forest((Tree(CONCAT, NodeKind.ELEMENT, ()),))


def test_coalesce_text():
    f = (elem("a", text("x"), text("y"), elem("b"), text("z")),)
    assert coalesce_text(f) == (elem("a", text("xy"), elem("b"), text("z")),)
