import pytest

from gr1rs.expr import ExprError, Iff, Implies, Not, Or, parse_expr


def test_parse_simple():
    e = parse_expr("!(r1 & r2)")
    assert str(e) == "!(r1 & r2)"
    assert e.signals() == {"r1", "r2"}
    assert not e.has_next()


def test_precedence():
    # ! > & > | > -> > <->
    e = parse_expr("!a & b | c -> d <-> e")
    assert isinstance(e, Iff)
    assert isinstance(e.left, Implies)
    assert isinstance(e.left.left, Or)


def test_implies_right_assoc():
    e = parse_expr("a -> b -> c")
    assert isinstance(e, Implies)
    assert isinstance(e.right, Implies)
    # a -> (b -> c): false only when a & b & !c
    assert e.eval({"a": True, "b": True, "c": False}) is False
    assert e.eval({"a": True, "b": False, "c": False}) is True


def test_next_refs():
    e = parse_expr("r1 -> X(g1)")
    assert e.next_signals() == {"g1"}
    assert e.signals() == {"r1"}
    assert e.eval2({"r1": True}, {"g1": True}) is True
    assert e.eval2({"r1": True}, {"g1": False}) is False


def test_eval_examples():
    assert parse_expr("!(r1 & r2)").eval({"r1": True, "r2": False}) is True
    e = parse_expr("(r & g) | (!r & !g)")
    assert e.eval({"r": False, "g": False}) is True
    assert parse_expr("false").eval({"r": True}) is False


def test_unbound_signal():
    with pytest.raises(ExprError):
        parse_expr("a & b").eval({"a": True})


def test_not_binding():
    e = parse_expr("!a & b")
    assert isinstance(e.left, Not)
    assert e.eval({"a": False, "b": True}) is True


def test_syntax_errors_carry_position():
    with pytest.raises(ExprError) as ei:
        parse_expr("a &", line=4)
    assert ei.value.line == 4
    with pytest.raises(ExprError):
        parse_expr("a $ b")
    with pytest.raises(ExprError):
        parse_expr("(a & b")
    with pytest.raises(ExprError):
        parse_expr("X(a & b)")


def test_print_parse_roundtrip():
    samples = [
        "!(r1 & r2)",
        "a -> b -> c",
        "(a -> b) -> c",
        "a <-> b & !c | d",
        "(r & !g -> X(r)) & (!r & g -> !X(r))",
        "true | false",
        "!!a",
    ]
    names = ["r1", "r2", "a", "b", "c", "d", "r", "g"]
    for text in samples:
        e = parse_expr(text)
        e2 = parse_expr(str(e))
        # semantic equality over every assignment of the referenced signals
        sigs = sorted(e.signals() | e2.signals(), key=names.index)
        nxts = sorted(e.next_signals() | e2.next_signals(), key=names.index)
        for bits in range(1 << (len(sigs) + len(nxts))):
            cur = {s: bool((bits >> k) & 1) for k, s in enumerate(sigs)}
            nxt = {
                s: bool((bits >> (len(sigs) + k)) & 1) for k, s in enumerate(nxts)
            }
            assert e.eval2(cur, nxt) == e2.eval2(cur, nxt), text
