import itertools

import pytest

from gr1rs.expr import parse_expr
from gr1rs.model import (
    SpecError,
    Valuation,
    automaton_accepts,
    enumerate_valuations,
    eval_expr,
    invariant_to_automaton,
    parse_spec,
    print_spec,
    word_satisfies_invariant,
)

ARBITER2 = """\
inputs:  r1 r2
outputs: g1 g2
env_safety_inv:  !(r1 & r2)
sys_safety_inv:  !(g1 & g2)
sys_safety_inv:  r1 -> X(g1)
sys_safety_inv:  r2 -> X(g2)
"""

HANDSHAKE = """\
inputs:  r
outputs: g
env_safety_inv: (r & !g -> X(r)) & (!r & g -> !X(r))
env_fair: !r | !g
sys_safety_inv: (!r & !g -> !X(g)) & (r & g -> X(g))
sys_fair: (r & g) | (!r & !g)
"""


def test_parse_arbiter():
    spec = parse_spec(ARBITER2)
    assert spec.m == 0 and spec.n == 0
    assert spec.input_names == ["r1", "r2"]
    assert spec.output_names == ["g1", "g2"]
    assert len(spec.env_safety) == 1
    assert len(spec.sys_safety) == 3


def test_parse_handshake():
    spec = parse_spec(HANDSHAKE)
    assert spec.m == 1 and spec.n == 1
    assert len(spec.env_safety) == 1
    assert len(spec.sys_safety) == 1


def test_missing_outputs_rejected():
    with pytest.raises(SpecError):
        parse_spec("inputs: a\n")
    with pytest.raises(SpecError):
        parse_spec("inputs: a\noutputs:\n")


def test_duplicate_signals_rejected():
    with pytest.raises(SpecError):
        parse_spec("inputs: a a\noutputs: b\n")
    with pytest.raises(SpecError):
        parse_spec("inputs: a\noutputs: a\n")


def test_undeclared_signal_rejected():
    with pytest.raises(SpecError):
        parse_spec("inputs: a\noutputs: b\nsys_safety_inv: c\n")


def test_fairness_with_next_rejected():
    with pytest.raises(SpecError):
        parse_spec("inputs: a\noutputs: b\nsys_fair: X(b)\n")


def test_syntax_error_carries_line():
    with pytest.raises(SpecError) as ei:
        parse_spec("inputs: a\noutputs: b\nsys_safety_inv: b &\n")
    assert "line 3" in str(ei.value)


def test_explicit_automaton_block():
    text = (
        "inputs: a\n"
        "outputs: b\n"
        "sys_safety_automaton: states: s0 s1 ; init: s0 ; "
        "trans: s0 -(a)-> s1 ; trans: s0 -(!a)-> s0 ; trans: s1 -(b)-> s0\n"
    )
    spec = parse_spec(text)
    aut = spec.sys_safety[0]
    assert aut.states == ["s0", "s1"]
    assert aut.initial == "s0"
    assert aut.step("s0", {"a": True, "b": False}) == "s1"
    assert aut.step("s1", {"a": False, "b": False}) is None


def test_explicit_automaton_continuation_lines():
    text = (
        "inputs: a\n"
        "outputs: b\n"
        "sys_safety_automaton: states: s0 s1 ; init: s0\n"
        "  ; trans: s0 -(a)-> s1 ; trans: s0 -(!a)-> s0\n"
        "  ; trans: s1 -(true)-> s1\n"
    )
    spec = parse_spec(text)
    assert len(spec.sys_safety[0].transitions) == 3


def test_nondeterministic_automaton_rejected():
    text = (
        "inputs: a\n"
        "outputs: b\n"
        "sys_safety_automaton: states: s0 s1 ; init: s0 ; "
        "trans: s0 -(a)-> s1 ; trans: s0 -(a | b)-> s0\n"
    )
    with pytest.raises(SpecError) as ei:
        parse_spec(text)
    assert "nondeterministic" in str(ei.value)
    assert "s0" in str(ei.value)


def test_duplicate_states_rejected():
    text = (
        "inputs: a\noutputs: b\n"
        "sys_safety_automaton: states: s0 s0 ; init: s0 ; trans: s0 -(a)-> s0\n"
    )
    with pytest.raises(SpecError):
        parse_spec(text)


def test_eval_expr_valuation():
    v = Valuation.from_dict(("r1", "r2"), {"r1": True, "r2": False})
    assert eval_expr(parse_expr("!(r1 & r2)"), v) is True
    assert v["r1"] is True and v["r2"] is False
    with pytest.raises(SpecError):
        eval_expr(parse_expr("X(r1)"), v)
    with pytest.raises(SpecError):
        eval_expr(parse_expr("zz"), v)


def test_invariant_next_free_single_state():
    aut = invariant_to_automaton(parse_expr("!(r1 & r2)"), ["r1", "r2"])
    assert len(aut.states) == 1
    assert aut.step("s0", {"r1": True, "r2": True}) is None
    assert aut.step("s0", {"r1": True, "r2": False}) == "s0"


def test_invariant_true_complete():
    aut = invariant_to_automaton(parse_expr("true"), ["a"])
    assert len(aut.states) == 1
    assert aut.step("s0", {"a": True}) == "s0"
    assert aut.step("s0", {"a": False}) == "s0"


def test_invariant_with_next_remembers_valuation():
    phi = parse_expr("(!r & !g -> !X(g)) & (r & g -> X(g))")
    aut = invariant_to_automaton(phi, ["r", "g"])
    # init plus one state per (r, g) valuation
    assert len(aut.states) == 5
    # from (0,0) letters with g=1 have no transition
    s00 = aut.step(aut.initial, {"r": False, "g": False})
    assert s00 is not None
    assert aut.step(s00, {"r": True, "g": True}) is None
    assert aut.step(s00, {"r": True, "g": False}) is not None
    # the initial state admits every letter
    for letter in enumerate_valuations(["r", "g"]):
        assert aut.step(aut.initial, letter) is not None


def test_compiled_automata_deterministic_exhaustive():
    for text in (ARBITER2, HANDSHAKE):
        spec = parse_spec(text)
        names = spec.signal_names
        for aut in spec.env_safety + spec.sys_safety:
            for state in aut.states:
                for letter in enumerate_valuations(names):
                    assert len(aut.enabled(state, letter)) <= 1


def test_invariant_automaton_accepts_exactly_g_phi():
    # every word of length <= 6 over <= 3 signals, against the direct evaluator
    names = ["a", "b", "c"]
    formulas = [
        "a -> X(b)",
        "(a & b -> X(c)) & (!a -> X(!b))",
        "!(a & b)",
        "a <-> X(a)",
        "(a | b) -> X(a | c)",
    ]
    letters = list(enumerate_valuations(names))
    for text in formulas:
        phi = parse_expr(text)
        aut = invariant_to_automaton(phi, names)
        for length in range(0, 4):
            for word in itertools.product(letters, repeat=length):
                assert automaton_accepts(aut, list(word)) == word_satisfies_invariant(
                    phi, list(word)
                ), (text, word)
        # longer words, sampled deterministically
        import random

        rng = random.Random(1)
        for _ in range(300):
            word = [rng.choice(letters) for _ in range(rng.randint(5, 6))]
            assert automaton_accepts(aut, word) == word_satisfies_invariant(
                phi, word
            ), (text, word)


def _enabled_map(spec):
    """(part name, state, letter) -> target, over the full signal space."""
    out = {}
    names = spec.signal_names
    for role, parts in (("e", spec.env_safety), ("s", spec.sys_safety)):
        for pi, aut in enumerate(parts):
            for state in aut.states:
                for letter in enumerate_valuations(names):
                    key = (role, pi, state, tuple(sorted(letter.items())))
                    out[key] = aut.step(state, letter)
    return out


def test_print_parse_roundtrip_semantics():
    for text in (ARBITER2, HANDSHAKE):
        spec = parse_spec(text)
        spec2 = parse_spec(print_spec(spec))
        assert _enabled_map(spec) == _enabled_map(spec2)
        assert [str(e) for e in spec.env_fair] == [str(e) for e in spec2.env_fair]
        assert [str(e) for e in spec.sys_fair] == [str(e) for e in spec2.sys_fair]


def test_roundtrip_with_explicit_block():
    text = (
        "inputs: a\n"
        "outputs: b\n"
        "env_safety_automaton: states: p q ; init: p ; "
        "trans: p -(a)-> q ; trans: q -(!a & b)-> p\n"
        "sys_fair: a | b\n"
    )
    spec = parse_spec(text)
    spec2 = parse_spec(print_spec(spec))
    assert _enabled_map(spec) == _enabled_map(spec2)
