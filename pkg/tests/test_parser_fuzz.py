"""The parser either succeeds or raises ParseError -- nothing else."""

import random
import string

from hypothesis import given, settings, strategies as st

from swhile.parser import ParseError, parse_program

_TOKENS = [
    "x", "y", "tt", "ff", "if", "then", "else", "while", "do", "wait",
    "bernoulli", "unif", "exp", "normal", "ln", "sqrt", "pi", ":=", ";",
    ",", "(", ")", "{", "}", "<=", "&&", "||", "+", "-", "*", "/", "'",
    "=", "++", "--", "0", "1", "2.5", "1e3", "//", "\n",
]


@given(st.text(alphabet=string.printable, max_size=60))
@settings(max_examples=300)
def test_arbitrary_text_never_crashes(text):
    try:
        parse_program(text)
    except ParseError:
        pass


@given(st.lists(st.sampled_from(_TOKENS), max_size=25))
@settings(max_examples=500)
def test_token_soup_never_crashes(tokens):
    try:
        parse_program(" ".join(tokens))
    except ParseError:
        pass


def test_deep_nesting_is_handled():
    # pathological but legal nesting should still parse (or error), not
    # exhaust the interpreter stack
    depth = 50
    source = "x := " + "(" * depth + "1" + ")" * depth
    program, table = parse_program(source)
    assert table.names == ("x",)

    nested = "x := 1"
    for _ in range(30):
        nested = f"if tt then {{ {nested} }} else x := 2"
    parse_program(nested)


def test_reparse_of_mutated_sources_never_crashes():
    rng = random.Random(8)
    base = "p := 10 ; v := 0 ; while tt do { d := unif(0, 1) ; p' = v, v' = -9.8 for d ; v := -v }"
    for _ in range(300):
        chars = list(base)
        for _ in range(rng.randint(1, 4)):
            op = rng.random()
            pos = rng.randrange(len(chars))
            if op < 0.4:
                del chars[pos]
            elif op < 0.8:
                chars[pos] = rng.choice("xyzv(){};:=<&|+-*/'0123456789 ")
            else:
                chars.insert(pos, rng.choice("(){};,'"))
        try:
            parse_program("".join(chars))
        except ParseError:
            pass
