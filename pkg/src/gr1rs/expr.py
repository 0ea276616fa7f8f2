"""Boolean expressions over signals, with optional next-step references.

Grammar (precedence high to low):  !  &  |  ->  <->
`->` is right-associative, `<->` left-associative.  A next-step
reference is written ``X(sig)`` and is only legal inside safety
invariants; fairness formulas must be free of them.
"""

from __future__ import annotations

from dataclasses import dataclass


class ExprError(ValueError):
    """Raised on malformed expression text."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        super().__init__(f"{message} (line {line}, col {col})")


class BoolExpr:
    """Base class of expression nodes.  Immutable."""

    def signals(self) -> set[str]:
        """Names referenced at the current step."""
        out: set[str] = set()
        self._collect(out, set())
        return out

    def next_signals(self) -> set[str]:
        """Names referenced at the next step (inside X)."""
        cur: set[str] = set()
        nxt: set[str] = set()
        self._collect(cur, nxt)
        return nxt

    def all_signals(self) -> set[str]:
        cur: set[str] = set()
        nxt: set[str] = set()
        self._collect(cur, nxt)
        return cur | nxt

    def has_next(self) -> bool:
        return bool(self.next_signals())

    def _collect(self, cur: set[str], nxt: set[str]) -> None:
        raise NotImplementedError

    def eval(self, env: dict[str, bool]) -> bool:
        """Evaluate without next-step refs; raises KeyError-style ExprError
        on unbound signals."""
        return self.eval2(env, None)

    def eval2(self, cur: dict[str, bool], nxt: dict[str, bool] | None) -> bool:
        raise NotImplementedError

    # precedence levels used by __str__: higher binds tighter
    _prec = 100

    def _fmt(self, parent_prec: int) -> str:
        raise NotImplementedError

    def __str__(self) -> str:
        return self._fmt(0)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self})"

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._key()))

    def _key(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Lit(BoolExpr):
    value: bool
    _prec = 100

    def _collect(self, cur, nxt):
        pass

    def eval2(self, cur, nxt):
        return self.value

    def _fmt(self, p):
        return "true" if self.value else "false"

    def _key(self):
        return self.value


@dataclass(frozen=True, eq=False)
class Ref(BoolExpr):
    name: str
    _prec = 100

    def _collect(self, cur, nxt):
        cur.add(self.name)

    def eval2(self, cur, nxt):
        if self.name not in cur:
            raise ExprError(f"unbound signal '{self.name}'")
        return cur[self.name]

    def _fmt(self, p):
        return self.name

    def _key(self):
        return self.name


@dataclass(frozen=True, eq=False)
class NextRef(BoolExpr):
    name: str
    _prec = 100

    def _collect(self, cur, nxt):
        nxt.add(self.name)

    def eval2(self, cur, nxt):
        if nxt is None:
            raise ExprError(f"next-step reference X({self.name}) not allowed here")
        if self.name not in nxt:
            raise ExprError(f"unbound signal '{self.name}'")
        return nxt[self.name]

    def _fmt(self, p):
        return f"X({self.name})"

    def _key(self):
        return self.name


@dataclass(frozen=True, eq=False)
class Not(BoolExpr):
    arg: BoolExpr
    _prec = 50

    def _collect(self, cur, nxt):
        self.arg._collect(cur, nxt)

    def eval2(self, cur, nxt):
        return not self.arg.eval2(cur, nxt)

    def _fmt(self, p):
        s = "!" + self.arg._fmt(self._prec)
        return s if self._prec >= p else f"({s})"

    def _key(self):
        return self.arg


class _BinOp(BoolExpr):
    op = "?"

    def __init__(self, left: BoolExpr, right: BoolExpr):
        self.left = left
        self.right = right

    def _collect(self, cur, nxt):
        self.left._collect(cur, nxt)
        self.right._collect(cur, nxt)

    def _key(self):
        return (self.left, self.right)

    def _fmt(self, p):
        # left operand printed at own precedence, right one notch up for
        # left-assoc chains (mirrored for the right-assoc implication)
        lp, rp = self._child_prec()
        s = f"{self.left._fmt(lp)} {self.op} {self.right._fmt(rp)}"
        return s if self._prec >= p else f"({s})"

    def _child_prec(self):
        return (self._prec, self._prec + 1)


class And(_BinOp):
    op = "&"
    _prec = 40

    def eval2(self, cur, nxt):
        return self.left.eval2(cur, nxt) and self.right.eval2(cur, nxt)


class Or(_BinOp):
    op = "|"
    _prec = 30

    def eval2(self, cur, nxt):
        return self.left.eval2(cur, nxt) or self.right.eval2(cur, nxt)


class Implies(_BinOp):
    op = "->"
    _prec = 20

    def eval2(self, cur, nxt):
        return (not self.left.eval2(cur, nxt)) or self.right.eval2(cur, nxt)

    def _child_prec(self):
        # right-associative
        return (self._prec + 1, self._prec)


class Iff(_BinOp):
    op = "<->"
    _prec = 10

    def eval2(self, cur, nxt):
        return self.left.eval2(cur, nxt) == self.right.eval2(cur, nxt)


_TOKEN_CHARS = set("!&|()<->")


def _tokenize(text: str, line: int):
    """Yield (kind, value, col) tuples.  kind in {id, op, lpar, rpar, X}."""
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        col = i + 1
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            i = j
            yield ("id", word, col)
        elif text.startswith("<->", i):
            yield ("op", "<->", col)
            i += 3
        elif text.startswith("->", i):
            yield ("op", "->", col)
            i += 2
        elif c in "!&|":
            yield ("op", c, col)
            i += 1
        elif c == "(":
            yield ("lpar", c, col)
            i += 1
        elif c == ")":
            yield ("rpar", c, col)
            i += 1
        else:
            raise ExprError(f"unexpected character {c!r}", line, col)
    yield ("end", "", n + 1)


class _Parser:
    def __init__(self, text: str, line: int):
        self.tokens = list(_tokenize(text, line))
        self.pos = 0
        self.line = line

    def peek(self):
        return self.tokens[self.pos]

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise ExprError(f"expected {want!r}, got {tok[1]!r}", self.line, tok[2])
        return tok

    def parse(self) -> BoolExpr:
        e = self.iff()
        tok = self.peek()
        if tok[0] != "end":
            raise ExprError(f"unexpected token {tok[1]!r}", self.line, tok[2])
        return e

    def iff(self) -> BoolExpr:
        e = self.imp()
        while self.peek()[:2] == ("op", "<->"):
            self.take()
            e = Iff(e, self.imp())
        return e

    def imp(self) -> BoolExpr:
        e = self.disj()
        if self.peek()[:2] == ("op", "->"):
            self.take()
            return Implies(e, self.imp())
        return e

    def disj(self) -> BoolExpr:
        e = self.conj()
        while self.peek()[:2] == ("op", "|"):
            self.take()
            e = Or(e, self.conj())
        return e

    def conj(self) -> BoolExpr:
        e = self.unary()
        while self.peek()[:2] == ("op", "&"):
            self.take()
            e = And(e, self.unary())
        return e

    def unary(self) -> BoolExpr:
        tok = self.peek()
        if tok[:2] == ("op", "!"):
            self.take()
            return Not(self.unary())
        return self.atom()

    def atom(self) -> BoolExpr:
        tok = self.take()
        if tok[0] == "lpar":
            e = self.iff()
            self.expect("rpar")
            return e
        if tok[0] == "id":
            word = tok[1]
            if word == "true":
                return Lit(True)
            if word == "false":
                return Lit(False)
            if word == "X":
                self.expect("lpar")
                name = self.expect("id")
                self.expect("rpar")
                return NextRef(name[1])
            return Ref(word)
        raise ExprError(f"unexpected token {tok[1]!r}", self.line, tok[2])


def parse_expr(text: str, line: int = 0) -> BoolExpr:
    """Parse expression text; `line` is used in error positions."""
    return _Parser(text, line).parse()
