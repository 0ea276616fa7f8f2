"""Data model for GR(1) specifications.

A spec consists of input/output signals, safety automata for the
environment and the system (deterministic, possibly incomplete), and
lists of environment/system fairness formulas.  Safety invariants are
compiled to automata; several invariants of the same role are kept as
separate automaton parts and product-composed by the game builder.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .expr import BoolExpr, ExprError, Lit, parse_expr


class SpecError(ValueError):
    """Validation or syntax error in a specification."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        if line:
            message = f"line {line}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Signal:
    name: str
    kind: str  # "input" | "output"


class Valuation:
    """Total Boolean assignment over an ordered signal-name tuple.

    Stored as a bit pattern: bit k corresponds to names[k].
    """

    __slots__ = ("names", "bits")

    def __init__(self, names: tuple[str, ...], bits: int):
        self.names = names
        self.bits = bits

    @classmethod
    def from_dict(cls, names: tuple[str, ...], values: dict[str, bool]) -> "Valuation":
        bits = 0
        for k, name in enumerate(names):
            if name not in values:
                raise SpecError(f"valuation missing signal '{name}'")
            if values[name]:
                bits |= 1 << k
        return cls(names, bits)

    def __getitem__(self, name: str) -> bool:
        try:
            k = self.names.index(name)
        except ValueError:
            raise SpecError(f"signal '{name}' not in valuation domain") from None
        return bool((self.bits >> k) & 1)

    def as_dict(self) -> dict[str, bool]:
        return {n: bool((self.bits >> k) & 1) for k, n in enumerate(self.names)}

    def __eq__(self, other):
        return (
            isinstance(other, Valuation)
            and self.names == other.names
            and self.bits == other.bits
        )

    def __hash__(self):
        return hash((self.names, self.bits))

    def __str__(self):
        return ",".join(
            f"{n}={1 if (self.bits >> k) & 1 else 0}" for k, n in enumerate(self.names)
        )

    __repr__ = __str__


@dataclass(frozen=True)
class Transition:
    source: str
    guard: BoolExpr
    target: str


class SafetyAutomaton:
    """Deterministic, possibly incomplete automaton over signal letters.

    A word is safe iff it has a run: falling off the transition
    relation is the violation.
    """

    def __init__(
        self,
        name: str,
        states: list[str],
        initial: str,
        transitions: list[Transition],
        source: str | None = None,
    ):
        self.name = name
        self.states = list(states)
        self.initial = initial
        self.transitions = list(transitions)
        # original invariant text when compiled from one, else None
        self.source = source
        if initial not in self.states:
            raise SpecError(f"automaton '{name}': initial state '{initial}' not declared")
        if len(set(self.states)) != len(self.states):
            raise SpecError(f"automaton '{name}': duplicate state names")
        declared = set(self.states)
        for t in self.transitions:
            if t.source not in declared or t.target not in declared:
                raise SpecError(
                    f"automaton '{name}': transition references undeclared state"
                )
        self._index = {s: i for i, s in enumerate(self.states)}
        self._out: dict[str, list[Transition]] = {s: [] for s in self.states}
        for t in self.transitions:
            self._out[t.source].append(t)

    def read_signals(self) -> set[str]:
        out: set[str] = set()
        for t in self.transitions:
            out |= t.guard.all_signals()
        return out

    def enabled(self, state: str, letter: dict[str, bool]) -> list[Transition]:
        return [t for t in self._out[state] if t.guard.eval(letter)]

    def step(self, state: str, letter: dict[str, bool]) -> str | None:
        """Target state, or None when the letter violates safety here."""
        en = self.enabled(state, letter)
        if not en:
            return None
        return en[0].target

    def check_deterministic(self, signal_names: list[str]) -> None:
        """Exhaustively verify determinism over the read signals.

        Raises SpecError with a witness (state + valuation) when two
        transitions are enabled at once.
        """
        read = sorted(self.read_signals(), key=signal_names.index)
        for state in self.states:
            outs = self._out[state]
            if len(outs) < 2:
                continue
            for bits in range(1 << len(read)):
                letter = {n: bool((bits >> k) & 1) for k, n in enumerate(read)}
                en = [t for t in outs if t.guard.eval(letter)]
                if len(en) > 1:
                    witness = ",".join(
                        f"{n}={1 if letter[n] else 0}" for n in read
                    )
                    raise SpecError(
                        f"automaton '{self.name}' is nondeterministic: state "
                        f"'{state}' has {len(en)} enabled transitions under "
                        f"{{{witness}}}"
                    )


def invariant_to_automaton(
    phi: BoolExpr, signal_names: list[str], name: str = "inv"
) -> SafetyAutomaton:
    """Compile an always(phi) invariant into a safety automaton.

    Without next-step refs the result is a single state with a
    self-loop guarded by phi.  With next-step refs the non-initial
    states are the valuations of the signals phi reads; the automaton
    moves from state u to state(v) on letter v exactly when phi holds
    with current=u, next=v.  The initial state allows every letter:
    the first pair is checked when the second letter arrives.
    """
    undeclared = phi.all_signals() - set(signal_names)
    if undeclared:
        raise SpecError(
            f"invariant references undeclared signal(s): {', '.join(sorted(undeclared))}"
        )
    if not phi.has_next():
        loop = Transition("s0", phi, "s0")
        return SafetyAutomaton(name, ["s0"], "s0", [loop], source=str(phi))

    read = sorted(phi.all_signals(), key=signal_names.index)
    k = len(read)

    def state_name(bits: int) -> str:
        return "v" + "".join(str((bits >> i) & 1) for i in range(k))

    def guard_for(bits: int) -> BoolExpr:
        # conjunction of literals pinning the read signals to `bits`
        from .expr import And, Not, Ref

        e: BoolExpr | None = None
        for i, n in enumerate(read):
            lit: BoolExpr = Ref(n) if (bits >> i) & 1 else Not(Ref(n))
            e = lit if e is None else And(e, lit)
        assert e is not None
        return e

    states = ["init"] + [state_name(b) for b in range(1 << k)]
    transitions: list[Transition] = []
    for b in range(1 << k):
        transitions.append(Transition("init", guard_for(b), state_name(b)))
    for u in range(1 << k):
        cur = {n: bool((u >> i) & 1) for i, n in enumerate(read)}
        for v in range(1 << k):
            nxt = {n: bool((v >> i) & 1) for i, n in enumerate(read)}
            if phi.eval2(cur, nxt):
                transitions.append(
                    Transition(state_name(u), guard_for(v), state_name(v))
                )
    return SafetyAutomaton(name, states, "init", transitions, source=str(phi))


def trivial_automaton(name: str) -> SafetyAutomaton:
    """One complete state; never violated."""
    return SafetyAutomaton(name, ["s0"], "s0", [Transition("s0", Lit(True), "s0")])


@dataclass
class GR1Spec:
    """A validated GR(1) specification.

    env_safety / sys_safety hold the automaton parts in declaration
    order; the game builder forms their product implicitly.
    """

    signals: list[Signal]
    env_safety: list[SafetyAutomaton] = field(default_factory=list)
    sys_safety: list[SafetyAutomaton] = field(default_factory=list)
    env_fair: list[BoolExpr] = field(default_factory=list)
    sys_fair: list[BoolExpr] = field(default_factory=list)

    @property
    def input_names(self) -> list[str]:
        return [s.name for s in self.signals if s.kind == "input"]

    @property
    def output_names(self) -> list[str]:
        return [s.name for s in self.signals if s.kind == "output"]

    @property
    def signal_names(self) -> list[str]:
        return [s.name for s in self.signals]

    @property
    def m(self) -> int:
        return len(self.env_fair)

    @property
    def n(self) -> int:
        return len(self.sys_fair)

    def validate(self) -> None:
        names = self.signal_names
        if len(set(names)) != len(names):
            raise SpecError("duplicate signal names")
        if not self.input_names:
            raise SpecError("at least one input signal is required")
        if not self.output_names:
            raise SpecError("at least one output signal is required")
        declared = set(names)
        for role, exprs in (("env_fair", self.env_fair), ("sys_fair", self.sys_fair)):
            for e in exprs:
                if e.has_next():
                    raise SpecError(f"{role} formula '{e}' contains a next-step reference")
                bad = e.all_signals() - declared
                if bad:
                    raise SpecError(
                        f"{role} formula references undeclared signal(s): "
                        f"{', '.join(sorted(bad))}"
                    )
        for aut in self.env_safety + self.sys_safety:
            bad = aut.read_signals() - declared
            if bad:
                raise SpecError(
                    f"automaton '{aut.name}' references undeclared signal(s): "
                    f"{', '.join(sorted(bad))}"
                )
            for t in aut.transitions:
                if t.guard.has_next():
                    raise SpecError(
                        f"automaton '{aut.name}': guard '{t.guard}' contains a "
                        f"next-step reference (guards read the current letter only)"
                    )
            aut.check_deterministic(names)


# ---------------------------------------------------------------------------
# spec file format


_ROLE_KEYS = (
    "inputs",
    "outputs",
    "env_safety_inv",
    "sys_safety_inv",
    "env_fair",
    "sys_fair",
    "env_safety_automaton",
    "sys_safety_automaton",
)


def _strip_comment(line: str) -> str:
    if "#" in line:
        line = line[: line.index("#")]
    return line.rstrip()


def _parse_automaton_block(body: str, name: str, line_no: int) -> SafetyAutomaton:
    states: list[str] = []
    initial: str | None = None
    transitions: list[Transition] = []
    for clause in body.split(";"):
        clause = clause.strip()
        if not clause:
            continue
        if ":" not in clause:
            raise SpecError(f"malformed automaton clause '{clause}'", line_no)
        key, _, rest = clause.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "states":
            states.extend(rest.split())
        elif key == "init":
            initial = rest
        elif key == "trans":
            lp = rest.find("-(")
            rp = rest.rfind(")->")
            if lp < 0 or rp < 0 or rp <= lp:
                raise SpecError(f"malformed transition '{rest}'", line_no)
            src = rest[:lp].strip()
            expr_text = rest[lp + 2 : rp]
            dst = rest[rp + 3 :].strip()
            if not src or not dst:
                raise SpecError(f"malformed transition '{rest}'", line_no)
            try:
                guard = parse_expr(expr_text, line_no)
            except ExprError as e:
                raise SpecError(str(e), line_no) from None
            transitions.append(Transition(src, guard, dst))
        else:
            raise SpecError(f"unknown automaton clause '{key}'", line_no)
    if initial is None:
        raise SpecError("automaton block missing 'init'", line_no)
    if len(set(states)) != len(states):
        raise SpecError("duplicate state names in automaton block", line_no)
    return SafetyAutomaton(name, states, initial, transitions)


def parse_spec(text: str) -> GR1Spec:
    """Parse the line-oriented spec format; returns a validated GR1Spec."""
    inputs: list[str] = []
    outputs: list[str] = []
    raw: list[tuple[str, str, int]] = []  # (key, payload, line_no)

    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line_no = i + 1
        line = _strip_comment(lines[i])
        i += 1
        if not line.strip():
            continue
        if line[0].isspace():
            raise SpecError("unexpected continuation line", line_no)
        if ":" not in line:
            raise SpecError(f"expected 'key: value', got '{line.strip()}'", line_no)
        key, _, payload = line.partition(":")
        key = key.strip()
        if key not in _ROLE_KEYS:
            raise SpecError(f"unknown directive '{key}'", line_no)
        # automaton blocks may continue over indented lines
        if key.endswith("_automaton"):
            parts = [payload]
            while i < len(lines):
                nxt = _strip_comment(lines[i])
                if nxt.strip() and nxt[0].isspace():
                    parts.append(nxt)
                    i += 1
                else:
                    break
            payload = " ".join(parts)
        raw.append((key, payload.strip(), line_no))

    env_parts: list[SafetyAutomaton] = []
    sys_parts: list[SafetyAutomaton] = []
    env_fair: list[BoolExpr] = []
    sys_fair: list[BoolExpr] = []
    pending_invs: list[tuple[str, BoolExpr, int]] = []

    for key, payload, line_no in raw:
        if key == "inputs":
            inputs.extend(payload.split())
        elif key == "outputs":
            outputs.extend(payload.split())
        elif key in ("env_fair", "sys_fair"):
            try:
                e = parse_expr(payload, line_no)
            except ExprError as err:
                raise SpecError(str(err), line_no) from None
            (env_fair if key == "env_fair" else sys_fair).append(e)
        elif key in ("env_safety_inv", "sys_safety_inv"):
            try:
                e = parse_expr(payload, line_no)
            except ExprError as err:
                raise SpecError(str(err), line_no) from None
            pending_invs.append((key, e, line_no))
        else:  # explicit automaton block
            role = "env" if key.startswith("env") else "sys"
            idx = len(env_parts if role == "env" else sys_parts)
            aut = _parse_automaton_block(payload, f"{role}_aut{idx}", line_no)
            (env_parts if role == "env" else sys_parts).append(aut)

    signals = [Signal(n, "input") for n in inputs] + [
        Signal(n, "output") for n in outputs
    ]
    names = [s.name for s in signals]
    if len(set(names)) != len(names):
        raise SpecError("duplicate signal names")
    if not inputs or not outputs:
        raise SpecError("spec must declare at least one input and one output signal")

    for key, e, line_no in pending_invs:
        role = "env" if key.startswith("env") else "sys"
        parts = env_parts if role == "env" else sys_parts
        try:
            aut = invariant_to_automaton(e, names, name=f"{role}_inv{len(parts)}")
        except SpecError as err:
            raise SpecError(str(err), line_no) from None
        parts.append(aut)

    spec = GR1Spec(signals, env_parts, sys_parts, env_fair, sys_fair)
    spec.validate()
    return spec


def print_spec(spec: GR1Spec) -> str:
    """Render a spec back into the text format (semantics-preserving)."""
    out: list[str] = []
    out.append("inputs: " + " ".join(spec.input_names))
    out.append("outputs: " + " ".join(spec.output_names))
    for role, parts in (("env", spec.env_safety), ("sys", spec.sys_safety)):
        for aut in parts:
            if aut.source is not None:
                out.append(f"{role}_safety_inv: {aut.source}")
            else:
                clauses = [
                    "states: " + " ".join(aut.states),
                    "init: " + aut.initial,
                ]
                clauses += [
                    f"trans: {t.source} -({t.guard})-> {t.target}"
                    for t in aut.transitions
                ]
                out.append(f"{role}_safety_automaton: " + " ; ".join(clauses))
    for e in spec.env_fair:
        out.append(f"env_fair: {e}")
    for e in spec.sys_fair:
        out.append(f"sys_fair: {e}")
    return "\n".join(out) + "\n"


def eval_expr(e: BoolExpr, v: Valuation) -> bool:
    """Evaluate a next-free expression under a valuation."""
    if e.has_next():
        raise SpecError(f"expression '{e}' contains next-step references")
    missing = e.signals() - set(v.names)
    if missing:
        raise SpecError(f"unbound signal(s): {', '.join(sorted(missing))}")
    return e.eval(v.as_dict())


def word_satisfies_invariant(phi: BoolExpr, word: list[dict[str, bool]]) -> bool:
    """Direct always(phi) semantics on a finite word, used as a test oracle.

    phi is checked on each adjacent letter pair; with no next-step
    refs it is checked on every letter individually.
    """
    if not phi.has_next():
        return all(phi.eval(w) for w in word)
    return all(phi.eval2(word[t], word[t + 1]) for t in range(len(word) - 1))


def automaton_accepts(aut: SafetyAutomaton, word: list[dict[str, bool]]) -> bool:
    state = aut.initial
    for letter in word:
        nxt = aut.step(state, letter)
        if nxt is None:
            return False
        state = nxt
    return True


def enumerate_valuations(names: list[str]):
    """All total assignments over `names`, in binary order."""
    for bits in range(1 << len(names)):
        yield {n: bool((bits >> k) & 1) for k, n in enumerate(names)}


def product_step(
    parts: list[SafetyAutomaton], states: tuple[str, ...], letter: dict[str, bool]
) -> tuple[str, ...] | None:
    """One synchronous step of an automaton-part product; None if any part dies."""
    out = []
    for aut, s in zip(parts, states):
        t = aut.step(s, letter)
        if t is None:
            return None
        out.append(t)
    return tuple(out)


def product_states(parts: list[SafetyAutomaton]) -> list[tuple[str, ...]]:
    """Full product state space, lexicographic in part order."""
    if not parts:
        return [()]
    return list(itertools.product(*[aut.states for aut in parts]))
