"""Closed-loop simulation of a synthesized machine with fault injection.

The environment is scripted: explicit input valuations, legal random
inputs (those keeping the environment's safety automaton alive), or
deliberate violations.  Whether an input is legal can depend on the
output the machine answers with in the same step, so legality is
evaluated against the machine's response; the per-step ok flags are
read off the machine's state annotations, which track the game.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .strategy import MealyMachine


class SimError(RuntimeError):
    pass


@dataclass(frozen=True)
class Directive:
    kind: str  # "in" | "legal" | "violate"
    input_bits: int | None = None


@dataclass
class EnvScript:
    """Per-step directives plus the randomness seed.

    When the run is longer than the script, the last directive repeats.
    """

    directives: list[Directive]
    seed: int = 0

    @classmethod
    def legal(cls, seed: int = 0) -> "EnvScript":
        return cls([Directive("legal")], seed)

    @classmethod
    def parse(cls, text: str, input_names: list[str], seed: int = 0) -> "EnvScript":
        directives: list[Directive] = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#")[0].strip()
            if not line:
                continue
            words = line.split()
            if words[0] == "legal":
                directives.append(Directive("legal"))
            elif words[0] == "violate":
                directives.append(Directive("violate"))
            elif words[0] == "in":
                bits = 0
                assigned = set()
                for w in words[1:]:
                    if "=" not in w:
                        raise SimError(f"script line {ln}: malformed assignment '{w}'")
                    name, _, val = w.partition("=")
                    if name not in input_names:
                        raise SimError(f"script line {ln}: unknown input '{name}'")
                    if val not in ("0", "1"):
                        raise SimError(f"script line {ln}: value must be 0 or 1")
                    if val == "1":
                        bits |= 1 << input_names.index(name)
                    assigned.add(name)
                missing = set(input_names) - assigned
                if missing:
                    raise SimError(
                        f"script line {ln}: missing input(s) {', '.join(sorted(missing))}"
                    )
                directives.append(Directive("in", bits))
            else:
                raise SimError(f"script line {ln}: unknown directive '{words[0]}'")
        if not directives:
            raise SimError("empty script")
        return cls(directives, seed)


@dataclass(frozen=True)
class TraceStep:
    input_bits: int
    output_bits: int
    okE: bool
    okS: bool
    x: int | None
    y: int | None


@dataclass
class Trace:
    input_names: list[str]
    output_names: list[str]
    steps: list[TraceStep] = field(default_factory=list)


@dataclass
class InjectionRecovery:
    step: int  # step index of the environment error
    sys_errors: int  # okS=false steps until the next fully-correct regime


@dataclass
class RecoveryReport:
    env_errors: int
    sys_errors: int
    worst_recovery: int
    ratio: float
    per_injection: list[InjectionRecovery] = field(default_factory=list)

    def dump(self) -> dict:
        return {
            "env_errors": self.env_errors,
            "sys_errors": self.sys_errors,
            "worst_recovery": self.worst_recovery,
            "ratio": self.ratio,
            "per_injection": [
                {"step": r.step, "sys_errors": r.sys_errors}
                for r in self.per_injection
            ],
        }

    def table(self) -> str:
        lines = [
            f"env errors:     {self.env_errors}",
            f"sys errors:     {self.sys_errors}",
            f"worst recovery: {self.worst_recovery}",
            f"sys/env ratio:  {self.ratio:.3f}",
        ]
        for r in self.per_injection:
            lines.append(f"  injection at step {r.step}: {r.sys_errors} sys error(s)")
        return "\n".join(lines)


def simulate(mach: MealyMachine, script: EnvScript, steps: int) -> Trace:
    """Run the closed loop for `steps` steps and annotate each step."""
    if steps < 1:
        raise SimError("steps must be >= 1")
    mach.check_complete()
    rng = random.Random(script.seed)
    trace = Trace(mach.input_names, mach.output_names)
    state = mach.initial
    n_in = mach.n_input_vals

    def flags_after(s: int, i: int) -> tuple[bool, bool]:
        _, nxt = mach.step(s, i)
        st = mach.states[nxt]
        return bool(st.get("okE", True)), bool(st.get("okS", True))

    for t in range(steps):
        d = script.directives[min(t, len(script.directives) - 1)]
        if d.kind == "in":
            i = d.input_bits
        elif d.kind == "legal":
            legal = [i for i in range(n_in) if flags_after(state, i)[0]]
            if not legal:
                raise SimError(f"step {t}: no legal input exists")
            i = rng.choice(legal)
        else:  # violate
            bad = [i for i in range(n_in) if not flags_after(state, i)[0]]
            if not bad:
                raise SimError(
                    f"step {t}: scripted violation impossible, the environment "
                    f"automaton is complete here"
                )
            i = rng.choice(bad)
        out, nxt = mach.step(state, i)
        st = mach.states[nxt]
        trace.steps.append(
            TraceStep(
                i,
                out,
                bool(st.get("okE", True)),
                bool(st.get("okS", True)),
                st.get("x"),
                st.get("y"),
            )
        )
        state = nxt
    return trace


def recovery_metric(trace: Trace) -> RecoveryReport:
    """Counts of env/sys errors and the per-injection recovery windows.

    The window of an injection covers the steps strictly after the env
    error, up to the first step from which okS stays true until the
    next injection (or the end of the trace); its size is the number of
    okS=false steps inside.  A sys error concurrent with the injection
    itself counts toward sys_errors but not toward the window.
    """
    steps = trace.steps
    env_errors = sum(1 for s in steps if not s.okE)
    sys_errors = sum(1 for s in steps if not s.okS)
    injections = [t for t, s in enumerate(steps) if not s.okE]
    per: list[InjectionRecovery] = []
    for idx, t in enumerate(injections):
        end = injections[idx + 1] if idx + 1 < len(injections) else len(steps)
        count = sum(1 for u in range(t + 1, end) if not steps[u].okS)
        per.append(InjectionRecovery(t, count))
    worst = max((r.sys_errors for r in per), default=0)
    ratio = sys_errors / max(1, env_errors)
    return RecoveryReport(env_errors, sys_errors, worst, ratio, per)
