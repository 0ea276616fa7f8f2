"""Render Mealy machines as behavioral Verilog, and machines/games as DOT.

The Verilog is a plain case-table controller: one state register,
synchronous reset to the initial state, a combinational block over
(state, inputs).  Auditability wins over minimized netlists here; the
text is a pure function of the machine dump.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .game import Game
from .strategy import MealyMachine

_IDENT = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


class EmitError(ValueError):
    pass


@dataclass
class VerilogModule:
    name: str
    inputs: list[str]
    outputs: list[str]
    state_width: int  # ceil(log2(n_states)); 0 for a single-state machine
    n_states: int
    # next_state[s][i] and output_bits[s][i]
    next_state: list[list[int]]
    output_bits: list[list[int]]
    initial: int

    def render(self) -> str:
        return _render_verilog(self)


def build_verilog_module(mach: MealyMachine, name: str) -> VerilogModule:
    if not _IDENT.match(name):
        raise EmitError(f"'{name}' is not a valid Verilog identifier")
    if mach.n_states == 0:
        raise EmitError("machine has no states")
    mach.check_complete()
    width = max(0, (mach.n_states - 1).bit_length())
    nxt = [[t for _, t in row] for row in mach.transitions]
    out = [[o for o, _ in row] for row in mach.transitions]
    return VerilogModule(
        name,
        list(mach.input_names),
        list(mach.output_names),
        width,
        mach.n_states,
        nxt,
        out,
        mach.initial,
    )


def _bits(value: int, width: int) -> str:
    return format(value, f"0{width}b") if width else ""


def _render_verilog(m: VerilogModule) -> str:
    L: list[str] = []
    L.append(f"// {m.name}: synthesized reactive controller")
    L.append(f"module {m.name} (")
    ports = ["  input wire clk,", "  input wire rst,"]
    ports += [f"  input wire {n}," for n in m.inputs]
    ports += [f"  output reg {n}," for n in m.outputs]
    ports[-1] = ports[-1].rstrip(",")
    L += ports
    L.append(");")
    L.append("")
    in_w = len(m.inputs)
    in_concat = "{" + ", ".join(reversed(m.inputs)) + "}"

    def outs_for(bits: int) -> str:
        parts = []
        for k, name in enumerate(m.outputs):
            parts.append(f"{name} = 1'b{(bits >> k) & 1};")
        return " ".join(parts)

    if m.state_width == 0:
        L.append("  always @(*) begin")
        L.append(f"    case ({in_concat})")
        for i in range(1 << in_w):
            L.append(
                f"      {in_w}'b{_bits(i, in_w)}: begin "
                f"{outs_for(m.output_bits[0][i])} end"
            )
        L.append(f"      default: begin {outs_for(0)} end")
        L.append("    endcase")
        L.append("  end")
        L.append("")
        L.append("endmodule")
        return "\n".join(L) + "\n"

    w = m.state_width
    L.append(f"  reg [{w - 1}:0] state;")
    L.append(f"  reg [{w - 1}:0] state_next;")
    L.append("")
    L.append("  always @(*) begin")
    for name in m.outputs:
        L.append(f"    {name} = 1'b0;")
    L.append("    state_next = state;")
    L.append("    case (state)")
    for s in range(m.n_states):
        L.append(f"      {w}'d{s}: begin")
        L.append(f"        case ({in_concat})")
        for i in range(1 << in_w):
            L.append(
                f"          {in_w}'b{_bits(i, in_w)}: begin "
                f"{outs_for(m.output_bits[s][i])} "
                f"state_next = {w}'d{m.next_state[s][i]}; end"
            )
        L.append("          default: ;")
        L.append("        endcase")
        L.append("      end")
    L.append(f"      default: state_next = {w}'d{m.initial};")
    L.append("    endcase")
    L.append("  end")
    L.append("")
    L.append("  always @(posedge clk) begin")
    L.append("    if (rst)")
    L.append(f"      state <= {w}'d{m.initial};")
    L.append("    else")
    L.append("      state <= state_next;")
    L.append("  end")
    L.append("")
    L.append("endmodule")
    return "\n".join(L) + "\n"


def emit_verilog(mach: MealyMachine, name: str = "controller") -> str:
    return build_verilog_module(mach, name).render()


def _val_label(bits: int, names: list[str]) -> str:
    return ",".join(f"{n}={(bits >> k) & 1}" for k, n in enumerate(names))


def _machine_dot(mach: MealyMachine) -> str:
    L = ["digraph mealy {", "  rankdir=LR;", '  init [shape=point, label=""];']
    for k, st in enumerate(mach.states):
        attrs = [f'label="s{k}"', "shape=circle"]
        if st.get("okE") is False:
            attrs.append("style=filled")
            attrs.append("fillcolor=lightsalmon")
        L.append(f"  s{k} [{', '.join(attrs)}];")
    L.append(f"  init -> s{mach.initial};")
    for k, row in enumerate(mach.transitions):
        for i, (out, nxt) in enumerate(row):
            label = (
                f"{_val_label(i, mach.input_names)} / "
                f"{_val_label(out, mach.output_names)}"
            )
            style = ""
            if mach.states[nxt].get("okS") is False:
                style = ", style=dashed, color=red"
            L.append(f'  s{k} -> s{nxt} [label="{label}"{style}];')
    L.append("}")
    return "\n".join(L) + "\n"


def _game_dot(g: Game) -> str:
    L = ["digraph game {", "  rankdir=LR;"]
    infos = [g.state_info(s) for s in range(g.n_states)]
    for s, info in enumerate(infos):
        attrs = [f'label="{s}\\n{info.kind}"', "shape=box"]
        if not info.okE:
            attrs.append("style=filled")
            attrs.append("fillcolor=lightsalmon")
        L.append(f"  n{s} [{', '.join(attrs)}];")
    L.append(f"  init [shape=point, label=\"\"];")
    L.append(f"  init -> n{g.initial};")
    for s in range(g.n_states):
        for t in sorted(g.succ_set(s)):
            style = ""
            if not infos[t].okS:
                style = ' [style=dashed, color=red]'
            L.append(f"  n{s} -> n{t}{style};")
    L.append("}")
    return "\n".join(L) + "\n"


def emit_dot(obj: MealyMachine | Game) -> str:
    """GraphViz rendering; violation edges dashed, env-error states filled."""
    if isinstance(obj, MealyMachine):
        return _machine_dot(obj)
    if isinstance(obj, Game):
        return _game_dot(obj)
    raise EmitError(f"cannot render {type(obj).__name__} as DOT")
