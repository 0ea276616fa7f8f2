"""Command-line front end: synth, bench, simulate, verify.

Exit codes: 0 success/sound, 1 error, 2 unrealizable, 3 verification
violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from .emit import emit_dot, emit_verilog
from .game import CapacityError, Game, build_game, game_from_dump
from .model import SpecError, parse_spec
from .oracle import check_strategy_sound
from .sim import EnvScript, SimError, recovery_metric, simulate
from .solver import main_streett
from .strategy import MealyMachine, UnrealizableError, extract_strategy, strategy_to_mealy


def arbiter_spec_text(n: int) -> str:
    """N-client arbiter: requests are assumed pairwise exclusive, grants
    must be pairwise exclusive, a request is granted on the next step."""
    if n < 2:
        raise ValueError("arbiter needs at least 2 clients")
    lines = [
        "inputs:  " + " ".join(f"r{i + 1}" for i in range(n)),
        "outputs: " + " ".join(f"g{i + 1}" for i in range(n)),
    ]
    for i in range(n):
        for j in range(i + 1, n):
            lines.append(f"env_safety_inv: !(r{i + 1} & r{j + 1})")
    for i in range(n):
        for j in range(i + 1, n):
            lines.append(f"sys_safety_inv: !(g{i + 1} & g{j + 1})")
    for i in range(n):
        lines.append(f"sys_safety_inv: r{i + 1} -> X(g{i + 1})")
    return "\n".join(lines) + "\n"


def handshake_spec_text() -> str:
    """Full handshake: requests stay high until granted, grants persist
    while the request does, with one fairness condition per side."""
    return (
        "inputs:  r\n"
        "outputs: g\n"
        "env_safety_inv: (r & !g -> X(r)) & (!r & g -> !X(r))\n"
        "env_fair: !r | !g\n"
        "sys_safety_inv: (!r & !g -> !X(g)) & (r & g -> X(g))\n"
        "sys_fair: (r & g) | (!r & !g)\n"
    )


class SynthResult:
    def __init__(self, game, w, record, machine, solve_ms, total_ms):
        self.game = game
        self.w = w
        self.record = record
        self.machine = machine
        self.solve_ms = solve_ms
        self.total_ms = total_ms


def synthesize(spec_text: str, mode: str) -> SynthResult:
    """parse -> build -> solve -> extract -> close; raises on failure."""
    t0 = time.perf_counter()
    spec = parse_spec(spec_text)
    game = build_game(spec, mode)
    t1 = time.perf_counter()
    w, record = main_streett(game)
    t2 = time.perf_counter()
    strategy = extract_strategy(game, record)
    machine = strategy_to_mealy(game, strategy)
    t3 = time.perf_counter()
    return SynthResult(
        game, w, record, machine, (t2 - t1) * 1000.0, (t3 - t0) * 1000.0
    )


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8", newline="\n")


def _combined_dump(result: SynthResult) -> dict:
    return {"game": result.game.dump(), "machine": result.machine.dump()}


def cmd_synth(args) -> int:
    try:
        spec_text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as e:
        print(f"error: cannot read spec: {e}", file=sys.stderr)
        return 1
    mode = "plain" if args.plain else "robust"
    try:
        result = synthesize(spec_text, mode)
    except UnrealizableError as e:
        print(f"unrealizable ({mode} mode): {e}")
        return 2
    except (SpecError, CapacityError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    g = result.game
    print(f"realizable ({mode} mode)")
    print(f"game states:    {g.n_states}")
    print(f"winning states: {len(result.w)}")
    print(f"machine states: {result.machine.n_states}")
    print(f"solve time:     {result.solve_ms:.1f} ms")
    print(f"total time:     {result.total_ms:.1f} ms")
    if args.output:
        _write(args.output, emit_verilog(result.machine, args.name))
        print(f"verilog written to {args.output}")
    if args.dot:
        _write(args.dot, emit_dot(result.machine))
        print(f"dot written to {args.dot}")
    if args.dump:
        _write(
            args.dump,
            json.dumps(_combined_dump(result), indent=1, sort_keys=False) + "\n",
        )
        print(f"dump written to {args.dump}")
    return 0


def cmd_bench(args) -> int:
    modes = []
    if args.robust or not (args.robust or args.plain):
        modes.append("robust")
    if args.plain or not (args.robust or args.plain):
        modes.append("plain")
    jobs: list[tuple[str, str]] = []
    if args.arbiter is not None:
        if args.arbiter < 2:
            print("error: --arbiter needs N >= 2", file=sys.stderr)
            return 1
        for n in range(2, args.arbiter + 1):
            jobs.append((str(n), arbiter_spec_text(n)))
    if args.handshake:
        jobs.append(("handshake", handshake_spec_text()))
    if not jobs:
        print("error: nothing to bench (use --arbiter N or --handshake)", file=sys.stderr)
        return 1

    rows = []
    for label, spec_text in jobs:
        for mode in modes:
            try:
                result = synthesize(spec_text, mode)
            except CapacityError as e:
                print(f"error: {label} {mode}: {e}", file=sys.stderr)
                return 1
            verilog = emit_verilog(result.machine, "controller")
            row = {
                "N": label,
                "mode": mode,
                "states": result.game.n_states,
                "verilog_lines": len(verilog.splitlines()),
                "solve_ms": f"{result.solve_ms:.2f}",
                "total_ms": f"{result.total_ms:.2f}",
            }
            rows.append(row)
            print(
                f"{label:>9}  {mode:>6}  states={row['states']:<7} "
                f"lines={row['verilog_lines']:<7} solve={row['solve_ms']}ms "
                f"total={row['total_ms']}ms"
            )
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(
                fh,
                fieldnames=["N", "mode", "states", "verilog_lines", "solve_ms", "total_ms"],
            )
            writer.writeheader()
            writer.writerows(rows)
        print(f"csv written to {args.csv}")
    return 0


def _load_combined(path: str) -> tuple[Game, MealyMachine]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if "game" not in doc or "machine" not in doc:
        raise ValueError("dump must contain 'game' and 'machine' sections")
    return game_from_dump(doc["game"]), MealyMachine.from_dump(doc["machine"])


def cmd_verify(args) -> int:
    try:
        game, machine = _load_combined(args.dump)
        verdict = check_strategy_sound(game, machine)
    except (OSError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if verdict.sound:
        print(f"sound ({verdict.n_product_states} product states checked)")
        return 0
    v = verdict.violations[0]
    print(f"violation of pair {v.pair_index + 1}")
    print(f"  stem:  {' -> '.join(str(u) for u in v.stem)}")
    print(f"  cycle: {' -> '.join(str(u) for u in v.cycle)}")
    return 3


def cmd_simulate(args) -> int:
    try:
        game, machine = _load_combined(args.dump)
        if args.script:
            text = Path(args.script).read_text(encoding="utf-8")
            script = EnvScript.parse(text, machine.input_names, seed=args.seed)
        else:
            script = EnvScript.legal(seed=args.seed)
        trace = simulate(machine, script, args.steps)
    except (OSError, ValueError, KeyError, SimError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    report = recovery_metric(trace)
    print(report.table())
    if args.json:
        _write(args.json, json.dumps(report.dump(), indent=1) + "\n")
        print(f"report written to {args.json}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gr1rs",
        description="Robust GR(1) synthesis: games, strategies, Verilog",
    )
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("synth", help="synthesize a controller from a spec file")
    ps.add_argument("spec")
    grp = ps.add_mutually_exclusive_group()
    grp.add_argument("--robust", action="store_true", help="robust mode (default)")
    grp.add_argument("--plain", action="store_true")
    ps.add_argument("-o", "--output", help="write Verilog here")
    ps.add_argument("--dot", help="write a DOT rendering of the machine")
    ps.add_argument("--dump", help="write the combined game+machine JSON dump")
    ps.add_argument("--name", default="controller", help="Verilog module name")
    ps.set_defaults(func=cmd_synth)

    pb = sub.add_parser("bench", help="benchmark generated specs")
    pb.add_argument("--arbiter", type=int, help="bench arbiters with 2..N clients")
    pb.add_argument("--handshake", action="store_true")
    grp = pb.add_mutually_exclusive_group()
    grp.add_argument("--robust", action="store_true")
    grp.add_argument("--plain", action="store_true")
    pb.add_argument("--csv", help="write results as CSV")
    pb.set_defaults(func=cmd_bench)

    pv = sub.add_parser("verify", help="model-check a dumped machine against its game")
    pv.add_argument("dump")
    pv.set_defaults(func=cmd_verify)

    pm = sub.add_parser("simulate", help="run a dumped machine under a scripted environment")
    pm.add_argument("dump")
    pm.add_argument("--script", help="script file (in/legal/violate directives)")
    pm.add_argument("--steps", type=int, default=100)
    pm.add_argument("--seed", type=int, default=0)
    pm.add_argument("--json", help="write the recovery report as JSON")
    pm.set_defaults(func=cmd_simulate)
    return p


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    return args.func(args)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
