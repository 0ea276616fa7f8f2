"""Independent ground truth for the solver and for extracted machines.

brute_force_region enumerates memoryless environment strategies (the
environment's objective is the complement of a Streett condition, a
Rabin condition, so memoryless strategies suffice for it) and, per
strategy, every state subset as a candidate infinity set.  No fixpoint
machinery is shared with the solver.

check_strategy_sound model-checks a closed machine against the game:
for each pair, delete the b states and look for a reachable cycle
through an a state in the remaining product graph.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .game import Game, StateSet
from .strategy import MealyMachine

ORACLE_STATE_CAP = 15
ORACLE_INPUT_CAP = 4


class OracleCapacityError(RuntimeError):
    pass


def brute_force_region(
    g: Game, state_cap: int = ORACLE_STATE_CAP, input_cap: int = ORACLE_INPUT_CAP
) -> StateSet:
    """Exact winning region of the system by exhaustive enumeration.

    A state is environment-winning iff some memoryless environment
    strategy (one input valuation per state) leaves no reachable
    subset U that is strongly connected, closed under some system
    choice at every member, and satisfies every pair.  The returned
    set is the complement.
    """
    n = g.n_states
    ni = g.n_input_vals
    if n > state_cap:
        raise OracleCapacityError(f"{n} states exceeds oracle cap {state_cap}")
    if ni > input_cap:
        raise OracleCapacityError(f"{ni} input valuations exceeds oracle cap {input_cap}")

    succ_mask = [
        [_mask(succ for _, succ in g.choices(s, i)) for i in range(ni)]
        for s in range(n)
    ]
    pair_bits = [(p.a.bits, p.b.bits) for p in g.pairs]
    full = (1 << n) - 1

    good_subsets = []
    for U in range(1, full + 1):
        if all((U & a) == 0 or (U & b) != 0 for a, b in pair_bits):
            good_subsets.append(U)

    members_of = {U: _bit_indices(U) for U in good_subsets}

    env_win = 0
    for sigma in itertools.product(range(ni), repeat=n):
        rows = [succ_mask[q][sigma[q]] for q in range(n)]
        T = 0
        for U in good_subsets:
            if U & ~T == 0:
                continue  # already covered
            qs = members_of[U]
            for q in qs:
                if rows[q] & U == 0:
                    break
            else:
                if _strongly_connected(U, qs, rows):
                    T |= U
        # environment wins exactly where T is unreachable
        reach = T
        while True:
            grown = reach
            for q in range(n):
                bit = 1 << q
                if not (reach & bit) and (rows[q] & reach):
                    grown |= bit
            if grown == reach:
                break
            reach = grown
        env_win |= full & ~reach
        if env_win == full:
            break

    return StateSet(n, full & ~env_win)


def _mask(indices) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << i
    return bits


def _bit_indices(bits: int) -> list[int]:
    out = []
    while bits:
        low = bits & -bits
        out.append(low.bit_length() - 1)
        bits ^= low
    return out


def _strongly_connected(U: int, members: list[int], rows: list[int]) -> bool:
    """U strongly connected in the subgraph induced by rows, every
    member keeping a successor inside U (singletons need a self-loop)."""
    q0 = members[0]
    fwd = 1 << q0
    while True:
        grown = fwd
        for q in members:
            if (fwd >> q) & 1:
                grown |= rows[q] & U
        if grown == fwd:
            break
        fwd = grown
    if fwd != U:
        return False
    bwd = 1 << q0
    while True:
        grown = bwd
        for q in members:
            if not ((bwd >> q) & 1) and (rows[q] & bwd):
                grown |= 1 << q
        if grown == bwd:
            break
        bwd = grown
    if bwd != U:
        return False
    # closure under an internal successor was checked by the caller for
    # multi-state U; a singleton needs its self-loop verified here
    if len(members) == 1 and not (rows[q0] & U):
        return False
    return True


@dataclass
class Violation:
    pair_index: int
    stem: list[int]  # product node ids from the initial node
    cycle: list[int]  # closed walk, first == last


@dataclass
class Verdict:
    sound: bool
    violations: list[Violation] = field(default_factory=list)
    n_product_states: int = 0


class ProductMismatch(RuntimeError):
    pass


def _machine_product(g: Game, mach: MealyMachine):
    """The closed-loop graph: nodes are machine states, each labelled
    with its game state; one edge per input valuation."""
    mach.check_complete()
    if mach.n_input_vals != g.n_input_vals:
        raise ProductMismatch(
            f"machine has {mach.n_input_vals} input valuations, game has "
            f"{g.n_input_vals}"
        )
    game_state = []
    for k, st in enumerate(mach.states):
        gs = st.get("game_state")
        if gs is None or not 0 <= gs < g.n_states:
            raise ProductMismatch(
                f"machine state {k} references game state {gs!r} absent from the game"
            )
        game_state.append(gs)
    edges = [
        [nxt for _, nxt in mach.transitions[k]] for k in range(mach.n_states)
    ]
    return game_state, edges


def check_strategy_sound(g: Game, mach: MealyMachine) -> Verdict:
    """Violation iff some infinite run of the closed loop falsifies a
    pair: a reachable cycle avoiding b while touching a."""
    game_state, edges = _machine_product(g, mach)
    n = mach.n_states

    # reachable product nodes, with BFS parents for stem extraction
    parent: dict[int, int | None] = {mach.initial: None}
    order = [mach.initial]
    for u in order:
        for v in edges[u]:
            if v not in parent:
                parent[v] = u
                order.append(v)
    reach = set(order)

    verdict = Verdict(sound=True, n_product_states=len(reach))
    for pk, pair in enumerate(g.pairs):
        keep = [
            u for u in order if u in reach and game_state[u] not in pair.b
        ]
        keep_set = set(keep)
        sub_edges = {
            u: [v for v in edges[u] if v in keep_set] for u in keep
        }
        for comp in _tarjan(keep, sub_edges):
            comp_set = set(comp)
            nontrivial = len(comp) > 1 or comp[0] in sub_edges[comp[0]]
            if not nontrivial:
                continue
            hits = [u for u in comp if game_state[u] in pair.a]
            if not hits:
                continue
            anchor = hits[0]
            stem = _stem(parent, anchor)
            cycle = _cycle_through(anchor, comp_set, sub_edges)
            verdict.sound = False
            verdict.violations.append(Violation(pk, stem, cycle))
            break
    return verdict


def _stem(parent: dict[int, int | None], node: int) -> list[int]:
    path = [node]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _cycle_through(anchor: int, comp: set[int], edges: dict[int, list[int]]) -> list[int]:
    """A closed walk from anchor back to itself inside its SCC."""
    if anchor in edges[anchor]:
        return [anchor, anchor]
    # BFS within the component back to the anchor
    parent = {}
    frontier = [anchor]
    seen = {anchor}
    while frontier:
        nxt = []
        for u in frontier:
            for v in edges[u]:
                if v not in comp:
                    continue
                if v == anchor:
                    path = [v, u]
                    while path[-1] != anchor:
                        path.append(parent[path[-1]])
                    path.reverse()
                    return path
                if v not in seen:
                    seen.add(v)
                    parent[v] = u
                    nxt.append(v)
        frontier = nxt
    raise AssertionError("SCC member without a cycle through it")


def _tarjan(nodes: list[int], edges: dict[int, list[int]]) -> list[list[int]]:
    """Iterative Tarjan SCC; components in discovery order."""
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = itertools.count()

    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(edges[root]))]
        index[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        while work:
            u, it = work[-1]
            advanced = False
            for v in it:
                if v not in index:
                    index[v] = low[v] = next(counter)
                    stack.append(v)
                    on_stack.add(v)
                    work.append((v, iter(edges[v])))
                    advanced = True
                    break
                if v in on_stack:
                    low[u] = min(low[u], index[v])
            if advanced:
                continue
            work.pop()
            if work:
                pu = work[-1][0]
                low[pu] = min(low[pu], low[u])
            if low[u] == index[u]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == u:
                        break
                out.append(sorted(comp))
    return out
