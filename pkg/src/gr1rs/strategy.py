"""Winning-strategy extraction from the recorded fixpoint iterates.

The strategy carries one memory bit: 0 means the first pair's b-set is
pursued next, 1 the second pair's.  Moves are chosen by a priority
ladder of sub-strategies, tried top to bottom per (state, memory,
input):

  descend    step one iterate down the pursued pair's ladder
  switch     the pursued b-set is visited here: jump anywhere in W and
             flip the memory bit
  sub-descend / sub-exit / stay
             the pursued pair's assumption is blocked: play the ladder
             of the sub-game restricted to !a, exiting when the other
             pair's b-set is visited, or staying put inside the
             innermost stay-or-escape region

A switch or sub-exit row fires only when the present state actually
lies in the b-set it claims to visit; dropping that side condition
admits plays that flip the memory bit forever without ever visiting
either b-set, which is unsound (the random-game soundness suite
catches it).

Among the choices entering the fired row's target set, those whose
successor commits no system violation are preferred; within a tier the
lexicographically smallest key (output bits, then recovery indices) is
taken.  Plain lexicographic choice would volunteer avoidable
violations (the all-low output sorts first), inflating the error count
after an injection; preferring clean successors keeps every move
inside the row target, so the soundness argument is untouched and
extraction stays deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .game import Game, GameState, StateSet
from .solver import IterateRecord, PairRecord


class ExtractionError(RuntimeError):
    """No ladder row applies: a solver-soundness bug, never expected."""


class UnrealizableError(RuntimeError):
    def __init__(self, w: StateSet, witness_input: int | None):
        self.w = w
        self.witness_input = witness_input
        msg = "specification is unrealizable: initial state is not winning"
        if witness_input is not None:
            msg += f" (no safe answer to input valuation {witness_input})"
        super().__init__(msg)


@dataclass(frozen=True)
class MoveDecision:
    row: int
    key: tuple[int, int, int]  # (out_bits, env_recover, sys_recover)
    succ: int
    next_memory: int


class Strategy:
    """Move function over (winning state, memory bit, input valuation)."""

    def __init__(self, game: Game, record: IterateRecord):
        self.game = game
        self.record = record
        self.w = record.w
        self._levels: dict[int, list[int]] = {}
        self._cache: dict[tuple[int, int, int], MoveDecision] = {}
        clean = 0
        for s in range(game.n_states):
            if game.state_info(s).okS:
                clean |= 1 << s
        self._clean_bits = clean

    def _level_map(self, prec: PairRecord) -> list[int]:
        key = id(prec)
        levels = self._levels.get(key)
        if levels is None:
            levels = [-1] * self.game.n_states
            seen = 0
            for j, step in enumerate(prec.iterates):
                fresh = step.region.bits & ~seen
                seen |= step.region.bits
                while fresh:
                    low = fresh & -fresh
                    levels[low.bit_length() - 1] = j
                    fresh ^= low
            self._levels[key] = levels
        return levels

    def _best_choice(self, s: int, i: int, target: StateSet):
        found = self.game.best_choice_into(s, i, target.bits & self._clean_bits)
        if found is not None:
            return found
        return self.game.best_choice_into(s, i, target.bits)

    def move(self, s: int, memory: int, i: int) -> MoveDecision:
        key = (s, memory, i)
        hit = self._cache.get(key)
        if hit is None:
            hit = self._decide(s, memory, i)
            self._cache[key] = hit
        return hit

    def _decide(self, s: int, memory: int, i: int) -> MoveDecision:
        if s not in self.w:
            raise ExtractionError(f"state {s} is outside the winning region")
        top = self.record.top
        if not top.pairs:
            found = self._best_choice(s, i, self.w)
            if found is None:
                raise ExtractionError(
                    f"no move stays inside the invariant region from state {s} "
                    f"on input {i}"
                )
            return MoveDecision(0, found[0], found[1], 0)
        if len(top.pairs) == 1:
            return self._decide_1pair(s, i)
        return self._decide_2pairs(s, memory, i)

    def _decide_1pair(self, s: int, i: int) -> MoveDecision:
        prec = self.record.top.pairs[0]
        pair = self.game.pairs[prec.pair_index]
        ii = self._level_map(prec)[s]
        # descend the ladder
        if ii >= 1:
            found = self._best_choice(s, i, prec.iterates[ii - 1].region)
            if found is not None:
                return MoveDecision(1, found[0], found[1], 0)
        # b visited here: restart from anywhere in W
        if ii == 1 and s in pair.b:
            found = self._best_choice(s, i, self.w)
            if found is not None:
                return MoveDecision(3, found[0], found[1], 0)
        # assumption blocked: stay inside this iterate's region
        found = self._best_choice(s, i, prec.iterates[ii].region)
        if found is not None:
            return MoveDecision(9, found[0], found[1], 0)
        raise ExtractionError(
            f"no ladder row applies at state {s}, input {i} "
            f"(single pair, iterate {ii})"
        )

    def _decide_2pairs(self, s: int, memory: int, i: int) -> MoveDecision:
        prec = self.record.top.pairs[memory]
        mine = self.game.pairs[prec.pair_index]
        other_prec_index = 1 - memory
        other = self.game.pairs[
            self.record.top.pairs[other_prec_index].pair_index
        ]
        rows = (1, 3, 5, 7, 9) if memory == 0 else (2, 4, 6, 8, 10)
        ii = self._level_map(prec)[s]
        if ii < 0:
            raise ExtractionError(
                f"winning state {s} missing from the ladder of pair "
                f"{prec.pair_index}"
            )
        # descend toward the pursued b-set
        if ii >= 1:
            found = self._best_choice(s, i, prec.iterates[ii - 1].region)
            if found is not None:
                return MoveDecision(rows[0], found[0], found[1], memory)
        # pursued b-set visited here: switch pairs
        if ii == 1 and s in mine.b:
            found = self._best_choice(s, i, self.w)
            if found is not None:
                return MoveDecision(rows[1], found[0], found[1], 1 - memory)
        sub = prec.iterates[ii].sub
        if sub is None or not sub.pairs:
            raise ExtractionError(
                f"missing sub-game record at pair {prec.pair_index} iterate {ii}"
            )
        sprec = sub.pairs[0]
        jj = self._level_map(sprec)[s]
        if jj < 0:
            raise ExtractionError(
                f"state {s} missing from sub-game ladder at pair "
                f"{prec.pair_index} iterate {ii}"
            )
        # descend the sub-game ladder
        if jj >= 1:
            found = self._best_choice(s, i, sprec.iterates[jj - 1].region)
            if found is not None:
                return MoveDecision(rows[2], found[0], found[1], memory)
        # other b-set visited inside the sub-game: exit to the iterate
        if jj == 1 and s in other.b:
            found = self._best_choice(s, i, prec.iterates[ii].region)
            if found is not None:
                return MoveDecision(rows[3], found[0], found[1], memory)
        # both assumptions blocked: stay
        found = self._best_choice(s, i, sprec.iterates[jj].region)
        if found is not None:
            return MoveDecision(rows[4], found[0], found[1], memory)
        raise ExtractionError(
            f"no ladder row applies at state {s}, memory {memory}, input {i} "
            f"(iterate {ii}, sub-iterate {jj})"
        )


def best_choice(game: Game, s: int, i: int, target: StateSet):
    """Lexicographically smallest choice whose successor lies in target."""
    return game.best_choice_into(s, i, target.bits)


def extract_strategy_2pairs(game: Game, record: IterateRecord) -> Strategy:
    if len(game.pairs) != 2:
        raise ValueError("game does not have exactly 2 pairs")
    if record.w.is_empty():
        raise ValueError("winning region is empty")
    return Strategy(game, record)


def extract_strategy_1pair(game: Game, record: IterateRecord) -> Strategy:
    if len(game.pairs) != 1:
        raise ValueError("game does not have exactly 1 pair")
    return Strategy(game, record)


def extract_strategy(game: Game, record: IterateRecord) -> Strategy:
    """Dispatch on the pair count (0, 1, or 2)."""
    if len(game.pairs) > 2:
        raise ValueError("strategy extraction supports at most 2 pairs")
    return Strategy(game, record)


class MealyMachine:
    """Closed controller: deterministic, input-complete, with per-state
    game annotations used by the simulator and the emitters."""

    def __init__(
        self,
        input_names: list[str],
        output_names: list[str],
        states: list[dict],
        transitions: list[list[tuple[int, int]]],
        initial: int = 0,
        rows: list[list[int]] | None = None,
    ):
        self.input_names = list(input_names)
        self.output_names = list(output_names)
        self.states = states
        self.transitions = transitions
        self.initial = initial
        self.rows = rows

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_input_vals(self) -> int:
        return 1 << len(self.input_names)

    def step(self, state: int, input_bits: int) -> tuple[int, int]:
        """(output_bits, next_state)."""
        return self.transitions[state][input_bits]

    def check_complete(self) -> None:
        for s, row in enumerate(self.transitions):
            if len(row) != self.n_input_vals:
                raise ValueError(f"machine state {s} is not input-complete")

    def dump(self) -> dict:
        states_doc = [
            {
                "id": k,
                "game_state": st.get("game_state"),
                "memory": st.get("memory"),
                "okE": st.get("okE"),
                "okS": st.get("okS"),
                "x": st.get("x"),
                "y": st.get("y"),
            }
            for k, st in enumerate(self.states)
        ]
        trans_doc = [
            [
                {"input": i, "output": out, "next": nxt}
                for i, (out, nxt) in enumerate(row)
            ]
            for row in self.transitions
        ]
        return {
            "inputs": self.input_names,
            "outputs": self.output_names,
            "initial": self.initial,
            "states": states_doc,
            "transitions": trans_doc,
        }

    @classmethod
    def from_dump(cls, doc: dict) -> "MealyMachine":
        states = [
            {
                "game_state": sd.get("game_state"),
                "memory": sd.get("memory"),
                "okE": sd.get("okE"),
                "okS": sd.get("okS"),
                "x": sd.get("x"),
                "y": sd.get("y"),
            }
            for sd in doc["states"]
        ]
        transitions = []
        for row in doc["transitions"]:
            cells = sorted(row, key=lambda c: c["input"])
            transitions.append([(c["output"], c["next"]) for c in cells])
        return cls(
            doc["inputs"], doc["outputs"], states, transitions, doc["initial"]
        )


def _annotate(info: GameState) -> dict:
    return {
        "okE": info.okE,
        "okS": info.okS,
        "x": info.x,
        "y": info.y,
    }


def strategy_to_mealy(game: Game, strategy: Strategy) -> MealyMachine:
    """Breadth-first closure of the strategy from (initial, memory 0)."""
    w = strategy.w
    if game.initial not in w:
        witness = None
        for i in range(game.n_input_vals):
            if best_choice(game, game.initial, i, w) is None:
                witness = i
                break
        raise UnrealizableError(w, witness)

    index: dict[tuple[int, int], int] = {}
    states: list[dict] = []
    transitions: list[list[tuple[int, int]]] = []
    rows: list[list[int]] = []
    queue: deque[tuple[int, int]] = deque()

    def intern(gs: int, mem: int) -> int:
        key = (gs, mem)
        k = index.get(key)
        if k is None:
            k = len(states)
            index[key] = k
            entry = {"game_state": gs, "memory": mem}
            entry.update(_annotate(game.state_info(gs)))
            states.append(entry)
            transitions.append([])
            rows.append([])
            queue.append(key)
        return k

    intern(game.initial, 0)
    while queue:
        gs, mem = queue.popleft()
        k = index[(gs, mem)]
        row_out: list[tuple[int, int]] = []
        row_rows: list[int] = []
        for i in range(game.n_input_vals):
            dec = strategy.move(gs, mem, i)
            nxt = intern(dec.succ, dec.next_memory)
            row_out.append((dec.key[0], nxt))
            row_rows.append(dec.row)
        transitions[k] = row_out
        rows[k] = row_rows

    mach = MealyMachine(
        game.input_names, game.output_names, states, transitions, 0, rows
    )
    mach.check_complete()
    return mach
