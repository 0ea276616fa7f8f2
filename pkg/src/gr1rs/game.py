"""Explicit-state Streett game construction from a GR(1) spec.

The game state is (env automaton state, sys automaton state, counter x,
counter y, okE, okS).  One step: the environment picks an input
valuation, the system picks an output valuation plus, where an
automaton has no transition on the joint letter, a recovery target
state for it.  Robust mode completes the game with okE/okS flags and a
second Streett pair; plain mode routes violations to absorbing sinks.

Two engines back the same interface: a successor-list engine for small
or hand-built games, and a table engine (numpy) for built games, where
recovery moves are grouped into shared target patterns instead of being
enumerated one by one.
"""

from __future__ import annotations

import math
import os
from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import GR1Spec, SafetyAutomaton, product_states


class CapacityError(RuntimeError):
    """State space (or letter space) exceeds the configured cap."""


DEFAULT_STATE_CAP = 1 << 22
LETTER_CAP = 1 << 20


def step_counter(c: int, bound: int, satisfied: bool) -> int:
    """Advance one fairness counter.

    Value 0 always increments; a positive value increments (modulo
    bound+1) only when its fairness formula was satisfied.
    """
    if not 0 <= c <= bound:
        raise ValueError(f"counter {c} out of range 0..{bound}")
    if c == 0:
        return 1 % (bound + 1)
    if satisfied:
        return (c + 1) % (bound + 1)
    return c


def counter_bits(m: int, n: int) -> int:
    """Storage for both counters in bits."""
    return math.ceil(math.log2(m + 1)) + math.ceil(math.log2(n + 1))


class StateSet:
    """Dense bitset over game state indices, with exact set semantics."""

    __slots__ = ("n", "bits")

    def __init__(self, n: int, bits: int = 0):
        self.n = n
        self.bits = bits

    @classmethod
    def empty(cls, n: int) -> "StateSet":
        return cls(n, 0)

    @classmethod
    def full(cls, n: int) -> "StateSet":
        return cls(n, (1 << n) - 1)

    @classmethod
    def from_indices(cls, n: int, indices) -> "StateSet":
        bits = 0
        for i in indices:
            if not 0 <= i < n:
                raise IndexError(f"state index {i} out of range")
            bits |= 1 << i
        return cls(n, bits)

    def _check(self, other: "StateSet") -> None:
        if self.n != other.n:
            raise ValueError("state sets over different games")

    def __and__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.n, self.bits & other.bits)

    def __or__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.n, self.bits | other.bits)

    def __sub__(self, other: "StateSet") -> "StateSet":
        self._check(other)
        return StateSet(self.n, self.bits & ~other.bits)

    def __invert__(self) -> "StateSet":
        return StateSet(self.n, ~self.bits & ((1 << self.n) - 1))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StateSet) and self.n == other.n and self.bits == other.bits
        )

    def __hash__(self):
        return hash((self.n, self.bits))

    def __contains__(self, idx: int) -> bool:
        return 0 <= idx < self.n and bool((self.bits >> idx) & 1)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __iter__(self):
        bits = self.bits
        while bits:
            low = bits & -bits
            yield low.bit_length() - 1
            bits ^= low

    def is_empty(self) -> bool:
        return self.bits == 0

    def issubset(self, other: "StateSet") -> bool:
        self._check(other)
        return self.bits & ~other.bits == 0

    def indices(self) -> list[int]:
        return list(self)

    def __repr__(self):
        if len(self) > 12:
            return f"StateSet({len(self)}/{self.n} states)"
        return f"StateSet({self.indices()})"


@dataclass(frozen=True)
class StreettPair:
    """A play satisfies the pair iff: a visited infinitely often implies
    b visited infinitely often."""

    a: StateSet
    b: StateSet


@dataclass(frozen=True)
class SysChoice:
    """One system move: output valuation bits plus optional recovery
    targets (indices into the respective automaton-product state list),
    present exactly when that automaton has no transition on the joint
    letter."""

    out_bits: int
    env_recover: int | None = None
    sys_recover: int | None = None

    @property
    def key(self) -> tuple[int, int, int]:
        er = -1 if self.env_recover is None else self.env_recover
        sr = -1 if self.sys_recover is None else self.sys_recover
        return (self.out_bits, er, sr)


@dataclass(frozen=True)
class GameState:
    """Decoded view of one game state."""

    kind: str  # "state" | "win_sink" | "lose_sink"
    qe: tuple[str, ...] | None
    qs: tuple[str, ...] | None
    x: int | None
    y: int | None
    okE: bool
    okS: bool


_FL_TT, _FL_TF, _FL_FT, _FL_FF = 3, 2, 1, 0  # (okE<<1)|okS


class Game:
    """Common game interface; see _ListEngine / _CoreEngine."""

    mode: str
    n_states: int
    initial: int
    pairs: list[StreettPair]
    input_names: list[str]
    output_names: list[str]

    @property
    def n_input_vals(self) -> int:
        return 1 << len(self.input_names)

    @property
    def n_output_vals(self) -> int:
        return 1 << len(self.output_names)

    def choices(self, s: int, i: int):
        """Yield (choice_key, successor) in lexicographic key order."""
        raise NotImplementedError

    def successor(self, s: int, i: int, key: tuple[int, int, int]) -> int:
        raise NotImplementedError

    def best_choice_into(self, s: int, i: int, target_bits: int):
        """Lexicographically smallest choice entering the target, or None."""
        for key, succ in self.choices(s, i):
            if (target_bits >> succ) & 1:
                return key, succ
        return None

    def pr(self, X: StateSet) -> StateSet:
        """States where, for every input, some system choice enters X."""
        raise NotImplementedError

    def state_info(self, s: int) -> GameState:
        raise NotImplementedError

    def all_states(self) -> StateSet:
        return StateSet.full(self.n_states)

    def empty(self) -> StateSet:
        return StateSet.empty(self.n_states)

    def succ_set(self, s: int) -> StateSet:
        """All one-step successors over every (input, choice)."""
        raise NotImplementedError

    def reachable(self) -> StateSet:
        seen = StateSet.empty(self.n_states)
        seen.bits |= 1 << self.initial
        frontier = deque([self.initial])
        while frontier:
            s = frontier.popleft()
            for t in self.succ_set(s):
                if t not in seen:
                    seen.bits |= 1 << t
                    frontier.append(t)
        return seen

    def dump(self) -> dict:
        """Deterministic JSON-ready document (states, moves, pairs)."""
        if self.n_states * self.n_input_vals > 200_000:
            raise CapacityError(
                "game too large for an explicit dump "
                f"({self.n_states} states x {self.n_input_vals} inputs)"
            )
        states_doc = []
        for s in range(self.n_states):
            info = self.state_info(s)
            states_doc.append(
                {
                    "id": s,
                    "kind": info.kind,
                    "qe": None if info.qe is None else list(info.qe),
                    "qs": None if info.qs is None else list(info.qs),
                    "x": info.x,
                    "y": info.y,
                    "okE": info.okE,
                    "okS": info.okS,
                }
            )
        moves_doc = []
        for s in range(self.n_states):
            per_input = []
            for i in range(self.n_input_vals):
                per_input.append(
                    [
                        {
                            "out": key[0],
                            "env_recover": None if key[1] < 0 else key[1],
                            "sys_recover": None if key[2] < 0 else key[2],
                            "succ": succ,
                        }
                        for key, succ in self.choices(s, i)
                    ]
                )
            moves_doc.append(per_input)
        pairs_doc = [
            {"a": sorted(p.a.indices()), "b": sorted(p.b.indices())} for p in self.pairs
        ]
        return {
            "mode": self.mode,
            "inputs": self.input_names,
            "outputs": self.output_names,
            "n_states": self.n_states,
            "initial": self.initial,
            "states": states_doc,
            "moves": moves_doc,
            "pairs": pairs_doc,
        }


class _ListEngine(Game):
    """Explicit successor lists; suits small and hand-constructed games."""

    def __init__(
        self,
        moves: list[list[list[tuple[tuple[int, int, int], int]]]],
        pairs: list[StreettPair],
        initial: int = 0,
        input_names: list[str] | None = None,
        output_names: list[str] | None = None,
        mode: str = "direct",
        state_views: list[GameState] | None = None,
    ):
        self.n_states = len(moves)
        n_inputs = len(moves[0]) if moves else 1
        in_bits = max(1, (n_inputs - 1).bit_length()) if n_inputs > 1 else 0
        if (1 << in_bits) != n_inputs:
            raise ValueError("number of input valuations must be a power of two")
        self.input_names = input_names or [f"i{k}" for k in range(in_bits)]
        out_bits = 0
        for row in moves:
            for cell in row:
                for key, _ in cell:
                    out_bits = max(out_bits, key[0].bit_length())
        self.output_names = output_names or [f"o{k}" for k in range(max(1, out_bits))]
        self.moves = [
            [sorted(cell, key=lambda kv: kv[0]) for cell in row] for row in moves
        ]
        self.pairs = pairs
        self.initial = initial
        self.mode = mode
        self._views = state_views
        self._succ_mask = [
            [self._mask([succ for _, succ in cell]) for cell in row]
            for row in self.moves
        ]

    @staticmethod
    def _mask(indices) -> int:
        bits = 0
        for i in indices:
            bits |= 1 << i
        return bits

    def choices(self, s, i):
        yield from self.moves[s][i]

    def successor(self, s, i, key):
        for k, succ in self.moves[s][i]:
            if k == key:
                return succ
        raise KeyError(f"no choice {key} at state {s} input {i}")

    def pr(self, X: StateSet) -> StateSet:
        bits = X.bits
        res = 0
        for s in range(self.n_states):
            for mask in self._succ_mask[s]:
                if not (mask & bits):
                    break
            else:
                res |= 1 << s
        return StateSet(self.n_states, res)

    def succ_set(self, s: int) -> StateSet:
        bits = 0
        for mask in self._succ_mask[s]:
            bits |= mask
        return StateSet(self.n_states, bits)

    def state_info(self, s: int) -> GameState:
        if self._views is not None:
            return self._views[s]
        return GameState("state", None, None, None, None, True, True)


def direct_game(
    moves, pairs_indices, initial=0, input_names=None, output_names=None
) -> Game:
    """Construct a game from explicit moves.

    moves[s][i] = list of (out_bits, succ) or ((out, er, sr), succ);
    pairs_indices = list of (a_indices, b_indices).
    """
    n = len(moves)
    norm: list[list[list[tuple[tuple[int, int, int], int]]]] = []
    for row in moves:
        norm_row = []
        for cell in row:
            items = []
            for entry in cell:
                key, succ = entry
                if isinstance(key, int):
                    key = (key, -1, -1)
                items.append((tuple(key), succ))
            norm_row.append(items)
        norm.append(norm_row)
    pairs = [
        StreettPair(StateSet.from_indices(n, a), StateSet.from_indices(n, b))
        for a, b in pairs_indices
    ]
    return _ListEngine(norm, pairs, initial, input_names, output_names)


@dataclass
class _Pattern:
    """Shared recovery-target family: all successors reachable by the
    free recovery indices of one violating (state, letter) move."""

    kind: str  # "e" | "s" | "b"
    members: list[tuple[int, int, int]]  # (env_recover, sys_recover, state)
    mask: int


class _PartTable:
    """Per-letter transition table of one automaton part."""

    def __init__(self, aut: SafetyAutomaton, signal_names: list[str], n_letters: int):
        self.aut = aut
        self.n = len(aut.states)
        self.init_idx = aut.states.index(aut.initial)
        read = sorted(aut.read_signals(), key=signal_names.index)
        positions = [signal_names.index(r) for r in read]
        letters = np.arange(n_letters, dtype=np.int64)
        proj = np.zeros(n_letters, dtype=np.int64)
        for k, pos in enumerate(positions):
            proj |= ((letters >> pos) & 1) << k
        # determinism was validated upstream: at most one target per letter
        tproj = np.full((self.n, 1 << len(read)), -1, dtype=np.int32)
        idx = {s: i for i, s in enumerate(aut.states)}
        for si, state in enumerate(aut.states):
            for p in range(1 << len(read)):
                letter = {n: bool((p >> k) & 1) for k, n in enumerate(read)}
                t = aut.step(state, letter)
                if t is not None:
                    tproj[si, p] = idx[t]
        self.next = tproj[:, proj]  # [part_states, n_letters]


class _CoreEngine(Game):
    """Table-backed game produced by build_game.

    Moves are stored per core (qe, qs, x, y); the ok flags do not
    influence available moves, so states sharing a core share rows.
    Row entries: successor state index when the joint letter is legal
    for both automata, else -(pattern_id+1).
    """

    def __init__(self, spec: GR1Spec, mode: str, state_cap: int):
        self.mode = mode
        self.spec = spec
        self.input_names = list(spec.input_names)
        self.output_names = list(spec.output_names)
        self._build(spec, mode, state_cap)

    # -- construction -----------------------------------------------------

    def _build(self, spec: GR1Spec, mode: str, cap: int) -> None:
        names = spec.signal_names
        ni = len(self.input_names)
        no = len(self.output_names)
        n_letters = 1 << (ni + no)
        if n_letters > LETTER_CAP:
            raise CapacityError(f"letter space 2^{ni + no} exceeds cap")
        self._ni = ni
        self._n_letters = n_letters

        self._eparts = [_PartTable(a, names, n_letters) for a in spec.env_safety]
        self._sparts = [_PartTable(a, names, n_letters) for a in spec.sys_safety]
        self.env_states = product_states(spec.env_safety)
        self.sys_states = product_states(spec.sys_safety)
        # per product state, the tuple of part-state indices
        self._env_idx = [
            tuple(a.states.index(s) for a, s in zip(spec.env_safety, tup))
            for tup in self.env_states
        ]
        self._sys_idx = [
            tuple(a.states.index(s) for a, s in zip(spec.sys_safety, tup))
            for tup in self.sys_states
        ]
        nQe, nQs = len(self.env_states), len(self.sys_states)
        m, n = spec.m, spec.n

        # counter step tables over letters
        def sat_array(expr):
            vals = np.zeros(n_letters, dtype=bool)
            read = sorted(expr.all_signals(), key=names.index)
            positions = [names.index(r) for r in read]
            letters = np.arange(n_letters, dtype=np.int64)
            proj = np.zeros(n_letters, dtype=np.int64)
            for k, pos in enumerate(positions):
                proj |= ((letters >> pos) & 1) << k
            base = np.zeros(1 << len(read), dtype=bool)
            for p in range(1 << len(read)):
                letter = {nm: bool((p >> k) & 1) for k, nm in enumerate(read)}
                base[p] = expr.eval(letter)
            vals[:] = base[proj]
            return vals

        env_sat = [sat_array(e) for e in spec.env_fair]
        sys_sat = [sat_array(e) for e in spec.sys_fair]
        self._step_x = [
            np.full(n_letters, 1 % (m + 1), dtype=np.int32)
            if x == 0
            else np.where(env_sat[x - 1], (x + 1) % (m + 1), x).astype(np.int32)
            for x in range(m + 1)
        ]
        self._step_y = [
            np.full(n_letters, 1 % (n + 1), dtype=np.int32)
            if y == 0
            else np.where(sys_sat[y - 1], (y + 1) % (n + 1), y).astype(np.int32)
            for y in range(n + 1)
        ]

        # per-part next rows stacked lazily per core
        estrides = []
        acc = 1
        for p in reversed(self._eparts):
            estrides.append(acc)
            acc *= p.n
        estrides.reverse()
        sstrides = []
        acc = 1
        for p in reversed(self._sparts):
            sstrides.append(acc)
            acc *= p.n
        sstrides.reverse()
        self._estrides, self._sstrides = estrides, sstrides

        self._m, self._n = m, n
        self._nQe, self._nQs = nQe, nQs

        core_index: dict[int, int] = {}
        cores: list[tuple[int, int, int, int]] = []
        state_index: dict[int, int] = {}
        states: list[tuple[int, int]] = []  # (core_idx, fl) ; sinks use core -1/-2
        rows: list[np.ndarray | None] = []
        patterns: list[_Pattern] = []
        pattern_index: dict[tuple, int] = {}
        queue: deque[int] = deque()

        def core_key(qe, qs, x, y):
            return ((qe * nQs + qs) * (m + 1) + x) * (n + 1) + y

        def intern_core(qe, qs, x, y):
            key = core_key(qe, qs, x, y)
            ci = core_index.get(key)
            if ci is None:
                ci = len(cores)
                core_index[key] = ci
                cores.append((qe, qs, x, y))
                rows.append(None)
                queue.append(ci)
            return ci

        def intern_state(ci, fl):
            key = ci * 4 + fl
            si = state_index.get(key)
            if si is None:
                si = len(states)
                if si >= cap:
                    raise CapacityError(
                        f"state space exceeds cap of {cap} states "
                        f"(override with GR1RS_STATE_CAP)"
                    )
                state_index[key] = si
                states.append((ci, fl))
            return si

        qe0 = self.env_states.index(tuple(a.initial for a in spec.env_safety))
        qs0 = self.sys_states.index(tuple(a.initial for a in spec.sys_safety))
        x0, y0 = min(1, m), min(1, n)
        ci0 = intern_core(qe0, qs0, x0, y0)
        self.initial = intern_state(ci0, _FL_TT)

        self._win_sink = self._lose_sink = None
        if mode == "plain":
            self._win_sink = len(states)
            states.append((-1, _FL_FT))  # entered on an env violation
            self._lose_sink = len(states)
            states.append((-2, _FL_TF))  # entered on a sys violation

        def get_pattern(kind, qe_t, qs_t, x_t, y_t):
            pkey = (kind, qe_t, qs_t, x_t, y_t)
            pid = pattern_index.get(pkey)
            if pid is not None:
                return pid
            members = []
            mask = 0
            if kind == "e":
                fl = _FL_FT
                for qe_r in range(nQe):
                    ci = intern_core(qe_r, qs_t, x_t, y_t)
                    si = intern_state(ci, fl)
                    members.append((qe_r, -1, si))
                    mask |= 1 << si
            elif kind == "s":
                fl = _FL_TF
                for qs_r in range(nQs):
                    ci = intern_core(qe_t, qs_r, x_t, y_t)
                    si = intern_state(ci, fl)
                    members.append((-1, qs_r, si))
                    mask |= 1 << si
            else:
                fl = _FL_FF
                for qe_r in range(nQe):
                    for qs_r in range(nQs):
                        ci = intern_core(qe_r, qs_r, x_t, y_t)
                        si = intern_state(ci, fl)
                        members.append((qe_r, qs_r, si))
                        mask |= 1 << si
            pid = len(patterns)
            patterns.append(_Pattern(kind, members, mask))
            pattern_index[pkey] = pid
            return pid

        def product_rows(parts, idx_tuple, strides):
            nxt = np.zeros(n_letters, dtype=np.int64)
            dead = np.zeros(n_letters, dtype=bool)
            for part, sidx, stride in zip(parts, idx_tuple, strides):
                row = part.next[sidx]
                dead |= row < 0
                nxt += np.maximum(row, 0).astype(np.int64) * stride
            return nxt, dead

        while queue:
            ci = queue.popleft()
            qe, qs, x, y = cores[ci]
            enxt, edead = product_rows(self._eparts, self._env_idx[qe], estrides)
            snxt, sdead = product_rows(self._sparts, self._sys_idx[qs], sstrides)
            xn = self._step_x[x]
            yn = self._step_y[y]

            row = np.empty(n_letters, dtype=np.int64)
            e_list = edead.tolist()
            s_list = sdead.tolist()
            en_list = enxt.tolist()
            sn_list = snxt.tolist()
            xn_list = xn.tolist()
            yn_list = yn.tolist()
            if mode == "plain":
                win, lose = self._win_sink, self._lose_sink
                for L in range(n_letters):
                    if e_list[L]:
                        row[L] = win
                    elif s_list[L]:
                        row[L] = lose
                    else:
                        c2 = intern_core(en_list[L], sn_list[L], xn_list[L], yn_list[L])
                        row[L] = intern_state(c2, _FL_TT)
            else:
                for L in range(n_letters):
                    ed, sd = e_list[L], s_list[L]
                    if not ed and not sd:
                        c2 = intern_core(en_list[L], sn_list[L], xn_list[L], yn_list[L])
                        row[L] = intern_state(c2, _FL_TT)
                    elif ed and not sd:
                        pid = get_pattern("e", -1, sn_list[L], xn_list[L], yn_list[L])
                        row[L] = -(pid + 1)
                    elif not ed and sd:
                        pid = get_pattern("s", en_list[L], -1, xn_list[L], yn_list[L])
                        row[L] = -(pid + 1)
                    else:
                        pid = get_pattern("b", -1, -1, xn_list[L], yn_list[L])
                        row[L] = -(pid + 1)
            rows[ci] = row

        self._cores = cores
        self._states = states
        self.n_states = len(states)
        self._patterns = patterns
        self._rowmat = np.stack(rows) if rows else np.zeros((0, n_letters), np.int64)
        self._core_of_state = np.array(
            [c if c >= 0 else 0 for c, _ in states], dtype=np.int64
        )
        self._is_sink = np.array([c < 0 for c, _ in states], dtype=bool)
        self._pairs_from_states(m, n)

    def _pairs_from_states(self, m, n) -> None:
        n_states = self.n_states
        a1 = b1 = a2 = b2 = 0
        for si, (ci, fl) in enumerate(self._states):
            if ci < 0:
                continue
            _, _, x, y = self._cores[ci]
            if x == 0:
                a1 |= 1 << si
            if y == 0:
                b1 |= 1 << si
            if not (fl & 1):  # okS false
                a2 |= 1 << si
            if not (fl & 2):  # okE false
                b2 |= 1 << si
        if self.mode == "plain":
            a1 |= 1 << self._lose_sink
            b1 |= 1 << self._win_sink
            self.pairs = [
                StreettPair(StateSet(n_states, a1), StateSet(n_states, b1))
            ]
        else:
            self.pairs = [
                StreettPair(StateSet(n_states, a1), StateSet(n_states, b1)),
                StreettPair(StateSet(n_states, a2), StateSet(n_states, b2)),
            ]

    # -- game interface ----------------------------------------------------

    def _entry(self, s: int, L: int) -> int:
        ci, _ = self._states[s]
        if ci == -1:
            return self._win_sink
        if ci == -2:
            return self._lose_sink
        return int(self._rowmat[ci, L])

    def choices(self, s, i):
        for o in range(self.n_output_vals):
            L = i | (o << self._ni)
            e = self._entry(s, L)
            if e >= 0:
                yield ((o, -1, -1), e)
            else:
                pat = self._patterns[-e - 1]
                for er, sr, succ in pat.members:
                    yield ((o, er, sr), succ)

    def best_choice_into(self, s, i, target_bits):
        for o in range(self.n_output_vals):
            L = i | (o << self._ni)
            e = self._entry(s, L)
            if e >= 0:
                if (target_bits >> e) & 1:
                    return (o, -1, -1), e
            else:
                pat = self._patterns[-e - 1]
                if pat.mask & target_bits:
                    for er, sr, succ in pat.members:
                        if (target_bits >> succ) & 1:
                            return (o, er, sr), succ
        return None

    def successor(self, s, i, key):
        o, er, sr = key
        L = i | (o << self._ni)
        e = self._entry(s, L)
        if e >= 0:
            if (er, sr) != (-1, -1):
                raise KeyError(f"choice {key} has recovery at a legal move")
            return e
        pat = self._patterns[-e - 1]
        if pat.kind == "e":
            idx = er
        elif pat.kind == "s":
            idx = sr
        else:
            idx = er * self._nQs + sr
        if not 0 <= idx < len(pat.members):
            raise KeyError(f"invalid recovery indices in choice {key}")
        got = pat.members[idx]
        if (got[0], got[1]) != (er, sr):
            raise KeyError(f"invalid recovery indices in choice {key}")
        return got[2]

    def _bool_vec(self, X: StateSet) -> np.ndarray:
        buf = X.bits.to_bytes((self.n_states + 7) // 8, "little")
        arr = np.unpackbits(np.frombuffer(buf, dtype=np.uint8), bitorder="little")
        return arr[: self.n_states].astype(bool)

    def _from_bool_vec(self, vec: np.ndarray) -> StateSet:
        packed = np.packbits(vec, bitorder="little")
        return StateSet(self.n_states, int.from_bytes(packed.tobytes(), "little"))

    def pr(self, X: StateSet) -> StateSet:
        xb = self._bool_vec(X)
        M = self._rowmat
        hit = np.zeros(M.shape, dtype=bool)
        pos = M >= 0
        hit[pos] = xb[M[pos]]
        if self._patterns:
            pvals = np.fromiter(
                (bool(p.mask & X.bits) for p in self._patterns),
                dtype=bool,
                count=len(self._patterns),
            )
            neg = ~pos
            hit[neg] = pvals[(-M[neg]) - 1]
        ni = self._ni
        n_out = self.n_output_vals
        # letter L = i | (o << ni): reshape rows to [cores, n_out, n_in]
        hit3 = hit.reshape(len(self._cores), n_out, 1 << ni)
        core_ok = hit3.any(axis=1).all(axis=1)
        state_ok = core_ok[self._core_of_state]
        # sinks are absorbing: successor set is the sink itself
        if self.mode == "plain":
            state_ok = state_ok.copy()
            state_ok[self._win_sink] = bool(xb[self._win_sink])
            state_ok[self._lose_sink] = bool(xb[self._lose_sink])
        return self._from_bool_vec(state_ok)

    def succ_set(self, s: int) -> StateSet:
        ci, _ = self._states[s]
        if ci < 0:
            idx = self._win_sink if ci == -1 else self._lose_sink
            return StateSet(self.n_states, 1 << idx)
        bits = 0
        for e in self._rowmat[ci].tolist():
            if e >= 0:
                bits |= 1 << e
            else:
                bits |= self._patterns[-e - 1].mask
        return StateSet(self.n_states, bits)

    def state_info(self, s: int) -> GameState:
        ci, fl = self._states[s]
        if ci == -1:
            return GameState("win_sink", None, None, None, None, False, True)
        if ci == -2:
            return GameState("lose_sink", None, None, None, None, True, False)
        qe, qs, x, y = self._cores[ci]
        return GameState(
            "state",
            self.env_states[qe],
            self.sys_states[qs],
            x,
            y,
            bool(fl & 2),
            bool(fl & 1),
        )

    def env_product_step(self, qe_idx: int, letter_bits: int) -> int | None:
        """Index of the env product successor on a letter, None on violation."""
        idx = 0
        for part, sidx, stride in zip(
            self._eparts, self._env_idx[qe_idx], self._estrides
        ):
            t = int(part.next[sidx, letter_bits])
            if t < 0:
                return None
            idx += t * stride
        return idx

    def sys_product_step(self, qs_idx: int, letter_bits: int) -> int | None:
        idx = 0
        for part, sidx, stride in zip(
            self._sparts, self._sys_idx[qs_idx], self._sstrides
        ):
            t = int(part.next[sidx, letter_bits])
            if t < 0:
                return None
            idx += t * stride
        return idx


def build_game(spec: GR1Spec, mode: str = "robust", state_cap: int | None = None) -> Game:
    """Construct the Streett game for a validated spec.

    mode "robust" adds the ok-flag completion and the second pair;
    mode "plain" encodes violations as absorbing sinks, one pair.
    """
    if mode not in ("robust", "plain"):
        raise ValueError(f"unknown mode '{mode}'")
    if state_cap is None:
        state_cap = int(os.environ.get("GR1RS_STATE_CAP", DEFAULT_STATE_CAP))
    spec.validate()
    return _CoreEngine(spec, mode, state_cap)


def pr(g: Game, X: StateSet) -> StateSet:
    return g.pr(X)


def reachable(g: Game) -> StateSet:
    return g.reachable()


def game_from_dump(doc: dict) -> Game:
    """Rebuild a (small) game from its dump document."""
    n = doc["n_states"]
    moves = []
    for s in range(n):
        row = []
        for cell in doc["moves"][s]:
            row.append(
                [
                    (
                        (
                            ch["out"],
                            -1 if ch["env_recover"] is None else ch["env_recover"],
                            -1 if ch["sys_recover"] is None else ch["sys_recover"],
                        ),
                        ch["succ"],
                    )
                    for ch in cell
                ]
            )
        moves.append(row)
    pairs = [
        StreettPair(
            StateSet.from_indices(n, p["a"]), StateSet.from_indices(n, p["b"])
        )
        for p in doc["pairs"]
    ]
    views = [
        GameState(
            sd["kind"],
            None if sd["qe"] is None else tuple(sd["qe"]),
            None if sd["qs"] is None else tuple(sd["qs"]),
            sd["x"],
            sd["y"],
            sd["okE"],
            sd["okS"],
        )
        for sd in doc["states"]
    ]
    return _ListEngine(
        moves,
        pairs,
        doc["initial"],
        doc["inputs"],
        doc["outputs"],
        doc["mode"],
        views,
    )
