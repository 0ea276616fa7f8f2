"""Shared test machinery: seeded random games and policy closures."""

from __future__ import annotations

import random

from gr1rs import direct_game
from gr1rs.strategy import MealyMachine


def random_game(seed, max_states=7, two_pairs=True):
    """Small random total game; deterministic per seed."""
    rng = random.Random(seed)
    n = rng.randint(2, max_states)
    in_bits = rng.choice([0, 1, 2]) if n <= 6 else rng.choice([0, 1])
    out_bits = rng.choice([1, 2])
    ni, no = 1 << in_bits, 1 << out_bits
    moves = [
        [[(o, rng.randrange(n)) for o in range(no)] for _ in range(ni)]
        for _ in range(n)
    ]

    def rset():
        p = rng.choice([0.15, 0.3, 0.5])
        return [s for s in range(n) if rng.random() < p]

    pairs = [(rset(), rset())]
    if two_pairs:
        pairs.append((rset(), rset()))
    return direct_game(moves, pairs, initial=0)


def acceptance_game(seed):
    """The acceptance-suite distribution: mostly small games, with the
    state and input-bit ranges exercised up to 12 states / 2 input bits
    while keeping the brute-force oracle affordable."""
    rng = random.Random(77000 + seed)
    r = seed % 125
    if r == 0:
        n, in_bits = 12, 1
    elif r == 1:
        n, in_bits = 8, 2
    elif r in (2, 3):
        n, in_bits = 11, 1
    elif r in (4, 5):
        n, in_bits = 7, 2
    elif r < 12:
        n, in_bits = rng.choice([9, 10]), 1
    elif r < 20:
        n, in_bits = 12, 0
    else:
        n = rng.choice([2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8])
        in_bits = rng.choice([0, 1, 1, 2]) if n <= 6 else rng.choice([0, 1])
    out_bits = rng.choice([1, 2])
    ni, no = 1 << in_bits, 1 << out_bits
    moves = [
        [[(o, rng.randrange(n)) for o in range(no)] for _ in range(ni)]
        for _ in range(n)
    ]

    def rset():
        p = rng.choice([0.15, 0.3, 0.5])
        return [s for s in range(n) if rng.random() < p]

    pairs = [(rset(), rset()), (rset(), rset())]
    return direct_game(moves, pairs, initial=0)


def close_policy(game, policy, initial=None):
    """Close an arbitrary controller policy into a MealyMachine.

    policy(mem, game_state, input) -> (choice_key, next_mem); used to
    build hand-written machines (the trap controller fixture) with the
    game-state annotations the soundness checker needs.
    """
    if initial is None:
        initial = game.initial
    index = {}
    states = []
    transitions = []
    queue = []

    def intern(gs, mem):
        key = (gs, mem)
        if key not in index:
            index[key] = len(states)
            info = game.state_info(gs)
            states.append(
                {
                    "game_state": gs,
                    "memory": mem,
                    "okE": info.okE,
                    "okS": info.okS,
                    "x": info.x,
                    "y": info.y,
                }
            )
            transitions.append([])
            queue.append(key)
        return index[key]

    intern(initial, 0)
    while queue:
        gs, mem = queue.pop(0)
        k = index[(gs, mem)]
        row = []
        for i in range(game.n_input_vals):
            key, nmem = policy(mem, gs, i)
            succ = game.successor(gs, i, key)
            row.append((key[0], intern(succ, nmem)))
        transitions[k] = row
    return MealyMachine(game.input_names, game.output_names, states, transitions, 0)
