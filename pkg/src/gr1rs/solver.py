"""Recursive fixpoint solver for Streett games, generic in the pair count.

The winning region is a greatest fixpoint Z; for each pair <a, b> in
order, a least fixpoint Y accumulates the states that can reach
b & pr(Z) (or the surrounding escape set) in finitely many rounds,
recursing on the remaining pairs inside the sub-game restricted to !a.
With no pairs left the recursion bottoms out in a stay-or-escape
greatest fixpoint (m_str).

Iterates are recorded on a dedicated pass after convergence, with the
outer Z frozen at the final winning region: those are the sets the
strategy extractor walks, and the iterates of a converged greatest
fixpoint are stable, so each recorded ladder tops out at W exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .game import Game, StateSet, StreettPair


class SolverError(RuntimeError):
    pass


@dataclass
class IterStep:
    """One least-fixpoint iterate and the record of the recursive call
    that produced it (None for the base iterate, the empty set)."""

    region: StateSet
    sub: "CallRecord | None" = None


@dataclass
class PairRecord:
    pair_index: int
    iterates: list[IterStep] = field(default_factory=list)

    @property
    def converged(self) -> StateSet:
        return self.iterates[-1].region

    def first_entry(self, s: int) -> int:
        """Minimal iterate index containing s (first-entry convention)."""
        for j, step in enumerate(self.iterates):
            if s in step.region:
                return j
        raise KeyError(f"state {s} not in any iterate")


@dataclass
class CallRecord:
    """Record of one solver call: per-pair ladders, or the innermost
    stay-or-escape region when no pairs remained."""

    pairs: list[PairRecord] = field(default_factory=list)
    mstr_region: StateSet | None = None
    result: StateSet | None = None


@dataclass
class IterateRecord:
    """All fixpoint iterates of the final, converged solver pass."""

    w: StateSet
    top: CallRecord

    def validate(self) -> None:
        def walk(rec: CallRecord, bound: StateSet) -> None:
            for prec in rec.pairs:
                prev = None
                for j, step in enumerate(prec.iterates):
                    if prev is not None and not prev.issubset(step.region):
                        raise SolverError(
                            f"iterate {j} of pair {prec.pair_index} not increasing"
                        )
                    if not step.region.issubset(bound):
                        raise SolverError(
                            f"iterate {j} of pair {prec.pair_index} escapes its "
                            f"enclosing region"
                        )
                    if step.sub is not None:
                        walk(step.sub, step.region)
                    prev = step.region
                if not prec.converged == bound:
                    raise SolverError(
                        f"pair {prec.pair_index} ladder did not converge to the "
                        f"enclosing region"
                    )

        walk(self.top, self.w)

    def dump(self) -> dict:
        def set_doc(S: StateSet):
            return sorted(S.indices())

        def rec_doc(rec: CallRecord) -> dict:
            doc: dict = {}
            if rec.mstr_region is not None:
                doc["mstr"] = set_doc(rec.mstr_region)
            doc["pairs"] = [
                {
                    "pair": prec.pair_index,
                    "iterates": [
                        {
                            "region": set_doc(step.region),
                            "sub": None if step.sub is None else rec_doc(step.sub),
                        }
                        for step in prec.iterates
                    ],
                }
                for prec in rec.pairs
            ]
            doc["result"] = set_doc(rec.result) if rec.result is not None else None
            return doc

        return {"w": set_doc(self.w), "record": rec_doc(self.top)}


def m_str(g: Game, stay: StateSet, goal: StateSet) -> StateSet:
    """Greatest fixpoint of X -> goal | (stay & pr(X)).

    The region where the system can remain inside `stay` forever or
    eventually enter `goal` without leaving `stay` first.
    """
    X = g.all_states()
    while True:
        nxt = goal | (stay & g.pr(X))
        if nxt == X:
            return X
        X = nxt


def _sub_solve(
    g: Game,
    pairs: list[tuple[int, StreettPair]],
    stay: StateSet,
    goal: StateSet,
    rec: CallRecord | None,
) -> StateSet:
    if not pairs:
        region = m_str(g, stay, goal)
        if rec is not None:
            rec.mstr_region = region
            rec.result = region
        return region
    return str_solve(g, pairs, stay, goal, rec)


def str_solve(
    g: Game,
    pairs: list[tuple[int, StreettPair]],
    stay: StateSet,
    goal: StateSet,
    rec: CallRecord | None = None,
) -> StateSet:
    """Solve for the given (index, pair) list within stay/goal.

    When `rec` is provided, the converged region is computed first and
    a second, non-mutating pass re-runs each pair's least fixpoint with
    Z frozen, filling `rec` with the iterate ladders.
    """
    if not pairs:
        raise SolverError("str_solve requires at least one pair")

    Z = g.all_states()
    while True:
        z_start = Z
        for k, pair in pairs:
            p1 = goal | (stay & pair.b & g.pr(Z))
            rest = [(kk, pp) for kk, pp in pairs if kk != k]
            Y = g.empty()
            while True:
                p2 = p1 | (stay & g.pr(Y))
                nxt = _sub_solve(g, rest, stay & ~pair.a, p2, None)
                if nxt == Y:
                    break
                Y = nxt
            Z = Y
        if Z == z_start:
            break

    if rec is not None:
        rec.result = Z
        for k, pair in pairs:
            prec = PairRecord(pair_index=k)
            prec.iterates.append(IterStep(g.empty(), None))
            p1 = goal | (stay & pair.b & g.pr(Z))
            rest = [(kk, pp) for kk, pp in pairs if kk != k]
            Y = g.empty()
            while True:
                p2 = p1 | (stay & g.pr(Y))
                sub = CallRecord()
                nxt = _sub_solve(g, rest, stay & ~pair.a, p2, sub)
                if nxt == Y:
                    break
                Y = nxt
                prec.iterates.append(IterStep(Y, sub))
            if not Y == Z:
                raise SolverError(
                    f"recording pass for pair {k} did not reproduce the "
                    f"converged region"
                )
            rec.pairs.append(prec)
    return Z


def main_streett(g: Game) -> tuple[StateSet, IterateRecord]:
    """Winning region plus the recorded iterate lattice."""
    indexed = list(enumerate(g.pairs))
    top = CallRecord()
    if not indexed:
        region = m_str(g, g.all_states(), g.empty())
        top.mstr_region = region
        top.result = region
        record = IterateRecord(region, top)
        record.validate()
        return region, record
    W = str_solve(g, indexed, g.all_states(), g.empty(), rec=top)
    record = IterateRecord(W, top)
    record.validate()
    return W, record
