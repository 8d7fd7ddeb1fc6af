"""A small, deterministic CDCL SAT solver.

Complete search with first-UIP clause learning, two-watched-literal
propagation, activity-driven branching (ties broken by variable index),
phase saving, and Luby restarts. No randomness anywhere: identical inputs
yield identical models and identical refutations, run after run.

Literal encoding: variable v (0-based) has positive literal 2v and
negative literal 2v+1; ``lit ^ 1`` negates.
"""

from __future__ import annotations

import heapq

from .errors import BudgetExceeded


def _luby(x: int) -> int:
    """Luby restart sequence, 0-based: 1 1 2 1 1 2 4 1 1 2 ..."""
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


class Solver:
    """CDCL over clauses given as lists of literals."""

    def __init__(self, nvars: int) -> None:
        self.nvars = nvars
        self.clauses: list[list[int]] = []
        self.watches: list[list[int]] = [[] for _ in range(2 * nvars)]
        self.assign: list[int] = [-1] * nvars  # -1 unknown, 0 false, 1 true
        self.level: list[int] = [0] * nvars
        self.reason: list[int] = [-1] * nvars
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.activity: list[float] = [0.0] * nvars
        self.var_inc = 1.0
        self.phase: list[int] = [0] * nvars
        self.heap: list[tuple[float, int]] = [(0.0, v) for v in range(nvars)]
        self.conflicts = 0
        self.ok = True

    # -- clause management ----------------------------------------------------

    def add_clause(self, lits: list[int]) -> None:
        """Add a clause before solving; root-level simplification applied."""
        if not self.ok:
            return
        seen: set[int] = set()
        out: list[int] = []
        for lit in lits:
            if lit ^ 1 in seen:
                return  # tautology
            if lit in seen:
                continue
            val = self._value(lit)
            if val == 1:
                return  # already satisfied at the root
            if val == 0:
                continue  # already falsified at the root
            seen.add(lit)
            out.append(lit)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            if not self._enqueue(out[0], -1):
                self.ok = False
            return
        self._attach(out)

    def _attach(self, lits: list[int]) -> int:
        idx = len(self.clauses)
        self.clauses.append(lits)
        self.watches[lits[0] ^ 1].append(idx)
        self.watches[lits[1] ^ 1].append(idx)
        return idx

    # -- assignment -------------------------------------------------------------

    def _value(self, lit: int) -> int:
        a = self.assign[lit >> 1]
        if a < 0:
            return -1
        return a ^ (lit & 1)

    def _enqueue(self, lit: int, reason: int) -> bool:
        val = self._value(lit)
        if val == 0:
            return False
        if val == 1:
            return True
        v = lit >> 1
        self.assign[v] = 1 - (lit & 1)
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> int:
        """Exhaust unit propagation; return a conflicting clause index or -1."""
        while self.qhead < len(self.trail):
            lit = self.trail[self.qhead]
            self.qhead += 1
            watch = self.watches[lit]
            kept: list[int] = []
            conflict = -1
            i = 0
            while i < len(watch):
                ci = watch[i]
                i += 1
                clause = self.clauses[ci]
                if clause[0] == lit ^ 1:
                    clause[0], clause[1] = clause[1], clause[0]
                first = clause[0]
                if self._value(first) == 1:
                    kept.append(ci)
                    continue
                moved = False
                for m in range(2, len(clause)):
                    if self._value(clause[m]) != 0:
                        clause[1], clause[m] = clause[m], clause[1]
                        self.watches[clause[1] ^ 1].append(ci)
                        moved = True
                        break
                if moved:
                    continue
                kept.append(ci)
                if not self._enqueue(first, ci):
                    kept.extend(watch[i:])
                    conflict = ci
                    break
            self.watches[lit] = kept
            if conflict != -1:
                self.qhead = len(self.trail)
                return conflict
        return -1

    # -- conflict analysis ----------------------------------------------------

    def _bump(self, v: int) -> None:
        self.activity[v] += self.var_inc
        if self.activity[v] > 1e100:
            for u in range(self.nvars):
                self.activity[u] *= 1e-100
            self.var_inc *= 1e-100
        heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, conflict: int) -> tuple[list[int], int]:
        learnt: list[int] = [0]
        seen = [False] * self.nvars
        counter = 0
        p = -1
        index = len(self.trail) - 1
        cur_level = len(self.trail_lim)
        clause = self.clauses[conflict]
        while True:
            for q in clause:
                if q == p:
                    continue
                v = q >> 1
                if not seen[v] and self.level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if self.level[v] == cur_level:
                        counter += 1
                    else:
                        learnt.append(q)
            while not seen[self.trail[index] >> 1]:
                index -= 1
            p = self.trail[index]
            index -= 1
            v = p >> 1
            seen[v] = False
            counter -= 1
            if counter == 0:
                break
            clause = self.clauses[self.reason[v]]
        learnt[0] = p ^ 1
        if len(learnt) == 1:
            return learnt, 0
        back = max(self.level[q >> 1] for q in learnt[1:])
        for m in range(1, len(learnt)):
            if self.level[learnt[m] >> 1] == back:
                learnt[1], learnt[m] = learnt[m], learnt[1]
                break
        return learnt, back

    def _cancel_until(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        bound = self.trail_lim[lvl]
        for lit in reversed(self.trail[bound:]):
            v = lit >> 1
            self.phase[v] = self.assign[v]
            self.assign[v] = -1
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[bound:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _decide(self) -> int:
        while self.heap:
            negact, v = heapq.heappop(self.heap)
            if self.assign[v] >= 0:
                continue
            if -negact != self.activity[v]:
                heapq.heappush(self.heap, (-self.activity[v], v))
                continue
            heapq.heappush(self.heap, (negact, v))
            return 2 * v + (1 - self.phase[v])
        for v in range(self.nvars):  # defensive: heap invariant insurance
            if self.assign[v] < 0:
                heapq.heappush(self.heap, (-self.activity[v], v))
                return self._decide()
        return -1

    # -- main loop ----------------------------------------------------------------

    def solve(self, conflict_budget: int | None = None) -> bool:
        """Decide satisfiability; a model is left in ``assign`` when SAT.

        ``conflict_budget`` caps learned conflicts; exhausting it raises
        :class:`BudgetExceeded` rather than guessing.
        """
        if not self.ok:
            return False
        restart_round = 0
        limit = 100 * _luby(0)
        since_restart = 0
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                since_restart += 1
                if conflict_budget is not None and self.conflicts > conflict_budget:
                    raise BudgetExceeded("solver conflicts", conflict_budget)
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._cancel_until(back)
                if len(learnt) == 1:
                    if not self._enqueue(learnt[0], -1):
                        self.ok = False
                        return False
                else:
                    ci = self._attach(learnt)
                    if not self._enqueue(learnt[0], ci):
                        self.ok = False
                        return False
                self.var_inc /= 0.95
            else:
                if since_restart >= limit:
                    since_restart = 0
                    restart_round += 1
                    limit = 100 * _luby(restart_round)
                    self._cancel_until(0)
                    continue
                lit = self._decide()
                if lit == -1:
                    return True
                self.trail_lim.append(len(self.trail))
                self._enqueue(lit, -1)

    def model(self) -> list[bool]:
        return [a == 1 for a in self.assign]
