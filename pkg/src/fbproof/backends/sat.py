"""A compact CDCL SAT solver: two watched literals, first-UIP learning,
activity-based branching, phase saving, Luby restarts, and assumptions.

Literals are nonzero ints in DIMACS style. Clauses may be added between
calls to `solve`, which keeps the solver usable for all-solutions loops.
"""
from __future__ import annotations

import heapq
from typing import Optional, Sequence


def _luby(i: int) -> int:
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class BudgetExceeded(Exception):
    pass


class Solver:
    def __init__(self) -> None:
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.value: list[int] = [0]
        self.level: list[int] = [0]
        self.reason: list[int] = [-1]
        self.activity: list[float] = [0.0]
        self.phase: list[bool] = [False]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.ok = True
        self.bump = 1.0
        self.heap: list[tuple[float, int]] = []
        self.conflicts = 0

    # -- construction -------------------------------------------------------

    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self.value.append(0)
        self.level.append(0)
        self.reason.append(-1)
        self.activity.append(0.0)
        self.phase.append(False)
        self.watches[v] = []
        self.watches[-v] = []
        heapq.heappush(self.heap, (0.0, v))
        return v

    def _val(self, lit: int) -> int:
        v = self.value[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits: Sequence[int]) -> bool:
        if not self.ok:
            return False
        if self.trail_lim:
            self._backtrack(0)
        seen: set[int] = set()
        out: list[int] = []
        for lit in lits:
            if -lit in seen:
                return True
            if lit in seen:
                continue
            val = self._val(lit)
            if val == 1 and self.level[abs(lit)] == 0:
                return True
            if val == -1 and self.level[abs(lit)] == 0:
                continue
            seen.add(lit)
            out.append(lit)
        if not out:
            self.ok = False
            return False
        if len(out) == 1:
            self._enqueue(out[0], -1)
            if self._propagate() != -1:
                self.ok = False
            return self.ok
        idx = len(self.clauses)
        self.clauses.append(out)
        self.watches[out[0]].append(idx)
        self.watches[out[1]].append(idx)
        return True

    # -- search -------------------------------------------------------------

    def _enqueue(self, lit: int, reason: int) -> None:
        v = abs(lit)
        self.value[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int:
        """Return the index of a conflicting clause, or -1."""
        clauses, watches = self.clauses, self.watches
        value = self.value
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -p
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                first = c[0]
                fv = value[abs(first)]
                if (fv if first > 0 else -fv) == 1:
                    ws[j] = ci
                    j += 1
                    continue
                found = False
                for k in range(2, len(c)):
                    lk = c[k]
                    lv = value[abs(lk)]
                    if (lv if lk > 0 else -lv) != -1:
                        c[1], c[k] = lk, c[1]
                        watches[c[1]].append(ci)
                        found = True
                        break
                if found:
                    continue
                ws[j] = ci
                j += 1
                if (fv if first > 0 else -fv) == -1:
                    while i < n:
                        ws[j] = ws[i]
                        j += 1
                        i += 1
                    del ws[j:]
                    return ci
                self._enqueue(first, ci)
            del ws[j:]
        return -1

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen: set[int] = set()
        learnt: list[int] = [0]
        counter = 0
        p = 0
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        clause = self.clauses[confl]
        start = 0
        while True:
            for q in clause[start:]:
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(abs(p))
            counter -= 1
            if counter == 0:
                break
            clause = self.clauses[self.reason[abs(p)]]
            start = 1
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _bump(self, v: int) -> None:
        self.activity[v] += self.bump
        if self.activity[v] > 1e100:
            self.activity = [a * 1e-100 for a in self.activity]
            self.bump *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.nvars + 1)]
            heapq.heapify(self.heap)
        else:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for lit in self.trail[stop:]:
            v = abs(lit)
            self.phase[v] = lit > 0
            self.value[v] = 0
            self.reason[v] = -1
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int:
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if self.value[v] == 0:
                return v if self.phase[v] else -v
        for v in range(1, self.nvars + 1):
            if self.value[v] == 0:
                return v if self.phase[v] else -v
        return 0

    def solve(self, assumptions: Sequence[int] = (), max_conflicts: Optional[int] = None) -> Optional[bool]:
        """True (sat), False (unsat), or None when the conflict budget runs
        out. After a True result, `model()` reads the assignment."""
        if not self.ok:
            return False
        self._backtrack(0)
        if self._propagate() != -1:
            self.ok = False
            return False
        assumptions = list(assumptions)
        restart = 0
        budget_here = 0
        limit = 64 * _luby(restart)
        while True:
            confl = self._propagate()
            if confl != -1:
                self.conflicts += 1
                budget_here += 1
                if not self.trail_lim:
                    self.ok = False
                    return False
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], -1)
                else:
                    idx = len(self.clauses)
                    self.clauses.append(learnt)
                    self.watches[learnt[0]].append(idx)
                    self.watches[learnt[1]].append(idx)
                    self._enqueue(learnt[0], idx)
                self.bump *= 1.05
                if max_conflicts is not None and budget_here > max_conflicts:
                    self._backtrack(0)
                    return None
                continue
            if budget_here >= limit:
                restart += 1
                limit = budget_here + 64 * _luby(restart)
                self._backtrack(0)
                continue
            lvl = len(self.trail_lim)
            if lvl < len(assumptions):
                a = assumptions[lvl]
                val = self._val(a)
                if val == 1:
                    self.trail_lim.append(len(self.trail))
                    continue
                if val == -1:
                    self._backtrack(0)
                    return False
                self.trail_lim.append(len(self.trail))
                self._enqueue(a, -1)
                continue
            lit = self._pick()
            if lit == 0:
                self._model = [False] + [self.value[v] == 1 for v in range(1, self.nvars + 1)]
                self._backtrack(0)
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(lit, -1)

    def model(self) -> list[bool]:
        return self._model

    def lit_true(self, lit: int) -> bool:
        v = self._model[abs(lit)]
        return v if lit > 0 else not v
