"""Incremental CDCL SAT solver.

Two watched literals, first-UIP clause learning with local minimization,
VSIDS-style variable activities, phase saving, Luby restarts and
assumption-based incremental solving.  Literals use the DIMACS convention
at the API boundary (non-zero ints); internally literal ``v`` is ``2v`` and
``-v`` is ``2v+1``.
"""

from __future__ import annotations

import heapq
import time
from typing import Iterable, Sequence

from .errors import ResourceLimitExceeded


def _luby(i: int) -> int:
    # i-th element (1-based) of the Luby sequence 1 1 2 1 1 2 4 ...
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


class SatSolver:
    """Not thread-safe; use one instance per thread."""

    def __init__(self, nvars: int = 0, *, conflict_budget: int | None = None,
                 deadline: float | None = None):
        self.nvars = 0
        self.conflict_budget = conflict_budget
        self.deadline = deadline
        self.ok = True
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0
        self._value = [0, 0]  # per literal code: 1 true, -1 false, 0 unassigned
        self._level = [0]
        self._reason: list = [None]
        self._activity = [0.0]
        self._phase = [1]  # saved polarity bit: 1 -> negative literal first
        self._seen = [False]
        self._watches: list = [[], []]
        self._clauses: list = []
        self._learnt_lbd: dict = {}
        self._trail: list = []
        self._trail_lim: list = []
        self._qhead = 0
        self._heap: list = []
        self._var_inc = 1.0
        self._max_learnts = 4000
        self._model: list = []
        if nvars:
            self.ensure_vars(nvars)

    # ------------------------------------------------------------------ setup
    def new_var(self) -> int:
        self.nvars += 1
        v = self.nvars
        self._value += (0, 0)
        self._level.append(0)
        self._reason.append(None)
        self._activity.append(0.0)
        self._phase.append(1)
        self._seen.append(False)
        self._watches += ([], [])
        heapq.heappush(self._heap, (0.0, v))
        return v

    def ensure_vars(self, n: int) -> None:
        while self.nvars < n:
            self.new_var()

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a clause permanently.  Returns False once the formula is UNSAT."""
        if not self.ok:
            return False
        if self._trail_lim:
            self._backtrack(0)
        value = self._value
        codes = []
        present = set()
        for lit in lits:
            v = lit if lit > 0 else -lit
            if v > self.nvars:
                self.ensure_vars(v)
                value = self._value
            c = 2 * v + (lit < 0)
            if c ^ 1 in present or value[c] == 1:
                return True  # tautology or already satisfied
            if c in present or value[c] == -1:
                continue
            present.add(c)
            codes.append(c)
        if not codes:
            self.ok = False
            return False
        if len(codes) == 1:
            self._enqueue(codes[0], None)
            if self._propagate() is not None:
                self.ok = False
            return self.ok
        ci = len(self._clauses)
        self._clauses.append(codes)
        self._watches[codes[0]].append(ci)
        self._watches[codes[1]].append(ci)
        return True

    # ------------------------------------------------------------------ core
    def _enqueue(self, lit: int, reason) -> None:
        self._value[lit] = 1
        self._value[lit ^ 1] = -1
        v = lit >> 1
        self._level[v] = len(self._trail_lim)
        self._reason[v] = reason
        self._trail.append(lit)

    def _propagate(self):
        value = self._value
        watches = self._watches
        clauses = self._clauses
        trail = self._trail
        level = self._level
        reason = self._reason
        dl = len(self._trail_lim)
        qhead = self._qhead
        confl = None
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            new_ws = []
            n = len(ws)
            i = 0
            while i < n:
                ci = ws[i]
                i += 1
                c = clauses[ci]
                if c is None:
                    continue
                if c[0] == false_lit:
                    c[0] = c[1]
                    c[1] = false_lit
                first = c[0]
                if value[first] == 1:
                    new_ws.append(ci)
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if value[lk] != -1:
                        c[1] = lk
                        c[k] = false_lit
                        watches[lk].append(ci)
                        break
                else:
                    new_ws.append(ci)
                    if value[first] == -1:
                        confl = ci
                        new_ws.extend(ws[i:])
                        break
                    value[first] = 1
                    value[first ^ 1] = -1
                    v = first >> 1
                    level[v] = dl
                    reason[v] = ci
                    trail.append(first)
            watches[false_lit] = new_ws
            if confl is not None:
                break
        self.propagations += qhead - self._qhead
        self._qhead = qhead if confl is None else len(trail)
        return confl

    def _bump(self, v: int) -> None:
        act = self._activity
        act[v] += self._var_inc
        if act[v] > 1e100:
            for u in range(1, self.nvars + 1):
                act[u] *= 1e-100
            self._var_inc *= 1e-100
            self._rebuild_heap()
        elif self._value[2 * v] == 0:
            heapq.heappush(self._heap, (-act[v], v))

    def _rebuild_heap(self) -> None:
        value, act = self._value, self._activity
        self._heap = [(-act[v], v) for v in range(1, self.nvars + 1) if value[2 * v] == 0]
        heapq.heapify(self._heap)

    def _analyze(self, confl: int):
        clauses, level, reason, seen, trail = self._clauses, self._level, self._reason, self._seen, self._trail
        dl = len(self._trail_lim)
        learnt = [0]
        path = 0
        idx = len(trail) - 1
        lits = clauses[confl]
        p = -1
        while True:
            for q in (lits if p < 0 else lits[1:]):
                v = q >> 1
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    self._bump(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = False
            path -= 1
            if path == 0:
                break
            lits = clauses[reason[v]]
        learnt[0] = p ^ 1
        # local minimization: drop literals implied by others in the clause
        out = [learnt[0]]
        for q in learnt[1:]:
            r = reason[q >> 1]
            if r is None or not all(seen[x >> 1] or level[x >> 1] == 0 for x in clauses[r][1:]):
                out.append(q)
        for q in learnt[1:]:
            seen[q >> 1] = False
        if len(out) == 1:
            return out, 0
        best = max(range(1, len(out)), key=lambda k: level[out[k] >> 1])
        out[1], out[best] = out[best], out[1]
        return out, level[out[1] >> 1]

    def _backtrack(self, target: int) -> None:
        if len(self._trail_lim) <= target:
            return
        value, phase, act, heap = self._value, self._phase, self._activity, self._heap
        reason = self._reason
        stop = self._trail_lim[target]
        trail = self._trail
        for k in range(len(trail) - 1, stop - 1, -1):
            lit = trail[k]
            v = lit >> 1
            value[lit] = 0
            value[lit ^ 1] = 0
            reason[v] = None
            phase[v] = lit & 1
            heapq.heappush(heap, (-act[v], v))
        del trail[stop:]
        del self._trail_lim[target:]
        self._qhead = len(trail)
        if len(heap) > 8 * self.nvars + 64:
            self._rebuild_heap()

    def _pick(self) -> int:
        value, heap = self._value, self._heap
        while heap:
            _, v = heapq.heappop(heap)
            if value[2 * v] == 0:
                return 2 * v + self._phase[v]
        return -1

    def _reduce_db(self) -> None:
        clauses, reason, value = self._clauses, self._reason, self._value
        cands = []
        for ci, lbd in self._learnt_lbd.items():
            c = clauses[ci]
            if c is None or lbd <= 2:
                continue
            if reason[c[0] >> 1] == ci and value[c[0]] == 1:
                continue
            cands.append((lbd, len(c), ci))
        cands.sort(reverse=True)
        for _, _, ci in cands[: len(cands) // 2]:
            clauses[ci] = None
            del self._learnt_lbd[ci]
        self._max_learnts = int(self._max_learnts * 1.1)

    # ------------------------------------------------------------------ API
    def solve(self, assumptions: Sequence[int] = ()) -> bool:
        """Return True (SAT, see :attr:`model`) or False (UNSAT under assumptions).

        Raises :class:`ResourceLimitExceeded` when the conflict budget or the
        deadline is exhausted.
        """
        self._model = []
        if not self.ok:
            return False
        self._backtrack(0)
        if self._propagate() is not None:
            self.ok = False
            return False
        assume = []
        for a in assumptions:
            v = abs(a)
            self.ensure_vars(v)
            assume.append(2 * v + (a < 0))
        start_conflicts = self.conflicts
        restart_idx = 1
        restart_limit = 64 * _luby(restart_idx)
        since_restart = 0
        value = self._value
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if not self._trail_lim:
                    self.ok = False
                    return False
                learnt, blevel = self._analyze(confl)
                self._backtrack(blevel)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    ci = len(self._clauses)
                    self._clauses.append(learnt)
                    self._watches[learnt[0]].append(ci)
                    self._watches[learnt[1]].append(ci)
                    self._learnt_lbd[ci] = len({self._level[x >> 1] for x in learnt})
                    self._enqueue(learnt[0], ci)
                self._var_inc /= 0.95
                used = self.conflicts - start_conflicts
                if self.conflict_budget is not None and used > self.conflict_budget:
                    self._backtrack(0)
                    raise ResourceLimitExceeded(f"conflict budget of {self.conflict_budget} exhausted")
                if self.deadline is not None and (used & 63) == 0 and time.monotonic() > self.deadline:
                    self._backtrack(0)
                    raise ResourceLimitExceeded("deadline exceeded during SAT search")
                continue
            if since_restart >= restart_limit:
                since_restart = 0
                restart_idx += 1
                restart_limit = 64 * _luby(restart_idx)
                self._backtrack(0)
                continue
            if len(self._learnt_lbd) > self._max_learnts + len(self._trail):
                self._reduce_db()
            dl = len(self._trail_lim)
            if dl < len(assume):
                a = assume[dl]
                if value[a] == 1:
                    self._trail_lim.append(len(self._trail))
                    continue
                if value[a] == -1:
                    self._backtrack(0)
                    return False
                self._trail_lim.append(len(self._trail))
                self._enqueue(a, None)
                continue
            lit = self._pick()
            if lit < 0:
                self._model = [False] + [value[2 * v] == 1 for v in range(1, self.nvars + 1)]
                self._backtrack(0)
                return True
            self.decisions += 1
            self._trail_lim.append(len(self._trail))
            self._enqueue(lit, None)

    @property
    def model(self) -> list:
        """``model[v]`` is the value of variable ``v`` in the last SAT answer."""
        return self._model

    def value(self, lit: int) -> bool:
        v = self._model[abs(lit)]
        return v if lit > 0 else not v


def sat_solve(clauses: Iterable[Sequence[int]], nvars: int = 0, *,
              conflict_budget: int | None = None, deadline: float | None = None):
    """Solve a CNF.  Returns ``{var: bool}`` over ``1..nvars`` or None if UNSAT."""
    s = SatSolver(nvars, conflict_budget=conflict_budget, deadline=deadline)
    for c in clauses:
        if not s.add_clause(c):
            return None
    if not s.solve():
        return None
    return {v: s.model[v] for v in range(1, s.nvars + 1)}
