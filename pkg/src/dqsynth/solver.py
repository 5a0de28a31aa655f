"""Certifying DQBF solving for small instances.

Two engines are provided:

* universal expansion (:func:`solve_expansion`): every existential bit gets
  one copy per assignment of its dependency bits, every auxiliary one copy
  per universal assignment.  Copies are shared between universal assignments
  that agree on the dependency bits, which is what enforces the Henkin
  restriction.  The ``full`` strategy instantiates all ``2^|X'|`` universal
  assignments up front; the ``lazy`` strategy grows the same expansion one
  counterexample at a time and stops as soon as the candidate tables verify.
* a CEGIS loop for 2-QBF shaped instances (:func:`solve_2qbf`) producing
  decision lists over counterexample points.

Every TRUE answer carries a :class:`HenkinSolution` that
:func:`verify_solution` can re-check against the negated matrix.
"""

from __future__ import annotations

import logging
import os
import re
import subprocess
import tempfile
import time
from dataclasses import dataclass, field

from .bitblast import BitMap, Blaster, DqbfInstance, ExistGroup
from .errors import DimacsError, ExternalSolverError, ResourceLimitExceeded
from .sat import SatSolver

logger = logging.getLogger(__name__)

TABLE_LIMIT = 10  # truth tables up to 2^10 rows, decision lists beyond
DEFAULT_BOUND = 16


def _row(deps, assignment) -> int:
    r = 0
    for j, d in enumerate(deps):
        if assignment[d]:
            r |= 1 << j
    return r


@dataclass(frozen=True)
class TruthTable:
    """Explicit function table; bit ``r`` of ``table`` is the output on the
    row whose bit ``j`` is the value of ``deps[j]``."""

    deps: tuple
    table: int

    def __call__(self, assignment) -> bool:
        return bool((self.table >> _row(self.deps, assignment)) & 1)

    @property
    def size(self) -> int:
        return 1 << len(self.deps)


@dataclass(frozen=True)
class DecisionList:
    """``if row == r1 then v1 elif ... else default``; rows as in TruthTable."""

    deps: tuple
    entries: tuple  # of (row, value)
    default: bool

    def __call__(self, assignment) -> bool:
        r = _row(self.deps, assignment)
        for row, value in self.entries:
            if row == r:
                return value
        return self.default

    @property
    def size(self) -> int:
        return 1 + len(self.entries) * (len(self.deps) + 1)


def _from_rows(deps, rows: dict, default=False):
    """Pick the representation for a function known on ``rows``."""
    if len(deps) <= TABLE_LIMIT:
        table = 0
        for r in range(1 << len(deps)):
            if rows.get(r, default):
                table |= 1 << r
        return TruthTable(tuple(deps), table)
    entries = tuple(sorted((r, v) for r, v in rows.items() if v != default))
    return DecisionList(tuple(deps), entries, default)


@dataclass(frozen=True)
class HenkinSolution:
    functions: dict  # existential bit -> TruthTable | DecisionList
    bitmap: BitMap = field(default_factory=BitMap)

    def evaluate(self, assignment) -> dict:
        return {b: f(assignment) for b, f in self.functions.items()}

    @property
    def circuit_size(self) -> int:
        return sum(f.size for f in self.functions.values())


@dataclass
class SolveStats:
    engine: str = ""
    iterations: int = 0
    expansions: int = 0
    sat_calls: int = 0
    conflicts: int = 0


@dataclass(frozen=True)
class SolveResult:
    is_true: bool
    solution: HenkinSolution | None = None
    stats: SolveStats = field(default_factory=SolveStats, compare=False)
    counterexample: dict | None = None  # universal point with no completion, if known

    @property
    def verdict(self) -> str:
        return "TRUE" if self.is_true else "FALSE"


# --------------------------------------------------------------------------
# Helpers shared by the engines

def normalized(instance: DqbfInstance) -> DqbfInstance:
    """Auxiliaries without defining clauses are plain existentials over X'."""
    if not instance.aux or instance.n_defs:
        return instance
    extra = tuple(ExistGroup(None, (a,), tuple(instance.universals)) for a in instance.aux)
    return DqbfInstance(instance.nvars, instance.universals, instance.groups + extra, (),
                        instance.clauses, 0, instance.bitmap, instance.origin)


def _negated_matrix(instance: DqbfInstance, solver: SatSolver) -> None:
    """Load ``defs & not(assertions)`` into ``solver``."""
    solver.ensure_vars(instance.nvars)
    for c in instance.definitions:
        solver.add_clause(c)
    selectors = []
    for c in instance.assertions:
        s = solver.new_var()
        selectors.append(s)
        for lit in c:
            solver.add_clause((-s, -lit))
    solver.add_clause(selectors)


def encode_function(blaster: Blaster, fn, lits: dict):
    """Tseitin-encode ``fn`` over ``lits[dep]``; returns its output literal."""
    if isinstance(fn, TruthTable):
        vals = [bool((fn.table >> r) & 1) for r in range(fn.size)]
        for d in fn.deps:
            x = lits[d]
            vals = [blaster.mux(x, vals[2 * i + 1], vals[2 * i]) for i in range(len(vals) // 2)]
        return vals[0]
    out = fn.default
    for row, value in reversed(fn.entries):
        match = blaster.and_(*(lits[d] if (row >> j) & 1 else -lits[d] for j, d in enumerate(fn.deps)))
        out = blaster.mux(match, value, out)
    return out


def _bind(y: int, g) -> list:
    if g is True:
        return [(y,)]
    if g is False:
        return [(-y,)]
    return [(-y, g), (y, -g)]


def verify_solution(instance: DqbfInstance, sol: HenkinSolution, *, deadline=None):
    """Return None if ``sol`` makes the matrix valid, else a universal counterexample."""
    instance = normalized(instance)
    missing = [b for b in instance.existential_bits if b not in sol.functions]
    if missing:
        raise ValueError(f"solution lacks functions for existential bits {missing}")
    deps = instance.dependencies
    for b in instance.existential_bits:
        if not set(sol.functions[b].deps) <= set(deps[b]):
            raise ValueError(f"function for bit {b} reads variables outside its dependency set")
    s = SatSolver(deadline=deadline)
    _negated_matrix(instance, s)
    blaster = Blaster(s.nvars + 1)
    lits = {v: v for v in range(1, instance.nvars + 1)}
    for b in instance.existential_bits:
        for c in _bind(b, encode_function(blaster, sol.functions[b], lits)):
            s.add_clause(c)
    for c in blaster.clauses:
        s.add_clause(c)
    if not s.solve():
        return None
    return {u: s.model[u] for u in instance.universals}


class _Checker:
    """Persistent ``defs & not(assertions)`` solver for candidate checks."""

    def __init__(self, instance: DqbfInstance, deadline, conflict_budget):
        self.instance = instance
        self.sat = SatSolver(deadline=deadline, conflict_budget=conflict_budget)
        _negated_matrix(instance, self.sat)
        self.blaster = Blaster(self.sat.nvars + 1)
        self.lits = {v: v for v in range(1, instance.nvars + 1)}
        self.fed = 0

    def counterexample(self, functions: dict):
        b = self.blaster
        act = b.new_var()
        guarded = []
        for y, fn in functions.items():
            for c in _bind(y, encode_function(b, fn, self.lits)):
                guarded.append((-act,) + c)
        for c in b.clauses[self.fed:]:
            self.sat.add_clause(c)
        self.fed = len(b.clauses)
        for c in guarded:
            self.sat.add_clause(c)
        found = self.sat.solve([act])
        cex = {u: self.sat.model[u] for u in self.instance.universals} if found else None
        self.sat.add_clause((-act,))
        return cex


class _Expansion:
    """Incrementally built universal expansion inside one SAT solver."""

    def __init__(self, instance: DqbfInstance, sat: SatSolver):
        self.instance = instance
        self.sat = sat
        pos = {u: i for i, u in enumerate(instance.universals)}
        self.group_pos = [tuple(pos[d] for d in g.deps) for g in instance.groups]
        self.copies: dict = {}  # (bit, row) -> solver var
        self.points: set = set()

    def add(self, sigma: int) -> bool:
        inst = self.instance
        self.points.add(sigma)
        m: dict = {}
        for i, u in enumerate(inst.universals):
            m[u] = bool((sigma >> i) & 1)
        for g, gpos in zip(inst.groups, self.group_pos):
            r = 0
            for j, i in enumerate(gpos):
                if (sigma >> i) & 1:
                    r |= 1 << j
            for b in g.bits:
                key = (b, r)
                v = self.copies.get(key)
                if v is None:
                    v = self.copies[key] = self.sat.new_var()
                m[b] = v
        for a in inst.aux:
            m[a] = self.sat.new_var()
        add_clause = self.sat.add_clause
        for c in inst.clauses:
            out = []
            for lit in c:
                x = m[lit if lit > 0 else -lit]
                if x is True or x is False:
                    if x == (lit > 0):
                        break
                    continue
                out.append(x if lit > 0 else -x)
            else:
                if not add_clause(out):
                    return False
        return True

    def rows(self, model) -> dict:
        out: dict = {b: {} for b in self.instance.existential_bits}
        for (b, r), v in self.copies.items():
            out[b][r] = model[v]
        return out

    def candidate(self, model) -> dict:
        deps = self.instance.dependencies
        return {b: _from_rows(deps[b], rows) for b, rows in self.rows(model).items()}


def _point(universals, assignment) -> int:
    return _row(universals, assignment)


def _check_deadline(deadline):
    if deadline is not None and time.monotonic() > deadline:
        raise ResourceLimitExceeded("deadline exceeded")


def solve_expansion(instance: DqbfInstance, *, bound: int = DEFAULT_BOUND, strategy: str = "full",
                    deadline: float | None = None, conflict_budget: int | None = None) -> SolveResult:
    """Decide ``instance`` by universal expansion.

    ``full`` requires ``|X'| <= bound``.  ``lazy`` instantiates at most
    ``2^bound`` universal assignments, whatever the size of X'.
    """
    instance = normalized(instance)
    n = len(instance.universals)
    stats = SolveStats(engine=f"expansion/{strategy}")
    sat = SatSolver(deadline=deadline, conflict_budget=conflict_budget)
    exp = _Expansion(instance, sat)
    if strategy == "full":
        if n > bound:
            raise ResourceLimitExceeded(f"{n} universal bits exceed the expansion bound {bound}")
        ok = True
        for sigma in range(1 << n):
            if sigma & 255 == 0:
                _check_deadline(deadline)
            if not exp.add(sigma):
                ok = False
                break
        stats.expansions = len(exp.points)
        stats.sat_calls = 1
        if not ok or not sat.solve():
            stats.conflicts = sat.conflicts
            return SolveResult(False, stats=stats)
        stats.conflicts = sat.conflicts
        sol = HenkinSolution(exp.candidate(sat.model), instance.bitmap)
        return SolveResult(True, sol, stats)
    if strategy != "lazy":
        raise ValueError(f"unknown expansion strategy {strategy!r}")

    checker = _Checker(instance, deadline, conflict_budget)
    limit = 1 << min(bound, 62)
    while True:
        _check_deadline(deadline)
        stats.iterations += 1
        stats.sat_calls += 2
        if not sat.solve():
            stats.expansions = len(exp.points)
            stats.conflicts = sat.conflicts + checker.sat.conflicts
            return SolveResult(False, stats=stats)
        cand = exp.candidate(sat.model)
        cex = checker.counterexample(cand)
        if cex is None:
            stats.expansions = len(exp.points)
            stats.conflicts = sat.conflicts + checker.sat.conflicts
            return SolveResult(True, HenkinSolution(cand, instance.bitmap), stats)
        sigma = _point(instance.universals, cex)
        if sigma in exp.points:  # defensive: cannot happen with defined auxiliaries
            raise RuntimeError("expansion made no progress")
        if len(exp.points) >= limit:
            raise ResourceLimitExceeded(f"more than 2^{bound} universal assignments instantiated")
        if not exp.add(sigma):
            stats.expansions = len(exp.points)
            return SolveResult(False, stats=stats)


def solve_2qbf(instance: DqbfInstance, *, deadline: float | None = None,
               conflict_budget: int | None = None) -> SolveResult:
    """CEGIS for instances whose existentials all depend on every universal."""
    instance = normalized(instance)
    if not instance.is_2qbf:
        raise ValueError("solve_2qbf needs every dependency set to equal the universals")
    univ = instance.universals
    ybits = instance.existential_bits
    stats = SolveStats(engine="2qbf")
    comp = SatSolver(instance.nvars, deadline=deadline, conflict_budget=conflict_budget)
    for c in instance.clauses:
        comp.add_clause(c)
    stats.sat_calls += 1
    if not comp.solve():
        stats.conflicts = comp.conflicts
        return SolveResult(False, stats=stats, counterexample={u: False for u in univ})
    default = {y: comp.model[y] for y in ybits}
    entries = []
    chk = SatSolver(deadline=deadline, conflict_budget=conflict_budget)
    _negated_matrix(instance, chk)
    assume = [y if default[y] else -y for y in ybits]
    while True:
        _check_deadline(deadline)
        stats.iterations += 1
        stats.sat_calls += 1
        if not chk.solve(assume):
            break
        x = {u: chk.model[u] for u in univ}
        stats.sat_calls += 1
        if not comp.solve([u if x[u] else -u for u in univ]):
            stats.conflicts = comp.conflicts + chk.conflicts
            return SolveResult(False, stats=stats, counterexample=x)
        entries.append((_point(univ, x), {y: comp.model[y] for y in ybits}))
        chk.add_clause([-u if x[u] else u for u in univ])
    stats.expansions = len(entries) + 1
    stats.conflicts = comp.conflicts + chk.conflicts
    functions = {
        y: DecisionList(tuple(univ), tuple((r, v[y]) for r, v in entries if v[y] != default[y]), default[y])
        for y in ybits
    }
    return SolveResult(True, HenkinSolution(functions, instance.bitmap), stats)


ENGINES = ("auto", "expansion", "2qbf")


def solve(instance: DqbfInstance, engine: str = "auto", *, bound: int = DEFAULT_BOUND,
          strategy: str = "lazy", deadline: float | None = None,
          conflict_budget: int | None = None) -> SolveResult:
    if engine.startswith("external:"):
        timeout = None if deadline is None else max(0.0, deadline - time.monotonic())
        return run_external(engine[len("external:"):], instance, timeout=timeout)
    if engine == "auto":
        engine = "2qbf" if normalized(instance).is_2qbf else "expansion"
    if engine == "2qbf":
        return solve_2qbf(instance, deadline=deadline, conflict_budget=conflict_budget)
    if engine == "expansion":
        return solve_expansion(instance, bound=bound, strategy=strategy,
                               deadline=deadline, conflict_budget=conflict_budget)
    raise ValueError(f"unknown engine {engine!r}")


# --------------------------------------------------------------------------
# Certificates
#
#   t <bit> <dep_1> ... <dep_k> 0 <table>       table[r] is the output on row r
#   l <bit> <dep_1> ... <dep_k> 0 <default> <row>:<value> ...
#
# Rows are numbered as in TruthTable: bit j of the row is the value of dep_j.

def write_certificate(sol: HenkinSolution) -> str:
    lines = []
    for b in sorted(sol.functions):
        fn = sol.functions[b]
        head = " ".join(map(str, (b, *fn.deps, 0)))
        if isinstance(fn, TruthTable):
            bits = "".join("1" if (fn.table >> r) & 1 else "0" for r in range(fn.size))
            lines.append(f"t {head} {bits}")
        else:
            body = " ".join(f"{r}:{int(v)}" for r, v in fn.entries)
            lines.append(f"l {head} {int(fn.default)} {body}".rstrip())
    return "".join(line + "\n" for line in lines)


def read_certificate(text: str, bitmap: BitMap | None = None) -> HenkinSolution:
    functions = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        tok = raw.split()
        if not tok or tok[0] not in ("t", "l"):
            continue
        try:
            end = tok.index("0", 2)
            b = int(tok[1])
            deps = tuple(int(t) for t in tok[2:end])
            rest = tok[end + 1:]
            if tok[0] == "t":
                if len(rest) != 1 or len(rest[0]) != 1 << len(deps) or set(rest[0]) - {"0", "1"}:
                    raise ValueError("bad table")
                table = sum(1 << r for r, ch in enumerate(rest[0]) if ch == "1")
                functions[b] = TruthTable(deps, table)
            else:
                default = rest[0] == "1"
                if rest[0] not in ("0", "1"):
                    raise ValueError("bad default")
                entries = []
                for item in rest[1:]:
                    r, v = item.split(":")
                    entries.append((int(r), v == "1"))
                functions[b] = DecisionList(deps, tuple(entries), default)
        except (ValueError, IndexError):
            raise DimacsError("malformed certificate line", lineno) from None
    return HenkinSolution(functions, bitmap or BitMap())


# --------------------------------------------------------------------------
# External solvers

_TRUE = re.compile(r"^(s cnf 1|SAT|SATISFIABLE|r TRUE|TRUE|s TRUE)$", re.IGNORECASE)
_FALSE = re.compile(r"^(s cnf 0|UNSAT|UNSATISFIABLE|r FALSE|FALSE|s FALSE)$", re.IGNORECASE)


def parse_external_output(stdout: str, returncode: int):
    """Map a solver's output to True/False, or None if no verdict is found."""
    for line in stdout.splitlines():
        line = line.strip()
        if _TRUE.match(line):
            return True
        if _FALSE.match(line):
            return False
    return {10: True, 20: False}.get(returncode)


def run_external(command: str, instance: DqbfInstance, *, timeout: float | None = None) -> SolveResult:
    """Run ``command <file.dqdimacs>`` and re-check any certificate it prints."""
    from .dqdimacs import write_dqdimacs

    fd, path = tempfile.mkstemp(suffix=".dqdimacs")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(write_dqdimacs(instance))
        try:
            proc = subprocess.run([command, path], capture_output=True, text=True, timeout=timeout)
        except subprocess.TimeoutExpired:
            raise ResourceLimitExceeded(f"external solver {command} timed out") from None
        except OSError as exc:
            raise ExternalSolverError(f"cannot run external solver {command}: {exc}") from None
    finally:
        os.unlink(path)
    verdict = parse_external_output(proc.stdout, proc.returncode)
    if verdict is None:
        raise ExternalSolverError(
            f"external solver {command} gave no verdict (exit {proc.returncode}): {proc.stderr.strip()[:200]}")
    stats = SolveStats(engine=f"external:{command}")
    if not verdict:
        return SolveResult(False, stats=stats)
    try:
        sol = read_certificate(proc.stdout, instance.bitmap)
    except DimacsError as exc:
        raise ExternalSolverError(f"unreadable certificate from {command}: {exc}") from None
    if not sol.functions:
        return SolveResult(True, None, stats)
    try:
        cex = verify_solution(instance, sol)
    except ValueError as exc:
        raise ExternalSolverError(f"certificate from {command} rejected: {exc}") from None
    if cex is not None:
        raise ExternalSolverError(f"certificate from {command} is wrong on universal point {cex}")
    return SolveResult(True, sol, stats)
