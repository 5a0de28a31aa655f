"""Brute-force reference implementations used by the tests.

None of these share code with the solver path: they enumerate
assignments, function tables and operator results directly.
"""

from __future__ import annotations

from itertools import product

from dqsynth.terms import evaluate


def brute_sat(clauses, nvars):
    """Some satisfying assignment ``{var: bool}`` or None."""
    for bits in product((False, True), repeat=nvars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return {v + 1: bits[v] for v in range(nvars)}
    return None


def truth_table_sat(clauses, nvars) -> bool:
    """Satisfiability by evaluating the CNF on all 2^nvars rows at once.

    Variable ``v`` is the 2^nvars-bit mask of the rows where it is true.
    """
    n = 1 << nvars
    full = (1 << n) - 1
    masks = [0]
    for i in range(nvars):
        half = 1 << i
        m, length = ((1 << half) - 1) << half, 2 * half
        while length < n:
            m |= m << length
            length *= 2
        masks.append(m)
    rows = full
    for c in clauses:
        hit = 0
        for lit in c:
            hit |= masks[lit] if lit > 0 else full ^ masks[-lit]
        rows &= hit
        if not rows:
            return False
    return True


def _holds(clauses, value):
    return all(any(value[abs(l)] == (l > 0) for l in c) for c in clauses)


def henkin_true(universals, existentials, clauses) -> bool:
    """Decide a DQBF by enumerating Henkin function tables.

    ``existentials`` is a list of ``(var, deps)``.  Tables of all but the
    last existential are enumerated; the last one is solved row by row,
    since its rows are independent once the others are fixed.
    """
    points = [dict(zip(universals, bits)) for bits in product((False, True), repeat=len(universals))]
    if not existentials:
        return all(_holds(clauses, p) for p in points)

    def row(deps, point):
        return tuple(point[d] for d in deps)

    *front, (last, last_deps) = existentials
    spaces = [product((False, True), repeat=1 << len(deps)) for _, deps in front]
    rows_of = [list(product((False, True), repeat=len(deps))) for _, deps in front]
    for tables in product(*spaces):
        fixed = []
        for p in points:
            value = dict(p)
            for (y, deps), table, rows in zip(front, tables, rows_of):
                value[y] = table[rows.index(row(deps, p))]
            fixed.append(value)
        groups: dict = {}
        for value in fixed:
            groups.setdefault(row(last_deps, value), []).append(value)
        ok = True
        for members in groups.values():
            if not any(all(_holds(clauses, {**m, last: v}) for m in members) for v in (False, True)):
                ok = False
                break
        if ok:
            return True
    return False


class _Need(Exception):
    def __init__(self, key):
        self.key = key


def realizable(problem):
    """Lazy function-table search.  Returns a witness table or None.

    Input assignments are processed in order; whenever the constraint needs
    a function value that is not fixed yet, every value is tried in turn.
    A failed evaluation yields the set of table entries it read, and a
    choice point whose entry is not in that set is skipped over
    (conflict-directed backjumping), which keeps the search exhaustive.
    """
    names = [v.name for v in problem.inputs]
    ranges = [range(1 << v.sort.nbits) for v in problem.inputs]
    envs = [dict(zip(names, vals)) for vals in product(*ranges)]
    ret = {f.name: range(1 << f.ret.nbits) for f in problem.functions}
    phi = problem.phi
    table: dict = {}
    read: set = set()

    def interp(name):
        def fn(*args):
            key = (name, args)
            if key not in table:
                raise _Need(key)
            read.add(key)
            return table[key]
        return fn

    funcs = {f.name: interp(f.name) for f in problem.functions}

    def search(i):
        """True on success, else the set of entries that caused the failure."""
        while i < len(envs):
            read.clear()
            try:
                ok = evaluate(phi, envs[i], funcs)
            except _Need as need:
                key = need.key
                conflict: set = set()
                for v in ret[key[0]]:
                    table[key] = v
                    res = search(i)
                    if res is True:
                        return True
                    if key not in res:
                        del table[key]
                        return res
                    conflict |= res
                del table[key]
                conflict.discard(key)
                return conflict
            if not ok:
                return set(read)
            i += 1
        return True

    return dict(table) if search(0) is True else None


def _signed(v, w):
    return v - (1 << w) if v >= 1 << (w - 1) else v


# Reference semantics for bit-vector operators on unsigned ints of width w.
OP_SEMANTICS = {
    "bvnot": lambda a, w: (~a) % (1 << w),
    "bvneg": lambda a, w: (-a) % (1 << w),
    "bvand": lambda a, b, w: a & b,
    "bvor": lambda a, b, w: a | b,
    "bvxor": lambda a, b, w: a ^ b,
    "bvadd": lambda a, b, w: (a + b) % (1 << w),
    "bvsub": lambda a, b, w: (a - b) % (1 << w),
    "bvmul": lambda a, b, w: (a * b) % (1 << w),
    "bvudiv": lambda a, b, w: (1 << w) - 1 if b == 0 else a // b,
    "bvurem": lambda a, b, w: a if b == 0 else a % b,
    "bvshl": lambda a, b, w: (a << b) % (1 << w) if b < w else 0,
    "bvlshr": lambda a, b, w: a >> b if b < w else 0,
    "bvashr": lambda a, b, w: (_signed(a, w) >> min(b, w - 1)) % (1 << w),
    "bvult": lambda a, b, w: int(a < b),
    "bvule": lambda a, b, w: int(a <= b),
    "bvugt": lambda a, b, w: int(a > b),
    "bvuge": lambda a, b, w: int(a >= b),
    "bvslt": lambda a, b, w: int(_signed(a, w) < _signed(b, w)),
    "bvsle": lambda a, b, w: int(_signed(a, w) <= _signed(b, w)),
    "bvsgt": lambda a, b, w: int(_signed(a, w) > _signed(b, w)),
    "bvsge": lambda a, b, w: int(_signed(a, w) >= _signed(b, w)),
    "=": lambda a, b, w: int(a == b),
}
