"""Bit-blasting of DQF(BV) formulas into CNF DQBF instances.

Universal bits are numbered first, then the bits of every existential in
order, then Tseitin auxiliaries.  Every auxiliary is defined by a full
equivalence over universal and existential bits, so its value is a function
of the universal assignment once the existentials are fixed; this is what
lets auxiliaries depend on all universal bits.

The clause list is split in two: the leading ``n_defs`` clauses define
auxiliaries, the rest assert the formula.  Solvers negate only the
assertion part when checking candidate functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .dqf import DqfFormula
from .errors import PipelineError
from .terms import App, Call, Const, Term, Var


@dataclass(frozen=True)
class BitMap:
    """BV variable name -> propositional ids, least significant bit first."""

    bits: dict = field(default_factory=dict)
    sorts: dict = field(default_factory=dict)

    def reverse(self) -> dict:
        return {b: (name, i) for name, ids in self.bits.items() for i, b in enumerate(ids)}

    def decode(self, model) -> dict:
        """Read BV values out of ``model`` (indexable by variable id)."""
        out = {}
        for name, ids in self.bits.items():
            out[name] = sum(1 << i for i, b in enumerate(ids) if model[b])
        return out


@dataclass(frozen=True)
class ExistGroup:
    """Existential bits of one BV output sharing one dependency set."""

    name: str | None
    bits: tuple
    deps: tuple


@dataclass(frozen=True)
class DqbfInstance:
    nvars: int
    universals: tuple
    groups: tuple  # of ExistGroup
    aux: tuple
    clauses: tuple  # of tuple of int
    n_defs: int = 0
    bitmap: BitMap = field(default_factory=BitMap)
    origin: dict = field(default_factory=dict, compare=False)

    @property
    def dependencies(self) -> dict:
        return {b: g.deps for g in self.groups for b in g.bits}

    @property
    def existential_bits(self) -> tuple:
        return tuple(b for g in self.groups for b in g.bits)

    @property
    def definitions(self) -> tuple:
        return self.clauses[: self.n_defs]

    @property
    def assertions(self) -> tuple:
        return self.clauses[self.n_defs:]

    @property
    def is_2qbf(self) -> bool:
        universe = set(self.universals)
        return all(set(g.deps) == universe for g in self.groups)


def clause_stats(instance: DqbfInstance) -> tuple:
    """``(vars, clauses, aux)`` with vars = |X'| + |V| + sum |Y'_i|."""
    nv = len(instance.universals) + len(instance.aux) + len(instance.existential_bits)
    return nv, len(instance.clauses), len(instance.aux)


# --------------------------------------------------------------------------
# Gate-level encoder.  A "literal" is a non-zero int or a Python bool
# constant; constants are folded away before any clause is emitted.

def _neg(x):
    return (not x) if type(x) is bool else -x


class Blaster:
    def __init__(self, first_var: int = 1):
        self.next_var = first_var
        self.clauses: list = []
        self.aux: list = []
        self.env: dict = {}
        self._gates: dict = {}
        self._memo: dict = {}

    def new_var(self) -> int:
        v = self.next_var
        self.next_var += 1
        return v

    def declare(self, var: Var) -> tuple:
        ids = tuple(self.new_var() for _ in range(var.sort.nbits))
        self.env[var.name] = ids
        return ids

    def _aux(self) -> int:
        v = self.new_var()
        self.aux.append(v)
        return v

    # gates -------------------------------------------------------------
    def and_(self, *xs):
        lits = []
        seen = set()
        for x in xs:
            if type(x) is bool:
                if not x:
                    return False
                continue
            if -x in seen:
                return False
            if x not in seen:
                seen.add(x)
                lits.append(x)
        if not lits:
            return True
        if len(lits) == 1:
            return lits[0]
        key = ("and",) + tuple(sorted(lits))
        t = self._gates.get(key)
        if t is None:
            t = self._aux()
            for x in lits:
                self.clauses.append((-t, x))
            self.clauses.append((t,) + tuple(-x for x in lits))
            self._gates[key] = t
        return t

    def or_(self, *xs):
        return _neg(self.and_(*(_neg(x) for x in xs)))

    def xor(self, a, b):
        if type(a) is bool:
            return _neg(b) if a else b
        if type(b) is bool:
            return _neg(a) if b else a
        if a == b:
            return False
        if a == -b:
            return True
        sign = (a < 0) ^ (b < 0)
        a, b = sorted((abs(a), abs(b)))
        key = ("xor", a, b)
        t = self._gates.get(key)
        if t is None:
            t = self._aux()
            self.clauses += [(-t, a, b), (-t, -a, -b), (t, -a, b), (t, a, -b)]
            self._gates[key] = t
        return -t if sign else t

    def iff(self, a, b):
        return _neg(self.xor(a, b))

    def mux(self, c, t, e):
        """``c ? t : e``"""
        if type(c) is bool:
            return t if c else e
        if t == e and type(t) is type(e):
            return t
        if type(t) is bool and type(e) is bool:
            return c if t else _neg(c)
        if type(t) is bool:
            return self.or_(c, e) if t else self.and_(_neg(c), e)
        if type(e) is bool:
            return self.or_(_neg(c), t) if e else self.and_(c, t)
        if t == -e:
            return self.iff(c, t)
        if c < 0:
            c, t, e = -c, e, t
        key = ("mux", c, t, e)
        m = self._gates.get(key)
        if m is None:
            m = self._aux()
            self.clauses += [(-c, -t, m), (-c, t, -m), (c, -e, m), (c, e, -m),
                             (-t, -e, m), (t, e, -m)]
            self._gates[key] = m
        return m

    def maj(self, a, b, c):
        for x, (y, z) in ((a, (b, c)), (b, (a, c)), (c, (a, b))):
            if type(x) is bool:
                return self.or_(y, z) if x else self.and_(y, z)
        if a == b or a == c:
            return a
        if b == c:
            return b
        if a == -b:
            return c
        if a == -c:
            return b
        if b == -c:
            return a
        key = ("maj",) + tuple(sorted((a, b, c)))
        m = self._gates.get(key)
        if m is None:
            m = self._aux()
            self.clauses += [(-a, -b, m), (-a, -c, m), (-b, -c, m),
                             (a, b, -m), (a, c, -m), (b, c, -m)]
            self._gates[key] = m
        return m

    # word-level --------------------------------------------------------
    def add(self, a: Sequence, b: Sequence, cin=False):
        """Ripple-carry adder; returns (sum bits, carry out)."""
        out = []
        c = cin
        for x, y in zip(a, b):
            out.append(self.xor(self.xor(x, y), c))
            c = self.maj(x, y, c)
        return out, c

    def sub(self, a, b):
        """``a - b``; the carry out is 1 iff ``a >= b`` (unsigned)."""
        return self.add(a, [_neg(y) for y in b], True)

    def ult(self, a, b):
        c = True
        for x, y in zip(a, b):
            c = self.maj(x, _neg(y), c)
        return _neg(c)

    def slt(self, a, b):
        a = list(a[:-1]) + [_neg(a[-1])]
        b = list(b[:-1]) + [_neg(b[-1])]
        return self.ult(a, b)

    def eq(self, a, b):
        return self.and_(*(self.iff(x, y) for x, y in zip(a, b)))

    def mul(self, a, b):
        w = len(a)
        acc = [False] * w
        for i in range(w):
            pp = [False] * i + [self.and_(b[i], a[j]) for j in range(w - i)]
            acc, _ = self.add(acc, pp)
        return acc

    def divrem(self, a, b):
        """Restoring division.  A zero divisor yields all-ones / ``a``."""
        w = len(a)
        q = [False] * w
        r = [False] * w
        bx = list(b) + [False]
        for i in range(w - 1, -1, -1):
            r1 = [a[i]] + r  # (r << 1) | a_i on w+1 bits
            diff, ge = self.sub(r1, bx)
            q[i] = ge
            r = [self.mux(ge, d, x) for d, x in zip(diff, r1)][:w]
        return q, r

    def shift(self, a, b, kind: str):
        w = len(a)
        fill = a[-1] if kind == "ashr" else False
        res = list(a)
        k = 0
        while (1 << k) < w and k < len(b):
            s = 1 << k
            if kind == "shl":
                shifted = [False] * s + res[: w - s]
            else:
                shifted = res[s:] + [fill] * s
            res = [self.mux(b[k], x, y) for x, y in zip(shifted, res)]
            k += 1
        over = self.or_(*b[k:]) if k < len(b) else False
        return [self.mux(over, fill, x) for x in res]

    # terms -------------------------------------------------------------
    def bits(self, term: Term) -> list:
        key = id(term)
        hit = self._memo.get(key)
        if hit is not None:
            return hit[1]
        out = self._bits(term)
        self._memo[key] = (term, out)
        return out

    def _bits(self, t: Term) -> list:
        if isinstance(t, Const):
            return [bool((t.value >> i) & 1) for i in range(t.sort.nbits)]
        if isinstance(t, Var):
            if t.name not in self.env:
                raise PipelineError(f"unbound variable {t.name} during bit-blasting")
            return list(self.env[t.name])
        if isinstance(t, Call):
            raise PipelineError(f"cannot bit-blast synthesis-function application {t.func}")
        op = t.op
        if op == "and":
            return [self.and_(*(self.bits(a)[0] for a in t.args))]
        if op == "or":
            return [self.or_(*(self.bits(a)[0] for a in t.args))]
        if op == "ite":
            c = self.bits(t.args[0])[0]
            return [self.mux(c, x, y) for x, y in zip(self.bits(t.args[1]), self.bits(t.args[2]))]
        args = [self.bits(a) for a in t.args]
        if op == "not":
            return [_neg(args[0][0])]
        if op == "xor":
            return [self.xor(args[0][0], args[1][0])]
        if op == "=>":
            return [self.or_(_neg(args[0][0]), args[1][0])]
        if op == "=":
            return [self.eq(args[0], args[1])]
        if op == "concat":
            return args[1] + args[0]
        if op == "extract":
            hi, lo = t.indices
            return args[0][lo:hi + 1]
        a = args[0]
        if op == "bvnot":
            return [_neg(x) for x in a]
        if op == "bvneg":
            return self.add([_neg(x) for x in a], [False] * len(a), True)[0]
        b = args[1]
        if op == "bvand":
            return [self.and_(x, y) for x, y in zip(a, b)]
        if op == "bvor":
            return [self.or_(x, y) for x, y in zip(a, b)]
        if op == "bvxor":
            return [self.xor(x, y) for x, y in zip(a, b)]
        if op == "bvadd":
            return self.add(a, b)[0]
        if op == "bvsub":
            return self.sub(a, b)[0]
        if op == "bvmul":
            return self.mul(a, b)
        if op == "bvudiv":
            return self.divrem(a, b)[0]
        if op == "bvurem":
            return self.divrem(a, b)[1]
        if op in ("bvshl", "bvlshr", "bvashr"):
            return self.shift(a, b, op[2:])
        if op == "bvult":
            return [self.ult(a, b)]
        if op == "bvugt":
            return [self.ult(b, a)]
        if op == "bvule":
            return [_neg(self.ult(b, a))]
        if op == "bvuge":
            return [_neg(self.ult(a, b))]
        if op == "bvslt":
            return [self.slt(a, b)]
        if op == "bvsgt":
            return [self.slt(b, a)]
        if op == "bvsle":
            return [_neg(self.slt(b, a))]
        if op == "bvsge":
            return [_neg(self.slt(a, b))]
        raise PipelineError(f"unsupported operator {op}")

    def assertion_clauses(self, body: Term) -> list:
        """Encode ``body`` and return the clauses asserting it.

        Top-level conjunctions become separate unit clauses.  A constant
        body is pinned through one auxiliary defined as true.
        """
        conjuncts, stack = [], [body]
        while stack:
            t = stack.pop()
            if isinstance(t, App) and t.op == "and":
                stack.extend(reversed(t.args))
            else:
                conjuncts.append(t)
        roots = []
        for c in conjuncts:
            r = self.bits(c)[0]
            if r is False:
                roots = [False]
                break
            if r is not True and r not in roots:
                roots.append(r)
        if roots and roots[0] is not False:
            return [(r,) for r in roots]
        t = self._aux()
        self.clauses.append((t,))
        return [(-t,)] if roots else []


def blast(formula: DqfFormula) -> DqbfInstance:
    """Compile a DQF(BV) formula to a CNF DQBF."""
    b = Blaster()
    universals = []
    bits, sorts = {}, {}
    for v in formula.universals:
        ids = b.declare(v)
        universals.extend(ids)
        bits[v.name], sorts[v.name] = ids, v.sort
    groups = []
    for e in formula.existentials:
        ids = b.declare(e.var)
        bits[e.var.name], sorts[e.var.name] = ids, e.var.sort
        deps = tuple(x for d in e.deps for x in b.env[d.name])
        groups.append(ExistGroup(e.var.name, ids, deps))
    asserts = b.assertion_clauses(formula.body)
    defs = b.clauses
    return DqbfInstance(
        nvars=b.next_var - 1,
        universals=tuple(universals),
        groups=tuple(groups),
        aux=tuple(b.aux),
        clauses=tuple(tuple(c) for c in defs) + tuple(asserts),
        n_defs=len(defs),
        bitmap=BitMap(bits, sorts),
        origin=formula.origin,
    )
