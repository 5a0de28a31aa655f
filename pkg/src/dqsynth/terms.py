"""Typed term representation for quantifier-free BV/Core formulas.

Terms are immutable dataclasses and compare structurally.  Every node
carries its sort; the smart constructor :func:`app` is the single place
where operator signatures are checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from .errors import SortError


@dataclass(frozen=True)
class Sort:
    """``width=None`` is Bool, otherwise ``(_ BitVec width)``."""

    width: int | None = None

    def __post_init__(self):
        if self.width is not None and self.width < 1:
            raise ValueError(f"bitvector width must be positive, got {self.width}")

    @property
    def is_bool(self) -> bool:
        return self.width is None

    @property
    def nbits(self) -> int:
        return 1 if self.width is None else self.width

    def __str__(self) -> str:
        return "Bool" if self.width is None else f"(_ BitVec {self.width})"


BOOL = Sort()


def bv(width: int) -> Sort:
    return Sort(width)


@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort


@dataclass(frozen=True)
class Const:
    value: int
    sort: Sort


@dataclass(frozen=True)
class App:
    op: str
    args: tuple
    sort: Sort
    indices: tuple = ()


@dataclass(frozen=True)
class Call:
    """Application of a function symbol that is being synthesized."""

    func: str
    args: tuple
    sort: Sort


Term = Union[Var, Const, App, Call]

TRUE = Const(1, BOOL)
FALSE = Const(0, BOOL)


def bvconst(value: int, width: int) -> Const:
    return Const(value & ((1 << width) - 1), bv(width))


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple  # of Var
    ret: Sort

    @property
    def param_sorts(self) -> tuple:
        return tuple(p.sort for p in self.params)


@dataclass(frozen=True)
class FunctionDefinition:
    name: str
    params: tuple  # of Var
    ret: Sort
    body: Term

    def __post_init__(self):
        if self.body.sort != self.ret:
            raise SortError(f"body of {self.name} has sort {self.body.sort}, declared {self.ret}")
        extra = set(free_vars(self.body)) - {p.name for p in self.params}
        if extra:
            raise SortError(f"body of {self.name} mentions non-parameters {sorted(extra)}")
        if any(True for _ in calls(self.body)):
            raise SortError(f"body of {self.name} applies a synthesis function")


@dataclass(frozen=True)
class SynthProblem:
    inputs: tuple  # of Var
    functions: tuple  # of FunctionDecl
    constraints: tuple  # of Bool terms
    # Grammars are kept for diagnostics only and never influence synthesis.
    source_grammars: tuple = field(default=(), compare=False)

    def __post_init__(self):
        names = [v.name for v in self.inputs]
        fnames = [f.name for f in self.functions]
        if len(set(names)) != len(names):
            raise ValueError("duplicate input names")
        if len(set(fnames)) != len(fnames):
            raise ValueError("duplicate function names")
        if set(names) & set(fnames):
            raise ValueError("inputs and functions share a name")

    @property
    def phi(self) -> Term:
        return conj(self.constraints)

    def function(self, name: str) -> FunctionDecl:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)

    def input(self, name: str) -> Var:
        for v in self.inputs:
            if v.name == name:
                return v
        raise KeyError(name)


# --------------------------------------------------------------------------
# Operator signatures

BV_UNARY = frozenset({"bvnot", "bvneg"})
BV_BINARY = frozenset({
    "bvand", "bvor", "bvxor", "bvadd", "bvsub", "bvmul",
    "bvudiv", "bvurem", "bvshl", "bvlshr", "bvashr",
})
BV_COMPARE = frozenset({
    "bvult", "bvule", "bvugt", "bvuge", "bvslt", "bvsle", "bvsgt", "bvsge",
})
BOOL_NARY = frozenset({"and", "or"})
BOOL_BINARY = frozenset({"xor", "=>"})
OPERATORS = BV_UNARY | BV_BINARY | BV_COMPARE | BOOL_NARY | BOOL_BINARY | {
    "not", "=", "ite", "concat", "extract",
}


def _want(cond: bool, msg: str):
    if not cond:
        raise SortError(msg)


def app(op: str, *args: Term, indices: Sequence[int] = ()) -> App:
    """Build a sort-checked operator application."""
    n = len(args)
    sorts = [a.sort for a in args]
    indices = tuple(indices)
    if op in BV_UNARY:
        _want(n == 1 and not sorts[0].is_bool, f"{op} expects one bitvector")
        return App(op, args, sorts[0])
    if op in BV_BINARY or op in BV_COMPARE:
        _want(n == 2, f"{op} expects 2 arguments, got {n}")
        _want(not sorts[0].is_bool and sorts[0] == sorts[1],
              f"{op} expects two bitvectors of equal width, got {sorts[0]} and {sorts[1]}")
        return App(op, args, BOOL if op in BV_COMPARE else sorts[0])
    if op == "not":
        _want(n == 1 and sorts[0].is_bool, "not expects one Bool")
        return App(op, args, BOOL)
    if op in BOOL_NARY:
        _want(n >= 1 and all(s.is_bool for s in sorts), f"{op} expects Bool arguments")
        return App(op, args, BOOL)
    if op in BOOL_BINARY:
        _want(n == 2 and all(s.is_bool for s in sorts), f"{op} expects 2 Bool arguments")
        return App(op, args, BOOL)
    if op == "=":
        _want(n == 2, f"= expects 2 arguments, got {n}")
        _want(sorts[0] == sorts[1], f"= on mismatched sorts {sorts[0]} and {sorts[1]}")
        return App(op, args, BOOL)
    if op == "ite":
        _want(n == 3, "ite expects 3 arguments")
        _want(sorts[0].is_bool, "ite condition must be Bool")
        _want(sorts[1] == sorts[2], f"ite branches differ: {sorts[1]} and {sorts[2]}")
        return App(op, args, sorts[1])
    if op == "concat":
        _want(n == 2 and not any(s.is_bool for s in sorts), "concat expects 2 bitvectors")
        return App(op, args, bv(sorts[0].width + sorts[1].width))
    if op == "extract":
        _want(n == 1 and not sorts[0].is_bool, "extract expects one bitvector")
        _want(len(indices) == 2, "extract needs two indices")
        hi, lo = indices
        _want(0 <= lo <= hi < sorts[0].width,
              f"extract indices ({hi} {lo}) out of range for width {sorts[0].width}")
        return App(op, args, bv(hi - lo + 1), indices)
    raise SortError(f"unknown operator {op}")


def conj(terms: Iterable[Term]) -> Term:
    terms = tuple(terms)
    if not terms:
        return TRUE
    if len(terms) == 1:
        return terms[0]
    return app("and", *terms)


def eq(a: Term, b: Term) -> App:
    return app("=", a, b)


def implies(a: Term, b: Term) -> App:
    return app("=>", a, b)


# --------------------------------------------------------------------------
# Traversal

def children(term: Term) -> tuple:
    if isinstance(term, (App, Call)):
        return term.args
    return ()


def subterms(term: Term) -> Iterator[Term]:
    """Pre-order, left-to-right."""
    stack = [term]
    while stack:
        t = stack.pop()
        yield t
        stack.extend(reversed(children(t)))


def size(term: Term) -> int:
    """Tree node count."""
    return sum(1 for _ in subterms(term))


def free_vars(term: Term) -> list:
    """Variable names in first-occurrence order."""
    seen: dict = {}
    for t in subterms(term):
        if isinstance(t, Var):
            seen.setdefault(t.name, None)
    return list(seen)


def calls(term: Term) -> Iterator[Call]:
    for t in subterms(term):
        if isinstance(t, Call):
            yield t


def rebuild(term: Term, new_args: tuple) -> Term:
    if isinstance(term, App):
        return App(term.op, new_args, term.sort, term.indices)
    if isinstance(term, Call):
        return Call(term.func, new_args, term.sort)
    return term


def transform(term: Term, fn: Callable[[Term], Term]) -> Term:
    """Bottom-up rewrite: ``fn`` sees each node after its children were rewritten."""
    memo: dict = {}

    def go(t):
        key = id(t)
        if key in memo:
            return memo[key][1]
        kids = children(t)
        if kids:
            new = tuple(go(k) for k in kids)
            out = fn(t if all(a is b for a, b in zip(new, kids)) else rebuild(t, new))
        else:
            out = fn(t)
        memo[key] = (t, out)  # keep t alive so its id is not reused
        return out

    return go(term)


def substitute(term: Term, mapping: Mapping[str, Term]) -> Term:
    if not mapping:
        return term
    return transform(term, lambda t: mapping.get(t.name, t) if isinstance(t, Var) else t)


def inline_calls(term: Term, defs: Mapping[str, FunctionDefinition]) -> Term:
    """Replace every ``Call`` of a defined function by its instantiated body."""

    def step(t):
        if isinstance(t, Call) and t.func in defs:
            d = defs[t.func]
            return substitute(d.body, {p.name: a for p, a in zip(d.params, t.args)})
        return t

    return transform(term, step)


# --------------------------------------------------------------------------
# Reference semantics (plain integer arithmetic)

def _signed(v: int, w: int) -> int:
    return v - (1 << w) if v >> (w - 1) else v


def evaluate(term: Term, env: Mapping[str, int],
             funcs: Mapping[str, Callable[..., int]] | None = None) -> int:
    """Evaluate ``term``; Bool results are 0/1, bitvectors unsigned ints."""
    if isinstance(term, Const):
        return term.value
    if isinstance(term, Var):
        return env[term.name]
    if isinstance(term, Call):
        if funcs is None or term.func not in funcs:
            raise KeyError(f"no interpretation for {term.func}")
        return funcs[term.func](*(evaluate(a, env, funcs) for a in term.args))
    op = term.op
    if op == "ite":
        c = evaluate(term.args[0], env, funcs)
        return evaluate(term.args[1 if c else 2], env, funcs)
    if op == "and":
        return int(all(evaluate(a, env, funcs) for a in term.args))
    if op == "or":
        return int(any(evaluate(a, env, funcs) for a in term.args))
    vals = [evaluate(a, env, funcs) for a in term.args]
    if op == "not":
        return 1 - vals[0]
    if op == "xor":
        return vals[0] ^ vals[1]
    if op == "=>":
        return int(not vals[0] or vals[1])
    if op == "=":
        return int(vals[0] == vals[1])
    if op == "concat":
        return (vals[0] << term.args[1].sort.width) | vals[1]
    if op == "extract":
        hi, lo = term.indices
        return (vals[0] >> lo) & ((1 << (hi - lo + 1)) - 1)
    w = term.args[0].sort.width
    mask = (1 << w) - 1
    a = vals[0]
    if op == "bvnot":
        return ~a & mask
    if op == "bvneg":
        return -a & mask
    b = vals[1]
    if op == "bvand":
        return a & b
    if op == "bvor":
        return a | b
    if op == "bvxor":
        return a ^ b
    if op == "bvadd":
        return (a + b) & mask
    if op == "bvsub":
        return (a - b) & mask
    if op == "bvmul":
        return (a * b) & mask
    if op == "bvudiv":
        return mask if b == 0 else a // b
    if op == "bvurem":
        return a if b == 0 else a % b
    if op == "bvshl":
        return 0 if b >= w else (a << b) & mask
    if op == "bvlshr":
        return 0 if b >= w else a >> b
    if op == "bvashr":
        return (_signed(a, w) >> min(b, w)) & mask
    if op == "bvult":
        return int(a < b)
    if op == "bvule":
        return int(a <= b)
    if op == "bvugt":
        return int(a > b)
    if op == "bvuge":
        return int(a >= b)
    sa, sb = _signed(a, w), _signed(b, w)
    if op == "bvslt":
        return int(sa < sb)
    if op == "bvsle":
        return int(sa <= sb)
    if op == "bvsgt":
        return int(sa > sb)
    if op == "bvsge":
        return int(sa >= sb)
    raise SortError(f"cannot evaluate operator {op}")


def definition_interpreter(defs: Iterable[FunctionDefinition]) -> dict:
    """Map each definition name to a Python callable over integer arguments."""
    out = {}
    for d in defs:
        def fn(*args, _d=d):
            return evaluate(_d.body, {p.name: v for p, v in zip(_d.params, args)})
        out[d.name] = fn
    return out
