"""Lifting propositional Henkin functions back to bitvector definitions.

Each output bit of a synthesized function is rebuilt as a Boolean term over
single-bit tests of the parameters, turned into a width-1 vector with
``ite`` and glued together with ``concat``.  Truth tables become Shannon
trees, decision lists become flat disjunctions of row matches.  A small
simplifier folds constants and fuses adjacent extracts so that, for
instance, a bitwise identity comes back as the parameter itself.
"""

from __future__ import annotations

from .ackermann import AckermannTrace
from .bitblast import blast
from .dqf import DqfFormula
from .errors import PipelineError
from .sat import sat_solve
from .solver import TABLE_LIMIT, DecisionList, HenkinSolution, TruthTable
from .terms import (
    App, Const, FALSE, TRUE, FunctionDefinition, SynthProblem, Term, Var, app,
    bvconst, evaluate, inline_calls, size, transform,
)

B1 = bvconst(1, 1)
B0 = bvconst(0, 1)


# --------------------------------------------------------------------------
# Simplifier

def _not(t: Term) -> Term:
    if isinstance(t, Const):
        return FALSE if t.value else TRUE
    if isinstance(t, App) and t.op == "not":
        return t.args[0]
    return app("not", t)


def _junction(op: str, args) -> Term:
    unit, absorb = (TRUE, FALSE) if op == "and" else (FALSE, TRUE)
    out = []
    for a in args:
        parts = a.args if isinstance(a, App) and a.op == op else (a,)
        for p in parts:
            if p == absorb:
                return absorb
            if p != unit and p not in out:
                out.append(p)
    if not out:
        return unit
    if len(out) == 1:
        return out[0]
    return app(op, *out)


def _bit_of(c: Term):
    """``t`` if ``c`` is ``(= t #b1)`` with ``t`` of width 1, else None."""
    if isinstance(c, App) and c.op == "=" and c.args[1] == B1 and c.args[0].sort.width == 1:
        return c.args[0]
    return None


def _extract(hi: int, lo: int, t: Term) -> Term:
    if lo == 0 and hi == t.sort.width - 1:
        return t
    if isinstance(t, Const):
        return bvconst(t.value >> lo, hi - lo + 1)
    if isinstance(t, App) and t.op == "extract":
        base = t.indices[1]
        return _extract(hi + base, lo + base, t.args[0])
    if isinstance(t, App) and t.op == "concat":
        high, low = t.args
        wl = low.sort.width
        if hi < wl:
            return _extract(hi, lo, low)
        if lo >= wl:
            return _extract(hi - wl, lo - wl, high)
    return app("extract", t, indices=(hi, lo))


def _concat(a: Term, b: Term) -> Term:
    if isinstance(a, Const) and isinstance(b, Const):
        return bvconst((a.value << b.sort.width) | b.value, a.sort.width + b.sort.width)
    if (isinstance(a, App) and a.op == "extract" and isinstance(b, App) and b.op == "extract"
            and a.args[0] == b.args[0] and a.indices[1] == b.indices[0] + 1):
        return _extract(a.indices[0], b.indices[1], a.args[0])
    if isinstance(a, App) and a.op == "concat":
        fused = _concat(a.args[1], b)
        if not (isinstance(fused, App) and fused.op == "concat"):
            return _concat(a.args[0], fused)
    return app("concat", a, b)


def _ite(c: Term, a: Term, b: Term) -> Term:
    if isinstance(c, Const):
        return a if c.value else b
    if a == b:
        return a
    if a == TRUE and b == FALSE:
        return c
    if a == FALSE and b == TRUE:
        return _not(c)
    if a.sort.is_bool:
        if a == TRUE:
            return _junction("or", (c, b))
        if b == FALSE:
            return _junction("and", (c, a))
        if a == FALSE:
            return _junction("and", (_not(c), b))
        if b == TRUE:
            return _junction("or", (_not(c), a))
    if a == B1 and b == B0:
        t = _bit_of(c)
        if t is not None:
            return t
    return app("ite", c, a, b)


def _step(t: Term) -> Term:
    if not isinstance(t, App):
        return t
    op, args = t.op, t.args
    if args and all(isinstance(a, Const) for a in args):
        return Const(evaluate(t, {}), t.sort)
    if op == "not":
        return _not(args[0])
    if op in ("and", "or"):
        return _junction(op, args)
    if op == "ite":
        return _ite(*args)
    if op == "extract":
        return _extract(*t.indices, args[0])
    if op == "concat":
        return _concat(*args)
    if op == "=":
        if args[0] == args[1]:
            return TRUE
        x, k = args
        if isinstance(x, App) and x.op == "ite" and x.args[1:] == (B1, B0) and k in (B1, B0):
            return x.args[0] if k == B1 else _not(x.args[0])
    return t


def simplify(term: Term) -> Term:
    """Semantics-preserving cleanup of lifted terms."""
    return transform(term, _step)


# --------------------------------------------------------------------------
# Lifting

def _bit_test(param: Var, i: int) -> Term:
    if param.sort.is_bool:
        return param
    if param.sort.width == 1:
        return app("=", param, B1)
    return app("=", app("extract", param, indices=(i, i)), B1)


def _lift_bit(fn, cond) -> Term:
    if isinstance(fn, TruthTable):
        vals = [TRUE if (fn.table >> r) & 1 else FALSE for r in range(fn.size)]
        for d in fn.deps:
            c = cond(d)
            vals = [_ite(c, vals[2 * k + 1], vals[2 * k]) for k in range(len(vals) // 2)]
        return vals[0]
    if isinstance(fn, DecisionList):
        flat = _lift_list(fn, cond)
        if len(fn.deps) > TABLE_LIMIT:
            return flat
        tree = _lift_bit(_tabulate(fn), cond)
        return tree if size(tree) <= size(flat) else flat
    raise PipelineError(f"unknown function representation {type(fn).__name__}")


def _tabulate(fn: DecisionList) -> TruthTable:
    table = 0
    for r in range(1 << len(fn.deps)):
        if fn({d: (r >> j) & 1 for j, d in enumerate(fn.deps)}):
            table |= 1 << r
    return TruthTable(fn.deps, table)


def _lift_list(fn: DecisionList, cond) -> Term:
    wanted = not fn.default
    rows = [r for r, v in fn.entries if v == wanted]
    matches = [_junction("and", [cond(d) if (r >> j) & 1 else _not(cond(d))
                                 for j, d in enumerate(fn.deps)]) for r in rows]
    hit = _junction("or", matches)
    return hit if wanted else _not(hit)


def _zero(sort) -> Term:
    return FALSE if sort.is_bool else bvconst(0, sort.width)


def lift(sol: HenkinSolution, dqf: DqfFormula, trace: AckermannTrace | None,
         functions) -> list:
    """Definitions for the original synthesis functions ``functions``."""
    canonical = trace.canonical if trace else {}
    by_func = {e.func: e for e in dqf.existentials}
    reverse = sol.bitmap.reverse()
    defs = []
    for f in functions:
        e = by_func.get(canonical.get(f.name, f.name))
        if e is None:
            defs.append(FunctionDefinition(f.name, f.params, f.ret, _zero(f.ret)))
            continue
        if len(e.args) != len(f.params):
            raise PipelineError(f"call signature of {f.name} does not match its parameters")
        slot = {}
        for k, a in enumerate(e.args):
            slot.setdefault(a.name, f.params[k])

        def cond(bit, _slot=slot):
            try:
                name, i = reverse[bit]
                return _bit_test(_slot[name], i)
            except KeyError:
                raise PipelineError(f"dependency bit {bit} of {f.name} maps to no parameter") from None

        ids = sol.bitmap.bits.get(e.var.name)
        if ids is None:
            raise PipelineError(f"no bit map for {e.var.name}")
        bits = []
        for b in ids:
            fn = sol.functions.get(b)
            if fn is None:
                raise PipelineError(f"solution has no function for bit {b} of {f.name}")
            bits.append(_lift_bit(fn, cond))
        if f.ret.is_bool:
            body = bits[0]
        else:
            body = None
            for bit in reversed(bits):
                v = _ite(bit, B1, B0)
                body = v if body is None else _concat(body, v)
        defs.append(FunctionDefinition(f.name, f.params, f.ret, simplify(body)))
    return defs


def verify_lifted(defs, problem: SynthProblem):
    """None if ``defs`` solve ``problem``, else a counterexample ``{input: value}``."""
    table = {d.name: d for d in defs}
    missing = [f.name for f in problem.functions if f.name not in table]
    if missing:
        raise ValueError(f"no definition for {', '.join(missing)}")
    phi = inline_calls(problem.phi, table)
    inst = blast(DqfFormula(tuple(problem.inputs), (), app("not", phi)))
    model = sat_solve(inst.clauses, inst.nvars)
    if model is None:
        return None
    values = inst.bitmap.decode(model)
    return {v.name: values[v.name] for v in problem.inputs}
