"""Random test corpora: synthesis problems and (D)QDIMACS instances.

Synthesis problems mix two styles.  Planted problems pin every function to
a random target expression at some call sites, so they are realizable by
construction; relational problems combine comparisons between calls and
random expressions and may go either way.
"""

from __future__ import annotations

import random
from itertools import product

from .bitblast import DqbfInstance, ExistGroup
from .terms import Call, FunctionDecl, SynthProblem, Term, Var, app, bv, bvconst, substitute

EXPR_OPS = ("bvand", "bvor", "bvxor", "bvadd", "bvsub", "bvmul", "bvshl", "bvlshr")
RARE_OPS = ("bvudiv", "bvurem", "bvashr")
COMPARE_OPS = ("=", "bvult", "bvule", "bvslt", "bvuge")
INPUT_NAMES = ("a", "b", "c", "d")
FUNCTION_NAMES = ("f", "g", "h")


def random_expr(rng: random.Random, leaves, width: int, depth: int) -> Term:
    if depth <= 0 or rng.random() < 0.3:
        if leaves and rng.random() < 0.8:
            return rng.choice(leaves)
        return bvconst(rng.randrange(1 << width), width)
    r = rng.random()
    if r < 0.12:
        return app(rng.choice(("bvnot", "bvneg")), random_expr(rng, leaves, width, depth - 1))
    if r < 0.22:
        cond = app(rng.choice(COMPARE_OPS), random_expr(rng, leaves, width, 0),
                   random_expr(rng, leaves, width, 0))
        return app("ite", cond, random_expr(rng, leaves, width, depth - 1),
                   random_expr(rng, leaves, width, depth - 1))
    op = rng.choice(RARE_OPS) if r < 0.28 else rng.choice(EXPR_OPS)
    return app(op, random_expr(rng, leaves, width, depth - 1), random_expr(rng, leaves, width, depth - 1))


def _callsigns(rng, inputs, arity, count):
    """``count`` distinct argument tuples (fewer if the inputs run out)."""
    pool = list(product(inputs, repeat=arity))
    rng.shuffle(pool)
    return pool[:count]


def random_problem(rng: random.Random, *, max_inputs: int = 3, max_width: int = 3,
                   max_functions: int = 2, max_callsigns: int = 3, multi: bool | None = None,
                   planted: bool | None = None, term_args: float = 0.1) -> SynthProblem:
    """Random problem within the given size limits.

    ``multi`` forces (True) or forbids (False) a function with several call
    signatures; ``planted`` forces the realizable-by-construction style.
    """
    width = rng.randint(1, max_width)
    sort = bv(width)
    n_inputs = rng.randint(2 if multi else 1, max_inputs)
    inputs = [Var(n, sort) for n in INPUT_NAMES[:n_inputs]]
    n_funcs = rng.randint(1, max_functions)
    budget = max_callsigns
    funcs, sites = [], {}
    for k in range(n_funcs):
        arity = rng.randint(1, min(2, n_inputs))
        params = tuple(Var(f"p{i + 1}", sort) for i in range(arity))
        decl = FunctionDecl(FUNCTION_NAMES[k], params, sort)
        funcs.append(decl)
        remaining = n_funcs - k - 1
        if multi is False:
            want = 1
        elif multi and k == 0:
            want = rng.randint(2, max(2, budget - remaining))
        else:
            want = rng.randint(1, max(1, budget - remaining))
        sigs = _callsigns(rng, inputs, arity, want)
        budget -= len(sigs)
        sites[decl.name] = sigs

    def call(decl, args):
        if rng.random() < term_args:
            args = list(args)
            i = rng.randrange(len(args))
            args[i] = app("bvadd", args[i], bvconst(1, width))
        return Call(decl.name, tuple(args), sort)

    constraints = []
    if planted if planted is not None else rng.random() < 0.5:
        for decl in funcs:
            body = random_expr(rng, list(decl.params), width, 2)
            for args in sites[decl.name]:
                target = substitute(body, {p.name: a for p, a in zip(decl.params, args)})
                constraints.append(app("=", Call(decl.name, args, sort), target))
    else:
        all_calls = [(d, args) for d in funcs for args in sites[d.name]]
        for d, args in all_calls:
            lhs = call(d, args)
            if rng.random() < 0.3 and len(all_calls) > 1:
                d2, args2 = rng.choice(all_calls)
                rhs = Call(d2.name, args2, sort)
            else:
                rhs = random_expr(rng, inputs, width, 1)
            atom = app(rng.choice(COMPARE_OPS), lhs, rhs)
            if rng.random() < 0.3:
                other = app(rng.choice(COMPARE_OPS), random_expr(rng, inputs, width, 1),
                            random_expr(rng, inputs, width, 0))
                atom = app(rng.choice(("or", "and")), atom, other)
            constraints.append(atom)
    return SynthProblem(tuple(inputs), tuple(funcs), tuple(constraints))


def random_dqbf(rng: random.Random, *, max_universals: int = 3, max_existentials: int = 2,
                max_clauses: int = 8, two_qbf: bool = False) -> DqbfInstance:
    """Random CNF matrix under a random Henkin (or forall-exists) prefix."""
    nu = rng.randint(1, max_universals)
    ne = rng.randint(1, max_existentials)
    universals = tuple(range(1, nu + 1))
    groups = []
    for y in range(nu + 1, nu + ne + 1):
        if two_qbf:
            deps = universals
        else:
            deps = tuple(u for u in universals if rng.random() < 0.5)
        groups.append(ExistGroup(None, (y,), deps))
    nvars = nu + ne
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        k = rng.randint(1, min(3, nvars))
        vs = rng.sample(range(1, nvars + 1), k)
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    return DqbfInstance(nvars, universals, tuple(groups), (), tuple(clauses))
