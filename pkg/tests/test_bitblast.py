import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from oracles import brute_sat
from dqsynth.bitblast import Blaster, blast, clause_stats
from dqsynth.dqf import DqfFormula, Existential, to_dqf
from dqsynth.frontend import parse_problem
from dqsynth.generate import random_expr, random_problem
from dqsynth.sat import SatSolver, sat_solve
from dqsynth.terms import Var, app, bv, evaluate


def _formula(body_text, inputs, outputs):
    """A DQF from surface syntax: outputs are (name, width, deps)."""
    decls = "".join(f"(declare-var {n} (_ BitVec {w}))" for n, w in inputs + [(o, w) for o, w, _ in outputs])
    p = parse_problem(f"(set-logic BV){decls}(constraint {body_text})")
    xs = tuple(p.input(n) for n, _ in inputs)
    es = tuple(Existential(p.input(o), tuple(p.input(d) for d in deps), o, ()) for o, _, deps in outputs)
    return DqfFormula(xs, es, p.phi)


def test_and_example():
    inst = blast(_formula("(= y (bvand x1 x2))", [("x1", 1), ("x2", 1)], [("y", 1, ["x1", "x2"])]))
    assert inst.universals == (1, 2)
    assert inst.existential_bits == (3,)
    assert inst.dependencies == {3: (1, 2)}
    # the CNF pins y to x1 & x2 on every assignment
    for x1, x2, y in product((False, True), repeat=3):
        units = [(1 if x1 else -1,), (2 if x2 else -2,), (3 if y else -3,)]
        sat = sat_solve(list(inst.clauses) + units, inst.nvars) is not None
        assert sat == (y == (x1 and x2))


def test_constant_tautology():
    inst = blast(_formula("(= (bvadd #b01 #b01) #b10)", [("x", 2)], []))
    assert inst.assertions == ()
    assert sat_solve(inst.clauses, inst.nvars) is not None


def test_constant_contradiction():
    inst = blast(_formula("(= (bvadd #b01 #b01) #b11)", [("x", 2)], []))
    assert sat_solve(inst.clauses, inst.nvars) is None


def test_bit_counts():
    inst = blast(_formula("(= (bvadd y z) (bvmul x w))", [("x", 4), ("w", 4)],
                          [("y", 4, ["x"]), ("z", 4, ["x", "w"])]))
    assert len(inst.universals) == 8
    assert [len(g.bits) for g in inst.groups] == [4, 4]
    assert inst.groups[0].deps == inst.bitmap.bits["x"]
    assert len(inst.groups[1].deps) == 8
    nv, nc, na = clause_stats(inst)
    assert nv == inst.nvars and na == len(inst.aux)


def test_definitions_split():
    inst = blast(_formula("(bvult (bvadd x y) x)", [("x", 3)], [("y", 3, ["x"])]))
    assert inst.n_defs == len(inst.definitions) > 0
    assert all(len(c) == 1 for c in inst.assertions)
    defs = set(inst.definitions)
    assert all(c in defs for c in inst.clauses[: inst.n_defs])


def test_deterministic():
    f = _formula("(= (bvmul y x) (bvudiv x #b101))", [("x", 3)], [("y", 3, ["x"])])
    assert blast(f) == blast(f)
    assert blast(f).clauses == blast(f).clauses


OPS2 = ("bvand", "bvor", "bvxor", "bvadd", "bvsub", "bvmul", "bvudiv", "bvurem",
        "bvshl", "bvlshr", "bvashr")


@pytest.mark.parametrize("op", OPS2)
def test_operator_width3(op):
    a, b, r = Var("a", bv(3)), Var("b", bv(3)), Var("r", bv(3))
    blaster = Blaster()
    xa, xb, xr = blaster.declare(a), blaster.declare(b), blaster.declare(r)
    (root,) = blaster.bits(app("=", r, app(op, a, b)))
    s = SatSolver(blaster.next_var - 1)
    for c in blaster.clauses:
        s.add_clause(c)
    lits = lambda ids, v: [i if (v >> k) & 1 else -i for k, i in enumerate(ids)]  # noqa: E731
    for va, vb in product(range(8), repeat=2):
        want = evaluate(app(op, a, b), {"a": va, "b": vb})
        assert s.solve(lits(xa, va) + lits(xb, vb) + lits(xr, want) + [root])
        wrong = (want + 1) % 8
        assert not s.solve(lits(xa, va) + lits(xb, vb) + lits(xr, wrong) + [root])


def _eval_circuit(blaster, lits, env_bits):
    s = SatSolver(blaster.next_var - 1)
    for c in blaster.clauses:
        s.add_clause(c)
    assert s.solve(env_bits)
    return sum(1 << k for k, l in enumerate(lits) if (l if type(l) is bool else s.value(l)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_random_expression_equivalence(seed):
    rng = random.Random(seed)
    width = rng.randint(1, 4)
    leaves = [Var(n, bv(width)) for n in "ab"]
    expr = random_expr(rng, leaves, width, 4)
    blaster = Blaster()
    ids = {v.name: blaster.declare(v) for v in leaves}
    out = blaster.bits(expr)
    for _ in range(4):
        env = {n: rng.randrange(1 << width) for n in ids}
        assume = [i if (env[n] >> k) & 1 else -i for n, bits in ids.items() for k, i in enumerate(bits)]
        assert _eval_circuit(blaster, out, assume) == evaluate(expr, env)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_dependencies_are_conservative(seed):
    from dqsynth.ackermann import to_single_callsign
    from dqsynth.callsig import normalize_arguments

    p = random_problem(random.Random(seed), max_width=2)
    f = to_dqf(to_single_callsign(normalize_arguments(p))[0])
    inst = blast(f)
    universe = set(inst.universals)
    for e, g in zip(f.existentials, inst.groups):
        allowed = {b for d in e.deps for b in inst.bitmap.bits[d.name]}
        assert set(g.deps) == allowed
        assert set(g.deps) <= universe
    # every auxiliary is a function of universals and existentials
    if len(inst.universals) + len(inst.existential_bits) <= 6:
        base = list(inst.universals) + list(inst.existential_bits)
        for vals in product((False, True), repeat=len(base)):
            units = [(v if b else -v,) for v, b in zip(base, vals)]
            m1 = sat_solve(list(inst.definitions) + units, inst.nvars)
            assert m1 is not None
            if inst.aux:
                block = tuple(-a if m1[a] else a for a in inst.aux)
                assert sat_solve(list(inst.definitions) + units + [block], inst.nvars) is None


def test_brute_force_agrees_on_small_instance():
    inst = blast(_formula("(= y (bvxor x #b1))", [("x", 1)], [("y", 1, ["x"])]))
    model = brute_sat(inst.clauses, inst.nvars)
    assert model is not None and model[2] != model[1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_body_true_iff_cnf_satisfiable(seed):
    from dqsynth.generate import COMPARE_OPS

    rng = random.Random(seed)
    width = rng.randint(1, 3)
    xs = [Var(n, bv(width)) for n in "ab"]
    y = Var("y", bv(width))
    leaves = xs + [y]
    atoms = [app(rng.choice(COMPARE_OPS), random_expr(rng, leaves, width, 2), random_expr(rng, leaves, width, 2))
             for _ in range(rng.randint(1, 3))]
    body = atoms[0] if len(atoms) == 1 else app(rng.choice(("and", "or")), *atoms)
    formula = DqfFormula(tuple(xs), (Existential(y, (xs[0],), "f", (xs[0],)),), body)
    inst = blast(formula)
    s = SatSolver(inst.nvars)
    for c in inst.clauses:
        s.add_clause(c)
    names = ["a", "b", "y"]
    for vals in product(range(1 << width), repeat=3):
        env = dict(zip(names, vals))
        assume = [i if (env[n] >> k) & 1 else -i for n in names for k, i in enumerate(inst.bitmap.bits[n])]
        assert s.solve(assume) == bool(evaluate(body, env))
