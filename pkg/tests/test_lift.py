import random
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from conftest import max2_text
from dqsynth.bitblast import BitMap, blast
from dqsynth.dqf import to_dqf
from dqsynth.errors import PipelineError
from dqsynth.frontend import emit_definitions, parse_problem
from dqsynth.generate import random_expr, random_problem
from dqsynth.lift import lift, simplify, verify_lifted
from dqsynth.pipeline import synthesize
from dqsynth.solver import DecisionList, HenkinSolution, TruthTable, solve
from dqsynth.terms import FunctionDefinition, Var, app, bv, bvconst, evaluate, free_vars, size

SIZE_FACTOR = 8


def _identity_problem(width):
    return parse_problem(f"(set-logic BV)(synth-fun f ((x (_ BitVec {width}))) (_ BitVec {width}))"
                         f"(declare-var a (_ BitVec {width}))(constraint (= (f a) a))")


def _solved(problem):
    dqf = to_dqf(problem)
    inst = blast(dqf)
    return dqf, inst, solve(inst).solution


def test_identity_width1():
    p = _identity_problem(1)
    dqf, inst, _ = _solved(p)
    (a,), (y,) = inst.universals, inst.existential_bits
    sol = HenkinSolution({y: TruthTable((a,), 0b10)}, inst.bitmap)
    (d,) = lift(sol, dqf, None, p.functions)
    assert emit_definitions([d]) == "(define-fun f ((x (_ BitVec 1))) (_ BitVec 1) x)\n"


def test_identity_width2():
    p = _identity_problem(2)
    dqf, inst, _ = _solved(p)
    a0, a1 = inst.universals
    y0, y1 = inst.existential_bits
    sol = HenkinSolution({y0: TruthTable((a0,), 0b10), y1: TruthTable((a1,), 0b10)}, inst.bitmap)
    (d,) = lift(sol, dqf, None, p.functions)
    for v in range(4):
        assert evaluate(d.body, {"x": v}) == v
    assert d.body == Var("x", bv(2))


@pytest.mark.parametrize("width", [2, 3])
def test_max2_exhaustive(width):
    p = parse_problem(max2_text(width))
    dqf, inst, sol = _solved(p)
    (d,) = lift(sol, dqf, None, p.functions)
    assert verify_lifted([d], p) is None
    for a, b in product(range(1 << width), repeat=2):
        assert evaluate(d.body, {"x": a, "y": b}) == max(a, b)


def test_constant_zero_counterexample(max2):
    x, y = max2.functions[0].params
    zero = FunctionDefinition("max2", (x, y), bv(2), bvconst(0, 2))
    cex = verify_lifted([zero], max2)
    assert cex is not None and (cex["a"] > 0 or cex["b"] > 0)


def test_identity_verifies():
    p = _identity_problem(3)
    x = p.functions[0].params[0]
    assert verify_lifted([FunctionDefinition("f", (x,), bv(3), x)], p) is None
    with pytest.raises(ValueError):
        verify_lifted([], p)


def test_decision_list_lift():
    p = _identity_problem(1)
    dqf, inst, _ = _solved(p)
    (a,), (y,) = inst.universals, inst.existential_bits
    sol = HenkinSolution({y: DecisionList((a,), ((1, True),), False)}, inst.bitmap)
    (d,) = lift(sol, dqf, None, p.functions)
    assert verify_lifted([d], p) is None


def test_missing_bit_function():
    p = _identity_problem(1)
    dqf, inst, _ = _solved(p)
    with pytest.raises(PipelineError):
        lift(HenkinSolution({}, inst.bitmap), dqf, None, p.functions)
    with pytest.raises(PipelineError):
        lift(HenkinSolution({inst.existential_bits[0]: TruthTable((), 0)}, BitMap()), dqf, None, p.functions)


def test_repeated_argument_maps_to_first_parameter():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 2)) (y (_ BitVec 2))) (_ BitVec 2))"
                      "(declare-var a (_ BitVec 2))(constraint (= (f a a) (bvnot a)))")
    run = synthesize(p)
    (d,) = run.definitions
    assert set(free_vars(d.body)) <= {"x"}


def test_uncalled_function_is_zero():
    run = synthesize("(set-logic BV)(synth-fun f ((x (_ BitVec 2))) (_ BitVec 2))"
                     "(declare-var a (_ BitVec 2))(constraint (= a a))")
    assert run.definitions[0].body == bvconst(0, 2)


def test_bool_function():
    run = synthesize("(set-logic BV)(synth-fun lt ((x (_ BitVec 2)) (y (_ BitVec 2))) Bool)"
                     "(declare-var a (_ BitVec 2))(declare-var b (_ BitVec 2))"
                     "(constraint (= (lt a b) (bvult a b)))")
    (d,) = run.definitions
    for a, b in product(range(4), repeat=2):
        assert evaluate(d.body, {"x": a, "y": b}) == int(a < b)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32))
def test_linear_size_and_hygiene(seed):
    run = synthesize(random_problem(random.Random(seed)))
    if run.verdict != "realizable":
        return
    total = sum(size(d.body) for d in run.definitions)
    assert total <= SIZE_FACTOR * max(1, run.result.solution.circuit_size)
    for d in run.definitions:
        assert set(free_vars(d.body)) <= {p.name for p in d.params}


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_simplify_preserves_semantics(seed):
    rng = random.Random(seed)
    width = rng.randint(1, 3)
    leaves = [Var(n, bv(width)) for n in "ab"]
    e = random_expr(rng, leaves, width, 4)
    k = rng.randrange(width)
    terms = [e, app("concat", app("extract", e, indices=(width - 1, k)), app("extract", e, indices=(k, 0)))
             if k < width - 1 else e,
             app("ite", app("=", app("extract", e, indices=(k, k)), bvconst(1, 1)), bvconst(1, 1), bvconst(0, 1))]
    for t in terms:
        s = simplify(t)
        assert s.sort == t.sort
        for va, vb in product(range(1 << width), repeat=2):
            env = {"a": va, "b": vb}
            assert evaluate(s, env) == evaluate(t, env)
