import random

from hypothesis import given, settings, strategies as st

from oracles import realizable
from dqsynth.ackermann import fresh_variable_budget, to_single_callsign
from dqsynth.callsig import analyze, normalize_arguments
from dqsynth.frontend import format_term, parse_problem
from dqsynth.generate import random_problem
from dqsynth.terms import evaluate, size

# Agreement constraint for an arity-a call: 5 + 5a nodes; the call itself has
# at least 1 + a, so each call site adds at most 5x its own size.
SIZE_FACTOR = 6


def problem_size(p) -> int:
    return sum(size(c) for c in p.constraints)


def test_four_calls_structure(four_calls):
    out, trace = to_single_callsign(four_calls)
    assert [f.name for f in out.functions] == ["f^0", "f^1", "f^2", "f^3"]
    (t,) = trace.functions
    assert [z.name for z in t.z] == ["f^z1", "f^z2"]
    assert t.canonical == "f^3"
    assert trace.canonical == {"f": "f^3"}
    assert [format_term(a.term) for a in t.agreements] == [
        "(=> (and (= a f^z1) (= b f^z2)) (= (f^0 a b) (f^3 f^z1 f^z2)))",
        "(=> (and (= b f^z1) (= c f^z2)) (= (f^1 b c) (f^3 f^z1 f^z2)))",
        "(=> (and (= b f^z1) (= a f^z2)) (= (f^2 b a) (f^3 f^z1 f^z2)))",
    ]
    assert format_term(out.constraints[0]) == (
        "(and (= (f^0 a b) #b1) (= (f^1 b c) #b1) (= (f^2 b a) #b1) (= (f^0 a b) #b1))")
    index = analyze(out)
    assert index.is_single_callsign
    assert all(len(cs) == 1 for cs in index.callsigns.values())


def test_budget(four_calls, max2):
    assert fresh_variable_budget(analyze(four_calls)) == 2
    assert fresh_variable_budget(analyze(max2)) == 0
    p = parse_problem("(set-logic BV)"
                      "(synth-fun f ((x (_ BitVec 1)) (y (_ BitVec 1)) (z (_ BitVec 1))) (_ BitVec 1))"
                      "(synth-fun g ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(declare-var b (_ BitVec 1))"
                      "(constraint (= (f a b a) (f b a b)))(constraint (= (g a) (g b)))")
    index = analyze(p)
    assert fresh_variable_budget(index) == 4
    out, _ = to_single_callsign(p, index)
    assert len(out.inputs) == len(p.inputs) + 4


def test_single_callsign_unchanged(max2):
    out, trace = to_single_callsign(max2)
    assert out is max2
    assert not trace


def test_width1_two_sites():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(declare-var b (_ BitVec 1))"
                      "(constraint (and (= (f a) #b1) (= (f b) #b1)))")
    out, _ = to_single_callsign(p)
    assert realizable(out) is not None and realizable(p) is not None
    q = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(declare-var b (_ BitVec 1))"
                      "(constraint (and (= (f a) a) (= (f b) (bvnot b))))")
    out, _ = to_single_callsign(q)
    assert realizable(out) is None and realizable(q) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_linear_size_and_single_callsign(seed):
    p = normalize_arguments(random_problem(random.Random(seed), multi=True))
    out, trace = to_single_callsign(p)
    assert analyze(out).is_single_callsign
    assert problem_size(out) <= SIZE_FACTOR * problem_size(p)
    for t in trace.functions:
        assert len(t.renamed) == len(analyze(p).callsigns[t.original])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_realizability_equivalence(seed):
    p = normalize_arguments(random_problem(random.Random(seed), multi=True, max_inputs=3, max_width=1))
    out, trace = to_single_callsign(p)
    witness = realizable(out)
    assert (realizable(p) is None) == (witness is None)
    if witness is None:
        return
    # the canonical function, read back as f, solves the original problem
    canonical = trace.canonical
    table = {}
    for (name, args), v in witness.items():
        table[(name, args)] = v

    def interp(f):
        name = canonical.get(f, f)

        def fn(*args):
            return table.get((name, args), 0)
        return fn

    funcs = {f.name: interp(f.name) for f in p.functions}
    names = [v.name for v in p.inputs]
    from itertools import product
    for vals in product(*(range(1 << v.sort.nbits) for v in p.inputs)):
        assert evaluate(p.phi, dict(zip(names, vals)), funcs) == 1
