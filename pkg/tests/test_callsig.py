import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import realizable
from dqsynth.callsig import analyze, normalize_arguments
from dqsynth.errors import PipelineError
from dqsynth.frontend import parse_problem
from dqsynth.generate import random_problem
from dqsynth.terms import Call, Var, calls


def _names(cs):
    return [tuple(a.name for a in c.args) for c in cs]


def test_four_calls_index(four_calls):
    index = analyze(four_calls)
    assert _names(index.callsigns["f"]) == [("a", "b"), ("b", "c"), ("b", "a")]
    assert index.invocations["f"] == 4
    assert index.classification == "multiple-callsign"
    assert index.multiple() == ["f"]


def test_identical_invocations_are_single(max2):
    index = analyze(max2)
    assert len(index.callsigns["max2"]) == 1
    assert index.invocations["max2"] == 4
    assert index.is_single_callsign


def test_two_single_functions():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(synth-fun g ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(declare-var b (_ BitVec 1))"
                      "(constraint (= (f a) (g b)))")
    assert analyze(p).classification == "single-callsign"


def test_order_matters():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 1)) (y (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(declare-var b (_ BitVec 1))"
                      "(constraint (= (f a b) (f b a)))")
    assert len(analyze(p).callsigns["f"]) == 2


def test_normalize_replaces_terms():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 2))) (_ BitVec 2))"
                      "(declare-var a (_ BitVec 2))(declare-var b (_ BitVec 2))"
                      "(constraint (= (f (bvadd a b)) a))")
    n = normalize_arguments(p)
    assert len(n.inputs) == 3
    new = n.inputs[-1]
    (call,) = list(calls(n.phi))
    assert call.args == (new,)
    assert all(isinstance(a, Var) for c in calls(n.phi) for a in c.args)


def test_normalize_fixpoint(max2):
    assert normalize_arguments(max2) is max2


def test_normalize_preserves_realizability_bvnot():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(constraint (= (f (bvnot a)) a))")
    n = normalize_arguments(p)
    witness = realizable(n)
    assert realizable(p) is not None and witness is not None
    # the witness must be bvnot on every point the constraint can reach
    assert witness[("f", (0,))] == 1 and witness[("f", (1,))] == 0


def test_analyze_requires_normalized():
    p = parse_problem("(set-logic BV)(synth-fun f ((x (_ BitVec 1))) (_ BitVec 1))"
                      "(declare-var a (_ BitVec 1))(constraint (= (f (bvnot a)) a))")
    with pytest.raises(PipelineError):
        analyze(p)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_every_site_is_indexed(seed):
    p = normalize_arguments(random_problem(random.Random(seed), term_args=0.5))
    index = analyze(p)
    sites = list(calls(p.phi))
    assert sum(index.invocations.values()) == len(sites)
    for c in sites:
        assert c.args in [s.args for s in index.callsigns[c.func]]
    assert analyze(p) == index


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_normalization_preserves_realizability(seed):
    p = random_problem(random.Random(seed), max_width=1, max_inputs=2, term_args=0.6, planted=False)
    n = normalize_arguments(p)
    assert (realizable(p) is None) == (realizable(n) is None)
    assert all(isinstance(a, Var) for c in calls(n.phi) for a in c.args)
    assert not any(isinstance(a, Call) for c in calls(n.phi) for a in c.args)
