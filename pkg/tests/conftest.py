import pytest

from dqsynth.frontend import parse_problem

MAX2 = """(set-logic BV)
(synth-fun max2 ((x (_ BitVec {w})) (y (_ BitVec {w}))) (_ BitVec {w}))
(declare-var a (_ BitVec {w}))
(declare-var b (_ BitVec {w}))
(constraint (bvuge (max2 a b) a))
(constraint (bvuge (max2 a b) b))
(constraint (or (= a (max2 a b)) (= b (max2 a b))))
(check-synth)
"""

# f(a,b) /\ f(b,c) /\ f(b,a) /\ f(a,b): four invocations, three call signatures
FOUR_CALLS = """(set-logic BV)
(synth-fun f ((x (_ BitVec 1)) (y (_ BitVec 1))) (_ BitVec 1))
(declare-var a (_ BitVec 1))
(declare-var b (_ BitVec 1))
(declare-var c (_ BitVec 1))
(constraint (and (= (f a b) #b1) (= (f b c) #b1) (= (f b a) #b1) (= (f a b) #b1)))
(check-synth)
"""


def max2_text(width: int) -> str:
    return MAX2.format(w=width)


@pytest.fixture
def max2():
    return parse_problem(max2_text(2))


@pytest.fixture
def four_calls():
    return parse_problem(FOUR_CALLS)
