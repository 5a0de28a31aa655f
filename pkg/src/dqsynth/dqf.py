"""Single-callsign problems as dependency-quantified BV formulas.

Each synthesis function ``f_i`` with its unique call signature ``h`` is
replaced by one existential ``y_i`` whose Henkin dependency set is the set
of variables in ``h``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .callsig import analyze
from .errors import PipelineError
from .terms import Call, SynthProblem, Term, Var, calls, transform


@dataclass(frozen=True)
class Existential:
    var: Var
    deps: tuple  # H_i: ordered, duplicate-free Vars
    func: str  # synthesis function this output stands for
    args: tuple  # that function's unique call signature


@dataclass(frozen=True)
class DqfFormula:
    universals: tuple  # of Var
    existentials: tuple  # of Existential
    body: Term

    @property
    def origin(self) -> dict:
        return {e.var.name: (e.func, e.args) for e in self.existentials}

    def format(self) -> str:
        from .frontend import format_term

        lines = ["(forall (" + " ".join(f"({v.name} {v.sort})" for v in self.universals) + "))"]
        for e in self.existentials:
            deps = " ".join(d.name for d in e.deps)
            lines.append(f"(henkin {e.var.name} {e.var.sort} ({deps}))  ; {e.func}")
        lines.append(format_term(self.body))
        return "\n".join(lines) + "\n"


def to_dqf(problem: SynthProblem) -> DqfFormula:
    index = analyze(problem)
    if not index.is_single_callsign:
        raise PipelineError("to_dqf requires a single-callsign problem; run to_single_callsign first")
    taken = {v.name for v in problem.inputs} | {f.name for f in problem.functions}
    existentials = []
    out_var = {}
    for f in problem.functions:
        cs = index.callsigns[f.name]
        if not cs:
            continue
        name, i = f"{f.name}!out", 0
        while name in taken:
            i += 1
            name = f"{f.name}!out{i}"
        taken.add(name)
        y = Var(name, f.ret)
        args = cs[0].args
        deps = tuple(dict.fromkeys(args))
        existentials.append(Existential(y, deps, f.name, args))
        out_var[f.name] = y

    def step(t: Term) -> Term:
        return out_var[t.func] if isinstance(t, Call) else t

    body = transform(problem.phi, step)
    assert not any(True for _ in calls(body))
    return DqfFormula(tuple(problem.inputs), tuple(existentials), body)


def is_2qbf(formula: DqfFormula) -> bool:
    """True iff every existential may depend on all universals."""
    universe = set(formula.universals)
    return all(set(e.deps) == universe for e in formula.existentials)
