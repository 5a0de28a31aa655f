"""Call signatures of synthesis functions and argument normalization."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import PipelineError
from .terms import (
    Call, SynthProblem, Term, Var, calls, conj, eq, implies, transform,
)


@dataclass(frozen=True)
class CallSign:
    func: str
    args: tuple  # of Var

    def __str__(self) -> str:
        return f"{self.func}<{', '.join(a.name for a in self.args)}>"


@dataclass(frozen=True)
class CallSignIndex:
    callsigns: dict  # function name -> tuple of CallSign, first-occurrence order
    invocations: dict  # function name -> number of invocation sites

    @property
    def is_single_callsign(self) -> bool:
        # A function that is never invoked imposes no constraint and counts as single.
        return all(len(cs) <= 1 for cs in self.callsigns.values())

    @property
    def classification(self) -> str:
        return "single-callsign" if self.is_single_callsign else "multiple-callsign"

    def multiple(self) -> list:
        return [f for f, cs in self.callsigns.items() if len(cs) > 1]

    def format(self) -> str:
        lines = [f"classification: {self.classification}"]
        for f, cs in self.callsigns.items():
            sigs = ", ".join("<" + ", ".join(a.name for a in c.args) + ">" for c in cs)
            lines.append(f"{f}: invocations={self.invocations[f]} callsigns=[{sigs}]")
        return "\n".join(lines) + "\n"


def _fresh(base: str, taken: set) -> str:
    i = 0
    while f"{base}!{i}" in taken:
        i += 1
    name = f"{base}!{i}"
    taken.add(name)
    return name


def normalize_arguments(problem: SynthProblem) -> SynthProblem:
    """Make every synthesis-function argument a variable.

    Each distinct non-variable argument ``t`` gets a fresh universal input
    ``x`` and the specification becomes ``(x = t ∧ ...) => φ``.  The guard
    must be an implication: ``x`` ranges over all values, and only the
    assignments where it coincides with ``t`` are relevant to ``φ``.
    Problems that are already normalized are returned unchanged.
    """
    taken = {v.name for v in problem.inputs} | {f.name for f in problem.functions}
    fresh: dict = {}  # term -> Var
    order: list = []

    def step(t: Term) -> Term:
        if not isinstance(t, Call) or all(isinstance(a, Var) for a in t.args):
            return t
        new_args = []
        for a in t.args:
            if isinstance(a, Var):
                new_args.append(a)
                continue
            x = fresh.get(a)
            if x is None:
                x = Var(_fresh("arg", taken), a.sort)
                fresh[a] = x
                order.append((x, a))
            new_args.append(x)
        return Call(t.func, tuple(new_args), t.sort)

    rewritten = tuple(transform(c, step) for c in problem.constraints)
    if not order:
        return problem
    guard = conj(eq(x, t) for x, t in order)
    return SynthProblem(
        inputs=problem.inputs + tuple(x for x, _ in order),
        functions=problem.functions,
        constraints=(implies(guard, conj(rewritten)),),
        source_grammars=problem.source_grammars,
    )


def analyze(problem: SynthProblem) -> CallSignIndex:
    """Collect CallSigns per function in left-to-right first-occurrence order."""
    sigs: dict = {f.name: {} for f in problem.functions}
    count: dict = {f.name: 0 for f in problem.functions}
    for c in problem.constraints:
        for call in calls(c):
            if not all(isinstance(a, Var) for a in call.args):
                raise PipelineError(f"invocation of {call.func} has non-variable arguments; normalize first")
            count[call.func] += 1
            sigs[call.func].setdefault(call.args, None)
    return CallSignIndex(
        callsigns={f: tuple(CallSign(f, args) for args in d) for f, d in sigs.items()},
        invocations=count,
    )
