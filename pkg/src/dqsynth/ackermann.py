"""Reduction of multiple-callsign problems to single-callsign ones.

Every distinct call signature ``j`` of a function ``f`` gets its own symbol
``f^j``; a fresh canonical symbol ``f^ℓ`` applied to fresh universal inputs
``Z`` is tied to each of them by ``(args_j = Z) => f^j(args_j) = f^ℓ(Z)``.
The canonical symbol is what gets lifted back as the definition of ``f``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .callsig import CallSignIndex, analyze
from .errors import PipelineError
from .terms import (
    Call, FunctionDecl, SynthProblem, Term, Var, conj, eq, implies, transform,
)


@dataclass(frozen=True)
class AgreementConstraint:
    guard: Term
    consequence: Term

    @property
    def term(self) -> Term:
        return implies(self.guard, self.consequence)


@dataclass(frozen=True)
class FunctionTrace:
    original: str
    z: tuple  # of Var
    renamed: tuple  # names f^0 .. f^(ℓ-1)
    canonical: str
    agreements: tuple


@dataclass(frozen=True)
class AckermannTrace:
    functions: tuple = ()

    @property
    def canonical(self) -> dict:
        return {t.original: t.canonical for t in self.functions}

    def __bool__(self) -> bool:
        return bool(self.functions)

    def format(self) -> str:
        from .frontend import format_term

        if not self.functions:
            return "ackermann: not applied\n"
        lines = []
        for t in self.functions:
            lines.append(f"{t.original}: Z=({', '.join(z.name for z in t.z)}) "
                         f"renamed=[{', '.join(t.renamed)}] canonical={t.canonical}")
            for a in t.agreements:
                lines.append(f"  {format_term(a.term)}")
        return "\n".join(lines) + "\n"


def fresh_variable_budget(index: CallSignIndex) -> int:
    """Number of fresh universal variables :func:`to_single_callsign` adds."""
    return sum(len(cs[0].args) for cs in index.callsigns.values() if len(cs) > 1)


def _fresh(name: str, taken: set) -> str:
    out, i = name, 0
    while out in taken:
        i += 1
        out = f"{name}.{i}"
    taken.add(out)
    return out


def to_single_callsign(problem: SynthProblem, index: CallSignIndex | None = None):
    """Return ``(problem', trace)`` where every function of ``problem'`` has one CallSign."""
    if index is None:
        index = analyze(problem)
    multi = index.multiple()
    if not multi:
        return problem, AckermannTrace()

    taken = {v.name for v in problem.inputs} | {f.name for f in problem.functions}
    rename: dict = {}  # (f, args) -> new symbol
    traces = []
    new_inputs = list(problem.inputs)
    agreements = []
    decls = {}
    for f in problem.functions:
        cs = index.callsigns[f.name]
        if len(cs) <= 1:
            decls[f.name] = (f,)
            continue
        arity = len(f.params)
        if any(len(c.args) != arity for c in cs):
            raise PipelineError(f"call signatures of {f.name} disagree with its arity {arity}")
        ell = len(cs)
        z = tuple(Var(_fresh(f"{f.name}^z{k + 1}", taken), a.sort) for k, a in enumerate(cs[0].args))
        renamed = tuple(_fresh(f"{f.name}^{j}", taken) for j in range(ell))
        canonical = _fresh(f"{f.name}^{ell}", taken)
        canon_call = Call(canonical, z, f.ret)
        fn_agreements = []
        for j, c in enumerate(cs):
            rename[(f.name, c.args)] = renamed[j]
            guard = conj(eq(a, zk) for a, zk in zip(c.args, z))
            consequence = eq(Call(renamed[j], c.args, f.ret), canon_call)
            fn_agreements.append(AgreementConstraint(guard, consequence))
        new_inputs.extend(z)
        agreements.extend(fn_agreements)
        decls[f.name] = tuple(FunctionDecl(n, f.params, f.ret) for n in renamed + (canonical,))
        traces.append(FunctionTrace(f.name, z, renamed, canonical, tuple(fn_agreements)))

    def step(t: Term) -> Term:
        if isinstance(t, Call):
            new = rename.get((t.func, t.args))
            if new is not None:
                return Call(new, t.args, t.sort)
        return t

    constraints = tuple(transform(c, step) for c in problem.constraints)
    out = SynthProblem(
        inputs=tuple(new_inputs),
        functions=tuple(d for f in problem.functions for d in decls[f.name]),
        constraints=constraints + tuple(a.term for a in agreements),
        source_grammars=problem.source_grammars,
    )
    return out, AckermannTrace(tuple(traces))
