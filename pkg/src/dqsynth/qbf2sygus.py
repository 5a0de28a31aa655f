"""Turn (D)QBF instances into synthesis problems over width-1 bitvectors.

Universal variable ``v`` becomes the input ``x<v>``; existential ``v``
becomes a function ``y<v>`` whose parameters are its dependencies, applied
to the matching inputs.  The matrix is one constraint, a conjunction of
clauses whose literals read ``(= t #b1)`` or ``(= t #b0)``.
"""

from __future__ import annotations

from .bitblast import DqbfInstance
from .terms import FALSE, TRUE, Call, FunctionDecl, SynthProblem, Var, app, bv, bvconst, conj

BV1 = bv(1)


def convert(instance: DqbfInstance) -> SynthProblem:
    inputs = {u: Var(f"x{u}", BV1) for u in instance.universals}
    functions = []
    leaf = dict(inputs)
    dependencies = dict(instance.dependencies)
    for a in instance.aux:  # auxiliaries are existentials over every universal
        dependencies[a] = instance.universals
    for b, deps in dependencies.items():
        params = tuple(inputs[d] for d in deps)
        functions.append(FunctionDecl(f"y{b}", params, BV1))
        leaf[b] = Call(f"y{b}", params, BV1)
    one, zero = bvconst(1, 1), bvconst(0, 1)
    clauses = []
    for c in instance.clauses:
        lits = [app("=", leaf[abs(l)], one if l > 0 else zero) for l in c]
        if not lits:
            clauses.append(FALSE)
        elif len(lits) == 1:
            clauses.append(lits[0])
        else:
            clauses.append(app("or", *lits))
    return SynthProblem(
        inputs=tuple(inputs.values()),
        functions=tuple(functions),
        constraints=(conj(clauses) if clauses else TRUE,),
    )
