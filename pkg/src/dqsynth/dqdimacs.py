"""DQDIMACS / QDIMACS reading and writing.

Layout written by :func:`write_dqdimacs`::

    c x <name> <width|bool> <ids...>     bit map of universal BV variables
    c y <name> <width|bool> <ids...>     bit map of existential BV variables
    c defs <k>                           first k clauses define auxiliaries
    p cnf <vars> <clauses>
    a <universal bits> 0
    e <auxiliaries> 0                    (plus all existential bits for 2-QBF)
    d <bit> <dependencies> 0             one per existential bit otherwise
    <clauses>

The comment lines are only emitted for instances that carry a bit map; they
let a certificate be lifted back to bitvectors after a file round trip.
"""

from __future__ import annotations

from .bitblast import BitMap, DqbfInstance, ExistGroup
from .errors import DimacsError
from .terms import BOOL, bv


def _sort_token(sort) -> str:
    return "bool" if sort.is_bool else str(sort.width)


def write_dqdimacs(instance: DqbfInstance) -> str:
    lines = []
    universe = set(instance.universals)
    for name, ids in instance.bitmap.bits.items():
        if any(c.isspace() for c in name):
            raise ValueError(f"variable name {name!r} cannot be written to DQDIMACS")
        kind = "x" if ids and ids[0] in universe else "y"
        lines.append(f"c {kind} {name} {_sort_token(instance.bitmap.sorts[name])} "
                     + " ".join(map(str, ids)))
    if instance.n_defs:
        lines.append(f"c defs {instance.n_defs}")
    lines.append(f"p cnf {instance.nvars} {len(instance.clauses)}")
    if instance.universals:
        lines.append("a " + " ".join(map(str, instance.universals)) + " 0")
    two_qbf = instance.is_2qbf
    block = list(instance.existential_bits) if two_qbf else []
    block += instance.aux
    if block:
        lines.append("e " + " ".join(map(str, block)) + " 0")
    if not two_qbf:
        for g in instance.groups:
            for b in g.bits:
                lines.append(" ".join(["d", str(b), *map(str, g.deps), "0"]))
    for c in instance.clauses:
        lines.append(" ".join([*map(str, c), "0"]))
    return "\n".join(lines) + "\n"


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise DimacsError("expected integers", lineno) from None


def parse_qdimacs(text: str) -> DqbfInstance:
    """Parse QDIMACS (a ∀∃ prefix) or DQDIMACS (with ``d`` lines)."""
    meta_bits: dict = {}
    meta_sorts: dict = {}
    meta_kind: dict = {}
    n_defs = 0
    header = None
    universals: list = []
    deps: dict = {}  # existential -> deps, in declaration order
    from_e: set = set()
    declared: set = set()
    clauses: list = []
    seen_e = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head == "c":
            if len(tok) >= 4 and tok[1] in ("x", "y"):
                width = tok[3]
                sort = BOOL if width == "bool" else bv(int(width)) if width.isdigit() else None
                if sort is None:
                    raise DimacsError("malformed bit-map comment", lineno)
                meta_bits[tok[2]] = tuple(_ints(tok[4:], lineno))
                meta_sorts[tok[2]] = sort
                meta_kind[tok[2]] = tok[1]
            elif len(tok) == 3 and tok[1] == "defs" and tok[2].isdigit():
                n_defs = int(tok[2])
            continue
        if head == "p":
            if header is not None:
                raise DimacsError("duplicate header", lineno)
            if len(tok) != 4 or tok[1] != "cnf":
                raise DimacsError("malformed header, expected 'p cnf <vars> <clauses>'", lineno)
            nv, nc = _ints(tok[2:], lineno)
            if nv < 0 or nc < 0:
                raise DimacsError("malformed header", lineno)
            header = (nv, nc)
            continue
        if header is None:
            raise DimacsError("missing 'p cnf' header", lineno)
        if head in ("a", "e", "d"):
            if clauses:
                raise DimacsError("quantifier prefix after clauses", lineno)
            ids = _ints(tok[1:], lineno)
            if not ids or ids[-1] != 0 or 0 in ids[:-1]:
                raise DimacsError("prefix line must end with a single 0", lineno)
            ids = ids[:-1]
            for v in (ids if head != "d" else ids[:1]):
                if v <= 0 or v > header[0]:
                    raise DimacsError(f"variable {v} out of range", lineno)
                if v in declared:
                    raise DimacsError(f"variable {v} quantified twice", lineno)
                declared.add(v)
            if head == "a":
                if seen_e:
                    raise DimacsError("quantifier alternation deeper than forall-exists", lineno)
                universals.extend(ids)
            elif head == "e":
                seen_e = True
                for v in ids:
                    deps[v] = tuple(universals)
                    from_e.add(v)
            else:
                if not ids:
                    raise DimacsError("empty d line", lineno)
                u = set(universals)
                for x in ids[1:]:
                    if x not in u:
                        raise DimacsError(f"dependency {x} is not a previously declared universal", lineno)
                deps[ids[0]] = tuple(ids[1:])
            continue
        lits = _ints(tok, lineno)
        if lits[-1] != 0:
            raise DimacsError("clause not terminated by 0", lineno)
        if 0 in lits[:-1]:
            raise DimacsError("clause contains 0 before its end", lineno)
        for lit in lits[:-1]:
            if abs(lit) not in declared:
                raise DimacsError(f"undeclared variable {abs(lit)} in clause", lineno)
        clauses.append(tuple(lits[:-1]))
    if header is None:
        raise DimacsError("missing 'p cnf' header")
    if len(clauses) != header[1]:
        raise DimacsError(f"header announces {header[1]} clauses, found {len(clauses)}")

    groups = []
    grouped: set = set()
    for name, kind in meta_kind.items():
        if kind != "y":
            continue
        ids = meta_bits[name]
        gdeps = {deps.get(b) for b in ids}
        if None in gdeps or len(gdeps) != 1:
            raise DimacsError(f"bits of {name} are not existentials with one shared dependency set")
        groups.append(ExistGroup(name, ids, gdeps.pop()))
        grouped.update(ids)
    aux = []
    for v, d in deps.items():
        if v in grouped:
            continue
        if meta_kind and v in from_e:
            aux.append(v)
        else:
            groups.append(ExistGroup(None, (v,), d))
    return DqbfInstance(
        nvars=header[0],
        universals=tuple(universals),
        groups=tuple(groups),
        aux=tuple(aux),
        clauses=tuple(clauses),
        n_defs=n_defs,
        bitmap=BitMap(meta_bits, meta_sorts),
    )


def read_dqdimacs_file(path) -> DqbfInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_qdimacs(fh.read())
