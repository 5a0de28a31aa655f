"""SyGuS-style front end for BV synthesis problems.

Parses the ``declare-var`` / ``synth-fun`` / ``define-fun`` / ``constraint``
subset of SyGuS-v2 into a sort-checked :class:`SynthProblem`, and prints
terms and function definitions back as SMT-LIB text.  Grammars attached to
``synth-fun`` are kept as opaque text and otherwise ignored.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence

from .errors import (
    DuplicateDeclarationError, LexError, ParseError, SortError,
    UnknownOperatorError, UnsupportedFeatureError,
)
from .terms import (
    BOOL, OPERATORS, Call, Const, FALSE, TRUE, FunctionDecl,
    FunctionDefinition, Sort, SynthProblem, Term, Var, app, bv, conj,
    substitute,
)

logger = logging.getLogger(__name__)

# Recognised SMT-LIB names that this tool deliberately does not handle.
UNSUPPORTED_OPS = frozenset({
    "bvnand", "bvnor", "bvxnor", "bvcomp", "bvsdiv", "bvsrem", "bvsmod",
    "zero_extend", "sign_extend", "rotate_left", "rotate_right", "repeat",
    "distinct", "bv2nat", "nat2bv", "forall", "exists", "match", "!",
    "+", "-", "*", "div", "mod", "abs", "<", "<=", ">", ">=",
})
UNSUPPORTED_COMMANDS = frozenset({
    "synth-inv", "inv-constraint", "declare-primed-var", "declare-datatype",
    "declare-datatypes", "declare-fun", "declare-sort", "define-sort",
    "assume", "chc-constraint", "oracle-constraint", "declare-oracle-fun",
    "optimize-synth",
})
# n-ary BV operators are left-associative in SMT-LIB.
LEFT_ASSOC_BV = frozenset({"bvand", "bvor", "bvxor", "bvadd", "bvmul"})


# --------------------------------------------------------------------------
# s-expressions

@dataclass
class Atom:
    text: str
    line: int
    col: int
    quoted: bool = False


@dataclass
class SList:
    items: list
    line: int
    col: int
    start: int
    end: int


_SIMPLE_SYMBOL = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/\-][0-9A-Za-z~!@$%^&*_+=<>.?/\-]*\Z")
_TOKEN_CHARS = re.compile(r"[^\s()|;\"]+")


def read_sexprs(text: str) -> list:
    """Read every top-level s-expression in ``text``."""
    stack: list = []
    top: list = []
    i, line, line_start = 0, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        col = i - line_start + 1
        if ch == "\n":
            line += 1
            line_start = i + 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "(":
            stack.append(SList([], line, col, i, -1))
            i += 1
        elif ch == ")":
            if not stack:
                raise LexError("unbalanced ')'", line, col)
            node = stack.pop()
            node.end = i + 1
            (stack[-1].items if stack else top).append(node)
            i += 1
        elif ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise LexError("unterminated quoted symbol", line, col)
            body = text[i + 1:j]
            (stack[-1].items if stack else top).append(Atom(body, line, col, quoted=True))
            line += body.count("\n")
            if "\n" in body:
                line_start = i + 1 + body.rfind("\n") + 1
            i = j + 1
        elif ch == '"':
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    raise LexError("unterminated string literal", line, col)
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            body = text[i:j + 1]
            (stack[-1].items if stack else top).append(Atom(body, line, col))
            i = j + 1
        else:
            m = _TOKEN_CHARS.match(text, i)
            if not m:
                raise LexError(f"unexpected character {ch!r}", line, col)
            tok = m.group()
            if tok.startswith("#") and not re.fullmatch(r"#b[01]+|#x[0-9A-Fa-f]+", tok):
                raise LexError(f"malformed literal {tok}", line, col)
            (stack[-1].items if stack else top).append(Atom(tok, line, col))
            i = m.end()
    if stack:
        raise LexError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


def _pos(node) -> tuple:
    return node.line, node.col


def _sym(node, what: str = "symbol") -> str:
    if not isinstance(node, Atom) or node.text.startswith(("#", '"', ":")) and not node.quoted:
        raise ParseError(f"expected {what}", *_pos(node))
    return node.text


# --------------------------------------------------------------------------
# Parsing

class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.inputs: dict = {}
        self.synth: dict = {}
        self.macros: dict = {}
        self.grammars: dict = {}
        self.constraints: list = []

    # sorts ---------------------------------------------------------------
    def sort(self, node) -> Sort:
        if isinstance(node, Atom):
            if node.text == "Bool":
                return BOOL
            raise UnsupportedFeatureError(f"unsupported sort {node.text}", *_pos(node))
        items = node.items
        if (len(items) == 3 and isinstance(items[0], Atom) and items[0].text == "_"
                and isinstance(items[1], Atom) and items[1].text == "BitVec"
                and isinstance(items[2], Atom) and items[2].text.isdigit()):
            width = int(items[2].text)
            if width < 1:
                raise SortError("bitvector width must be positive", *_pos(node))
            return bv(width)
        raise UnsupportedFeatureError("unsupported sort", *_pos(node))

    def params(self, node) -> tuple:
        if not isinstance(node, SList):
            raise ParseError("expected parameter list", *_pos(node))
        out, seen = [], set()
        for p in node.items:
            if not isinstance(p, SList) or len(p.items) != 2:
                raise ParseError("expected (name sort) parameter", *_pos(p))
            name = _sym(p.items[0], "parameter name")
            if name in seen:
                raise DuplicateDeclarationError(f"duplicate parameter {name}", *_pos(p))
            seen.add(name)
            out.append(Var(name, self.sort(p.items[1])))
        return tuple(out)

    # terms ---------------------------------------------------------------
    def term(self, node, scope: dict) -> Term:
        try:
            return self._term(node, scope)
        except SortError as e:
            if e.line is None:
                raise SortError(e.message, *_pos(node)) from None
            raise

    def _atom(self, node: Atom, scope: dict) -> Term:
        tok = node.text
        if not node.quoted:
            if tok.startswith("#b"):
                return Const(int(tok[2:], 2), bv(len(tok) - 2))
            if tok.startswith("#x"):
                return Const(int(tok[2:], 16), bv(4 * (len(tok) - 2)))
            if tok == "true":
                return TRUE
            if tok == "false":
                return FALSE
            if tok[0].isdigit() or tok.startswith('"'):
                raise UnsupportedFeatureError(f"unsupported literal {tok}", *_pos(node))
        if tok in scope:
            return scope[tok]
        if tok in self.synth and not self.synth[tok].params:
            return Call(tok, (), self.synth[tok].ret)
        if tok in self.macros and not self.macros[tok].params:
            return self.macros[tok].body
        raise UnknownOperatorError(f"undeclared symbol {tok}", *_pos(node))

    def _term(self, node, scope: dict) -> Term:
        if isinstance(node, Atom):
            return self._atom(node, scope)
        items = node.items
        if not items:
            raise ParseError("empty application", *_pos(node))
        head = items[0]
        if isinstance(head, SList):
            # ((_ extract i j) t) or the indexed constant (_ bvN w) as a head
            h = head.items
            if len(h) == 4 and isinstance(h[0], Atom) and h[0].text == "_" \
                    and isinstance(h[1], Atom) and h[1].text == "extract":
                try:
                    hi, lo = int(h[2].text), int(h[3].text)
                except (AttributeError, ValueError):
                    raise ParseError("extract indices must be numerals", *_pos(head)) from None
                if len(items) != 2:
                    raise SortError("extract expects one argument", *_pos(node))
                return app("extract", self.term(items[1], scope), indices=(hi, lo))
            if len(h) >= 2 and isinstance(h[0], Atom) and h[0].text == "_" and isinstance(h[1], Atom):
                if h[1].text in UNSUPPORTED_OPS:
                    raise UnsupportedFeatureError(f"unsupported operator {h[1].text}", *_pos(head))
                raise UnknownOperatorError(f"unknown indexed operator {h[1].text}", *_pos(head))
            raise UnsupportedFeatureError("higher-order application", *_pos(head))
        op = head.text
        if op == "_" and not head.quoted:
            # (_ bvN w)
            if len(items) == 3 and isinstance(items[1], Atom) and re.fullmatch(r"bv\d+", items[1].text) \
                    and isinstance(items[2], Atom) and items[2].text.isdigit():
                width = int(items[2].text)
                if width < 1:
                    raise SortError("bitvector width must be positive", *_pos(node))
                return Const(int(items[1].text[2:]) % (1 << width), bv(width))
            raise UnsupportedFeatureError("unsupported indexed term", *_pos(node))
        if op == "let" and not head.quoted:
            return self._let(node, scope)
        args_nodes = items[1:]
        if op in self.synth:
            decl = self.synth[op]
            args = tuple(self.term(a, scope) for a in args_nodes)
            self._check_args(op, decl.param_sorts, args, node)
            return Call(op, args, decl.ret)
        if op in self.macros:
            d = self.macros[op]
            args = tuple(self.term(a, scope) for a in args_nodes)
            self._check_args(op, tuple(p.sort for p in d.params), args, node)
            return substitute(d.body, {p.name: a for p, a in zip(d.params, args)})
        if op in scope:
            raise SortError(f"{op} is not a function", *_pos(node))
        if op in UNSUPPORTED_OPS:
            raise UnsupportedFeatureError(f"unsupported operator {op}", *_pos(head))
        if op not in OPERATORS or op == "extract":
            raise UnknownOperatorError(f"unknown operator {op}", *_pos(head))
        args = [self.term(a, scope) for a in args_nodes]
        return self._apply(op, args)

    @staticmethod
    def _apply(op: str, args: list) -> Term:
        if op in LEFT_ASSOC_BV and len(args) > 2:
            return reduce(lambda a, b: app(op, a, b), args)
        if op == "xor" and len(args) > 2:
            return reduce(lambda a, b: app("xor", a, b), args)
        if op == "=>" and len(args) > 2:
            return reduce(lambda b, a: app("=>", a, b), reversed(args))
        if op == "=" and len(args) > 2:
            return conj(app("=", a, b) for a, b in zip(args, args[1:]))
        return app(op, *args)

    def _check_args(self, name, sorts, args, node):
        if len(args) != len(sorts):
            raise SortError(f"{name} expects {len(sorts)} arguments, got {len(args)}", *_pos(node))
        for i, (s, a) in enumerate(zip(sorts, args)):
            if a.sort != s:
                raise SortError(f"argument {i + 1} of {name} has sort {a.sort}, expected {s}",
                                *_pos(node.items[i + 1]))

    def _let(self, node, scope):
        items = node.items
        if len(items) != 3 or not isinstance(items[1], SList):
            raise ParseError("malformed let", *_pos(node))
        inner = dict(scope)
        bound = set()
        for b in items[1].items:
            if not isinstance(b, SList) or len(b.items) != 2:
                raise ParseError("malformed let binding", *_pos(b))
            name = _sym(b.items[0], "let variable")
            if name in bound:
                raise DuplicateDeclarationError(f"duplicate let binding {name}", *_pos(b))
            bound.add(name)
            # parallel let: bound terms see the outer scope
            inner[name] = self.term(b.items[1], scope)
        return self.term(items[2], inner)

    # commands ------------------------------------------------------------
    def declare(self, name: str, node):
        if name in self.inputs or name in self.synth or name in self.macros:
            raise DuplicateDeclarationError(f"duplicate declaration of {name}", *_pos(node))
        if name in OPERATORS or name in ("true", "false", "let", "_"):
            raise DuplicateDeclarationError(f"{name} clashes with a reserved name", *_pos(node))

    def command(self, node):
        if not isinstance(node, SList) or not node.items or not isinstance(node.items[0], Atom):
            raise ParseError("expected a command", *_pos(node))
        cmd = node.items[0].text
        args = node.items[1:]
        if cmd == "set-logic":
            logic = _sym(args[0], "logic") if args else ""
            if "BV" not in logic and logic not in ("ALL", "Core"):
                raise UnsupportedFeatureError(f"unsupported logic {logic}", *_pos(node))
        elif cmd in ("set-option", "set-info", "set-feature", "check-synth"):
            pass
        elif cmd == "declare-var":
            if len(args) != 2:
                raise ParseError("declare-var expects a name and a sort", *_pos(node))
            name = _sym(args[0], "variable name")
            self.declare(name, node)
            self.inputs[name] = Var(name, self.sort(args[1]))
        elif cmd == "synth-fun":
            if len(args) < 3:
                raise ParseError("synth-fun expects name, parameters and sort", *_pos(node))
            name = _sym(args[0], "function name")
            self.declare(name, node)
            params = self.params(args[1])
            self.synth[name] = FunctionDecl(name, params, self.sort(args[2]))
            if len(args) > 3:
                first, last = args[3], args[-1]
                if isinstance(first, SList) and isinstance(last, SList):
                    text = self.text[first.start:last.end]
                else:
                    raise ParseError("malformed grammar", *_pos(first))
                self.grammars[name] = text
                logger.warning("grammar for %s ignored: synthesis uses the full BV vocabulary", name)
        elif cmd == "define-fun":
            if len(args) != 4:
                raise ParseError("define-fun expects name, parameters, sort and body", *_pos(node))
            name = _sym(args[0], "function name")
            self.declare(name, node)
            params = self.params(args[1])
            ret = self.sort(args[2])
            body = self.term(args[3], {p.name: p for p in params})
            if body.sort != ret:
                raise SortError(f"body of {name} has sort {body.sort}, declared {ret}", *_pos(args[3]))
            self.macros[name] = _Macro(name, params, ret, body)
        elif cmd == "constraint":
            if len(args) != 1:
                raise ParseError("constraint expects one term", *_pos(node))
            t = self.term(args[0], dict(self.inputs))
            if not t.sort.is_bool:
                raise SortError("constraint must be Bool", *_pos(args[0]))
            self.constraints.append(t)
        elif cmd in UNSUPPORTED_COMMANDS:
            raise UnsupportedFeatureError(f"unsupported command {cmd}", *_pos(node))
        else:
            raise UnknownOperatorError(f"unknown command {cmd}", *_pos(node))


@dataclass(frozen=True)
class _Macro:
    name: str
    params: tuple
    ret: Sort
    body: Term


def parse_problem(text: str) -> SynthProblem:
    """Parse a synthesis problem document."""
    p = _Parser(text)
    for node in read_sexprs(text):
        p.command(node)
    return SynthProblem(
        inputs=tuple(p.inputs.values()),
        functions=tuple(p.synth.values()),
        constraints=tuple(p.constraints),
        source_grammars=tuple(p.grammars.items()),
    )


def parse_definitions(text: str) -> list:
    """Parse a document of ``define-fun`` forms (e.g. solver output)."""
    p = _Parser(text)
    out = []
    for node in read_sexprs(text):
        if not (isinstance(node, SList) and node.items and isinstance(node.items[0], Atom)
                and node.items[0].text == "define-fun"):
            raise ParseError("expected define-fun", *_pos(node))
        p.command(node)
        m = p.macros[_sym(node.items[1])]
        try:
            out.append(FunctionDefinition(m.name, m.params, m.ret, m.body))
        except SortError as e:
            raise SortError(e.message, *_pos(node)) from None
    return out


# --------------------------------------------------------------------------
# Printing

def format_symbol(name: str) -> str:
    return name if _SIMPLE_SYMBOL.match(name) else f"|{name}|"


def format_sort(sort: Sort) -> str:
    return str(sort)


def format_const(c: Const) -> str:
    if c.sort.is_bool:
        return "true" if c.value else "false"
    return "#b" + format(c.value, f"0{c.sort.width}b")


def format_term(term: Term) -> str:
    parts: list = []

    def go(t):
        if isinstance(t, Const):
            parts.append(format_const(t))
        elif isinstance(t, Var):
            parts.append(format_symbol(t.name))
        elif isinstance(t, Call) and not t.args:
            parts.append(format_symbol(t.func))
        else:
            if isinstance(t, Call):
                parts.append("(" + format_symbol(t.func))
            elif t.op == "extract":
                parts.append(f"((_ extract {t.indices[0]} {t.indices[1]})")
            else:
                parts.append("(" + t.op)
            for a in t.args:
                parts.append(" ")
                go(a)
            parts.append(")")

    go(term)
    return "".join(parts)


def _format_params(params: Sequence[Var]) -> str:
    return "(" + " ".join(f"({format_symbol(p.name)} {p.sort})" for p in params) + ")"


def format_definition(d: FunctionDefinition) -> str:
    return f"(define-fun {format_symbol(d.name)} {_format_params(d.params)} {d.ret} {format_term(d.body)})"


def emit_definitions(defs: Iterable[FunctionDefinition]) -> str:
    """One ``define-fun`` line per definition."""
    return "".join(format_definition(d) + "\n" for d in defs)


def format_problem(problem: SynthProblem, logic: str = "BV") -> str:
    grammars = dict(problem.source_grammars)
    lines = [f"(set-logic {logic})"]
    for f in problem.functions:
        g = grammars.get(f.name)
        tail = f" {g}" if g else ""
        lines.append(f"(synth-fun {format_symbol(f.name)} {_format_params(f.params)} {f.ret}{tail})")
    for v in problem.inputs:
        lines.append(f"(declare-var {format_symbol(v.name)} {v.sort})")
    for c in problem.constraints:
        lines.append(f"(constraint {format_term(c)})")
    lines.append("(check-synth)")
    return "\n".join(lines) + "\n"
