"""Abstract syntax, parsing and printing for the object language.

The language is a small imperative core over natural-number stores:

    E ::= x | n | E + E | E - E | E * E | E / E | E % E
    B ::= E = E | E <= E | !B | B && B | B || B
    C ::= skip | x := E | C ; C | while B do { C } | C + C
    P ::= B | !P | P && P | P || P | P -> P | exists x. P | forall x. P

``C + C`` is nondeterministic choice.  Subtraction is truncating and
division/modulo are totalised in the semantics module; the syntax layer
treats all five operators alike.  Comparison sugar (``!=``, ``<``, ``>``,
``>=``) and the constants ``true``/``false`` desugar at parse time and are
re-sugared by the printer, so parse/print round-trips are stable on ASTs
even when they rewrite the concrete text.

``if B then C1 else C2`` is accepted as sugar and compiled with a fresh
flag variable::

    t := 0;
    while B && t = 0 do { C1; t := 1 };
    while !B && t = 0 do { C2; t := 1 }

Fresh variables are spelled ``x_p1``, ``x_p2``, ... in ASCII; reports may
render the suffix as prime marks (see ``prettify``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence


# --- abstract syntax ---------------------------------------------------


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Const(Expr):
    value: int


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * / %
    left: Expr
    right: Expr


class BoolExpr:
    __slots__ = ()


@dataclass(frozen=True)
class Eq(BoolExpr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Le(BoolExpr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class BNot(BoolExpr):
    arg: BoolExpr


@dataclass(frozen=True)
class BAnd(BoolExpr):
    left: BoolExpr
    right: BoolExpr


@dataclass(frozen=True)
class BOr(BoolExpr):
    left: BoolExpr
    right: BoolExpr


class Prog:
    __slots__ = ()


@dataclass(frozen=True)
class Empty(Prog):
    pass


@dataclass(frozen=True)
class Assign(Prog):
    name: str
    expr: Expr


@dataclass(frozen=True)
class Seq(Prog):
    first: Prog
    second: Prog


@dataclass(frozen=True)
class While(Prog):
    guard: BoolExpr
    body: Prog
    # Optional proof annotation; ignored by structural equality so that an
    # annotated loop and its bare form are the same program.
    invariant: "Assertion | None" = field(default=None, compare=False)


@dataclass(frozen=True)
class Choice(Prog):
    left: Prog
    right: Prog


@dataclass(frozen=True)
class IfSugar(Prog):
    """Parser-internal conditional; compiled away by ``parse_program``."""

    cond: BoolExpr
    then: Prog
    orelse: Prog


class Assertion:
    __slots__ = ()


@dataclass(frozen=True)
class Bool(Assertion):
    expr: BoolExpr


@dataclass(frozen=True)
class Not(Assertion):
    arg: Assertion


@dataclass(frozen=True)
class And(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Or(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Implies(Assertion):
    left: Assertion
    right: Assertion


@dataclass(frozen=True)
class Exists(Assertion):
    var: str
    body: Assertion


@dataclass(frozen=True)
class Forall(Assertion):
    var: str
    body: Assertion


TRUE_BOOL = Eq(Const(0), Const(0))
FALSE_BOOL = BNot(TRUE_BOOL)
TRUE = Bool(TRUE_BOOL)
FALSE = Bool(FALSE_BOOL)


# --- variable sets ------------------------------------------------------


def expr_vars(e: Expr) -> frozenset[str]:
    if isinstance(e, Var):
        return frozenset({e.name})
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, BinOp):
        return expr_vars(e.left) | expr_vars(e.right)
    raise TypeError(f"not an expression: {e!r}")


def bool_vars(b: BoolExpr) -> frozenset[str]:
    if isinstance(b, (Eq, Le)):
        return expr_vars(b.left) | expr_vars(b.right)
    if isinstance(b, BNot):
        return bool_vars(b.arg)
    if isinstance(b, (BAnd, BOr)):
        return bool_vars(b.left) | bool_vars(b.right)
    raise TypeError(f"not a boolean expression: {b!r}")


def prog_vars(p: Prog) -> frozenset[str]:
    """Variables occurring in program text (invariant annotations excluded)."""
    if isinstance(p, Empty):
        return frozenset()
    if isinstance(p, Assign):
        return frozenset({p.name}) | expr_vars(p.expr)
    if isinstance(p, Seq):
        return prog_vars(p.first) | prog_vars(p.second)
    if isinstance(p, While):
        return bool_vars(p.guard) | prog_vars(p.body)
    if isinstance(p, Choice):
        return prog_vars(p.left) | prog_vars(p.right)
    if isinstance(p, IfSugar):
        return bool_vars(p.cond) | prog_vars(p.then) | prog_vars(p.orelse)
    raise TypeError(f"not a program: {p!r}")


def free_vars(a: Assertion) -> frozenset[str]:
    if isinstance(a, Bool):
        return bool_vars(a.expr)
    if isinstance(a, Not):
        return free_vars(a.arg)
    if isinstance(a, (And, Or, Implies)):
        return free_vars(a.left) | free_vars(a.right)
    if isinstance(a, (Exists, Forall)):
        return free_vars(a.body) - {a.var}
    raise TypeError(f"not an assertion: {a!r}")


def assertion_vars(a: Assertion) -> frozenset[str]:
    """Free and bound variables together."""
    if isinstance(a, Bool):
        return bool_vars(a.expr)
    if isinstance(a, Not):
        return assertion_vars(a.arg)
    if isinstance(a, (And, Or, Implies)):
        return assertion_vars(a.left) | assertion_vars(a.right)
    if isinstance(a, (Exists, Forall)):
        return assertion_vars(a.body) | {a.var}
    raise TypeError(f"not an assertion: {a!r}")


def quantifier_count(a: Assertion) -> int:
    """Number of quantifier nodes, a cheap evaluation-cost proxy."""
    if isinstance(a, Bool):
        return 0
    if isinstance(a, Not):
        return quantifier_count(a.arg)
    if isinstance(a, (And, Or, Implies)):
        return quantifier_count(a.left) + quantifier_count(a.right)
    if isinstance(a, (Exists, Forall)):
        return 1 + quantifier_count(a.body)
    raise TypeError(f"not an assertion: {a!r}")


# --- fresh names and substitution ---------------------------------------

_FRESH_RE = re.compile(r"^(.*?)_p(\d+)$")


def fresh_var(avoid: Iterable[str], hint: str) -> str:
    """Pick ``hint`` itself if unused, else ``hint`` with the smallest
    ``_p<k>`` suffix not in ``avoid``.  ``fresh_var({'x','x_p1'},'x')``
    is ``x_p2``."""
    taken = set(avoid)
    if hint not in taken:
        return hint
    m = _FRESH_RE.match(hint)
    base = m.group(1) if m else hint
    k = 1
    while f"{base}_p{k}" in taken:
        k += 1
    return f"{base}_p{k}"


def prettify(text: str) -> str:
    """Render ``_p<k>`` fresh-name suffixes as prime marks for reports."""
    return re.sub(r"_p(\d+)", lambda m: "′" * int(m.group(1)), text)


def subst_expr(e: Expr, mapping: dict[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, BinOp):
        return BinOp(e.op, subst_expr(e.left, mapping), subst_expr(e.right, mapping))
    raise TypeError(f"not an expression: {e!r}")


def subst_bool(b: BoolExpr, pairs: Sequence[tuple[str, Expr]]) -> BoolExpr:
    mapping = dict(pairs)

    def go(b: BoolExpr) -> BoolExpr:
        if isinstance(b, Eq):
            return Eq(subst_expr(b.left, mapping), subst_expr(b.right, mapping))
        if isinstance(b, Le):
            return Le(subst_expr(b.left, mapping), subst_expr(b.right, mapping))
        if isinstance(b, BNot):
            return BNot(go(b.arg))
        if isinstance(b, BAnd):
            return BAnd(go(b.left), go(b.right))
        if isinstance(b, BOr):
            return BOr(go(b.left), go(b.right))
        raise TypeError(f"not a boolean expression: {b!r}")

    return go(b)


def subst(a: Assertion, pairs: Sequence[tuple[str, Expr]]) -> Assertion:
    """Simultaneous capture-avoiding substitution.

    All pairs apply at once, so ``subst(x <= y, [(x,y),(y,x)])`` swaps the
    two variables.  A binder whose name would capture a substituted
    expression is renamed with ``fresh_var`` first, e.g.
    ``subst(exists x. x = y, [(y, x)])`` yields ``exists x_p1. x_p1 = x``.
    """

    def go(a: Assertion, mapping: dict[str, Expr]) -> Assertion:
        if not mapping:
            return a
        if isinstance(a, Bool):
            return Bool(subst_bool(a.expr, list(mapping.items())))
        if isinstance(a, Not):
            return Not(go(a.arg, mapping))
        if isinstance(a, And):
            return And(go(a.left, mapping), go(a.right, mapping))
        if isinstance(a, Or):
            return Or(go(a.left, mapping), go(a.right, mapping))
        if isinstance(a, Implies):
            return Implies(go(a.left, mapping), go(a.right, mapping))
        if isinstance(a, (Exists, Forall)):
            cls = type(a)
            body_free = free_vars(a.body)
            inner = {k: v for k, v in mapping.items() if k != a.var and k in body_free}
            if not inner:
                return a
            var = a.var
            body = a.body
            cap = frozenset().union(*(expr_vars(v) for v in inner.values()))
            if var in cap:
                var = fresh_var(cap | body_free | set(inner), var)
                body = go(body, {a.var: Var(var)})
            return cls(var, go(body, inner))
        raise TypeError(f"not an assertion: {a!r}")

    return go(a, dict(pairs))


def alpha_rename(a: Assertion) -> Assertion:
    """Rename binders apart from free variables and from each other,
    left to right, keeping names that do not clash.  Idempotent; applied
    by the assertion parser so structurally equal texts parse equal."""
    avoid = set(free_vars(a))

    def go(a: Assertion) -> Assertion:
        if isinstance(a, Bool):
            return a
        if isinstance(a, Not):
            return Not(go(a.arg))
        if isinstance(a, And):
            return And(go(a.left), go(a.right))
        if isinstance(a, Or):
            return Or(go(a.left), go(a.right))
        if isinstance(a, Implies):
            return Implies(go(a.left), go(a.right))
        if isinstance(a, (Exists, Forall)):
            cls = type(a)
            var, body = a.var, a.body
            if var in avoid:
                new = fresh_var(avoid | assertion_vars(body), var)
                body = subst(body, [(var, Var(new))])
                var = new
            avoid.add(var)
            return cls(var, go(body))
        raise TypeError(f"not an assertion: {a!r}")

    return go(a)


def canon(a: Assertion) -> Assertion:
    """Pack purely boolean connectives down into ``BoolExpr`` form, so a
    quantifier-free assertion has exactly one shape.  ``Not(Bool(b))``
    becomes ``Bool(BNot(b))`` and likewise for and/or; implication has no
    boolean counterpart and stays at the assertion level."""
    if isinstance(a, Bool):
        return a
    if isinstance(a, Not):
        arg = canon(a.arg)
        if isinstance(arg, Bool):
            return Bool(BNot(arg.expr))
        return Not(arg)
    if isinstance(a, And):
        l, r = canon(a.left), canon(a.right)
        if isinstance(l, Bool) and isinstance(r, Bool):
            return Bool(BAnd(l.expr, r.expr))
        return And(l, r)
    if isinstance(a, Or):
        l, r = canon(a.left), canon(a.right)
        if isinstance(l, Bool) and isinstance(r, Bool):
            return Bool(BOr(l.expr, r.expr))
        return Or(l, r)
    if isinstance(a, Implies):
        return Implies(canon(a.left), canon(a.right))
    if isinstance(a, Exists):
        return Exists(a.var, canon(a.body))
    if isinstance(a, Forall):
        return Forall(a.var, canon(a.body))
    raise TypeError(f"not an assertion: {a!r}")


# --- program normal form ------------------------------------------------


def normalize_program(p: Prog) -> Prog:
    """Flatten sequencing to right-associated form and drop ``skip`` units,
    recursively.  Idempotent; the structural-equality notion used by proof
    checking compares programs in this normal form."""

    def units(p: Prog, acc: list[Prog]) -> None:
        if isinstance(p, Seq):
            units(p.first, acc)
            units(p.second, acc)
        elif isinstance(p, Empty):
            pass
        else:
            acc.append(norm_unit(p))

    def norm_unit(p: Prog) -> Prog:
        if isinstance(p, While):
            return While(p.guard, normalize_program(p.body), p.invariant)
        if isinstance(p, Choice):
            return Choice(normalize_program(p.left), normalize_program(p.right))
        if isinstance(p, Assign):
            return p
        raise TypeError(f"not a sequencing unit: {p!r}")

    acc: list[Prog] = []
    units(p, acc)
    if not acc:
        return Empty()
    out = acc[-1]
    for unit in reversed(acc[:-1]):
        out = Seq(unit, out)
    return out


class EmptyProgramError(Exception):
    """Raised when a head/tail split of the empty program is requested."""


def decompose_head(p: Prog) -> tuple[Prog, Prog]:
    """Split a normalized program into its first step and continuation.

    The head is an assignment, loop, or choice; the tail may be ``Empty``.
    Splitting ``Empty`` itself raises ``EmptyProgramError``.
    """
    p = normalize_program(p)
    if isinstance(p, Empty):
        raise EmptyProgramError("empty program has no head")
    if isinstance(p, Seq):
        return p.first, p.second
    return p, Empty()


def seq_of(first: Prog, second: Prog) -> Prog:
    """Sequence two programs, in normal form."""
    return normalize_program(Seq(first, second))


# --- lexer ---------------------------------------------------------------


class ParseError(Exception):
    def __init__(self, message: str, pos: int, text: str = ""):
        line = text.count("\n", 0, pos) + 1 if text else 0
        col = pos - text.rfind("\n", 0, pos) if text else 0
        self.pos = pos
        super().__init__(f"{message} (line {line}, column {col})" if text else message)


_KEYWORDS = {
    "skip", "while", "do", "if", "then", "else", "invariant",
    "exists", "forall", "true", "false",
}

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+|\#[^\n]*)
    | (?P<num>\d+)
    | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<op>:=|<=|>=|!=|&&|\|\||->|[()+\-*/%={};!<>.])
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        pos = m.end()
        if m.lastgroup == "ws":
            continue
        value = m.group()
        kind = m.lastgroup
        if kind == "ident" and value in _KEYWORDS:
            kind = "kw"
        tokens.append((kind, value, m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


# --- parser --------------------------------------------------------------


class _Parser:
    """Recursive descent with explicit position save/restore.

    Two places need one speculative parse: ``( ... )`` may enclose either
    an arithmetic or a boolean/assertion phrase, and inside an assignment's
    right-hand side a ``+`` may instead begin a nondeterministic choice
    (``x := 1 + y := 2`` is a choice between two assignments).
    """

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token plumbing --

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.pos]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at(self, *values: str) -> bool:
        kind, value, _ = self.peek()
        return value in values and kind in ("op", "kw")

    def expect(self, value: str) -> None:
        kind, got, pos = self.peek()
        if got != value or kind not in ("op", "kw"):
            raise ParseError(f"expected {value!r}, found {got or 'end of input'!r}", pos, self.text)
        self.pos += 1

    def fail(self, message: str) -> ParseError:
        _, got, pos = self.peek()
        return ParseError(f"{message}, found {got or 'end of input'!r}", pos, self.text)

    # -- arithmetic expressions --

    def expr(self, assign_rhs: bool = False) -> Expr:
        e = self.term()
        while self.at("+", "-"):
            save = self.pos
            _, op, _ = self.next()
            if op == "+" and assign_rhs:
                # Speculate: if the continuation reads as the start of a new
                # assignment, this + is a program choice, not addition.
                try:
                    rhs = self.term()
                except ParseError:
                    self.pos = save
                    break
                if self.at(":="):
                    self.pos = save
                    break
                e = BinOp(op, e, rhs)
                continue
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.at("*", "/", "%"):
            _, op, _ = self.next()
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        kind, value, _ = self.peek()
        if kind == "num":
            self.next()
            return Const(int(value))
        if kind == "ident":
            self.next()
            return Var(value)
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        raise self.fail("expected expression")

    # -- comparisons (shared by guards and assertions) --

    def comparison(self) -> BoolExpr:
        left = self.expr()
        if self.at("="):
            self.next()
            return Eq(left, self.expr())
        if self.at("<="):
            self.next()
            return Le(left, self.expr())
        if self.at("!="):
            self.next()
            return BNot(Eq(left, self.expr()))
        if self.at("<"):
            self.next()
            return BNot(Le(self.expr(), left))
        if self.at(">"):
            self.next()
            return BNot(Le(left, self.expr()))
        if self.at(">="):
            self.next()
            return Le(self.expr(), left)
        raise self.fail("expected comparison operator")

    # -- boolean guards --

    def bool_expr(self) -> BoolExpr:
        b = self.bool_term()
        while self.at("||"):
            self.next()
            b = BOr(b, self.bool_term())
        return b

    def bool_term(self) -> BoolExpr:
        b = self.bool_factor()
        while self.at("&&"):
            self.next()
            b = BAnd(b, self.bool_factor())
        return b

    def bool_factor(self) -> BoolExpr:
        if self.at("!"):
            self.next()
            return BNot(self.bool_factor())
        if self.at("true"):
            self.next()
            return TRUE_BOOL
        if self.at("false"):
            self.next()
            return FALSE_BOOL
        save = self.pos
        try:
            return self.comparison()
        except ParseError:
            self.pos = save
        self.expect("(")
        b = self.bool_expr()
        self.expect(")")
        return b

    # -- assertions --

    def assertion(self) -> Assertion:
        a = self.assert_or()
        if self.at("->"):
            self.next()
            return Implies(a, self.assertion())
        return a

    def assert_or(self) -> Assertion:
        a = self.assert_and()
        while self.at("||"):
            self.next()
            a = Or(a, self.assert_and())
        return a

    def assert_and(self) -> Assertion:
        a = self.assert_unary()
        while self.at("&&"):
            self.next()
            a = And(a, self.assert_unary())
        return a

    def assert_unary(self) -> Assertion:
        if self.at("!"):
            self.next()
            return Not(self.assert_unary())
        if self.at("exists", "forall"):
            _, kw, _ = self.next()
            kind, name, pos = self.next()
            if kind != "ident":
                raise ParseError(f"expected variable after {kw!r}", pos, self.text)
            self.expect(".")
            body = self.assertion()
            return Exists(name, body) if kw == "exists" else Forall(name, body)
        if self.at("true"):
            self.next()
            return TRUE
        if self.at("false"):
            self.next()
            return FALSE
        save = self.pos
        try:
            return Bool(self.comparison())
        except ParseError:
            self.pos = save
        self.expect("(")
        a = self.assertion()
        self.expect(")")
        return a

    # -- programs --

    def program(self) -> Prog:
        stmts = [self.choice()]
        while self.at(";"):
            self.next()
            stmts.append(self.choice())
        p = stmts[-1]
        for s in reversed(stmts[:-1]):
            p = Seq(s, p)
        return p

    def choice(self) -> Prog:
        p = self.statement()
        while self.at("+"):
            self.next()
            p = Choice(p, self.statement())
        return p

    def statement(self) -> Prog:
        kind, value, pos = self.peek()
        if self.at("skip"):
            self.next()
            return Empty()
        if self.at("while"):
            self.next()
            guard = self.bool_expr()
            inv = None
            if self.at("invariant"):
                self.next()
                inv = canon(self.assertion())
            self.expect("do")
            body = self.statement()
            return While(guard, body, inv)
        if self.at("if"):
            self.next()
            cond = self.bool_expr()
            self.expect("then")
            then = self.statement()
            self.expect("else")
            orelse = self.statement()
            return IfSugar(cond, then, orelse)
        if self.at("{"):
            self.next()
            p = self.program()
            self.expect("}")
            return p
        if self.at("("):
            self.next()
            p = self.program()
            self.expect(")")
            return p
        if kind == "ident":
            self.next()
            self.expect(":=")
            return Assign(value, self.expr(assign_rhs=True))
        raise self.fail("expected statement")

    def done(self) -> None:
        kind, got, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"trailing input starting at {got!r}", pos, self.text)


def _desugar_if(p: Prog, avoid: set[str]) -> Prog:
    """Compile conditionals bottom-up; each gets its own fresh flag drawn
    against the whole program's variables plus flags already used."""
    if isinstance(p, (Empty, Assign)):
        return p
    if isinstance(p, Seq):
        return Seq(_desugar_if(p.first, avoid), _desugar_if(p.second, avoid))
    if isinstance(p, While):
        return While(p.guard, _desugar_if(p.body, avoid), p.invariant)
    if isinstance(p, Choice):
        return Choice(_desugar_if(p.left, avoid), _desugar_if(p.right, avoid))
    if isinstance(p, IfSugar):
        then = _desugar_if(p.then, avoid)
        orelse = _desugar_if(p.orelse, avoid)
        t = fresh_var(avoid, "t")
        avoid.add(t)
        t_unset = Eq(Var(t), Const(0))
        set_t = Assign(t, Const(1))
        return Seq(
            Assign(t, Const(0)),
            Seq(
                While(BAnd(p.cond, t_unset), Seq(then, set_t)),
                While(BAnd(BNot(p.cond), t_unset), Seq(orelse, set_t)),
            ),
        )
    raise TypeError(f"not a program: {p!r}")


def parse_program(text: str) -> Prog:
    """Parse program text to normal form (conditionals compiled away,
    sequencing right-associated, skips dropped)."""
    parser = _Parser(text)
    p = parser.program()
    parser.done()
    p = _desugar_if(p, set(prog_vars(p)))
    return normalize_program(p)


def parse_assertion(text: str) -> Assertion:
    parser = _Parser(text)
    a = parser.assertion()
    parser.done()
    return canon(alpha_rename(a))


def parse_bool_expr(text: str) -> BoolExpr:
    parser = _Parser(text)
    b = parser.bool_expr()
    parser.done()
    return b


# --- printing ------------------------------------------------------------

_EXPR_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "%": 2}

_IMP, _OR, _AND = 1, 2, 3


def print_expr(e: Expr, parent: int = 0) -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, BinOp):
        prec = _EXPR_PREC[e.op]
        s = f"{print_expr(e.left, prec)} {e.op} {print_expr(e.right, prec + 1)}"
        return f"({s})" if prec < parent else s
    raise TypeError(f"not an expression: {e!r}")


def print_bool(b: BoolExpr, parent: int = 0) -> str:
    if b == TRUE_BOOL:
        return "true"
    if b == FALSE_BOOL:
        return "false"
    if isinstance(b, Eq):
        return f"{print_expr(b.left)} = {print_expr(b.right)}"
    if isinstance(b, Le):
        return f"{print_expr(b.left)} <= {print_expr(b.right)}"
    if isinstance(b, BNot):
        if isinstance(b.arg, Eq):
            return f"{print_expr(b.arg.left)} != {print_expr(b.arg.right)}"
        if isinstance(b.arg, Le):
            # !(a <= b) is b < a; < is the more common guard, keep it stable
            return f"{print_expr(b.arg.right)} < {print_expr(b.arg.left)}"
        return f"!({print_bool(b.arg)})"
    if isinstance(b, BAnd):
        s = f"{print_bool(b.left, _AND)} && {print_bool(b.right, _AND + 1)}"
        return f"({s})" if _AND < parent else s
    if isinstance(b, BOr):
        s = f"{print_bool(b.left, _OR)} || {print_bool(b.right, _OR + 1)}"
        return f"({s})" if _OR < parent else s
    raise TypeError(f"not a boolean expression: {b!r}")


def print_assertion(a: Assertion, parent: int = 0) -> str:
    if isinstance(a, Bool):
        return print_bool(a.expr, parent)
    if isinstance(a, Not):
        return f"!({print_assertion(a.arg)})"
    if isinstance(a, And):
        s = f"{print_assertion(a.left, _AND)} && {print_assertion(a.right, _AND + 1)}"
        return f"({s})" if _AND < parent else s
    if isinstance(a, Or):
        s = f"{print_assertion(a.left, _OR)} || {print_assertion(a.right, _OR + 1)}"
        return f"({s})" if _OR < parent else s
    if isinstance(a, Implies):
        s = f"{print_assertion(a.left, _IMP + 1)} -> {print_assertion(a.right, _IMP)}"
        return f"({s})" if _IMP < parent else s
    if isinstance(a, (Exists, Forall)):
        kw = "exists" if isinstance(a, Exists) else "forall"
        s = f"{kw} {a.var}. {print_assertion(a.body)}"
        return f"({s})" if parent > 0 else s
    raise TypeError(f"not an assertion: {a!r}")


def print_program(p: Prog) -> str:
    if isinstance(p, Empty):
        return "skip"
    if isinstance(p, Assign):
        return f"{p.name} := {print_expr(p.expr)}"
    if isinstance(p, Seq):
        return f"{print_program(p.first)}; {print_program(p.second)}"
    if isinstance(p, While):
        inv = f" invariant {print_assertion(p.invariant)}" if p.invariant is not None else ""
        return f"while {print_bool(p.guard)}{inv} do {{ {print_program(p.body)} }}"
    if isinstance(p, Choice):
        # ';' binds looser than '+', so sequence arms need their own parens
        left = print_program(p.left)
        right = print_program(p.right)
        if isinstance(p.left, Seq):
            left = f"({left})"
        if isinstance(p.right, Seq):
            right = f"({right})"
        return f"({left} + {right})"
    raise TypeError(f"not a printable program: {p!r}")
