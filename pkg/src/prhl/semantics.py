"""Small-step operational semantics over natural-number stores, bounded
exhaustive run exploration, and semantic triple checking.

Stores are total maps from variable names to naturals, represented
extensionally: a variable absent from the store is zero, so two stores
that agree on all variables are equal objects.  Arithmetic is totalised:
subtraction truncates at zero, division by zero yields zero, and modulo
by zero returns the dividend.

A configuration is a (program, store) pair; ``step`` lists its immediate
successors in a fixed order (the left branch of a choice first).  All
exploration is breadth-first over configurations with dedup, so the
reported distance of a final store is the minimal run length reaching it.
Validity questions are decided by enumerating initial stores over the
variables that occur in the triple, each component in 0..domain_max;
intermediate values may grow past domain_max.  Verdicts are therefore
relative to the bounds, and a verdict degrades to Unknown whenever the
step budget cut exploration or a quantifier bound could hide or fake a
counterexample.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from .syntax import (
    Assertion,
    Assign,
    BAnd,
    BinOp,
    BNot,
    BOr,
    BoolExpr,
    Choice,
    Const,
    Empty,
    Eq,
    Le,
    Prog,
    Seq,
    Var,
    While,
    free_vars,
    prog_vars,
    seq_of,
)


# --- stores ---------------------------------------------------------------


class State:
    """Immutable total store; only nonzero entries are kept, so equality
    and hashing are extensional."""

    __slots__ = ("_items",)

    def __init__(self, mapping: Mapping[str, int] | None = None, **vals: int):
        items = dict(mapping) if mapping else {}
        items.update(vals)
        for k, v in items.items():
            if not isinstance(v, int) or isinstance(v, bool) or v < 0:
                raise ValueError(f"store values are naturals, got {k}={v!r}")
        self._items = tuple(sorted((k, v) for k, v in items.items() if v != 0))

    def get(self, name: str) -> int:
        for k, v in self._items:
            if k == name:
                return v
        return 0

    def set(self, name: str, value: int) -> "State":
        items = dict(self._items)
        items[name] = value
        return State(items)

    def as_dict(self) -> dict[str, int]:
        return dict(self._items)

    def sort_key(self) -> tuple:
        return self._items

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self._items == other._items

    def __hash__(self) -> int:
        return hash(self._items)

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in self._items)
        return "{" + inner + "}"


def format_state(s: State, names: Iterable[str]) -> str:
    """Render a store over the given variables (zeros included)."""
    shown = sorted(set(names) | set(s.as_dict()))
    return "{" + ", ".join(f"{k}: {s.get(k)}" for k in shown) + "}"


# --- expression evaluation -------------------------------------------------


def eval_expr(e, s: State) -> int:
    if isinstance(e, Var):
        return s.get(e.name)
    if isinstance(e, Const):
        return e.value
    if isinstance(e, BinOp):
        l = eval_expr(e.left, s)
        r = eval_expr(e.right, s)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r if l >= r else 0
        if e.op == "*":
            return l * r
        if e.op == "/":
            return l // r if r != 0 else 0
        if e.op == "%":
            return l % r if r != 0 else l
        raise ValueError(f"unknown operator {e.op!r}")
    raise TypeError(f"not an expression: {e!r}")


def eval_bool(b: BoolExpr, s: State) -> bool:
    if isinstance(b, Eq):
        return eval_expr(b.left, s) == eval_expr(b.right, s)
    if isinstance(b, Le):
        return eval_expr(b.left, s) <= eval_expr(b.right, s)
    if isinstance(b, BNot):
        return not eval_bool(b.arg, s)
    if isinstance(b, BAnd):
        return eval_bool(b.left, s) and eval_bool(b.right, s)
    if isinstance(b, BOr):
        return eval_bool(b.left, s) or eval_bool(b.right, s)
    raise TypeError(f"not a boolean expression: {b!r}")


# --- small-step relation ----------------------------------------------------

Config = tuple[Prog, State]


def step(config: Config) -> list[Config]:
    """Immediate successors, in deterministic order.  The terminated
    configuration (skip) has none; a choice has two."""
    p, s = config
    if isinstance(p, Empty):
        return []
    if isinstance(p, Assign):
        return [(Empty(), s.set(p.name, eval_expr(p.expr, s)))]
    if isinstance(p, While):
        if eval_bool(p.guard, s):
            return [(seq_of(p.body, p), s)]
        return [(Empty(), s)]
    if isinstance(p, Seq):
        if isinstance(p.first, Empty):
            # raw ε;C nodes (never produced by seq_of) unwrap in one step
            return [(p.second, s)]
        return [(seq_of(h, p.second), s2) for h, s2 in step((p.first, s))]
    if isinstance(p, Choice):
        return [(p.left, s), (p.right, s)]
    raise TypeError(f"not a program: {p!r}")


@dataclass(frozen=True)
class RunResult:
    """Final stores with their minimal run lengths.

    ``truncated`` is set when some run was not followed to termination:
    either the step budget ran out with work remaining (``exhausted``) or
    a configuration repeated, i.e. an infinite run exists.  ``finals`` is
    exact unless ``exhausted`` is set.  Exploration that outgrows the
    work cap or computes a store value wider than ``VALUE_BIT_CAP`` also
    reports ``exhausted``.
    """

    finals: dict[State, int]
    truncated: bool
    exhausted: bool


# a store value wider than this is cut off rather than carried further;
# repeated multiplication otherwise grows values doubly exponentially and a
# single arbitrary-precision product can dwarf the whole step budget
VALUE_BIT_CAP = 512


def run_all(p: Prog, s: State, step_bound: int) -> RunResult:
    finals: dict[State, int] = {}
    visited: set[Config] = {(p, s)}
    frontier: list[Config] = [(p, s)]
    cycle = False
    overflow = False
    depth = 0
    # depth alone cannot bound work: a value-diverging choice under a live
    # guard doubles the frontier every level, so total visited configurations
    # are capped as well; tripping either cap reports exhausted, like depth
    work_cap = 8 * step_bound + 16384
    if isinstance(p, Empty):
        return RunResult({s: 0}, False, False)
    while frontier and depth < step_bound:
        depth += 1
        nxt: list[Config] = []
        for cfg in frontier:
            for succ in step(cfg):
                if succ in visited:
                    cycle = True
                    continue
                q, s2 = succ
                if any(v.bit_length() > VALUE_BIT_CAP for _, v in s2._items):
                    overflow = True
                    continue
                if len(visited) >= work_cap:
                    return RunResult(finals, True, True)
                visited.add(succ)
                if isinstance(q, Empty):
                    finals.setdefault(s2, depth)
                else:
                    nxt.append(succ)
        frontier = nxt
    exhausted = bool(frontier) or overflow
    return RunResult(finals, exhausted or cycle, exhausted)


# --- bounds, verdicts, enumeration ------------------------------------------


@dataclass(frozen=True)
class Bounds:
    domain_max: int = 8
    step_bound: int = 10000
    quant_bound: int = 16


@dataclass(frozen=True)
class Verdict:
    """Outcome of a bounded semantic question.

    kind is one of valid / invalid / unknown.  Invalid carries a witness:
    a single store or an (initial, final) pair depending on the question.
    Unknown carries a reason, step-budget-exhausted or quantifier-bounded.
    flags records quantifier bounds that were hit on the way to a valid
    answer (the answer is then bound-relative).
    """

    kind: str
    witness: object = None
    reason: str | None = None
    flags: tuple[str, ...] = ()

    @property
    def is_valid(self) -> bool:
        return self.kind == "valid"

    @property
    def is_invalid(self) -> bool:
        return self.kind == "invalid"

    @property
    def is_unknown(self) -> bool:
        return self.kind == "unknown"


def enumerate_states(names: Iterable[str], domain_max: int) -> Iterator[State]:
    """All stores over the given variables with values 0..domain_max, in
    lexicographic order of the name-sorted value tuple."""
    order = sorted(set(names))
    for values in itertools.product(range(domain_max + 1), repeat=len(order)):
        yield State(dict(zip(order, values)))


def relevant_vars(pre: Assertion, prog: Prog, post: Assertion) -> list[str]:
    return sorted(free_vars(pre) | free_vars(post) | prog_vars(prog))


# --- semantic transformers ---------------------------------------------------

StatePred = Callable[[State], bool]


@dataclass(frozen=True)
class TransformerResult:
    states: frozenset[State]
    truncated: bool


def transformer_set(
    kind: str,
    prog: Prog,
    pred: StatePred,
    bounds: Bounds,
    extra_vars: Iterable[str] = (),
) -> TransformerResult:
    """Enumerate one of the four semantic transformers over the bounded
    store space.

    wp / wpr : stores with some terminating run into the predicate
    wlp      : stores all of whose terminating runs land in the predicate
    sp       : final stores of some run from a predicate store
    slp      : final stores all of whose sources satisfy the predicate

    The enumeration ranges over the program's variables plus extra_vars;
    for sp/slp both sources and results are drawn from that space.
    """
    names = sorted(prog_vars(prog) | set(extra_vars))
    box = list(enumerate_states(names, bounds.domain_max))
    runs = {s: run_all(prog, s, bounds.step_bound) for s in box}
    truncated = any(r.exhausted for r in runs.values())
    out: set[State] = set()
    if kind in ("wp", "wpr"):
        out = {s for s, r in runs.items() if any(pred(f) for f in r.finals)}
    elif kind == "wlp":
        out = {s for s, r in runs.items() if all(pred(f) for f in r.finals)}
    elif kind == "sp":
        for s, r in runs.items():
            if pred(s):
                out.update(r.finals)
    elif kind == "slp":
        finals_all: set[State] = set()
        sources: dict[State, list[State]] = {}
        for s, r in runs.items():
            for f in r.finals:
                finals_all.add(f)
                sources.setdefault(f, []).append(s)
        out = {f for f in finals_all if all(pred(s) for s in sources[f])}
    else:
        raise ValueError(f"unknown transformer {kind!r}")
    return TransformerResult(frozenset(out), truncated)


# --- triple checking ----------------------------------------------------------

LOGICS = ("partial-reverse", "total-hoare", "partial-hoare", "incorrectness")


@dataclass
class _Explored:
    pre_true: bool
    pre_flags: bool
    finals: dict[State, int]
    exhausted: bool


def _explore(pre: Assertion, prog: Prog, post: Assertion, bounds: Bounds):
    # imported here: assertions builds on this module
    from .assertions import eval_assertion

    names = relevant_vars(pre, prog, post)
    post_cache: dict[State, tuple[bool, bool]] = {}

    def eval_post(s: State) -> tuple[bool, bool]:
        if s not in post_cache:
            v, fl = eval_assertion(post, s, bounds.quant_bound)
            post_cache[s] = (v, bool(fl))
        return post_cache[s]

    rows: list[tuple[State, _Explored]] = []
    for s0 in enumerate_states(names, bounds.domain_max):
        pv, pfl = eval_assertion(pre, s0, bounds.quant_bound)
        r = run_all(prog, s0, bounds.step_bound)
        rows.append((s0, _Explored(pv, bool(pfl), r.finals, r.exhausted)))
    return rows, eval_post, names


def check_triple(
    logic: str, pre: Assertion, prog: Prog, post: Assertion, bounds: Bounds
) -> Verdict:
    """Decide a triple semantically, up to the bounds.

    partial-reverse : every store with a terminating run into the post
                      satisfies the pre (counterexample: a run pair)
    total-hoare     : every pre store has some terminating run into the post
    partial-hoare   : every terminating run from a pre store lands in the post
    incorrectness   : every post store is reachable from some pre store

    A counterexample is reported at minimal run length, ties broken by
    initial then final store order.  Witnesses whose assertion evaluation
    hit a quantifier bound are never reported as Invalid; they degrade the
    verdict to Unknown instead.
    """
    if logic not in LOGICS:
        raise ValueError(f"unknown logic {logic!r}")
    rows, eval_post, names = _explore(pre, prog, post, bounds)

    clean: list[tuple] = []  # sortable (depth/ord, tiebreaks, witness)
    budget_risk = False  # exploration cut where a counterexample could hide
    quant_risk = False  # quantifier bound touched a potential counterexample

    if logic == "partial-reverse":
        # counterexample: run s0 ->* f with f in post and s0 not in pre
        for idx, (s0, e) in enumerate(rows):
            if e.pre_true and not e.pre_flags:
                continue  # s0 certainly satisfies the pre; cannot witness
            if e.exhausted:
                budget_risk = True
            for f, depth in e.finals.items():
                fv, ffl = eval_post(f)
                if not fv and not ffl:
                    continue
                if not e.pre_true and not e.pre_flags and fv and not ffl:
                    clean.append((depth, idx, f.sort_key(), (s0, f)))
                else:
                    quant_risk = True
    elif logic == "partial-hoare":
        # counterexample: run s0 ->* f with s0 in pre and f not in post
        for idx, (s0, e) in enumerate(rows):
            if not e.pre_true and not e.pre_flags:
                continue  # s0 certainly outside the pre
            if e.exhausted:
                budget_risk = True
            for f, depth in e.finals.items():
                fv, ffl = eval_post(f)
                if fv and not ffl:
                    continue
                if e.pre_true and not e.pre_flags and not fv and not ffl:
                    clean.append((depth, idx, f.sort_key(), (s0, f)))
                else:
                    quant_risk = True
    elif logic == "total-hoare":
        # counterexample: s0 in pre with no terminating run into post
        for idx, (s0, e) in enumerate(rows):
            if not e.pre_true and not e.pre_flags:
                continue
            finals = [eval_post(f) for f in e.finals]
            if any(v and not fl for v, fl in finals):
                continue  # certainly has a run into the post
            if e.exhausted:
                budget_risk = True
            elif e.pre_true and not e.pre_flags and not any(v or fl for v, fl in finals):
                clean.append((idx, (), (), s0))
            else:
                quant_risk = True
    elif logic == "incorrectness":
        # counterexample: a post store (in the box) no pre store reaches
        reach_cert: set[State] = set()
        reach_poss: set[State] = set()
        poss_exhausted = False
        for s0, e in rows:
            if e.pre_true and not e.pre_flags:
                reach_cert.update(e.finals)
            if e.pre_true or e.pre_flags:
                reach_poss.update(e.finals)
                if e.exhausted:
                    poss_exhausted = True
        for idx, f in enumerate(enumerate_states(names, bounds.domain_max)):
            fv, ffl = eval_post(f)
            if not fv and not ffl:
                continue
            if f in reach_cert:
                continue
            if poss_exhausted:
                budget_risk = True
            elif fv and not ffl and f not in reach_poss:
                clean.append((idx, (), (), f))
            else:
                quant_risk = True

    if clean:
        clean.sort(key=lambda t: t[:3])
        return Verdict("invalid", witness=clean[0][3])
    if budget_risk:
        return Verdict("unknown", reason="step-budget-exhausted")
    if quant_risk:
        return Verdict("unknown", reason="quantifier-bounded")
    return Verdict("valid")
