"""Condition mini-language: termination conditions as evaluable boolean expressions.

Grammar (EBNF):
    expr  := or
    or    := and {"or" and}
    and   := unary {"and" unary}
    unary := "not" unary | "(" expr ")" | atom
    atom  := func cmpop number | "stopped(" id ")" | "collided(" id "," id ")"
    func  := ("speed"|"lane"|"long"|"lat") "(" id ")" | "gap(" id "," id ")" | "elapsed"
    cmpop := "<" | "<=" | ">" | ">=" | "==" | "!="
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import ScriptSyntaxError

STOPPED_SPEED_MPS = 0.1

_UNARY_FUNCS = ("speed", "lane", "long", "lat")
_CMP_OPS = ("<=", ">=", "==", "!=", "<", ">")


# --- AST nodes ---------------------------------------------------------------

@dataclass(frozen=True)
class FuncRef:
    """A numeric quantity: speed(a), lane(a), long(a), lat(a), gap(a,b) or elapsed."""

    name: str
    args: tuple = ()

    def render(self):
        if self.name == "elapsed":
            return "elapsed"
        return f"{self.name}({', '.join(self.args)})"


@dataclass(frozen=True)
class Cmp:
    func: FuncRef
    op: str
    value: float

    def render(self):
        return f"{self.func.render()} {self.op} {format_number(self.value)}"


@dataclass(frozen=True)
class Stopped:
    actor: str

    def render(self):
        return f"stopped({self.actor})"


@dataclass(frozen=True)
class Collided:
    actor_a: str
    actor_b: str

    def render(self):
        return f"collided({self.actor_a}, {self.actor_b})"


@dataclass(frozen=True)
class Not:
    child: "ConditionExpr"

    def render(self):
        return f"not ({self.child.render()})"


@dataclass(frozen=True)
class And:
    children: tuple

    def render(self):
        return " and ".join(_wrap(c) for c in self.children)


@dataclass(frozen=True)
class Or:
    children: tuple

    def render(self):
        return " or ".join(_wrap(c) for c in self.children)


ConditionExpr = object  # any of the node classes above


def _wrap(node):
    if isinstance(node, (And, Or)):
        return f"({node.render()})"
    return node.render()


def format_number(x):
    if float(x) == int(x):
        return str(int(x))
    return repr(float(x))


def serialize_condition(expr) -> str:
    return expr.render()


def actor_refs(expr):
    """All actor names referenced anywhere in the expression."""
    if isinstance(expr, Cmp):
        return set(expr.func.args)
    if isinstance(expr, Stopped):
        return {expr.actor}
    if isinstance(expr, Collided):
        return {expr.actor_a, expr.actor_b}
    if isinstance(expr, Not):
        return actor_refs(expr.child)
    if isinstance(expr, (And, Or)):
        out = set()
        for c in expr.children:
            out |= actor_refs(c)
        return out
    raise TypeError(f"not a condition node: {expr!r}")


# --- Tokenizer / parser -------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><=|>=|==|!=|<|>)|(?P<punct>[(),]))"
)


@dataclass
class _Tokens:
    source: str
    pos: int = 0
    items: list = field(default_factory=list)

    def __post_init__(self):
        pos = 0
        while pos < len(self.source):
            m = _TOKEN_RE.match(self.source, pos)
            if m is None or m.end() == pos:
                rest = self.source[pos:].lstrip()
                if not rest:
                    break
                raise ScriptSyntaxError(
                    f"unexpected character {rest[0]!r} in condition", column=pos + 1
                )
            pos = m.end()
            kind = m.lastgroup
            self.items.append((kind, m.group(kind), m.start(kind)))

    def peek(self):
        return self.items[self.pos] if self.pos < len(self.items) else (None, None, len(self.source))

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, kind, value=None):
        k, v, col = self.next()
        if k != kind or (value is not None and v != value):
            want = value if value is not None else kind
            raise ScriptSyntaxError(f"expected {want!r}, got {v!r}", column=col + 1)
        return v


def parse_condition(source: str):
    """Parse condition text into an AST. Raises ScriptSyntaxError on bad input."""
    toks = _Tokens(source)
    expr = _parse_or(toks)
    k, v, col = toks.peek()
    if k is not None:
        raise ScriptSyntaxError(f"trailing input {v!r} in condition", column=col + 1)
    return expr


def _parse_or(toks):
    children = [_parse_and(toks)]
    while toks.peek()[:2] == ("id", "or"):
        toks.next()
        children.append(_parse_and(toks))
    return children[0] if len(children) == 1 else Or(tuple(children))


def _parse_and(toks):
    children = [_parse_unary(toks)]
    while toks.peek()[:2] == ("id", "and"):
        toks.next()
        children.append(_parse_unary(toks))
    return children[0] if len(children) == 1 else And(tuple(children))


def _parse_unary(toks):
    kind, value, col = toks.peek()
    if (kind, value) == ("id", "not"):
        toks.next()
        return Not(_parse_unary(toks))
    if (kind, value) == ("punct", "("):
        toks.next()
        inner = _parse_or(toks)
        toks.expect("punct", ")")
        return inner
    return _parse_atom(toks)


def _parse_atom(toks):
    kind, value, col = toks.next()
    if kind != "id":
        raise ScriptSyntaxError(f"expected an atom, got {value!r}", column=col + 1)
    if value == "stopped":
        toks.expect("punct", "(")
        actor = toks.expect("id")
        toks.expect("punct", ")")
        return Stopped(actor)
    if value == "collided":
        toks.expect("punct", "(")
        a = toks.expect("id")
        toks.expect("punct", ",")
        b = toks.expect("id")
        toks.expect("punct", ")")
        return Collided(a, b)
    func = _parse_func(toks, value, col)
    op_kind, op, op_col = toks.next()
    if op_kind != "op":
        raise ScriptSyntaxError(f"expected comparison operator, got {op!r}", column=op_col + 1)
    num_kind, num, num_col = toks.next()
    if num_kind != "num":
        raise ScriptSyntaxError(f"expected number, got {num!r}", column=num_col + 1)
    return Cmp(func, op, float(num))


def _parse_func(toks, name, col):
    if name == "elapsed":
        return FuncRef("elapsed")
    if name in _UNARY_FUNCS:
        toks.expect("punct", "(")
        actor = toks.expect("id")
        toks.expect("punct", ")")
        return FuncRef(name, (actor,))
    if name == "gap":
        toks.expect("punct", "(")
        a = toks.expect("id")
        toks.expect("punct", ",")
        b = toks.expect("id")
        toks.expect("punct", ")")
        return FuncRef("gap", (a, b))
    raise ScriptSyntaxError(f"unknown function {name!r} in condition", column=col + 1)


# --- Evaluation ---------------------------------------------------------------

@dataclass(frozen=True)
class StepClock:
    """Seconds since the current step became active."""

    elapsed: float


_CMP_FN = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


def eval_condition(expr, view, clock, warnings=None):
    """Evaluate an expression against a view (see CondView protocol in world.py).

    An atom mentioning an actor missing from the view evaluates to False; the
    miss is appended to `warnings` when a list is supplied (finished/despawned
    actors must not deadlock other actors' termination checks).
    """
    if isinstance(expr, Cmp):
        value = _eval_func(expr.func, view, clock, warnings)
        if value is None:
            return False
        return _CMP_FN[expr.op](value, expr.value)
    if isinstance(expr, Stopped):
        if not view.has_actor(expr.actor):
            _warn(warnings, expr.actor)
            return False
        return view.speed(expr.actor) < STOPPED_SPEED_MPS
    if isinstance(expr, Collided):
        return view.has_collided(expr.actor_a, expr.actor_b)
    if isinstance(expr, Not):
        return not eval_condition(expr.child, view, clock, warnings)
    if isinstance(expr, And):
        return all(eval_condition(c, view, clock, warnings) for c in expr.children)
    if isinstance(expr, Or):
        return any(eval_condition(c, view, clock, warnings) for c in expr.children)
    raise TypeError(f"not a condition node: {expr!r}")


def _eval_func(func, view, clock, warnings):
    if func.name == "elapsed":
        return clock.elapsed
    if func.name == "gap":
        a, b = func.args
        for name in (a, b):
            if not view.has_actor(name):
                _warn(warnings, name)
                return None
        return abs(view.longitudinal(a) - view.longitudinal(b))
    (actor,) = func.args
    if not view.has_actor(actor):
        _warn(warnings, actor)
        return None
    if func.name == "speed":
        return view.speed(actor)
    if func.name == "lane":
        return view.lane(actor)
    if func.name == "long":
        return view.longitudinal(actor)
    if func.name == "lat":
        return view.lateral(actor)
    raise ValueError(f"unknown function {func.name!r}")


def _warn(warnings, actor):
    if warnings is not None:
        warnings.append(f"missing actor {actor!r} in condition; atom treated as false")
