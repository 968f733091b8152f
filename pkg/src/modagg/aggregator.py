"""Candidate aggregation functions ``F: [0, inf]^n -> [0, inf]``.

Two kinds: registry builtins (:func:`builtin`) and expressions in a small
DSL (:func:`parse`)::

    expr   := term ('+' term)*
    term   := factor ('*' factor)*
    factor := NUMBER | 'inf' | 'x' INT | ('max' | 'min') '(' expr (',' expr)* ')'
            | '(' expr ')'

NUMBER is an integer, a fraction ``p/q`` or a decimal, all read exactly.
The DSL only has operations that stay exact on rationals; every term in it is
isotone because the constants are nonnegative.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Sequence

from .extreal import INF, ZERO, ExtReal, coerce, parse_extreal

__all__ = [
    "Aggregator",
    "Builtin",
    "ExprAggregator",
    "CallableAggregator",
    "Const",
    "Var",
    "Add",
    "Mul",
    "Max",
    "Min",
    "ParseError",
    "SpecError",
    "parse",
    "parse_expr",
    "builtin",
    "from_spec",
    "BUILTINS",
]


class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


class SpecError(ValueError):
    pass


# -- AST ---------------------------------------------------------------------


class Node:
    def evaluate(self, xs: Sequence[ExtReal]) -> ExtReal:
        raise NotImplementedError

    def max_var(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Node):
    value: ExtReal

    def evaluate(self, xs):
        return self.value

    def max_var(self):
        return 0

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(Node):
    index: int  # 1-based

    def evaluate(self, xs):
        return xs[self.index - 1]

    def max_var(self):
        return self.index

    def __str__(self):
        return f"x{self.index}"


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node

    def evaluate(self, xs):
        return self.left.evaluate(xs) + self.right.evaluate(xs)

    def max_var(self):
        return max(self.left.max_var(), self.right.max_var())

    def __str__(self):
        return f"{self.left} + {self.right}"


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node

    def evaluate(self, xs):
        return self.left.evaluate(xs) * self.right.evaluate(xs)

    def max_var(self):
        return max(self.left.max_var(), self.right.max_var())

    def __str__(self):
        return f"{_factor_str(self.left)}*{_factor_str(self.right)}"


def _factor_str(node: Node) -> str:
    return f"({node})" if isinstance(node, Add) else str(node)


@dataclass(frozen=True)
class Max(Node):
    args: tuple[Node, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("max needs at least one argument")

    def evaluate(self, xs):
        best = self.args[0].evaluate(xs)
        for a in self.args[1:]:
            v = a.evaluate(xs)
            if v > best:
                best = v
        return best

    def max_var(self):
        return max(a.max_var() for a in self.args)

    def __str__(self):
        return "max(" + ", ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Min(Node):
    args: tuple[Node, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("min needs at least one argument")

    def evaluate(self, xs):
        best = self.args[0].evaluate(xs)
        for a in self.args[1:]:
            v = a.evaluate(xs)
            if v < best:
                best = v
        return best

    def max_var(self):
        return max(a.max_var() for a in self.args)

    def __str__(self):
        return "min(" + ", ".join(map(str, self.args)) + ")"


# -- parser ------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+/\d+|\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[+*(),]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastgroup)
        out.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, arity: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.arity = arity

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, text, pos = self.take()
        if text != value or kind != "op":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", pos)

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[:2] == ("op", "+"):
            self.take()
            node = Add(node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> Node:
        kind, text, pos = self.take()
        if kind == "num":
            try:
                return Const(parse_extreal(text))
            except ValueError as exc:
                raise ParseError(str(exc), pos) from None
        if kind == "name":
            low = text.lower()
            if low == "inf":
                return Const(INF)
            if low in ("max", "min"):
                self.expect("(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.take()
                    args.append(self.expr())
                self.expect(")")
                return (Max if low == "max" else Min)(tuple(args))
            m = re.fullmatch(r"x(\d+)", text)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.arity:
                    raise ParseError(f"variable {text} is outside x1..x{self.arity}", pos)
                return Var(idx)
            raise ParseError(f"unknown name {text!r}", pos)
        if kind == "op" and text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", pos)


def parse_expr(text: str, arity: int) -> Node:
    if arity < 1:
        raise ValueError("arity must be at least 1")
    p = _Parser(text, arity)
    node = p.expr()
    kind, tok, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {tok!r}", pos)
    return node


# -- aggregators -------------------------------------------------------------


class Aggregator:
    """A function ``[0, inf]^arity -> [0, inf]``."""

    arity: int

    def evaluate(self, xs: Sequence[ExtReal]) -> ExtReal:
        raise NotImplementedError

    def __call__(self, xs: Sequence) -> ExtReal:
        if len(xs) != self.arity:
            raise ValueError(f"expected {self.arity} arguments, got {len(xs)}")
        return self.evaluate([coerce(x) for x in xs])

    @property
    def spec(self) -> str:
        raise NotImplementedError

    def exact_facts(self) -> dict[str, str]:
        """Properties known in closed form, mapped to a short justification."""
        return {}

    def notes(self) -> list[str]:
        return []

    def __repr__(self):
        return f"<{type(self).__name__} {self.spec} arity={self.arity}>"


class ExprAggregator(Aggregator):
    def __init__(self, expr: Node, arity: int):
        if expr.max_var() > arity:
            raise ValueError(f"expression uses x{expr.max_var()} but arity is {arity}")
        self.expr = expr
        self.arity = arity

    def evaluate(self, xs):
        return self.expr.evaluate(xs)

    @property
    def spec(self):
        return f"expr:{self.expr}"

    def __eq__(self, other):
        return isinstance(other, ExprAggregator) and (self.expr, self.arity) == (other.expr, other.arity)

    def __hash__(self):
        return hash((self.expr, self.arity))


class CallableAggregator(Aggregator):
    """Wrap a Python function; nothing is assumed about its properties."""

    def __init__(self, fn: Callable[[Sequence[ExtReal]], object], arity: int, name: str = "fn"):
        self.fn = fn
        self.arity = arity
        self.name = name

    def evaluate(self, xs):
        return coerce(self.fn(xs))

    @property
    def spec(self):
        return f"callable:{self.name}"


def _sum(xs):
    return reduce(lambda a, b: a + b, xs, ZERO)


_ISOTONE = "isotone"
_SUBADD = "subadditive"
_KER = "kernel_exact"
_KSOME = "kernel_some"


class Builtin(Aggregator):
    """A registry member; see :data:`BUILTINS` for the families."""

    def __init__(self, name: str, arity: int, params: tuple = ()):
        self.name = name
        self.arity = arity
        self.params = params
        if name == "sum":
            self._f = _sum
        elif name == "wsum":
            self._f = lambda xs: _sum([k * x for k, x in zip(params, xs)])
        elif name == "sup":
            self._f = lambda xs: max((k * x for k, x in zip(params, xs)), default=ZERO)
        elif name == "proj":
            j = params[0]
            self._f = lambda xs: xs[j - 1]
        elif name == "const_jump":
            k = params[0]
            self._f = lambda xs: k if any(not x.is_zero() for x in xs) else ZERO
        elif name == "zero":
            self._f = lambda xs: ZERO
        else:
            raise SpecError(f"unknown builtin {name!r}")

    def evaluate(self, xs):
        return self._f(xs)

    @property
    def spec(self):
        if self.name in ("wsum", "sup"):
            return f"builtin:{self.name}:" + ",".join(map(str, self.params))
        if self.name in ("proj", "const_jump"):
            return f"builtin:{self.name}:{self.params[0]}"
        return f"builtin:{self.name}"

    def __eq__(self, other):
        return isinstance(other, Builtin) and (self.name, self.arity, self.params) == (
            other.name, other.arity, other.params)

    def __hash__(self):
        return hash((self.name, self.arity, self.params))

    def exact_facts(self):
        facts = {
            "zero": "F(0,...,0) = 0 by definition",
            _ISOTONE: "composition of isotone maps",
        }
        name, n = self.name, self.arity
        if name == "sum":
            facts[_SUBADD] = "additive: F(x+y) = F(x) + F(y)"
            facts[_KER] = "a sum of nonnegative terms vanishes only at 0"
            facts[_KSOME] = facts[_KER]
        elif name == "wsum":
            facts[_SUBADD] = "additive: k*(x+y) = k*x + k*y for every weight"
            facts[_KER] = "every weight is positive"
            facts[_KSOME] = facts[_KER]
        elif name == "sup":
            facts[_SUBADD] = "max of k*(x+y) <= max of k*x + max of k*y"
            facts[_KER] = "every weight is positive"
            facts[_KSOME] = facts[_KER]
        elif name == "proj":
            facts[_SUBADD] = "additive in the selected coordinate"
            facts[_KSOME] = "F(a) = a_j, so F(a) = 0 forces a_j = 0"
            if n == 1:
                facts[_KER] = "identity map"
        elif name == "const_jump":
            facts[_SUBADD] = "F(x+y) <= k <= F(x) + F(y) unless x + y = 0"
            if self.params[0] > ZERO:
                facts[_KER] = "F(a) = k > 0 for every a != 0"
                facts[_KSOME] = facts[_KER]
        elif name == "zero":
            facts[_SUBADD] = "0 <= 0 + 0"
        return facts

    def notes(self):
        if self.name in ("wsum", "sup") and any(k.is_inf for k in self.params):
            return ["infinite weight admitted (inf * 0 = 0 convention)"]
        return []


BUILTINS = {
    "sum": "x1 + ... + xn",
    "wsum": "k1*x1 + ... + kn*xn, weights in (0, inf]",
    "sup": "max(k1*x1, ..., kn*xn), weights in (0, inf]",
    "proj": "x_j",
    "const_jump": "0 at the origin, k elsewhere (k in [0, inf])",
    "zero": "identically 0",
}


def builtin(name: str, *params, arity: int | None = None) -> Builtin:
    """Construct a registry member, e.g. ``builtin("proj", 1, arity=2)``.

    ``wsum`` and ``sup`` take one weight per coordinate and infer the arity.
    """
    if name not in BUILTINS:
        raise SpecError(f"unknown builtin {name!r}; known: {', '.join(BUILTINS)}")
    if name in ("wsum", "sup"):
        if not params:
            raise SpecError(f"{name} needs at least one weight")
        ks = tuple(coerce(k) for k in params)
        if any(k.is_zero() for k in ks):
            raise SpecError(f"{name} weights must be positive")
        if arity is not None and arity != len(ks):
            raise SpecError(f"{name} has {len(ks)} weights but arity {arity}")
        return Builtin(name, len(ks), ks)
    if arity is None or arity < 1:
        raise SpecError(f"{name} needs an arity >= 1")
    if name == "proj":
        if len(params) != 1:
            raise SpecError("proj takes one index")
        j = int(params[0])
        if not 1 <= j <= arity:
            raise SpecError(f"projection index {j} is outside 1..{arity}")
        return Builtin(name, arity, (j,))
    if name == "const_jump":
        if len(params) != 1:
            raise SpecError("const_jump takes one value k")
        return Builtin(name, arity, (coerce(params[0]),))
    if params:
        raise SpecError(f"{name} takes no parameters")
    return Builtin(name, arity)


def parse(text: str, arity: int) -> ExprAggregator:
    return ExprAggregator(parse_expr(text, arity), arity)


def from_spec(spec: str, arity: int | None = None) -> Aggregator:
    """Read ``builtin:NAME[:PARAMS]`` or ``expr:TEXT``."""
    kind, _, rest = spec.partition(":")
    if kind == "expr":
        if arity is None:
            raise SpecError("expression aggregators need an explicit arity")
        return parse(rest, arity)
    if kind != "builtin":
        raise SpecError(f"aggregator spec must start with 'builtin:' or 'expr:', got {spec!r}")
    name, _, ptext = rest.partition(":")
    params: list = []
    if ptext:
        try:
            if name == "proj":
                params = [int(ptext)]
            else:
                params = [parse_extreal(p) for p in ptext.split(",")]
        except ValueError as exc:
            raise SpecError(f"bad parameters {ptext!r}: {exc}") from None
    return builtin(name, *params, arity=arity)
