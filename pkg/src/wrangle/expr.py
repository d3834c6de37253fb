"""Expression grammars used in workflow params and CLI flags.

Three small languages share one tokenizer:

Predicates (row filters)::

    expr    := and_e ('or' and_e)*            # 'and' binds tighter than 'or'
    and_e   := clause ('and' clause)*
    clause  := '(' expr ')'
             | 'not' clause
             | ident cmp literal
             | ident 'in' '(' literal (',' literal)* ')'
             | ident 'between' literal 'and' literal
    cmp     := '==' | '!=' | '<' | '<=' | '>' | '>='

Column arithmetic (mutate)::

    sum     := term (('+' | '-') term)*
    term    := factor (('*' | '/') factor)*
    factor  := '-' factor | number | ident | '(' sum ')'

Aggregations::

    agg     := ident '=' func '(' ident? ')'   # func: mean sum count min max

Identifiers are bare words or backtick-quoted to allow dots and spaces
(`` `Site.ID` ``, `` `Direction Name` ``). Literals are numbers,
single-quoted strings, ``#HH:MM[:SS]#`` times and ``#YYYY-MM-DD#`` dates.

Each AST has a canonical formatter and ``parse(format(e)) == e`` holds for
any tree the parser can produce.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, time
from typing import Mapping, Union

from .errors import ParseError, TypeMismatch, UnknownColumn
from .table import (
    Cell,
    CType,
    NUMERIC_KINDS,
    format_time,
    kind_of_value,
    kinds_comparable,
    parse_date_text,
    parse_time_text,
)

LitValue = Union[int, float, str, date, time]

COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
AGG_FUNCS = ("mean", "sum", "count", "min", "max")

_KEYWORDS = {"and", "or", "not", "in", "between"}
_BARE_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_NUMBER_RE = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Compare:
    column: str
    op: str
    value: LitValue


@dataclass(frozen=True)
class InList:
    column: str
    values: tuple[LitValue, ...]


@dataclass(frozen=True)
class Between:
    column: str
    lo: LitValue
    hi: LitValue


@dataclass(frozen=True)
class And:
    left: "PredicateExpr"
    right: "PredicateExpr"


@dataclass(frozen=True)
class Or:
    left: "PredicateExpr"
    right: "PredicateExpr"


@dataclass(frozen=True)
class Not:
    operand: "PredicateExpr"


PredicateExpr = Union[Compare, InList, Between, And, Or, Not]


@dataclass(frozen=True)
class ColRef:
    name: str


@dataclass(frozen=True)
class NumLit:
    value: int | float


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "MutateExpr"
    right: "MutateExpr"


@dataclass(frozen=True)
class Neg:
    operand: "MutateExpr"


MutateExpr = Union[ColRef, NumLit, BinOp, Neg]


@dataclass(frozen=True)
class AggSpec:
    new_name: str
    func: str
    target: str | None = None

    def __post_init__(self) -> None:
        if self.func not in AGG_FUNCS:
            raise ValueError(f"unknown aggregate function '{self.func}'")
        if (self.target is None) != (self.func == "count"):
            raise ValueError("count takes no target; other aggregates require one")


# ---------------------------------------------------------------------------
# Tokenizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Token:
    kind: str
    value: object
    pos: int


_PUNCT = ("==", "!=", "<=", ">=", "<", ">", "=", "(", ")", ",", "+", "-", "*", "/")


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if ch == "`":
            end = text.find("`", i + 1)
            if end < 0:
                raise ParseError("unterminated backtick identifier", i)
            name = text[i + 1 : end]
            if not name:
                raise ParseError("empty backtick identifier", i)
            tokens.append(_Token("ident", name, i))
            i = end + 1
            continue
        if ch == "'":
            end = text.find("'", i + 1)
            if end < 0:
                raise ParseError("unterminated string literal", i)
            tokens.append(_Token("string", text[i + 1 : end], i))
            i = end + 1
            continue
        if ch == "#":
            end = text.find("#", i + 1)
            if end < 0:
                raise ParseError("unterminated #...# literal", i)
            body = text[i + 1 : end]
            value: LitValue | None = parse_date_text(body)
            if value is None:
                value = parse_time_text(body)
            if value is None:
                raise ParseError(
                    f"bad #...# literal '{body}'", i, {"#HH:MM[:SS]#", "#YYYY-MM-DD#"}
                )
            tokens.append(_Token("hash", value, i))
            i = end + 1
            continue
        m = _NUMBER_RE.match(text, i)
        if m and (ch.isdigit() or ch == "."):
            body = m.group(0)
            num: int | float = float(body) if set(body) & set(".eE") else int(body)
            tokens.append(_Token("number", num, i))
            i = m.end()
            continue
        if ch.isalpha() or ch == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word in _KEYWORDS:
                tokens.append(_Token(word, word, i))
            else:
                tokens.append(_Token("ident", word, i))
            i = j
            continue
        for punct in _PUNCT:
            if text.startswith(punct, i):
                tokens.append(_Token(punct, punct, i))
                i += len(punct)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", i)
    tokens.append(_Token("end", None, n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, kind: str) -> _Token | None:
        if self.current.kind == kind:
            return self.advance()
        return None

    def expect(self, kind: str) -> _Token:
        tok = self.accept(kind)
        if tok is None:
            raise ParseError(
                f"unexpected {self.current.kind}", self.current.pos, {kind}
            )
        return tok

    def fail(self, expected: set[str]) -> ParseError:
        return ParseError(f"unexpected {self.current.kind}", self.current.pos, expected)

    # -- shared pieces ------------------------------------------------------

    def literal(self) -> LitValue:
        tok = self.current
        if tok.kind == "number":
            self.advance()
            return tok.value  # type: ignore[return-value]
        if tok.kind == "-":
            self.advance()
            num = self.expect("number")
            return -num.value  # type: ignore[operator]
        if tok.kind in ("string", "hash"):
            self.advance()
            return tok.value  # type: ignore[return-value]
        raise self.fail({"number", "string", "#...#"})

    # -- predicate grammar --------------------------------------------------

    def predicate(self) -> PredicateExpr:
        node = self.and_expr()
        while self.accept("or"):
            node = Or(node, self.and_expr())
        return node

    def and_expr(self) -> PredicateExpr:
        node = self.clause()
        while self.accept("and"):
            node = And(node, self.clause())
        return node

    def clause(self) -> PredicateExpr:
        if self.accept("("):
            node = self.predicate()
            self.expect(")")
            return node
        if self.accept("not"):
            return Not(self.clause())
        tok = self.current
        if tok.kind != "ident":
            raise self.fail({"ident", "(", "not"})
        self.advance()
        column: str = tok.value  # type: ignore[assignment]
        op = self.current
        if op.kind in COMPARE_OPS:
            self.advance()
            return Compare(column, op.kind, self.literal())
        if self.accept("in"):
            self.expect("(")
            values = [self.literal()]
            while self.accept(","):
                values.append(self.literal())
            self.expect(")")
            return InList(column, tuple(values))
        if self.accept("between"):
            lo = self.literal()
            self.expect("and")
            hi = self.literal()
            return Between(column, lo, hi)
        raise self.fail(set(COMPARE_OPS) | {"in", "between"})

    # -- mutate grammar -----------------------------------------------------

    def mutate(self) -> MutateExpr:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> MutateExpr:
        node = self.factor()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> MutateExpr:
        if self.accept("-"):
            return Neg(self.factor())
        tok = self.current
        if tok.kind == "number":
            self.advance()
            return NumLit(tok.value)  # type: ignore[arg-type]
        if tok.kind == "ident":
            self.advance()
            return ColRef(tok.value)  # type: ignore[arg-type]
        if self.accept("("):
            node = self.mutate()
            self.expect(")")
            return node
        raise self.fail({"number", "ident", "(", "-"})

    # -- aggregation grammar ------------------------------------------------

    def agg(self) -> AggSpec:
        name = self.expect("ident")
        self.expect("=")
        func_tok = self.current
        if func_tok.kind != "ident" or func_tok.value not in AGG_FUNCS:
            raise self.fail(set(AGG_FUNCS))
        self.advance()
        func: str = func_tok.value  # type: ignore[assignment]
        self.expect("(")
        target: str | None = None
        tok = self.accept("ident")
        if tok is not None:
            target = tok.value  # type: ignore[assignment]
        self.expect(")")
        if func == "count" and target is not None:
            raise ParseError("count() takes no argument", func_tok.pos, {")"})
        if func != "count" and target is None:
            raise ParseError(f"{func}() requires a column", func_tok.pos, {"ident"})
        return AggSpec(name.value, func, target)  # type: ignore[arg-type]


def parse_predicate(text: str) -> PredicateExpr:
    p = _Parser(text)
    node = p.predicate()
    p.expect("end")
    return node


def parse_mutate(text: str) -> MutateExpr:
    p = _Parser(text)
    node = p.mutate()
    p.expect("end")
    return node


def parse_agg(text: str) -> AggSpec:
    p = _Parser(text)
    spec = p.agg()
    p.expect("end")
    return spec


# ---------------------------------------------------------------------------
# Canonical formatting (the inverse of parsing)
# ---------------------------------------------------------------------------

def _format_ident(name: str) -> str:
    if _BARE_IDENT_RE.match(name) and name not in _KEYWORDS and name not in AGG_FUNCS:
        return name
    if "`" in name:
        raise ValueError(f"column name {name!r} cannot be written in the grammar")
    return f"`{name}`"


def _format_literal(value: LitValue) -> str:
    if isinstance(value, bool):
        raise ValueError("bool literals are not part of the grammar")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, str):
        if "'" in value:
            raise ValueError(f"string literal {value!r} cannot be written in the grammar")
        return f"'{value}'"
    if isinstance(value, time):
        return f"#{format_time(value)}#"
    if isinstance(value, date):
        return f"#{value.isoformat()}#"
    raise ValueError(f"unsupported literal {value!r}")


def format_predicate(e: PredicateExpr) -> str:
    if isinstance(e, Compare):
        return f"{_format_ident(e.column)} {e.op} {_format_literal(e.value)}"
    if isinstance(e, InList):
        inner = ", ".join(_format_literal(v) for v in e.values)
        return f"{_format_ident(e.column)} in ({inner})"
    if isinstance(e, Between):
        return (
            f"{_format_ident(e.column)} between "
            f"{_format_literal(e.lo)} and {_format_literal(e.hi)}"
        )
    if isinstance(e, Not):
        inner = format_predicate(e.operand)
        if isinstance(e.operand, (And, Or)):
            inner = f"({inner})"
        return f"not {inner}"
    if isinstance(e, And):
        left = format_predicate(e.left)
        if isinstance(e.left, Or):
            left = f"({left})"
        right = format_predicate(e.right)
        if isinstance(e.right, (And, Or)):
            right = f"({right})"
        return f"{left} and {right}"
    if isinstance(e, Or):
        left = format_predicate(e.left)
        right = format_predicate(e.right)
        if isinstance(e.right, Or):
            right = f"({right})"
        return f"{left} or {right}"
    raise TypeError(f"not a predicate node: {e!r}")


_MUT_PREC = {BinOp: 0, Neg: 2, NumLit: 3, ColRef: 3}


def _mut_prec(e: MutateExpr) -> int:
    if isinstance(e, BinOp):
        return 1 if e.op in ("+", "-") else 2
    return _MUT_PREC[type(e)]


def format_mutate(e: MutateExpr) -> str:
    if isinstance(e, NumLit):
        if isinstance(e.value, float):
            return repr(e.value)
        if e.value < 0:
            raise ValueError("negative literals print as unary minus; use Neg")
        return str(e.value)
    if isinstance(e, ColRef):
        return _format_ident(e.name)
    if isinstance(e, Neg):
        inner = format_mutate(e.operand)
        if isinstance(e.operand, (BinOp, Neg)):
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        prec = _mut_prec(e)
        left = format_mutate(e.left)
        if _mut_prec(e.left) < prec:
            left = f"({left})"
        right = format_mutate(e.right)
        if _mut_prec(e.right) < prec or (
            isinstance(e.right, BinOp) and _mut_prec(e.right) == prec
        ):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    raise TypeError(f"not a mutate node: {e!r}")


def format_agg(spec: AggSpec) -> str:
    target = _format_ident(spec.target) if spec.target is not None else ""
    return f"{_format_ident(spec.new_name)} = {spec.func}({target})"


# ---------------------------------------------------------------------------
# Static checks and evaluation
# ---------------------------------------------------------------------------

def predicate_columns(e: PredicateExpr) -> set[str]:
    if isinstance(e, (Compare, InList, Between)):
        return {e.column}
    if isinstance(e, Not):
        return predicate_columns(e.operand)
    return predicate_columns(e.left) | predicate_columns(e.right)


def mutate_columns(e: MutateExpr) -> set[str]:
    if isinstance(e, ColRef):
        return {e.name}
    if isinstance(e, NumLit):
        return set()
    if isinstance(e, Neg):
        return mutate_columns(e.operand)
    return mutate_columns(e.left) | mutate_columns(e.right)


def _check_compatible(column: str, kind: CType, value: LitValue) -> None:
    if not kinds_comparable(kind, kind_of_value(value)):
        raise TypeMismatch(
            f"column '{column}' is {kind.value}, cannot compare with "
            f"{kind_of_value(value).value} literal {value!r}"
        )


def check_predicate(e: PredicateExpr, kinds: Mapping[str, CType]) -> None:
    """Raise UnknownColumn/TypeMismatch unless e can evaluate against kinds."""
    if isinstance(e, (Compare, InList, Between)):
        if e.column not in kinds:
            raise UnknownColumn(f"no column '{e.column}'")
        kind = kinds[e.column]
        if isinstance(e, Compare):
            _check_compatible(e.column, kind, e.value)
        elif isinstance(e, InList):
            for v in e.values:
                _check_compatible(e.column, kind, v)
        else:
            _check_compatible(e.column, kind, e.lo)
            _check_compatible(e.column, kind, e.hi)
        return
    if isinstance(e, Not):
        check_predicate(e.operand, kinds)
        return
    check_predicate(e.left, kinds)
    check_predicate(e.right, kinds)


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_predicate(e: PredicateExpr, row: Mapping[str, Cell]) -> bool:
    """Evaluate against one row; comparisons with a null cell are false."""
    if isinstance(e, Compare):
        cell = row[e.column]
        if cell is None:
            return False
        return _CMP[e.op](cell, e.value)
    if isinstance(e, InList):
        cell = row[e.column]
        if cell is None:
            return False
        return any(cell == v for v in e.values)
    if isinstance(e, Between):
        cell = row[e.column]
        if cell is None:
            return False
        return e.lo <= cell <= e.hi
    if isinstance(e, Not):
        return not eval_predicate(e.operand, row)
    if isinstance(e, And):
        return eval_predicate(e.left, row) and eval_predicate(e.right, row)
    if isinstance(e, Or):
        return eval_predicate(e.left, row) or eval_predicate(e.right, row)
    raise TypeError(f"not a predicate node: {e!r}")


def check_mutate(e: MutateExpr, kinds: Mapping[str, CType]) -> None:
    for name in sorted(mutate_columns(e)):
        if name not in kinds:
            raise UnknownColumn(f"no column '{name}'")
        if kinds[name] not in NUMERIC_KINDS:
            raise TypeMismatch(
                f"column '{name}' is {kinds[name].value}, arithmetic needs int or real"
            )


def eval_mutate(e: MutateExpr, row: Mapping[str, Cell]) -> float | None:
    """Row-wise arithmetic; null operands and division by zero yield null."""
    if isinstance(e, NumLit):
        return e.value
    if isinstance(e, ColRef):
        v = row[e.name]
        return v  # type: ignore[return-value]
    if isinstance(e, Neg):
        v = eval_mutate(e.operand, row)
        return None if v is None else -v
    if isinstance(e, BinOp):
        left = eval_mutate(e.left, row)
        right = eval_mutate(e.right, row)
        if left is None or right is None:
            return None
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return left * right
        if right == 0:
            return None
        return left / right
    raise TypeError(f"not a mutate node: {e!r}")
