"""Recursive-descent parser for the analysis language.

The grammar is a strict subset of Python 3 (statements: assignment,
expression, if/elif/else, for, while, def, return, break, continue, pass,
import, from-import; the expression surface is documented in the language
reference).  Syntactically valid Python outside the subset is rejected
with UnsupportedConstruct naming the construct, so a model can correct
itself.
"""
from __future__ import annotations

from dataclasses import dataclass

from .tokens import RESERVED_UNSUPPORTED, LexError, Token, _decode_escapes, tokenize


class ParseError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class UnsupportedConstruct(ParseError):
    def __init__(self, construct: str, line: int, col: int = 1):
        super().__init__(line, col, f"'{construct}' is not part of the analysis language")
        self.construct = construct


# ---------------------------------------------------------------------------
# AST nodes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Node:
    line: int
    col: int


# expressions
@dataclass(frozen=True)
class Literal(Node):
    value: object


@dataclass(frozen=True)
class FString(Node):
    # parts: str chunks and (expr, format_spec) pairs
    parts: tuple


@dataclass(frozen=True)
class Name(Node):
    id: str


@dataclass(frozen=True)
class ListExpr(Node):
    items: tuple


@dataclass(frozen=True)
class TupleExpr(Node):
    items: tuple


@dataclass(frozen=True)
class DictExpr(Node):
    pairs: tuple  # of (key, value)


@dataclass(frozen=True)
class Comprehension(Node):
    expr: Node
    target: Node
    iterable: Node
    condition: Node | None


@dataclass(frozen=True)
class BinOp(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class BoolOp(Node):
    op: str  # and | or
    values: tuple


@dataclass(frozen=True)
class UnaryOp(Node):
    op: str  # - | not
    operand: Node


@dataclass(frozen=True)
class Compare(Node):
    first: Node
    rest: tuple  # of (op, expr)


@dataclass(frozen=True)
class Subscript(Node):
    obj: Node
    index: Node


@dataclass(frozen=True)
class SliceExpr(Node):
    obj: Node
    lower: Node | None
    upper: Node | None
    step: Node | None


@dataclass(frozen=True)
class Attribute(Node):
    obj: Node
    name: str


@dataclass(frozen=True)
class Call(Node):
    func: Node
    args: tuple
    kwargs: tuple  # of (name, expr)


# statements
@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Node


@dataclass(frozen=True)
class Assign(Node):
    target: Node  # Name | Subscript | TupleExpr of targets
    value: Node


@dataclass(frozen=True)
class AugAssign(Node):
    target: Node  # Name | Subscript
    op: str
    value: Node


@dataclass(frozen=True)
class If(Node):
    branches: tuple  # of (condition | None, body tuple)


@dataclass(frozen=True)
class While(Node):
    condition: Node
    body: tuple


@dataclass(frozen=True)
class For(Node):
    target: Node
    iterable: Node
    body: tuple


@dataclass(frozen=True)
class FuncDef(Node):
    name: str
    params: tuple  # of (name, default | None)
    body: tuple


@dataclass(frozen=True)
class Return(Node):
    value: Node | None


@dataclass(frozen=True)
class Break(Node):
    pass


@dataclass(frozen=True)
class Continue(Node):
    pass


@dataclass(frozen=True)
class Pass(Node):
    pass


@dataclass(frozen=True)
class Import(Node):
    module: str
    alias: str | None


@dataclass(frozen=True)
class FromImport(Node):
    module: str
    names: tuple  # of (name, alias | None)


@dataclass(frozen=True)
class Program:
    source: str
    body: tuple


_COMPARE_OPS = {"==", "!=", "<", "<=", ">", ">="}
_AUG_OPS = {"+=", "-=", "*=", "/=", "//=", "%=", "**="}


class Parser:
    def __init__(self, tokens: list[Token], source: str):
        self.tokens = tokens
        self.source = source
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.type != "EOF":
            self.pos += 1
        return tok

    def at(self, type_: str, value: str | None = None) -> bool:
        tok = self.current
        return tok.type == type_ and (value is None or tok.value == value)

    def accept(self, type_: str, value: str | None = None) -> Token | None:
        if self.at(type_, value):
            return self.advance()
        return None

    def expect(self, type_: str, value: str | None = None, what: str = "") -> Token:
        if self.at(type_, value):
            return self.advance()
        tok = self.current
        expected = what or (value or type_.lower())
        found = repr(tok.value) if tok.value else tok.type
        raise ParseError(tok.line, tok.col, f"expected {expected}, found {found}")

    def error(self, message: str) -> ParseError:
        tok = self.current
        return ParseError(tok.line, tok.col, message)

    # -- program / statements ---------------------------------------------

    def parse_program(self) -> Program:
        body = []
        while not self.at("EOF"):
            if self.accept("NEWLINE"):
                continue
            body.append(self.parse_statement())
        return Program(self.source, tuple(body))

    def parse_statement(self) -> Node:
        tok = self.current
        if tok.type == "NAME" and tok.value in RESERVED_UNSUPPORTED:
            raise UnsupportedConstruct(tok.value, tok.line, tok.col)
        if tok.type == "OP" and tok.value == "@":
            raise UnsupportedConstruct("decorator", tok.line, tok.col)
        if tok.type == "KEYWORD":
            handler = {
                "if": self.parse_if,
                "while": self.parse_while,
                "for": self.parse_for,
                "def": self.parse_def,
                "return": self.parse_return,
                "break": lambda: self.parse_loop_ctl(Break),
                "continue": lambda: self.parse_loop_ctl(Continue),
                "pass": lambda: self.parse_loop_ctl(Pass),
                "import": self.parse_import,
                "from": self.parse_from_import,
            }.get(tok.value)
            if handler is not None:
                return handler()
        return self.parse_simple_statement()

    def parse_block(self) -> tuple:
        self.expect("OP", ":")
        if self.accept("NEWLINE"):
            self.expect("INDENT", what="an indented block")
            body = []
            while not self.at("DEDENT") and not self.at("EOF"):
                if self.accept("NEWLINE"):
                    continue
                body.append(self.parse_statement())
            self.expect("DEDENT")
            if not body:
                raise self.error("empty block")
            return tuple(body)
        # single-line suite: if x: y = 1
        stmt = self.parse_simple_statement()
        return (stmt,)

    def parse_if(self) -> Node:
        tok = self.expect("KEYWORD", "if")
        branches = [(self.parse_expression(), self.parse_block())]
        while self.at("KEYWORD", "elif"):
            self.advance()
            branches.append((self.parse_expression(), self.parse_block()))
        if self.accept("KEYWORD", "else"):
            branches.append((None, self.parse_block()))
        return If(tok.line, tok.col, tuple(branches))

    def parse_while(self) -> Node:
        tok = self.expect("KEYWORD", "while")
        condition = self.parse_expression()
        return While(tok.line, tok.col, condition, self.parse_block())

    def parse_for(self) -> Node:
        tok = self.expect("KEYWORD", "for")
        target = self.parse_target_list()
        self.expect("KEYWORD", "in")
        iterable = self.parse_expression()
        return For(tok.line, tok.col, target, iterable, self.parse_block())

    def parse_def(self) -> Node:
        tok = self.expect("KEYWORD", "def")
        name = self.expect("NAME", what="a function name").value
        self.expect("OP", "(")
        params: list[tuple[str, Node | None]] = []
        seen_default = False
        while not self.at("OP", ")"):
            if self.at("OP", "*"):
                raise UnsupportedConstruct("starred parameter", self.current.line, self.current.col)
            pname = self.expect("NAME", what="a parameter name").value
            default = None
            if self.accept("OP", "="):
                default = self.parse_expression()
                seen_default = True
            elif seen_default:
                raise self.error("parameter without default follows one with a default")
            params.append((pname, default))
            if not self.accept("OP", ","):
                break
        self.expect("OP", ")")
        if self.at("OP", "->"):  # tolerate and ignore a return annotation
            self.advance()
            self.parse_expression()
        return FuncDef(tok.line, tok.col, name, tuple(params), self.parse_block())

    def parse_return(self) -> Node:
        tok = self.expect("KEYWORD", "return")
        value = None
        if not self.at("NEWLINE") and not self.at("EOF") and not self.at("OP", ";"):
            value = self.parse_expression_list()
        self.end_simple_statement()
        return Return(tok.line, tok.col, value)

    def parse_loop_ctl(self, cls) -> Node:
        tok = self.advance()
        self.end_simple_statement()
        return cls(tok.line, tok.col)

    def parse_import(self) -> Node:
        tok = self.expect("KEYWORD", "import")
        module = self.parse_dotted_name()
        alias = None
        if self.accept("KEYWORD", "as"):
            alias = self.expect("NAME", what="an alias").value
        self.end_simple_statement()
        return Import(tok.line, tok.col, module, alias)

    def parse_from_import(self) -> Node:
        tok = self.expect("KEYWORD", "from")
        module = self.parse_dotted_name()
        self.expect("KEYWORD", "import")
        if self.at("OP", "*"):
            raise UnsupportedConstruct("from-import *", tok.line, tok.col)
        names = []
        while True:
            name = self.expect("NAME", what="a name to import").value
            alias = None
            if self.accept("KEYWORD", "as"):
                alias = self.expect("NAME", what="an alias").value
            names.append((name, alias))
            if not self.accept("OP", ","):
                break
        self.end_simple_statement()
        return FromImport(tok.line, tok.col, module, tuple(names))

    def parse_dotted_name(self) -> str:
        parts = [self.expect("NAME", what="a module name").value]
        while self.accept("OP", "."):
            parts.append(self.expect("NAME", what="a module name").value)
        return ".".join(parts)

    def end_simple_statement(self) -> None:
        if self.accept("OP", ";"):
            self.accept("NEWLINE")
            return
        if self.at("EOF") or self.at("DEDENT"):
            return
        self.expect("NEWLINE", what="end of statement")

    def parse_simple_statement(self) -> Node:
        tok = self.current
        expr = self.parse_expression_list()
        if self.at("OP", "="):
            self.advance()
            value = self.parse_expression_list()
            # chained assignment a = b = 1
            while self.at("OP", "="):
                raise UnsupportedConstruct("chained assignment", tok.line, tok.col)
            target = self.to_target(expr)
            self.end_simple_statement()
            return Assign(tok.line, tok.col, target, value)
        if self.current.type == "OP" and self.current.value in _AUG_OPS:
            op_tok = self.advance()
            value = self.parse_expression()
            target = self.to_target(expr)
            if isinstance(target, TupleExpr):
                raise ParseError(tok.line, tok.col, "augmented assignment needs a single target")
            self.end_simple_statement()
            return AugAssign(tok.line, tok.col, target, op_tok.value[:-1], value)
        if self.current.type == "OP" and self.current.value == ":":
            # annotated assignment `x: int = 1` -> tolerate annotation
            if isinstance(expr, Name):
                self.advance()
                self.parse_expression()
                if self.accept("OP", "="):
                    value = self.parse_expression_list()
                    self.end_simple_statement()
                    return Assign(tok.line, tok.col, expr, value)
                self.end_simple_statement()
                raise ParseError(tok.line, tok.col, "annotation without assignment")
        self.end_simple_statement()
        return ExprStmt(tok.line, tok.col, expr)

    def parse_target_list(self) -> Node:
        """Assignment/loop targets: postfix expressions only, so a bare
        `in` keyword is never swallowed as a comparison operator."""
        first = self.parse_postfix()
        if not self.at("OP", ","):
            return self.to_target(first)
        items = [first]
        while self.accept("OP", ","):
            if self.at("KEYWORD", "in") or self.at("OP", "="):
                break
            items.append(self.parse_postfix())
        return self.to_target(TupleExpr(first.line, first.col, tuple(items)))

    def to_target(self, expr: Node) -> Node:
        if isinstance(expr, Name):
            return expr
        if isinstance(expr, Subscript):
            return expr
        if isinstance(expr, (TupleExpr, ListExpr)):
            items = tuple(self.to_target(e) for e in expr.items)
            return TupleExpr(expr.line, expr.col, items)
        if isinstance(expr, Attribute):
            raise ParseError(expr.line, expr.col, "cannot assign to an attribute")
        raise ParseError(expr.line, expr.col, "cannot assign to this expression")

    # -- expressions ---------------------------------------------------------

    def parse_expression_list(self) -> Node:
        first = self.parse_expression()
        if not self.at("OP", ","):
            return first
        items = [first]
        while self.accept("OP", ","):
            if self.at("NEWLINE") or self.at("OP", "=") or self.at("EOF"):
                break
            items.append(self.parse_expression())
        return TupleExpr(first.line, first.col, tuple(items))

    def parse_expression(self) -> Node:
        expr = self.parse_or()
        if self.at("KEYWORD", "if"):
            # conditional expression a if c else b
            tok = self.advance()
            condition = self.parse_or()
            self.expect("KEYWORD", "else")
            orelse = self.parse_expression()
            # desugared at parse time into an If-expression via BoolOp-free node
            return Ternary(tok.line, tok.col, condition, expr, orelse)
        return expr

    def parse_or(self) -> Node:
        left = self.parse_and()
        if not self.at("KEYWORD", "or"):
            return left
        values = [left]
        tok = self.current
        while self.accept("KEYWORD", "or"):
            values.append(self.parse_and())
        return BoolOp(tok.line, tok.col, "or", tuple(values))

    def parse_and(self) -> Node:
        left = self.parse_not()
        if not self.at("KEYWORD", "and"):
            return left
        values = [left]
        tok = self.current
        while self.accept("KEYWORD", "and"):
            values.append(self.parse_not())
        return BoolOp(tok.line, tok.col, "and", tuple(values))

    def parse_not(self) -> Node:
        if self.at("KEYWORD", "not"):
            tok = self.advance()
            return UnaryOp(tok.line, tok.col, "not", self.parse_not())
        return self.parse_comparison()

    def _comparison_op(self) -> str | None:
        tok = self.current
        if tok.type == "OP" and tok.value in _COMPARE_OPS:
            self.advance()
            return tok.value
        if tok.type == "KEYWORD" and tok.value == "in":
            self.advance()
            return "in"
        if tok.type == "KEYWORD" and tok.value == "is":
            self.advance()
            if self.accept("KEYWORD", "not"):
                return "is not"
            return "is"
        if tok.type == "KEYWORD" and tok.value == "not":
            nxt = self.tokens[self.pos + 1] if self.pos + 1 < len(self.tokens) else None
            if nxt and nxt.type == "KEYWORD" and nxt.value == "in":
                self.advance()
                self.advance()
                return "not in"
        return None

    def parse_comparison(self) -> Node:
        left = self.parse_additive()
        rest = []
        while True:
            op = self._comparison_op()
            if op is None:
                break
            rest.append((op, self.parse_additive()))
        if not rest:
            return left
        return Compare(left.line, left.col, left, tuple(rest))

    def parse_additive(self) -> Node:
        left = self.parse_multiplicative()
        while self.current.type == "OP" and self.current.value in ("+", "-"):
            op = self.advance()
            right = self.parse_multiplicative()
            left = BinOp(op.line, op.col, op.value, left, right)
        return left

    def parse_multiplicative(self) -> Node:
        left = self.parse_unary()
        while self.current.type == "OP" and self.current.value in ("*", "/", "//", "%"):
            op = self.advance()
            right = self.parse_unary()
            left = BinOp(op.line, op.col, op.value, left, right)
        return left

    def parse_unary(self) -> Node:
        if self.at("OP", "-"):
            tok = self.advance()
            return UnaryOp(tok.line, tok.col, "-", self.parse_unary())
        if self.at("OP", "+"):
            tok = self.advance()
            return UnaryOp(tok.line, tok.col, "+", self.parse_unary())
        return self.parse_power()

    def parse_power(self) -> Node:
        base = self.parse_postfix()
        if self.at("OP", "**"):
            tok = self.advance()
            exponent = self.parse_unary()  # right associative, binds unary on rhs
            return BinOp(tok.line, tok.col, "**", base, exponent)
        return base

    def parse_postfix(self) -> Node:
        expr = self.parse_atom()
        while True:
            if self.at("OP", "("):
                expr = self.parse_call(expr)
            elif self.at("OP", "["):
                expr = self.parse_subscript(expr)
            elif self.at("OP", "."):
                dot = self.advance()
                name = self.expect("NAME", what="an attribute name").value
                expr = Attribute(dot.line, dot.col, expr, name)
            else:
                return expr

    def parse_call(self, func: Node) -> Node:
        open_tok = self.expect("OP", "(")
        args: list[Node] = []
        kwargs: list[tuple[str, Node]] = []
        while not self.at("OP", ")"):
            if self.at("OP", "*") or self.at("OP", "**"):
                raise UnsupportedConstruct("starred argument", self.current.line, self.current.col)
            if (
                self.current.type == "NAME"
                and self.pos + 1 < len(self.tokens)
                and self.tokens[self.pos + 1].type == "OP"
                and self.tokens[self.pos + 1].value == "="
            ):
                name = self.advance().value
                self.advance()
                kwargs.append((name, self.parse_expression()))
            else:
                if kwargs:
                    raise self.error("positional argument after keyword argument")
                arg = self.parse_expression()
                # generator argument: sum(x for x in ...) is evaluated eagerly
                if self.at("KEYWORD", "for"):
                    arg = self.parse_comprehension_tail(arg)
                args.append(arg)
            if not self.accept("OP", ","):
                break
        self.expect("OP", ")")
        return Call(open_tok.line, open_tok.col, func, tuple(args), tuple(kwargs))

    def parse_subscript(self, obj: Node) -> Node:
        open_tok = self.expect("OP", "[")
        parts: list[Node | None] = []
        is_slice = False

        def read_part(closers):
            if self.current.type == "OP" and self.current.value in closers:
                return None
            return self.parse_expression()

        parts.append(read_part((":", "]")))
        while self.accept("OP", ":"):
            is_slice = True
            parts.append(read_part((":", "]")))
        self.expect("OP", "]")
        if not is_slice:
            if parts[0] is None:
                raise ParseError(open_tok.line, open_tok.col, "empty subscript")
            return Subscript(open_tok.line, open_tok.col, obj, parts[0])
        while len(parts) < 3:
            parts.append(None)
        if len(parts) > 3:
            raise ParseError(open_tok.line, open_tok.col, "too many slice parts")
        return SliceExpr(open_tok.line, open_tok.col, obj, parts[0], parts[1], parts[2])

    def parse_comprehension_tail(self, expr: Node) -> Node:
        for_tok = self.expect("KEYWORD", "for")
        target = self.parse_target_list()
        self.expect("KEYWORD", "in")
        iterable = self.parse_or()
        condition = None
        if self.accept("KEYWORD", "if"):
            condition = self.parse_expression()
        if self.at("KEYWORD", "for"):
            raise UnsupportedConstruct(
                "comprehension with multiple for-clauses", for_tok.line, for_tok.col
            )
        return Comprehension(for_tok.line, for_tok.col, expr, target, iterable, condition)

    def parse_atom(self) -> Node:
        tok = self.current
        if tok.type == "OP" and tok.value in ("*", "**"):
            raise UnsupportedConstruct("starred argument", tok.line, tok.col)
        if tok.type == "NUMBER":
            self.advance()
            return Literal(tok.line, tok.col, tok.literal)
        if tok.type == "STRING":
            self.advance()
            if tok.is_fstring:
                return self.parse_fstring(tok)
            # adjacent string literal concatenation
            value = tok.literal
            while self.current.type == "STRING" and not self.current.is_fstring:
                value += self.current.literal
                self.advance()
            return Literal(tok.line, tok.col, value)
        if tok.type == "KEYWORD" and tok.value in ("True", "False", "None"):
            self.advance()
            return Literal(tok.line, tok.col, {"True": True, "False": False, "None": None}[tok.value])
        if tok.type == "KEYWORD" and tok.value in RESERVED_UNSUPPORTED:
            raise UnsupportedConstruct(tok.value, tok.line, tok.col)
        if tok.type == "NAME":
            if tok.value in RESERVED_UNSUPPORTED:
                raise UnsupportedConstruct(tok.value, tok.line, tok.col)
            self.advance()
            return Name(tok.line, tok.col, tok.value)
        if tok.type == "OP" and tok.value == "(":
            self.advance()
            if self.at("OP", ")"):
                self.advance()
                return TupleExpr(tok.line, tok.col, ())
            inner = self.parse_expression()
            if self.at("KEYWORD", "for"):
                comp = self.parse_comprehension_tail(inner)
                self.expect("OP", ")")
                return comp
            if self.at("OP", ","):
                items = [inner]
                while self.accept("OP", ","):
                    if self.at("OP", ")"):
                        break
                    items.append(self.parse_expression())
                self.expect("OP", ")")
                return TupleExpr(tok.line, tok.col, tuple(items))
            self.expect("OP", ")")
            return inner
        if tok.type == "OP" and tok.value == "[":
            self.advance()
            if self.at("OP", "]"):
                self.advance()
                return ListExpr(tok.line, tok.col, ())
            first = self.parse_expression()
            if self.at("KEYWORD", "for"):
                comp = self.parse_comprehension_tail(first)
                self.expect("OP", "]")
                return comp
            items = [first]
            while self.accept("OP", ","):
                if self.at("OP", "]"):
                    break
                items.append(self.parse_expression())
            self.expect("OP", "]")
            return ListExpr(tok.line, tok.col, tuple(items))
        if tok.type == "OP" and tok.value == "{":
            self.advance()
            if self.at("OP", "}"):
                self.advance()
                return DictExpr(tok.line, tok.col, ())
            first_key = self.parse_expression()
            if not self.at("OP", ":"):
                raise UnsupportedConstruct("set literal", tok.line, tok.col)
            self.advance()
            first_value = self.parse_expression()
            if self.at("KEYWORD", "for"):
                raise UnsupportedConstruct("dict comprehension", tok.line, tok.col)
            pairs = [(first_key, first_value)]
            while self.accept("OP", ","):
                if self.at("OP", "}"):
                    break
                key = self.parse_expression()
                self.expect("OP", ":")
                pairs.append((key, self.parse_expression()))
            self.expect("OP", "}")
            return DictExpr(tok.line, tok.col, tuple(pairs))
        if tok.type == "KEYWORD":
            raise ParseError(tok.line, tok.col, f"unexpected keyword {tok.value!r}")
        raise ParseError(tok.line, tok.col, f"unexpected {tok.value!r}")

    def parse_fstring(self, tok: Token) -> Node:
        raw = tok.literal  # escapes not yet decoded
        parts: list = []
        chunk = []
        i = 0
        while i < len(raw):
            ch = raw[i]
            if ch == "{":
                if raw[i + 1 : i + 2] == "{":
                    chunk.append("{")
                    i += 2
                    continue
                # find matching close brace at depth 0
                depth = 1
                j = i + 1
                spec_start = None
                while j < len(raw) and depth:
                    if raw[j] == "{":
                        depth += 1
                    elif raw[j] == "}":
                        depth -= 1
                        if depth == 0:
                            break
                    elif raw[j] == ":" and depth == 1 and spec_start is None:
                        spec_start = j
                    j += 1
                if depth != 0:
                    raise ParseError(tok.line, tok.col, "unbalanced braces in f-string")
                if spec_start is not None:
                    expr_src = raw[i + 1 : spec_start]
                    spec = raw[spec_start + 1 : j]
                else:
                    expr_src = raw[i + 1 : j]
                    spec = ""
                expr_src = expr_src.strip()
                if not expr_src:
                    raise ParseError(tok.line, tok.col, "empty expression in f-string")
                if chunk:
                    parts.append(_decode_escapes("".join(chunk), tok.line, tok.col))
                    chunk = []
                sub = parse_expression_source(expr_src, tok.line, tok.col)
                parts.append((sub, spec))
                i = j + 1
                continue
            if ch == "}":
                if raw[i + 1 : i + 2] == "}":
                    chunk.append("}")
                    i += 2
                    continue
                raise ParseError(tok.line, tok.col, "single '}' in f-string")
            chunk.append(ch)
            i += 1
        if chunk:
            parts.append(_decode_escapes("".join(chunk), tok.line, tok.col))
        return FString(tok.line, tok.col, tuple(parts))


@dataclass(frozen=True)
class Ternary(Node):
    condition: Node
    then: Node
    orelse: Node


def parse_expression_source(source: str, line: int = 1, col: int = 1) -> Node:
    """Parse one embedded expression (f-string interpolation)."""
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ParseError(line, col, f"in f-string expression: {exc.message}") from None
    parser = Parser(tokens, source)
    expr = parser.parse_expression()
    if not parser.at("NEWLINE") and not parser.at("EOF"):
        raise ParseError(line, col, "bad f-string expression")
    return expr


def parse(source: str) -> Program:
    """Parse analysis-language source into a Program.

    Raises ParseError (with 1-based line/column) on malformed input and
    UnsupportedConstruct for valid Python outside the subset.
    """
    if not source or not source.strip():
        raise ParseError(1, 1, "empty program")
    try:
        tokens = tokenize(source)
    except LexError as exc:
        raise ParseError(exc.line, exc.col, exc.message) from None
    return Parser(tokens, source).parse_program()
