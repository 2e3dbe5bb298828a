"""Tokenizer for the analysis language (an indentation-sensitive subset of
Python 3 surface syntax).  Produces NAME/NUMBER/STRING/OP/KEYWORD tokens
plus NEWLINE, INDENT, DEDENT, and EOF; newlines inside brackets are
implicit continuations.
"""
from __future__ import annotations

from dataclasses import dataclass


class LexError(Exception):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


KEYWORDS = frozenset(
    {
        "if", "elif", "else", "for", "while", "def", "return", "break",
        "continue", "pass", "import", "from", "as", "and", "or", "not",
        "in", "is", "True", "False", "None",
    }
)

# recognized so the parser can name the construct in its error
RESERVED_UNSUPPORTED = frozenset(
    {
        "class", "try", "except", "finally", "with", "lambda", "yield",
        "global", "nonlocal", "del", "raise", "assert", "async", "await",
    }
)

_OPERATORS = [
    "**=", "//=", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=",
    "**", "//", "->", "+", "-", "*", "/", "%", "<", ">", "=", "(", ")",
    "[", "]", "{", "}", ",", ":", ".", ";", "@",
]


@dataclass(frozen=True)
class Token:
    type: str  # NAME KEYWORD NUMBER STRING OP NEWLINE INDENT DEDENT EOF
    value: str
    line: int
    col: int
    # for STRING tokens: the decoded value and whether it is an f-string
    literal: object = None
    is_fstring: bool = False


def _decode_escapes(raw: str, line: int, col: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(raw):
            raise LexError(line, col, "dangling backslash in string")
        esc = raw[i + 1]
        mapping = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", "'": "'", '"': '"', "0": "\0"}
        if esc in mapping:
            out.append(mapping[esc])
            i += 2
        elif esc == "u" and i + 5 < len(raw) + 1:
            try:
                out.append(chr(int(raw[i + 2 : i + 6], 16)))
            except ValueError:
                raise LexError(line, col, f"bad unicode escape \\u{raw[i + 2:i + 6]}") from None
            i += 6
        else:
            # keep unknown escapes verbatim, like Python's default warning path
            out.append("\\" + esc)
            i += 2
    return "".join(out)


class Tokenizer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.col = 1
        self.indents = [0]
        self.paren_depth = 0
        self.tokens: list[Token] = []
        self.at_line_start = True

    def error(self, message: str) -> LexError:
        return LexError(self.line, self.col, message)

    def _peek(self, offset: int = 0) -> str:
        idx = self.pos + offset
        return self.source[idx] if idx < len(self.source) else ""

    def _advance(self, n: int = 1) -> str:
        chunk = self.source[self.pos : self.pos + n]
        for ch in chunk:
            if ch == "\n":
                self.line += 1
                self.col = 1
            else:
                self.col += 1
        self.pos += n
        return chunk

    def _emit(self, type_: str, value: str, line: int, col: int, **kw) -> None:
        self.tokens.append(Token(type_, value, line, col, **kw))

    def tokenize(self) -> list[Token]:
        while self.pos < len(self.source):
            if self.at_line_start and self.paren_depth == 0:
                self._handle_indent()
                if self.pos >= len(self.source):
                    break
            ch = self._peek()
            if ch == "#":
                while self._peek() and self._peek() != "\n":
                    self._advance()
                continue
            if ch == "\n":
                self._advance()
                if self.paren_depth == 0:
                    if self.tokens and self.tokens[-1].type not in ("NEWLINE", "INDENT", "DEDENT"):
                        self._emit("NEWLINE", "\n", self.line - 1, self.col)
                    self.at_line_start = True
                continue
            if ch in " \t":
                self._advance()
                continue
            if ch == "\\" and self._peek(1) == "\n":
                self._advance(2)  # explicit line continuation
                continue
            line, col = self.line, self.col
            if ch.isdigit() or (ch == "." and self._peek(1).isdigit()):
                self._read_number(line, col)
                continue
            if ch in "\"'":
                self._read_string(line, col, is_fstring=False)
                continue
            if ch.isalpha() or ch == "_":
                self._read_name(line, col)
                continue
            op = self._read_operator()
            if op is None:
                raise self.error(f"unexpected character {ch!r}")
            if op in "([{":
                self.paren_depth += 1
            elif op in ")]}":
                self.paren_depth = max(0, self.paren_depth - 1)
            self._emit("OP", op, line, col)
        # final newline + dedents
        if self.tokens and self.tokens[-1].type not in ("NEWLINE",):
            self._emit("NEWLINE", "\n", self.line, self.col)
        while len(self.indents) > 1:
            self.indents.pop()
            self._emit("DEDENT", "", self.line, self.col)
        self._emit("EOF", "", self.line, self.col)
        return self.tokens

    def _handle_indent(self) -> None:
        # measure leading whitespace; skip blank/comment-only lines entirely
        while True:
            width = 0
            start = self.pos
            while self._peek() in (" ", "\t"):
                width += 4 - (width % 4) if self._peek() == "\t" else 1
                self._advance()
            if self._peek() == "\n":
                self._advance()
                continue
            if self._peek() == "#":
                while self._peek() and self._peek() != "\n":
                    self._advance()
                continue
            if self.pos >= len(self.source):
                return
            break
        self.at_line_start = False
        current = self.indents[-1]
        if width > current:
            self.indents.append(width)
            self._emit("INDENT", "", self.line, 1)
        else:
            while width < self.indents[-1]:
                self.indents.pop()
                self._emit("DEDENT", "", self.line, 1)
            if width != self.indents[-1]:
                raise self.error("unindent does not match any outer indentation level")

    def _read_number(self, line: int, col: int) -> None:
        start = self.pos
        seen_dot = False
        seen_exp = False
        while True:
            ch = self._peek()
            if ch.isdigit() or ch == "_":
                self._advance()
            elif ch == "." and not seen_dot and not seen_exp:
                seen_dot = True
                self._advance()
            elif ch in "eE" and not seen_exp and self.pos > start:
                nxt = self._peek(1)
                if nxt.isdigit() or (nxt in "+-" and self._peek(2).isdigit()):
                    seen_exp = True
                    self._advance()
                    if self._peek() in ("+", "-"):
                        self._advance()
                else:
                    break
            else:
                break
        raw = self.source[start : self.pos].replace("_", "")
        try:
            literal: object = float(raw) if (seen_dot or seen_exp) else int(raw)
        except ValueError:
            raise LexError(line, col, f"bad number literal {raw!r}") from None
        self._emit("NUMBER", raw, line, col, literal=literal)

    def _read_string(self, line: int, col: int, is_fstring: bool) -> None:
        quote = self._peek()
        triple = self.source[self.pos : self.pos + 3] in ('"""', "'''")
        end = quote * 3 if triple else quote
        self._advance(3 if triple else 1)
        start = self.pos
        while True:
            if self.pos >= len(self.source):
                raise LexError(line, col, "unterminated string literal")
            if self.source.startswith(end, self.pos):
                raw = self.source[start : self.pos]
                self._advance(len(end))
                break
            if self._peek() == "\\":
                self._advance(2)
                continue
            if self._peek() == "\n" and not triple:
                raise LexError(line, col, "newline in string literal")
            self._advance()
        value = _decode_escapes(raw, line, col) if not is_fstring else raw
        self._emit("STRING", raw, line, col, literal=value, is_fstring=is_fstring)

    def _read_name(self, line: int, col: int) -> None:
        start = self.pos
        while self._peek().isalnum() or self._peek() == "_":
            self._advance()
        name = self.source[start : self.pos]
        # string prefixes
        if name in ("f", "F") and self._peek() in ('"', "'"):
            self._read_string(line, col, is_fstring=True)
            return
        if name in ("r", "R", "b", "B", "rb", "fr", "rf") and self._peek() in ('"', "'"):
            raise LexError(line, col, f"string prefix {name!r} is not supported")
        if name in KEYWORDS:
            self._emit("KEYWORD", name, line, col)
        else:
            self._emit("NAME", name, line, col)

    def _read_operator(self) -> str | None:
        for op in _OPERATORS:
            if self.source.startswith(op, self.pos):
                self._advance(len(op))
                return op
        return None


def tokenize(source: str) -> list[Token]:
    return Tokenizer(source).tokenize()
