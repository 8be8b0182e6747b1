"""Parser for the supported SPARQL subset.

Supported: ``SELECT ?v ... WHERE { ... }`` with triple patterns (``;`` and
``,`` continuation, ``.`` separation), ``FILTER ( ... )`` over comparisons
joined by ``&&``/``||`` and parentheses, ``{ ... } UNION { ... }``, and
``<name>`` constants, string literals and numbers. Anything else is
rejected with UnsupportedFeatureError rather than approximated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union


class QuerySyntaxError(ValueError):
    def __init__(self, message: str, text: str = "", pos: int = 0):
        self.pos = pos
        self.line = text.count("\n", 0, pos) + 1
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"line {self.line}, column {self.column}: {message}")


class UnsupportedFeatureError(QuerySyntaxError):
    def __init__(self, feature: str, text: str = "", pos: int = 0):
        self.feature = feature
        super().__init__(f"unsupported feature: {feature}", text, pos)


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class Iri:
    value: str


@dataclass(frozen=True)
class Literal:
    value: Union[str, float]


Node = Union[Var, Iri, Literal]


@dataclass(frozen=True)
class TriplePattern:
    subject: Node
    predicate: Node
    object: Node

    def variables(self) -> set[str]:
        return {t.name for t in (self.subject, self.predicate, self.object) if isinstance(t, Var)}


@dataclass(frozen=True)
class Comparison:
    op: str
    left: Node
    right: Node

    def variables(self) -> set[str]:
        return {t.name for t in (self.left, self.right) if isinstance(t, Var)}


@dataclass(frozen=True)
class BoolOp:
    op: str  # "&&" or "||"
    operands: tuple

    def variables(self) -> set[str]:
        return set().union(*(o.variables() for o in self.operands))


Expression = Union[Comparison, BoolOp]


@dataclass
class Group:
    patterns: list[TriplePattern] = field(default_factory=list)
    filters: list[Expression] = field(default_factory=list)
    unions: list[list["Group"]] = field(default_factory=list)

    def variables(self) -> set[str]:
        names = set().union(*(p.variables() for p in self.patterns))
        for branches in self.unions:
            for g in branches:
                names |= g.variables()
        return names

    def n_patterns(self) -> int:
        return len(self.patterns) + sum(g.n_patterns() for b in self.unions for g in b)


@dataclass
class Query:
    variables: list[str]
    where: Group


_KEYWORDS_UNSUPPORTED = {
    "OPTIONAL": "OPTIONAL", "MINUS": "MINUS", "BIND": "BIND", "VALUES": "VALUES",
    "SERVICE": "SERVICE", "GRAPH": "named graphs (GRAPH)", "SELECT": "subqueries",
    "PREFIX": "PREFIX declarations", "BASE": "BASE declarations", "DISTINCT": "DISTINCT",
    "REDUCED": "REDUCED", "CONSTRUCT": "CONSTRUCT", "ASK": "ASK", "DESCRIBE": "DESCRIBE",
    "ORDER": "ORDER BY", "GROUP": "GROUP BY", "LIMIT": "LIMIT", "OFFSET": "OFFSET",
    "HAVING": "HAVING", "FROM": "FROM",
}

_WS = re.compile(r"(?:\s+|#[^\n]*)+")
_VAR = re.compile(r"[?$]([A-Za-z_][A-Za-z0-9_]*)")
_IRI = re.compile(r"<([^<>\"{}|^`\\\s]*)>")
_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d+)?|\.\d+)(?:[eE][+-]?\d+)?")
_WORD = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_STRING = re.compile(r"\"((?:[^\"\\\n]|\\.)*)\"|'((?:[^'\\\n]|\\.)*)'")
_ESCAPES = {"t": "\t", "n": "\n", "r": "\r", "b": "\b", "f": "\f", '"': '"', "'": "'", "\\": "\\"}
_COMPARATORS = ("<=", ">=", "!=", "=", "<", ">")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    # scanning

    def skip(self) -> None:
        m = _WS.match(self.text, self.pos)
        if m:
            self.pos = m.end()

    def error(self, message: str, pos: int | None = None):
        return QuerySyntaxError(message, self.text, self.pos if pos is None else pos)

    def unsupported(self, feature: str, pos: int | None = None):
        return UnsupportedFeatureError(feature, self.text, self.pos if pos is None else pos)

    def peek_char(self) -> str:
        self.skip()
        return self.text[self.pos: self.pos + 1]

    def accept(self, s: str) -> bool:
        self.skip()
        if self.text.startswith(s, self.pos):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str) -> None:
        if not self.accept(s):
            found = self.text[self.pos: self.pos + 10] or "end of query"
            raise self.error(f"expected {s!r}, found {found!r}")

    def peek_word(self) -> str | None:
        self.skip()
        m = _WORD.match(self.text, self.pos)
        return m.group(0) if m else None

    def accept_keyword(self, kw: str) -> bool:
        word = self.peek_word()
        if word is not None and word.upper() == kw:
            self.pos += len(word)
            return True
        return False

    def check_unsupported_word(self) -> None:
        word = self.peek_word()
        if word is None:
            return
        feature = _KEYWORDS_UNSUPPORTED.get(word.upper())
        if feature:
            raise self.unsupported(feature)

    # grammar

    def parse(self) -> Query:
        if (self.peek_word() or "").upper() != "SELECT":
            self.check_unsupported_word()
        if not self.accept_keyword("SELECT"):
            raise self.error("expected SELECT")
        self.check_unsupported_word()
        if self.peek_char() == "*":
            raise self.unsupported("SELECT *")
        if self.peek_char() == "(":
            raise self.unsupported("projection expressions")
        variables = []
        while True:
            self.skip()
            m = _VAR.match(self.text, self.pos)
            if not m:
                break
            variables.append(m.group(1))
            self.pos = m.end()
        if not variables:
            raise self.error("expected at least one selected variable")
        self.check_unsupported_word()
        self.accept_keyword("WHERE")
        group = self.group()
        self.check_unsupported_word()
        self.skip()
        if self.pos != len(self.text):
            raise self.error("unexpected text after the query")
        bound = group.variables()
        missing = [v for v in variables if v not in bound]
        if missing:
            raise QuerySyntaxError(
                f"selected variable(s) {', '.join('?' + v for v in missing)} "
                "do not occur in any pattern", self.text, 0,
            )
        return Query(variables, group)

    def group(self) -> Group:
        self.expect("{")
        g = Group()
        while True:
            c = self.peek_char()
            if c == "":
                raise self.error("unterminated group, expected '}'")
            if c == "}":
                self.pos += 1
                return g
            if c == ".":
                self.pos += 1
                continue
            if c == "{":
                branches = [self.group()]
                while self.accept_keyword("UNION"):
                    if self.peek_char() != "{":
                        raise self.error("expected '{' after UNION")
                    branches.append(self.group())
                g.unions.append(branches)
                continue
            if c == "[":
                raise self.unsupported("blank nodes")
            self.check_unsupported_word()
            if self.accept_keyword("FILTER"):
                if self.peek_char() != "(":
                    raise self.unsupported("FILTER with function calls")
                g.filters.append(self.bracketed())
                continue
            if self.peek_word() and self.peek_word().upper() == "UNION":
                raise self.error("UNION must follow a group")
            self.triples_block(g)

    def triples_block(self, g: Group) -> None:
        subject = self.term("subject")
        while True:
            predicate = self.term("predicate")
            c = self.peek_char()
            if c and c in "/|*+^" or (c == "?" and not _VAR.match(self.text, self.pos)):
                raise self.unsupported("property paths")
            while True:
                g.patterns.append(TriplePattern(subject, predicate, self.term("object")))
                if not self.accept(","):
                    break
            if not self.accept(";"):
                return
            while self.accept(";"):
                pass
            c = self.peek_char()
            if c in (".", "}", "") or (self.peek_word() or "").upper() == "FILTER":
                return

    def term(self, role: str) -> Node:
        self.skip()
        start = self.pos
        text = self.text
        if role != "subject" and text.startswith("^", start):
            raise self.unsupported("property paths")
        m = _VAR.match(text, start)
        if m:
            self.pos = m.end()
            return Var(m.group(1))
        m = _IRI.match(text, start)
        if m:
            self.pos = m.end()
            return Iri(m.group(1))
        if text.startswith("_:", start) or text.startswith("[", start):
            raise self.unsupported("blank nodes")
        m = _STRING.match(text, start) or _NUMBER.match(text, start)
        if m:
            if role != "object":
                raise self.error(f"a literal cannot be the {role}")
            return self.literal()
        word = _WORD.match(text, start)
        if word:
            rest = text[word.end(): word.end() + 1]
            if rest == ":":
                raise self.unsupported("prefixed names")
            if word.group(0) == "a" and role == "predicate":
                raise self.unsupported("the 'a' abbreviation")
            feature = _KEYWORDS_UNSUPPORTED.get(word.group(0).upper())
            if feature:
                raise self.unsupported(feature)
        if text.startswith("(", start):
            raise self.unsupported("RDF collections")
        found = text[start: start + 10] or "end of query"
        raise self.error(f"expected a {role} term, found {found!r}")

    def literal(self) -> Literal:
        start = self.pos
        m = _STRING.match(self.text, start)
        if m:
            raw = m.group(1) if m.group(1) is not None else m.group(2)
            self.pos = m.end()
            if self.text.startswith("@", self.pos) or self.text.startswith("^^", self.pos):
                raise self.unsupported("language tags and datatypes")
            return Literal(_unescape(raw, self, start))
        m = _NUMBER.match(self.text, start)
        self.pos = m.end()
        return Literal(float(m.group(0)))

    # filters

    def bracketed(self) -> Expression:
        self.expect("(")
        expr = self.disjunction()
        self.expect(")")
        return expr

    def disjunction(self) -> Expression:
        operands = [self.conjunction()]
        while self.accept("||"):
            operands.append(self.conjunction())
        return operands[0] if len(operands) == 1 else BoolOp("||", tuple(operands))

    def conjunction(self) -> Expression:
        operands = [self.primary()]
        while self.accept("&&"):
            operands.append(self.primary())
        return operands[0] if len(operands) == 1 else BoolOp("&&", tuple(operands))

    def primary(self) -> Expression:
        c = self.peek_char()
        if c == "(":
            return self.bracketed()
        if c == "!" and not self.text.startswith("!=", self.pos):
            raise self.unsupported("negation (!)")
        left = self.operand()
        self.skip()
        for op in _COMPARATORS:
            if self.text.startswith(op, self.pos):
                self.pos += len(op)
                return Comparison(op, left, self.operand())
        found = self.text[self.pos: self.pos + 10] or "end of query"
        raise self.error(f"expected a comparison operator, found {found!r}")

    def operand(self) -> Node:
        self.skip()
        start = self.pos
        m = _VAR.match(self.text, start)
        if m:
            self.pos = m.end()
            return Var(m.group(1))
        m = _IRI.match(self.text, start)
        if m:
            self.pos = m.end()
            return Iri(m.group(1))
        if _STRING.match(self.text, start) or _NUMBER.match(self.text, start):
            return self.literal()
        word = _WORD.match(self.text, start)
        if word:
            if self.text[word.end(): word.end() + 1] == "(" or self.peek_char_after(word.end()) == "(":
                raise self.unsupported(f"function call {word.group(0)}()")
            if word.group(0).lower() in ("true", "false"):
                raise self.unsupported("boolean literals")
        found = self.text[start: start + 10] or "end of query"
        raise self.error(f"expected a variable, constant or literal, found {found!r}")

    def peek_char_after(self, pos: int) -> str:
        m = _WS.match(self.text, pos)
        pos = m.end() if m else pos
        return self.text[pos: pos + 1]


def _unescape(raw: str, parser: _Parser, pos: int) -> str:
    out = []
    i = 0
    while i < len(raw):
        ch = raw[i]
        if ch == "\\":
            nxt = raw[i + 1]
            if nxt not in _ESCAPES:
                raise parser.error(f"unknown escape \\{nxt}", pos + i + 1)
            out.append(_ESCAPES[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def parse_query(text: str) -> Query:
    return _Parser(text).parse()
