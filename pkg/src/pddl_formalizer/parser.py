"""Hand-written lexer and recursive-descent parser for domain and problem files.

Both entry points either return an AST or raise :class:`ParseError`; nothing
else escapes, whatever the input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .ast import (
    ROOT_TYPE,
    ActionDecl,
    And,
    Atom,
    DomainAst,
    Formula,
    Not,
    PredicateDecl,
    ProblemAst,
)

UNBALANCED = "unbalanced-parenthesis"
UNEXPECTED = "unexpected-token"
TRUNCATED = "truncated-input"
UNKNOWN_SECTION = "unknown-section"

# Names that may never be used as a user symbol; keeps the parser from
# accepting anything the emitted grammar would tokenize as a keyword.
RESERVED = frozenset(
    {"define", "domain", "problem", "and", "not", "or", "either", "forall", "exists", "imply", "when"}
)
UNSUPPORTED_CONNECTIVES = frozenset({"or", "imply", "forall", "exists", "when", "either", "="})
MAX_NESTING = 200
_NOT_NESTABLE = UNSUPPORTED_CONNECTIVES | {"and", "not"}

NAME_RE = r"[A-Za-z][A-Za-z0-9_\-]*"
_TOKEN_RE = re.compile(
    rf"""
    (?P<ws>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<var>\?{NAME_RE})
  | (?P<kw>:{NAME_RE})
  | (?P<name>{NAME_RE})
  | (?P<dash>-)
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """Syntax error with a 1-based source position.

    ``file`` is ``"domain"`` or ``"problem"`` and is filled in by the entry
    point that raised it, so feedback can say which file is broken.
    """

    def __init__(self, kind: str, line: int, column: int, message: str, file: str | None = None):
        super().__init__(message)
        self.kind = kind
        self.line = line
        self.column = column
        self.message = message
        self.file = file

    def __str__(self) -> str:
        where = f"{self.file} file, " if self.file else ""
        return f"{where}line {self.line}, column {self.column}: {self.kind}: {self.message}"

    def __repr__(self) -> str:
        return f"ParseError({self.kind!r}, {self.line}, {self.column}, {self.message!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ParseError):
            return NotImplemented
        return (self.kind, self.line, self.column, self.message, self.file) == (
            other.kind,
            other.line,
            other.column,
            other.message,
            other.file,
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Token:
    kind: str  # lpar, rpar, var, kw, name, dash
    text: str
    line: int
    column: int

    @property
    def value(self) -> str:
        return self.text.lower()

    def describe(self) -> str:
        return f"'{self.text}'"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(UNEXPECTED, line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    return tokens


def _end_position(text: str) -> tuple[int, int]:
    line = text.count("\n") + 1
    return line, len(text) - (text.rfind("\n") + 1) + 1


def _check_balance(tokens: list[Token], text: str) -> None:
    stack: list[Token] = []
    for tok in tokens:
        if tok.kind == "lpar":
            stack.append(tok)
        elif tok.kind == "rpar":
            if not stack:
                raise ParseError(UNBALANCED, tok.line, tok.column, "')' has no matching '('")
            stack.pop()
    if not tokens:
        line, col = _end_position(text)
        raise ParseError(TRUNCATED, line, col, "input is empty")
    if stack:
        if tokens[-1].kind == "rpar":
            tok = stack[-1]
            raise ParseError(
                UNBALANCED, tok.line, tok.column,
                f"'(' opened at line {tok.line}, column {tok.column} is never closed",
            )
        line, col = _end_position(text)
        raise ParseError(TRUNCATED, line, col, "input ends before the definition is complete")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        _check_balance(self.tokens, text)
        self.pos = 0

    # -- token helpers -------------------------------------------------
    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def next(self) -> Token:
        tok = self.peek()
        if tok is None:
            line, col = _end_position(self.text)
            raise ParseError(TRUNCATED, line, col, "input ends before the definition is complete")
        self.pos += 1
        return tok

    def fail(self, tok: Token, expected: str) -> ParseError:
        return ParseError(UNEXPECTED, tok.line, tok.column, f"unexpected {tok.describe()}; expected {expected}")

    def expect(self, kind: str, expected: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise self.fail(tok, expected)
        return tok

    def expect_word(self, word: str) -> Token:
        tok = self.next()
        if tok.kind != "name" or tok.value != word:
            raise self.fail(tok, f"'{word}'")
        return tok

    def expect_name(self, what: str) -> str:
        tok = self.next()
        if tok.kind != "name":
            raise self.fail(tok, what)
        if tok.value in RESERVED:
            raise ParseError(UNEXPECTED, tok.line, tok.column, f"reserved word {tok.describe()} cannot be used as {what}")
        return tok.value

    def at(self, kind: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == kind

    def finish(self) -> None:
        tok = self.peek()
        if tok is not None:
            raise ParseError(UNEXPECTED, tok.line, tok.column, f"unexpected {tok.describe()} after the end of the definition")

    def section_keyword(self) -> Token:
        """Consume ``(`` and return the section keyword that follows it."""
        self.expect("lpar", "'('")
        tok = self.next()
        if tok.kind != "kw":
            raise self.fail(tok, "a section keyword such as ':predicates'")
        return tok

    # -- shared pieces -------------------------------------------------
    def typed_list(self, item_kind: str, what: str) -> list[tuple[str, str]]:
        out: list[tuple[str, str]] = []
        pending: list[str] = []
        seen: set[str] = set()
        while not self.at("rpar"):
            tok = self.next()
            if tok.kind == item_kind:
                if item_kind == "name" and tok.value in RESERVED:
                    raise ParseError(UNEXPECTED, tok.line, tok.column, f"reserved word {tok.describe()} cannot be used as {what}")
                if tok.value in seen:
                    raise ParseError(UNEXPECTED, tok.line, tok.column, f"{what} {tok.describe()} is declared twice")
                seen.add(tok.value)
                pending.append(tok.value)
            elif tok.kind == "dash":
                if not pending:
                    raise ParseError(UNEXPECTED, tok.line, tok.column, f"'-' must follow at least one {what}")
                type_tok = self.peek()
                if type_tok is not None and type_tok.kind == "lpar":
                    raise ParseError(UNEXPECTED, type_tok.line, type_tok.column, "'either' types are not supported")
                type_name = self.expect_name("a type name")
                out.extend((item, type_name) for item in pending)
                pending = []
            else:
                raise self.fail(tok, what)
        out.extend((item, ROOT_TYPE) for item in pending)
        return out

    def requirements(self) -> tuple[str, ...]:
        reqs: list[str] = []
        while not self.at("rpar"):
            tok = self.next()
            if tok.kind != "kw":
                raise self.fail(tok, "a requirement flag such as ':strips'")
            if tok.value[1:] not in reqs:
                reqs.append(tok.value[1:])
        self.expect("rpar", "')'")
        return tuple(reqs)

    def atom_body(self, ground: bool) -> Atom:
        """Parse ``name term*`` then the closing paren (the opening one is consumed)."""
        pred = self.expect_name("a predicate name")
        terms: list[str] = []
        while not self.at("rpar"):
            tok = self.next()
            if tok.kind == "name":
                if tok.value in RESERVED:
                    raise ParseError(UNEXPECTED, tok.line, tok.column, f"reserved word {tok.describe()} cannot be used as an argument")
                terms.append(tok.value)
            elif tok.kind == "var":
                if ground:
                    raise ParseError(UNEXPECTED, tok.line, tok.column, f"variable {tok.describe()} is not allowed here; only objects may appear")
                terms.append(tok.value)
            else:
                raise self.fail(tok, "a variable or object name")
        self.expect("rpar", "')'")
        return Atom(pred, tuple(terms))

    def formula(self, ground: bool, depth: int = 0) -> Formula:
        if depth > MAX_NESTING:
            tok = self.peek() or self.tokens[-1]
            raise ParseError(UNEXPECTED, tok.line, tok.column, "formula nesting is too deep")
        self.expect("lpar", "'(' starting a formula")
        head = self.peek()
        if head is None:
            self.next()
        if head.kind == "rpar":
            self.next()
            return And()
        if head.kind != "name":
            raise self.fail(self.next(), "a predicate name, 'and' or 'not'")
        if head.value == "and":
            self.next()
            parts: list[Formula] = []
            while not self.at("rpar"):
                part = self.formula(ground, depth + 1)
                if isinstance(part, And):
                    parts.extend(part.parts)
                else:
                    parts.append(part)
            self.expect("rpar", "')'")
            return And(tuple(parts))
        if head.value == "not":
            self.next()
            self.expect("lpar", "'(' starting the negated atom")
            inner = self.peek()
            if inner is not None and inner.kind == "name" and inner.value in _NOT_NESTABLE:
                raise ParseError(UNEXPECTED, inner.line, inner.column, "'not' may only be applied to a single atom")
            atom = self.atom_body(ground)
            self.expect("rpar", "')' closing 'not'")
            return Not(atom)
        if head.value in UNSUPPORTED_CONNECTIVES:
            raise ParseError(UNEXPECTED, head.line, head.column, f"connective {head.describe()} is not supported; use 'and' and 'not' only")
        return self.atom_body(ground)

    # -- domain --------------------------------------------------------
    def domain(self) -> DomainAst:
        self.expect("lpar", "'('")
        self.expect_word("define")
        self.expect("lpar", "'('")
        tok = self.next()
        if tok.kind != "name" or tok.value != "domain":
            raise self.fail(tok, "'domain'")
        name = self.expect_name("a domain name")
        self.expect("rpar", "')'")

        order = {":requirements": 0, ":types": 1, ":predicates": 2, ":action": 3}
        stage = -1
        requirements: tuple[str, ...] = ()
        types: list[tuple[str, str]] = []
        predicates: list[PredicateDecl] = []
        actions: list[ActionDecl] = []
        while self.at("lpar"):
            kw = self.section_keyword()
            rank = order.get(kw.value)
            if rank is None:
                raise ParseError(UNKNOWN_SECTION, kw.line, kw.column, f"unknown or unsupported domain section {kw.describe()}")
            if rank < stage or (rank == stage and rank != 3):
                raise ParseError(UNEXPECTED, kw.line, kw.column, f"section {kw.describe()} is out of order or repeated")
            stage = rank
            if rank == 0:
                requirements = self.requirements()
            elif rank == 1:
                types = self.typed_list("name", "a type name")
                self.expect("rpar", "')'")
            elif rank == 2:
                predicates = self.predicate_decls()
            else:
                action = self.action()
                if any(a.name == action.name for a in actions):
                    raise ParseError(UNEXPECTED, kw.line, kw.column, f"action '{action.name}' is defined twice")
                actions.append(action)
        self.expect("rpar", "')' closing the domain definition")
        self.finish()
        return DomainAst(name, requirements, tuple(types), tuple(predicates), tuple(actions))

    def predicate_decls(self) -> list[PredicateDecl]:
        decls: list[PredicateDecl] = []
        while not self.at("rpar"):
            self.expect("lpar", "'(' starting a predicate declaration")
            name_tok = self.peek()
            name = self.expect_name("a predicate name")
            params = self.typed_list("var", "a variable")
            self.expect("rpar", "')'")
            if any(d.name == name for d in decls):
                raise ParseError(UNEXPECTED, name_tok.line, name_tok.column, f"predicate '{name}' is declared twice")
            decls.append(PredicateDecl(name, tuple(params)))
        self.expect("rpar", "')'")
        return decls

    def action(self) -> ActionDecl:
        name = self.expect_name("an action name")
        fields = [":parameters", ":precondition", ":effect"]
        stage = -1
        params: list[tuple[str, str]] = []
        precondition: Formula = And()
        effect: Formula = And()
        while not self.at("rpar"):
            tok = self.next()
            if tok.kind != "kw" or tok.value not in fields:
                raise self.fail(tok, "':parameters', ':precondition' or ':effect'")
            rank = fields.index(tok.value)
            if rank <= stage:
                raise ParseError(UNEXPECTED, tok.line, tok.column, f"{tok.describe()} is out of order or repeated")
            stage = rank
            if rank == 0:
                self.expect("lpar", "'(' starting the parameter list")
                params = self.typed_list("var", "a variable")
                self.expect("rpar", "')'")
            elif rank == 1:
                precondition = self.formula(ground=False)
            else:
                effect = self.formula(ground=False)
        self.expect("rpar", "')' closing the action")
        return ActionDecl(name, tuple(params), precondition, effect)

    # -- problem -------------------------------------------------------
    def problem(self) -> ProblemAst:
        self.expect("lpar", "'('")
        self.expect_word("define")
        self.expect("lpar", "'('")
        tok = self.next()
        if tok.kind != "name" or tok.value != "problem":
            raise self.fail(tok, "'problem'")
        name = self.expect_name("a problem name")
        self.expect("rpar", "')'")
        kw = self.section_keyword()
        if kw.value != ":domain":
            raise self.fail(kw, "':domain'")
        domain_name = self.expect_name("a domain name")
        self.expect("rpar", "')'")

        order = {":requirements": 0, ":objects": 1, ":init": 2, ":goal": 3}
        stage = -1
        requirements: tuple[str, ...] = ()
        objects: list[tuple[str, str]] = []
        init: list[Atom] = []
        goal: Formula | None = None
        while self.at("lpar"):
            kw = self.section_keyword()
            rank = order.get(kw.value)
            if rank is None:
                raise ParseError(UNKNOWN_SECTION, kw.line, kw.column, f"unknown or unsupported problem section {kw.describe()}")
            if rank <= stage:
                raise ParseError(UNEXPECTED, kw.line, kw.column, f"section {kw.describe()} is out of order or repeated")
            stage = rank
            if rank == 0:
                requirements = self.requirements()
            elif rank == 1:
                objects = self.typed_list("name", "an object name")
                self.expect("rpar", "')'")
            elif rank == 2:
                while not self.at("rpar"):
                    self.expect("lpar", "'(' starting an initial fact")
                    head = self.peek()
                    if head is not None and head.kind == "name" and head.value in ("and", "not"):
                        raise ParseError(UNEXPECTED, head.line, head.column, "initial state lists positive facts only")
                    init.append(self.atom_body(ground=True))
                self.expect("rpar", "')'")
            else:
                goal = self.formula(ground=True)
                self.expect("rpar", "')'")
        if goal is None:
            tok = self.peek() or self.tokens[-1]
            raise ParseError(UNEXPECTED, tok.line, tok.column, "missing (:goal ...) section")
        self.expect("rpar", "')' closing the problem definition")
        self.finish()
        return ProblemAst(name, domain_name, tuple(objects), tuple(init), goal, requirements)


def _run(text: str, file: str, method: str):
    try:
        return getattr(_Parser(text), method)()
    except ParseError as err:
        err.file = file
        raise


def parse_domain(text: str) -> DomainAst:
    """Parse a domain file; raises :class:`ParseError` on any syntax fault."""
    return _run(text, "domain", "domain")


def parse_problem(text: str) -> ProblemAst:
    """Parse a problem file; raises :class:`ParseError` on any syntax fault."""
    return _run(text, "problem", "problem")
