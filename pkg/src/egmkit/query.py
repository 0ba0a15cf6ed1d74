"""Boolean query AST: parsing, local evaluation, and provider rendering.

Grammar (operators are case-sensitive upper-case):

    query  := or
    or     := and (OR and)*
    and    := not (AND not)*
    not    := NOT not | atom
    atom   := '(' or ')' | [field ':'] ( '"' phrase '"' | word )
    field  := 'title' | 'abstract'

NOT binds tightest, then AND, then OR. Bare words default to field "any"
(title or abstract). A bare word that normalizes to several tokens (e.g.
"cash-transfer") becomes a phrase. A query that is nothing but an
exclusion is rejected: it matches no retrievable set.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .errors import EmptyQueryError, QuerySyntaxError, UnsupportedConstructError
from .records import StudyRecord
from .textprep import MATCH_OPTIONS, tokenize

FIELDS = ("title", "abstract", "any")


@dataclass(frozen=True)
class Term:
    field: str
    text: str


@dataclass(frozen=True)
class Phrase:
    field: str
    tokens: tuple[str, ...]


@dataclass(frozen=True)
class And:
    left: "QueryExpr"
    right: "QueryExpr"


@dataclass(frozen=True)
class Or:
    left: "QueryExpr"
    right: "QueryExpr"


@dataclass(frozen=True)
class Not:
    child: "QueryExpr"


QueryExpr = Union[Term, Phrase, And, Or, Not]


# --- lexer ---

_OPERATORS = {"AND", "OR", "NOT"}
_WORD_CHARS_END = set(' \t\r\n()":')


@dataclass(frozen=True)
class _Tok:
    kind: str  # LPAREN RPAREN AND OR NOT WORD PHRASE FIELD
    text: str
    offset: int  # byte offset into the source


def _byte_offset(source: str, pos: int) -> int:
    return len(source[:pos].encode("utf-8"))


def _lex(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, n = 0, len(source)
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
            continue
        off = _byte_offset(source, i)
        if c == "(":
            toks.append(_Tok("LPAREN", "(", off))
            i += 1
        elif c == ")":
            toks.append(_Tok("RPAREN", ")", off))
            i += 1
        elif c == '"':
            end = source.find('"', i + 1)
            if end < 0:
                raise QuerySyntaxError("unterminated phrase", off, expected='closing \'"\'')
            toks.append(_Tok("PHRASE", source[i + 1:end], off))
            i = end + 1
        elif c == ":":
            raise QuerySyntaxError("unexpected ':'", off,
                                   expected="a 'title:' or 'abstract:' prefix")
        else:
            j = i
            while j < n and source[j] not in _WORD_CHARS_END:
                j += 1
            word = source[i:j]
            if j < n and source[j] == ":":
                if word in ("title", "abstract"):
                    toks.append(_Tok("FIELD", word, off))
                    i = j + 1
                    continue
                raise QuerySyntaxError(f"unknown field '{word}'", off,
                                       expected="'title' or 'abstract'")
            if word in _OPERATORS:
                toks.append(_Tok(word, word, off))
            else:
                toks.append(_Tok("WORD", word, off))
            i = j
    return toks


# --- parser ---

class _Parser:
    def __init__(self, source: str, toks: list[_Tok]):
        self.source = source
        self.toks = toks
        self.pos = 0

    def peek(self) -> _Tok | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self) -> _Tok:
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def _end_offset(self) -> int:
        return _byte_offset(self.source, len(self.source))

    def parse(self) -> QueryExpr:
        expr = self.parse_or()
        tok = self.peek()
        if tok is not None:
            raise QuerySyntaxError(f"unexpected '{tok.text}'", tok.offset,
                                   expected="end of query, AND, or OR")
        return expr

    def parse_or(self) -> QueryExpr:
        left = self.parse_and()
        while (tok := self.peek()) is not None and tok.kind == "OR":
            self.take()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> QueryExpr:
        left = self.parse_not()
        while (tok := self.peek()) is not None and tok.kind == "AND":
            self.take()
            left = And(left, self.parse_not())
        return left

    def parse_not(self) -> QueryExpr:
        tok = self.peek()
        if tok is not None and tok.kind == "NOT":
            self.take()
            return Not(self.parse_not())
        return self.parse_atom()

    def parse_atom(self) -> QueryExpr:
        tok = self.peek()
        if tok is None:
            raise QuerySyntaxError("unexpected end of query", self._end_offset(),
                                   expected="a term, phrase, or '('")
        if tok.kind == "LPAREN":
            self.take()
            expr = self.parse_or()
            closing = self.peek()
            if closing is None or closing.kind != "RPAREN":
                off = closing.offset if closing else self._end_offset()
                raise QuerySyntaxError("unbalanced parenthesis", off, expected="')'")
            self.take()
            return expr

        field = "any"
        if tok.kind == "FIELD":
            field = self.take().text
            tok = self.peek()
            if tok is None:
                raise QuerySyntaxError("field prefix without a term", self._end_offset(),
                                       expected="a term or phrase")

        if tok.kind == "PHRASE":
            self.take()
            tokens = tokenize(tok.text, MATCH_OPTIONS)
            if not tokens:
                raise QuerySyntaxError("empty phrase", tok.offset, expected="phrase words")
            return Phrase(field, tuple(tokens))
        if tok.kind == "WORD":
            self.take()
            tokens = tokenize(tok.text, MATCH_OPTIONS)
            if not tokens:
                raise QuerySyntaxError(f"term '{tok.text}' has no searchable characters",
                                       tok.offset, expected="a term")
            if len(tokens) == 1:
                return Term(field, tokens[0])
            return Phrase(field, tuple(tokens))
        raise QuerySyntaxError(f"unexpected '{tok.text}'", tok.offset,
                               expected="a term, phrase, or '('")


def parse_query(source: str) -> QueryExpr:
    if not source or not source.strip():
        raise EmptyQueryError("query is empty")
    expr = _Parser(source, _lex(source)).parse()
    if isinstance(expr, Not):
        raise QuerySyntaxError("query cannot be a pure exclusion", 0,
                               expected="at least one positive term")
    return expr


# --- evaluation ---

def _contains_consecutive(haystack: list[str], needle: tuple[str, ...]) -> bool:
    n, m = len(haystack), len(needle)
    if m == 0 or m > n:
        return False
    first = needle[0]
    for i in range(n - m + 1):
        if haystack[i] == first and tuple(haystack[i:i + m]) == needle:
            return True
    return False


def eval_query(q: QueryExpr, record: StudyRecord) -> bool:
    """Case-insensitive whole-token matching against the record's tokenized
    title/abstract; phrases must appear as consecutive tokens within one
    field. Total: never raises."""
    fields = {
        "title": tokenize(record.title or "", MATCH_OPTIONS),
        "abstract": tokenize(record.abstract or "", MATCH_OPTIONS),
    }

    def ev(node: QueryExpr) -> bool:
        if isinstance(node, Term):
            targets = fields.values() if node.field == "any" else (fields[node.field],)
            return any(node.text in toks for toks in targets)
        if isinstance(node, Phrase):
            targets = fields.values() if node.field == "any" else (fields[node.field],)
            return any(_contains_consecutive(toks, node.tokens) for toks in targets)
        if isinstance(node, And):
            return ev(node.left) and ev(node.right)
        if isinstance(node, Or):
            return ev(node.left) or ev(node.right)
        if isinstance(node, Not):
            return not ev(node.child)
        raise TypeError(f"not a query node: {node!r}")

    return ev(q)


# --- provider rendering ---

@dataclass(frozen=True)
class BooleanSyntax:
    """Render templates per node kind; None marks the construct unsupported.

    Placeholders: {L}/{R} in and_/or_, {X} in not_ and the field templates,
    {TOKENS} (space-joined) in phrase, {TERM} in term.
    """
    and_: str | None = "({L} AND {R})"
    or_: str | None = "({L} OR {R})"
    not_: str | None = "(NOT {X})"
    phrase: str | None = '"{TOKENS}"'
    term: str | None = "{TERM}"
    field_title: str | None = "title:{X}"
    field_abstract: str | None = "abstract:{X}"

    @classmethod
    def from_dict(cls, d: dict) -> "BooleanSyntax":
        known = {"and", "or", "not", "phrase", "term", "field_title", "field_abstract"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown boolean_syntax keys: {sorted(unknown)}")
        return cls(
            and_=d.get("and"), or_=d.get("or"), not_=d.get("not"),
            phrase=d.get("phrase"), term=d.get("term", "{TERM}"),
            field_title=d.get("field_title"), field_abstract=d.get("field_abstract"),
        )

    def to_dict(self) -> dict:
        return {
            "and": self.and_, "or": self.or_, "not": self.not_,
            "phrase": self.phrase, "term": self.term,
            "field_title": self.field_title, "field_abstract": self.field_abstract,
        }


# Identity templates: render_provider_query followed by parse_query
# round-trips to a structurally equal tree.
IDENTITY_SYNTAX = BooleanSyntax()


def render_provider_query(q: QueryExpr, syntax: BooleanSyntax) -> str:
    """Deterministic structural rendering with the provider's templates.

    Raises UnsupportedConstructError when the query uses a node kind the
    provider has no template for.
    """
    def need(template: str | None, kind: str) -> str:
        if template is None:
            raise UnsupportedConstructError(f"provider syntax has no template for {kind}")
        return template

    def scope(field: str, rendered: str, kind: str) -> str:
        if field == "any":
            return rendered
        template = syntax.field_title if field == "title" else syntax.field_abstract
        return need(template, f"{kind} scoped to field '{field}'").replace("{X}", rendered)

    def render(node: QueryExpr) -> str:
        if isinstance(node, Term):
            out = need(syntax.term, "terms").replace("{TERM}", node.text)
            return scope(node.field, out, "a term")
        if isinstance(node, Phrase):
            out = need(syntax.phrase, "phrases").replace("{TOKENS}", " ".join(node.tokens))
            return scope(node.field, out, "a phrase")
        if isinstance(node, And):
            t = need(syntax.and_, "AND")
            return t.replace("{L}", render(node.left)).replace("{R}", render(node.right))
        if isinstance(node, Or):
            t = need(syntax.or_, "OR")
            return t.replace("{L}", render(node.left)).replace("{R}", render(node.right))
        if isinstance(node, Not):
            return need(syntax.not_, "NOT").replace("{X}", render(node.child))
        raise TypeError(f"not a query node: {node!r}")

    return render(q)
