import pytest
from hypothesis import given
from hypothesis import strategies as st

from egmkit.errors import EmptyQueryError, QuerySyntaxError, UnsupportedConstructError
from egmkit.query import (
    IDENTITY_SYNTAX,
    And,
    BooleanSyntax,
    Not,
    Or,
    Phrase,
    Term,
    eval_query,
    parse_query,
    render_provider_query,
)
from egmkit.records import StudyRecord


def record(title="", abstract=""):
    return StudyRecord(id="r1", title=title, abstract=abstract, doi=None,
                       year=2020, source="test", authors=[])


def test_parse_phrase_and_group():
    expr = parse_query('"cash transfer" AND (school OR attendance)')
    assert expr == And(
        Phrase("any", ("cash", "transfer")),
        Or(Term("any", "school"), Term("any", "attendance")),
    )


def test_parse_field_prefix_and_not():
    expr = parse_query("title:nutrition AND NOT pilot")
    assert expr == And(Term("title", "nutrition"), Not(Term("any", "pilot")))


def test_parse_precedence_not_over_and_over_or():
    expr = parse_query("a OR b AND NOT c")
    assert expr == Or(Term("any", "a"), And(Term("any", "b"), Not(Term("any", "c"))))


def test_parse_leading_operator_fails_at_offset_zero():
    with pytest.raises(QuerySyntaxError) as err:
        parse_query("AND school")
    assert err.value.offset == 0
    assert err.value.expected


def test_parse_error_offsets_are_byte_offsets():
    with pytest.raises(QuerySyntaxError) as err:
        parse_query('école AND AND x')
    # "école" is six bytes in UTF-8; the stray AND starts after "école AND "
    assert err.value.offset == len('école AND '.encode("utf-8"))


def test_parse_rejects_empty_and_pure_exclusion():
    with pytest.raises(EmptyQueryError):
        parse_query("   ")
    with pytest.raises(QuerySyntaxError):
        parse_query("NOT pilot")


def test_parse_rejects_unknown_field_and_unterminated_phrase():
    with pytest.raises(QuerySyntaxError):
        parse_query("journal:nature")
    with pytest.raises(QuerySyntaxError) as err:
        parse_query('"cash transfer')
    assert "unterminated" in str(err.value)


def test_parse_unbalanced_parenthesis():
    with pytest.raises(QuerySyntaxError):
        parse_query("(school OR pilot")


def test_multi_token_bare_word_becomes_phrase():
    assert parse_query("cash-transfer") == Phrase("any", ("cash", "transfer"))


def test_operators_are_case_sensitive():
    # lowercase "and" is an ordinary term, which makes this a syntax error
    # (two adjacent terms), not a conjunction
    with pytest.raises(QuerySyntaxError):
        parse_query("school and pilot")


def test_eval_whole_token_matching():
    assert eval_query(Term("any", "school"), record(title="School feeding works"))
    assert not eval_query(Term("any", "school"), record(title="Preschool feeding"))


def test_eval_phrase_requires_consecutive_tokens():
    q = Phrase("any", ("cash", "transfer"))
    assert not eval_query(q, record(abstract="the transfer of cash arrived"))
    assert eval_query(q, record(abstract="a cash transfer arrived"))


def test_eval_not_and_fields():
    assert not eval_query(Not(Term("title", "pilot")), record(title="Pilot study"))
    assert not eval_query(Term("title", "pilot"), record(abstract="pilot"))
    assert eval_query(Term("abstract", "pilot"), record(abstract="a pilot"))


@st.composite
def query_trees(draw, depth=0):
    words = st.text(alphabet="abcdefg", min_size=1, max_size=6)
    if depth >= 3 or draw(st.booleans()):
        field = draw(st.sampled_from(["title", "abstract", "any"]))
        if draw(st.booleans()):
            return Term(field, draw(words))
        tokens = draw(st.lists(words, min_size=1, max_size=3))
        return Phrase(field, tuple(tokens))
    kind = draw(st.sampled_from(["and", "or", "not"]))
    if kind == "not":
        return Not(draw(query_trees(depth=depth + 1)))
    left = draw(query_trees(depth=depth + 1))
    right = draw(query_trees(depth=depth + 1))
    return And(left, right) if kind == "and" else Or(left, right)


@given(query_trees())
def test_identity_render_round_trips(tree):
    rendered = render_provider_query(tree, IDENTITY_SYNTAX)
    if isinstance(tree, Not):
        tree, rendered = And(tree, tree), render_provider_query(And(tree, tree), IDENTITY_SYNTAX)
    assert parse_query(rendered) == tree


@given(query_trees(), query_trees(), st.text(alphabet="abcdefg ", max_size=40))
def test_eval_connectives_decompose(a, b, text):
    r = record(title=text, abstract=text[::-1])
    assert eval_query(And(a, b), r) == (eval_query(a, r) and eval_query(b, r))
    assert eval_query(Or(a, b), r) == (eval_query(a, r) or eval_query(b, r))
    assert eval_query(Not(a), r) == (not eval_query(a, r))


def test_render_templates():
    syntax = BooleanSyntax()
    assert render_provider_query(
        And(Term("any", "a"), Term("any", "b")), syntax) == "(a AND b)"
    assert render_provider_query(
        Phrase("any", ("cash", "transfer")), syntax) == '"cash transfer"'
    assert render_provider_query(
        Term("title", "nutrition"), syntax) == "title:nutrition"


def test_render_missing_template_is_unsupported():
    no_not = BooleanSyntax(not_=None)
    with pytest.raises(UnsupportedConstructError):
        render_provider_query(Not(Term("any", "x")), no_not)
    no_fields = BooleanSyntax(field_title=None)
    with pytest.raises(UnsupportedConstructError):
        render_provider_query(Term("title", "x"), no_fields)


def test_boolean_syntax_from_dict_rejects_unknown_keys():
    with pytest.raises(ValueError):
        BooleanSyntax.from_dict({"xor": "({L} XOR {R})"})
