import pytest

from helpers import SECTION41, same_disjunct_sets, same_tgd_sets
from omq.errors import (ArityError, ParseError, ReservedNameError,
                        SafetyError)
from omq.model import Constant, Variable, as_ucq
from omq.parser import parse_program, serialize_program
from omq.testkit import GeneratorConfig, random_omq


def test_parse_worked_example():
    prog = parse_program(SECTION41)
    assert {str(p) for p in prog.schema} == {"P/1", "T/1"}
    assert {str(p) for p in prog.inferred} == {"R/2"}
    assert len(prog.tgds) == 3
    fact_free = [t for t in prog.tgds if t.is_fact()]
    assert not fact_free
    q = prog.queries["q"]
    assert len(q) == 1 and q.arity == 1
    (cq,) = q.disjuncts
    assert len(cq.body) == 2
    assert cq.answers == (Variable("x"),)


def test_parse_single_line_with_declared_derived_predicate():
    # the same rules with R declared in the schema block: the declared block
    # is the data schema verbatim, so S here is {P, R, T}
    text = ("schema { P/1, R/2, T/1 } tgds t { P(x) -> exists y . R(x,y). "
            "R(x,y) -> P(y). T(x) -> P(x). } query q(x) :- R(x,y), P(y).")
    prog = parse_program(text)
    assert {p.name for p in prog.schema} == {"P", "R", "T"}
    assert len(prog.tgds) == 3
    assert len(prog.queries["q"].disjuncts[0].body) == 2


def test_parse_boolean_constant_query():
    prog = parse_program("schema { P/1 } query q() :- P(a).")
    (cq,) = prog.queries["q"].disjuncts
    assert cq.answers == ()
    assert {t for at in cq.body for t in at.args} == {Constant("a")}


def test_parse_arity_error():
    with pytest.raises(ArityError):
        parse_program("schema { P/1 } tgds t { P(x,y) -> P(x). }")


def test_parse_fact_tgd():
    prog = parse_program("schema { P/1 } tgds t { true -> exists z . P(z). }")
    (t,) = prog.tgds
    assert t.is_fact() and len(t.exist_vars) == 1


def test_parse_ucq_accumulates_clauses():
    prog = parse_program(
        "schema { P/1, T/1 } query q(x) :- P(x). query q(x) :- T(x).")
    assert len(prog.queries["q"]) == 2


def test_parse_comments_and_numerals():
    prog = parse_program(
        "% header\nschema { Ans/2 } query q() :- Ans(0, 1). % trailing\n")
    (cq,) = prog.queries["q"].disjuncts
    (at,) = cq.body
    assert at.args == (Constant("0"), Constant("1"))


def test_safety_errors():
    with pytest.raises(SafetyError):
        parse_program("schema { P/1 } query q(x) :- P(y).")
    with pytest.raises(SafetyError):
        parse_program("schema { P/1, R/2 } tgds t { P(x) -> R(x,y). }")
    with pytest.raises(SafetyError):
        parse_program("schema { P/1 } database d { P(x). }")


def test_reserved_namespaces_rejected():
    with pytest.raises(ReservedNameError):
        parse_program("schema { P/1 } database d { P($frz0). }")
    with pytest.raises(ReservedNameError):
        parse_program("schema { P/1 } database d { P(_weird). }")


def test_query_arity_conflict():
    with pytest.raises(ArityError):
        parse_program("schema { P/1, R/2 } query q(x) :- P(x). "
                      "query q(x,y) :- R(x,y).")


def test_errors_carry_locations():
    bad = [
        "schema { P/1 }\nquery q(x) :- P(y).",
        "schema { P/1 } tgds t { P(x,y) -> P(x). }",
        "schema { P/1 } database d { P($frz0). }",
        "schema { P/1 } bogus",
    ]
    for text in bad:
        with pytest.raises(ParseError) as e:
            parse_program(text)
        assert e.value.line >= 1 and e.value.col >= 1


def test_roundtrip_worked_example():
    prog = parse_program(SECTION41)
    again = parse_program(serialize_program(prog))
    assert again.schema == prog.schema
    assert same_tgd_sets(again.tgds, prog.tgds)
    assert same_disjunct_sets(again.queries["q"].disjuncts,
                              prog.queries["q"].disjuncts)


def test_roundtrip_empty_blocks_and_databases():
    text = "schema { P/1 }\ntgds t { }\ndatabase d { P(a). }"
    prog = parse_program(text)
    out = serialize_program(prog)
    assert "tgds t { }" in out
    assert "database d {" in out and "P(a)." in out
    again = parse_program(out)
    assert again.databases == prog.databases


def test_roundtrip_random_programs():
    from omq.parser import Program

    for seed in range(25):
        cfg = GeneratorConfig(seed=seed, max_predicates=3, max_arity=3,
                              max_tgds=3, target_class="any")
        omq = random_omq(cfg)
        prog = Program(schema=omq.data_schema, tgds=omq.tgds,
                       queries={"q": as_ucq(omq.query)}, databases={})
        again = parse_program(serialize_program(prog))
        assert again.schema == prog.schema, seed
        assert same_tgd_sets(again.tgds, prog.tgds), seed
        assert same_disjunct_sets(again.queries["q"].disjuncts,
                                  prog.queries["q"].disjuncts), seed


def test_variables_render_as_variables():
    # "o" parses as a constant, so serialization must rename that variable
    from omq.parser import Program
    from omq.testkit import sticky_family

    fam = sticky_family(2)
    prog = Program(schema=fam.data_schema, tgds=fam.tgds,
                   queries={"q": as_ucq(fam.query)}, databases={})
    again = parse_program(serialize_program(prog))
    assert same_tgd_sets(again.tgds, prog.tgds)
