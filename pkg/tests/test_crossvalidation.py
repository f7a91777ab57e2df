"""Cross-validation sweeps beyond the per-module examples: recursive rule
sets checked against the bounded chase, constant-bearing rewriting, 0-ary
predicates end to end, and the reductions on recursive inputs.
"""

import random

from helpers import SECTION41
from omq.chase import chase_bounded
from omq.classify import classify
from omq.contain import (brute_force_contains, coeval_to_cocontainment,
                         contains)
from omq.evaluate import certain_answers, evaluate_ucq
from omq.model import (CQ, OMQ, TGD, UCQ, Atom, Constant, Database, Predicate,
                       Schema, Variable, atom)
from omq.parser import parse_program, serialize_program
from omq.rewrite import xrewrite
from omq.testkit import enumerate_databases

a, b = Constant("a"), Constant("b")
x, y, z = Variable("x"), Variable("y"), Variable("z")
PROG41 = parse_program(SECTION41)
OMQ41 = PROG41.omq("q")


def test_rewriting_agrees_with_bounded_chase_on_recursive_rules():
    # the rules are recursive (infinite chase), so compare the rewriting
    # against increasingly deep bounded chases: bounded answers may only
    # approach the certain answers from below and converge
    for db in enumerate_databases(OMQ41.data_schema, 2, 3):
        certain = certain_answers(OMQ41, db, strategy="rewriting")
        prev: frozenset = frozenset()
        for k in (0, 1, 2, 4, 6):
            res = chase_bounded(db, OMQ41.tgds, k)
            approx = evaluate_ucq(OMQ41.query, res.instance)
            assert prev <= approx <= certain
            prev = approx
        assert prev == certain, sorted(db.atoms)


def test_rewriting_with_constant_head_rule():
    # rules that emit constants force answer variables onto constants
    tgds = (TGD.of([atom("T", x)], [atom("P", a)]),)
    omq = OMQ(Schema([Predicate("P", 1), Predicate("T", 1)]), tgds,
              CQ((x,), [atom("P", x)]))
    disjuncts = xrewrite(omq)
    bodies = {(tuple(d.answers), tuple(sorted(d.body))) for d in disjuncts}
    assert any(ans == (a,) for ans, _ in bodies)
    assert certain_answers(omq, Database({atom("T", b)})) == {(a,)}
    assert certain_answers(omq, Database({atom("P", b)})) == {(b,)}


def test_rewriting_constant_clash_blocks_resolution():
    tgds = (TGD.of([atom("T", x)], [atom("P", a)]),)
    omq = OMQ(Schema([Predicate("P", 1), Predicate("T", 1)]), tgds,
              CQ((), [atom("P", b)]))
    assert certain_answers(omq, Database({atom("T", a)})) == frozenset()
    assert certain_answers(omq, Database({atom("P", b)})) == {()}


def test_zero_ary_predicates_end_to_end():
    text = """
    schema { Flag/0, P/1 }
    tgds t { P(x) -> Flag(). }
    query q() :- Flag().
    database d { P(a). }
    database e { }
    """
    prog = parse_program(text)
    omq = prog.omq("q")
    assert certain_answers(omq, prog.databases["d"], strategy="chase") == {()}
    assert certain_answers(omq, prog.databases["e"], strategy="chase") == frozenset()
    assert certain_answers(omq, prog.databases["d"], strategy="rewriting") == {()}
    again = parse_program(serialize_program(prog))
    assert again.schema == prog.schema


def test_zero_ary_database_enumeration():
    schema = Schema([Predicate("Flag", 0), Predicate("P", 1)])
    dbs = list(enumerate_databases(schema, 1, 2))
    # ground atoms: Flag() and P(c1)
    assert len(dbs) == 4


def test_coeval_on_recursive_sticky_rules():
    # the worked-example rules are recursive but sticky, so the starred
    # set plus fact tgds stays in a supported class
    for db_atoms, tup, expected in [
        ({atom("T", b)}, (b,), True),
        ({atom("P", a)}, (a,), True),
        ({atom("P", a)}, (a,), True),
    ]:
        db = Database(db_atoms)
        left, right = coeval_to_cocontainment(OMQ41, db, tup)
        assert classify(left.tgds).ucq_rewritable
        assert (not contains(left, right).contained) is expected


def test_multi_disjunct_input_rewriting_dedups_across_disjuncts():
    u = UCQ([CQ((x,), [atom("P", x)]),
             CQ((y,), [atom("T", y)])])
    omq = OMQ(OMQ41.data_schema, OMQ41.tgds, u)
    disjuncts = xrewrite(omq)
    # both disjuncts rewrite into {P, T} pairs; the union deduplicates
    assert len(disjuncts) == 2


def test_exists_list_roundtrip():
    text = ("schema { B/1 }\n"
            "tgds t { B(x) -> exists z1, z2 . R(z1, z2, x). }\n")
    prog = parse_program(text)
    (t,) = prog.tgds
    assert len(t.exist_vars) == 2
    again = parse_program(serialize_program(prog))
    assert len(again.tgds[0].exist_vars) == 2


def test_brute_force_on_boolean_pair_with_facts():
    fact = TGD([], [atom("P", z)], [z])
    q1 = OMQ(Schema([Predicate("P", 1)]), (fact,), CQ((), [atom("P", x)]))
    q2 = OMQ(Schema([Predicate("P", 1)]), (), CQ((), [atom("P", x)]))
    # q1 holds everywhere (the fact rule fires on the empty database)
    direct = contains(q1, q2)
    oracle = brute_force_contains(q1, q2, 2, 2)
    assert direct.contained == oracle.contained is False
    db, tup = direct.counterexample
    assert db.atoms == frozenset() and tup == ()
    reverse = contains(q2, q1)
    assert reverse.contained


def test_random_recursive_linear_rewriting_sound_and_complete():
    # recursive linear sets: validate rewriting answers against a deep
    # bounded chase on every small database
    rng = random.Random(2)
    schema = Schema([Predicate("E", 2), Predicate("M", 1)])
    tgds = (TGD.of([atom("M", x)], [atom("E", x, y)]),
            TGD.of([atom("E", x, y)], [atom("M", y)]),)
    assert not classify(tgds).non_recursive
    assert classify(tgds).linear
    omq = OMQ(schema, tgds, CQ((x,), [atom("E", x, y), atom("M", y)]))
    for db in enumerate_databases(schema, 2, 2):
        certain = certain_answers(omq, db, strategy="rewriting")
        deep = chase_bounded(db, tgds, 6)
        approx = evaluate_ucq(omq.query, deep.instance)
        assert approx == certain, sorted(db.atoms)
