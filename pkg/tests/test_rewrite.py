import pytest

from helpers import SECTION41, same_disjunct_sets
from omq.chase import normalize_tgds
from omq.errors import BudgetExhausted, UnsupportedClass
from omq.evaluate import certain_answers, evaluate_ucq
from omq.model import (CQ, OMQ, TGD, UCQ, Constant, Database, Predicate,
                       Schema, Variable, atom)
from omq.parser import parse_program
from omq.rewrite import (cq_isomorphic, factorize_step, is_applicable,
                         is_factorizable, mgu, rewrite_step, witness_bound,
                         xrewrite)
from omq.testkit import GeneratorConfig, enumerate_databases, random_omq

a, b = Constant("a"), Constant("b")
u, v, w, x, y, z = (Variable(n) for n in "uvwxyz")
PROG41 = parse_program(SECTION41)
OMQ41 = PROG41.omq("q")


def test_mgu_collapses_to_one_variable():
    g = mgu([atom("R", x, y), atom("R", z, z)])
    images = {g.apply_atom(atom("R", x, y)), g.apply_atom(atom("R", z, z))}
    assert len(images) == 1
    (image,) = images
    assert len(set(image.args)) == 1


def test_mgu_constant_clash():
    assert mgu([atom("P", a), atom("P", b)]) is None
    assert mgu([atom("P", a), atom("R", a, b)]) is None


def test_mgu_mixed_bindings():
    g = mgu([atom("R", x, a), atom("R", b, y)])
    assert g.apply_term(x) == b and g.apply_term(y) == a
    assert g.apply_atom(atom("R", x, a)) == atom("R", b, a)


def test_mgu_factors_other_unifiers():
    atoms = [atom("R", x, y), atom("R", z, z)]
    g = mgu(atoms)
    # another unifier: everything to the constant a
    other = {x: a, y: a, z: a}
    # gamma' mapping g's representative to a reproduces it
    rep = g.apply_term(x)
    for term, want in other.items():
        got = g.apply_term(term)
        assert got == rep
    # so other = {rep -> a} composed with g


def test_applicability_worked_example():
    # resolving P(y) with R(x,y) -> P(y) is allowed
    sigma2 = TGD.of([atom("R", x, y)], [atom("P", y)])
    q = CQ((x,), [atom("R", x, y), atom("P", y)])
    assert is_applicable(sigma2, [atom("P", y)], q)
    # but resolving R(x,y) with P(x) -> exists y R(x,y) is blocked: the
    # shared variable y sits at the existential position
    sigma1 = TGD.of([atom("P", x)], [atom("R", x, y)])
    assert not is_applicable(sigma1, [atom("R", x, y)], q)


def test_applicability_shared_vs_unshared_existential():
    sigma = TGD.of([atom("P", u, v)], [atom("R", w, u)])
    assert sigma.exist_vars == frozenset({w})
    q_shared = CQ((), [atom("R", x, y), atom("R", x, z)])
    assert not is_applicable(sigma, [atom("R", x, y)], q_shared)
    q_free = CQ((), [atom("R", x, y)])
    assert is_applicable(sigma, [atom("R", x, y)], q_free)


def test_applicability_constant_at_existential_position():
    sigma = TGD.of([atom("P", u)], [atom("R", u, w)])
    q = CQ((), [atom("R", x, a)])
    assert not is_applicable(sigma, [atom("R", x, a)], q)
    q2 = CQ((), [atom("R", a, x)])
    assert is_applicable(sigma, [atom("R", a, x)], q2)


def test_factorizability_examples():
    sigma = TGD.of([atom("P", u, v)], [atom("R", w, u)])
    q = CQ((), [atom("R", x, y), atom("R", x, z)])
    assert is_factorizable([atom("R", x, y), atom("R", x, z)], sigma, q)
    full = TGD.of([atom("P", u, v)], [atom("R", u, v)])
    assert not is_factorizable([atom("R", x, y), atom("R", x, z)], full, q)
    q2 = CQ((), [atom("R", x, y), atom("R", y, z)])
    assert not is_factorizable([atom("R", x, y), atom("R", y, z)], sigma, q2)


def test_factorize_step_collapses():
    q = CQ((), [atom("R", x, y), atom("R", x, z)])
    out = factorize_step(q, [atom("R", x, y), atom("R", x, z)])
    assert len(out.body) == 1


def test_factorize_step_answer_variable_survives():
    q = CQ((w,), [atom("R", x, w), atom("R", x, y)])
    out = factorize_step(q, sorted(q.body))
    assert out.answers == (w,)
    assert out.body == frozenset({atom("R", x, w)})


def test_rewrite_step_worked_example():
    sigma2 = TGD.of([atom("R", x, y)], [atom("P", y)])
    q = CQ((x,), [atom("R", x, y), atom("P", y)])
    out = rewrite_step(q, [atom("P", y)], sigma2, 1)
    assert out.answers == (x,)
    assert len(out.body) == 2
    preds = {at.predicate.name for at in out.body}
    assert preds == {"R"}
    # join on the second position of R
    (a1, a2) = sorted(out.body)
    assert a1.args[1] == a2.args[1]


def test_rewrite_step_final_steps():
    sigma3 = TGD.of([atom("T", x)], [atom("P", x)])
    q = CQ((x,), [atom("P", x)])
    out = rewrite_step(q, [atom("P", x)], sigma3, 4)
    assert cq_isomorphic(out, CQ((x,), [atom("T", x)]))


def test_rewrite_step_with_fact_tgd_empties_body():
    fact = TGD([], [atom("P", z)], [z])
    q = CQ((), [atom("P", y)])
    assert is_applicable(fact, [atom("P", y)], q)
    out = rewrite_step(q, [atom("P", y)], fact, 1)
    assert out.body == frozenset() and out.answers == ()


def test_xrewrite_worked_example_exact():
    disjuncts = xrewrite(OMQ41)
    expected = [CQ((x,), [atom("P", x)]), CQ((x,), [atom("T", x)])]
    assert same_disjunct_sets(disjuncts, expected)


def test_xrewrite_no_tgds_identity():
    q = CQ((x,), [atom("P", x)])
    omq = OMQ(Schema([Predicate("P", 1)]), (), q)
    assert xrewrite(omq) == (q,)


def test_xrewrite_single_step_cross_checked_by_chase():
    schema = Schema([Predicate("A", 1), Predicate("B", 1)])
    omq = OMQ(schema, (TGD.of([atom("A", x)], [atom("B", x)]),),
              CQ((x,), [atom("B", x)]))
    disjuncts = xrewrite(omq)
    assert same_disjunct_sets(
        disjuncts, [CQ((x,), [atom("B", x)]), CQ((x,), [atom("A", x)])])
    for db in enumerate_databases(schema, 1, 2):
        assert (evaluate_ucq(UCQ(disjuncts), db.as_instance())
                == certain_answers(omq, db, strategy="chase"))


def test_xrewrite_idempotent_on_disjuncts():
    for d in xrewrite(OMQ41):
        omq = OMQ(OMQ41.data_schema, (), d)
        assert xrewrite(omq) == (d,)


def test_xrewrite_deduplicates_modulo_renaming():
    disjuncts = xrewrite(OMQ41)
    for i, d1 in enumerate(disjuncts):
        for d2 in disjuncts[i + 1:]:
            assert not cq_isomorphic(d1, d2)


def test_xrewrite_budget_exhausted():
    with pytest.raises(BudgetExhausted) as e:
        xrewrite(OMQ41, budget=1)
    assert isinstance(e.value.partial, tuple)


def test_xrewrite_true_disjunct_short_circuits():
    schema = Schema([Predicate("P", 1)])
    fact = TGD([], [atom("P", z)], [z])
    omq = OMQ(schema, (fact,), CQ((), [atom("P", y)]))
    disjuncts = xrewrite(omq)
    assert disjuncts == (CQ((), ()),)
    assert evaluate_ucq(UCQ(disjuncts), Database().as_instance()) == {()}


def test_witness_bound_linear():
    wb = witness_bound(OMQ41)
    assert wb.value == 2 and wb.formula == "linear"


def test_witness_bound_non_recursive():
    # sch(Sigma) = {A, B, C}, max body 2, |q| = 1 -> 1 * 2^3 = 8
    tgds = (TGD.of([atom("A", x, y), atom("A", y, z)], [atom("B", x, z)]),
            TGD.of([atom("B", x, y), atom("B", y, z)], [atom("C", x, z)]))
    schema = Schema([Predicate("A", 2), Predicate("B", 2), Predicate("C", 2)])
    omq = OMQ(schema, tgds, CQ((), [atom("C", x, y)]))
    wb = witness_bound(omq)
    assert wb.formula == "non-recursive" and wb.value == 8


def test_witness_bound_sticky():
    # one binary data predicate, |T(q)| = 2, no rule constants -> 1*(2+1)^2 = 9
    tgds = (TGD.of([atom("R", x, y), atom("R", x, z)], [atom("R", x, w)]),)
    schema = Schema([Predicate("R", 2)])
    omq = OMQ(schema, tgds, CQ((x,), [atom("R", x, y)]))
    from omq.classify import classify
    rep = classify(tgds)
    assert rep.sticky and not rep.linear and not rep.non_recursive
    wb = witness_bound(omq)
    assert wb.formula == "sticky" and wb.value == 9


def test_witness_bound_unsupported():
    # full recursive with a marked join variable: none of L/NR/S
    tgds = (TGD.of([atom("R", x, y), atom("R", y, z)], [atom("R", x, z)]),)
    omq = OMQ(Schema([Predicate("R", 2)]), tgds, CQ((), [atom("R", x, y)]))
    with pytest.raises(UnsupportedClass):
        witness_bound(omq)


def test_linear_disjuncts_never_grow():
    for seed in range(30):
        cfg = GeneratorConfig(seed=seed, max_predicates=2, max_arity=2,
                              max_tgds=3, max_query_atoms=2, target_class="L")
        omq = random_omq(cfg)
        size = max(len(d.body) for d in
                   (omq.query.disjuncts if isinstance(omq.query, UCQ)
                    else [omq.query]))
        for d in xrewrite(omq):
            assert len(d.body) <= size, seed


def test_cq_isomorphic_basics():
    q1 = CQ((x,), [atom("R", x, y)])
    q2 = CQ((u,), [atom("R", u, v)])
    assert cq_isomorphic(q1, q2)
    q3 = CQ((x,), [atom("R", x, x)])
    assert not cq_isomorphic(q1, q3)
    q4 = CQ((x,), [atom("R", x, a)])
    q5 = CQ((x,), [atom("R", x, b)])
    assert not cq_isomorphic(q4, q5)
    # answer alignment matters
    q6 = CQ((x, y), [atom("R", x, y)])
    q7 = CQ((y, x), [atom("R", x, y)])
    assert not cq_isomorphic(q6, q7)
    assert cq_isomorphic(q6, CQ((u, v), [atom("R", u, v)]))


def test_normal_form_required_for_position():
    multi = TGD.of([atom("B", x)], [atom("Sp", x, z), atom("T", z)])
    (first, *_rest) = normalize_tgds([multi])
    assert len(first.head) == 1
