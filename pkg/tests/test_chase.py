import pytest

from helpers import SECTION41
from omq.chase import (chase_bounded, chase_nr, chase_step, find_triggers,
                       normalize_tgds, satisfies)
from omq.classify import classify
from omq.errors import InactiveTrigger, PreconditionViolated
from omq.evaluate import certain_answers
from omq.model import (OMQ, TGD, Constant, Database, Instance, Null,
                       Variable, atom, tgds_schema)
from omq.parser import parse_program
from omq.testkit import GeneratorConfig, enumerate_databases, random_omq

a, b, c = Constant("a"), Constant("b"), Constant("c")
x, y, z = Variable("x"), Variable("y"), Variable("z")
S41 = parse_program(SECTION41).tgds


def test_find_triggers_simple():
    t = TGD.of([atom("P", x)], [atom("R", x, y)])
    (tr,) = find_triggers(Instance({atom("P", a)}), t)
    assert tr.binding.apply_term(x) == a


def test_find_triggers_empty_instance():
    t = TGD.of([atom("P", x)], [atom("R", x, y)])
    assert find_triggers(Instance(), t) == []


def test_find_triggers_join():
    t = TGD.of([atom("R", x, y), atom("R", y, z)], [atom("Sp", x, z)])
    i = Instance({atom("R", a, b), atom("R", b, c)})
    (tr,) = find_triggers(i, t)
    assert (tr.binding.apply_term(x), tr.binding.apply_term(y),
            tr.binding.apply_term(z)) == (a, b, c)


def test_find_triggers_fact_tgd():
    t = TGD([], [atom("P", z)], [z])
    (tr,) = find_triggers(Instance(), t)
    assert tr.binding.mapping == {}


def test_chase_step_existential():
    t = TGD.of([atom("P", x)], [atom("R", x, y)])
    i = Instance({atom("P", a)})
    (tr,) = find_triggers(i, t)
    out = chase_step(i, tr)
    assert atom("P", a) in out
    new = [at for at in out if at.predicate.name == "R"]
    assert len(new) == 1 and isinstance(new[0].args[1], Null)


def test_chase_step_full_and_fact():
    full = TGD.of([atom("R", x, y)], [atom("P", y)])
    i = Instance({atom("R", a, b)})
    (tr,) = find_triggers(i, full)
    assert chase_step(i, tr).atoms == {atom("R", a, b), atom("P", b)}

    fact = TGD([], [atom("P", z)], [z])
    (tr,) = find_triggers(Instance(), fact)
    out = chase_step(Instance(), tr)
    (only,) = out.atoms
    assert only.predicate.name == "P" and isinstance(only.args[0], Null)


def test_chase_step_inactive_trigger():
    t = TGD.of([atom("P", x)], [atom("R", x, y)])
    (tr,) = find_triggers(Instance({atom("P", a)}), t)
    with pytest.raises(InactiveTrigger):
        chase_step(Instance({atom("P", b)}), tr)


def test_chase_nr_simple():
    res = chase_nr(Database({atom("P", a)}),
                   [TGD.of([atom("P", x)], [atom("R", x, y)])])
    assert res.complete
    assert len(res.instance) == 2


def test_chase_nr_fact_only():
    res = chase_nr(Database(), [TGD([], [atom("P", z)], [z])])
    (only,) = res.instance.atoms
    assert only.predicate.name == "P"


def test_chase_nr_two_strata():
    tgds = [TGD.of([atom("A", x)], [atom("B", x)]),
            TGD.of([atom("B", x)], [atom("C", x, y)])]
    res = chase_nr(Database({atom("A", a)}), tgds)
    assert {at.predicate.name for at in res.instance} == {"A", "B", "C"}
    assert res.complete and satisfies(res.instance, tgds)[0]


def test_chase_nr_rejects_recursive():
    with pytest.raises(PreconditionViolated):
        chase_nr(Database({atom("P", a)}), S41)


def test_chase_bounded_worked_example():
    res = chase_bounded(Database({atom("P", a)}), S41, 2)
    assert not res.complete
    by_level = {}
    for at, lvl in res.level_of.items():
        by_level.setdefault(lvl, set()).add(at.predicate.name)
    assert by_level[0] == {"P"}
    assert by_level[1] == {"R"}
    assert by_level[2] == {"P"}
    assert len(res.instance) == 3
    assert max(res.level_of.values()) == 2


def test_chase_bounded_level_zero():
    db = Database({atom("P", a)})
    res = chase_bounded(db, S41, 0)
    assert res.instance.atoms == db.atoms and not res.complete


def test_chase_bounded_reaches_fixpoint():
    tgds = [TGD.of([atom("R", x, y)], [atom("P", x)])]
    res = chase_bounded(Database({atom("R", a, b)}), tgds, 1)
    assert res.complete
    assert res.instance.atoms == {atom("R", a, b), atom("P", a)}


def test_satisfies_examples():
    t = TGD.of([atom("P", x)], [atom("R", x, y)])
    assert satisfies(Instance({atom("P", a), atom("R", a, b)}), [t])[0]
    ok, witness = satisfies(Instance({atom("P", a)}), [t])
    assert not ok and witness.binding.apply_term(x) == a
    assert satisfies(Instance(), [t])[0]


def test_normalize_identity_on_normal_rules():
    t = TGD.of([atom("P", x)], [atom("R", x, y)])
    assert normalize_tgds([t]) == [t]


def test_normalize_shared_existential():
    t = TGD.of([atom("B", x)], [atom("Sp", x, z), atom("T", z)])
    out = normalize_tgds([t])
    assert len(out) == 3
    assert all(len(u.head) == 1 for u in out)
    assert all(len(u.exist_vars) <= 1 for u in out)
    aux = [p for p in tgds_schema(out) if p.name.startswith("NF")]
    assert len(aux) == 1


def test_normalize_chained_existentials():
    t = TGD([], [atom("R", Variable("z1"), Variable("z2"))],
            [Variable("z1"), Variable("z2")])
    out = normalize_tgds([t])
    assert all(len(u.head) == 1 for u in out)
    assert all(len(u.exist_vars) <= 1 for u in out)
    assert sum(1 for u in out if u.exist_vars) == 2


def test_normalize_repeated_existential_in_one_atom():
    t = TGD.of([atom("B", x)], [atom("R", z, z)])
    out = normalize_tgds([t])
    for u in out:
        if u.exist_vars:
            (zz,) = u.exist_vars
            (head,) = u.head
            assert sum(1 for arg in head.args if arg == zz) == 1


def _answers_over_original(omq, db):
    originals = set(omq.data_schema.predicates) | tgds_schema(omq.tgds)
    res = certain_answers(omq, db, strategy="chase")
    return res


def test_normalize_preserves_certain_answers():
    for seed in range(30):
        cfg = GeneratorConfig(seed=seed, max_predicates=2, max_arity=2,
                              max_tgds=2, target_class="NR")
        omq = random_omq(cfg)
        normal = OMQ(omq.data_schema, tuple(normalize_tgds(omq.tgds)), omq.query)
        if not classify(normal.tgds).non_recursive:
            continue
        for db in enumerate_databases(omq.data_schema, 2, 2):
            assert (certain_answers(omq, db, strategy="chase")
                    == certain_answers(normal, db, strategy="chase")), seed


def test_chase_nr_satisfies_random():
    for seed in range(25):
        cfg = GeneratorConfig(seed=seed, max_predicates=2, max_arity=2,
                              max_tgds=3, target_class="NR")
        omq = random_omq(cfg)
        for db in list(enumerate_databases(omq.data_schema, 2, 2))[:8]:
            res = chase_nr(db, omq.tgds)
            assert satisfies(res.instance, omq.tgds)[0], seed


def test_chase_monotone_in_database():
    for seed in range(10):
        cfg = GeneratorConfig(seed=seed, max_predicates=2, max_arity=2,
                              max_tgds=2, target_class="NR")
        omq = random_omq(cfg)
        dbs = list(enumerate_databases(omq.data_schema, 2, 2))
        for small in dbs[:6]:
            for big in dbs:
                if small.atoms <= big.atoms:
                    assert (certain_answers(omq, small, strategy="chase")
                            <= certain_answers(omq, big, strategy="chase"))


def test_chase_bounded_monotone_in_level():
    db = Database({atom("P", a)})
    prev = set()
    for k in range(4):
        cur = chase_bounded(db, S41, k).instance.atoms
        names = {(at.predicate.name, at.args) for at in cur}
        assert set(prev) <= names
        prev = names
