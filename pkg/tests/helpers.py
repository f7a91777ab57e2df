"""Shared test helpers: naive oracles and structural equality mod renaming."""

from __future__ import annotations

import itertools

from omq.model import (CQ, TGD, Atom, Constant, Instance, Predicate, Variable,
                       active_domain)
from omq.rewrite import cq_isomorphic


def naive_evaluate_cq(q: CQ, instance: Instance) -> frozenset:
    """Exhaustive assignment enumeration; the independent evaluation oracle."""
    if not q.body:
        return frozenset({tuple(q.answers)})
    variables = sorted(q.variables(), key=lambda v: v.name)
    domain = sorted(active_domain(instance), key=repr)
    out = set()
    for values in itertools.product(domain, repeat=len(variables)):
        h = dict(zip(variables, values))
        image = {Atom(a.predicate,
                      tuple(h[t] if isinstance(t, Variable) else t for t in a.args))
                 for a in q.body}
        if image <= instance.atoms:
            tup = tuple(h[t] if isinstance(t, Variable) else t for t in q.answers)
            if all(isinstance(c, Constant) for c in tup):
                out.add(tup)
    return frozenset(out)


def tgd_isomorphic(t1: TGD, t2: TGD) -> bool:
    """Equality modulo bijective variable renaming, respecting the
    body/head split (and thereby frontier and existentials)."""

    def encode(t: TGD) -> CQ:
        shifted = [Atom(Predicate(a.predicate.name + "$h", a.predicate.arity),
                        a.args) for a in t.head]
        return CQ((), list(t.body) + shifted)

    return cq_isomorphic(encode(t1), encode(t2))


def same_tgd_sets(ts1, ts2) -> bool:
    ts1, ts2 = list(ts1), list(ts2)
    if len(ts1) != len(ts2):
        return False
    remaining = list(ts2)
    for t in ts1:
        for i, u in enumerate(remaining):
            if tgd_isomorphic(t, u):
                del remaining[i]
                break
        else:
            return False
    return True


def same_disjunct_sets(ds1, ds2) -> bool:
    ds1, ds2 = list(ds1), list(ds2)
    if len(ds1) != len(ds2):
        return False
    remaining = list(ds2)
    for d in ds1:
        for i, e in enumerate(remaining):
            if cq_isomorphic(d, e):
                del remaining[i]
                break
        else:
            return False
    return True


SECTION41 = """
schema { P/1, T/1 }
tgds t {
  P(x) -> exists y . R(x,y).
  R(x,y) -> P(y).
  T(x) -> P(x).
}
query q(x) :- R(x,y), P(y).
"""
