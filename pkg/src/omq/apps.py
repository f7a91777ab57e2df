"""Static-analysis applications: connected components of atom sets and
queries, and the distribution-over-components decision.

A query distributes over components when its answer over any database equals
the union of its answers over the database's maximally connected components;
that holds exactly when the query is unsatisfiable or some component of the
query (kept with the full answer tuple) is contained in the whole query.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .classify import classify
from .contain import contains, is_unsatisfiable, ucq_omq_to_cq_omq
from .errors import EmptyBody, UnsupportedClass, ZeroAryAtom
from .evaluate import certain_answers
from .model import CQ, OMQ, UCQ, Atom, Database


def components(atoms: Iterable[Atom]) -> list[frozenset[Atom]]:
    """The unique partition of an atom set into maximal connected parts,
    where atoms connect through shared terms. 0-ary atoms are rejected."""
    atoms = list(atoms)
    for a in atoms:
        if a.predicate.arity == 0:
            raise ZeroAryAtom(f"component of 0-ary atom {a} is undefined")
    parent: dict = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for a in atoms:
        parent.setdefault(a, a)
        for t in a.args:
            parent.setdefault(t, t)
            union(a, t)
    groups: dict = {}
    for a in atoms:
        groups.setdefault(find(a), set()).add(a)
    out = [frozenset(g) for g in groups.values()]
    out.sort(key=lambda g: min(a.sort_key() for a in g))
    return out


@dataclass(frozen=True)
class CQComponents:
    """Components of a query body; each safe component keeps the full answer
    tuple. A component missing some answer variable cannot be a query and is
    reported in ``unsafe`` instead."""

    safe: tuple[CQ, ...]
    unsafe: tuple[frozenset[Atom], ...]


def cq_components(q: CQ) -> CQComponents:
    if not q.body:
        raise EmptyBody("the empty-body query has no components")
    safe: list[CQ] = []
    unsafe: list[frozenset[Atom]] = []
    answer_vars = q.answer_variables()
    for comp in components(q.body):
        comp_vars = set()
        for a in comp:
            comp_vars.update(a.variables())
        if answer_vars <= comp_vars:
            safe.append(CQ(q.answers, comp))
        else:
            unsafe.append(comp)
    return CQComponents(tuple(safe), tuple(unsafe))


@dataclass(frozen=True)
class DistributionVerdict:
    distributes: bool
    unsatisfiable: bool = False
    witness: Optional[CQ] = None  # the contained component, when one exists
    unsafe_components: tuple[frozenset[Atom], ...] = ()


def distributes(omq: OMQ, budget: Optional[int] = None) -> DistributionVerdict:
    """Decide distribution over components for a UCQ-rewritable query.

    UCQ queries are first turned into CQ queries via the or-gadget. The
    always-true query never distributes (its answer over the empty database
    is non-empty while the union over no components is empty).
    """
    if isinstance(omq.query, UCQ) and len(omq.query) > 1:
        omq = ucq_omq_to_cq_omq(omq)
    query = omq.query
    if isinstance(query, UCQ):
        query = query.disjuncts[0]
        omq = OMQ(omq.data_schema, omq.tgds, query)
    if not classify(omq.tgds).ucq_rewritable:
        raise UnsupportedClass(
            "distribution is decided for linear/non-recursive/sticky sets only")
    if is_unsatisfiable(omq, budget=budget):
        return DistributionVerdict(True, unsatisfiable=True)
    if query.is_true_query():
        return DistributionVerdict(False)
    parts = cq_components(query)
    for comp in parts.safe:
        sub_omq = OMQ(omq.data_schema, omq.tgds, comp)
        if contains(sub_omq, omq, budget=budget).contained:
            return DistributionVerdict(True, witness=comp,
                                       unsafe_components=parts.unsafe)
    return DistributionVerdict(False, unsafe_components=parts.unsafe)


def distribution_definitional_check(
        omq: OMQ, max_constants: int, max_atoms: int,
        budget: Optional[int] = None) -> tuple[bool, Optional[Database]]:
    """Bounded check of the defining equation Q(D) = Q(D_1) u ... u Q(D_n)
    over every database within the enumeration bounds; returns the first
    violating database, if any."""
    from .testkit import enumerate_databases

    for db in enumerate_databases(omq.data_schema, max_constants, max_atoms):
        whole = certain_answers(omq, db, budget=budget)
        union: set = set()
        if db.atoms:
            for comp in components(db.atoms):
                union |= certain_answers(omq, Database(comp), budget=budget)
        if whole != frozenset(union):
            return False, db
    return True, None
