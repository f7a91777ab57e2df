"""Backtracking homomorphism search from atom sets into instances.

The search picks the most constrained pending atom first (fewest matching
facts under the current binding), which keeps desk-scale inputs fast; the
worst case is inherently exponential.
"""

from __future__ import annotations

from typing import AbstractSet, Iterable, Iterator, Mapping

from .model import Atom, Term, Variable


def index_by_predicate(facts: Iterable[Atom]) -> dict:
    idx: dict = {}
    for f in facts:
        idx.setdefault(f.predicate, []).append(f)
    for bucket in idx.values():
        bucket.sort(key=Atom.sort_key)
    return idx


def _match(pattern: Atom, fact: Atom, binding: dict) -> dict | None:
    """New bindings extending ``binding`` so pattern maps onto fact, or None."""
    new: dict = {}
    for p, f in zip(pattern.args, fact.args):
        if isinstance(p, Variable):
            bound = new.get(p, binding.get(p))
            if bound is None:
                new[p] = f
            elif bound != f:
                return None
        elif p != f:
            return None
    return new


def homomorphisms(
    atoms: Iterable[Atom],
    facts: AbstractSet[Atom] | Iterable[Atom],
    binding: Mapping[Variable, Term] | None = None,
    index: dict | None = None,
) -> Iterator[dict]:
    """Yield every mapping of the pattern variables into the facts.

    ``binding`` pre-binds some variables. Yielded dicts include the
    pre-bound entries. The empty pattern yields exactly the initial binding.
    """
    pending = list(atoms)
    if index is None:
        index = index_by_predicate(facts)
    base = dict(binding) if binding else {}

    def candidates(a: Atom, bind: dict) -> list[dict]:
        out = []
        for f in index.get(a.predicate, ()):
            ext = _match(a, f, bind)
            if ext is not None:
                out.append(ext)
        return out

    def search(pending: list[Atom], bind: dict) -> Iterator[dict]:
        if not pending:
            yield dict(bind)
            return
        # most constrained first
        best_i, best_cands = 0, None
        for i, a in enumerate(pending):
            cands = candidates(a, bind)
            if best_cands is None or len(cands) < len(best_cands):
                best_i, best_cands = i, cands
                if not cands:
                    return
        rest = pending[:best_i] + pending[best_i + 1:]
        for ext in best_cands:
            bind.update(ext)
            yield from search(rest, bind)
            for k in ext:
                del bind[k]

    yield from search(pending, base)


def has_homomorphism(atoms, facts, binding=None, index=None) -> bool:
    for _ in homomorphisms(atoms, facts, binding, index):
        return True
    return False
