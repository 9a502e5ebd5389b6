"""Towers of layered categories and the stage at which a functor is defined.

A :class:`Tower` is a sequence of finite layered categories with transition
functors ``stage[k+1] → stage[k]``; it stands for the inverse limit.  A
continuous functor out of the limit factors through some stage, and
:func:`continuity_stage` finds the earliest one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BadTransition, NotDivisibilityChain, NotFunctorial, NotLayered, SearchBudgetExceeded
from .fincat import FiniteCategory, Functor, compose_functors, cyclic_group_category, identity_functor, is_layered
from .finset import SetFunctor


@dataclass(eq=False)
class Tower:
    stages: list
    transitions: list   # transitions[k] : stages[k+1] -> stages[k]
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.stages)

    def projection(self, top: int, bottom: int) -> Functor:
        """Composite of transitions ``stages[top] → stages[bottom]``."""
        if not 0 <= bottom <= top < len(self.stages):
            raise IndexError(f"no projection from stage {top} to stage {bottom}")
        P = identity_functor(self.stages[top])
        for k in range(top - 1, bottom - 1, -1):
            P = compose_functors(P, self.transitions[k])
        return P


def validate_tower(stages: Sequence[FiniteCategory], transitions: Sequence, meta=None) -> Tower:
    """Every stage must be a layered category and every transition a functor
    between consecutive stages.  Transitions may be functors or
    ``(object_map, morphism_map)`` pairs."""
    stages = list(stages)
    if len(transitions) != max(len(stages) - 1, 0):
        raise BadTransition(f"{len(stages)} stages need {max(len(stages) - 1, 0)} transitions",
                            stages=len(stages), transitions=len(transitions))
    for k, C in enumerate(stages):
        C.validate()
        lay = is_layered(C)
        if not lay:
            raise NotLayered(f"stage {k} has a non-invertible endomorphism", stage=k, endomorphism=lay.endomorphism)
    checked = []
    for k, T in enumerate(transitions):
        if isinstance(T, Functor):
            if not (T.source == stages[k + 1] and T.target == stages[k]):
                raise BadTransition(f"transition {k} has the wrong endpoints", transition=k)
            F = T
        else:
            F = Functor(stages[k + 1], stages[k], T[0], T[1])
        try:
            F.validate()
        except NotFunctorial as exc:
            raise BadTransition(f"transition {k} is not a functor: {exc.message}", transition=k, **exc.details) from exc
        checked.append(F)
    return Tower(stages, checked, dict(meta or {}))


def finite_field_tower(moduli: Sequence[int]) -> Tower:
    """Tower ``B(Z/m_0) ← B(Z/m_1) ← …`` of reductions, for a divisibility
    chain of moduli; a model for the absolute Galois group of a finite field
    with the Frobenius as topological generator."""
    moduli = [int(m) for m in moduli]
    if not moduli or any(m < 1 for m in moduli):
        raise NotDivisibilityChain("moduli must be positive", moduli=moduli)
    for a, b in zip(moduli, moduli[1:]):
        if b % a:
            raise NotDivisibilityChain(f"{a} does not divide {b}", moduli=moduli)
    stages = [cyclic_group_category(m) for m in moduli]
    transitions = [(np.zeros(1), np.arange(moduli[k + 1]) % moduli[k]) for k in range(len(moduli) - 1)]
    frobenius = [1 % m for m in moduli]
    return validate_tower(stages, transitions, meta={"moduli": moduli, "frobenius": frobenius})


@dataclass(frozen=True, eq=False)
class ContinuousFunctorStage:
    stage: int
    factor: SetFunctor          # functor on tower.stages[stage]
    projection: Functor         # stages[given] -> stages[stage]


def _factor_through(P: Functor, F: SetFunctor, budget: int) -> SetFunctor | None:
    """A set functor ``F'`` on ``P.target`` with ``F'∘P = F``, or ``None``."""
    T = P.target
    sizes: list = [None] * T.n_objects
    images: list = [None] * T.n_morphisms
    for x, y in enumerate(P.object_map.tolist()):
        if sizes[y] is None:
            sizes[y] = F.sizes[x]
        elif sizes[y] != F.sizes[x]:
            return None
    for f, g in enumerate(P.morphism_map.tolist()):
        if images[g] is None:
            images[g] = F.images[f]
        elif images[g] != F.images[f]:
            return None
    free_objs = [y for y in range(T.n_objects) if sizes[y] is None]
    bound = F.bound
    nodes = 0
    for choice in itertools.product(range(bound + 1), repeat=len(free_objs)):
        sz = list(sizes)
        for y, s in zip(free_objs, choice):
            sz[y] = s
        free_mors = [g for g in range(T.n_morphisms) if images[g] is None]
        spaces = [list(itertools.product(range(sz[int(T.tgt[g])]), repeat=sz[int(T.src[g])])) for g in free_mors]
        for values in itertools.product(*spaces):
            nodes += 1
            if nodes > budget:
                raise SearchBudgetExceeded("factorization search exceeded its budget", budget=budget)
            im = list(images)
            for g, v in zip(free_mors, values):
                im[g] = v
            cand = SetFunctor(T, tuple(sz), tuple(im))
            try:
                return cand.validate()
            except NotFunctorial:
                continue
    return None


def continuity_stage(tower: Tower, F: SetFunctor, level: int | None = None,
                     budget: int = 1_000_000) -> ContinuousFunctorStage:
    """Earliest stage through which ``F`` (given on ``tower.stages[level]``,
    the top stage by default) factors."""
    top = len(tower) - 1 if level is None else int(level)
    if F.source != tower.stages[top]:
        raise NotFunctorial("functor is not defined on the given stage", stage=top)
    F.validate()
    for j in range(top + 1):
        P = tower.projection(top, j)
        factor = _factor_through(P, F, budget)
        if factor is not None:
            return ContinuousFunctorStage(j, factor, P)
    raise AssertionError("a functor always factors through its own stage")
