"""Composition operators over lingos.

Four ways of building a new lingo from existing ones:

* horizontal: behave as one of k branch lingos, the branch picked per
  message by a biased dice over the shared seed;
* functional: pipeline two lingos, encoding through both and decoding in
  reverse order;
* product: transform independent payload components side by side;
* tupling: fan one payload through every branch, decode via the first.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import DecodeFailure, DefaultFallback, Lingo, SpaceViolation
from .rng import BadBias, throw_biased
from .values import (
    Pair,
    PairSpace,
    Tagged,
    TaggedSpace,
    Value,
    space_cardinality,
    space_contains,
)


@dataclass(frozen=True)
class HorizontalSpec:
    """Branches plus per-branch default wire values and the dice bias."""

    branches: tuple[Lingo, ...]
    defaults: tuple[Value, ...]
    bias: tuple[int, ...]

    def validate(self) -> None:
        k = len(self.branches)
        if k < 2:
            raise SpaceViolation("horizontal composition needs >= 2 branches")
        if len(self.defaults) != k or len(self.bias) != k:
            raise SpaceViolation("defaults and bias must match branch count")
        if any(b < 1 for b in self.bias):
            raise BadBias(f"all bias weights must be >= 1, got {self.bias}")
        first = self.branches[0]
        for lingo in self.branches:
            if lingo.input_space != first.input_space:
                raise SpaceViolation("branches must share the input space")
            if (lingo.ingress_arity, lingo.egress_arity) != (1, 1):
                raise SpaceViolation("horizontal branches must have arities 1/1")
        for lingo, d0 in zip(self.branches, self.defaults):
            if not space_contains(lingo.output_space, d0):
                raise SpaceViolation(f"default {d0!r} not in {lingo.name} output space")


def horizontal(spec: HorizontalSpec, seed: int = 0) -> Lingo:
    """Disjoint union of the branches, selected per message by a biased dice.

    Wire and parameter values are tagged with the branch index; the
    parameter's tag is authoritative.  Decoding a wire value whose tag does
    not match the parameter's branch yields that branch's decode of its
    default value, flagged as DefaultFallback so the dialect can reject it
    rather than deliver decoy plaintext.
    """
    spec.validate()
    branches = spec.branches
    name = "hor(" + ",".join(l.name for l in branches) + ")"
    out_space = TaggedSpace(tuple(l.output_space for l in branches))
    par_space = TaggedSpace(tuple(l.param_space for l in branches))
    ctor_seed = seed

    def f(batch, a):
        i = a.branch
        lingo = branches[i - 1]
        [w] = lingo.f(batch, a.inner)
        return [Tagged(i, w)]

    def g(batch, a):
        i = a.branch
        lingo = branches[i - 1]
        wire = batch[0]
        if isinstance(wire, Tagged) and wire.branch == i:
            return lingo.g([wire.inner], a.inner)
        decoy = lingo.g([spec.defaults[i - 1]], a.inner)
        if isinstance(decoy, (DecodeFailure, DefaultFallback)):
            return DecodeFailure("default decode failed on tag mismatch")
        return DefaultFallback(tuple(decoy))

    def param(n: int, seed: int) -> Value:
        i = throw_biased(seed ^ ctor_seed, n, spec.bias)
        return Tagged(i, branches[i - 1].param(n, seed))

    return Lingo(name=name, input_space=branches[0].input_space,
                 output_space=out_space, param_space=par_space,
                 f=f, g=g, param=param,
                 f_checkable=all(l.f_checkable for l in branches))


def functional(l1: Lingo, l2: Lingo) -> Lingo:
    """Pipeline: encode through l1 then l2, decode through l2 then l1.

    Both stages draw their parameter from the same message index, matching
    how sender and receiver evolve a single shared counter.
    """
    if l1.output_space != l2.input_space:
        raise SpaceViolation(
            f"{l1.name} output space does not match {l2.name} input space")
    if l1.egress_arity != 1 or l2.ingress_arity != 1:
        raise SpaceViolation("functional composition needs 1-arity junction")
    name = f"fun({l1.name},{l2.name})"

    def f(batch, a):
        mid = l1.f(batch, a.first)
        return l2.f(mid, a.second)

    def g(batch, a):
        mid = l2.g(batch, a.second)
        fell_back = isinstance(mid, DefaultFallback)
        if isinstance(mid, DecodeFailure):
            return mid
        if fell_back:
            mid = list(mid.values)
        out = l1.g(mid, a.first)
        if isinstance(out, DecodeFailure):
            return out
        inner_fallback = isinstance(out, DefaultFallback)
        if inner_fallback:
            out = list(out.values)
        if fell_back or inner_fallback:
            return DefaultFallback(tuple(out))
        return out

    def param(n: int, seed: int) -> Value:
        return Pair(l1.param(n, seed), l2.param(n, seed))

    return Lingo(name=name, input_space=l1.input_space,
                 output_space=l2.output_space,
                 param_space=PairSpace(l1.param_space, l2.param_space),
                 f=f, g=g, param=param,
                 ingress_arity=l1.ingress_arity, egress_arity=l2.egress_arity,
                 f_checkable=l2.f_checkable)


def _pairwise(ls: list[Lingo], combine) -> Lingo:
    if len(ls) < 2:
        raise SpaceViolation("composition needs >= 2 lingos")
    acc = ls[-1]
    for lingo in reversed(ls[:-1]):
        acc = combine(lingo, acc)
    return acc


def product(ls: list[Lingo]) -> Lingo:
    """Cartesian product: paired payloads transformed componentwise.
    k > 2 folds into nested pairs on the right."""
    return _pairwise(list(ls), _product2)


def _product2(l1: Lingo, l2: Lingo) -> Lingo:
    for lingo in (l1, l2):
        if (lingo.ingress_arity, lingo.egress_arity) != (1, 1):
            raise SpaceViolation("product components must have arities 1/1")
    name = f"prod({l1.name},{l2.name})"

    def f(batch, a):
        d = batch[0]
        [w1] = l1.f([d.first], a.first)
        [w2] = l2.f([d.second], a.second)
        return [Pair(w1, w2)]

    def g(batch, a):
        w = batch[0]
        r1 = l1.g([w.first], a.first)
        r2 = l2.g([w.second], a.second)
        if isinstance(r1, DecodeFailure):
            return r1
        if isinstance(r2, DecodeFailure):
            return r2
        fallback = isinstance(r1, DefaultFallback) or isinstance(r2, DefaultFallback)
        v1 = r1.values[0] if isinstance(r1, DefaultFallback) else r1[0]
        v2 = r2.values[0] if isinstance(r2, DefaultFallback) else r2[0]
        if fallback:
            return DefaultFallback((Pair(v1, v2),))
        return [Pair(v1, v2)]

    def param(n: int, seed: int) -> Value:
        return Pair(l1.param(n, seed), l2.param(n, seed))

    return Lingo(name=name,
                 input_space=PairSpace(l1.input_space, l2.input_space),
                 output_space=PairSpace(l1.output_space, l2.output_space),
                 param_space=PairSpace(l1.param_space, l2.param_space),
                 f=f, g=g, param=param,
                 f_checkable=l1.f_checkable or l2.f_checkable)


def tupling(ls: list[Lingo]) -> Lingo:
    """Fan the same payload through every branch; decode via the first.
    k > 2 folds into nested pairs on the right."""
    return _pairwise(list(ls), _tupling2)


def _tupling2(l1: Lingo, l2: Lingo) -> Lingo:
    if l1.input_space != l2.input_space:
        raise SpaceViolation("tupling needs a shared input space")
    for lingo in (l1, l2):
        if (lingo.ingress_arity, lingo.egress_arity) != (1, 1):
            raise SpaceViolation("tupling components must have arities 1/1")
    name = f"tup({l1.name},{l2.name})"

    def f(batch, a):
        [w1] = l1.f(batch, a.first)
        [w2] = l2.f(batch, a.second)
        return [Pair(w1, w2)]

    def g(batch, a):
        return l1.g([batch[0].first], a.first)

    def param(n: int, seed: int) -> Value:
        return Pair(l1.param(n, seed), l2.param(n, seed))

    # For a non-degenerate second output space some pair always lacks a
    # preimage (the second component is determined by the first).
    second_card = space_cardinality(l2.output_space)
    checkable = second_card is None or second_card >= 2

    return Lingo(name=name, input_space=l1.input_space,
                 output_space=PairSpace(l1.output_space, l2.output_space),
                 param_space=PairSpace(l1.param_space, l2.param_space),
                 f=f, g=g, param=param, f_checkable=checkable)
