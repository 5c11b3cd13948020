"""Concrete lingos: the xor family, divide-and-check, and helpers.

Constructors are pure and the resulting lingos immutable.  All shipped
lingos have ingress arity 1; the split lingo is the one with egress arity 2.
"""

from __future__ import annotations

from .core import DecodeFailure, Lingo, make_param
from .values import (
    BitVec,
    BitVecSpace,
    Nat,
    NatSpace,
    Pair,
    PairSpace,
    Space,
    AtomSetSpace,
    xor_value,
)

DC_PARAM_CEILING = 1 << 16


def make_xor_bitvec(width: int) -> Lingo:
    """xor over width-bit vectors; f and g are the same mask operation."""
    space = BitVecSpace(width)
    name = f"xor_bitvec{width}"
    op = lambda batch, a: [xor_value(batch[0], a)]
    return Lingo(name=name, input_space=space, output_space=space,
                 param_space=space, f=op, g=op, param=make_param(space, name))


def make_xor_nat() -> Lingo:
    """xor over naturals viewed as bit sequences of arbitrary length."""
    space = NatSpace()
    name = "xor_nat"
    op = lambda batch, a: [xor_value(batch[0], a)]
    return Lingo(name=name, input_space=space, output_space=space,
                 param_space=space, f=op, g=op, param=make_param(space, name))


def make_xor_set(universe: tuple[str, ...]) -> Lingo:
    """Symmetric difference over finite subsets of a fixed atom universe."""
    space = AtomSetSpace(tuple(universe))
    name = "xor_set"
    op = lambda batch, a: [xor_value(batch[0], a)]
    return Lingo(name=name, input_space=space, output_space=space,
                 param_space=space, f=op, g=op, param=make_param(space, name))


def make_divide_check(param_ceiling: int = DC_PARAM_CEILING) -> Lingo:
    """Divide-and-check: n maps to the (quotient, remainder) of n+a+2 by a+2.

    The receiver can cheaply reject any pair whose remainder reaches a+2,
    which is what makes the lingo f-checkable.  g rejects pairs that would
    need a negative payload instead of saturating them to 0: saturation
    would deliver forged junk as payload 0.
    """
    name = "divide_check"

    def f(batch, a):
        n, m = batch[0].n, a.n + 2
        return [Pair(Nat((n + m) // m), Nat((n + m) % m))]

    def g(batch, a):
        p, m = batch[0], a.n + 2
        total = p.first.n * m + p.second.n
        if total < m:
            return DecodeFailure("pair has no preimage (payload would be negative)")
        return [Nat(total - m)]

    return Lingo(name=name, input_space=NatSpace(),
                 output_space=PairSpace(NatSpace(), NatSpace()),
                 param_space=NatSpace(), f=f, g=g,
                 param=make_param(NatSpace(), name, nat_ceiling=param_ceiling),
                 f_checkable=True)


def make_reverse_divide_check(param_ceiling: int = DC_PARAM_CEILING) -> Lingo:
    """Divide-and-check with the pair components swapped on the wire."""
    base = make_divide_check(param_ceiling)
    name = "reverse_divide_check"

    def f(batch, a):
        [p] = base.f(batch, a)
        return [Pair(p.second, p.first)]

    def g(batch, a):
        p = batch[0]
        return base.g([Pair(p.second, p.first)], a)

    return Lingo(name=name, input_space=base.input_space,
                 output_space=base.output_space, param_space=base.param_space,
                 f=f, g=g, param=make_param(NatSpace(), name, nat_ceiling=param_ceiling),
                 f_checkable=True)


def make_identity(space: Space) -> Lingo:
    """No-op lingo over ``space``; the baseline every dialect degenerates to."""
    name = "identity"
    op = lambda batch, a: list(batch)
    return Lingo(name=name, input_space=space, output_space=space,
                 param_space=BitVecSpace(1), f=op, g=op,
                 param=make_param(BitVecSpace(1), name))


def make_split_bitvec(half_width: int) -> Lingo:
    """Mask a 2h-bit payload with the parameter, then split it into two
    h-bit wire values (egress arity 2).  Masking before the split forces a
    forger to know the parameter to recombine the halves."""
    h = half_width
    full = BitVecSpace(2 * h)
    half = BitVecSpace(h)
    name = f"split_bitvec{h}"
    lo_mask = (1 << h) - 1

    def f(batch, a):
        m = batch[0].bits ^ a.bits
        return [BitVec(h, m >> h), BitVec(h, m & lo_mask)]

    def g(batch, a):
        hi, lo = batch
        return [BitVec(2 * h, ((hi.bits << h) | lo.bits) ^ a.bits)]

    return Lingo(name=name, input_space=full, output_space=half,
                 param_space=full, f=f, g=g, param=make_param(full, name),
                 ingress_arity=1, egress_arity=2)
